//! Output rows and their aggregation.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Header of the per-point record CSV.
pub const RECORD_HEADER: &str = "n,h,realization,state,t,M,M_over_N,V_stag,theta,seed,restarts,converged";

/// One evaluation of M (and optionally the staggered variance) at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub h: f64,
    pub realization: usize,
    pub state: usize,
    pub t: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "M_over_N")]
    pub m_over_n: f64,
    #[serde(rename = "V_stag")]
    pub v_stag: Option<f64>,
    pub theta: Option<f64>,
    /// Disorder seed of the realization.
    pub seed: u64,
    pub restarts: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EthRecord {
    pub n: usize,
    pub h: f64,
    pub realization: usize,
    pub state: usize,
    pub time_averaged_variance: f64,
    pub thermal_variance: f64,
    pub difference: f64,
    pub difference_per_n: f64,
    pub difference_per_n2: f64,
    pub beta: f64,
    pub mean_energy: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbitRecord {
    pub n: usize,
    pub realization: usize,
    pub state: usize,
    pub t: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "M_over_N")]
    pub m_over_n: f64,
    /// Same quantity with the l-bit interactions switched off.
    #[serde(rename = "M_free_over_N")]
    pub m_free_over_n: f64,
    /// c² · max_B V_B of the initial state, over N.
    pub bound_over_n: f64,
    pub seed: u64,
}

/// Mean and standard error over realizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanErr {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanErr {
    /// Standard error uses the sample standard deviation; a single value
    /// gives NaN.
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            f64::NAN
        };
        Self { mean, stderr, count }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSummary {
    pub n: usize,
    pub h: f64,
    pub theta: Option<f64>,
    pub t: f64,
    #[serde(rename = "mean_M_over_N")]
    pub mean_m_over_n: f64,
    #[serde(rename = "stderr_M_over_N")]
    pub stderr_m_over_n: f64,
    pub realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturatedSummary {
    pub n: usize,
    pub h: f64,
    pub theta: Option<f64>,
    #[serde(rename = "mean_M_over_N")]
    pub mean_m_over_n: f64,
    #[serde(rename = "stderr_M_over_N")]
    pub stderr_m_over_n: f64,
    #[serde(rename = "mean_V_stag_over_N")]
    pub mean_v_stag_over_n: Option<f64>,
    #[serde(rename = "stderr_V_stag_over_N")]
    pub stderr_v_stag_over_n: Option<f64>,
    pub realizations: usize,
    pub window_start: f64,
    pub window_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EthSummary {
    pub n: usize,
    pub h: f64,
    pub mean_abs_difference_per_n2: f64,
    pub stderr_abs_difference_per_n2: f64,
    pub mean_difference_per_n2: f64,
    pub realizations: usize,
}

type GroupKey = (usize, u64, Option<u64>);

fn key(r: &RunRecord) -> GroupKey {
    (r.n, r.h.to_bits(), r.theta.map(f64::to_bits))
}

/// Per (n, h, θ): realization index -> values, in record order.
fn by_realization<'a>(
    records: impl Iterator<Item = &'a RunRecord>,
    value: impl Fn(&RunRecord) -> Option<f64>,
) -> BTreeMap<GroupKey, BTreeMap<usize, Vec<f64>>> {
    let mut out: BTreeMap<GroupKey, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in records {
        if let Some(v) = value(r) {
            out.entry(key(r)).or_default().entry(r.realization).or_default().push(v);
        }
    }
    out
}

fn realization_means(per: &BTreeMap<usize, Vec<f64>>) -> Vec<f64> {
    per.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect()
}

/// Cross-realization mean of M/N at every time. States are averaged
/// inside each realization first.
pub fn time_summary(records: &[RunRecord]) -> Vec<TimeSummary> {
    let mut times: BTreeMap<(GroupKey, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        times.entry((key(r), r.t.to_bits())).or_default().push(r);
    }
    times
        .into_iter()
        .map(|((k, t), rs)| {
            let per = by_realization(rs.into_iter(), |r| Some(r.m_over_n));
            let s = MeanErr::of(&realization_means(&per[&k]));
            TimeSummary {
                n: k.0,
                h: f64::from_bits(k.1),
                theta: k.2.map(f64::from_bits),
                t: f64::from_bits(t),
                mean_m_over_n: s.mean,
                stderr_m_over_n: s.stderr,
                realizations: s.count,
            }
        })
        .collect()
}

/// Saturated values: mean over the window times and states of each
/// realization, then mean and standard error across realizations.
pub fn saturated_summary(records: &[RunRecord], window: [f64; 2]) -> Vec<SaturatedSummary> {
    let tol = 1e-12 * window[1].max(1.0);
    let inside = || {
        records
            .iter()
            .filter(move |r| r.t >= window[0] - tol && r.t <= window[1] + tol)
    };
    let m = by_realization(inside(), |r| Some(r.m_over_n));
    let v = by_realization(inside(), |r| r.v_stag.map(|v| v / r.n as f64));
    m.into_iter()
        .map(|(k, per)| {
            let sm = MeanErr::of(&realization_means(&per));
            let sv = v.get(&k).map(|p| MeanErr::of(&realization_means(p)));
            SaturatedSummary {
                n: k.0,
                h: f64::from_bits(k.1),
                theta: k.2.map(f64::from_bits),
                mean_m_over_n: sm.mean,
                stderr_m_over_n: sm.stderr,
                mean_v_stag_over_n: sv.map(|s| s.mean),
                stderr_v_stag_over_n: sv.map(|s| s.stderr),
                realizations: sm.count,
                window_start: window[0],
                window_end: window[1],
            }
        })
        .collect()
}

pub fn eth_summary(records: &[EthRecord]) -> Vec<EthSummary> {
    let mut groups: BTreeMap<(usize, u64), BTreeMap<usize, Vec<(f64, f64)>>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.n, r.h.to_bits()))
            .or_default()
            .entry(r.realization)
            .or_default()
            .push((r.difference_per_n2.abs(), r.difference_per_n2));
    }
    groups
        .into_iter()
        .map(|((n, h), per)| {
            let mean = |f: fn(&(f64, f64)) -> f64| -> Vec<f64> {
                per.values()
                    .map(|v| v.iter().map(f).sum::<f64>() / v.len() as f64)
                    .collect()
            };
            let abs = MeanErr::of(&mean(|p| p.0));
            let signed = MeanErr::of(&mean(|p| p.1));
            EthSummary {
                n,
                h: f64::from_bits(h),
                mean_abs_difference_per_n2: abs.mean,
                stderr_abs_difference_per_n2: abs.stderr,
                mean_difference_per_n2: signed.mean,
                realizations: abs.count,
            }
        })
        .collect()
}

pub fn write_csv<W: Write, R: Serialize>(w: W, rows: &[R]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: std::io::Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(realization: usize, state: usize, t: f64, m_over_n: f64) -> RunRecord {
        RunRecord {
            n: 4,
            h: 1.0,
            realization,
            state,
            t,
            m: 4.0 * m_over_n,
            m_over_n,
            v_stag: None,
            theta: None,
            seed: 0,
            restarts: 16,
            converged: true,
        }
    }

    #[test]
    fn header_matches_record_fields() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[rec(0, 0, 1.0, 2.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), RECORD_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "4,1.0,0,0,1.0,8.0,2.0,,,0,16,true");
        assert_eq!(read_records(text.as_bytes()).unwrap(), vec![rec(0, 0, 1.0, 2.0)]);
    }

    #[test]
    fn states_averaged_before_realizations() {
        // realization 0: states 1 and 3 -> mean 2; realization 1: 4
        let rs = vec![rec(0, 0, 1.0, 1.0), rec(0, 1, 1.0, 3.0), rec(1, 0, 1.0, 4.0)];
        let s = time_summary(&rs);
        assert_eq!(s.len(), 1);
        assert!((s[0].mean_m_over_n - 3.0).abs() < 1e-15);
        assert!((s[0].stderr_m_over_n - 1.0).abs() < 1e-15);
        assert_eq!(s[0].realizations, 2);
    }

    #[test]
    fn saturated_uses_window_only() {
        let rs = vec![rec(0, 0, 1.0, 100.0), rec(0, 0, 10.0, 2.0), rec(1, 0, 10.0, 4.0)];
        let s = saturated_summary(&rs, [5.0, 10.0]);
        assert!((s[0].mean_m_over_n - 3.0).abs() < 1e-15);
        assert_eq!(s[0].mean_v_stag_over_n, None);
    }

    #[test]
    fn single_value_has_undefined_error() {
        let s = MeanErr::of(&[2.0]);
        assert_eq!(s.mean, 2.0);
        assert!(s.stderr.is_nan());
    }
}
