//! Canonical and microcanonical ensembles built on a full eigendecomposition,
//! and the comparison between time-averaged and thermal fluctuations of a
//! macroscopic observable.
//!
//! Temperatures are carried as β = 1/T (k_B = 1). States above the middle of
//! the spectrum need β < 0, which every routine here accepts.

use num_complex::Complex;

use crate::dynamics::{temporal_fluctuation, EigenDecomposition, SpectralState};
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::scalar::Real;
use crate::spin::{inner, norm_sqr, DirectionField};

/// Default microcanonical half-width as a fraction of the spectral width.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.025;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnsembleSpec<T> {
    Canonical { beta: T },
    Microcanonical { center: T, half_width: T },
    Diagonal,
}

impl<T: Real> EnsembleSpec<T> {
    /// Microcanonical window of the default width around `center`.
    pub fn default_window(eig: &EigenDecomposition<T>, center: T) -> Self {
        EnsembleSpec::Microcanonical {
            center,
            half_width: eig.spectral_width() * T::lit(DEFAULT_WINDOW_FRACTION),
        }
    }

    /// Average of an observable. The diagonal ensemble needs the state.
    pub fn average<O: Observable<T> + ?Sized>(
        &self,
        eig: &EigenDecomposition<T>,
        observable: &O,
        state: Option<&SpectralState<'_, T>>,
    ) -> Result<T> {
        match *self {
            EnsembleSpec::Canonical { beta } => canonical_average(eig, observable, beta),
            EnsembleSpec::Microcanonical { center, half_width } => {
                microcanonical_average(eig, observable, center, half_width).map(|m| m.value)
            }
            EnsembleSpec::Diagonal => {
                let sp = state.ok_or_else(|| {
                    Error::Validation("the diagonal ensemble needs an initial state".into())
                })?;
                Ok(crate::dynamics::diagonal_ensemble_average(sp, observable))
            }
        }
    }
}

/// Normalized Boltzmann weights e^{−βE_α}/Z with the exponent shifted so the
/// largest weight is 1 before normalization.
pub fn boltzmann_weights<T: Real>(energies: &[T], beta: T) -> Result<Vec<T>> {
    if !beta.is_finite() {
        return Err(Error::NumericalRange(format!("beta = {beta} is not finite")));
    }
    let shift = if beta >= T::zero() {
        energies.iter().copied().fold(T::infinity(), T::min)
    } else {
        energies.iter().copied().fold(T::neg_infinity(), T::max)
    };
    let mut w: Vec<T> = energies.iter().map(|e| (-beta * (*e - shift)).exp()).collect();
    let z: T = w.iter().copied().sum();
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::NumericalRange(format!(
            "partition function {z} at beta = {beta}"
        )));
    }
    for x in &mut w {
        *x /= z;
    }
    Ok(w)
}

/// Σ_α w_α d_α with Boltzmann weights over precomputed diagonal elements.
pub fn canonical_from_diagonal<T: Real>(energies: &[T], diagonal: &[T], beta: T) -> Result<T> {
    let w = boltzmann_weights(energies, beta)?;
    Ok(w.iter().zip(diagonal).map(|(a, b)| *a * *b).sum())
}

/// ⟨O⟩_β = Tr[e^{−βH}O]/Tr[e^{−βH}].
pub fn canonical_average<T: Real, O: Observable<T> + ?Sized>(
    eig: &EigenDecomposition<T>,
    observable: &O,
    beta: T,
) -> Result<T> {
    canonical_from_diagonal(eig.energies(), &eig.diagonal_elements(observable), beta)
}

/// ⟨H⟩_β.
pub fn canonical_energy<T: Real>(eig: &EigenDecomposition<T>, beta: T) -> Result<T> {
    canonical_from_diagonal(eig.energies(), eig.energies(), beta)
}

/// Solves ⟨H⟩_β = `e_target` for β by bisection, using that ⟨H⟩_β is
/// strictly decreasing. The search interval is ±10³/(E_max − E_min).
pub fn match_temperature<T: Real>(eig: &EigenDecomposition<T>, e_target: T) -> Result<T> {
    let (lo_e, hi_e) = (eig.min_energy(), eig.max_energy());
    if !(e_target > lo_e && e_target < hi_e) {
        return Err(Error::Domain(format!(
            "target energy {e_target} outside the open spectral interval ({lo_e}, {hi_e})"
        )));
    }
    let width = hi_e - lo_e;
    let tol = T::lit(1e-9) * width;
    let cap = T::lit(1e3) / width;
    let energy = |b: T| canonical_energy(eig, b);
    // ⟨H⟩ is largest at −cap
    let (mut lo_b, mut hi_b) = (-cap, cap);
    let (e_hot, e_cold) = (energy(lo_b)?, energy(hi_b)?);
    if e_target > e_hot + tol || e_target < e_cold - tol {
        return Err(Error::Domain(format!(
            "target energy {e_target} not reachable with |beta| <= {cap}"
        )));
    }
    let mut mid = T::zero();
    for _ in 0..400 {
        mid = (lo_b + hi_b) / T::lit(2.0);
        let e = energy(mid)?;
        if (e - e_target).abs() <= tol {
            return Ok(mid);
        }
        if e > e_target {
            lo_b = mid;
        } else {
            hi_b = mid;
        }
        if hi_b - lo_b <= T::epsilon() * cap {
            break;
        }
    }
    Ok(mid)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicrocanonicalAverage<T> {
    pub value: T,
    /// Number of eigenstates in the window.
    pub count: usize,
}

pub fn microcanonical_from_diagonal<T: Real>(
    energies: &[T],
    diagonal: &[T],
    center: T,
    half_width: T,
) -> Result<MicrocanonicalAverage<T>> {
    let mut sum = T::zero();
    let mut count = 0usize;
    for (e, d) in energies.iter().zip(diagonal) {
        if (*e - center).abs() <= half_width {
            sum += *d;
            count += 1;
        }
    }
    if count == 0 {
        let nearest = energies
            .iter()
            .copied()
            .min_by(|a, b| {
                (*a - center)
                    .abs()
                    .partial_cmp(&(*b - center).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(T::nan());
        return Err(Error::Domain(format!(
            "empty microcanonical window {center} ± {half_width}; nearest eigenvalue {nearest}"
        )));
    }
    Ok(MicrocanonicalAverage {
        value: sum / T::lit(count as f64),
        count,
    })
}

/// Unweighted mean of ⟨α|O|α⟩ over |E_α − Ē| ≤ ΔE.
pub fn microcanonical_average<T: Real, O: Observable<T> + ?Sized>(
    eig: &EigenDecomposition<T>,
    observable: &O,
    center: T,
    half_width: T,
) -> Result<MicrocanonicalAverage<T>> {
    microcanonical_from_diagonal(eig.energies(), &eig.diagonal_elements(observable), center, half_width)
}

/// Time-averaged versus thermal fluctuations of A = Σ_i α_i·σ^(i).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EthReport<T> {
    /// Long-time mean of ⟨A²⟩ − ⟨A⟩².
    pub time_averaged_variance: T,
    /// ⟨A²⟩_β − ⟨A⟩_β² at the matched temperature.
    pub thermal_variance: T,
    pub difference: T,
    pub difference_per_n: T,
    pub difference_per_n2: T,
    pub beta: T,
    pub mean_energy: T,
}

/// The long-time mean of V_A(t) is \overline{A²} − Ā² − δ, with δ the
/// temporal fluctuation of ⟨A(t)⟩; it is compared against the canonical
/// variance at the temperature whose mean energy matches the state.
pub fn eth_fluctuation_report<T: Real>(
    eig: &EigenDecomposition<T>,
    spectral: &SpectralState<'_, T>,
    dirs: &DirectionField<T>,
) -> Result<EthReport<T>> {
    if dirs.n_sites() != eig.n_sites() {
        return Err(Error::Validation(format!(
            "direction field has {} sites, eigenbasis has {}",
            dirs.n_sites(),
            eig.n_sites()
        )));
    }
    let mut a_mean = T::zero();
    let mut a2_mean = T::zero();
    for (p, u) in spectral.dephased_components() {
        let au = dirs.apply_observable(&u);
        a_mean += p * inner(&u, &au).re;
        a2_mean += p * norm_sqr(&au);
    }
    let fluct = temporal_fluctuation(spectral, dirs);
    let time_averaged_variance = a2_mean - a_mean * a_mean - fluct;

    let mean_energy = spectral.mean_energy();
    let beta = match_temperature(eig, mean_energy)?;
    let (diag_a, diag_a2): (Vec<T>, Vec<T>) = (0..eig.dim())
        .map(|k| {
            let v: Vec<Complex<T>> = eig.vector(k);
            let av = dirs.apply_observable(&v);
            (inner(&v, &av).re, norm_sqr(&av))
        })
        .unzip();
    let w = boltzmann_weights(eig.energies(), beta)?;
    let thermal_a: T = w.iter().zip(&diag_a).map(|(a, b)| *a * *b).sum();
    let thermal_a2: T = w.iter().zip(&diag_a2).map(|(a, b)| *a * *b).sum();
    let thermal_variance = thermal_a2 - thermal_a * thermal_a;
    let difference = time_averaged_variance - thermal_variance;
    let n = T::lit(eig.n_sites() as f64);
    Ok(EthReport {
        time_averaged_variance,
        thermal_variance,
        difference,
        difference_per_n: difference / n,
        difference_per_n2: difference / (n * n),
        beta,
        mean_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{diagonal_ensemble_average, diagonalize};
    use crate::models::{build_xxz, sample_disorder, Boundary, DisorderRealization, ModelParams, Preset};
    use crate::observable::Pauli;
    use crate::seed::rng_from_seed;
    use crate::spin::{random_ghz, Axis};
    use nalgebra::DMatrix;

    fn disordered(n: usize, h: f64, seed: u64) -> EigenDecomposition<f64> {
        let p = ModelParams::preset(Preset::Heisenberg, n, h).unwrap();
        diagonalize(&build_xxz(&p, &sample_disorder(&p, seed, 0)).unwrap()).unwrap()
    }

    #[test]
    fn infinite_temperature_is_trace() {
        let eig = disordered(5, 1.0, 1);
        let obs = Pauli { n_sites: 5, site: 0, axis: Axis::Z };
        assert!(canonical_average(&eig, &obs, 0.0).unwrap().abs() < 1e-12);
        // Tr[H]/D straight from the matrix
        let p = ModelParams::preset(Preset::Heisenberg, 5, 1.0).unwrap();
        let h = build_xxz(&p, &sample_disorder(&p, 1, 0)).unwrap();
        let e = canonical_energy(&eig, 0.0).unwrap();
        assert!((e - h.mean_energy()).abs() < 1e-12);
    }

    #[test]
    fn zero_temperature_limit() {
        let p = ModelParams::new(2, 1.0, 1.0, 0.0, 0.0, Boundary::Open).unwrap();
        let h = build_xxz(&p, &DisorderRealization::clean(2)).unwrap();
        let eig = diagonalize(&h).unwrap();
        let e = canonical_energy(&eig, 1e3).unwrap();
        assert!((e + 0.75f64).abs() < 1e-9);
    }

    #[test]
    fn canonical_matches_dense_trace() {
        // O = s¹·s² on the open pair, against Tr[e^{−βH}O]/Tr[e^{−βH}] with
        // e^{−βH} built by explicit eigen-reconstruction of the 4×4 matrix.
        let p = ModelParams::new(2, 1.0, 1.0, 0.0, 0.0, Boundary::Open).unwrap();
        let h = build_xxz(&p, &DisorderRealization::clean(2)).unwrap();
        let eig = diagonalize(&h).unwrap();
        let obs = |v: &[Complex<f64>]| h.apply(v); // H = s¹·s² here
        for beta in [-2.0, -0.3, 0.0, 0.5, 3.0] {
            let got = canonical_average(&eig, &obs, beta).unwrap();
            // closed form: singlet −3/4 once, triplet +1/4 three times
            let zs = (0.75f64 * beta).exp();
            let zt = 3.0 * (-0.25f64 * beta).exp();
            let want = (-0.75 * zs + 0.25 * zt) / (zs + zt);
            assert!((got - want).abs() < 1e-12);
            // dense: expm via series on the 4×4 matrix
            let m = h.matrix() * (-beta);
            let mut term = DMatrix::<f64>::identity(4, 4);
            let mut expm = DMatrix::<f64>::identity(4, 4);
            for k in 1..60 {
                term = &term * &m / k as f64;
                expm += &term;
            }
            let dense = (&expm * h.matrix()).trace() / expm.trace();
            assert!((got - dense).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_decreasing_in_beta() {
        for seed in 0..3 {
            let eig = disordered(6, 1.0 + seed as f64, seed);
            let mut prev = f64::INFINITY;
            for k in 0..20 {
                let beta = -2.0 + 0.2 * k as f64;
                let e = canonical_energy(&eig, beta).unwrap();
                assert!(e < prev);
                prev = e;
            }
        }
    }

    #[test]
    fn match_temperature_examples() {
        let eig = disordered(6, 2.0, 3);
        let mid = canonical_energy(&eig, 0.0).unwrap();
        assert!(match_temperature(&eig, mid).unwrap().abs() < 1e-6);

        let two_level = EigenDecomposition::from_matrix(1, &DMatrix::<f64>::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(match_temperature(&two_level, 0.0).unwrap().abs() < 1e-9);

        assert!(matches!(match_temperature(&eig, eig.max_energy()), Err(Error::Domain(_))));
        assert!(matches!(match_temperature(&eig, eig.min_energy() - 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn match_temperature_round_trip_n8() {
        let eig = disordered(8, 1.0, 4);
        let psi = random_ghz::<f64, _>(8, &mut rng_from_seed(5)).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let target = sp.mean_energy();
        let beta = match_temperature(&eig, target).unwrap();
        let back = canonical_energy(&eig, beta).unwrap();
        assert!((back - target).abs() < 1e-8);
        // above the middle of the spectrum the temperature is negative
        let hot = canonical_energy(&eig, -0.5).unwrap();
        assert!(match_temperature(&eig, hot).unwrap() < 0.0);
    }

    #[test]
    fn microcanonical_examples() {
        let eig = disordered(5, 1.0, 6);
        let obs = Pauli { n_sites: 5, site: 1, axis: Axis::Z };
        let center = (eig.min_energy() + eig.max_energy()) / 2.0;
        let all = microcanonical_average(&eig, &obs, center, eig.spectral_width()).unwrap();
        assert_eq!(all.count, 32);
        assert!((all.value - canonical_average(&eig, &obs, 0.0).unwrap()).abs() < 1e-12);

        let e7 = eig.energies()[7];
        let gap = (eig.energies()[8] - e7).min(e7 - eig.energies()[6]);
        let one = microcanonical_average(&eig, &obs, e7, gap / 4.0).unwrap();
        assert_eq!(one.count, 1);
        assert!((one.value - eig.diagonal_elements(&obs)[7]).abs() < 1e-14);

        let err = microcanonical_average(&eig, &obs, eig.max_energy() + 10.0, 0.1).unwrap_err();
        assert!(err.to_string().contains("nearest eigenvalue"));
    }

    #[test]
    fn microcanonical_tracks_diagonal_ensemble() {
        let eig = disordered(8, 0.5, 7);
        let psi = random_ghz::<f64, _>(8, &mut rng_from_seed(8)).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let obs = Pauli { n_sites: 8, site: 0, axis: Axis::Z };
        let diag = diagonal_ensemble_average(&sp, &obs);
        let half = 0.05 * eig.spectral_width() / 2.0;
        let mc = microcanonical_average(&eig, &obs, sp.mean_energy(), half).unwrap();
        assert!((diag - mc.value).abs() < 0.05, "{diag} vs {}", mc.value);
    }

    #[test]
    fn ensemble_spec_dispatch() {
        let eig = disordered(4, 1.0, 9);
        let obs = Pauli { n_sites: 4, site: 0, axis: Axis::Z };
        let psi = eig.eigenstate(3);
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let diag = EnsembleSpec::Diagonal.average(&eig, &obs, Some(&sp)).unwrap();
        assert!((diag - eig.diagonal_elements(&obs)[3]).abs() < 1e-12);
        assert!(EnsembleSpec::Diagonal.average(&eig, &obs, None).is_err());
        let w = EnsembleSpec::default_window(&eig, eig.energies()[3]);
        assert!(w.average(&eig, &obs, None).is_ok());
    }

    #[test]
    fn eth_report_on_eigenstate() {
        let eig = disordered(6, 1.0, 10);
        let psi = eig.eigenstate(20);
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let dirs = DirectionField::uniform(6, [0.0, 0.0, 1.0]).unwrap();
        let r = eth_fluctuation_report(&eig, &sp, &dirs).unwrap();
        let direct = dirs.direct_variance(&psi).unwrap();
        assert!((r.time_averaged_variance - direct).abs() < 1e-10);
        assert!((r.difference - (direct - r.thermal_variance)).abs() < 1e-10);
    }

    #[test]
    fn eth_report_thermal_vs_mbl() {
        let n = 8;
        let report = |h: f64| {
            let eig = disordered(n, h, 11);
            let mut rng = rng_from_seed(12);
            let psi = random_ghz::<f64, _>(n, &mut rng).unwrap();
            let sp = SpectralState::new(&eig, &psi).unwrap();
            // the observable that is maximal on the initial GHZ state
            let c = crate::spin::CorrelationMatrix::from_state(&psi).unwrap();
            let m = crate::macroscopicity::maximize(&c, &Default::default()).unwrap();
            eth_fluctuation_report(&eig, &sp, &m.argmax).unwrap()
        };
        let thermal = report(0.5);
        let mbl = report(5.0);
        assert!(thermal.difference_per_n2.abs() < 0.1, "{thermal:?}");
        assert!(mbl.difference_per_n2.abs() > thermal.difference_per_n2.abs());
    }
}
