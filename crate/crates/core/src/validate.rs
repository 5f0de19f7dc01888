//! Self-check suite over the module invariants, runnable from a release
//! binary. Every check is deterministic for a given seed.

use std::fmt;
use std::time::Instant;

use num_complex::Complex;
use rand::Rng;

use crate::dynamics::{diagonal_ensemble_average, diagonalize, SpectralState};
use crate::lbits::generate_lbit_model;
use crate::macroscopicity::{max_signed_variance, maximize, staggered_variance, MaximizeOptions};
use crate::models::{build_xxz, sample_disorder, Boundary, ModelParams, Preset};
use crate::observable::{Observable, Pauli};
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::spin::{
    inner, random_ghz, random_unit_vector, Axis, CorrelationMatrix, DirectionField, StateVector,
};
use crate::thermal::canonical_energy;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<40} {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn run(name: &'static str, f: impl FnOnce() -> (bool, String)) -> Check {
    let start = Instant::now();
    let (passed, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(_) => (false, "panicked".to_string()),
    };
    Check {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn random_state(n: usize, rng: &mut impl Rng) -> StateVector<f64> {
    let amps = (0..1 << n)
        .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::normalized(n, amps).expect("non-zero random vector")
}

fn heisenberg(n: usize, h: f64, seed: u64) -> crate::models::Hamiltonian<f64> {
    let p = ModelParams::preset(Preset::Heisenberg, n, h).expect("valid preset");
    build_xxz(&p, &sample_disorder(&p, seed, 0)).expect("within capacity")
}

/// Runs every invariant check.
pub fn run_all(seed: u64) -> ValidationReport {
    let sub = |k: u64| derive_seed(seed, stream::VALIDATION, k);
    let mut checks = Vec::new();

    checks.push(run("correlation matrix symmetric PSD", || {
        let mut rng = rng_from_seed(sub(0));
        let mut worst_sym = 0.0f64;
        let mut min_eig = f64::INFINITY;
        let mut trace_ok = true;
        for n in 2..=6 {
            for _ in 0..5 {
                let c = CorrelationMatrix::from_state(&random_state(n, &mut rng)).unwrap();
                worst_sym = worst_sym.max((c.matrix() - c.matrix().transpose()).abs().max());
                min_eig = min_eig.min(c.min_eigenvalue().unwrap());
                for i in 0..n {
                    let b = c.block(i, i);
                    let tr = b[0][0] + b[1][1] + b[2][2];
                    trace_ok &= (2.0 - 1e-10..=3.0 + 1e-10).contains(&tr);
                }
            }
        }
        (
            worst_sym < 1e-10 && min_eig >= -1e-9 && trace_ok,
            format!("asym {worst_sym:.1e}, min eig {min_eig:.2e}"),
        )
    }));

    checks.push(run("quadratic form equals direct variance", || {
        let mut rng = rng_from_seed(sub(1));
        let mut worst = 0.0f64;
        let mut min_v = f64::INFINITY;
        for n in 1..=4 {
            let psi = random_state(n, &mut rng);
            let c = CorrelationMatrix::from_state(&psi).unwrap();
            for _ in 0..250 {
                let d = DirectionField::random(n, &mut rng);
                let q = c.quadratic_form(&d.flatten());
                worst = worst.max((q - d.direct_variance(&psi).unwrap()).abs());
                min_v = min_v.min(q);
            }
        }
        (worst < 1e-9 && min_v >= -1e-9, format!("max dev {worst:.1e}"))
    }));

    checks.push(run("pauli involution", || {
        let mut rng = rng_from_seed(sub(2));
        let psi = random_state(5, &mut rng);
        let mut worst = 0.0f64;
        for site in 0..5 {
            for axis in Axis::ALL {
                let twice = psi.apply_pauli(site, axis).unwrap().apply_pauli(site, axis).unwrap();
                for (a, b) in twice.amplitudes().iter().zip(psi.amplitudes()) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        (worst < 1e-12, format!("max dev {worst:.1e}"))
    }));

    checks.push(run("hamiltonian hermitian, Sz symmetry", || {
        let mut worst_herm = 0.0f64;
        let mut worst_comm = 0.0f64;
        for n in [4usize, 6] {
            let p = ModelParams::new(n, 1.0, 0.8, 3.0, 0.0, Boundary::Periodic).unwrap();
            let h = build_xxz(&p, &sample_disorder(&p, sub(3), n as u64)).unwrap();
            let m = h.matrix();
            worst_herm = worst_herm.max((m - m.transpose()).abs().max());
            let d = h.dim();
            for r in 0..d {
                for c in 0..d {
                    let dz = (r.count_ones() as f64) - (c.count_ones() as f64);
                    worst_comm = worst_comm.max((m[(r, c)] * 2.0 * dz).abs());
                }
            }
        }
        (
            worst_herm <= 1e-12 && worst_comm < 1e-10,
            format!("herm {worst_herm:.1e}, [H,Jz] {worst_comm:.1e}"),
        )
    }));

    checks.push(run("eigen residuals and orthonormality", || {
        let h = heisenberg(8, 2.0, sub(4));
        let eig = diagonalize(&h).unwrap();
        let mut rng = rng_from_seed(sub(5));
        let picks: Vec<usize> = (0..32).map(|_| rng.random_range(0..eig.dim())).collect();
        let res = eig.max_residual(&h, &picks);
        let v = eig.vectors();
        let gram = v.transpose() * v;
        let orth = (gram - nalgebra::DMatrix::identity(eig.dim(), eig.dim())).abs().max();
        (
            res <= 1e-9 * h.norm_bound() && orth < 1e-10,
            format!("residual {res:.1e}, orth {orth:.1e}"),
        )
    }));

    checks.push(run("unitarity, Parseval, energy conservation", || {
        let h = heisenberg(8, 1.0, sub(6));
        let eig = diagonalize(&h).unwrap();
        let psi = random_ghz::<f64, _>(8, &mut rng_from_seed(sub(7))).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let parseval = (sp.total_weight() - 1.0).abs();
        let e0 = inner(psi.amplitudes(), &h.apply(psi.amplitudes())).re;
        let times: Vec<f64> = (0..50).map(|k| 10f64.powf(-1.0 + 5.0 * k as f64 / 49.0)).collect();
        let mut worst_norm = 0.0f64;
        let mut worst_e = 0.0f64;
        for s in sp.evolve_many(&times) {
            worst_norm = worst_norm.max((s.norm() - 1.0).abs());
            let e = inner(s.amplitudes(), &h.apply(s.amplitudes())).re;
            worst_e = worst_e.max((e - e0).abs() / e0.abs().max(1.0));
        }
        (
            parseval < 1e-10 && worst_norm < 1e-10 && worst_e < 1e-9,
            format!("parseval {parseval:.1e}, norm {worst_norm:.1e}, energy {worst_e:.1e}"),
        )
    }));

    checks.push(run("diagonal ensemble vs sampled time average", || {
        let n = 6;
        let h = heisenberg(n, 1.0, sub(8));
        let eig = diagonalize(&h).unwrap();
        let psi = random_ghz::<f64, _>(n, &mut rng_from_seed(sub(9))).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let obs = Pauli { n_sites: n, site: 0, axis: Axis::Z };
        let target = diagonal_ensemble_average(&sp, &obs);
        let mut rng = rng_from_seed(sub(10));
        // mean |deviation| over repeated batches at growing sample counts
        let deviation = |m: usize, rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
            let reps = 8;
            (0..reps)
                .map(|_| {
                    let times: Vec<f64> = (0..m).map(|_| 1e4 * rng.random::<f64>()).collect();
                    let avg = sp
                        .evolve_many(&times)
                        .iter()
                        .map(|s| obs.expectation(s.amplitudes()))
                        .sum::<f64>()
                        / m as f64;
                    (avg - target).abs()
                })
                .sum::<f64>()
                / reps as f64
        };
        let small = deviation(125, &mut rng);
        let large = deviation(2000, &mut rng);
        (
            large < 5e-3 && large < small,
            format!("dev(125) {small:.2e}, dev(2000) {large:.2e}"),
        )
    }));

    checks.push(run("canonical energy decreasing in beta", || {
        let eig = diagonalize(&heisenberg(7, 1.5, sub(11))).unwrap();
        let mut prev = f64::INFINITY;
        let mut ok = true;
        for k in 0..20 {
            let e = canonical_energy(&eig, -3.0 + 0.3 * k as f64).unwrap();
            ok &= e < prev;
            prev = e;
        }
        (ok, "20-point beta grid".to_string())
    }));

    checks.push(run("l-bit conservation laws", || {
        let n = 6;
        let model = generate_lbit_model::<f64>(n, 1.0, 1.0, 0.5, sub(12)).unwrap();
        let psi = random_ghz::<f64, _>(n, &mut rng_from_seed(sub(13))).unwrap();
        let c0 = CorrelationMatrix::from_state(&psi).unwrap();
        let ev = model.evolver();
        let mut worst = 0.0f64;
        let mut worst_norm = 0.0f64;
        for k in 0..30 {
            let s = ev.evolve(&psi, 0.37 * (k * k) as f64).unwrap();
            worst_norm = worst_norm.max((s.norm() - 1.0).abs());
            let c = CorrelationMatrix::from_state(&s).unwrap();
            for i in 0..n {
                worst = worst.max((c.mean_spins()[i][2] - c0.mean_spins()[i][2]).abs());
                for j in 0..n {
                    let (p, q) = (3 * i + 2, 3 * j + 2);
                    worst = worst.max((c.matrix()[(p, q)] - c0.matrix()[(p, q)]).abs());
                }
            }
        }
        (
            worst < 1e-12 && worst_norm < 1e-12,
            format!("zz drift {worst:.1e}, norm {worst_norm:.1e}"),
        )
    }));

    checks.push(run("maximizer bounds and staggered floor", || {
        let mut rng = rng_from_seed(sub(14));
        let opts = MaximizeOptions::default();
        let mut ok = true;
        let mut detail = String::new();
        for n in [2usize, 4, 6] {
            let psi = random_state(n, &mut rng);
            let c = CorrelationMatrix::from_state(&psi).unwrap();
            let r = maximize(&c, &opts).unwrap();
            let nf = n as f64;
            let stag = (0..32)
                .map(|k| staggered_variance(&psi, std::f64::consts::PI * k as f64 / 31.0).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let pass = r.value >= nf - 1e-6 && r.value <= nf * nf + 1e-6 && r.value >= stag - 1e-6;
            if !pass {
                detail = format!("n={n}: M={}, staggered max {stag}", r.value);
            }
            ok &= pass;
        }
        (ok, if ok { "N <= M <= N^2".to_string() } else { detail })
    }));

    checks.push(run("sign enumeration flip invariance", || {
        let mut rng = rng_from_seed(sub(15));
        let n = 6;
        let c = CorrelationMatrix::from_state(&random_state(n, &mut rng)).unwrap();
        let axes: Vec<[f64; 3]> = (0..n).map(|_| random_unit_vector(&mut rng)).collect();
        let neg: Vec<[f64; 3]> = axes.iter().map(|a| [-a[0], -a[1], -a[2]]).collect();
        let a = max_signed_variance(&c, &axes).unwrap().value;
        let b = max_signed_variance(&c, &neg).unwrap().value;
        ((a - b).abs() < 1e-12, format!("{a:.6} vs {b:.6}"))
    }));

    ValidationReport { checks }
}
