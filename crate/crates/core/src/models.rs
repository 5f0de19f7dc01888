//! Dense Hamiltonians for the disordered XXZ family
//!
//! H = Σ_i J⊥(s_x^i s_x^{i+1} + s_y^i s_y^{i+1}) + J_z s_z^i s_z^{i+1} + h_i s_z^i + Γ s_x^i
//!
//! with s = σ/2. Every term is real in the computational basis, so the matrix
//! is stored as a real symmetric one.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::spin::{site_mask, DEFAULT_MAX_SITES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// J⊥ = J_z = 1, Γ = 0.1, periodic.
    Heisenberg,
    /// J⊥ = 1, J_z = 0, Γ = 0, periodic. Maps onto free fermions.
    XxAnderson,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T: Real> {
    pub n_sites: usize,
    pub j_perp: T,
    pub j_z: T,
    pub h_strength: T,
    pub gamma: T,
    pub boundary: Boundary,
}

impl<T: Real> ModelParams<T> {
    pub fn new(
        n_sites: usize,
        j_perp: T,
        j_z: T,
        h_strength: T,
        gamma: T,
        boundary: Boundary,
    ) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::Validation(format!(
                "a chain needs at least 2 sites, got {n_sites}"
            )));
        }
        if !(h_strength >= T::zero()) {
            return Err(Error::Validation(format!(
                "disorder strength must be non-negative, got {h_strength}"
            )));
        }
        for (name, v) in [("j_perp", j_perp), ("j_z", j_z), ("gamma", gamma), ("h", h_strength)] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
        }
        Ok(Self {
            n_sites,
            j_perp,
            j_z,
            h_strength,
            gamma,
            boundary,
        })
    }

    pub fn preset(preset: Preset, n_sites: usize, h_strength: T) -> Result<Self> {
        match preset {
            Preset::Heisenberg => Self::new(
                n_sites,
                T::one(),
                T::one(),
                h_strength,
                T::lit(0.1),
                Boundary::Periodic,
            ),
            Preset::XxAnderson => Self::new(
                n_sites,
                T::one(),
                T::zero(),
                h_strength,
                T::zero(),
                Boundary::Periodic,
            ),
        }
    }

    /// Nearest-neighbour bonds. The periodic N = 2 chain lists bond (0, 1)
    /// twice.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut out: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            out.push((n - 1, 0));
        }
        out
    }
}

/// On-site fields h_i drawn for one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization<T: Real> {
    pub fields: Vec<T>,
    pub seed: u64,
    pub index: u64,
}

impl<T: Real> DisorderRealization<T> {
    pub fn clean(n_sites: usize) -> Self {
        Self {
            fields: vec![T::zero(); n_sites],
            seed: 0,
            index: 0,
        }
    }
}

/// Draws h_i uniformly from [−h, h]. The stream depends only on
/// `(master_seed, realization_index)`.
pub fn sample_disorder<T: Real>(
    params: &ModelParams<T>,
    master_seed: u64,
    realization_index: u64,
) -> DisorderRealization<T> {
    let seed = derive_seed(master_seed, stream::DISORDER, realization_index);
    let mut rng = rng_from_seed(seed);
    let h = params.h_strength;
    let fields = (0..params.n_sites)
        .map(|_| {
            let u = rng.random::<f64>();
            if h == T::zero() {
                T::zero()
            } else {
                (h * T::lit(2.0 * u - 1.0)).max(-h).min(h)
            }
        })
        .collect();
    DisorderRealization {
        fields,
        seed,
        index: realization_index,
    }
}

#[derive(Clone, Debug)]
pub struct Hamiltonian<T: Real> {
    matrix: DMatrix<T>,
    params: ModelParams<T>,
    realization: DisorderRealization<T>,
}

impl<T: Real> Hamiltonian<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn realization(&self) -> &DisorderRealization<T> {
        &self.realization
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest absolute row sum, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> T {
        let mut best = T::zero();
        for r in 0..self.dim() {
            let s: T = self.matrix.row(r).iter().map(|x| x.abs()).sum();
            best = best.max(s);
        }
        best
    }

    /// H|ψ⟩ on raw amplitudes.
    pub fn apply(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.dim();
        let mut out = vec![Complex::new(T::zero(), T::zero()); d];
        for (c, x) in input.iter().enumerate() {
            if x.re == T::zero() && x.im == T::zero() {
                continue;
            }
            let col = self.matrix.column(c);
            for (r, h) in col.iter().enumerate() {
                if *h != T::zero() {
                    out[r] += *x * *h;
                }
            }
        }
        out
    }

    /// Tr[H] / 2^N.
    pub fn mean_energy(&self) -> T {
        let d = self.dim();
        self.matrix.diagonal().iter().copied().sum::<T>() / T::lit(d as f64)
    }
}

pub fn build_xxz<T: Real>(
    params: &ModelParams<T>,
    realization: &DisorderRealization<T>,
) -> Result<Hamiltonian<T>> {
    build_xxz_with_limit(params, realization, DEFAULT_MAX_SITES)
}

pub fn build_xxz_with_limit<T: Real>(
    params: &ModelParams<T>,
    realization: &DisorderRealization<T>,
    max_sites: usize,
) -> Result<Hamiltonian<T>> {
    let n = params.n_sites;
    if n > max_sites {
        return Err(Error::Capacity {
            what: "n_sites",
            value: n,
            limit: max_sites,
        });
    }
    if realization.fields.len() != n {
        return Err(Error::Validation(format!(
            "realization has {} fields for {} sites",
            realization.fields.len(),
            n
        )));
    }
    if n == 2 && params.boundary == Boundary::Periodic {
        log::warn!("periodic 2-site chain: the single bond is counted twice");
    }
    let dim = 1usize << n;
    let mut matrix = DMatrix::<T>::zeros(dim, dim);
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let bonds = params.bonds();
    for b in 0..dim {
        let z = |site: usize| -> T {
            if b & site_mask(n, site) == 0 {
                T::one()
            } else {
                -T::one()
            }
        };
        let mut diag = T::zero();
        for &(i, j) in &bonds {
            let zi = z(i);
            let zj = z(j);
            diag += params.j_z * quarter * zi * zj;
            if zi != zj && params.j_perp != T::zero() {
                // s_x s_x + s_y s_y = (σ+σ- + σ-σ+)/2 flips an anti-aligned pair
                let flipped = b ^ site_mask(n, i) ^ site_mask(n, j);
                matrix[(flipped, b)] += params.j_perp * half;
            }
        }
        for (i, h) in realization.fields.iter().enumerate() {
            diag += *h * half * z(i);
            if params.gamma != T::zero() {
                matrix[(b ^ site_mask(n, i), b)] += params.gamma * half;
            }
        }
        matrix[(b, b)] += diag;
    }
    Ok(Hamiltonian {
        matrix,
        params: *params,
        realization: realization.clone(),
    })
}

/// One of the two named model families at disorder strength `h`, with the
/// realization drawn from `(master_seed, realization_index)`.
pub fn build_paper_model<T: Real>(
    preset: Preset,
    n_sites: usize,
    h_strength: T,
    master_seed: u64,
    realization_index: u64,
) -> Result<Hamiltonian<T>> {
    let params = ModelParams::preset(preset, n_sites, h_strength)?;
    let realization = sample_disorder(&params, master_seed, realization_index);
    build_xxz(&params, &realization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{pauli_into, Axis};

    fn open(n: usize) -> ModelParams<f64> {
        ModelParams::new(n, 1.0, 1.0, 0.0, 0.0, Boundary::Open).unwrap()
    }

    fn spectrum(h: &Hamiltonian<f64>) -> Vec<f64> {
        f64::symmetric_eigen(h.matrix()).unwrap().0
    }

    fn assert_spectrum(got: &[f64], want: &[f64]) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn singlet_triplet() {
        let p = open(2);
        let h = build_xxz(&p, &DisorderRealization::clean(2)).unwrap();
        assert_spectrum(&spectrum(&h), &[-0.75, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn periodic_two_site_double_bond() {
        // Dense oracle: 2 s¹·s² written out in the 4-dim basis.
        let oracle = DMatrix::from_row_slice(
            4,
            4,
            &[0.5, 0.0, 0.0, 0.0, 0.0, -0.5, 1.0, 0.0, 0.0, 1.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.5],
        );
        let want = f64::symmetric_eigen(&oracle).unwrap().0;
        let mut p = open(2);
        p.boundary = Boundary::Periodic;
        let h = build_xxz(&p, &DisorderRealization::clean(2)).unwrap();
        assert!((h.matrix() - &oracle).abs().max() < 1e-15);
        assert_spectrum(&spectrum(&h), &want);
        assert_spectrum(&want, &[-1.5, 0.5, 0.5, 0.5]);
    }

    fn total_sz_commutator_norm(h: &Hamiltonian<f64>) -> f64 {
        let n = h.n_sites();
        let d = h.dim();
        let jz: Vec<f64> = (0..d)
            .map(|b| (0..n).map(|i| crate::spin::spin_z::<f64>(n, i, b)).sum())
            .collect();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((h.matrix()[(r, c)] * (jz[c] - jz[r])).abs());
            }
        }
        worst
    }

    #[test]
    fn gamma_zero_conserves_total_sz() {
        for n in 2..=6 {
            let mut p = ModelParams::new(n, 1.0, 0.7, 2.0, 0.0, Boundary::Periodic).unwrap();
            let r = sample_disorder(&p, 3, n as u64);
            assert!(total_sz_commutator_norm(&build_xxz(&p, &r).unwrap()) < 1e-12);
            p.gamma = 0.1;
            assert!(total_sz_commutator_norm(&build_xxz(&p, &r).unwrap()) > 1e-3);
        }
    }

    #[test]
    fn symmetric_matrix() {
        let p = ModelParams::new(6, 1.0, 1.0, 3.0, 0.1, Boundary::Periodic).unwrap();
        let r = sample_disorder(&p, 9, 0);
        let h = build_xxz(&p, &r).unwrap();
        assert!((h.matrix() - h.matrix().transpose()).abs().max() == 0.0);
    }

    #[test]
    fn matches_pauli_sum() {
        // Apply H term by term through Pauli operators and compare.
        let p = ModelParams::new(4, 0.8, 1.3, 2.0, 0.25, Boundary::Periodic).unwrap();
        let r = sample_disorder(&p, 17, 2);
        let h = build_xxz(&p, &r).unwrap();
        let n = 4;
        let d = 16;
        let zero = Complex::new(0.0, 0.0);
        for b in 0..d {
            let mut e = vec![zero; d];
            e[b] = Complex::new(1.0, 0.0);
            let mut acc = vec![zero; d];
            let mut t1 = vec![zero; d];
            let mut t2 = vec![zero; d];
            for (i, j) in p.bonds() {
                for (axis, coef) in [(Axis::X, p.j_perp), (Axis::Y, p.j_perp), (Axis::Z, p.j_z)] {
                    pauli_into(n, j, axis, &e, &mut t1);
                    pauli_into(n, i, axis, &t1, &mut t2);
                    for k in 0..d {
                        acc[k] += t2[k] * (coef * 0.25);
                    }
                }
            }
            for i in 0..n {
                pauli_into(n, i, Axis::Z, &e, &mut t1);
                pauli_into(n, i, Axis::X, &e, &mut t2);
                for k in 0..d {
                    acc[k] += t1[k] * (r.fields[i] * 0.5) + t2[k] * (p.gamma * 0.5);
                }
            }
            let col = h.apply(&e);
            for k in 0..d {
                assert!((col[k] - acc[k]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn translation_invariant_spectrum() {
        // relabel sites cyclically: spectrum must not change at h = 0
        let p = ModelParams::new(5, 1.0, 0.6, 0.0, 0.3, Boundary::Periodic).unwrap();
        let h = build_xxz(&p, &DisorderRealization::clean(5)).unwrap();
        let n = 5;
        let d = 32;
        let shift = |b: usize| -> usize {
            let mut out = 0;
            for site in 0..n {
                if b & site_mask(n, site) != 0 {
                    out |= site_mask(n, (site + 1) % n);
                }
            }
            out
        };
        let shifted = DMatrix::from_fn(d, d, |r, c| h.matrix()[(shift(r), shift(c))]);
        let a = spectrum(&h);
        let b = f64::symmetric_eigen(&shifted).unwrap().0;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn disorder_sampling() {
        let p = ModelParams::<f64>::preset(Preset::Heisenberg, 8, 0.0).unwrap();
        assert!(sample_disorder(&p, 1, 1).fields.iter().all(|&x| x == 0.0));

        let p = ModelParams::<f64>::preset(Preset::Heisenberg, 10, 5.0).unwrap();
        let a = sample_disorder(&p, 77, 4);
        let b = sample_disorder(&p, 77, 4);
        assert_eq!(a, b);
        assert_ne!(a.fields, sample_disorder(&p, 77, 5).fields);

        let mut pooled = Vec::new();
        for idx in 0..10_000 {
            let r = sample_disorder(&p, 123, idx);
            assert!(r.fields.iter().all(|x| x.abs() <= 5.0));
            pooled.extend(r.fields);
        }
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let var = pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / pooled.len() as f64;
        let want = 25.0 / 3.0;
        assert!((var - want).abs() / want < 0.02, "variance {var}");
    }

    #[test]
    fn presets() {
        let p = ModelParams::<f64>::preset(Preset::Heisenberg, 6, 0.5).unwrap();
        assert_eq!(
            (p.j_perp, p.j_z, p.h_strength, p.gamma, p.boundary),
            (1.0, 1.0, 0.5, 0.1, Boundary::Periodic)
        );
        let p = ModelParams::<f64>::preset(Preset::XxAnderson, 6, 5.0).unwrap();
        assert_eq!((p.j_z, p.gamma), (0.0, 0.0));
        for preset in [Preset::Heisenberg, Preset::XxAnderson] {
            let h = build_paper_model::<f64>(preset, 2, 0.0, 0, 0).unwrap();
            assert!((h.matrix() - h.matrix().transpose()).abs().max() < 1e-15);
        }
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::new(1, 1.0, 1.0, 0.0, 0.0, Boundary::Open).is_err());
        assert!(ModelParams::new(4, 1.0, 1.0, -1.0, 0.0, Boundary::Open).is_err());
        let p = ModelParams::new(15, 1.0, 1.0, 0.0, 0.0, Boundary::Open).unwrap();
        assert!(matches!(
            build_xxz(&p, &DisorderRealization::clean(15)),
            Err(Error::Capacity { .. })
        ));
    }
}
