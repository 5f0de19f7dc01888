//! Full diagonalization, exact time evolution and infinite-time averages.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::models::Hamiltonian;
use crate::observable::Observable;
use crate::scalar::Real;
use crate::spin::{inner, StateVector};

/// Eigenvalues closer than this fraction of ‖H‖ are treated as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Real> {
    energies: Vec<T>,
    vectors: DMatrix<T>,
    n_sites: usize,
    seed: u64,
}

/// Diagonalizes a Hamiltonian. Failure carries the realization seed.
pub fn diagonalize<T: Real>(h: &Hamiltonian<T>) -> Result<EigenDecomposition<T>> {
    let seed = h.realization().seed;
    let (energies, vectors) =
        T::symmetric_eigen(h.matrix()).ok_or(Error::EigenSolver { seed })?;
    Ok(EigenDecomposition {
        energies,
        vectors,
        n_sites: h.n_sites(),
        seed,
    })
}

impl<T: Real> EigenDecomposition<T> {
    /// Decomposes an arbitrary real symmetric 2^N × 2^N matrix.
    pub fn from_matrix(n_sites: usize, matrix: &DMatrix<T>) -> Result<Self> {
        if matrix.nrows() != 1 << n_sites || matrix.ncols() != 1 << n_sites {
            return Err(Error::Validation(format!(
                "matrix of shape {}×{} for {n_sites} sites",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let (energies, vectors) = T::symmetric_eigen(matrix).ok_or(Error::EigenSolver { seed: 0 })?;
        Ok(Self {
            energies,
            vectors,
            n_sites,
            seed: 0,
        })
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn vector(&self, alpha: usize) -> Vec<Complex<T>> {
        self.vectors
            .column(alpha)
            .iter()
            .map(|&x| Complex::new(x, T::zero()))
            .collect()
    }

    pub fn eigenstate(&self, alpha: usize) -> StateVector<T> {
        StateVector::from_raw_unchecked(self.n_sites, self.vector(alpha))
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn min_energy(&self) -> T {
        self.energies[0]
    }

    pub fn max_energy(&self) -> T {
        self.energies[self.dim() - 1]
    }

    pub fn spectral_width(&self) -> T {
        self.max_energy() - self.min_energy()
    }

    /// ‖H‖ = max |E_α|.
    pub fn operator_norm(&self) -> T {
        self.min_energy().abs().max(self.max_energy().abs())
    }

    /// Contiguous index ranges of (numerically) degenerate eigenvalues.
    pub fn degenerate_groups(&self) -> Vec<std::ops::Range<usize>> {
        let tol = T::lit(DEGENERACY_REL_TOL) * self.operator_norm().max(T::min_positive_value());
        let mut groups = Vec::new();
        let mut start = 0;
        for a in 1..=self.dim() {
            if a == self.dim() || self.energies[a] - self.energies[a - 1] > tol {
                groups.push(start..a);
                start = a;
            }
        }
        groups
    }

    /// ⟨α|O|α⟩ for every eigenstate.
    pub fn diagonal_elements<O: Observable<T> + ?Sized>(&self, observable: &O) -> Vec<T> {
        (0..self.dim())
            .map(|a| {
                let v = self.vector(a);
                inner(&v, &observable.apply(&v)).re
            })
            .collect()
    }

    /// Largest residual ‖H|α⟩ − E_α|α⟩‖ over the given eigenstates.
    pub fn max_residual(&self, h: &Hamiltonian<T>, alphas: &[usize]) -> T {
        let mut worst = T::zero();
        for &a in alphas {
            let v = self.vector(a);
            let hv = h.apply(&v);
            let r: T = hv
                .iter()
                .zip(&v)
                .map(|(x, y)| (*x - *y * self.energies[a]).norm_sqr())
                .sum::<T>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }
}

/// Amplitudes C_α of a state in an eigenbasis.
#[derive(Clone, Debug)]
pub struct SpectralState<'a, T: Real> {
    eig: &'a EigenDecomposition<T>,
    coeffs: Vec<Complex<T>>,
}

impl<'a, T: Real> SpectralState<'a, T> {
    pub fn new(eig: &'a EigenDecomposition<T>, state: &StateVector<T>) -> Result<Self> {
        if state.n_sites() != eig.n_sites {
            return Err(Error::Validation(format!(
                "state has {} sites, eigenbasis has {}",
                state.n_sites(),
                eig.n_sites
            )));
        }
        let psi = state.amplitudes();
        let coeffs = (0..eig.dim())
            .map(|a| {
                let col = eig.vectors.column(a);
                let mut acc = Complex::new(T::zero(), T::zero());
                for (v, x) in col.iter().zip(psi) {
                    acc += *x * *v;
                }
                acc
            })
            .collect();
        Ok(Self { eig, coeffs })
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn decomposition(&self) -> &EigenDecomposition<T> {
        self.eig
    }

    pub fn weights(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Σ_α |C_α|².
    pub fn total_weight(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Ē = Σ_α |C_α|² E_α.
    pub fn mean_energy(&self) -> T {
        self.coeffs
            .iter()
            .zip(&self.eig.energies)
            .map(|(c, e)| c.norm_sqr() * *e)
            .sum()
    }

    /// |ψ(t)⟩ = Σ_α C_α e^{−iE_α t}|α⟩ in the computational basis.
    pub fn evolve(&self, t: T) -> StateVector<T> {
        let d = self.eig.dim();
        let mut out = vec![Complex::new(T::zero(), T::zero()); d];
        for (a, (c, e)) in self.coeffs.iter().zip(&self.eig.energies).enumerate() {
            let phased = *c * Complex::from_polar(T::one(), -*e * t);
            let col = self.eig.vectors.column(a);
            for (o, v) in out.iter_mut().zip(col.iter()) {
                *o += phased * *v;
            }
        }
        StateVector::from_raw_unchecked(self.eig.n_sites, out)
    }

    /// Evolves to every time in one pass using two real matrix products.
    pub fn evolve_many(&self, times: &[T]) -> Vec<StateVector<T>> {
        let d = self.eig.dim();
        let nt = times.len();
        if nt == 0 {
            return Vec::new();
        }
        let mut phase_re = DMatrix::<T>::zeros(d, nt);
        let mut phase_im = DMatrix::<T>::zeros(d, nt);
        for (k, &t) in times.iter().enumerate() {
            for a in 0..d {
                let z = self.coeffs[a] * Complex::from_polar(T::one(), -self.eig.energies[a] * t);
                phase_re[(a, k)] = z.re;
                phase_im[(a, k)] = z.im;
            }
        }
        let re = &self.eig.vectors * phase_re;
        let im = &self.eig.vectors * phase_im;
        (0..nt)
            .map(|k| {
                let amps = re
                    .column(k)
                    .iter()
                    .zip(im.column(k).iter())
                    .map(|(&r, &i)| Complex::new(r, i))
                    .collect();
                StateVector::from_raw_unchecked(self.eig.n_sites, amps)
            })
            .collect()
    }

    /// Dephased components: for each degenerate group g with weight
    /// p_g = ‖P_g ψ‖² > 0, the unit vector P_g ψ / √p_g.
    ///
    /// For a non-degenerate level this is |α⟩ up to a phase, which cancels in
    /// every quantity built from it, so the bare eigenvector is used.
    pub fn dephased_components(&self) -> Vec<(T, Vec<Complex<T>>)> {
        let zero = Complex::new(T::zero(), T::zero());
        let d = self.eig.dim();
        let mut out = Vec::new();
        for group in self.eig.degenerate_groups() {
            let p: T = self.coeffs[group.clone()].iter().map(|c| c.norm_sqr()).sum();
            if !(p > T::zero()) {
                continue;
            }
            if group.len() == 1 {
                out.push((p, self.eig.vector(group.start)));
                continue;
            }
            let mut v = vec![zero; d];
            for a in group {
                let col = self.eig.vectors.column(a);
                for (o, x) in v.iter_mut().zip(col.iter()) {
                    *o += self.coeffs[a] * *x;
                }
            }
            let s = p.sqrt();
            for x in &mut v {
                *x = *x / s;
            }
            out.push((p, v));
        }
        out
    }
}

/// Infinite-time average Ō = Σ_g ⟨P_gψ|O|P_gψ⟩, which reduces to
/// Σ_α |C_α|²⟨α|O|α⟩ for a non-degenerate spectrum.
pub fn diagonal_ensemble_average<T: Real, O: Observable<T> + ?Sized>(
    spectral: &SpectralState<'_, T>,
    observable: &O,
) -> T {
    spectral
        .dephased_components()
        .iter()
        .map(|(p, u)| *p * inner(u, &observable.apply(u)).re)
        .sum()
}

/// Σ_{α≠β} |C_α|²|C_β|²|⟨α|O|β⟩|², the long-time mean of
/// (⟨O(t)⟩ − Ō)², assuming non-degenerate gaps. Degenerate levels are merged
/// into their dephased components first.
pub fn temporal_fluctuation<T: Real, O: Observable<T> + ?Sized>(
    spectral: &SpectralState<'_, T>,
    observable: &O,
) -> T {
    let comps = spectral.dephased_components();
    let k = comps.len();
    let d = spectral.eig.dim();
    if k < 2 {
        return T::zero();
    }
    let mut u_re = DMatrix::<T>::zeros(d, k);
    let mut u_im = DMatrix::<T>::zeros(d, k);
    let mut w_re = DMatrix::<T>::zeros(d, k);
    let mut w_im = DMatrix::<T>::zeros(d, k);
    let mut complex_basis = false;
    for (g, (_, u)) in comps.iter().enumerate() {
        let w = observable.apply(u);
        for b in 0..d {
            u_re[(b, g)] = u[b].re;
            u_im[(b, g)] = u[b].im;
            w_re[(b, g)] = w[b].re;
            w_im[(b, g)] = w[b].im;
            complex_basis |= u[b].im != T::zero();
        }
    }
    let ut = u_re.transpose();
    let mut m_re = &ut * &w_re;
    let mut m_im = &ut * &w_im;
    if complex_basis {
        let uit = u_im.transpose();
        m_re += &uit * &w_im;
        m_im -= &uit * &w_re;
    }
    let mut acc = T::zero();
    for g in 0..k {
        for h in 0..k {
            if g == h {
                continue;
            }
            let mag = m_re[(g, h)] * m_re[(g, h)] + m_im[(g, h)] * m_im[(g, h)];
            acc += comps[g].0 * comps[h].0 * mag;
        }
    }
    acc
}

/// Log-spaced time grid with a fixed number of points per decade.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: 0.1,
            t_max: 1e4,
            points_per_decade: 60,
        }
    }
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max >= self.t_min && self.t_max.is_finite()) {
            return Err(Error::Validation(format!(
                "time grid needs 0 < t_min <= t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.points_per_decade == 0 {
            return Err(Error::Validation("points_per_decade must be positive".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let decades = (self.t_max / self.t_min).log10();
        let steps = (decades * self.points_per_decade as f64).round() as usize;
        if steps == 0 {
            return vec![self.t_min];
        }
        (0..=steps)
            .map(|k| {
                if k == steps {
                    self.t_max
                } else {
                    self.t_min * 10f64.powf(k as f64 / self.points_per_decade as f64)
                }
            })
            .collect()
    }

    /// Points of the last decade, [t_max / 10, t_max].
    pub fn last_decade(&self) -> Vec<f64> {
        let start = self.t_max / 10.0;
        self.points()
            .into_iter()
            .filter(|&t| t >= start * (1.0 - 1e-12))
            .collect()
    }
}

/// Mean of `values` over the times at or after `window_start`.
pub fn saturated_mean(times: &[f64], values: &[f64], window_start: f64) -> Option<f64> {
    let picked: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window_start * (1.0 - 1e-12))
        .map(|(_, v)| *v)
        .collect();
    if picked.is_empty() {
        None
    } else {
        Some(picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_xxz, sample_disorder, Boundary, DisorderRealization, ModelParams, Preset};
    use crate::observable::Pauli;
    use crate::seed::rng_from_seed;
    use crate::spin::{random_ghz, Axis, CorrelationMatrix};

    fn disordered(n: usize, h: f64, seed: u64) -> Hamiltonian<f64> {
        let p = ModelParams::preset(Preset::Heisenberg, n, h).unwrap();
        build_xxz(&p, &sample_disorder(&p, seed, 0)).unwrap()
    }

    #[test]
    fn single_spin_sigma_z() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let eig = EigenDecomposition::from_matrix(1, &m).unwrap();
        assert_eq!(eig.energies(), &[-1.0, 1.0]);
    }

    #[test]
    fn heisenberg_pair() {
        let p = ModelParams::new(2, 1.0, 1.0, 0.0, 0.0, Boundary::Open).unwrap();
        let h = build_xxz(&p, &DisorderRealization::clean(2)).unwrap();
        let eig = diagonalize(&h).unwrap();
        for (e, w) in eig.energies().iter().zip([-0.75, 0.25, 0.25, 0.25]) {
            assert!((*e - w as f64).abs() < 1e-12);
        }
        assert_eq!(eig.degenerate_groups(), vec![0..1, 1..4]);
    }

    #[test]
    fn residual_and_orthonormality_n8() {
        let h = disordered(8, 2.0, 4);
        let eig = diagonalize(&h).unwrap();
        let mut rng = rng_from_seed(1);
        let picks: Vec<usize> = (0..32).map(|_| rand::Rng::random_range(&mut rng, 0..256)).collect();
        assert!(eig.max_residual(&h, &picks) <= 1e-9 * h.norm_bound());
        let v = eig.vectors();
        let gram = v.transpose() * v;
        assert!((gram - DMatrix::identity(256, 256)).abs().max() < 1e-10);
    }

    #[test]
    fn evolution_basics() {
        let h = disordered(6, 1.0, 2);
        let eig = diagonalize(&h).unwrap();
        let psi = random_ghz::<f64, _>(6, &mut rng_from_seed(3)).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        assert!((sp.total_weight() - 1.0).abs() < 1e-10);
        let back = sp.evolve(0.0);
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let e0 = inner(psi.amplitudes(), &h.apply(psi.amplitudes())).re;
        let times: Vec<f64> = (0..50).map(|k| 0.37 * k as f64 * k as f64).collect();
        let batch = sp.evolve_many(&times);
        for (t, s) in times.iter().zip(&batch) {
            assert!((s.norm() - 1.0).abs() < 1e-10);
            let single = sp.evolve(*t);
            for (a, b) in single.amplitudes().iter().zip(s.amplitudes()) {
                assert!((a - b).norm() < 1e-10);
            }
            let e = inner(s.amplitudes(), &h.apply(s.amplitudes())).re;
            assert!((e - e0).abs() <= 1e-9 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn eigenstate_is_stationary() {
        let h = disordered(5, 1.0, 8);
        let eig = diagonalize(&h).unwrap();
        let psi = eig.eigenstate(7);
        let c0 = CorrelationMatrix::from_state(&psi).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        for t in [0.5, 3.0, 100.0] {
            let c = CorrelationMatrix::from_state(&sp.evolve(t)).unwrap();
            assert!((c.matrix() - c0.matrix()).abs().max() < 1e-10);
        }
        let obs = Pauli { n_sites: 5, site: 2, axis: Axis::Z };
        let direct = inner(psi.amplitudes(), &Observable::<f64>::apply(&obs, psi.amplitudes())).re;
        assert!((diagonal_ensemble_average(&sp, &obs) - direct).abs() < 1e-12);
        assert!(temporal_fluctuation(&sp, &obs).abs() < 1e-12);
    }

    #[test]
    fn spectral_double_sum_matches_evolution() {
        let h = disordered(5, 1.5, 5);
        let eig = diagonalize(&h).unwrap();
        let psi = random_ghz::<f64, _>(5, &mut rng_from_seed(6)).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let obs = Pauli { n_sites: 5, site: 1, axis: Axis::X };
        let d = eig.dim();
        let o_mat = DMatrix::from_fn(d, d, |a, b| {
            inner(&eig.vector(a), &Observable::<f64>::apply(&obs, &eig.vector(b))).re
        });
        for t in [0.0, 0.7, 5.0, 40.0] {
            let direct = obs.expectation(sp.evolve(t).amplitudes());
            let mut sum = Complex::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    let phase = Complex::from_polar(1.0, (eig.energies()[a] - eig.energies()[b]) * t);
                    sum += sp.coeffs()[a].conj() * sp.coeffs()[b] * phase * o_mat[(a, b)];
                }
            }
            assert!((direct - sum.re).abs() < 1e-9);
        }
    }

    #[test]
    fn maximally_mixed_weights_traceless() {
        // |C_α|² = 1/D for every α gives Tr[O]/D.
        let h = disordered(4, 1.0, 1);
        let eig = diagonalize(&h).unwrap();
        let d = eig.dim();
        let mut amps = vec![Complex::new(0.0, 0.0); d];
        for a in 0..d {
            let col = eig.vectors().column(a);
            for (o, v) in amps.iter_mut().zip(col.iter()) {
                *o += Complex::new(*v / (d as f64).sqrt(), 0.0);
            }
        }
        let psi = StateVector::new(4, amps).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let obs = Pauli { n_sites: 4, site: 0, axis: Axis::Z };
        assert!(diagonal_ensemble_average(&sp, &obs).abs() < 1e-10);
    }

    #[test]
    fn two_level_fluctuation_closed_form() {
        // H = σ_z, |ψ⟩ = cos a|↑⟩ + sin a|↓⟩, O = σ_x
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let eig = EigenDecomposition::from_matrix(1, &m).unwrap();
        let a: f64 = 0.4;
        let psi = StateVector::new(1, vec![Complex::new(a.cos(), 0.0), Complex::new(a.sin(), 0.0)]).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let obs = Pauli { n_sites: 1, site: 0, axis: Axis::X };
        let (p_up, p_down) = (a.cos().powi(2), a.sin().powi(2));
        // ⟨↑|σ_x|↓⟩ = ⟨↓|σ_x|↑⟩ = 1
        let want = p_up * p_down * (1.0 + 1.0);
        assert!((temporal_fluctuation(&sp, &obs) - want).abs() < 1e-14);
        // ⟨σ_x⟩(t) = sin 2a cos 2t, whose square averages to sin² 2a / 2
        assert!((want - (2.0 * a).sin().powi(2) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_dephasing_uses_group_projection() {
        // Γ = 0, h = 0: heavy degeneracy. Ō must equal the long-time average
        // computed from the group projections directly.
        let p = ModelParams::new(4, 1.0, 1.0, 0.0, 0.0, Boundary::Periodic).unwrap();
        let h = build_xxz(&p, &DisorderRealization::clean(4)).unwrap();
        let eig = diagonalize(&h).unwrap();
        assert!(eig.degenerate_groups().len() < eig.dim());
        let psi = random_ghz::<f64, _>(4, &mut rng_from_seed(12)).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let obs = Pauli { n_sites: 4, site: 0, axis: Axis::X };
        // Dense-projector oracle.
        let mut want = 0.0;
        for g in eig.degenerate_groups() {
            let d = eig.dim();
            let mut proj = vec![Complex::new(0.0, 0.0); d];
            for a in g.clone() {
                let col = eig.vector(a);
                let ov = inner(&col, psi.amplitudes());
                for (o, x) in proj.iter_mut().zip(&col) {
                    *o += *x * ov;
                }
            }
            want += inner(&proj, &Observable::<f64>::apply(&obs, &proj)).re;
        }
        assert!((diagonal_ensemble_average(&sp, &obs) - want).abs() < 1e-12);
    }

    #[test]
    fn diagonal_ensemble_matches_long_time_sampling() {
        let h = disordered(6, 1.0, 21);
        let eig = diagonalize(&h).unwrap();
        let psi = random_ghz::<f64, _>(6, &mut rng_from_seed(22)).unwrap();
        let sp = SpectralState::new(&eig, &psi).unwrap();
        let obs = Pauli { n_sites: 6, site: 0, axis: Axis::Z };
        let target = diagonal_ensemble_average(&sp, &obs);
        let mut rng = rng_from_seed(23);
        let times: Vec<f64> = (0..2000).map(|_| 1e4 * rand::Rng::random::<f64>(&mut rng)).collect();
        let mean = sp
            .evolve_many(&times)
            .iter()
            .map(|s| obs.expectation(s.amplitudes()))
            .sum::<f64>()
            / times.len() as f64;
        assert!((mean - target).abs() < 5e-3, "{mean} vs {target}");
    }

    #[test]
    fn thermal_vs_mbl_fluctuation_ordering() {
        let n = 10;
        let obs = Pauli { n_sites: n, site: n / 2, axis: Axis::X };
        let fluct = |h: f64| {
            (0..3u64)
                .map(|k| {
                    let eig = diagonalize(&disordered(n, h, 31 + k)).unwrap();
                    let psi = random_ghz::<f64, _>(n, &mut rng_from_seed(40 + k)).unwrap();
                    temporal_fluctuation(&SpectralState::new(&eig, &psi).unwrap(), &obs)
                })
                .sum::<f64>()
        };
        let thermal = fluct(0.5);
        let mbl = fluct(8.0);
        assert!(thermal >= 0.0 && thermal < mbl, "thermal {thermal}, mbl {mbl}");
    }

    #[test]
    fn time_grid_layout() {
        let g = TimeGrid::default();
        let pts = g.points();
        assert_eq!(pts.len(), 301);
        assert!((pts[0] - 0.1).abs() < 1e-15);
        assert_eq!(*pts.last().unwrap(), 1e4);
        assert!((pts[60] - 1.0).abs() < 1e-12);
        assert_eq!(g.last_decade().len(), 61);
        assert_eq!(saturated_mean(&[1.0, 2.0, 3.0], &[5.0, 1.0, 3.0], 2.0), Some(2.0));
        assert_eq!(saturated_mean(&[1.0], &[5.0], 2.0), None);
    }
}
