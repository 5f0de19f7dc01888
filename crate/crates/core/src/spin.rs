//! Pauli algebra on dense state vectors, initial-state factories and the
//! correlation matrix that turns variance evaluation into a quadratic form.
//!
//! Basis convention: computational z basis, site 0 is the most significant
//! bit of the basis index, and a `0` bit is spin up (σ_z = +1).

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest chain handled by default (dense 16384-dimensional vectors).
pub const DEFAULT_MAX_SITES: usize = 14;

/// Largest chain the binary fixture format and index arithmetic accept.
const HARD_MAX_SITES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Bit mask of `site` in a basis index of an `n_sites` chain.
#[inline]
pub fn site_mask(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - 1 - site)
}

/// σ_z eigenvalue (+1 or -1) of `site` in basis state `index`.
#[inline]
pub fn spin_z<T: Real>(n_sites: usize, site: usize, index: usize) -> T {
    if index & site_mask(n_sites, site) == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Writes σ_axis on `site` applied to `input` into `out`. No bounds checks
/// beyond debug assertions; callers validate `site`.
pub fn pauli_into<T: Real>(
    n_sites: usize,
    site: usize,
    axis: Axis,
    input: &[Complex<T>],
    out: &mut [Complex<T>],
) {
    debug_assert_eq!(input.len(), out.len());
    debug_assert!(site < n_sites);
    let mask = site_mask(n_sites, site);
    match axis {
        Axis::X => {
            for (b, o) in out.iter_mut().enumerate() {
                *o = input[b ^ mask];
            }
        }
        Axis::Y => {
            // σ_y = [[0, -i], [i, 0]]
            for (b, o) in out.iter_mut().enumerate() {
                let src = input[b ^ mask];
                *o = if b & mask == 0 {
                    Complex::new(src.im, -src.re)
                } else {
                    Complex::new(-src.im, src.re)
                };
            }
        }
        Axis::Z => {
            for (b, o) in out.iter_mut().enumerate() {
                *o = if b & mask == 0 { input[b] } else { -input[b] };
            }
        }
    }
}

/// ⟨a|b⟩ for raw amplitude slices.
#[inline]
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut re = T::zero();
    let mut im = T::zero();
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex::new(re, im)
}

#[inline]
pub fn norm_sqr<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Normalized pure state of an `n_sites` spin-1/2 chain.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: Vec<Complex<T>>,
    n_sites: usize,
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes after checking the length and the norm.
    pub fn new(n_sites: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if n_sites == 0 || n_sites > HARD_MAX_SITES {
            return Err(Error::Validation(format!(
                "n_sites must lie in 1..={HARD_MAX_SITES}, got {n_sites}"
            )));
        }
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::Validation(format!(
                "expected {} amplitudes for {} sites, got {}",
                1usize << n_sites,
                n_sites,
                amplitudes.len()
            )));
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !((norm - T::one()).abs() <= T::validation_tol()) {
            return Err(Error::Validation(format!(
                "state vector is not normalized (norm {norm})"
            )));
        }
        Ok(Self { amplitudes, n_sites })
    }

    /// Normalizes `amplitudes` and wraps them.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        for a in &mut amplitudes {
            *a = *a / norm;
        }
        Self::new(n_sites, amplitudes)
    }

    pub(crate) fn from_raw_unchecked(n_sites: usize, amplitudes: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_sites);
        Self { amplitudes, n_sites }
    }

    /// Computational basis state `index`.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > HARD_MAX_SITES || index >= 1 << n_sites {
            return Err(Error::Validation(format!(
                "basis index {index} invalid for {n_sites} sites"
            )));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_sites];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self::from_raw_unchecked(n_sites, amps))
    }

    /// Basis state with every spin up.
    pub fn all_up(n_sites: usize) -> Result<Self> {
        Self::basis(n_sites, 0)
    }

    /// Product state ⊗_i (a_i|↑⟩ + b_i|↓⟩) from single-site spinors.
    pub fn product(spinors: &[[Complex<T>; 2]]) -> Result<Self> {
        let n = spinors.len();
        if n == 0 || n > HARD_MAX_SITES {
            return Err(Error::Validation(format!("invalid product size {n}")));
        }
        let mut amps = vec![Complex::new(T::one(), T::zero())];
        for s in spinors {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(*a * s[0]);
                next.push(*a * s[1]);
            }
            amps = next;
        }
        Self::normalized(n, amps)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm(&self) -> T {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            })
        } else {
            Ok(())
        }
    }

    /// σ_axis on `site` applied to this state, without building any
    /// 2^N × 2^N matrix.
    pub fn apply_pauli(&self, site: usize, axis: Axis) -> Result<Self> {
        self.check_site(site)?;
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        pauli_into(self.n_sites, site, axis, &self.amplitudes, &mut out);
        Ok(Self::from_raw_unchecked(self.n_sites, out))
    }

    /// Applies a 2×2 unitary to one site.
    pub fn apply_single_site(&self, site: usize, u: &Su2<T>) -> Result<Self> {
        self.check_site(site)?;
        let mut out = self.amplitudes.clone();
        apply_single_site_in_place(self.n_sites, site, u, &mut out);
        Ok(Self::from_raw_unchecked(self.n_sites, out))
    }

    /// Applies U_1 ⊗ ... ⊗ U_N.
    pub fn apply_local_unitaries(&self, unitaries: &[Su2<T>]) -> Result<Self> {
        if unitaries.len() != self.n_sites {
            return Err(Error::Validation(format!(
                "{} unitaries for a {}-site state",
                unitaries.len(),
                self.n_sites
            )));
        }
        let mut out = self.amplitudes.clone();
        for (site, u) in unitaries.iter().enumerate() {
            apply_single_site_in_place(self.n_sites, site, u, &mut out);
        }
        Ok(Self::from_raw_unchecked(self.n_sites, out))
    }

    /// ⟨σ_axis^(site)⟩.
    pub fn expect_pauli(&self, site: usize, axis: Axis) -> Result<T> {
        let s = self.apply_pauli(site, axis)?;
        Ok(self.inner(&s).re)
    }

    /// Writes the fixture format: little-endian `u32` site count followed by
    /// interleaved `(re, im)` `f64` pairs.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n_sites as u32).to_le_bytes())?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_f64_lossy().to_le_bytes())?;
            w.write_all(&a.im.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let n_sites = u32::from_le_bytes(word) as usize;
        if n_sites == 0 || n_sites > HARD_MAX_SITES {
            return Err(Error::Validation(format!(
                "fixture declares {n_sites} sites"
            )));
        }
        let mut amps = Vec::with_capacity(1 << n_sites);
        let mut buf = [0u8; 8];
        for _ in 0..(1usize << n_sites) {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let im = f64::from_le_bytes(buf);
            amps.push(Complex::new(T::lit(re), T::lit(im)));
        }
        Self::new(n_sites, amps)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 16 * self.dim());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }
}

/// A 2×2 complex matrix, row-major. Used for single-site unitaries.
pub type Su2<T> = [[Complex<T>; 2]; 2];

fn apply_single_site_in_place<T: Real>(
    n_sites: usize,
    site: usize,
    u: &Su2<T>,
    amps: &mut [Complex<T>],
) {
    let mask = site_mask(n_sites, site);
    for b in 0..amps.len() {
        if b & mask == 0 {
            let up = amps[b];
            let down = amps[b | mask];
            amps[b] = u[0][0] * up + u[0][1] * down;
            amps[b | mask] = u[1][0] * up + u[1][1] * down;
        }
    }
}

/// SU(2) element from the angles (φ, ξ, χ) with θ = arcsin √χ:
/// `[[e^{iφ}cosθ, e^{iξ}sinθ], [-e^{-iξ}sinθ, e^{-iφ}cosθ]]`.
pub fn su2_from_angles<T: Real>(phi: T, xi: T, chi: T) -> Su2<T> {
    let theta = chi.sqrt().asin();
    let (s, c) = theta.sin_cos();
    let e_phi = Complex::from_polar(T::one(), phi);
    let e_xi = Complex::from_polar(T::one(), xi);
    [
        [e_phi * c, e_xi * s],
        [-e_xi.conj() * s, e_phi.conj() * c],
    ]
}

/// Haar-random SU(2) element.
pub fn random_su2<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Su2<T> {
    let two_pi = T::TAU();
    let phi = T::lit(rng.random::<f64>()) * two_pi;
    let xi = T::lit(rng.random::<f64>()) * two_pi;
    let chi = T::lit(rng.random::<f64>());
    su2_from_angles(phi, xi, chi)
}

/// e^{-iσ_y θ/2}.
pub fn y_rotation<T: Real>(theta: T) -> Su2<T> {
    let (s, c) = (theta / T::lit(2.0)).sin_cos();
    let re = |x: T| Complex::new(x, T::zero());
    [[re(c), re(-s)], [re(s), re(c)]]
}

fn check_capacity(n_sites: usize, max_sites: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::Validation("a chain needs at least one site".into()));
    }
    if n_sites > max_sites || n_sites > HARD_MAX_SITES {
        return Err(Error::Capacity {
            what: "n_sites",
            value: n_sites,
            limit: max_sites.min(HARD_MAX_SITES),
        });
    }
    Ok(())
}

/// (|↑…↑⟩ + |↓…↓⟩)/√2 with the default size cap.
pub fn ghz<T: Real>(n_sites: usize) -> Result<StateVector<T>> {
    ghz_with_limit(n_sites, DEFAULT_MAX_SITES)
}

pub fn ghz_with_limit<T: Real>(n_sites: usize, max_sites: usize) -> Result<StateVector<T>> {
    check_capacity(n_sites, max_sites)?;
    let dim = 1usize << n_sites;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
    let a = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    amps[0] = a;
    amps[dim - 1] = a;
    Ok(StateVector::from_raw_unchecked(n_sites, amps))
}

/// U_1 ⊗ … ⊗ U_N |GHZ_N⟩ with independent Haar-random U_i.
pub fn random_ghz<T: Real, R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> Result<StateVector<T>> {
    let base = ghz::<T>(n_sites)?;
    let us: Vec<Su2<T>> = (0..n_sites).map(|_| random_su2(rng)).collect();
    base.apply_local_unitaries(&us)
}

/// (|↑↓↑↓…⟩ + |↓↑↓↑…⟩)/√2.
pub fn neel_ghz<T: Real>(n_sites: usize) -> Result<StateVector<T>> {
    check_capacity(n_sites, DEFAULT_MAX_SITES)?;
    if n_sites % 2 != 0 {
        return Err(Error::Validation(format!(
            "Néel states need an even number of sites, got {n_sites}"
        )));
    }
    let dim = 1usize << n_sites;
    // site 0 up (bit 0), site 1 down (bit 1), ...
    let mut pattern = 0usize;
    for site in (1..n_sites).step_by(2) {
        pattern |= site_mask(n_sites, site);
    }
    let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
    let a = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    amps[pattern] = a;
    amps[(dim - 1) ^ pattern] = a;
    Ok(StateVector::from_raw_unchecked(n_sites, amps))
}

/// U^{⊗N} applied to the Néel GHZ state with U = e^{-iσ_y θ/2}.
pub fn rotated_neel_ghz<T: Real>(n_sites: usize, theta: T) -> Result<StateVector<T>> {
    if !(theta >= T::zero() && theta <= T::PI() + T::validation_tol()) {
        return Err(Error::Validation(format!("theta {theta} outside [0, π]")));
    }
    let base = neel_ghz::<T>(n_sites)?;
    let u = y_rotation(theta);
    base.apply_local_unitaries(&vec![u; n_sites])
}

/// N unit 3-vectors defining A = Σ_i α_i·σ^(i).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionField<T: Real> {
    directions: Vec<[T; 3]>,
}

pub(crate) fn norm3<T: Real>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn dot3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl<T: Real> DirectionField<T> {
    pub fn new(directions: Vec<[T; 3]>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Validation("empty direction field".into()));
        }
        for (i, d) in directions.iter().enumerate() {
            let n = norm3(d);
            if !((n - T::one()).abs() <= T::validation_tol()) {
                return Err(Error::Validation(format!(
                    "direction {i} has norm {n}, expected 1"
                )));
            }
        }
        Ok(Self { directions })
    }

    /// Normalizes each block; zero blocks are rejected.
    pub fn normalized(mut directions: Vec<[T; 3]>) -> Result<Self> {
        for (i, d) in directions.iter_mut().enumerate() {
            let n = norm3(d);
            if !(n > T::zero()) {
                return Err(Error::Validation(format!("direction {i} is zero")));
            }
            for x in d.iter_mut() {
                *x /= n;
            }
        }
        Self::new(directions)
    }

    pub fn uniform(n_sites: usize, direction: [T; 3]) -> Result<Self> {
        Self::new(vec![direction; n_sites])
    }

    /// (-1)^i (sin θ, 0, cos θ) on site i.
    pub fn staggered(n_sites: usize, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        let directions = (0..n_sites)
            .map(|i| {
                let sign = if i % 2 == 0 { T::one() } else { -T::one() };
                [sign * s, T::zero(), sign * c]
            })
            .collect();
        Self { directions }
    }

    /// Independent uniformly distributed unit vectors.
    pub fn random<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> Self {
        Self {
            directions: (0..n_sites).map(|_| random_unit_vector(rng)).collect(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[[T; 3]] {
        &self.directions
    }

    /// Flattened 3N coefficient vector (site-major).
    pub fn flatten(&self) -> Vec<T> {
        self.directions.iter().flat_map(|d| d.iter().copied()).collect()
    }

    /// Applies A = Σ_i α_i·σ^(i) to raw amplitudes.
    pub fn apply_observable(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n_sites();
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; input.len()];
        let mut buf = vec![zero; input.len()];
        for (site, d) in self.directions.iter().enumerate() {
            for axis in Axis::ALL {
                let w = d[axis.index()];
                if w == T::zero() {
                    continue;
                }
                pauli_into(n, site, axis, input, &mut buf);
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o += *b * w;
                }
            }
        }
        out
    }

    /// ⟨A²⟩ − ⟨A⟩² evaluated directly on the state.
    pub fn direct_variance(&self, state: &StateVector<T>) -> Result<T> {
        if state.n_sites() != self.n_sites() {
            return Err(Error::Validation(format!(
                "direction field has {} sites, state has {}",
                self.n_sites(),
                state.n_sites()
            )));
        }
        let a_psi = self.apply_observable(state.amplitudes());
        let mean = inner(state.amplitudes(), &a_psi).re;
        Ok(norm_sqr(&a_psi) - mean * mean)
    }
}

pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(rng: &mut R) -> [T; 3] {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let v = [r * phi.cos(), r * phi.sin(), z];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [T::lit(v[0] / n), T::lit(v[1] / n), T::lit(v[2] / n)]
}

/// Real symmetric 3N×3N matrix C with V_A = αᵀCα for unit-block α.
///
/// Index `3 * i + a` addresses site `i`, axis `a` (x, y, z).
#[derive(Clone, Debug)]
pub struct CorrelationMatrix<T: Real> {
    matrix: DMatrix<T>,
    mean_spins: Vec<[T; 3]>,
}

impl<T: Real> CorrelationMatrix<T> {
    /// Builds C from a normalized state.
    ///
    /// The 3N vectors σ_a^(i)|ψ⟩ are formed once and every entry comes from
    /// one inner product between them, O(N²·2^N) in total.
    pub fn from_state(state: &StateVector<T>) -> Result<Self> {
        let norm = state.norm();
        if !((norm - T::one()).abs() <= T::validation_tol()) {
            return Err(Error::Validation(format!(
                "correlation matrix needs a normalized state (norm {norm})"
            )));
        }
        let n = state.n_sites();
        let dim = state.dim();
        let psi = state.amplitudes();
        let zero = Complex::new(T::zero(), T::zero());
        let mut partial: Vec<Vec<Complex<T>>> = Vec::with_capacity(3 * n);
        for site in 0..n {
            for axis in Axis::ALL {
                let mut v = vec![zero; dim];
                pauli_into(n, site, axis, psi, &mut v);
                partial.push(v);
            }
        }
        let mut mean_spins = vec![[T::zero(); 3]; n];
        for site in 0..n {
            for a in 0..3 {
                mean_spins[site][a] = inner(psi, &partial[3 * site + a]).re;
            }
        }
        let m = 3 * n;
        let mut matrix = DMatrix::<T>::zeros(m, m);
        for i in 0..n {
            for a in 0..3 {
                for b in 0..3 {
                    let delta = if a == b { T::one() } else { T::zero() };
                    matrix[(3 * i + a, 3 * i + b)] = delta - mean_spins[i][a] * mean_spins[i][b];
                }
            }
        }
        let residue_tol = T::lit(1e-10).max(T::validation_tol());
        for p in 0..m {
            let site_p = p / 3;
            for q in (3 * (site_p + 1))..m {
                // σ operators on different sites commute, so ⟨σ_p σ_q⟩ is real
                let g = inner(&partial[p], &partial[q]);
                debug_assert!(
                    g.im.abs() <= residue_tol,
                    "imaginary residue {} in two-site correlator",
                    g.im
                );
                let (i, a) = (p / 3, p % 3);
                let (j, b) = (q / 3, q % 3);
                let c = g.re - mean_spins[i][a] * mean_spins[j][b];
                matrix[(p, q)] = c;
                matrix[(q, p)] = c;
            }
        }
        Ok(Self { matrix, mean_spins })
    }

    /// Builds a correlation matrix from raw parts, checking symmetry and
    /// the diagonal-block structure.
    pub fn from_parts(matrix: DMatrix<T>, mean_spins: Vec<[T; 3]>) -> Result<Self> {
        let n = mean_spins.len();
        if matrix.nrows() != 3 * n || matrix.ncols() != 3 * n {
            return Err(Error::Validation(format!(
                "expected a {0}×{0} matrix for {1} sites",
                3 * n,
                n
            )));
        }
        let tol = T::validation_tol();
        for p in 0..3 * n {
            for q in 0..p {
                if (matrix[(p, q)] - matrix[(q, p)]).abs() > tol {
                    return Err(Error::Validation("correlation matrix not symmetric".into()));
                }
            }
        }
        Ok(Self { matrix, mean_spins })
    }

    pub fn n_sites(&self) -> usize {
        self.mean_spins.len()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn mean_spins(&self) -> &[[T; 3]] {
        &self.mean_spins
    }

    /// 3×3 block (i, j).
    pub fn block(&self, i: usize, j: usize) -> [[T; 3]; 3] {
        let mut out = [[T::zero(); 3]; 3];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = self.matrix[(3 * i + a, 3 * j + b)];
            }
        }
        out
    }

    /// xᵀCx for an arbitrary 3N vector.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let m = self.matrix.nrows();
        debug_assert_eq!(x.len(), m);
        let mut acc = T::zero();
        for p in 0..m {
            let mut row = T::zero();
            for q in 0..m {
                row += self.matrix[(p, q)] * x[q];
            }
            acc += x[p] * row;
        }
        acc
    }

    /// Cx for an arbitrary 3N vector.
    pub fn apply(&self, x: &[T], out: &mut [T]) {
        let m = self.matrix.nrows();
        for (p, o) in out.iter_mut().enumerate().take(m) {
            let mut row = T::zero();
            for q in 0..m {
                row += self.matrix[(p, q)] * x[q];
            }
            *o = row;
        }
    }

    /// Ascending eigenvalues and eigenvectors of C.
    pub fn eigen(&self) -> Option<(Vec<T>, DMatrix<T>)> {
        T::symmetric_eigen(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Option<T> {
        self.eigen().and_then(|(v, _)| v.first().copied())
    }

    pub fn max_eigenvalue(&self) -> Option<T> {
        self.eigen().and_then(|(v, _)| v.last().copied())
    }
}
