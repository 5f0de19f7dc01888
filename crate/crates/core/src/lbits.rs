//! Effective model of a fully many-body-localized chain in terms of l-bits.
//!
//! The Hamiltonian is diagonal in the l-bit basis,
//! H = Σ_i ε_i τ_z^i + Σ_{i≠j} V_ij τ_z^i τ_z^j (+ optional three-body terms),
//! with couplings decaying as e^{−|i−j|/ξ₂}. Here τ_z^i is identified with
//! σ_z^i, so the l-bit basis is the computational basis and time evolution is
//! a pure phase per basis state.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::macroscopicity::max_signed_variance;
use crate::scalar::Real;
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::spin::{norm3, site_mask, CorrelationMatrix, StateVector, DEFAULT_MAX_SITES};

#[derive(Clone, Debug, PartialEq)]
pub struct LbitModel<T: Real> {
    pub n_sites: usize,
    /// ε_i.
    pub onsite: Vec<T>,
    /// V_ij, symmetric with zero diagonal. Each unordered pair enters the
    /// energy twice (as V_ij and V_ji).
    pub pair_couplings: DMatrix<T>,
    /// ξ₂ in units of lattice sites.
    pub xi2: T,
    pub seed: u64,
    /// Optional three-body terms (i, j, k, V_ijk) adding V_ijk z_i z_j z_k.
    /// The generator never emits these.
    pub three_body: Vec<(usize, usize, usize, T)>,
}

/// ε_i ~ U[−energy_scale, energy_scale],
/// V_ij = u_ij · coupling_scale · e^{−|i−j|/ξ₂} with u_ij ~ U[−1, 1].
pub fn generate_lbit_model<T: Real>(
    n_sites: usize,
    xi2: T,
    energy_scale: T,
    coupling_scale: T,
    seed: u64,
) -> Result<LbitModel<T>> {
    if !(xi2 > T::zero()) {
        return Err(Error::Validation(format!("xi2 must be positive, got {xi2}")));
    }
    if n_sites == 0 || n_sites > DEFAULT_MAX_SITES {
        return Err(Error::Capacity {
            what: "n_sites",
            value: n_sites,
            limit: DEFAULT_MAX_SITES,
        });
    }
    let mut rng = rng_from_seed(derive_seed(seed, stream::LBIT, 0));
    let onsite = (0..n_sites)
        .map(|_| energy_scale * T::lit(2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let mut pair_couplings = DMatrix::<T>::zeros(n_sites, n_sites);
    for i in 0..n_sites {
        for j in (i + 1)..n_sites {
            let u = T::lit(2.0 * rng.random::<f64>() - 1.0);
            let decay = (-T::lit((j - i) as f64) / xi2).exp();
            let v = u * coupling_scale * decay;
            pair_couplings[(i, j)] = v;
            pair_couplings[(j, i)] = v;
        }
    }
    Ok(LbitModel {
        n_sites,
        onsite,
        pair_couplings,
        xi2,
        seed,
        three_body: Vec::new(),
    })
}

impl<T: Real> LbitModel<T> {
    /// The same model with every interaction removed (Anderson limit).
    pub fn without_interactions(&self) -> Self {
        Self {
            pair_couplings: DMatrix::zeros(self.n_sites, self.n_sites),
            three_body: Vec::new(),
            ..self.clone()
        }
    }

    /// E(b) for every basis state b.
    pub fn energy_table(&self) -> Vec<T> {
        let n = self.n_sites;
        let two = T::lit(2.0);
        (0..1usize << n)
            .map(|b| {
                let z: Vec<T> = (0..n)
                    .map(|i| if b & site_mask(n, i) == 0 { T::one() } else { -T::one() })
                    .collect();
                let mut e = T::zero();
                for i in 0..n {
                    e += self.onsite[i] * z[i];
                    for j in (i + 1)..n {
                        e += two * self.pair_couplings[(i, j)] * z[i] * z[j];
                    }
                }
                for &(i, j, k, v) in &self.three_body {
                    e += v * z[i] * z[j] * z[k];
                }
                e
            })
            .collect()
    }

    pub fn evolver(&self) -> LbitEvolver<T> {
        LbitEvolver {
            n_sites: self.n_sites,
            energies: self.energy_table(),
        }
    }
}

/// Precomputed energy table shared by all time points.
#[derive(Clone, Debug)]
pub struct LbitEvolver<T: Real> {
    n_sites: usize,
    energies: Vec<T>,
}

impl<T: Real> LbitEvolver<T> {
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn evolve(&self, state: &StateVector<T>, t: T) -> Result<StateVector<T>> {
        if state.n_sites() != self.n_sites {
            return Err(Error::Validation(format!(
                "state has {} sites, model has {}",
                state.n_sites(),
                self.n_sites
            )));
        }
        let amps = state
            .amplitudes()
            .iter()
            .zip(&self.energies)
            .map(|(a, e)| *a * Complex::from_polar(T::one(), -*e * t))
            .collect();
        Ok(StateVector::from_raw_unchecked(self.n_sites, amps))
    }
}

/// Multiplies each basis amplitude by e^{−iE(b)t}.
pub fn lbit_evolve<T: Real>(model: &LbitModel<T>, state: &StateVector<T>, t: T) -> Result<StateVector<T>> {
    model.evolver().evolve(state, t)
}

/// Overlap vectors β_i of τ_z^i with the physical spin on site i, and
/// c = min_i |β_i|².
#[derive(Clone, Debug, PartialEq)]
pub struct LbitAxes<T: Real> {
    betas: Vec<[T; 3]>,
    c: T,
}

impl<T: Real> LbitAxes<T> {
    pub fn new(betas: Vec<[T; 3]>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::Validation("no l-bit axes given".into()));
        }
        let mut c = T::infinity();
        for (i, b) in betas.iter().enumerate() {
            let len = norm3(b);
            if len > T::one() + T::lit(1e-12).max(T::epsilon()) {
                return Err(Error::Validation(format!("|beta_{i}| = {len} exceeds 1")));
            }
            c = c.min(len * len);
        }
        Ok(Self { betas, c: c.min(T::one()) })
    }

    /// β_i = ẑ on every site, the case of a conserved total S_z.
    pub fn z(n_sites: usize) -> Self {
        Self {
            betas: vec![[T::zero(), T::zero(), T::one()]; n_sites],
            c: T::one(),
        }
    }

    pub fn betas(&self) -> &[[T; 3]] {
        &self.betas
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// Unit vectors β̂_i; `None` if some β_i vanishes.
    pub fn unit_axes(&self) -> Option<Vec<[T; 3]>> {
        self.betas
            .iter()
            .map(|b| {
                let len = norm3(b);
                (len > T::zero()).then(|| [b[0] / len, b[1] / len, b[2] / len])
            })
            .collect()
    }
}

/// c² · max_B V_B(ψ₀) over B = Σ_i (±β̂_i)·σ^(i), the late-time lower bound on
/// the macroscopicity in a deeply localized chain.
pub fn macroscopicity_lower_bound<T: Real>(axes: &LbitAxes<T>, psi0: &StateVector<T>) -> Result<T> {
    if axes.betas.len() != psi0.n_sites() {
        return Err(Error::Validation(format!(
            "{} axes for a {}-site state",
            axes.betas.len(),
            psi0.n_sites()
        )));
    }
    let Some(unit) = axes.unit_axes() else {
        // some |β_i| = 0, hence c = 0
        return Ok(T::zero());
    };
    let corr = CorrelationMatrix::from_state(psi0)?;
    let best = max_signed_variance(&corr, &unit)?;
    Ok(axes.c * axes.c * best.value)
}
