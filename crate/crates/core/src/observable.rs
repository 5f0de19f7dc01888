//! Hermitian observables supplied as state-to-vector maps.

use num_complex::Complex;

use crate::models::Hamiltonian;
use crate::scalar::Real;
use crate::spin::{inner, pauli_into, Axis, DirectionField};

pub trait Observable<T: Real>: Sync {
    /// O|ψ⟩ on raw amplitudes. The result is generally not normalized.
    fn apply(&self, input: &[Complex<T>]) -> Vec<Complex<T>>;

    /// ⟨ψ|O|ψ⟩.
    fn expectation(&self, input: &[Complex<T>]) -> T {
        inner(input, &self.apply(input)).re
    }
}

impl<T, F> Observable<T> for F
where
    T: Real,
    F: Fn(&[Complex<T>]) -> Vec<Complex<T>> + Sync,
{
    fn apply(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        self(input)
    }
}

/// σ_axis on one site of an `n_sites` chain.
#[derive(Clone, Copy, Debug)]
pub struct Pauli {
    pub n_sites: usize,
    pub site: usize,
    pub axis: Axis,
}

impl<T: Real> Observable<T> for Pauli {
    fn apply(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); input.len()];
        pauli_into(self.n_sites, self.site, self.axis, input, &mut out);
        out
    }
}

/// `scale · Σ_i σ_z^(i)`; with `scale = 1/N` this is J_z/N.
#[derive(Clone, Copy, Debug)]
pub struct TotalSz<T> {
    pub n_sites: usize,
    pub scale: T,
}

impl<T: Real> Observable<T> for TotalSz<T> {
    fn apply(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n_sites;
        input
            .iter()
            .enumerate()
            .map(|(b, x)| {
                let ones = (b & ((1 << n) - 1)).count_ones() as i64;
                let mz = T::lit((n as i64 - 2 * ones) as f64);
                *x * (mz * self.scale)
            })
            .collect()
    }
}

impl<T: Real> Observable<T> for DirectionField<T> {
    fn apply(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        self.apply_observable(input)
    }
}

impl<T: Real> Observable<T> for Hamiltonian<T> {
    fn apply(&self, input: &[Complex<T>]) -> Vec<Complex<T>> {
        Hamiltonian::apply(self, input)
    }
}
