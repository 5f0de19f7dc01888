//! Variance of macroscopic observables and its maximization.
//!
//! M(|ψ⟩) is the maximum of V_A = ⟨A²⟩ − ⟨A⟩² over A = Σ_i α_i·σ^(i) with
//! unit α_i. On the correlation matrix this is the maximum of the quadratic
//! form αᵀCα over a product of N unit spheres. Values range from N (no
//! macroscopic coherence) to N² (GHZ-like states).
//!
//! The maximizer runs BFGS on per-site spherical angles. Each site gets its
//! own chart (e1, e2, e3) with the starting direction on the chart equator;
//! when an iterate drifts towards a chart pole the charts are rebuilt around
//! the current point, which keeps the φ derivatives well conditioned.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::rng_from_seed;
use crate::spin::{dot3, norm3, random_unit_vector, CorrelationMatrix, DirectionField, StateVector};

/// Sites above this count are rejected by the exact sign enumeration.
pub const SIGN_ENUMERATION_CAP: usize = 24;

/// Rebuild the charts once |cos θ_i| exceeds this for any site.
const CHART_POLE_GUARD: f64 = 0.95;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximizeOptions {
    /// Total number of local ascents, including the two warm starts.
    pub restarts: usize,
    /// Convergence threshold on the projected-gradient norm.
    pub tol: f64,
    /// BFGS iterations per start.
    pub max_iters: usize,
    /// Random direction fields screened for the second warm start.
    pub random_pool: usize,
    /// Seed of the random starts.
    pub seed: u64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            tol: 1e-8,
            max_iters: 500,
            random_pool: 64,
            seed: 0x6d61_6372_6f73_7069,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MacroResult<T: Real> {
    pub value: T,
    pub argmax: DirectionField<T>,
    pub restarts_used: usize,
    /// At least one local ascent met the gradient tolerance.
    pub converged: bool,
    /// Projected-gradient norm at the reported maximum.
    pub gradient_norm: T,
    /// λ_max(C)·N, an upper bound on the value.
    pub eigen_bound: T,
    /// The eigenvalue bound exceeds the value by more than 5%. Not an error:
    /// the bound is loose for many states, but a flagged result is worth a
    /// second look with more restarts.
    pub suspicious: bool,
}

/// αᵀCα, equal to ⟨A²⟩ − ⟨A⟩² of the state C was built from.
pub fn variance<T: Real>(corr: &CorrelationMatrix<T>, dirs: &DirectionField<T>) -> Result<T> {
    if dirs.n_sites() != corr.n_sites() {
        return Err(Error::Validation(format!(
            "direction field has {} sites, correlation matrix has {}",
            dirs.n_sites(),
            corr.n_sites()
        )));
    }
    Ok(corr.quadratic_form(&dirs.flatten()))
}

/// Convenience: builds C and maximizes with the given options.
pub fn macroscopicity<T: Real>(state: &StateVector<T>, opts: &MaximizeOptions) -> Result<MacroResult<T>> {
    maximize(&CorrelationMatrix::from_state(state)?, opts)
}

/// Multi-start maximization of αᵀCα over unit direction fields.
///
/// Start 0 is the top eigenvector of C renormalized block-wise, start 1 the
/// best of `random_pool` random fields, and the remaining starts are random.
/// Ties between starts go to the lowest start index.
pub fn maximize<T: Real>(corr: &CorrelationMatrix<T>, opts: &MaximizeOptions) -> Result<MacroResult<T>> {
    let n = corr.n_sites();
    if n == 0 {
        return Err(Error::Validation("empty correlation matrix".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::Validation("at least one restart is required".into()));
    }
    let mut rng = rng_from_seed(opts.seed);
    let (eigvals, eigvecs) = corr
        .eigen()
        .ok_or_else(|| Error::NumericalRange("eigendecomposition of C failed".into()))?;
    let lambda_max = *eigvals.last().expect("non-empty spectrum");
    let eigen_bound = lambda_max * T::lit(n as f64);

    let mut starts: Vec<Vec<[T; 3]>> = Vec::with_capacity(opts.restarts);
    let top = eigvecs.column(3 * n - 1);
    let eig_start: Vec<[T; 3]> = (0..n)
        .map(|i| {
            let v = [top[3 * i], top[3 * i + 1], top[3 * i + 2]];
            let len = norm3(&v);
            if len > T::lit(1e-12) {
                [v[0] / len, v[1] / len, v[2] / len]
            } else {
                random_unit_vector(&mut rng)
            }
        })
        .collect();
    starts.push(eig_start);
    if opts.restarts >= 2 {
        let mut best: Option<(T, Vec<[T; 3]>)> = None;
        for _ in 0..opts.random_pool.max(1) {
            let cand: Vec<[T; 3]> = (0..n).map(|_| random_unit_vector(&mut rng)).collect();
            let val = objective(corr, &cand);
            if best.as_ref().is_none_or(|(b, _)| val > *b) {
                best = Some((val, cand));
            }
        }
        starts.push(best.expect("pool is non-empty").1);
    }
    while starts.len() < opts.restarts {
        starts.push((0..n).map(|_| random_unit_vector(&mut rng)).collect());
    }

    let mut best: Option<LocalMax<T>> = None;
    let mut any_converged = false;
    for start in starts {
        let local = ascend(corr, start, opts);
        any_converged |= local.converged;
        if best.as_ref().is_none_or(|b| local.value > b.value) {
            best = Some(local);
        }
    }
    let best = best.expect("at least one start");
    let value = best.value;
    let argmax = DirectionField::new(best.dirs)?;
    Ok(MacroResult {
        value,
        argmax,
        restarts_used: opts.restarts,
        converged: any_converged,
        gradient_norm: best.grad_norm,
        eigen_bound,
        suspicious: eigen_bound > value * T::lit(1.05),
    })
}

fn objective<T: Real>(corr: &CorrelationMatrix<T>, dirs: &[[T; 3]]) -> T {
    let flat: Vec<T> = dirs.iter().flat_map(|d| d.iter().copied()).collect();
    corr.quadratic_form(&flat)
}

struct LocalMax<T: Real> {
    dirs: Vec<[T; 3]>,
    value: T,
    grad_norm: T,
    converged: bool,
}

/// Per-site orthonormal frame; α = sinθ(cosφ e1 + sinφ e2) + cosθ e3.
#[derive(Clone, Copy)]
struct Frame<T> {
    e1: [T; 3],
    e2: [T; 3],
    e3: [T; 3],
}

impl<T: Real> Frame<T> {
    /// Frame whose equator point (θ = π/2, φ = 0) is `dir`.
    fn around(dir: &[T; 3]) -> Self {
        let e1 = *dir;
        // axis least aligned with dir, orthogonalized
        let k = (0..3)
            .min_by(|&a, &b| dir[a].abs().partial_cmp(&dir[b].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let mut e3 = [T::zero(); 3];
        e3[k] = T::one();
        let proj = dot3(&e3, &e1);
        for a in 0..3 {
            e3[a] -= proj * e1[a];
        }
        let len = norm3(&e3);
        for x in &mut e3 {
            *x /= len;
        }
        let e2 = cross(&e3, &e1);
        Self { e1, e2, e3 }
    }

    fn point(&self, theta: T, phi: T) -> [T; 3] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let mut out = [T::zero(); 3];
        for a in 0..3 {
            out[a] = st * (cp * self.e1[a] + sp * self.e2[a]) + ct * self.e3[a];
        }
        out
    }

    /// (∂α/∂θ, ∂α/∂φ).
    fn tangents(&self, theta: T, phi: T) -> ([T; 3], [T; 3]) {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let mut dt = [T::zero(); 3];
        let mut dp = [T::zero(); 3];
        for a in 0..3 {
            dt[a] = ct * (cp * self.e1[a] + sp * self.e2[a]) - st * self.e3[a];
            dp[a] = st * (-sp * self.e1[a] + cp * self.e2[a]);
        }
        (dt, dp)
    }
}

fn cross<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Evaluation at one point of the chart.
struct Eval<T> {
    dirs: Vec<[T; 3]>,
    flat: Vec<T>,
    /// Gradient of −f with respect to the angles.
    grad: Vec<T>,
    proj_norm: T,
}

fn evaluate<T: Real>(corr: &CorrelationMatrix<T>, frames: &[Frame<T>], x: &[T], work: &mut [T]) -> Eval<T> {
    let n = frames.len();
    let dirs: Vec<[T; 3]> = (0..n).map(|i| frames[i].point(x[2 * i], x[2 * i + 1])).collect();
    let flat: Vec<T> = dirs.iter().flat_map(|d| d.iter().copied()).collect();
    corr.apply(&flat, work);
    let two = T::lit(2.0);
    let mut grad = vec![T::zero(); 2 * n];
    let mut proj_sq = T::zero();
    for i in 0..n {
        let g = [two * work[3 * i], two * work[3 * i + 1], two * work[3 * i + 2]];
        let (dt, dp) = frames[i].tangents(x[2 * i], x[2 * i + 1]);
        grad[2 * i] = -dot3(&g, &dt);
        grad[2 * i + 1] = -dot3(&g, &dp);
        let radial = dot3(&g, &dirs[i]);
        for a in 0..3 {
            let p = g[a] - radial * dirs[i][a];
            proj_sq += p * p;
        }
    }
    Eval {
        dirs,
        flat,
        grad,
        proj_norm: proj_sq.sqrt(),
    }
}

/// f(β) − f(α) = (β − α)ᵀC(β + α), free of the cancellation in f(β) − f(α).
fn objective_gain<T: Real>(corr: &CorrelationMatrix<T>, from: &[T], to: &[T], work: &mut [T]) -> T {
    let sum: Vec<T> = from.iter().zip(to).map(|(a, b)| *a + *b).collect();
    corr.apply(&sum, work);
    to.iter().zip(from).zip(work.iter()).map(|((b, a), w)| (*b - *a) * *w).sum()
}

fn ascend<T: Real>(corr: &CorrelationMatrix<T>, start: Vec<[T; 3]>, opts: &MaximizeOptions) -> LocalMax<T> {
    let n = start.len();
    let m = 2 * n;
    let tol = T::lit(opts.tol);
    let guard = T::lit(CHART_POLE_GUARD);
    let half_pi = T::FRAC_PI_2();
    let mut work = vec![T::zero(); 3 * n];
    let mut dirs = start;
    let mut iters = 0usize;

    'charts: loop {
        let frames: Vec<Frame<T>> = dirs.iter().map(Frame::around).collect();
        let mut x = vec![T::zero(); m];
        for i in 0..n {
            x[2 * i] = half_pi;
        }
        let mut cur = evaluate(corr, &frames, &x, &mut work);
        // inverse Hessian approximation of −f, row-major
        let mut hinv = vec![T::zero(); m * m];
        let mut fresh = true;
        loop {
            if cur.proj_norm < tol {
                return LocalMax {
                    value: corr.quadratic_form(&cur.flat),
                    dirs: cur.dirs,
                    grad_norm: cur.proj_norm,
                    converged: true,
                };
            }
            if iters >= opts.max_iters {
                return LocalMax {
                    value: corr.quadratic_form(&cur.flat),
                    dirs: cur.dirs,
                    grad_norm: cur.proj_norm,
                    converged: false,
                };
            }
            if (0..n).any(|i| x[2 * i].cos().abs() > guard) {
                dirs = cur.dirs;
                continue 'charts;
            }
            iters += 1;
            if fresh {
                let gmax = cur.grad.iter().fold(T::zero(), |acc, g| acc.max(g.abs()));
                let scale = T::one() / gmax.max(T::one());
                for k in 0..m {
                    for l in 0..m {
                        hinv[k * m + l] = if k == l { scale } else { T::zero() };
                    }
                }
            }
            let mut dir: Vec<T> = (0..m)
                .map(|k| -(0..m).map(|l| hinv[k * m + l] * cur.grad[l]).sum::<T>())
                .collect();
            let mut slope: T = dir.iter().zip(&cur.grad).map(|(d, g)| *d * *g).sum();
            if !(slope < T::zero()) {
                // lost descent; fall back to steepest descent with a reset
                let gmax = cur.grad.iter().fold(T::zero(), |acc, g| acc.max(g.abs()));
                let scale = T::one() / gmax.max(T::one());
                dir = cur.grad.iter().map(|g| -*g * scale).collect();
                slope = dir.iter().zip(&cur.grad).map(|(d, g)| *d * *g).sum();
                fresh = true;
            }
            // Armijo backtracking on the exact gain
            let mut step = T::one();
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let trial: Vec<T> = x.iter().zip(&dir).map(|(a, d)| *a + step * *d).collect();
                let cand = evaluate(corr, &frames, &trial, &mut work);
                let gain = objective_gain(corr, &cur.flat, &cand.flat, &mut work);
                if gain >= -T::lit(ARMIJO_C1) * step * slope {
                    accepted = Some((trial, cand));
                    break;
                }
                step *= T::lit(0.5);
            }
            let Some((x_new, next)) = accepted else {
                // no progress possible at working precision
                return LocalMax {
                    value: corr.quadratic_form(&cur.flat),
                    grad_norm: cur.proj_norm,
                    converged: cur.proj_norm < tol,
                    dirs: cur.dirs,
                };
            };
            let s: Vec<T> = x_new.iter().zip(&x).map(|(a, b)| *a - *b).collect();
            let y: Vec<T> = next.grad.iter().zip(&cur.grad).map(|(a, b)| *a - *b).collect();
            let sy: T = s.iter().zip(&y).map(|(a, b)| *a * *b).sum();
            if sy > T::epsilon() * T::lit(1e2) {
                if fresh {
                    let yy: T = y.iter().map(|v| *v * *v).sum();
                    let gamma = sy / yy;
                    for k in 0..m {
                        for l in 0..m {
                            hinv[k * m + l] = if k == l { gamma } else { T::zero() };
                        }
                    }
                    fresh = false;
                }
                bfgs_update(&mut hinv, &s, &y, sy);
            }
            x = x_new;
            cur = next;
        }
    }
}

/// H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ.
fn bfgs_update<T: Real>(h: &mut [T], s: &[T], y: &[T], sy: T) {
    let m = s.len();
    let rho = T::one() / sy;
    let hy: Vec<T> = (0..m).map(|k| (0..m).map(|l| h[k * m + l] * y[l]).sum()).collect();
    let yhy: T = y.iter().zip(&hy).map(|(a, b)| *a * *b).sum();
    let coef = (T::one() + rho * yhy) * rho;
    for k in 0..m {
        for l in 0..m {
            h[k * m + l] += coef * s[k] * s[l] - rho * (hy[k] * s[l] + s[k] * hy[l]);
        }
    }
}

/// V_{S(θ)} for the staggered magnetization S(θ) = Σ_i (−1)^i (sinθ, 0, cosθ)·σ^(i),
/// computed directly from S|ψ⟩.
pub fn staggered_variance<T: Real>(state: &StateVector<T>, theta: T) -> Result<T> {
    DirectionField::staggered(state.n_sites(), theta).direct_variance(state)
}

/// Same quantity through the correlation matrix.
pub fn staggered_variance_from_correlation<T: Real>(corr: &CorrelationMatrix<T>, theta: T) -> Result<T> {
    variance(corr, &DirectionField::staggered(corr.n_sites(), theta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignedVariance<T> {
    pub value: T,
    /// Optimal signs, with `signs[0] = +1` fixing the global sign.
    pub signs: Vec<i8>,
    /// `true` for exhaustive enumeration, `false` for the greedy heuristic.
    pub exact: bool,
}

fn signed_coupling<T: Real>(corr: &CorrelationMatrix<T>, axes: &[[T; 3]]) -> Result<Vec<Vec<T>>> {
    let n = corr.n_sites();
    if axes.len() != n {
        return Err(Error::Validation(format!(
            "{} axes for {} sites",
            axes.len(),
            n
        )));
    }
    for (i, b) in axes.iter().enumerate() {
        let len = norm3(b);
        if !((len - T::one()).abs() <= T::validation_tol()) {
            return Err(Error::Validation(format!("axis {i} has norm {len}, expected 1")));
        }
    }
    let mat = corr.matrix();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut q = T::zero();
                    for a in 0..3 {
                        for b in 0..3 {
                            q += axes[i][a] * mat[(3 * i + a, 3 * j + b)] * axes[j][b];
                        }
                    }
                    q
                })
                .collect()
        })
        .collect())
}

fn signed_value<T: Real>(q: &[Vec<T>], signs: &[i8]) -> T {
    let mut acc = T::zero();
    for (i, row) in q.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            acc += T::lit(f64::from(signs[i] * signs[j])) * *v;
        }
    }
    acc
}

/// Exact max over s ∈ {±1}^N of Σ_ij s_i s_j β̂_iᵀC_ijβ̂_j, i.e. the largest
/// variance of B = Σ_i (±β̂_i)·σ^(i). Gray-code enumeration over 2^{N−1}
/// patterns with an O(N) update per step.
pub fn max_signed_variance<T: Real>(corr: &CorrelationMatrix<T>, axes: &[[T; 3]]) -> Result<SignedVariance<T>> {
    let n = corr.n_sites();
    if n > SIGN_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n_sites: n,
            cap: SIGN_ENUMERATION_CAP,
        });
    }
    let q = signed_coupling(corr, axes)?;
    let mut signs = vec![1i8; n];
    let mut field: Vec<T> = q.iter().map(|row| row.iter().copied().sum()).collect();
    let mut value: T = field.iter().copied().sum();
    let mut best = value;
    let mut best_step = 0u64;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let patterns = 1u64 << (n - 1);
    for step in 1..patterns {
        let k = step.trailing_zeros() as usize + 1;
        let sk = T::lit(f64::from(signs[k]));
        let off = field[k] - q[k][k] * sk;
        value -= four * sk * off;
        for (j, f) in field.iter_mut().enumerate() {
            *f -= two * sk * q[j][k];
        }
        signs[k] = -signs[k];
        if value > best {
            best = value;
            best_step = step;
        }
    }
    let gray = best_step ^ (best_step >> 1);
    let best_signs: Vec<i8> = (0..n)
        .map(|i| if i > 0 && gray & (1 << (i - 1)) != 0 { -1 } else { 1 })
        .collect();
    Ok(SignedVariance {
        value: signed_value(&q, &best_signs),
        signs: best_signs,
        exact: true,
    })
}

/// Greedy single-flip local search for chains beyond the enumeration cap.
/// Starts from the signs of the top eigenvector of the coupling matrix.
pub fn max_signed_variance_greedy<T: Real>(
    corr: &CorrelationMatrix<T>,
    axes: &[[T; 3]],
) -> Result<SignedVariance<T>> {
    let q = signed_coupling(corr, axes)?;
    let n = q.len();
    let qm = nalgebra::DMatrix::from_fn(n, n, |i, j| q[i][j]);
    let mut signs: Vec<i8> = match T::symmetric_eigen(&qm) {
        Some((_, vecs)) => {
            let top = vecs.column(n - 1);
            let flip = top[0] < T::zero();
            top.iter()
                .map(|&v| if (v < T::zero()) != flip { -1 } else { 1 })
                .collect()
        }
        None => vec![1; n],
    };
    let mut value = signed_value(&q, &signs);
    loop {
        let mut improved = false;
        for k in 1..n {
            signs[k] = -signs[k];
            let cand = signed_value(&q, &signs);
            if cand > value {
                value = cand;
                improved = true;
            } else {
                signs[k] = -signs[k];
            }
        }
        if !improved {
            break;
        }
    }
    Ok(SignedVariance {
        value,
        signs,
        exact: false,
    })
}

/// Random direction fields and their variance; handy for spot checks.
pub fn random_field_variance<T: Real, R: Rng + ?Sized>(
    corr: &CorrelationMatrix<T>,
    rng: &mut R,
) -> (DirectionField<T>, T) {
    let dirs = DirectionField::random(corr.n_sites(), rng);
    let v = corr.quadratic_form(&dirs.flatten());
    (dirs, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use crate::spin::{ghz, random_ghz, random_su2, rotated_neel_ghz, StateVector, Su2};
    use num_complex::Complex;

    fn random_state(n: usize, seed: u64) -> StateVector<f64> {
        let mut rng = rng_from_seed(seed);
        let amps = (0..1 << n)
            .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        StateVector::normalized(n, amps).unwrap()
    }

    #[test]
    fn variance_examples() {
        let z = [0.0, 0.0, 1.0];
        let x = [1.0, 0.0, 0.0];
        let c = CorrelationMatrix::from_state(&ghz::<f64>(4).unwrap()).unwrap();
        let v = variance(&c, &DirectionField::uniform(4, z).unwrap()).unwrap();
        assert!((v - 16.0).abs() < 1e-12);
        let up = CorrelationMatrix::from_state(&StateVector::<f64>::all_up(5).unwrap()).unwrap();
        assert!((variance(&up, &DirectionField::uniform(5, x).unwrap()).unwrap() - 5.0).abs() < 1e-12);
        assert!(variance(&up, &DirectionField::uniform(5, z).unwrap()).unwrap().abs() < 1e-12);
        assert!(variance(&up, &DirectionField::uniform(4, z).unwrap()).is_err());
    }

    #[test]
    fn ghz_reaches_n_squared() {
        for n in 2..=8 {
            let r = macroscopicity(&ghz::<f64>(n).unwrap(), &MaximizeOptions::default()).unwrap();
            assert!((r.value - (n * n) as f64).abs() < 1e-6);
            assert!(r.converged);
            assert!(!r.suspicious);
            // collinear with ±z on every site; for two sites xx/yy also saturate
            for d in r.argmax.directions().iter().filter(|_| n > 2) {
                assert!((d[2].abs() - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn product_state_gives_n() {
        let mut rng = rng_from_seed(44);
        for n in 2..=6 {
            let u: Su2<f64> = random_su2(&mut rng);
            let spinor = [u[0][0], u[1][0]];
            let psi = StateVector::product(&vec![spinor; n]).unwrap();
            let r = macroscopicity(&psi, &MaximizeOptions::default()).unwrap();
            assert!((r.value - n as f64).abs() < 1e-6, "n={n} got {}", r.value);
        }
    }

    #[test]
    fn local_unitary_covariance() {
        let psi = random_state(4, 3);
        let base = macroscopicity(&psi, &MaximizeOptions::default()).unwrap();
        let mut rng = rng_from_seed(4);
        let us: Vec<Su2<f64>> = (0..4).map(|_| random_su2(&mut rng)).collect();
        let rotated = psi.apply_local_unitaries(&us).unwrap();
        let r = macroscopicity(&rotated, &MaximizeOptions::default()).unwrap();
        assert!((r.value - base.value).abs() < 1e-6);
    }

    #[test]
    fn self_consistent_and_bounded() {
        for seed in 0..10 {
            let n = 2 + (seed as usize % 4);
            let psi = random_state(n, 100 + seed);
            let c = CorrelationMatrix::from_state(&psi).unwrap();
            let r = maximize(&c, &MaximizeOptions::default()).unwrap();
            let at = variance(&c, &r.argmax).unwrap();
            assert!(r.value >= at - 1e-9);
            assert!(r.value <= (n * n) as f64 + 1e-6);
            assert!(r.value >= n as f64 - 1e-6);
            assert!(r.value <= r.eigen_bound + 1e-9);
        }
    }

    #[test]
    fn random_ghz_keeps_maximum() {
        let mut rng = rng_from_seed(8);
        for n in [3, 5, 7] {
            let psi = random_ghz::<f64, _>(n, &mut rng).unwrap();
            let r = macroscopicity(&psi, &MaximizeOptions::default()).unwrap();
            assert!((r.value - (n * n) as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_options() {
        let c = CorrelationMatrix::from_state(&ghz::<f64>(2).unwrap()).unwrap();
        let opts = MaximizeOptions { restarts: 0, ..Default::default() };
        assert!(maximize(&c, &opts).is_err());
        let one = MaximizeOptions { restarts: 1, ..Default::default() };
        assert!((maximize(&c, &one).unwrap().value - 4.0).abs() < 1e-6);
    }

    #[test]
    fn staggered_examples() {
        for n in [4, 6, 8] {
            for theta in [0.0, 0.4, std::f64::consts::FRAC_PI_2, 2.5] {
                let psi = rotated_neel_ghz::<f64>(n, theta).unwrap();
                let v = staggered_variance(&psi, theta).unwrap();
                assert!((v - (n * n) as f64).abs() < 1e-9);
            }
        }
        let neel = StateVector::<f64>::basis(4, 0b0101).unwrap();
        assert!(staggered_variance(&neel, 0.0).unwrap().abs() < 1e-12);
        let psi = random_state(4, 9);
        let c = CorrelationMatrix::from_state(&psi).unwrap();
        for theta in [0.0, 1.0, 2.0] {
            let a = staggered_variance(&psi, theta).unwrap();
            let b = staggered_variance_from_correlation(&c, theta).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn signed_variance_closed_form() {
        let z = [0.0, 0.0, 1.0];
        for n in [4usize, 6, 8] {
            for cos in [1.0f64, 2.0 / 3.0, 1.0 / 3.0, 0.0] {
                let psi = rotated_neel_ghz::<f64>(n, cos.acos()).unwrap();
                let c = CorrelationMatrix::from_state(&psi).unwrap();
                let r = max_signed_variance(&c, &vec![z; n]).unwrap();
                let nf = n as f64;
                let want = nf + (nf * nf - nf) * cos * cos;
                assert!((r.value - want).abs() < 1e-9, "n={n} cos={cos}: {} vs {want}", r.value);
                if cos > 0.0 {
                    for (i, s) in r.signs.iter().enumerate() {
                        assert_eq!(*s, if i % 2 == 0 { 1 } else { -1 });
                    }
                }
            }
        }
    }

    #[test]
    fn signed_variance_block_diagonal() {
        let mut rng = rng_from_seed(5);
        let spinors: Vec<[Complex<f64>; 2]> = (0..5)
            .map(|_| {
                let u: Su2<f64> = random_su2(&mut rng);
                [u[0][0], u[1][0]]
            })
            .collect();
        let c = CorrelationMatrix::from_state(&StateVector::product(&spinors).unwrap()).unwrap();
        let axes: Vec<[f64; 3]> = (0..5).map(|_| random_unit_vector(&mut rng)).collect();
        let want: f64 = (0..5)
            .map(|i| {
                let b = c.block(i, i);
                (0..3)
                    .map(|a| (0..3).map(|k| axes[i][a] * b[a][k] * axes[i][k]).sum::<f64>())
                    .sum::<f64>()
            })
            .sum();
        let r = max_signed_variance(&c, &axes).unwrap();
        assert!((r.value - want).abs() < 1e-12);
    }

    #[test]
    fn signed_variance_matches_naive_loop() {
        let n = 6;
        let psi = random_state(n, 77);
        let c = CorrelationMatrix::from_state(&psi).unwrap();
        let z = [0.0, 0.0, 1.0];
        let r = max_signed_variance(&c, &vec![z; n]).unwrap();
        // exhaustive over all 2^6 patterns, variance evaluated directly
        let mut best = f64::NEG_INFINITY;
        for pattern in 0..(1u32 << n) {
            let dirs: Vec<[f64; 3]> = (0..n)
                .map(|i| if pattern & (1 << i) != 0 { [0.0, 0.0, -1.0] } else { z })
                .collect();
            let v = DirectionField::new(dirs).unwrap().direct_variance(&psi).unwrap();
            best = best.max(v);
        }
        assert!((r.value - best).abs() < 1e-12);
        let greedy = max_signed_variance_greedy(&c, &vec![z; n]).unwrap();
        assert!(!greedy.exact && greedy.value <= r.value + 1e-12);
    }

    #[test]
    fn signed_variance_global_flip_invariant() {
        let n = 5;
        let psi = random_state(n, 13);
        let c = CorrelationMatrix::from_state(&psi).unwrap();
        let mut rng = rng_from_seed(14);
        let axes: Vec<[f64; 3]> = (0..n).map(|_| random_unit_vector(&mut rng)).collect();
        let flipped: Vec<[f64; 3]> = axes.iter().map(|a| [-a[0], -a[1], -a[2]]).collect();
        let a = max_signed_variance(&c, &axes).unwrap();
        let b = max_signed_variance(&c, &flipped).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap() {
        let big = CorrelationMatrix::from_parts(nalgebra::DMatrix::identity(75, 75), vec![[0.0; 3]; 25]).unwrap();
        let axes = vec![[0.0, 0.0, 1.0]; 25];
        assert!(matches!(
            max_signed_variance(&big, &axes),
            Err(Error::EnumerationCap { n_sites: 25, .. })
        ));
        let g = max_signed_variance_greedy(&big, &axes).unwrap();
        assert!((g.value - 25.0f64).abs() < 1e-12);
    }

    #[test]
    fn single_precision_ghz() {
        let r = macroscopicity(
            &ghz::<f32>(4).unwrap(),
            &MaximizeOptions { tol: 1e-3, ..Default::default() },
        )
        .unwrap();
        assert!((r.value - 16.0).abs() < 1e-3);
    }
}
