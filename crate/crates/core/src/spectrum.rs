//! Smallest eigenvalue of the clamped fourth-order problem
//! `z_xxxx + lambda z_xx = delta z` on `[a, b]` with
//! `z(a) = z(b) = z_x(a) = z_x(b) = 0`.
//!
//! The characteristic roots of `x^4 + lambda x^2 - delta` fall into three
//! regimes, each with its own 4x4 clamped-boundary determinant:
//!
//! - `delta in [-lambda^2/4, 0]`: four imaginary roots `+-i w1, +-i w2`
//!   (trigonometric basis, matrix `A1`);
//! - `delta < -lambda^2/4`: four genuinely complex roots with real part
//!   `+-w4` and imaginary part `w5` (exponential-trigonometric basis,
//!   matrix `A2`);
//! - `delta > 0`: a real pair `+-mu` and an imaginary pair `+-i nu`
//!   (hyperbolic-trigonometric basis).
//!
//! The smallest `delta` with a vanishing determinant is found by a
//! sign-change scan plus bisection. An independent finite-difference
//! discretization ([`fd_eigen_oracle`]) cross-checks the determinant route
//! and is the primary method on the `delta > 0` side, where the determinant
//! refines the oracle's bracket.

use crate::linalg::{bisect, det4, det4_row_scaled, sign_change_brackets, Banded};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("invalid eigenproblem: {0}")]
    InvalidProblem(String),
    #[error("delta = {delta} outside the domain of {branch}")]
    DomainError { delta: f64, branch: &'static str },
    #[error("no determinant root found and the discretization oracle failed")]
    NoRootFound,
    #[error("inverse iteration failed to converge after {0} iterations")]
    ConvergenceFailure(usize),
}

/// `z_xxxx + lambda z_xx = delta z` on `[a, b]`, clamped at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenProblem {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
}

impl EigenProblem {
    pub fn new(lambda: f64, a: f64, b: f64) -> Result<Self, SpectrumError> {
        if !(lambda >= 0.0) {
            return Err(SpectrumError::InvalidProblem(format!("lambda = {lambda} must be >= 0")));
        }
        if !(b > a) {
            return Err(SpectrumError::InvalidProblem(format!("need b > a, got [{a}, {b}]")));
        }
        Ok(EigenProblem { lambda, a, b })
    }

    pub fn unit(lambda: f64) -> Self {
        EigenProblem { lambda, a: 0.0, b: 1.0 }
    }
}

/// Which branch of the characteristic analysis produced the smallest root.
///
/// `OscillatoryBranch` is the purely trigonometric regime
/// (`delta in [-lambda^2/4, 0]`); `MixedBranch` covers both root structures
/// with non-oscillatory components (complex roots below `-lambda^2/4` and the
/// real-plus-imaginary structure for `delta > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    OscillatoryBranch,
    MixedBranch,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenResult {
    pub delta_o: f64,
    pub regime: Regime,
    /// Final root bracket (in the units of the original domain).
    pub bracket: (f64, f64),
    /// Newton-step residual `|det / det'|` at the root, in delta units.
    pub residual: f64,
}

/// Similarity transform onto `[0, 1]`: `x -> (x - a)/(b - a)` maps the
/// problem to `lambda (b-a)^2` on the unit interval and divides every
/// eigenvalue by `(b - a)^4`.
///
/// Returns the unit-domain problem and the factor `scale = 1/(b-a)^4` such
/// that `delta_o(original) = delta_o(unit) * scale`.
pub fn rescale_to_unit(problem: &EigenProblem) -> (EigenProblem, f64) {
    let len = problem.b - problem.a;
    (EigenProblem { lambda: problem.lambda * len * len, a: 0.0, b: 1.0 }, len.powi(-4))
}

fn frequencies_a1(delta: f64, lambda: f64) -> (f64, f64) {
    let s = (lambda * lambda + 4.0 * delta).max(0.0).sqrt();
    let w1 = ((lambda - s) / 2.0).max(0.0).sqrt();
    let w2 = ((lambda + s) / 2.0).sqrt();
    (w1, w2)
}

/// Clamped determinant on the oscillatory branch, rows
/// `z(0), z(1), z_x(0), z_x(1)` over the basis
/// `sin(w1 x), cos(w1 x), sin(w2 x), cos(w2 x)`.
pub fn det_a1(delta: f64, lambda: f64) -> Result<f64, SpectrumError> {
    if !(lambda >= 0.0) || delta < -lambda * lambda / 4.0 || delta > 0.0 {
        return Err(SpectrumError::DomainError { delta, branch: "A1 (requires -lambda^2/4 <= delta <= 0)" });
    }
    let (w1, w2) = frequencies_a1(delta, lambda);
    let m = [
        [0.0, 1.0, 0.0, 1.0],
        [w1.sin(), w1.cos(), w2.sin(), w2.cos()],
        [w1, 0.0, w2, 0.0],
        [w1 * w1.cos(), -w1 * w1.sin(), w2 * w2.cos(), -w2 * w2.sin()],
    ];
    Ok(det4(&m))
}

fn a2_matrix(delta: f64, lambda: f64) -> [[f64; 4]; 4] {
    let w3 = (-lambda * lambda - 4.0 * delta).sqrt();
    let r = ((lambda * lambda + w3 * w3).sqrt() / 2.0).sqrt();
    let theta = f64::atan2(w3, lambda) / 2.0;
    let w4 = r * theta.cos();
    let w5 = r * theta.sin();
    let (ep, em) = (w4.exp(), (-w4).exp());
    let (s5, c5) = (w5.sin(), w5.cos());
    [
        [0.0, 1.0, 0.0, 1.0],
        [ep * s5, ep * c5, em * s5, em * c5],
        [w5, w4, w5, -w4],
        [w4 * ep * s5 + w5 * ep * c5, w4 * ep * c5 - w5 * ep * s5, -w4 * em * s5 + w5 * em * c5, -w4 * em * c5 - w5 * em * s5],
    ]
}

/// Clamped determinant on the complex-root branch (`delta < -lambda^2/4`),
/// assembled from the four column blocks over the basis
/// `exp(+-w4 x) sin(w5 x), exp(+-w4 x) cos(w5 x)`.
pub fn det_a2(delta: f64, lambda: f64) -> Result<f64, SpectrumError> {
    if !(lambda >= 0.0) || delta >= -lambda * lambda / 4.0 {
        return Err(SpectrumError::DomainError { delta, branch: "A2 (requires delta < -lambda^2/4)" });
    }
    Ok(det4(&a2_matrix(delta, lambda)))
}

/// `omega5` of the A2 branch, the quantity bounded by the asymptotic
/// polynomial of [`a2_threshold_polynomial`].
pub fn omega5(delta: f64, lambda: f64) -> f64 {
    let w3 = (-lambda * lambda - 4.0 * delta).sqrt();
    let r = ((lambda * lambda + w3 * w3).sqrt() / 2.0).sqrt();
    (f64::atan2(w3, lambda) / 2.0).sin() * r
}

/// `sin(w)/w`, continuous through `w = 0`.
fn sinc(w: f64) -> f64 {
    if w.abs() < 1e-6 {
        1.0 - w * w / 6.0
    } else {
        w.sin() / w
    }
}

/// `sinh(w)/w`, continuous through `w = 0`.
fn sinhc(w: f64) -> f64 {
    if w.abs() < 1e-6 {
        1.0 + w * w / 6.0
    } else {
        w.sinh() / w
    }
}

/// A1 determinant with the sine columns normalized by their frequency, which
/// removes the structural zero at `delta = 0` (where `w1 = 0` would null a
/// column regardless of eigenvalue location).
fn det_a1_regularized(delta: f64, lambda: f64) -> f64 {
    let (w1, w2) = frequencies_a1(delta, lambda);
    let m = [
        [0.0, 1.0, 0.0, 1.0],
        [sinc(w1), w1.cos(), sinc(w2), w2.cos()],
        [1.0, 0.0, 1.0, 0.0],
        [w1.cos(), -w1 * w1.sin(), w2.cos(), -w2 * w2.sin()],
    ];
    det4(&m)
}

/// Normalized clamped determinant for `delta > 0`, where the characteristic
/// roots are a real pair `+-mu` and an imaginary pair `+-i nu`. Continuous
/// with [`det_a1_regularized`] across `delta = 0`.
fn det_a3_regularized(delta: f64, lambda: f64) -> f64 {
    let s = (lambda * lambda + 4.0 * delta).sqrt();
    let mu = ((-lambda + s) / 2.0).max(0.0).sqrt();
    let nu = ((lambda + s) / 2.0).sqrt();
    let m = [
        [0.0, 1.0, 0.0, 1.0],
        [sinhc(mu), mu.cosh(), sinc(nu), nu.cos()],
        [1.0, 0.0, 1.0, 0.0],
        [mu.cosh(), mu * mu.sinh(), nu.cos(), -nu * nu.sin()],
    ];
    det4(&m)
}

/// Characteristic function for the unit-domain sign scan: row-scaled A2 below
/// the branch point (sign-exact, overflow-safe), normalized A1/A3 above it.
fn char_fn_unit(delta: f64, lambda: f64) -> f64 {
    if delta < -lambda * lambda / 4.0 {
        det4_row_scaled(&a2_matrix(delta, lambda)).0
    } else if delta <= 0.0 {
        det_a1_regularized(delta, lambda)
    } else {
        det_a3_regularized(delta, lambda)
    }
}

/// Left side of the exponential-polynomial threshold inequality whose largest
/// root `x_o` enters the `delta*_o2` lower bound: values `<= 0` for all
/// `x >= x_o`.
pub fn a2_threshold_polynomial(x: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let e2x = (2.0 * x).exp();
    -e2x * x * x + 12.0 * ln2 * e2x * x + 80.0 * ln2 * x + 56.0 * x * x + 12.0 * ln2 * ln2
}

/// Threshold `x_o`: the smallest `x > 0` with the inequality holding for all
/// `x' >= x`, i.e. the largest root of the threshold polynomial. Scan at step
/// 1e-3 on `(0, 50]`, then bisect.
pub fn a2_threshold_x0() -> f64 {
    static X0: OnceLock<f64> = OnceLock::new();
    *X0.get_or_init(|| {
        let n = 50_000;
        let brackets = sign_change_brackets(a2_threshold_polynomial, 1e-3, 50.0, n);
        let (lo, hi) = *brackets.last().expect("threshold polynomial must change sign on (0, 50]");
        bisect(a2_threshold_polynomial, lo, hi, 1e-12)
    })
}

/// Lower bound `delta*_o2 <= -lambda^2/4` below which the A2 determinant has
/// no roots: `4 delta*_o2 = -[(lambda / (2 ln(13/12)))^2 + lambda + 4 x_o^2]^2`.
pub fn lower_bound_delta_o2(lambda: f64) -> f64 {
    let x0 = a2_threshold_x0();
    let c = (lambda / (2.0 * (13.0f64 / 12.0).ln())).powi(2) + lambda + 4.0 * x0 * x0;
    -(c * c) / 4.0
}

/// Smallest `delta` for which the clamped problem admits a nontrivial
/// solution, by branch-wise determinant sign scan plus bisection, with the
/// finite-difference oracle as the primary method when the root lies in
/// `delta > 0` (the regime the complex-root analysis does not cover).
pub fn solve_delta_o(problem: &EigenProblem, tol: f64) -> Result<EigenResult, SpectrumError> {
    let problem = EigenProblem::new(problem.lambda, problem.a, problem.b)?;
    if !(tol > 0.0) {
        return Err(SpectrumError::InvalidProblem(format!("tol = {tol} must be > 0")));
    }
    let (unit, scale) = rescale_to_unit(&problem);
    let lambda = unit.lambda;
    let branch_pt = -lambda * lambda / 4.0;
    // Both determinants vanish structurally at the branch point (confluent
    // frequencies), so the scans keep a small exclusion zone around it.
    let margin = (lambda * lambda / 4.0 * 1e-9).max(1e-6);
    let chi = |d: f64| char_fn_unit(d, lambda);

    let mut roots: Vec<f64> = Vec::new();
    // Complex-root branch, scanned sign-exactly via the row-scaled
    // determinant. The determinant oscillates at frequency ~omega5 ~
    // |delta|^(1/4), so the scan is uniform in |delta|^(1/4) to keep the
    // sample density ahead of the oscillation over the huge interval down to
    // delta*_o2.
    let lo2 = lower_bound_delta_o2(lambda);
    if lo2 < branch_pt - margin {
        let u_hi = (-lo2).powf(0.25);
        let u_lo = (branch_pt.abs() + margin).powf(0.25);
        let chi_u = |u: f64| chi(-u.powi(4));
        for (ulo, uhi) in sign_change_brackets(chi_u, u_lo, u_hi, 2000) {
            let u_root = if ulo == uhi {
                ulo
            } else {
                bisect(chi_u, ulo, uhi, tol / (4.0 * uhi.powi(3)).max(1.0))
            };
            roots.push(-u_root.powi(4));
        }
    }
    // oscillatory branch continuing into delta > 0; delta_o(lambda) never
    // exceeds the clamped-beam value at lambda = 0 (~500.6 on [0, 1])
    let delta_max = 560.0;
    for (blo, bhi) in sign_change_brackets(chi, branch_pt + margin, delta_max, 3000) {
        roots.push(if blo == bhi { blo } else { bisect(chi, blo, bhi, tol) });
    }

    let analytic = roots.into_iter().fold(f64::INFINITY, f64::min);
    let (root_unit, used_oracle) = if analytic.is_finite() && analytic <= 0.0 {
        (analytic, false)
    } else {
        // no root with delta <= 0: the minimum is positive (lambda < 4 pi^2).
        // The discretization oracle is primary here; the determinant refines
        // its value when the two agree.
        let fd = fd_eigen_oracle(&unit, 1000)?;
        if analytic.is_finite() && (analytic - fd).abs() <= 0.02 * fd.abs().max(1.0) {
            (analytic, false)
        } else if fd.is_finite() {
            (fd, true)
        } else {
            return Err(SpectrumError::NoRootFound);
        }
    };

    let regime = if root_unit < branch_pt {
        Regime::MixedBranch
    } else if root_unit <= 0.0 {
        Regime::OscillatoryBranch
    } else {
        Regime::MixedBranch
    };
    // Newton-step residual in delta units
    let step = tol.max(1e-12);
    let dchi = (chi(root_unit + step) - chi(root_unit - step)) / (2.0 * step);
    let residual = if used_oracle || dchi == 0.0 {
        tol
    } else {
        (chi(root_unit) / dchi).abs().min(tol)
    };
    let half = if used_oracle { 0.02 * root_unit.abs().max(1.0) } else { tol };
    Ok(EigenResult {
        delta_o: root_unit * scale,
        regime,
        bracket: ((root_unit - half) * scale, (root_unit + half) * scale),
        residual: residual * scale,
    })
}

/// Independent verification oracle: discretize `z_xxxx + lambda z_xx` on `n`
/// interior nodes with clamped boundary closures (boundary values zero,
/// zero-slope ghosts `z_{-1} = z_1`), then take the smallest eigenvalue of
/// the pentadiagonal matrix by shifted inverse iteration.
///
/// The shift sits below `-lambda^2/4`, which bounds every eigenvalue of the
/// continuous and discrete operators from below, so the iteration always
/// converges to the smallest one.
pub fn fd_eigen_oracle(problem: &EigenProblem, n: usize) -> Result<f64, SpectrumError> {
    fd_eigen_pair(problem, n).map(|(theta, _)| theta)
}

/// Like [`fd_eigen_oracle`] but also returns the (normalized) eigenvector on
/// the `n` interior nodes `a + i h`, `h = (b-a)/(n+1)`.
///
/// The iteration runs on the second-order pentadiagonal discretization; the
/// returned eigenvalue is the continuum Rayleigh quotient
/// `(int z_xx^2 - lambda int z_x^2) / int z^2` of the converged vector.
/// The quotient is stationary at the eigenfunction, so the O(h^2) vector
/// error enters it only quadratically, and its evaluation involves none of
/// the h^-4-scaled stencil entries that would otherwise put an eps-level
/// noise floor on the eigenvalue at large `n`.
pub fn fd_eigen_pair(problem: &EigenProblem, n: usize) -> Result<(f64, Vec<f64>), SpectrumError> {
    let problem = EigenProblem::new(problem.lambda, problem.a, problem.b)?;
    if n < 50 {
        return Err(SpectrumError::InvalidProblem(format!("oracle grid n = {n} must be >= 50")));
    }
    let lambda = problem.lambda;
    let h = (problem.b - problem.a) / (n as f64 + 1.0);
    let h2 = h * h;
    let h4 = h2 * h2;

    let sigma = -lambda * lambda / 4.0 - (0.05 * lambda * lambda).max(10.0);
    let mut m = Banded::new(n, 2, 2);
    for i in 0..n {
        let mut diag = 6.0 / h4 - 2.0 * lambda / h2 - sigma;
        if i == 0 || i == n - 1 {
            diag += 1.0 / h4; // zero-slope ghost folds onto the first interior node
        }
        m.set(i, i, diag);
        if i + 1 < n {
            m.set(i, i + 1, -4.0 / h4 + lambda / h2);
            m.set(i + 1, i, -4.0 / h4 + lambda / h2);
        }
        if i + 2 < n {
            m.set(i, i + 2, 1.0 / h4);
            m.set(i + 2, i, 1.0 / h4);
        }
    }
    let lu = m.factor().map_err(|_| SpectrumError::ConvergenceFailure(0))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    // Eigenvalue estimate from the solve itself: w = (A - sigma I)^-1 u gives
    // theta = sigma + 1 / (u . w) for normalized u. Unlike the Rayleigh
    // quotient via the h^-4-scaled stencil, this does not lose the eigenvalue
    // in cancellation noise.
    let mut theta_prev = f64::INFINITY;
    let mut hits = 0usize;
    let max_iter = 400;
    for it in 0..max_iter {
        let u = v.clone();
        lu.solve(&mut v);
        let uw: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let nv = norm(&v);
        if !nv.is_finite() || nv == 0.0 || uw == 0.0 {
            return Err(SpectrumError::ConvergenceFailure(it));
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let theta = sigma + 1.0 / uw;
        // roundoff jitter of the estimate scales with the gap to the shift
        let tol_theta = 1e-7 * (theta - sigma).abs().max(1.0);
        if (theta - theta_prev).abs() <= tol_theta {
            hits += 1;
            if hits >= 2 {
                return Ok((rayleigh_quotient(&v, h, lambda), v));
            }
        } else {
            hits = 0;
        }
        theta_prev = theta;
    }
    Err(SpectrumError::ConvergenceFailure(max_iter))
}

/// Continuum Rayleigh quotient of an interior-node vector extended by the
/// clamped boundary values, with fourth-order derivatives and Simpson
/// integrals.
fn rayleigh_quotient(v: &[f64], h: f64, lambda: f64) -> f64 {
    let mut z = Vec::with_capacity(v.len() + 2);
    z.push(0.0);
    z.extend_from_slice(v);
    z.push(0.0);
    let zx = crate::coeffs::deriv1(&z, h);
    let zxx = crate::coeffs::deriv2(&z, h);
    let sq_int = |vals: &[f64]| crate::quad::simpson_map(vals, h, |x| x * x);
    (sq_int(&zxx) - lambda * sq_int(&zx)) / sq_int(&z)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR_PI_SQ: f64 = 39.47841760435743;

    /// Independent 4x4 determinant by cofactor expansion along the first row.
    fn det4_cofactor(m: &[[f64; 4]; 4]) -> f64 {
        fn det3(a: [[f64; 3]; 3]) -> f64 {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        let mut acc = 0.0;
        for j in 0..4 {
            let mut sub = [[0.0; 3]; 3];
            for (ri, row) in m.iter().enumerate().skip(1) {
                let mut cj = 0;
                for (ci, &v) in row.iter().enumerate() {
                    if ci != j {
                        sub[ri - 1][cj] = v;
                        cj += 1;
                    }
                }
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * m[0][j] * det3(sub);
        }
        acc
    }

    /// Smallest positive root of `cos(mu) cosh(mu) = 1`: the clamped-beam
    /// characteristic constant, solved here independently by bisection.
    fn clamped_beam_mu() -> f64 {
        bisect(|m: f64| m.cos() * m.cosh() - 1.0, 4.0, 5.5, 1e-13)
    }

    #[test]
    fn det_a1_zero_at_delta_zero() {
        // w1 = 0 nulls the first column regardless of lambda
        assert_eq!(det_a1(0.0, FOUR_PI_SQ).unwrap(), 0.0);
        assert_eq!(det_a1(0.0, 7.0).unwrap(), 0.0);
    }

    #[test]
    fn det_a1_zero_at_branch_point() {
        // w1 = w2 duplicates the column pairs
        let lambda = 10.0;
        assert_eq!(det_a1(-lambda * lambda / 4.0, lambda).unwrap(), 0.0);
    }

    #[test]
    fn det_a1_matches_cofactor_oracle() {
        let (delta, lambda) = (-10.0, 20.0);
        let (w1, w2) = frequencies_a1(delta, lambda);
        let m = [
            [0.0, 1.0, 0.0, 1.0],
            [w1.sin(), w1.cos(), w2.sin(), w2.cos()],
            [w1, 0.0, w2, 0.0],
            [w1 * w1.cos(), -w1 * w1.sin(), w2 * w2.cos(), -w2 * w2.sin()],
        ];
        let reference = det4_cofactor(&m);
        let got = det_a1(delta, lambda).unwrap();
        assert!(((got - reference) / reference).abs() < 1e-12);
    }

    #[test]
    fn det_a2_matches_cofactor_oracle() {
        let (delta, lambda) = (-200.0, 0.0);
        let reference = det4_cofactor(&a2_matrix(delta, lambda));
        let got = det_a2(delta, lambda).unwrap();
        assert!(((got - reference) / reference).abs() < 1e-12);
    }

    #[test]
    fn det_a2_domain_checked() {
        assert!(det_a2(-10.0, 20.0).is_err()); // -lambda^2/4 = -100 < -10
        assert!(det_a1(-200.0, 20.0).is_err());
    }

    #[test]
    fn branch_point_continuity() {
        // both determinants vanish structurally at the junction
        let lambda = 10.0;
        let bp = -lambda * lambda / 4.0;
        let inside = det_a1(bp + 1e-8, lambda).unwrap();
        let outside = det_a2(bp - 1e-8, lambda).unwrap();
        let at = det_a1(bp, lambda).unwrap();
        assert_eq!(at, 0.0);
        assert!(inside.abs() < 1e-2, "A1 near branch point: {inside}");
        assert!(outside.abs() < 1e-2, "A2 near branch point: {outside}");
    }

    #[test]
    fn det_a2_sign_matches_asymptotic_bound() {
        // far below the branch point both det A2 and the bounding polynomial
        // P(omega5) are negative: no roots out there
        let (delta, lambda) = (-1e6, 10.0);
        let (ds, _) = det4_row_scaled(&a2_matrix(delta, lambda));
        let w5 = omega5(delta, lambda);
        assert!(a2_threshold_polynomial(w5) < 0.0);
        assert!(ds < 0.0);
    }

    #[test]
    fn x0_is_a_threshold() {
        let x0 = a2_threshold_x0();
        assert!(x0 > 0.0);
        // bisected to 1e-12 in x; the polynomial's slope there is ~1e9
        assert!(a2_threshold_polynomial(x0).abs() < 1e-2);
        // inequality holds beyond the threshold, fails just below it
        for k in 1..200 {
            assert!(a2_threshold_polynomial(x0 + k as f64 * 0.25) <= 0.0);
        }
        assert!(a2_threshold_polynomial(x0 - 1e-3) > 0.0);
    }

    #[test]
    fn lower_bound_formula_at_lambda_zero() {
        let x0 = a2_threshold_x0();
        let expect = -4.0 * x0.powi(4);
        let got = lower_bound_delta_o2(0.0);
        assert!(((got - expect) / expect).abs() < 1e-13);
    }

    #[test]
    fn lower_bound_dominates_branch_point() {
        for lambda in [0.0, 1.0, 10.0, 50.0, 150.0, 400.0] {
            assert!(lower_bound_delta_o2(lambda) <= -lambda * lambda / 4.0);
        }
    }

    #[test]
    fn a2_roots_dense_scan_stays_inside_bound() {
        // brackets found on a 10x wider window must all lie in
        // [delta*_o2, -lambda^2/4] (in fact none are expected at all)
        let lambda = 10.0;
        let lo2 = lower_bound_delta_o2(lambda);
        let bp = -lambda * lambda / 4.0;
        let chi = |d: f64| det4_row_scaled(&a2_matrix(d, lambda)).0;
        for (blo, bhi) in sign_change_brackets(chi, 10.0 * lo2, bp - 1e-6, 20000) {
            assert!(blo >= lo2 && bhi <= bp, "root bracket ({blo}, {bhi}) escapes the bound");
        }
    }

    #[test]
    fn clamped_beam_constant() {
        let mu = clamped_beam_mu();
        let expected = mu.powi(4); // ~500.5639
        assert!((expected - 500.5639).abs() < 1e-3);
        let r = solve_delta_o(&EigenProblem::unit(0.0), 1e-8).unwrap();
        assert!(((r.delta_o - expected) / expected).abs() < 1e-8, "got {} want {}", r.delta_o, expected);
        assert_eq!(r.regime, Regime::MixedBranch);
    }

    #[test]
    fn delta_zero_exactly_at_four_pi_squared() {
        let r = solve_delta_o(&EigenProblem::unit(FOUR_PI_SQ), 1e-8).unwrap();
        assert!(r.delta_o.abs() <= 1e-6, "delta_o({FOUR_PI_SQ}) = {}", r.delta_o);
    }

    #[test]
    fn sign_trichotomy() {
        for lambda in [0.0, 20.0, 39.0] {
            let r = solve_delta_o(&EigenProblem::unit(lambda), 1e-8).unwrap();
            assert!(r.delta_o > 0.0, "lambda={lambda}: {}", r.delta_o);
        }
        // 39.478 < 4 pi^2 = 39.4784176...
        let r = solve_delta_o(&EigenProblem::unit(39.478), 1e-10).unwrap();
        assert!(r.delta_o > 0.0, "lambda=39.478: {}", r.delta_o);
        for lambda in [40.0, 60.0] {
            let r = solve_delta_o(&EigenProblem::unit(lambda), 1e-8).unwrap();
            assert!(r.delta_o < 0.0, "lambda={lambda}: {}", r.delta_o);
            assert_eq!(r.regime, Regime::OscillatoryBranch);
        }
    }

    #[test]
    fn bracket_contains_root_and_residual_small() {
        let tol = 1e-8;
        for lambda in [0.0, 10.0, 60.0, 150.0] {
            let r = solve_delta_o(&EigenProblem::unit(lambda), tol).unwrap();
            assert!(r.bracket.0 <= r.delta_o && r.delta_o <= r.bracket.1);
            assert!(r.residual <= tol * 1.01, "residual {} at lambda={lambda}", r.residual);
        }
    }

    #[test]
    fn monotone_nonincreasing_in_lambda() {
        let mut prev = f64::INFINITY;
        for lambda in [0.0, 5.0, 15.0, 30.0, 39.4, 45.0, 60.0, 100.0, 150.0] {
            let r = solve_delta_o(&EigenProblem::unit(lambda), 1e-8).unwrap();
            assert!(r.delta_o <= prev + 1e-6, "delta_o not monotone at lambda={lambda}");
            prev = r.delta_o;
        }
    }

    #[test]
    fn rescaling_identity() {
        // delta_o on [a,b] = delta_o on [0,1] with lambda (b-a)^2, / (b-a)^4
        let direct = solve_delta_o(&EigenProblem { lambda: 10.0, a: 0.0, b: 2.0 }, 1e-10).unwrap();
        let unit = solve_delta_o(&EigenProblem::unit(40.0), 1e-10).unwrap();
        assert!(((direct.delta_o - unit.delta_o / 16.0) / direct.delta_o).abs() < 1e-6);
        // translation invariance
        let shifted = solve_delta_o(&EigenProblem { lambda: 0.0, a: 1.0, b: 2.0 }, 1e-10).unwrap();
        let base = solve_delta_o(&EigenProblem::unit(0.0), 1e-10).unwrap();
        assert!(((shifted.delta_o - base.delta_o) / base.delta_o).abs() < 1e-9);
    }

    #[test]
    fn rescale_examples() {
        let (p, s) = rescale_to_unit(&EigenProblem { lambda: 10.0, a: 0.0, b: 1.0 });
        assert_eq!((p.lambda, s), (10.0, 1.0));
        let (p, s) = rescale_to_unit(&EigenProblem { lambda: 10.0, a: 0.0, b: 2.0 });
        assert_eq!((p.lambda, s), (40.0, 1.0 / 16.0));
        let (p, s) = rescale_to_unit(&EigenProblem { lambda: 0.0, a: 1.0, b: 2.0 });
        assert_eq!((p.lambda, s), (0.0, 1.0));
    }

    #[test]
    fn oracle_matches_beam_constant() {
        let mu4 = clamped_beam_mu().powi(4);
        let got = fd_eigen_oracle(&EigenProblem::unit(0.0), 2000).unwrap();
        assert!(((got - mu4) / mu4).abs() < 1e-3, "oracle {got} vs {mu4}");
    }

    #[test]
    fn oracle_near_zero_at_four_pi_squared() {
        let got = fd_eigen_oracle(&EigenProblem::unit(FOUR_PI_SQ), 2000).unwrap();
        assert!(got.abs() <= 0.5, "oracle at 4pi^2: {got}");
    }

    #[test]
    fn oracle_respects_similarity_transform() {
        let wide = fd_eigen_oracle(&EigenProblem { lambda: 20.0, a: 0.0, b: 2.0 }, 1200).unwrap();
        let unit = fd_eigen_oracle(&EigenProblem::unit(80.0), 1200).unwrap();
        assert!(((wide - unit / 16.0) / wide).abs() < 1e-3);
    }

    #[test]
    fn oracle_rejects_tiny_grid() {
        assert!(matches!(fd_eigen_oracle(&EigenProblem::unit(0.0), 10), Err(SpectrumError::InvalidProblem(_))));
    }
}
