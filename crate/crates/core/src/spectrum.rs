//! Characteristic cubic of the Laplace-domain sector matrix and its roots.
//!
//! For sector coefficients `(h, s, v1, v2)` and drive `omega_e` the matrix
//!
//! ```text
//!        | s_     i v2        i v1     |
//! M(s_) = | i v2   s_ - i s    i Om_e   |
//!        | i v1   i Om_e      s_ - i h |
//! ```
//!
//! is `s_ I + i K` with `K` real symmetric, so `det M` is a monic cubic whose
//! roots are `-i` times the eigenvalues of `K`: purely imaginary.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::model::SectorCoefficients;

/// Residual tolerance on `|theta(alpha)|`, relative to `max(1, |alpha|^3)`.
pub const TOL_RESIDUAL: f64 = 1e-12;
/// Minimum pairwise root gap relative to the root scale before the residue
/// formulas are considered ill-conditioned.
pub const TOL_DEGENERATE: f64 = 1e-8;

const MAX_POLISH_STEPS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("cubic roots are (nearly) degenerate: min gap {min_gap:e} < {threshold:e}")]
    DegenerateRoots { min_gap: f64, threshold: f64 },
    #[error("cubic has non-finite coefficients")]
    NonFinite,
}

/// Monic cubic `s^3 + a2 s^2 + a1 s + a0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicPoly {
    pub a2: C64,
    pub a1: C64,
    pub a0: C64,
}

impl CubicPoly {
    pub fn eval(&self, s: C64) -> C64 {
        ((s + self.a2) * s + self.a1) * s + self.a0
    }

    pub fn derivative(&self, s: C64) -> C64 {
        (3.0 * s + 2.0 * self.a2) * s + self.a1
    }

    /// Coefficients of the real cubic `-l^3 + b2 l^2 + b1 l + b0` obtained
    /// from `theta(i l) = i (...)`, returned as complex numbers so callers
    /// can check that their imaginary parts vanish.
    pub fn imaginary_axis_coefficients(&self) -> [C64; 4] {
        let i = C64::i();
        // theta(i l) = -i l^3 - a2 l^2 + i a1 l + a0, divided by i.
        [C64::new(-1.0, 0.0), -self.a2 / i, self.a1, self.a0 / i]
    }

    fn is_finite(&self) -> bool {
        [self.a2, self.a1, self.a0]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Builds the characteristic cubic `theta(s) = det M(s)`.
pub fn theta_poly(c: &SectorCoefficients, omega_e: f64) -> CubicPoly {
    let (h, s, v1, v2) = (c.h, c.s, c.v1, c.v2);
    let a2 = C64::new(0.0, -(h + s));
    let a1 = C64::new(omega_e * omega_e + v1 * v1 + v2 * v2 - s * h, 0.0);
    let a0 = C64::new(0.0, -(2.0 * omega_e * v1 * v2 + v1 * v1 * s + v2 * v2 * h));
    CubicPoly { a2, a1, a0 }
}

/// The three roots of a cubic with quality diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicRoots {
    /// Sorted by ascending imaginary part, ties by ascending real part.
    pub roots: [C64; 3],
    pub min_pairwise_gap: f64,
    /// Largest `|theta(alpha_j)| / max(1, |alpha_j|^3)`.
    pub max_residual: f64,
}

impl CubicRoots {
    /// `max(1, max_j |alpha_j|)`.
    pub fn scale(&self) -> f64 {
        self.roots.iter().map(|r| r.norm()).fold(1.0, f64::max)
    }

    /// Largest `|Re alpha_j| / max(1, |Im alpha_j|)`.
    pub fn max_real_part_ratio(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| r.re.abs() / r.im.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Relative residuals of the three Vieta identities for `p`.
    ///
    /// Each difference is divided by `max(1, sum of |terms|)`.
    pub fn vieta_residuals(&self, p: &CubicPoly) -> [f64; 3] {
        let [x, y, z] = self.roots;
        let sum = x + y + z;
        let sum_scale = x.norm() + y.norm() + z.norm();
        let pairs = x * y + x * z + y * z;
        let pairs_scale = (x * y).norm() + (x * z).norm() + (y * z).norm();
        let prod = x * y * z;
        let prod_scale = prod.norm();
        [
            (sum + p.a2).norm() / sum_scale.max(1.0),
            (pairs - p.a1).norm() / pairs_scale.max(1.0),
            (prod + p.a0).norm() / prod_scale.max(1.0),
        ]
    }

    /// `theta'(alpha_j) = prod_{k != j} (alpha_j - alpha_k)`.
    pub fn derivative_at(&self, j: usize) -> C64 {
        let a = self.roots[j];
        self.roots
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .fold(C64::new(1.0, 0.0), |acc, (_, &b)| acc * (a - b))
    }
}

fn residual(p: &CubicPoly, s: C64) -> f64 {
    p.eval(s).norm() / s.norm().powi(3).max(1.0)
}

fn newton_step(p: &CubicPoly, s: C64) -> C64 {
    let d = p.derivative(s);
    if d.norm() == 0.0 {
        s
    } else {
        s - p.eval(s) / d
    }
}

/// One unconditional Newton step, then more while the residual shrinks.
fn polish(p: &CubicPoly, s: C64) -> C64 {
    let mut s = newton_step(p, s);
    let mut best = p.eval(s).norm();
    for _ in 1..MAX_POLISH_STEPS {
        if best == 0.0 {
            break;
        }
        let next = newton_step(p, s);
        let r = p.eval(next).norm();
        if r >= best {
            break;
        }
        s = next;
        best = r;
    }
    s
}

/// Cardano roots of the depressed cubic obtained by `s = y - a2/3`.
fn cardano(p: &CubicPoly) -> [C64; 3] {
    let shift = p.a2 / 3.0;
    let pp = p.a1 - p.a2 * p.a2 / 3.0;
    let qq = 2.0 * p.a2 * p.a2 * p.a2 / 27.0 - p.a2 * p.a1 / 3.0 + p.a0;

    let disc = (qq * qq / 4.0 + pp * pp * pp / 27.0).sqrt();
    // Pick the branch with the larger modulus to avoid cancellation.
    let u3 = {
        let plus = -qq / 2.0 + disc;
        let minus = -qq / 2.0 - disc;
        if plus.norm() >= minus.norm() {
            plus
        } else {
            minus
        }
    };
    if u3.norm() == 0.0 {
        // p = q = 0: triple root.
        return [-shift; 3];
    }
    let u = u3.powf(1.0 / 3.0);
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = [C64::new(0.0, 0.0); 3];
    let mut uk = u;
    for slot in out.iter_mut() {
        *slot = uk - pp / (3.0 * uk) - shift;
        uk *= omega;
    }
    out
}

fn sort_roots(roots: &mut [C64; 3]) {
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

fn min_gap(roots: &[C64; 3]) -> f64 {
    let [x, y, z] = *roots;
    (x - y).norm().min((x - z).norm()).min((y - z).norm())
}

/// Roots of `p` with diagnostics, without the degeneracy check.
pub fn cubic_roots_unchecked(p: &CubicPoly) -> Result<CubicRoots, SpectrumError> {
    if !p.is_finite() {
        return Err(SpectrumError::NonFinite);
    }
    let mut roots = cardano(p).map(|r| polish(p, r));
    sort_roots(&mut roots);
    let max_residual = roots.iter().map(|&r| residual(p, r)).fold(0.0, f64::max);
    Ok(CubicRoots {
        min_pairwise_gap: min_gap(&roots),
        max_residual,
        roots,
    })
}

/// Solves `p`, rejecting root triples too close for the residue expansion.
pub fn solve_cubic(p: &CubicPoly) -> Result<CubicRoots, SpectrumError> {
    let roots = cubic_roots_unchecked(p)?;
    let threshold = TOL_DEGENERATE * roots.scale();
    if roots.min_pairwise_gap < threshold {
        return Err(SpectrumError::DegenerateRoots {
            min_gap: roots.min_pairwise_gap,
            threshold,
        });
    }
    Ok(roots)
}
