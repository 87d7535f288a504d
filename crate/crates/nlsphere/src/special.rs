//! Gauss hypergeometric function and Legendre polynomial helpers.

use libm::{fabs, floor, pow, tgamma};

use crate::{Error, Result};

const SERIES_TOL: f64 = 1e-16;
const MAX_TERMS: usize = 200_000;

/// Gauss hypergeometric function `₂F₁(p, q; r; z)` for real arguments, `z ≤ 1`.
///
/// The power series is used for `|z| < 1/2`. Larger `z` goes through the
/// `1 − z` connection formula, negative `z` through the Pfaff transformation.
/// At `z = 1` the Gauss sum is returned when `r − p − q > 0`.
///
/// ```
/// use nlsphere::special::hyp2f1;
/// // ₂F₁(1/2, c; c; z) = (1 − z)^{−1/2}
/// let v = hyp2f1(0.5, 2.25, 2.25, 0.015625).unwrap();
/// assert!((v - 1.0 / (1.0f64 - 0.015625).sqrt()).abs() < 1e-15);
/// ```
pub fn hyp2f1(p: f64, q: f64, r: f64, z: f64) -> Result<f64> {
    if !(p.is_finite() && q.is_finite() && r.is_finite() && z.is_finite()) {
        return Err(Error::InvalidInput("hyp2f1 arguments must be finite"));
    }
    if is_nonpositive_integer(r) {
        return Err(Error::InvalidInput("hyp2f1: r is a nonpositive integer"));
    }
    if z > 1.0 {
        return Err(Error::InvalidInput("hyp2f1: z > 1"));
    }
    if z == 0.0 || p == 0.0 || q == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(p) || is_nonpositive_integer(q) {
        return series(p, q, r, z);
    }
    let s = r - p - q;
    if z == 1.0 {
        if s > 0.0 {
            return Ok(tgamma(r) * tgamma(s) * rgamma(r - p) * rgamma(r - q));
        }
        return Err(Error::Divergent("hyp2f1 at z = 1 with r - p - q <= 0"));
    }
    if z < 0.0 {
        // Pfaff: (1 − z)^{−p} ₂F₁(p, r − q; r; z/(z − 1))
        let w = z / (z - 1.0);
        return Ok(pow(1.0 - z, -p) * hyp2f1(p, r - q, r, w)?);
    }
    if z < 0.5 || fabs(s - libm::round(s)) < 1e-6 {
        return series(p, q, r, z);
    }
    // 1 − z connection formula (r − p − q not an integer)
    let w = 1.0 - z;
    let a1 = tgamma(r) * tgamma(s) * rgamma(r - p) * rgamma(r - q);
    let a2 = tgamma(r) * tgamma(-s) * rgamma(p) * rgamma(q);
    let f1 = if a1 == 0.0 { 0.0 } else { series(p, q, 1.0 - s, w)? };
    let f2 = if a2 == 0.0 { 0.0 } else { series(r - p, r - q, s + 1.0, w)? };
    Ok(a1 * f1 + a2 * pow(w, s) * f2)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && floor(x) == x
}

/// `1/Γ(x)`, zero at the poles of Γ.
fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / tgamma(x)
    }
}

/// Plain Gauss series with term-ratio stopping.
pub(crate) fn series(p: f64, q: f64, r: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (p + kf) * (q + kf) / ((r + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // stop once terms are small and shrinking geometrically
        let next_ratio = fabs((p + kf + 1.0) * (q + kf + 1.0) / ((r + kf + 1.0) * (kf + 2.0)) * z);
        if next_ratio < 1.0 {
            let tail = fabs(term) * next_ratio / (1.0 - next_ratio);
            if tail <= SERIES_TOL * fabs(sum) {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence { estimate: fabs(term) })
}

/// Fills `out[ℓ] = P_ℓ(t)` for `ℓ < out.len()`.
pub fn legendre_p_into(t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for l in 1..out.len().saturating_sub(1) {
        let lf = l as f64;
        out[l + 1] = ((2.0 * lf + 1.0) * t * out[l] - lf * out[l - 1]) / (lf + 1.0);
    }
}

/// Fills `out[ℓ] = (1 − P_ℓ(t)) / (1 − t)`, a polynomial of degree `ℓ − 1`.
pub fn legendre_d_into(t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 0.0;
    if out.len() > 1 {
        out[1] = 1.0;
    }
    for l in 1..out.len().saturating_sub(1) {
        let lf = l as f64;
        out[l + 1] =
            ((2.0 * lf + 1.0) + (2.0 * lf + 1.0) * t * out[l] - lf * out[l - 1]) / (lf + 1.0);
    }
}

/// Fills `out[ℓ] = P_ℓ'(t)` using `P'_{ℓ+1} = P'_{ℓ−1} + (2ℓ+1) P_ℓ`.
pub fn legendre_dp_into(t: f64, p: &[f64], out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 0.0;
    if out.len() > 1 {
        out[1] = 1.0;
    }
    for l in 1..out.len().saturating_sub(1) {
        out[l + 1] = out[l - 1] + (2.0 * l as f64 + 1.0) * p[l];
    }
    let _ = t;
}
