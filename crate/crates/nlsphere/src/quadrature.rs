//! Gauss rules on `[-1, 1]` and tensor-product grids on the sphere.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul};

use libm::{acos, cos, fabs, pow, sin, sqrt, tgamma};

use crate::geometry::{SphCoord, UnitVector3};
use crate::{Error, Result};

/// Weight function of a Gauss rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureKind {
    /// Weight 1.
    GaussLegendre,
    /// Weight `(1 − t)^alpha (1 + t)^beta`.
    GaussJacobi { alpha: f64, beta: f64 },
}

/// A 1-D Gauss rule with increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub kind: QuadratureKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ f(tᵢ)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Builds the `n`-point Gauss rule of the given kind.
///
/// ```
/// use nlsphere::quadrature::{quadrature_rule, QuadratureKind};
/// let r = quadrature_rule(QuadratureKind::GaussLegendre, 2).unwrap();
/// assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
/// assert!((r.weights[0] - 1.0).abs() < 1e-15);
/// ```
pub fn quadrature_rule(kind: QuadratureKind, n: usize) -> Result<QuadratureRule1D> {
    if n == 0 {
        return Err(Error::InvalidInput("quadrature rule needs n >= 1"));
    }
    let (alpha, beta) = match kind {
        QuadratureKind::GaussLegendre => (0.0, 0.0),
        QuadratureKind::GaussJacobi { alpha, beta } => (alpha, beta),
    };
    if !(alpha.is_finite() && beta.is_finite()) || alpha <= -1.0 || beta <= -1.0 {
        return Err(Error::InvalidInput("Jacobi exponents must be finite and > -1"));
    }
    let (nodes, weights) = gauss_jacobi(n, alpha, beta);
    Ok(QuadratureRule1D { kind, nodes, weights })
}

/// `∫_{-1}^{1} (1−t)^α (1+t)^β dt`.
pub fn jacobi_moment(alpha: f64, beta: f64) -> f64 {
    pow(2.0, alpha + beta + 1.0) * tgamma(alpha + 1.0) * tgamma(beta + 1.0)
        / tgamma(alpha + beta + 2.0)
}

fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    // Jacobi matrix of the monic recurrence
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    d[0] = (beta - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        d[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        e[k - 1] = sqrt(b2);
    }
    tridiagonal_eigenvalues(&mut d, &mut e);
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // Newton polish on the three-term recurrence, then weights from P_n'.
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut x = d[i];
        for _ in 0..6 {
            let (p, dp) = jacobi_p_and_derivative(n, alpha, beta, x);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            let xn = x - step;
            if !(xn > -1.0 && xn < 1.0) {
                break;
            }
            x = xn;
            if fabs(step) <= 1e-16 * fabs(x).max(1e-3) {
                break;
            }
        }
        d[i] = x;
        let (_, dp) = jacobi_p_and_derivative(n, alpha, beta, x);
        w[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let total: f64 = w.iter().sum();
    let mu0 = jacobi_moment(alpha, beta);
    for wi in &mut w {
        *wi *= mu0 / total;
    }
    (d, w)
}

/// `(P_n^{(α,β)}(x), d/dx P_n^{(α,β)}(x))`, standard normalization.
fn jacobi_p_and_derivative(n: usize, alpha: f64, beta: f64, x: f64) -> (f64, f64) {
    let ab = alpha + beta;
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = (alpha + 1.0) + (ab + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let a1 = 2.0 * kf * (kf + ab) * (s - 2.0);
        let a2 = (s - 1.0) * (s * (s - 2.0) * x + alpha * alpha - beta * beta);
        let a3 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * s;
        let p2 = (a2 * p1 - a3 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let s = 2.0 * nf + ab;
    let dp = (nf * ((alpha - beta) - s * x) * p1 + 2.0 * (nf + alpha) * (nf + beta) * p0)
        / (s * (1.0 - x * x));
    (p1, dp)
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues overwrite `d`.
/// `e[i]` holds the coupling between rows `i` and `i + 1`.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    if n < 2 {
        return;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = fabs(d[m]) + fabs(d[m + 1]);
                if fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { fabs(r) } else { -fabs(r) });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Gauss–Legendre in `t = cos θ` times a uniform longitude grid.
///
/// Samples are stored row-major: index `i * n_phi + j` for colatitude node `i`
/// and longitude node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Gauss–Legendre nodes in `cos θ`, increasing.
    pub cos_theta: Vec<f64>,
    /// Colatitudes `arccos(cos_theta)`.
    pub theta: Vec<f64>,
    /// Gauss–Legendre weights in `cos θ`.
    pub lat_weights: Vec<f64>,
    /// Longitudes `2π j / n_phi`.
    pub phi: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidInput("grid sizes must be positive"));
        }
        let rule = quadrature_rule(QuadratureKind::GaussLegendre, n_theta)?;
        let theta = rule.nodes.iter().map(|&t| acos(t)).collect();
        let phi = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        Ok(Self { n_theta, n_phi, cos_theta: rule.nodes, theta, lat_weights: rule.weights, phi })
    }

    /// Smallest grid that resolves degree `lmax` products exactly.
    pub fn for_degree(lmax: usize) -> Self {
        Self::new(lmax + 1, 2 * lmax + 1).expect("positive sizes")
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Combined weight of node `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let _ = j;
        self.lat_weights[i] * 2.0 * PI / self.n_phi as f64
    }

    pub fn coord(&self, i: usize, j: usize) -> SphCoord {
        SphCoord { theta: self.theta[i], phi: self.phi[j] }
    }

    pub fn point(&self, i: usize, j: usize) -> UnitVector3 {
        let t = self.cos_theta[i];
        let s = sqrt((1.0 - t * t).max(0.0));
        UnitVector3 { x: s * cos(self.phi[j]), y: s * sin(self.phi[j]), z: t }
    }

    /// All nodes in storage order.
    pub fn points(&self) -> Vec<UnitVector3> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                out.push(self.point(i, j));
            }
        }
        out
    }

    /// Whether products of two degree-`lmax` fields are integrated exactly.
    pub fn resolves(&self, lmax: usize) -> bool {
        self.n_theta > lmax && self.n_phi > 2 * lmax
    }

    pub(crate) fn check_resolves(&self, lmax: usize) -> Result<()> {
        if self.resolves(lmax) {
            Ok(())
        } else {
            Err(Error::UnresolvedBandwidth { lmax, n_theta: self.n_theta, n_phi: self.n_phi })
        }
    }
}

/// `∫_{𝕊²} f dΩ` from samples at the grid nodes.
///
/// ```
/// use nlsphere::quadrature::{surface_integral, SphereGrid};
/// let g = SphereGrid::new(4, 8).unwrap();
/// let one = vec![1.0; g.len()];
/// let area = surface_integral(&g, &one).unwrap();
/// assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-12);
/// ```
pub fn surface_integral<T>(grid: &SphereGrid, samples: &[T]) -> Result<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    if samples.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: samples.len() });
    }
    let mut total = T::default();
    for i in 0..grid.n_theta {
        let mut row = T::default();
        for j in 0..grid.n_phi {
            row = row + samples[i * grid.n_phi + j];
        }
        total = total + row * grid.weight(i, 0);
    }
    Ok(total)
}
