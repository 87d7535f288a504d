//! The kernel family ρ_δ, γ′_δ, γ_δ, μ_δ, the vector kernels α and β, the
//! Legendre-coefficient functional λ_ℓ and the eigenvalue tables.
//!
//! With `t = x·y`, `t₀ = max(1 − δ²/2, −1)` and `b = a/2`,
//!
//! * `ρ_δ(t) = (1+a) 2^{1+a} / (π δ^{2+2a}) (1−t)^{a−1}`,
//! * `γ′_δ(t) = C (1−t)^{b−1} (1+t)^{−1/2}` with `C = √((1+a)/π) 2^b / δ^{1+a}`,
//! * `γ_δ(t) = K − (√2/a) C (1−t)^b ₂F₁(½, b; b+1; (1−t)/2)`,
//! * `μ_δ(t) = ∫₀^t γ_δ(s) ds`,
//!
//! all restricted to `t ≥ t₀`. `K` is fixed by `2π ∫ γ_δ = 1`.
//!
//! γ_δ jumps from zero to `γ_δ(t₀) > 0` at the edge of its support, so its
//! distributional derivative carries an atom of mass `γ_δ(t₀)` at `t₀`. The
//! Θ multipliers and the weighted operators use that derivative.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::fmt;

use libm::{expm1, fabs, log, pow, sqrt};

use crate::geometry::{UnitVector3, Vec3};
use crate::quadrature::{quadrature_rule, QuadratureKind, QuadratureRule1D};
use crate::special::{legendre_d_into, legendre_p_into};
use crate::{Error, Result};

pub use crate::special::hyp2f1;

/// Below this `|a|` the `1/a` closed form loses too many digits.
pub const SMALL_A: f64 = 1e-3;

const BLEND_STEPS: [f64; 3] = [0.02, 0.01, 0.005];
const BLEND_WEIGHTS: [f64; 3] = [1.0 / 45.0, -20.0 / 45.0, 64.0 / 45.0];
const POINTWISE_NODES: usize = 40;
const MAX_NODES: usize = 4096;

/// Kernel exponent `a` and horizon `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub a: f64,
    pub delta: f64,
}

impl KernelParams {
    /// Validates `−1 < a < 1` and `0 < δ ≤ 2`.
    pub fn new(a: f64, delta: f64) -> Result<Self> {
        if !(a.is_finite() && a > -1.0 && a < 1.0) {
            return Err(Error::InvalidInput("a must lie in (-1, 1)"));
        }
        if !(delta.is_finite() && delta > 0.0 && delta <= 2.0) {
            return Err(Error::InvalidInput("delta must lie in (0, 2]"));
        }
        Ok(Self { a, delta })
    }

    /// Left end of the support in `t`.
    pub fn t0(&self) -> f64 {
        (1.0 - self.delta * self.delta / 2.0).max(-1.0)
    }

    /// `a = 0`, where γ_δ is defined as a limit.
    pub fn is_limiting(&self) -> bool {
        self.a == 0.0
    }

    /// `√(2(1−t)) ≤ δ`.
    pub fn in_support(&self, t: f64) -> bool {
        t >= self.t0()
    }
}

/// Scalar kernel selector for [`kernel_eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Rho,
    GammaPrime,
    Gamma,
    Mu,
}

fn f21(p: f64, q: f64, r: f64, z: f64) -> f64 {
    hyp2f1(p, q, r, z).unwrap_or(f64::NAN)
}

/// Nodes and weights for `∫_{lo}^{hi} (1−t)^α (1+t)^β f(t) dt`.
///
/// The part below zero is integrated in `u = √(1+t)`, which makes half-integer
/// powers of `1 + t` smooth. The part above zero uses Gauss–Jacobi when it
/// reaches `t = 1` and Gauss–Legendre otherwise.
fn component_rule(
    gl: &QuadratureRule1D,
    gj: &QuadratureRule1D,
    lo: f64,
    hi: f64,
    alpha: f64,
    beta: f64,
    nodes: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    if hi <= lo {
        return;
    }
    if lo < 0.0 {
        let top = hi.min(0.0);
        let (ua, ub) = (sqrt((1.0 + lo).max(0.0)), sqrt(1.0 + top));
        let (mid, half) = ((ua + ub) / 2.0, (ub - ua) / 2.0);
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let u = mid + half * x;
            let t = u * u - 1.0;
            nodes.push(t);
            weights.push(w * half * 2.0 * pow(u, 1.0 + 2.0 * beta) * pow(1.0 - t, alpha));
        }
    }
    if hi > 0.0 {
        let start = lo.max(0.0);
        if hi >= 1.0 {
            let len = 1.0 - start;
            let scale = pow(len / 2.0, alpha + 1.0);
            for (&x, &w) in gj.nodes.iter().zip(&gj.weights) {
                let t = start + len * (x + 1.0) / 2.0;
                nodes.push(t);
                weights.push(w * scale * pow(1.0 + t, beta));
            }
        } else {
            let (mid, half) = ((start + hi) / 2.0, (hi - start) / 2.0);
            for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                let t = mid + half * x;
                nodes.push(t);
                weights.push(w * half * pow(1.0 - t, alpha) * pow(1.0 + t, beta));
            }
        }
    }
}

fn rules(n: usize, alpha: f64) -> Result<(QuadratureRule1D, QuadratureRule1D)> {
    Ok((
        quadrature_rule(QuadratureKind::GaussLegendre, n)?,
        quadrature_rule(QuadratureKind::GaussJacobi { alpha, beta: 0.0 }, n)?,
    ))
}

/// Radial profile `g(t)` shared between threads.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One absolutely continuous piece `(1−t)^α (1+t)^β g(t) dt` on `[lo, hi]`.
///
/// `α` may be singular only when `hi = 1`, `β ∈ {0, −½}` only when `lo = −1`.
#[derive(Clone)]
pub struct Component {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub g: Profile,
}

impl fmt::Debug for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Component")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

/// A measure on `[−1, 1]` made of weighted pieces and point masses.
#[derive(Clone, Debug, Default)]
pub struct RadialMeasure {
    pub components: Vec<Component>,
    /// `(t, mass)` pairs.
    pub atoms: Vec<(f64, f64)>,
}

/// Discretization of a [`RadialMeasure`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialMeasure {
    /// Weights with `Σ W_i h(t_i) ≈ ∫ h(t) (1−t)^k dμ(t)`, `n` nodes per piece.
    pub fn discretize(&self, n: usize, k: f64) -> Result<RadialRule> {
        let mut out = RadialRule::default();
        let gl = quadrature_rule(QuadratureKind::GaussLegendre, n)?;
        let mut cache: Vec<(f64, QuadratureRule1D)> = Vec::new();
        for c in &self.components {
            let alpha = c.alpha + k;
            if alpha <= -1.0 && c.hi >= 1.0 {
                return Err(Error::InvalidInput("measure is not integrable at t = 1"));
            }
            let gj = if c.hi >= 1.0 {
                match cache.iter().find(|(a, _)| *a == alpha) {
                    Some((_, r)) => r.clone(),
                    None => {
                        let r = quadrature_rule(QuadratureKind::GaussJacobi { alpha, beta: 0.0 }, n)?;
                        cache.push((alpha, r.clone()));
                        r
                    }
                }
            } else {
                gl.clone()
            };
            let start = out.nodes.len();
            component_rule(&gl, &gj, c.lo, c.hi, alpha, c.beta, &mut out.nodes, &mut out.weights);
            for i in start..out.nodes.len() {
                out.weights[i] *= (c.g)(out.nodes[i]);
            }
        }
        for &(t, m) in &self.atoms {
            out.nodes.push(t);
            out.weights.push(m * pow(1.0 - t, k));
        }
        Ok(out)
    }

    /// `c μ`.
    pub fn scale(mut self, c: f64) -> Self {
        for comp in &mut self.components {
            let g = comp.g.clone();
            comp.g = Arc::new(move |t| c * g(t));
        }
        for atom in &mut self.atoms {
            atom.1 *= c;
        }
        self
    }

    /// `μ + ν`.
    pub fn add(mut self, other: Self) -> Self {
        self.components.extend(other.components);
        self.atoms.extend(other.atoms);
        self
    }

    /// `t dμ`.
    pub fn times_t(mut self) -> Self {
        for comp in &mut self.components {
            let g = comp.g.clone();
            comp.g = Arc::new(move |t| t * g(t));
        }
        for atom in &mut self.atoms {
            atom.1 *= atom.0;
        }
        self
    }

    /// `(1−t) dμ`.
    pub fn times_one_minus_t(mut self) -> Self {
        for comp in &mut self.components {
            comp.alpha += 1.0;
        }
        for atom in &mut self.atoms {
            atom.1 *= 1.0 - atom.0;
        }
        self
    }

    /// `2π ∫ b_ℓ(t) (1−t)^k dμ(t)` for `ℓ ≤ lmax`, where `fill(t, out)` writes
    /// the basis values `b_ℓ(t)`. The node count doubles until two successive
    /// results agree.
    pub fn project(&self, k: f64, lmax: usize, fill: impl Fn(f64, &mut [f64])) -> Result<Vec<f64>> {
        let mut buf = vec![0.0; lmax + 1];
        let mut eval = |n: usize| -> Result<(Vec<f64>, f64)> {
            let rule = self.discretize(n, k)?;
            let mut acc = vec![0.0; lmax + 1];
            let mut scale = 0.0;
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                fill(t, &mut buf);
                let mut bmax: f64 = 0.0;
                for (a, &b) in acc.iter_mut().zip(&buf) {
                    *a += 2.0 * PI * w * b;
                    bmax = bmax.max(fabs(b));
                }
                scale += 2.0 * PI * fabs(w) * bmax;
            }
            Ok((acc, scale))
        };
        let mut n = 16.max(lmax / 2 + 8);
        let (mut prev, _) = eval(n)?;
        loop {
            n *= 2;
            let (cur, scale) = eval(n)?;
            if cur.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonConvergence { estimate: f64::INFINITY });
            }
            let mut ok = true;
            let mut worst: f64 = 0.0;
            for (p, c) in prev.iter().zip(&cur) {
                let d = fabs(p - c);
                worst = worst.max(d);
                if d > 1e-13 * scale + 1e-12 * fabs(*c) {
                    ok = false;
                }
            }
            if ok {
                return Ok(cur);
            }
            if n >= MAX_NODES {
                return Err(Error::NonConvergence { estimate: worst });
            }
            prev = cur;
        }
    }
}

/// Constants of γ_δ at one `(a, δ)`.
#[derive(Clone)]
struct Consts {
    a: f64,
    b: f64,
    t0: f64,
    /// Prefactor of γ′.
    c: f64,
    /// Additive constant of the closed form, NaN when `a = 0`.
    k: f64,
    gamma_t0: f64,
    /// `∫_{max(0,t₀)}^1 γ`.
    c0: f64,
    /// Rules for the cancellation-free path, present when `|a| < SMALL_A`.
    stable: Option<Arc<(QuadratureRule1D, QuadratureRule1D)>>,
    rfull_t0: f64,
}

impl Consts {
    fn new(a: f64, delta: f64) -> Result<Self> {
        let b = a / 2.0;
        let t0 = (1.0 - delta * delta / 2.0).max(-1.0);
        let c = sqrt((1.0 + a) / PI) * pow(2.0, b) / pow(delta, 1.0 + a);
        let w0 = 1.0 - t0;
        let mut me = Self { a, b, t0, c, k: f64::NAN, gamma_t0: 0.0, c0: 0.0, stable: None, rfull_t0: 0.0 };
        me.gamma_t0 = (0.5 / PI - c * me.j(t0)?) / w0;
        if a != 0.0 {
            let f = hyp2f1(0.5, b, b + 2.0, w0 / 2.0)?;
            me.k = (0.5 / PI + SQRT_2 / a * c * pow(w0, b + 1.0) * f / (b + 1.0)) / w0;
        }
        if fabs(a) < SMALL_A {
            me.stable = Some(Arc::new(rules(POINTWISE_NODES, b)?));
            me.rfull_t0 = me.rfull(t0);
        }
        me.c0 = me.gint(t0.max(0.0))?;
        Ok(me)
    }

    /// `∫_t^1 (1−s)^b (1+s)^{−1/2} ds`.
    fn j(&self, t: f64) -> Result<f64> {
        let w = 1.0 - t;
        if w <= 0.0 {
            return Ok(0.0);
        }
        let b = self.b;
        Ok(pow(w, b + 1.0) / (b + 1.0) / SQRT_2 * hyp2f1(0.5, b + 1.0, b + 2.0, w / 2.0)?)
    }

    /// `∫_t^1 (1−s)^b (1+s)^{−1/2} / (2(1 + √((1+s)/2))) ds`.
    fn rfull(&self, t: f64) -> f64 {
        let (gl, gj) = &**self.stable.as_ref().expect("stable rules");
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        component_rule(gl, gj, t, 1.0, self.b, -0.5, &mut nodes, &mut weights);
        nodes
            .iter()
            .zip(&weights)
            .map(|(&s, &w)| w * 0.5 / (1.0 + sqrt((1.0 + s) / 2.0)))
            .sum()
    }

    /// γ on `[t₀, 1]`.
    fn gamma(&self, t: f64) -> f64 {
        let w = 1.0 - t;
        if self.stable.is_none() {
            if w <= 0.0 {
                return if self.b > 0.0 { self.k } else { f64::INFINITY };
            }
            return self.k - SQRT_2 / self.a * self.c * pow(w, self.b) * f21(0.5, self.b, self.b + 1.0, w / 2.0);
        }
        // γ(t₀) + ∫_{t₀}^t γ′, split as 2^{−1/2}(1−s)^{b−1} plus a bounded remainder
        let w0 = 1.0 - self.t0;
        let e = if w <= 0.0 {
            if self.b > 0.0 {
                pow(w0, self.b) / self.b
            } else {
                return f64::INFINITY;
            }
        } else if self.b == 0.0 {
            log(w0 / w)
        } else {
            pow(w, self.b) * expm1(self.b * log(w0 / w)) / self.b
        };
        let r = if w <= 0.0 { 0.0 } else { self.rfull(t) };
        self.gamma_t0 + self.c * (e / SQRT_2 + self.rfull_t0 - r)
    }

    /// `∫_t^1 γ` for `t ≥ t₀`.
    fn gint(&self, t: f64) -> Result<f64> {
        if t >= 1.0 {
            return Ok(0.0);
        }
        if t <= self.t0 {
            return Ok(0.5 / PI);
        }
        Ok((1.0 - t) * self.gamma(t) + self.c * self.j(t)?)
    }

    fn mu(&self, t: f64) -> Result<f64> {
        Ok(self.c0 - self.gint(t.max(self.t0))?)
    }

    /// γ as a measure from the closed form.
    fn gamma_measure(&self) -> RadialMeasure {
        let (a, b, c, k) = (self.a, self.b, self.c, self.k);
        RadialMeasure {
            components: vec![
                Component { lo: self.t0, hi: 1.0, alpha: 0.0, beta: 0.0, g: Arc::new(move |_| k) },
                Component {
                    lo: self.t0,
                    hi: 1.0,
                    alpha: b,
                    beta: 0.0,
                    g: Arc::new(move |t| -SQRT_2 / a * c * f21(0.5, b, b + 1.0, (1.0 - t) / 2.0)),
                },
            ],
            atoms: Vec::new(),
        }
    }

    fn mu_measure(&self) -> RadialMeasure {
        let (a, b, c, k, c0) = (self.a, self.b, self.c, self.k, self.c0);
        let mut m = RadialMeasure {
            components: vec![
                Component { lo: self.t0, hi: 1.0, alpha: 0.0, beta: 0.0, g: Arc::new(move |t| c0 - k * (1.0 - t)) },
                Component {
                    lo: self.t0,
                    hi: 1.0,
                    alpha: b + 1.0,
                    beta: 0.0,
                    g: Arc::new(move |t| SQRT_2 / a * c * f21(0.5, b, b + 2.0, (1.0 - t) / 2.0) / (b + 1.0)),
                },
            ],
            atoms: Vec::new(),
        };
        let below = c0 - 0.5 / PI;
        if self.t0 > -1.0 && below != 0.0 {
            m.components.push(Component { lo: -1.0, hi: self.t0, alpha: 0.0, beta: 0.0, g: Arc::new(move |_| below) });
        }
        m
    }
}

/// Evaluator for one `(a, δ)`.
#[derive(Clone)]
pub struct Kernel {
    params: KernelParams,
    c: Consts,
    /// Richardson blend in `a`, used for γ and μ measures when `|a| < SMALL_A`.
    blend: Vec<(f64, Consts)>,
    rho0: f64,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel").field("params", &self.params).finish_non_exhaustive()
    }
}

impl Kernel {
    pub fn new(params: KernelParams) -> Result<Self> {
        let p = KernelParams::new(params.a, params.delta)?;
        let c = Consts::new(p.a, p.delta)?;
        let mut blend = Vec::new();
        if fabs(p.a) < SMALL_A {
            for (&h, &w) in BLEND_STEPS.iter().zip(&BLEND_WEIGHTS) {
                blend.push((w / 2.0, Consts::new(p.a + h, p.delta)?));
                blend.push((w / 2.0, Consts::new(p.a - h, p.delta)?));
            }
        }
        let rho0 = (1.0 + p.a) * pow(2.0, 1.0 + p.a) / (PI * pow(p.delta, 2.0 + 2.0 * p.a));
        Ok(Self { params: p, c, blend, rho0 })
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn t0(&self) -> f64 {
        self.c.t0
    }

    /// `C` in `γ′_δ(t) = C (1−t)^{a/2−1} (1+t)^{−1/2}`.
    pub fn gamma_prime_constant(&self) -> f64 {
        self.c.c
    }

    /// Height of the jump of γ_δ at `t₀`.
    pub fn gamma_at_edge(&self) -> f64 {
        self.c.gamma_t0
    }

    pub fn rho(&self, t: f64) -> f64 {
        if t < self.c.t0 {
            0.0
        } else if t >= 1.0 {
            f64::INFINITY
        } else {
            self.rho0 * pow(1.0 - t, self.params.a - 1.0)
        }
    }

    pub fn gamma_prime(&self, t: f64) -> f64 {
        if t < self.c.t0 {
            0.0
        } else if t >= 1.0 || t <= -1.0 {
            f64::INFINITY
        } else {
            self.c.c * pow(1.0 - t, self.c.b - 1.0) / sqrt(1.0 + t)
        }
    }

    /// `γ′_δ` at `t = 1 − w`, for callers holding `w = |x−y|²/2` with full
    /// relative accuracy near `t = 1`.
    pub fn gamma_prime_gap(&self, w: f64) -> f64 {
        let t = 1.0 - w;
        if t < self.c.t0 {
            0.0
        } else if w <= 0.0 || w >= 2.0 {
            f64::INFINITY
        } else {
            self.c.c * pow(w, self.c.b - 1.0) / sqrt(2.0 - w)
        }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        if t < self.c.t0 {
            0.0
        } else {
            self.c.gamma(t)
        }
    }

    /// `∫₀^t γ_δ`.
    pub fn mu(&self, t: f64) -> f64 {
        self.c.mu(t).unwrap_or(f64::NAN)
    }

    /// `∫_t^1 γ_δ`.
    pub fn gamma_tail(&self, t: f64) -> f64 {
        self.c.gint(t.max(self.c.t0)).unwrap_or(f64::NAN)
    }

    pub fn eval(&self, which: KernelKind, t: f64) -> f64 {
        match which {
            KernelKind::Rho => self.rho(t),
            KernelKind::GammaPrime => self.gamma_prime(t),
            KernelKind::Gamma => self.gamma(t),
            KernelKind::Mu => self.mu(t),
        }
    }

    /// `ρ_δ(t) dt`.
    pub fn rho_measure(&self) -> RadialMeasure {
        let r = self.rho0;
        RadialMeasure {
            components: vec![Component { lo: self.c.t0, hi: 1.0, alpha: self.params.a - 1.0, beta: 0.0, g: Arc::new(move |_| r) }],
            atoms: Vec::new(),
        }
    }

    /// `γ′_δ(t) dt`, plus the atom `γ_δ(t₀) δ_{t₀}` when `distributional`.
    pub fn gamma_prime_measure(&self, distributional: bool) -> RadialMeasure {
        let c = self.c.c;
        let mut m = RadialMeasure {
            components: vec![Component { lo: self.c.t0, hi: 1.0, alpha: self.c.b - 1.0, beta: -0.5, g: Arc::new(move |_| c) }],
            atoms: Vec::new(),
        };
        if distributional && self.c.t0 > -1.0 {
            m.atoms.push((self.c.t0, self.c.gamma_t0));
        }
        m
    }

    fn blended(&self, f: impl Fn(&Consts) -> RadialMeasure) -> RadialMeasure {
        if self.blend.is_empty() {
            return f(&self.c);
        }
        self.blend.iter().fold(RadialMeasure::default(), |acc, (w, c)| acc.add(f(c).scale(*w)))
    }

    /// `γ_δ(t) dt`.
    pub fn gamma_measure(&self) -> RadialMeasure {
        self.blended(Consts::gamma_measure)
    }

    /// `μ_δ(t) dt`.
    pub fn mu_measure(&self) -> RadialMeasure {
        self.blended(Consts::mu_measure)
    }

    /// Lebesgue measure on the support.
    pub fn support_measure(&self) -> RadialMeasure {
        RadialMeasure {
            components: vec![Component { lo: self.c.t0, hi: 1.0, alpha: 0.0, beta: 0.0, g: Arc::new(|_| 1.0) }],
            atoms: Vec::new(),
        }
    }
}

/// Evaluates one scalar kernel at `t = x·y`.
///
/// Values are zero outside the support. Singular endpoints return `+∞`.
///
/// ```
/// use nlsphere::kernels::{kernel_eval, KernelKind, KernelParams};
/// let p = KernelParams::new(0.5, 0.25).unwrap();
/// assert_eq!(kernel_eval(KernelKind::Gamma, 0.5, &p).unwrap(), 0.0);
/// assert!(kernel_eval(KernelKind::Rho, 1.0, &p).unwrap().is_infinite());
/// ```
pub fn kernel_eval(which: KernelKind, t: f64, params: &KernelParams) -> Result<f64> {
    if !t.is_finite() || !(-1.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput("t outside [-1, 1]"));
    }
    Ok(Kernel::new(*params)?.eval(which, t))
}

/// `λ_ℓ{f} = 2π ∫_{−1}^{1} P_ℓ(t) f(t) dt`, where `f` behaves like
/// `(1−t)^exponent` at `t = 1`.
///
/// ```
/// use nlsphere::kernels::legendre_coefficient;
/// let v = legendre_coefficient(&|t: f64| t, 0.0, 1).unwrap();
/// assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
/// ```
pub fn legendre_coefficient(f: &dyn Fn(f64) -> f64, exponent: f64, l: usize) -> Result<f64> {
    if !(exponent > -1.0) {
        return Err(Error::InvalidInput("endpoint exponent must exceed -1"));
    }
    let mut p = vec![0.0; l + 1];
    let mut eval = |n: usize| -> Result<(f64, f64)> {
        let r = quadrature_rule(QuadratureKind::GaussJacobi { alpha: exponent, beta: 0.0 }, n)?;
        let (mut v, mut s) = (0.0, 0.0);
        for (&t, &w) in r.nodes.iter().zip(&r.weights) {
            legendre_p_into(t, &mut p);
            let y = w * f(t) / pow(1.0 - t, exponent);
            v += y * p[l];
            s += fabs(y);
        }
        Ok((2.0 * PI * v, 2.0 * PI * s))
    };
    let mut n = 16.max(l + 2);
    let (mut prev, _) = eval(n)?;
    loop {
        n *= 2;
        let (cur, scale) = eval(n)?;
        if !cur.is_finite() {
            return Err(Error::NonConvergence { estimate: f64::INFINITY });
        }
        let d = fabs(cur - prev);
        if d <= 1e-10 * fabs(cur) + 1e-14 * scale {
            return Ok(cur);
        }
        if n >= MAX_NODES {
            return Err(Error::NonConvergence { estimate: d });
        }
        prev = cur;
    }
}

/// Per-degree multipliers of the nonlocal operators.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTables {
    pub params: KernelParams,
    pub l_max: usize,
    /// `Λ_ℓ = λ_ℓ{γ_δ}`.
    pub lambda: Vec<f64>,
    /// `Θ_ℓ = λ_ℓ{(1−t)γ′_δ}`, γ′ taken distributionally.
    pub theta: Vec<f64>,
    /// `λ_ℓ{μ_δ}`.
    pub mu: Vec<f64>,
    /// `λ_ℓ{μ_δ + tγ_δ}`.
    pub mu_t: Vec<f64>,
    /// `λ_ℓ{tγ_δ}`.
    pub tg: Vec<f64>,
    /// `λ_ℓ{ρ_δ} − λ_0{ρ_δ}`.
    pub laplacian: Vec<f64>,
}

fn fill_p(t: f64, out: &mut [f64]) {
    legendre_p_into(t, out);
}

fn fill_d(t: f64, out: &mut [f64]) {
    legendre_d_into(t, out);
}

/// Eigenvalue and averaging tables up to degree `l_max`.
pub fn eigen_tables(params: &KernelParams, l_max: usize) -> Result<EigenTables> {
    let k = Kernel::new(*params)?;
    let gm = k.gamma_measure();
    let lambda = gm.project(0.0, l_max, fill_p)?;
    let tg = gm.clone().times_t().project(0.0, l_max, fill_p)?;
    let theta = k.gamma_prime_measure(true).project(1.0, l_max, fill_p)?;
    let mu = k.mu_measure().project(0.0, l_max, fill_p)?;
    let mu_t = mu.iter().zip(&tg).map(|(a, b)| a + b).collect();
    let laplacian = laplacian_from(&k, l_max)?;
    Ok(EigenTables { params: k.params, l_max, lambda, theta, mu, mu_t, tg, laplacian })
}

fn laplacian_from(k: &Kernel, l_max: usize) -> Result<Vec<f64>> {
    // P_ℓ − 1 = −(1−t) D_ℓ, which tames the (1−t)^{a−1} endpoint
    Ok(k.rho_measure().project(1.0, l_max, fill_d)?.into_iter().map(|v| -v).collect())
}

/// `λ_ℓ{ρ_δ} − λ_0{ρ_δ}` for `ℓ ≤ l_max`.
pub fn laplacian_multipliers(params: &KernelParams, l_max: usize) -> Result<Vec<f64>> {
    laplacian_from(&Kernel::new(*params)?, l_max)
}

/// `(α(x, y), β(x, y))` with `β = γ′_δ(x·y)(y − x)` and
/// `α = γ′_δ(x·y)(y − (x·y)x)`.
///
/// ```
/// use nlsphere::geometry::UnitVector3;
/// use nlsphere::kernels::{vector_kernels, KernelParams};
/// let p = KernelParams::new(0.5, 0.25).unwrap();
/// let x = UnitVector3::new(0.0, 0.0, 1.0).unwrap();
/// let y = UnitVector3::new(0.1, 0.0, 1.0).unwrap();
/// let (alpha, _) = vector_kernels(x, y, &p).unwrap();
/// assert!(alpha.dot(x.into()).abs() < 1e-12);
/// ```
pub fn vector_kernels(x: UnitVector3, y: UnitVector3, params: &KernelParams) -> Result<(Vec3, Vec3)> {
    let k = Kernel::new(*params)?;
    vector_kernels_with(&k, x, y)
}

/// [`vector_kernels`] with a prebuilt [`Kernel`].
pub fn vector_kernels_with(k: &Kernel, x: UnitVector3, y: UnitVector3) -> Result<(Vec3, Vec3)> {
    let (xv, yv) = (Vec3::from(x), Vec3::from(y));
    let t = xv.dot(yv).clamp(-1.0, 1.0);
    let d = (xv - yv).norm();
    if d == 0.0 {
        return Err(Error::InvalidInput("coincident points"));
    }
    let g = k.gamma_prime_gap(d * d / 2.0);
    if g.is_infinite() {
        return Err(Error::InvalidInput("antipodal points at delta = 2"));
    }
    Ok(((yv - xv * t) * g, (yv - xv) * g))
}

/// Outcome of [`positivity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    /// No nonpositive value on the grid and a positive edge value.
    pub positive: bool,
    /// `γ_δ(t₀)`.
    pub margin: f64,
    /// `δ ≤ 1/4`, where positivity is a theorem.
    pub guaranteed: bool,
    /// Smallest grid value.
    pub min_value: f64,
    pub negative_count: usize,
    /// `1/(πδ²) − √(4/(πδ²(1−δ²/4)))`, a lower bound on the edge value; absent at `δ = 2`.
    pub lower_bound: Option<f64>,
}

/// Samples γ_δ on 1000 points of its support.
pub fn positivity_check(params: &KernelParams) -> Result<PositivityReport> {
    let k = Kernel::new(*params)?;
    let t0 = k.t0();
    let mut min_value = f64::INFINITY;
    let mut negative_count = 0;
    for i in 0..1000 {
        let t = t0 + (1.0 - t0) * i as f64 / 999.0;
        let g = k.gamma(t);
        min_value = min_value.min(g);
        if !(g > 0.0) {
            negative_count += 1;
        }
    }
    let margin = k.gamma_at_edge();
    let d2 = params.delta * params.delta;
    let lower_bound = (params.delta < 2.0).then(|| 1.0 / (PI * d2) - sqrt(4.0 / (PI * d2 * (1.0 - d2 / 4.0))));
    Ok(PositivityReport {
        positive: negative_count == 0 && margin > 0.0,
        margin,
        guaranteed: params.delta <= 0.25,
        min_value,
        negative_count,
        lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kern(a: f64, d: f64) -> Kernel {
        Kernel::new(KernelParams::new(a, d).unwrap()).unwrap()
    }

    /// `∫_{lo}^{hi} f` for `f` with an integrable power singularity at `hi`:
    /// substitute `s = hi − (hi − lo)v⁶` and use panels halving towards `v = 0`.
    fn graded(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let r = quadrature_rule(QuadratureKind::GaussLegendre, 30).unwrap();
        let len = hi - lo;
        let g = |v: f64| {
            let s = hi - len * v.powi(6);
            if s >= hi { 0.0 } else { f(s) * 6.0 * len * v.powi(5) }
        };
        let mut acc = 0.0;
        let mut right = 1.0;
        for _ in 0..40 {
            let left = right * 0.5;
            acc += r.integrate(|x| g((left + right) / 2.0 + (right - left) / 2.0 * x)) * (right - left) / 2.0;
            right = left;
        }
        acc
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::new(1.0, 0.1).is_err());
        assert!(KernelParams::new(-1.0, 0.1).is_err());
        assert!(KernelParams::new(0.0, 0.0).is_err());
        assert!(KernelParams::new(0.0, 2.5).is_err());
        assert!(KernelParams::new(0.0, 2.0).unwrap().is_limiting());
        assert_eq!(KernelParams::new(0.3, 2.0).unwrap().t0(), -1.0);
    }

    #[test]
    fn zero_outside_support() {
        for &a in &[-0.5, 0.0, 0.5] {
            let p = KernelParams::new(a, 0.25).unwrap();
            for which in [KernelKind::Rho, KernelKind::GammaPrime, KernelKind::Gamma] {
                assert_eq!(kernel_eval(which, 0.9, &p).unwrap(), 0.0);
            }
            // μ vanishes below t₀ when t₀ > 0
            assert_eq!(kernel_eval(KernelKind::Mu, 0.9, &p).unwrap(), 0.0);
            assert!(kernel_eval(KernelKind::Gamma, 1.5, &p).is_err());
        }
    }

    #[test]
    fn closed_form_matches_paper_expression() {
        // K from the normalization against the explicit constant
        for &(a, d) in &[(0.5, 0.25), (-0.5, 0.1), (0.9, 1.0), (-0.9, 2.0)] {
            let k = kern(a, d);
            let d2 = d * d;
            let kp = 1.0 / (PI * d2)
                + 1.0 / a * sqrt(2.0 * (1.0 + a) / (PI * d2)) * 2.0 / (2.0 + a)
                    * hyp2f1(0.5, a / 2.0, (4.0 + a) / 2.0, d2 / 4.0).unwrap();
            assert!((k.c.k - kp).abs() < 1e-12 * kp.abs(), "{a} {d}");
        }
    }

    #[test]
    fn edge_value_two_forms() {
        // δ²/2 γ(t₀) = 1/(2π) − δ²/(2(2+a)) √(2(1+a)/(πδ²)) ₂F₁(½, (2+a)/2; (4+a)/2; δ²/4)
        for &a in &[-0.9, -0.5, 0.0, 0.25, 0.9] {
            for &d in &[0.05, 0.25, 1.0, 1.9] {
                let k = kern(a, d);
                let d2 = d * d;
                let rhs = 0.5 / PI
                    - d2 / (2.0 * (2.0 + a)) * sqrt(2.0 * (1.0 + a) / (PI * d2))
                        * hyp2f1(0.5, (2.0 + a) / 2.0, (4.0 + a) / 2.0, d2 / 4.0).unwrap();
                let lhs = d2 / 2.0 * k.gamma_at_edge();
                assert!((lhs - rhs).abs() < 1e-14, "{a} {d}: {lhs} {rhs}");
                if a != 0.0 {
                    let closed = k.c.gamma(k.t0());
                    assert!((closed - k.gamma_at_edge()).abs() < 1e-11 * closed.abs());
                }
            }
        }
    }

    #[test]
    fn normalization_by_jacobi_quadrature() {
        for &a in &[-0.5, 0.5] {
            for &d in &[0.05, 0.25, 2.0] {
                let k = kern(a, d);
                let total = k.gamma_measure().project(0.0, 0, fill_p).unwrap()[0];
                assert!((total - 1.0).abs() < 1e-12, "{a} {d}");
            }
        }
    }

    #[test]
    fn gap_form_matches_pointwise() {
        for &(a, d) in &[(0.5, 0.25), (-0.5, 0.1), (0.0, 2.0)] {
            let k = kern(a, d);
            for i in 1..20 {
                let w = (1.0 - k.t0()) * i as f64 / 20.0;
                let (g, h) = (k.gamma_prime(1.0 - w), k.gamma_prime_gap(w));
                assert!((g - h).abs() < 1e-12 * g, "{a} {d} {w}");
            }
            assert_eq!(k.gamma_prime_gap(1.0 - k.t0() + 1e-9), 0.0);
            assert!(k.gamma_prime_gap(0.0).is_infinite());
        }
    }

    #[test]
    fn gamma_against_integrated_gamma_prime() {
        let k = kern(0.5, 0.25);
        let t0 = k.t0();
        let t = 1.0 - 0.25 * 0.25 / 4.0;
        let r = quadrature_rule(QuadratureKind::GaussLegendre, 60).unwrap();
        let integral = r.integrate(|x| k.gamma_prime(t0 + (t - t0) * (x + 1.0) / 2.0)) * (t - t0) / 2.0;
        let v = k.gamma(t0) + integral;
        assert!((k.gamma(t) - v).abs() < 1e-10 * v);
    }

    #[test]
    fn stable_path_matches_closed_form() {
        for &a in &[-0.5, -0.01, 0.002, 0.3] {
            for &d in &[0.1, 1.2, 2.0] {
                let p = Consts::new(a, d).unwrap();
                let mut s = p.clone();
                s.stable = Some(Arc::new(rules(POINTWISE_NODES, s.b).unwrap()));
                s.rfull_t0 = s.rfull(s.t0);
                for i in 0..20 {
                    let t = p.t0 + (1.0 - p.t0) * (i as f64 + 0.5) / 20.0;
                    let (x, y) = (p.gamma(t), s.gamma(t));
                    let tol = 1e-13 / fabs(a).min(1.0) * (1.0 + fabs(x));
                    assert!((x - y).abs() < tol.max(1e-12 * x.abs()), "{a} {d} {t}: {x} {y}");
                }
            }
        }
    }

    #[test]
    fn limiting_case_elementary_form() {
        // a = 0: γ(t) = γ(t₀) + (C/√2)[L(√(1+t)) − L(√(1+t₀))], L(u) = ln((√2+u)/(√2−u)),
        // γ(t₀) = (1/(2π) − 2C(√2 − √(1+t₀)))/(1−t₀)
        for &d in &[0.05, 0.25, 1.0, 2.0] {
            let k = kern(0.0, d);
            let c = 1.0 / (sqrt(PI) * d);
            let t0 = k.t0();
            let u0 = sqrt(1.0 + t0);
            let g0 = (0.5 / PI - 2.0 * c * (SQRT_2 - u0)) / (1.0 - t0);
            assert!((k.gamma_at_edge() - g0).abs() < 1e-12 * g0.abs().max(1.0));
            let l = |u: f64| log((SQRT_2 + u) / (SQRT_2 - u));
            for i in 0..50 {
                let t = t0 + (1.0 - t0) * (i as f64 + 0.5) / 50.0;
                let exact = g0 + c / SQRT_2 * (l(sqrt(1.0 + t)) - l(u0));
                assert!((k.gamma(t) - exact).abs() < 1e-11 * exact.abs().max(1.0 / (d * d)), "{d} {t}");
            }
            assert!(k.gamma(1.0).is_infinite());
        }
    }

    #[test]
    fn continuous_across_switch() {
        for &d in &[0.1, 1.5] {
            let lo = kern(SMALL_A * (1.0 - 1e-9), d);
            let hi = kern(SMALL_A, d);
            for i in 0..10 {
                let t = lo.t0() + (1.0 - lo.t0()) * (i as f64 + 0.5) / 10.0;
                let (x, y) = (lo.gamma(t), hi.gamma(t));
                assert!((x - y).abs() < 1e-9 * x.abs(), "{d} {t}: {x} {y}");
            }
        }
    }

    #[test]
    fn tail_and_mu_against_quadrature() {
        for &(a, d) in &[(0.5, 0.25), (-0.5, 0.25), (0.0, 0.5), (0.3, 1.8), (-0.7, 2.0)] {
            let k = kern(a, d);
            assert!((k.gamma_tail(k.t0()) - 0.5 / PI).abs() < 1e-14);
            let t0 = k.t0();
            for &frac in &[0.1, 0.5, 0.9] {
                let t = t0 + (1.0 - t0) * frac;
                let num = graded(&|s| k.gamma(s), t, 1.0);
                assert!((k.gamma_tail(t) - num).abs() < 1e-9 * num.abs(), "{a} {d} {t}: {} {num}", k.gamma_tail(t));
            }
            // μ(t) = ∫₀^t γ
            for &t in &[-0.8, -0.2, 0.3, 0.99, 1.0] {
                let lo = 0.0f64.min(t).max(t0);
                let hi = 0.0f64.max(t).max(t0);
                let sign = if t >= 0.0 { 1.0 } else { -1.0 };
                let num = if hi > lo {
                    let r = quadrature_rule(QuadratureKind::GaussLegendre, 60).unwrap();
                    if hi < 1.0 {
                        sign * r.integrate(|x| k.gamma(lo + (hi - lo) * (x + 1.0) / 2.0)) * (hi - lo) / 2.0
                    } else {
                        sign * graded(&|s| k.gamma(s), lo, hi)
                    }
                } else {
                    0.0
                };
                assert!((k.mu(t) - num).abs() < 1e-9 * num.abs().max(1e-3), "{a} {d} {t}: {} {num}", k.mu(t));
            }
        }
    }

    #[test]
    fn legendre_coefficient_examples() {
        let v = legendre_coefficient(&|_| 1.0 / (4.0 * PI), 0.0, 0).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        assert!(legendre_coefficient(&|_| 3.0, 0.0, 1).unwrap().abs() < 1e-13);
        assert!((legendre_coefficient(&|t| t, 0.0, 1).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(legendre_coefficient(&|t| t, -1.0, 1).is_err());
        // 2π∫(1−t)^{−1/2} dt = 2π·2√2
        let v = legendre_coefficient(&|t| 1.0 / sqrt(1.0 - t), -0.5, 0).unwrap();
        assert!((v - 2.0 * PI * 2.0 * SQRT_2).abs() < 1e-11);
    }

    /// `λ_ℓ{γ}` by parts: `2π[Q_ℓ(t₀)γ(t₀) + ∫ Q_ℓ γ′]`, `Q_ℓ(t) = ∫_t^1 P_ℓ`.
    fn lambda_by_parts(k: &Kernel, lmax: usize) -> Vec<f64> {
        let t0 = k.t0();
        let b = k.params().a / 2.0;
        let c = k.gamma_prime_constant();
        let q = |t: f64, out: &mut [f64]| {
            let mut p = vec![0.0; out.len() + 1];
            legendre_p_into(t, &mut p);
            out[0] = 1.0 - t;
            for l in 1..out.len() {
                out[l] = (p[l - 1] - p[l + 1]) / (2.0 * l as f64 + 1.0);
            }
        };
        let mut out = vec![0.0; lmax + 1];
        let mut edge = vec![0.0; lmax + 1];
        q(t0, &mut edge);
        let g0 = if t0 > -1.0 { k.gamma_at_edge() } else { 0.0 };
        let len = 1.0 - t0;
        let whole = t0 == -1.0;
        let beta = if whole { -0.5 } else { 0.0 };
        let r = quadrature_rule(QuadratureKind::GaussJacobi { alpha: b, beta }, 200).unwrap();
        let mut buf = vec![0.0; lmax + 1];
        for (&x, &w) in r.nodes.iter().zip(&r.weights) {
            let t = t0 + len * (x + 1.0) / 2.0;
            q(t, &mut buf);
            // (1−t)^b = (len/2)^b (1−x)^b; at t₀ = −1 also (1+t)^{−1/2} = (len/2)^{−1/2}(1+x)^{−1/2}
            let edge_factor = if whole { pow(len / 2.0, -0.5) } else { 1.0 / sqrt(1.0 + t) };
            let jac = pow(len / 2.0, b + 1.0) * edge_factor / (1.0 - t);
            for l in 0..=lmax {
                out[l] += w * jac * c * buf[l];
            }
        }
        (0..=lmax).map(|l| 2.0 * PI * (edge[l] * g0 + out[l])).collect()
    }

    #[test]
    fn lambda_matches_by_parts_oracle() {
        for &a in &[-0.5, 0.0, 0.5, 1e-4] {
            for &d in &[0.1, 0.25, 1.0, 1.5] {
                let k = kern(a, d);
                let tab = eigen_tables(&k.params(), 12).unwrap();
                let orc = lambda_by_parts(&k, 12);
                for l in 0..=12 {
                    assert!((tab.lambda[l] - orc[l]).abs() < 1e-10, "{a} {d} {l}: {} {}", tab.lambda[l], orc[l]);
                }
            }
        }
    }

    #[test]
    fn table_examples() {
        for &a in &[-0.5, 0.0, 0.5] {
            for &d in &[0.05, 0.25] {
                let t = eigen_tables(&KernelParams::new(a, d).unwrap(), 8).unwrap();
                assert!((t.lambda[0] - 1.0).abs() < 1e-10);
                assert!((t.theta[0] - 1.0).abs() < 1e-10);
                assert_eq!(t.laplacian[0], 0.0);
            }
        }
        let t = eigen_tables(&KernelParams::new(0.5, 0.1).unwrap(), 4).unwrap();
        assert!((t.lambda[4] - 1.0).abs() <= 0.05);
        assert!((t.theta[0] - 1.0).abs() <= 0.1);
        for l in 0..=4 {
            assert!((t.mu_t[l] - t.mu[l] - t.tg[l]).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_by_parts() {
        // Θ_ℓ = Λ_ℓ − 2π ∫ P′_ℓ (1−t) γ dt − [δ = 2] 4π(−1)^ℓ γ(−1)
        for &(a, d) in &[(0.5, 0.25), (-0.5, 1.0), (0.3, 2.0)] {
            let k = kern(a, d);
            let lmax = 8;
            let tab = eigen_tables(&k.params(), lmax).unwrap();
            let dp = k
                .gamma_measure()
                .times_one_minus_t()
                .project(0.0, lmax, |t, out| {
                    let mut p = vec![0.0; out.len()];
                    legendre_p_into(t, &mut p);
                    crate::special::legendre_dp_into(t, &p, out);
                })
                .unwrap();
            for l in 0..=lmax {
                let mut v = tab.lambda[l] - dp[l];
                if d == 2.0 {
                    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                    v -= 4.0 * PI * sign * k.gamma(-1.0);
                }
                assert!((tab.theta[l] - v).abs() < 1e-10, "{a} {d} {l}: {} {v}", tab.theta[l]);
            }
        }
    }

    #[test]
    fn mu_table_against_pointwise() {
        for &(a, d) in &[(0.5, 0.25), (-0.5, 1.5), (0.0, 0.3)] {
            let k = kern(a, d);
            let tab = eigen_tables(&k.params(), 5).unwrap();
            for l in 0..=5 {
                let f = |t: f64| {
                    let mut p = vec![0.0; l + 1];
                    legendre_p_into(t, &mut p);
                    k.mu(t) * p[l]
                };
                let t0 = k.t0();
                let mut v = graded(&f, t0, 1.0);
                if t0 > -1.0 {
                    let r = quadrature_rule(QuadratureKind::GaussLegendre, 40).unwrap();
                    v += r.integrate(|x| f(-1.0 + (t0 + 1.0) * (x + 1.0) / 2.0)) * (t0 + 1.0) / 2.0;
                }
                assert!((tab.mu[l] - 2.0 * PI * v).abs() < 1e-8, "{a} {d} {l}");
            }
        }
    }

    #[test]
    fn bounds_for_small_horizon() {
        for &a in &[-0.5, 0.5] {
            for &d in &[0.1, 0.25] {
                let t = eigen_tables(&KernelParams::new(a, d).unwrap(), 64).unwrap();
                for l in 0..=64 {
                    assert!(t.lambda[l].abs() <= 1.0 + 1e-12);
                    let ll = (l * (l + 1)) as f64;
                    assert!((t.lambda[l] - 1.0).abs() <= ll * d * d / 4.0 + 1e-12);
                    assert!((t.theta[l] - 1.0).abs() <= (ll + 1.0) * d + 1e-12);
                }
            }
        }
    }

    #[test]
    fn blend_is_smooth_in_a() {
        // tables at a = 0 sit on the curve through nearby a
        let d = 0.25;
        let at = |a: f64| eigen_tables(&KernelParams::new(a, d).unwrap(), 6).unwrap();
        let (m, z, p) = (at(-0.004), at(0.0), at(0.004));
        for l in 0..=6 {
            let mid = (m.lambda[l] + p.lambda[l]) / 2.0;
            assert!((z.lambda[l] - mid).abs() < 1e-6, "{l}");
            let mid = (m.mu[l] + p.mu[l]) / 2.0;
            assert!((z.mu[l] - mid).abs() < 1e-6, "{l}");
        }
    }

    #[test]
    fn laplacian_multipliers_sign_and_limit() {
        let l = laplacian_multipliers(&KernelParams::new(0.5, 0.25).unwrap(), 8).unwrap();
        assert_eq!(l[0], 0.0);
        assert!(l[1..].iter().all(|&v| v < 0.0));
        let mut prev = f64::INFINITY;
        for &d in &[0.2, 0.1, 0.05] {
            let m = laplacian_multipliers(&KernelParams::new(0.5, d).unwrap(), 4).unwrap();
            let worst = (1..=4).map(|l| (-m[l] / (l * (l + 1)) as f64 - 1.0).abs()).fold(0.0, f64::max);
            assert!(worst < prev);
            prev = worst;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn positivity_examples() {
        for &a in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
            let r = positivity_check(&KernelParams::new(a, 0.25).unwrap()).unwrap();
            assert!(r.positive && r.guaranteed && r.margin > 0.0);
            assert!(r.margin >= r.lower_bound.unwrap());
        }
        let r = positivity_check(&KernelParams::new(0.3, 0.25).unwrap()).unwrap();
        let expect = 16.0 * (1.0 / PI - sqrt(16.0 / (63.0 * PI)));
        assert!((r.lower_bound.unwrap() - expect).abs() < 1e-12);
        let r = positivity_check(&KernelParams::new(0.5, 0.1).unwrap()).unwrap();
        assert!(r.margin > 0.0 && r.min_value > 0.0);
        let r = positivity_check(&KernelParams::new(0.5, 2.0).unwrap()).unwrap();
        assert!(!r.guaranteed && r.lower_bound.is_none());
    }

    #[test]
    fn monotone_on_support() {
        for &a in &[-0.5, 0.0, 0.5] {
            let k = kern(a, 0.25);
            let t0 = k.t0();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..1000 {
                let g = k.gamma(t0 + (1.0 - t0) * i as f64 / 999.0);
                assert!(g >= prev);
                prev = g;
            }
        }
    }

    #[test]
    fn composition_identity() {
        // 2|α|² = ρ_δ
        let pts = [(0.0, 0.0, 1.0), (0.05, 0.02, 1.0), (0.1, -0.1, 1.0), (0.0, 0.2, 1.0)];
        for &a in &[-0.5, 0.5] {
            let k = kern(a, 0.25);
            let x = UnitVector3::new(pts[0].0, pts[0].1, pts[0].2).unwrap();
            for &(px, py, pz) in &pts[1..] {
                let y = UnitVector3::new(px, py, pz).unwrap();
                let (al, _) = vector_kernels_with(&k, x, y).unwrap();
                let rho = k.rho(x.dot(y));
                assert!((2.0 * al.dot(al) - rho).abs() < 1e-10 * rho);
            }
        }
        let x = UnitVector3::NORTH;
        assert!(vector_kernels(x, x, &KernelParams::new(0.5, 0.25).unwrap()).is_err());
    }

    #[test]
    fn gradient_of_zonal_function() {
        // ∇^x f(x·y) = f′(x·y)(y − (x·y)x)
        let x = UnitVector3::new(0.3, 0.4, 0.8).unwrap();
        let y = UnitVector3::new(0.35, 0.38, 0.78).unwrap();
        let k = kern(0.5, 0.25);
        let f = |p: [f64; 3]| {
            let n = sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            k.gamma((p[0] * y.x + p[1] * y.y + p[2] * y.z) / n)
        };
        let t = x.dot(y);
        let exact = (Vec3::from(y) - Vec3::from(x) * t) * k.gamma_prime(t);
        let h = 1e-5;
        for i in 0..3 {
            let mut p = x.to_array();
            let mut m = x.to_array();
            p[i] += h;
            m[i] -= h;
            let fd = (f(p) - f(m)) / (2.0 * h);
            assert!((fd - exact.0[i]).abs() < 1e-6 * exact.norm().max(1.0), "{i}");
        }
    }

    proptest! {
        #[test]
        fn kernel_symmetries(a in -0.9f64..0.9, th in 0.001f64..0.25, ph in 0.0f64..core::f64::consts::TAU, ax in 0.0f64..3.1, az in 0.0f64..core::f64::consts::TAU) {
            let k = kern(a, 0.25);
            let x = crate::geometry::SphCoord::new(ax, az).unwrap().to_unit();
            let rot = crate::geometry::PoleRotation::to_point(x);
            let local = crate::geometry::SphCoord::new(th, ph).unwrap().to_unit();
            let yv = rot.apply(Vec3::from(local));
            let y = UnitVector3::new(yv.0[0], yv.0[1], yv.0[2]).unwrap();
            if (Vec3::from(x) - Vec3::from(y)).norm() < 1e-9 {
                return Ok(());
            }
            let (axy, bxy) = vector_kernels_with(&k, x, y).unwrap();
            let (ayx, byx) = vector_kernels_with(&k, y, x).unwrap();
            prop_assert!(axy.dot(Vec3::from(x)).abs() <= 1e-12 * axy.norm().max(1.0));
            prop_assert!((bxy + byx).norm() <= 1e-12 * bxy.norm().max(1.0));
            prop_assert!((axy.norm() - ayx.norm()).abs() <= 1e-12 * axy.norm().max(1.0));
        }
    }
}
