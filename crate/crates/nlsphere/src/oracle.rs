//! Brute-force quadrature of the defining integral formulas.
//!
//! Cap integrals are evaluated in a frame whose pole is the evaluation point
//! `x`: `y = t x + √(1−t²)(cos φ e₁ + sin φ e₂)`. The radial rule comes from
//! [`RadialMeasure::discretize`] with an endpoint shift `k`, so an integrand
//! whose azimuthal mean vanishes like `(1−t)^k` is integrated as a smooth
//! function. Every value is refined by doubling both rule sizes until two
//! successive estimates agree; otherwise the call fails with the achieved
//! estimate.
//!
//! Endpoint shifts used here:
//!
//! | integrand | measure | shift |
//! |---|---|---|
//! | weighted div, curls, grad, curl, curl adjoint | `γ′_δ` | 1 |
//! | averaging | `γ_δ` | 0 |
//! | localization L1–L6 | `f′` | 0 |
//! | generalized localization, E12–E14 | `f′` | 1 |
//! | two-point compositions | `γ′_δ` (pointwise) | `a/2 + 1` |
//! | nonlocal diffusion | `ρ_δ` | 1 |

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use libm::{asin, cos, pow, sin, sqrt};
use num_complex::Complex64;
use once_cell::race::OnceBox;

use crate::geometry::{CVec3, PoleRotation, UnitVector3, Vec3};
use crate::harmonics::{
    eval_mode, lm_index, HarmonicMode, ScalarSpectrum, SpectrumRef, VectorSpectrum,
};
use crate::kernels::{laplacian_multipliers, Kernel, KernelParams, RadialMeasure, RadialRule};
use crate::operators::{apply, OperatorKind, Selector};
use crate::quadrature::{surface_integral, SphereGrid};
use crate::special::legendre_p_into;
use crate::{Error, Result};

/// Multiple of `ε · Σ|w| |terms|` below which a refinement change is rounding.
const ROUNDING_ULPS: f64 = 256.0;

/// Radial and azimuthal node counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub n_radial: usize,
    pub n_azimuthal: usize,
}

impl Resolution {
    fn at_level(self, level: usize) -> Self {
        Self { n_radial: self.n_radial << level, n_azimuthal: self.n_azimuthal << level }
    }

    fn max(self, o: Self) -> Self {
        Self { n_radial: self.n_radial.max(o.n_radial), n_azimuthal: self.n_azimuthal.max(o.n_azimuthal) }
    }
}

/// How `γ′_δ` enters the weighted operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaPrimeMode {
    /// Derivative of the truncated kernel: the smooth part plus the point
    /// mass `γ_δ(t₀)` at the support edge.
    Distributional,
    /// The pointwise derivative only.
    Smooth,
}

/// Refinement settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub start: Resolution,
    /// Relative change accepted between two doublings.
    pub tol: f64,
    pub max_doublings: usize,
    pub gamma_prime: GammaPrimeMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            start: Resolution { n_radial: 16, n_azimuthal: 16 },
            tol: 1e-11,
            max_doublings: 4,
            gamma_prime: GammaPrimeMode::Distributional,
        }
    }
}

/// A refined value with its last change and the resolution that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub estimate: f64,
    pub resolution: Resolution,
}

/// Values the cap integrator can accumulate.
pub trait Accumulate: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn size(self) -> f64;
}

impl Accumulate for Complex64 {
    fn size(self) -> f64 {
        self.norm()
    }
}

impl Accumulate for CVec3 {
    fn size(self) -> f64 {
        self.norm()
    }
}

/// Scalar or vector output of an oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Scalar(Complex64),
    Vector(CVec3),
}

impl FieldValue {
    pub fn scalar(self) -> Option<Complex64> {
        match self {
            FieldValue::Scalar(v) => Some(v),
            FieldValue::Vector(_) => None,
        }
    }

    pub fn vector(self) -> Option<CVec3> {
        match self {
            FieldValue::Vector(v) => Some(v),
            FieldValue::Scalar(_) => None,
        }
    }

    /// Euclidean distance; `None` when the kinds differ.
    pub fn distance(self, o: Self) -> Option<f64> {
        match (self, o) {
            (FieldValue::Scalar(a), FieldValue::Scalar(b)) => Some((a - b).norm()),
            (FieldValue::Vector(a), FieldValue::Vector(b)) => Some((a - b).norm()),
            _ => None,
        }
    }

    pub fn norm(self) -> f64 {
        match self {
            FieldValue::Scalar(a) => a.norm(),
            FieldValue::Vector(a) => a.norm(),
        }
    }
}

/// Pointwise one-point field.
#[derive(Clone, Copy)]
pub enum Field<'a> {
    Scalar(&'a (dyn Fn(UnitVector3) -> Complex64 + Sync)),
    Vector(&'a (dyn Fn(UnitVector3) -> CVec3 + Sync)),
}

/// Two-point field `(x, y) ↦ value`.
#[derive(Clone, Copy)]
pub struct TwoPointField<'a> {
    pub eval: &'a (dyn Fn(UnitVector3, UnitVector3) -> FieldValue + Sync),
    /// Order at which the azimuthal mean of the integrand, without the
    /// `γ′_δ` factor, vanishes as `t → 1`.
    pub order: f64,
}

/// One node of a cap rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapNode {
    pub y: UnitVector3,
    pub t: f64,
    pub weight: f64,
}

/// Quadrature on `{y : |x − y| ≤ δ}` in a frame with `x` at the pole.
#[derive(Debug, Clone, Copy)]
pub struct CapQuadrature {
    x: UnitVector3,
    theta_delta: f64,
    e1: Vec3,
    e2: Vec3,
}

impl CapQuadrature {
    pub fn new(x: UnitVector3, params: &KernelParams) -> Self {
        let (e1, e2) = PoleRotation::to_point(x).tangent_basis();
        let theta_delta = 2.0 * asin((params.delta / 2.0).min(1.0));
        Self { x, theta_delta, e1, e2 }
    }

    pub fn x(&self) -> UnitVector3 {
        self.x
    }

    /// Polar angle of the cap, `2 arcsin(δ/2)`.
    pub fn theta_delta(&self) -> f64 {
        self.theta_delta
    }

    /// Nodes for `Σ w F(y) ≈ ∫ F(y) dμ(x·y) dΩ(y)` where `rule` discretizes
    /// `(1−t)^shift dμ`.
    pub fn nodes(&self, rule: &RadialRule, shift: f64, n_azimuthal: usize) -> Result<Vec<CapNode>> {
        if n_azimuthal == 0 {
            return Err(Error::InvalidInput("azimuthal rule needs at least one node"));
        }
        let xv = Vec3::from(self.x);
        let dphi = 2.0 * PI / n_azimuthal as f64;
        let mut out = Vec::with_capacity(rule.nodes.len() * n_azimuthal);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let s = sqrt(((1.0 - t) * (1.0 + t)).max(0.0));
            let weight = w * dphi / pow(1.0 - t, shift);
            for k in 0..n_azimuthal {
                let phi = dphi * (k as f64 + 0.5);
                let y = xv * t + (self.e1 * cos(phi) + self.e2 * sin(phi)) * s;
                out.push(CapNode { y: UnitVector3::from_array(y.0)?, t, weight });
            }
        }
        Ok(out)
    }
}

/// Radial measures the oracle integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialKey {
    GammaPrime(GammaPrimeMode),
    Gamma,
    Rho,
}

struct Slot {
    key: RadialKey,
    shift: f64,
    levels: Vec<OnceBox<RadialRule>>,
}

/// Weighted nonlocal operators evaluated by cap quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightedKind {
    SurfDiv,
    ScalarSurfCurl,
    SurfGrad,
    VectorSurfCurl,
    Curl,
    CurlAdjoint,
    Averaging,
}

/// Unweighted two-point operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoPointOp {
    Div,
    ScalCurl,
    Grad,
    VecCurl,
    Curl,
}

/// Forward operators integrate a two-point field; adjoints are pointwise.
#[derive(Clone, Copy)]
pub enum TwoPointInput<'a> {
    Forward { field: TwoPointField<'a>, x: UnitVector3 },
    Adjoint { field: Field<'a>, x: UnitVector3, y: UnitVector3 },
}

/// Operator pairs checked by [`Oracle::adjointness_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjointPair {
    /// `⟨u, D_S V⟩ = ⟨−G_S u, V⟩`, spectral.
    LocalDivGrad,
    /// `⟨u, C_S V⟩ = ⟨𝐂_S u, V⟩`, spectral.
    LocalCurls,
    /// `⟨W, 𝐂 V⟩ = ⟨𝐂* W, V⟩`, spectral.
    LocalCurl,
    /// Weighted divergence and gradient by double quadrature.
    WeightedDivGrad,
    /// Weighted scalar and vector surface curls by double quadrature.
    WeightedCurls,
    /// Weighted curl and its adjoint by double quadrature.
    WeightedCurl,
}

impl AdjointPair {
    pub const ALL: [AdjointPair; 6] = [
        AdjointPair::LocalDivGrad,
        AdjointPair::LocalCurls,
        AdjointPair::LocalCurl,
        AdjointPair::WeightedDivGrad,
        AdjointPair::WeightedCurls,
        AdjointPair::WeightedCurl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdjointPair::LocalDivGrad => "local-div-grad",
            AdjointPair::LocalCurls => "local-scalar-vector-curl",
            AdjointPair::LocalCurl => "local-curl",
            AdjointPair::WeightedDivGrad => "weighted-div-grad",
            AdjointPair::WeightedCurls => "weighted-scalar-vector-curl",
            AdjointPair::WeightedCurl => "weighted-curl",
        }
    }

    pub fn is_local(self) -> bool {
        matches!(self, AdjointPair::LocalDivGrad | AdjointPair::LocalCurls | AdjointPair::LocalCurl)
    }
}

/// Fields entering an adjointness check; `w` is only read by the curl pairs.
#[derive(Debug, Clone, Copy)]
pub struct AdjointInputs<'a> {
    pub u: &'a ScalarSpectrum,
    pub v: &'a VectorSpectrum,
    pub w: &'a VectorSpectrum,
}

/// Pointwise defects of the composition identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionReport {
    /// `|D_S{D_S*u} − ∫[u(x)−u(y)] ρ_δ dΩ(y)|`.
    pub div_vs_rho: f64,
    /// `|∫[u(x)−u(y)] ρ_δ dΩ(y) + L_S^δ u|` with the spectral multipliers.
    pub rho_vs_spectral: f64,
    /// `|C_S{C_S*u} − D_S{D_S*u}|`.
    pub curl_vs_div: f64,
    pub resolution: Resolution,
}

impl CompositionReport {
    pub fn residual(&self) -> f64 {
        self.div_vs_rho.max(self.rho_vs_spectral).max(self.curl_vs_div)
    }
}

/// Localization identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `∫ f′ y = λ₀{tf′} x`.
    L1,
    /// `∫ f′ Y = λ_ℓ{f′} Y(x)`.
    L2,
    /// `∫ f′ Δ_S Y = λ_ℓ{f′} Δ_S Y(x)`.
    L3,
    /// `∫ f′ ∇_S Y = ℓ(ℓ+1)λ_ℓ{f} Y x + λ_ℓ{f + tf′} ∇_S Y`.
    L4,
    /// `∫ f′ y × ∇_S Y = λ_ℓ{f′} x × ∇_S Y`.
    L5,
    /// `∫ f′ Y y = λ_ℓ{tf′} Y x + λ_ℓ{f} ∇_S Y`.
    L6,
    /// `∫ f′ (y−x) Y = λ_ℓ{(t−1)f′} Y x + λ_ℓ{f} ∇_S Y`.
    G1,
    /// `∫ f′ (y−x) × ∇_S Y = λ_ℓ{(1−t)f′ − f} x × ∇_S Y`.
    G2,
    /// `∫ f′ (y−x) × (y × ∇_S Y) = λ_ℓ{f} Δ_S Y x + λ_ℓ{(1−t)f′ − f} ∇_S Y`.
    G3,
    /// `∫ f′ (y−x) × (Y y) = −λ_ℓ{f} x × ∇_S Y`.
    G4,
    /// `∫ ∇_S^y f × ∇_S Y = λ_ℓ{f} x × ∇_S Y`.
    E12,
    /// `∫ ∇_S^x f × (y × ∇_S Y) = −λ_ℓ{f} ∇_S Y − ℓ(ℓ+1)λ_ℓ{f} Y x`.
    E13,
    /// `∫ ∇_S^y f × (Y y) = λ_ℓ{f} x × ∇_S Y`.
    E14,
}

impl Identity {
    pub const ALL: [Identity; 13] = [
        Identity::L1,
        Identity::L2,
        Identity::L3,
        Identity::L4,
        Identity::L5,
        Identity::L6,
        Identity::G1,
        Identity::G2,
        Identity::G3,
        Identity::G4,
        Identity::E12,
        Identity::E13,
        Identity::E14,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::L1 => "L1",
            Identity::L2 => "L2",
            Identity::L3 => "L3",
            Identity::L4 => "L4",
            Identity::L5 => "L5",
            Identity::L6 => "L6",
            Identity::G1 => "G1",
            Identity::G2 => "G2",
            Identity::G3 => "G3",
            Identity::G4 => "G4",
            Identity::E12 => "E12",
            Identity::E13 => "E13",
            Identity::E14 => "E14",
        }
    }

    /// Endpoint shift of the integrand.
    fn shift(self) -> f64 {
        match self {
            Identity::L1 | Identity::L2 | Identity::L3 | Identity::L4 | Identity::L5 | Identity::L6 => 0.0,
            _ => 1.0,
        }
    }
}

/// Kernel pair `(f, f′)` for the localization suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalizationKernel {
    /// `f = γ_δ`, `f′ = γ′_δ` taken distributionally.
    Gamma,
    /// `f = μ_δ`, `f′ = γ_δ`.
    Mu,
}

/// `λ_ℓ` coefficients of the localization right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationTables {
    pub kernel: LocalizationKernel,
    pub l_max: usize,
    /// `λ_ℓ{f′}`; absent when `f′` is not integrable at `t = 1`.
    pub f_prime: Option<Vec<f64>>,
    /// `λ_ℓ{tf′}`; absent as above.
    pub t_f_prime: Option<Vec<f64>>,
    /// `λ_ℓ{(1−t)f′}`.
    pub one_minus_t_f_prime: Vec<f64>,
    /// `λ_ℓ{f}`.
    pub f: Vec<f64>,
}

/// One residual record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRecord {
    pub identity: &'static str,
    pub params: KernelParams,
    pub l: usize,
    pub m: i64,
    pub residual: f64,
    pub resolution: Resolution,
}

/// Quadrature oracle for one kernel.
pub struct Oracle {
    kernel: Kernel,
    cfg: OracleConfig,
    slots: Vec<Slot>,
}

fn fill_p(t: f64, out: &mut [f64]) {
    legendre_p_into(t, out);
}

fn vec_of(v: UnitVector3) -> Vec3 {
    Vec3::from(v)
}

impl Oracle {
    pub fn new(params: KernelParams, cfg: OracleConfig) -> Result<Self> {
        Ok(Self::with_kernel(Kernel::new(params)?, cfg))
    }

    pub fn with_kernel(kernel: Kernel, cfg: OracleConfig) -> Self {
        let b = kernel.params().a / 2.0;
        let standard = [
            (RadialKey::GammaPrime(GammaPrimeMode::Distributional), 0.0),
            (RadialKey::GammaPrime(GammaPrimeMode::Distributional), 1.0),
            (RadialKey::GammaPrime(GammaPrimeMode::Smooth), 1.0),
            (RadialKey::GammaPrime(GammaPrimeMode::Smooth), b + 1.0),
            (RadialKey::Gamma, 0.0),
            (RadialKey::Gamma, 1.0),
            (RadialKey::Rho, 1.0),
        ];
        let slots = standard
            .iter()
            .map(|&(key, shift)| Slot {
                key,
                shift,
                levels: (0..=cfg.max_doublings).map(|_| OnceBox::new()).collect(),
            })
            .collect();
        Self { kernel, cfg, slots }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn params(&self) -> KernelParams {
        self.kernel.params()
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    fn measure(&self, key: RadialKey) -> RadialMeasure {
        match key {
            RadialKey::GammaPrime(m) => self.kernel.gamma_prime_measure(m == GammaPrimeMode::Distributional),
            RadialKey::Gamma => self.kernel.gamma_measure(),
            RadialKey::Rho => self.kernel.rho_measure(),
        }
    }

    fn with_rule<R>(&self, key: RadialKey, shift: f64, level: usize, f: impl FnOnce(&RadialRule) -> R) -> Result<R> {
        let n = self.cfg.start.at_level(level).n_radial;
        let slot = self.slots.iter().find(|s| s.key == key && s.shift == shift);
        match slot.and_then(|s| s.levels.get(level)) {
            Some(cell) => {
                let rule = cell.get_or_try_init(|| self.measure(key).discretize(n, shift).map(Box::new))?;
                Ok(f(rule))
            }
            None => Ok(f(&self.measure(key).discretize(n, shift)?)),
        }
    }

    /// `∫ F(y) dμ(x·y) dΩ(y)` for the measure `key`, where the azimuthal mean
    /// of `F` vanishes like `(1−t)^shift`.
    pub fn integrate<T: Accumulate>(
        &self,
        x: UnitVector3,
        key: RadialKey,
        shift: f64,
        f: &dyn Fn(&CapNode) -> T,
    ) -> Result<Estimate<T>> {
        self.integrate_terms(x, key, shift, &|n: &CapNode| {
            let v = f(n);
            (v, v.size())
        })
    }

    /// As [`Oracle::integrate`], with `f` also returning the size of the terms
    /// that cancel in `F`; changes below their rounding level count as converged.
    fn integrate_terms<T: Accumulate>(
        &self,
        x: UnitVector3,
        key: RadialKey,
        shift: f64,
        f: &dyn Fn(&CapNode) -> (T, f64),
    ) -> Result<Estimate<T>> {
        let cap = CapQuadrature::new(x, &self.kernel.params());
        let eval = |level: usize| -> Result<(T, f64, f64)> {
            let n_az = self.cfg.start.at_level(level).n_azimuthal;
            let nodes = self.with_rule(key, shift, level, |rule| cap.nodes(rule, shift, n_az))??;
            let mut acc = T::default();
            let (mut scale, mut terms) = (0.0, 0.0);
            for node in &nodes {
                let (v, m) = f(node);
                acc = acc + v * node.weight;
                let w = libm::fabs(node.weight);
                scale += w * v.size();
                terms += w * m;
            }
            Ok((acc, scale, terms))
        };
        let (mut prev, _, _) = eval(0)?;
        let mut last = f64::INFINITY;
        for level in 1..=self.cfg.max_doublings {
            let (cur, scale, terms) = eval(level)?;
            let est = (cur - prev).size();
            if !est.is_finite() {
                return Err(Error::NonConvergence { estimate: f64::INFINITY });
            }
            let floor = ROUNDING_ULPS * f64::EPSILON * terms;
            if est <= self.cfg.tol * cur.size().max(1e-4 * scale) || est <= floor {
                return Ok(Estimate { value: cur, estimate: est, resolution: self.cfg.start.at_level(level) });
            }
            last = est;
            prev = cur;
        }
        Err(Error::NonConvergence { estimate: last })
    }

    /// Evaluates a weighted nonlocal operator at `x` from its defining integral.
    pub fn quadrature_apply_weighted(
        &self,
        kind: WeightedKind,
        field: Field<'_>,
        x: UnitVector3,
    ) -> Result<Estimate<FieldValue>> {
        let gp = RadialKey::GammaPrime(self.cfg.gamma_prime);
        let xv = vec_of(x);
        match (kind, field) {
            (WeightedKind::SurfDiv, Field::Vector(v)) => {
                let vx = v(x);
                let e = self.integrate_terms(x, gp, 1.0, &|n: &CapNode| {
                    let yv = vec_of(n.y);
                    let (gx, gy, vy) = (yv - xv * n.t, xv - yv * n.t, v(n.y));
                    (vx.dot_real(gx) - vy.dot_real(gy), vx.norm() * gx.norm() + vy.norm() * gy.norm())
                })?;
                Ok(scalar_estimate(e))
            }
            (WeightedKind::ScalarSurfCurl, Field::Vector(v)) => {
                let vx = v(x);
                let e = self.integrate_terms(x, gp, 1.0, &|n: &CapNode| {
                    let (g, vy) = (vec_of(n.y).cross(xv), v(n.y));
                    (vy.dot_real(g) + vx.dot_real(g), g.norm() * (vy.norm() + vx.norm()))
                })?;
                Ok(scalar_estimate(e))
            }
            (WeightedKind::SurfGrad, Field::Scalar(u)) => {
                let ux = u(x);
                let e = self.integrate_terms(x, gp, 1.0, &|n: &CapNode| {
                    let (g, uy) = (vec_of(n.y) - xv * n.t, u(n.y));
                    (g.complex().scale(uy - ux), g.norm() * (uy.norm() + ux.norm()))
                })?;
                Ok(vector_estimate(e))
            }
            (WeightedKind::VectorSurfCurl, Field::Scalar(u)) => {
                let ux = u(x);
                let e = self.integrate_terms(x, gp, 1.0, &|n: &CapNode| {
                    let (g, uy) = (xv.cross(vec_of(n.y)), u(n.y));
                    (g.complex().scale(uy - ux), g.norm() * (uy.norm() + ux.norm()))
                })?;
                Ok(vector_estimate(e))
            }
            (WeightedKind::Curl, Field::Vector(v)) => {
                let vx = v(x);
                let e = self.integrate_terms(x, gp, 1.0, &|n: &CapNode| {
                    let (g, vy) = (vec_of(n.y) - xv, v(n.y));
                    ((vy - vx).cross_left(g), g.norm() * (vy.norm() + vx.norm()))
                })?;
                Ok(vector_estimate(e))
            }
            (WeightedKind::CurlAdjoint, Field::Vector(v)) => {
                let vx = v(x);
                let e = self.integrate_terms(x, gp, 1.0, &|n: &CapNode| {
                    let (g, vy) = (vec_of(n.y) - xv, v(n.y));
                    ((vy + vx).cross_left(g), g.norm() * (vy.norm() + vx.norm()))
                })?;
                Ok(vector_estimate(e))
            }
            (WeightedKind::Averaging, Field::Vector(v)) => {
                let e = self.integrate(x, RadialKey::Gamma, 0.0, &|n: &CapNode| v(n.y))?;
                Ok(vector_estimate(e))
            }
            (WeightedKind::SurfGrad | WeightedKind::VectorSurfCurl, Field::Vector(_)) => {
                Err(Error::TypeMismatch("operator takes a scalar field"))
            }
            (_, Field::Scalar(_)) => Err(Error::TypeMismatch("operator takes a vector field")),
        }
    }

    /// `(α(x, y), α(y, x), β(x, y))` with the pointwise `γ′_δ`; zero at `x = y`.
    fn kernels_at(&self, x: Vec3, y: Vec3) -> (Vec3, Vec3, Vec3) {
        let t = x.dot(y).clamp(-1.0, 1.0);
        let d = (x - y).norm();
        if d == 0.0 {
            let z = Vec3([0.0; 3]);
            return (z, z, z);
        }
        let g = self.kernel.gamma_prime_gap(d * d / 2.0);
        if !g.is_finite() {
            let z = Vec3([0.0; 3]);
            return (z, z, z);
        }
        ((y - x * t) * g, (x - y * t) * g, (y - x) * g)
    }

    /// Unweighted two-point operators: forward kinds by quadrature over the
    /// kernel support, adjoint kinds by direct evaluation.
    pub fn two_point_apply(&self, op: TwoPointOp, input: TwoPointInput<'_>) -> Result<FieldValue> {
        match input {
            TwoPointInput::Adjoint { field, x, y } => self.two_point_adjoint(op, field, x, y),
            TwoPointInput::Forward { field, x } => {
                let key = RadialKey::GammaPrime(GammaPrimeMode::Smooth);
                let xv = vec_of(x);
                let w = field.eval;
                let vec = |v: FieldValue| v.vector().ok_or(Error::TypeMismatch("expected a vector two-point field"));
                let sca = |v: FieldValue| v.scalar().ok_or(Error::TypeMismatch("expected a scalar two-point field"));
                // probe the field kind once
                let probe = w(x, x);
                match op {
                    TwoPointOp::Div | TwoPointOp::ScalCurl | TwoPointOp::Curl => {
                        vec(probe)?;
                    }
                    TwoPointOp::Grad | TwoPointOp::VecCurl => {
                        sca(probe)?;
                    }
                }
                let zero_c = Complex64::new(0.0, 0.0);
                let as_v = |v: FieldValue| v.vector().unwrap_or(CVec3::ZERO);
                let as_s = |v: FieldValue| v.scalar().unwrap_or(zero_c);
                Ok(match op {
                    TwoPointOp::Div => scalar_estimate(self.integrate(x, key, field.order, &|n: &CapNode| {
                        let yv = vec_of(n.y);
                        as_v(w(x, n.y)).dot_real(yv - xv * n.t) - as_v(w(n.y, x)).dot_real(xv - yv * n.t)
                    })?),
                    TwoPointOp::ScalCurl => scalar_estimate(self.integrate(x, key, field.order, &|n: &CapNode| {
                        let yv = vec_of(n.y);
                        as_v(w(n.y, x)).dot_real(yv.cross(xv)) - as_v(w(x, n.y)).dot_real(xv.cross(yv))
                    })?),
                    TwoPointOp::Grad => vector_estimate(self.integrate(x, key, field.order, &|n: &CapNode| {
                        let yv = vec_of(n.y);
                        (yv - xv * n.t).complex().scale(as_s(w(n.y, x)) - as_s(w(x, n.y)))
                    })?),
                    TwoPointOp::VecCurl => vector_estimate(self.integrate(x, key, field.order, &|n: &CapNode| {
                        xv.cross(vec_of(n.y)).complex().scale(as_s(w(n.y, x)) - as_s(w(x, n.y)))
                    })?),
                    TwoPointOp::Curl => vector_estimate(self.integrate(x, key, field.order, &|n: &CapNode| {
                        (as_v(w(n.y, x)) - as_v(w(x, n.y))).cross_left(vec_of(n.y) - xv)
                    })?),
                }
                .value)
            }
        }
    }

    fn two_point_adjoint(&self, op: TwoPointOp, field: Field<'_>, x: UnitVector3, y: UnitVector3) -> Result<FieldValue> {
        let (xv, yv) = (vec_of(x), vec_of(y));
        let (axy, ayx, bxy) = self.kernels_at(xv, yv);
        match (op, field) {
            (TwoPointOp::Div, Field::Scalar(u)) => Ok(FieldValue::Vector(axy.complex().scale(u(x) - u(y)))),
            (TwoPointOp::ScalCurl, Field::Scalar(u)) => {
                Ok(FieldValue::Vector(xv.cross(axy).complex().scale(u(y) - u(x))))
            }
            (TwoPointOp::Grad, Field::Vector(v)) => Ok(FieldValue::Scalar(v(y).dot_real(ayx) - v(x).dot_real(axy))),
            (TwoPointOp::VecCurl, Field::Vector(v)) => {
                Ok(FieldValue::Scalar(v(y).dot_real(yv.cross(ayx)) - v(x).dot_real(xv.cross(axy))))
            }
            (TwoPointOp::Curl, Field::Vector(v)) => Ok(FieldValue::Vector((v(x) + v(y)).cross_left(bxy))),
            (TwoPointOp::Div | TwoPointOp::ScalCurl, Field::Vector(_)) => {
                Err(Error::TypeMismatch("adjoint takes a scalar field"))
            }
            (_, Field::Scalar(_)) => Err(Error::TypeMismatch("adjoint takes a vector field")),
        }
    }

    /// Relative defect of an adjoint pair on band-limited fields; the outer
    /// integral uses `grid`, the inner one cap quadrature.
    pub fn adjointness_residual(&self, pair: AdjointPair, inputs: AdjointInputs<'_>, grid: &SphereGrid) -> Result<f64> {
        let (lhs, rhs) = if pair.is_local() {
            local_adjoint_sides(pair, inputs, grid)?
        } else {
            self.weighted_adjoint_sides(pair, inputs, grid)?
        };
        Ok((lhs - rhs).norm() / lhs.norm().max(1e-300))
    }

    fn weighted_adjoint_sides(
        &self,
        pair: AdjointPair,
        inputs: AdjointInputs<'_>,
        grid: &SphereGrid,
    ) -> Result<(Complex64, Complex64)> {
        let u = |p: UnitVector3| inputs.u.eval(p);
        let v = |p: UnitVector3| inputs.v.eval(p);
        let w = |p: UnitVector3| inputs.w.eval(p);
        let points = grid.points();
        let mut left = Vec::with_capacity(points.len());
        let mut right = Vec::with_capacity(points.len());
        for &p in &points {
            match pair {
                AdjointPair::WeightedDivGrad => {
                    let d = self.quadrature_apply_weighted(WeightedKind::SurfDiv, Field::Vector(&v), p)?.value;
                    let g = self.quadrature_apply_weighted(WeightedKind::SurfGrad, Field::Scalar(&u), p)?.value;
                    left.push(u(p).conj() * d.scalar().unwrap_or_default());
                    right.push(-g.vector().unwrap_or_default().conj().dot(v(p)));
                }
                AdjointPair::WeightedCurls => {
                    let c = self.quadrature_apply_weighted(WeightedKind::ScalarSurfCurl, Field::Vector(&v), p)?.value;
                    let g = self.quadrature_apply_weighted(WeightedKind::VectorSurfCurl, Field::Scalar(&u), p)?.value;
                    left.push(u(p).conj() * c.scalar().unwrap_or_default());
                    right.push(g.vector().unwrap_or_default().conj().dot(v(p)));
                }
                AdjointPair::WeightedCurl => {
                    let c = self.quadrature_apply_weighted(WeightedKind::Curl, Field::Vector(&v), p)?.value;
                    let ca = self.quadrature_apply_weighted(WeightedKind::CurlAdjoint, Field::Vector(&w), p)?.value;
                    left.push(w(p).conj().dot(c.vector().unwrap_or_default()));
                    right.push(ca.vector().unwrap_or_default().conj().dot(v(p)));
                }
                _ => unreachable!("local pair"),
            }
        }
        Ok((surface_integral(grid, &left)?, surface_integral(grid, &right)?))
    }

    /// Composition identities at each point; `u` is band-limited.
    pub fn composition_residual(&self, u: &ScalarSpectrum, points: &[UnitVector3]) -> Result<CompositionReport> {
        let params = self.kernel.params();
        let lap = laplacian_multipliers(&params, u.lmax)?;
        let mut minus_lap_u = u.clone();
        for l in 0..=u.lmax {
            for m in -(l as i64)..=(l as i64) {
                minus_lap_u.coeffs[lm_index(l, m)] *= -lap[l];
            }
        }
        let uf = |p: UnitVector3| u.eval(p);
        let order = params.a / 2.0 + 1.0;
        let div_star = |x: UnitVector3, y: UnitVector3| {
            self.two_point_adjoint(TwoPointOp::Div, Field::Scalar(&uf), x, y)
                .unwrap_or(FieldValue::Vector(CVec3::ZERO))
        };
        let curl_star = |x: UnitVector3, y: UnitVector3| {
            self.two_point_adjoint(TwoPointOp::ScalCurl, Field::Scalar(&uf), x, y)
                .unwrap_or(FieldValue::Vector(CVec3::ZERO))
        };
        let mut report = CompositionReport {
            div_vs_rho: 0.0,
            rho_vs_spectral: 0.0,
            curl_vs_div: 0.0,
            resolution: self.cfg.start,
        };
        for &x in points {
            let dd = self
                .two_point_apply(
                    TwoPointOp::Div,
                    TwoPointInput::Forward { field: TwoPointField { eval: &div_star, order }, x },
                )?
                .scalar()
                .unwrap_or_default();
            let cc = self
                .two_point_apply(
                    TwoPointOp::ScalCurl,
                    TwoPointInput::Forward { field: TwoPointField { eval: &curl_star, order }, x },
                )?
                .scalar()
                .unwrap_or_default();
            let ux = u.eval(x);
            let rho = self.integrate(x, RadialKey::Rho, 1.0, &|n: &CapNode| ux - u.eval(n.y))?;
            let spectral = minus_lap_u.eval(x);
            report.div_vs_rho = report.div_vs_rho.max((dd - rho.value).norm());
            report.rho_vs_spectral = report.rho_vs_spectral.max((rho.value - spectral).norm());
            report.curl_vs_div = report.curl_vs_div.max((cc - dd).norm());
            report.resolution = report.resolution.max(rho.resolution);
        }
        Ok(report)
    }

    /// `λ_ℓ` tables for the localization right-hand sides.
    pub fn localization_tables(&self, kernel: LocalizationKernel, l_max: usize) -> Result<LocalizationTables> {
        let (fp, f) = match kernel {
            LocalizationKernel::Gamma => (self.kernel.gamma_prime_measure(true), self.kernel.gamma_measure()),
            LocalizationKernel::Mu => (self.kernel.gamma_measure(), self.kernel.mu_measure()),
        };
        let integrable = match kernel {
            LocalizationKernel::Gamma => self.kernel.params().a > 0.0,
            LocalizationKernel::Mu => true,
        };
        let (f_prime, t_f_prime) = if integrable {
            (Some(fp.project(0.0, l_max, fill_p)?), Some(fp.clone().times_t().project(0.0, l_max, fill_p)?))
        } else {
            (None, None)
        };
        Ok(LocalizationTables {
            kernel,
            l_max,
            f_prime,
            t_f_prime,
            one_minus_t_f_prime: fp.project(1.0, l_max, fill_p)?,
            f: f.project(0.0, l_max, fill_p)?,
        })
    }

    /// Max-norm difference between quadrature of the left side and the
    /// closed-form right side over `points`.
    pub fn localization_residual(
        &self,
        identity: Identity,
        l: usize,
        m: i64,
        tables: &LocalizationTables,
        points: &[UnitVector3],
    ) -> Result<ResidualRecord> {
        if l > tables.l_max {
            return Err(Error::MissingTables);
        }
        let key = match tables.kernel {
            LocalizationKernel::Gamma => RadialKey::GammaPrime(GammaPrimeMode::Distributional),
            LocalizationKernel::Mu => RadialKey::Gamma,
        };
        let shift = identity.shift();
        if shift == 0.0 && tables.f_prime.is_none() {
            return Err(Error::InvalidInput("f' is not integrable at t = 1 for this kernel"));
        }
        let fp = tables.f_prime.as_ref().map_or(0.0, |v| v[l]);
        let tfp = tables.t_f_prime.as_ref().map_or(0.0, |v| v[l]);
        let tfp0 = tables.t_f_prime.as_ref().map_or(0.0, |v| v[0]);
        let omt = tables.one_minus_t_f_prime[l];
        let lf = tables.f[l];
        let ll = (l * (l + 1)) as f64;

        let y_at = |p: UnitVector3| eval_mode(HarmonicMode::Y, l, m, p).ok().and_then(|v| v.scalar()).unwrap_or_default();
        let grad_at =
            |p: UnitVector3| eval_mode(HarmonicMode::GradY, l, m, p).ok().and_then(|v| v.vector()).unwrap_or_default();
        let c = |r: f64| Complex64::new(r, 0.0);

        let mut residual: f64 = 0.0;
        let mut resolution = self.cfg.start;
        for &x in points {
            let xv = vec_of(x);
            let xc = xv.complex();
            let integrand = |n: &CapNode| -> CVec3 {
                let yv = vec_of(n.y);
                let t = n.t;
                match identity {
                    Identity::L1 => yv.complex(),
                    Identity::L2 => CVec3([y_at(n.y), c(0.0), c(0.0)]),
                    Identity::L3 => CVec3([y_at(n.y) * (-ll), c(0.0), c(0.0)]),
                    Identity::L4 => grad_at(n.y),
                    Identity::L5 => grad_at(n.y).cross_left(yv),
                    Identity::L6 => yv.complex().scale(y_at(n.y)),
                    Identity::G1 => (yv - xv).complex().scale(y_at(n.y)),
                    Identity::G2 => grad_at(n.y).cross_left(yv - xv),
                    Identity::G3 => grad_at(n.y).cross_left(yv).cross_left(yv - xv),
                    Identity::G4 => yv.complex().scale(y_at(n.y)).cross_left(yv - xv),
                    Identity::E12 => grad_at(n.y).cross_left(xv - yv * t),
                    Identity::E13 => grad_at(n.y).cross_left(yv).cross_left(yv - xv * t),
                    Identity::E14 => xv.cross(yv).complex().scale(y_at(n.y)),
                }
            };
            let lhs = self.integrate(x, key, shift, &integrand)?;
            let yx = y_at(x);
            let gx = grad_at(x);
            let cx = gx.cross_left(xv);
            let rhs = match identity {
                Identity::L1 => xc * tfp0,
                Identity::L2 => CVec3([yx * fp, c(0.0), c(0.0)]),
                Identity::L3 => CVec3([yx * (-ll * fp), c(0.0), c(0.0)]),
                Identity::L4 => xc.scale(yx * (ll * lf)) + gx * (lf + tfp),
                Identity::L5 => cx * fp,
                Identity::L6 => xc.scale(yx * tfp) + gx * lf,
                Identity::G1 => xc.scale(yx * (-omt)) + gx * lf,
                Identity::G2 => cx * (omt - lf),
                Identity::G3 => xc.scale(yx * (-ll * lf)) + gx * (omt - lf),
                Identity::G4 => cx * (-lf),
                Identity::E12 | Identity::E14 => cx * lf,
                Identity::E13 => gx * (-lf) + xc.scale(yx * (-ll * lf)),
            };
            residual = residual.max((lhs.value - rhs).norm());
            resolution = resolution.max(lhs.resolution);
        }
        Ok(ResidualRecord { identity: identity.name(), params: self.params(), l, m, residual, resolution })
    }
}

fn scalar_estimate(e: Estimate<Complex64>) -> Estimate<FieldValue> {
    Estimate { value: FieldValue::Scalar(e.value), estimate: e.estimate, resolution: e.resolution }
}

fn vector_estimate(e: Estimate<CVec3>) -> Estimate<FieldValue> {
    Estimate { value: FieldValue::Vector(e.value), estimate: e.estimate, resolution: e.resolution }
}

fn local_adjoint_sides(pair: AdjointPair, inputs: AdjointInputs<'_>, grid: &SphereGrid) -> Result<(Complex64, Complex64)> {
    use crate::harmonics::{scalar_synthesis, vector_synthesis};
    let op = |s: Selector, x: SpectrumRef<'_>| apply(&OperatorKind::local(s), x);
    let inner_s = |a: &[Complex64], b: &[Complex64]| -> Result<Complex64> {
        let p: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x.conj() * y).collect();
        surface_integral(grid, &p)
    };
    let inner_v = |a: &[CVec3], b: &[CVec3]| -> Result<Complex64> {
        let p: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x.conj().dot(*y)).collect();
        surface_integral(grid, &p)
    };
    let us = scalar_synthesis(grid, inputs.u);
    let vs = vector_synthesis(grid, inputs.v);
    match pair {
        AdjointPair::LocalDivGrad => {
            let d = op(Selector::SurfDiv, SpectrumRef::Vector(inputs.v))?.into_scalar()?;
            let g = op(Selector::SurfGrad, SpectrumRef::Scalar(inputs.u))?.into_vector()?;
            let gs: Vec<CVec3> = vector_synthesis(grid, &g).into_iter().map(|x| -x).collect();
            Ok((inner_s(&us, &scalar_synthesis(grid, &d))?, inner_v(&gs, &vs)?))
        }
        AdjointPair::LocalCurls => {
            let c = op(Selector::ScalarSurfCurl, SpectrumRef::Vector(inputs.v))?.into_scalar()?;
            let g = op(Selector::VectorSurfCurl, SpectrumRef::Scalar(inputs.u))?.into_vector()?;
            Ok((inner_s(&us, &scalar_synthesis(grid, &c))?, inner_v(&vector_synthesis(grid, &g), &vs)?))
        }
        AdjointPair::LocalCurl => {
            let ws = vector_synthesis(grid, inputs.w);
            let c = op(Selector::Curl, SpectrumRef::Vector(inputs.v))?.into_vector()?;
            let ca = op(Selector::CurlAdjoint, SpectrumRef::Vector(inputs.w))?.into_vector()?;
            Ok((inner_v(&ws, &vector_synthesis(grid, &c))?, inner_v(&vector_synthesis(grid, &ca), &vs)?))
        }
        _ => unreachable!("weighted pair"),
    }
}

/// [`Oracle::quadrature_apply_weighted`] with a one-off oracle.
pub fn quadrature_apply_weighted(
    kind: WeightedKind,
    field: Field<'_>,
    x: UnitVector3,
    params: &KernelParams,
    cfg: OracleConfig,
) -> Result<Estimate<FieldValue>> {
    Oracle::new(*params, cfg)?.quadrature_apply_weighted(kind, field, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{random_scalar_spectrum, random_vector_spectrum};
    use crate::kernels::eigen_tables;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_points(n: usize, seed: u64) -> Vec<UnitVector3> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let v: [f64; 3] = [
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                ];
                UnitVector3::from_array(v).unwrap()
            })
            .collect()
    }

    fn oracle(a: f64, d: f64) -> Oracle {
        Oracle::new(KernelParams::new(a, d).unwrap(), OracleConfig::default()).unwrap()
    }

    fn mode_vec(mode: HarmonicMode, l: usize, m: i64) -> impl Fn(UnitVector3) -> CVec3 + Sync {
        move |p| eval_mode(mode, l, m, p).unwrap().vector().unwrap()
    }

    #[test]
    fn cap_nodes_stay_in_support() {
        for (a, d) in [(0.5, 0.25), (-0.5, 1.0), (0.0, 2.0)] {
            let p = KernelParams::new(a, d).unwrap();
            let k = Kernel::new(p).unwrap();
            for x in random_points(3, 1) {
                let cap = CapQuadrature::new(x, &p);
                assert!((cap.theta_delta() - 2.0 * asin(d / 2.0)).abs() < 1e-15);
                let rule = k.gamma_prime_measure(true).discretize(12, 1.0).unwrap();
                for n in cap.nodes(&rule, 1.0, 8).unwrap() {
                    assert!((vec_of(n.y) - vec_of(x)).norm() <= d + 1e-12);
                    assert!((vec_of(n.y).dot(vec_of(x)) - n.t).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let o = oracle(0.5, 0.25);
        let one = |_: UnitVector3| Complex64::new(1.0, 0.0);
        for x in random_points(3, 2) {
            let g = o.quadrature_apply_weighted(WeightedKind::SurfGrad, Field::Scalar(&one), x).unwrap();
            assert!(g.value.norm() < 1e-14);
        }
    }

    #[test]
    fn divergence_matches_spectral() {
        for (a, d) in [(0.5, 0.25), (-0.5, 0.1)] {
            let o = oracle(a, d);
            let t = eigen_tables(&o.params(), 4).unwrap();
            let v = mode_vec(HarmonicMode::GradY, 2, 1);
            for x in random_points(10, 3) {
                let q = o.quadrature_apply_weighted(WeightedKind::SurfDiv, Field::Vector(&v), x).unwrap();
                let y = eval_mode(HarmonicMode::Y, 2, 1, x).unwrap().scalar().unwrap();
                let exact = y * (-6.0 * t.lambda[2]);
                let err = (q.value.scalar().unwrap() - exact).norm() / exact.norm().max(1.0);
                assert!(err < 1e-6, "a={a} d={d} err={err}");
            }
        }
    }

    #[test]
    fn vanishing_outputs_converge() {
        let o = oracle(-0.5, 0.1);
        let v = mode_vec(HarmonicMode::YNormal, 3, 1);
        let u = |_: UnitVector3| Complex64::new(2.0, 0.0);
        for x in random_points(5, 9) {
            let d = o.quadrature_apply_weighted(WeightedKind::SurfDiv, Field::Vector(&v), x).unwrap();
            assert!(d.value.norm() < 1e-12);
            let c = o.quadrature_apply_weighted(WeightedKind::VectorSurfCurl, Field::Scalar(&u), x).unwrap();
            assert!(c.value.norm() < 1e-12);
        }
    }

    #[test]
    fn curl_of_normal_field_matches_spectral() {
        let o = oracle(0.5, 0.25);
        let t = eigen_tables(&o.params(), 2).unwrap();
        let v = mode_vec(HarmonicMode::YNormal, 1, 0);
        for x in random_points(6, 4) {
            let q = o.quadrature_apply_weighted(WeightedKind::Curl, Field::Vector(&v), x).unwrap();
            let c = eval_mode(HarmonicMode::CrossGradY, 1, 0, x).unwrap().vector().unwrap();
            assert!((q.value.vector().unwrap() - c * (-t.lambda[1])).norm() < 1e-6);
        }
    }

    #[test]
    fn rotation_invariance() {
        let o = oracle(-0.5, 0.25);
        let mut n = {
            let mut rng = StdRng::seed_from_u64(8);
            move || StandardNormal.sample(&mut rng)
        };
        let vs = random_vector_spectrum(3, &mut n);
        let v = |p: UnitVector3| vs.eval(p);
        let x = random_points(1, 5)[0];
        let target = random_points(1, 6)[0];
        // R maps x to target
        let r1 = PoleRotation::to_point(x);
        let r2 = PoleRotation::to_point(target);
        let rot = |w: Vec3| r2.apply(r1.apply_inverse(w));
        let rot_inv = |w: Vec3| r1.apply(r2.apply_inverse(w));
        let rotc = |c: CVec3| {
            let re = rot(c.re());
            let im = rot(Vec3([c.0[0].im, c.0[1].im, c.0[2].im]));
            CVec3([0, 1, 2].map(|i| Complex64::new(re.0[i], im.0[i])))
        };
        let rotated = |p: UnitVector3| rotc(v(UnitVector3::from_array(rot_inv(vec_of(p)).0).unwrap()));
        let base = o.quadrature_apply_weighted(WeightedKind::Curl, Field::Vector(&v), x).unwrap();
        let moved = o.quadrature_apply_weighted(WeightedKind::Curl, Field::Vector(&rotated), target).unwrap();
        let expect = rotc(base.value.vector().unwrap());
        assert!((moved.value.vector().unwrap() - expect).norm() < 1e-8);
    }

    #[test]
    fn two_point_adjoint_examples() {
        let o = oracle(0.5, 0.25);
        let u = |p: UnitVector3| Complex64::new(p.z * p.x + 0.3, 0.0);
        let x = random_points(1, 7)[0];
        let v = o
            .two_point_apply(TwoPointOp::Div, TwoPointInput::Adjoint { field: Field::Scalar(&u), x, y: x })
            .unwrap();
        assert_eq!(v.vector().unwrap().norm(), 0.0);
        let c = Vec3([0.3, -1.2, 0.5]);
        let cv = |_: UnitVector3| c.complex();
        let cap = CapQuadrature::new(x, &o.params());
        let rule = o.kernel().support_measure().discretize(3, 0.0).unwrap();
        for n in cap.nodes(&rule, 0.0, 3).unwrap() {
            let got = o
                .two_point_apply(TwoPointOp::Curl, TwoPointInput::Adjoint { field: Field::Vector(&cv), x, y: n.y })
                .unwrap()
                .vector()
                .unwrap();
            let beta = (vec_of(n.y) - vec_of(x)) * o.kernel().gamma_prime(n.t);
            assert!((got - (c * 2.0).complex().cross_left(beta)).norm() < 1e-12 * got.norm().max(1.0));
        }
    }

    #[test]
    fn two_point_divergence_reproduces_weighted() {
        let p = KernelParams::new(0.5, 0.25).unwrap();
        let cfg = OracleConfig { gamma_prime: GammaPrimeMode::Smooth, ..OracleConfig::default() };
        let o = Oracle::new(p, cfg).unwrap();
        let v = mode_vec(HarmonicMode::GradY, 2, 1);
        let omega_v = |x: UnitVector3, y: UnitVector3| {
            if (vec_of(x) - vec_of(y)).norm() <= p.delta {
                FieldValue::Vector(v(x))
            } else {
                FieldValue::Vector(CVec3::ZERO)
            }
        };
        for x in random_points(4, 9) {
            let two = o
                .two_point_apply(
                    TwoPointOp::Div,
                    TwoPointInput::Forward { field: TwoPointField { eval: &omega_v, order: 1.0 }, x },
                )
                .unwrap()
                .scalar()
                .unwrap();
            let w = o.quadrature_apply_weighted(WeightedKind::SurfDiv, Field::Vector(&v), x).unwrap();
            let w = w.value.scalar().unwrap();
            assert!((two - w).norm() <= 1e-10 * w.norm().max(1e-3));
        }
    }

    #[test]
    fn composition_examples() {
        let o = oracle(0.5, 0.25);
        let pts = random_points(4, 10);
        let one = ScalarSpectrum::mode(2, 0, 0).unwrap();
        let r = o.composition_residual(&one, &pts).unwrap();
        assert!(r.residual() < 1e-10, "{r:?}");
        let y20 = ScalarSpectrum::mode(2, 2, 0).unwrap();
        let r = o.composition_residual(&y20, &pts).unwrap();
        assert!(r.residual() < 1e-6, "{r:?}");
        assert!(r.curl_vs_div < 1e-8);
    }

    #[test]
    fn localization_examples() {
        let o = oracle(0.5, 0.25);
        let tables = o.localization_tables(LocalizationKernel::Gamma, 3).unwrap();
        let pts = random_points(3, 11);
        for id in [Identity::L2, Identity::G4] {
            let r = o.localization_residual(id, 2, 1, &tables, &pts).unwrap();
            assert!(r.residual < 1e-6, "{id:?} {}", r.residual);
        }
        for id in [Identity::L4, Identity::L5, Identity::G2, Identity::E12] {
            let r = o.localization_residual(id, 0, 0, &tables, &pts).unwrap();
            assert!(r.residual < 1e-9);
        }
        let neg = oracle(-0.5, 0.25);
        let t = neg.localization_tables(LocalizationKernel::Gamma, 2).unwrap();
        assert!(t.f_prime.is_none());
        assert!(neg.localization_residual(Identity::L2, 1, 0, &t, &pts).is_err());
        assert!(neg.localization_residual(Identity::G1, 1, 0, &t, &pts).unwrap().residual < 1e-6);
    }

    #[test]
    fn adjoint_pairs_small() {
        let o = oracle(0.5, 0.25);
        let mut rng = StdRng::seed_from_u64(12);
        let mut n = move || -> f64 { StandardNormal.sample(&mut rng) };
        let u = random_scalar_spectrum(2, &mut n);
        let v = random_vector_spectrum(2, &mut n);
        let w = random_vector_spectrum(2, &mut n);
        let grid = SphereGrid::for_degree(3);
        for pair in AdjointPair::ALL {
            let r = o.adjointness_residual(pair, AdjointInputs { u: &u, v: &v, w: &w }, &grid).unwrap();
            let tol = if pair.is_local() { 1e-9 } else { 1e-6 };
            assert!(r < tol, "{} {r}", pair.name());
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let p = KernelParams::new(0.5, 1.0).unwrap();
        let cfg = OracleConfig { tol: 0.0, max_doublings: 1, ..OracleConfig::default() };
        let o = Oracle::new(p, cfg).unwrap();
        let rough = |y: UnitVector3| Complex64::new(libm::fabs(y.x - 0.1), 0.0);
        let x = random_points(1, 13)[0];
        let e = o.quadrature_apply_weighted(WeightedKind::SurfGrad, Field::Scalar(&rough), x);
        assert!(matches!(e, Err(Error::NonConvergence { estimate }) if estimate > 0.0));
    }

    #[test]
    fn type_mismatch() {
        let o = oracle(0.5, 0.25);
        let u = |_: UnitVector3| Complex64::new(1.0, 0.0);
        let x = UnitVector3::NORTH;
        assert!(matches!(
            o.quadrature_apply_weighted(WeightedKind::SurfDiv, Field::Scalar(&u), x),
            Err(Error::TypeMismatch(_))
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]

        #[test]
        fn oracle_matches_spectral(
            l in 0usize..6,
            mf in 0.0f64..1.0,
            which in 0usize..7,
            theta in 0.0f64..core::f64::consts::PI,
            phi in 0.0f64..core::f64::consts::TAU,
            a in -0.9f64..0.9,
            d in 0.05f64..1.5,
        ) {
            let m = ((2 * l + 1) as f64 * mf).floor() as i64 - l as i64;
            let o = oracle(a, d);
            let t = eigen_tables(&o.params(), 6).unwrap();
            let x = crate::geometry::SphCoord::new(theta, phi).unwrap().to_unit();
            let (kind, sel, fam) = [
                (WeightedKind::SurfDiv, Selector::SurfDiv, HarmonicMode::GradY),
                (WeightedKind::ScalarSurfCurl, Selector::ScalarSurfCurl, HarmonicMode::CrossGradY),
                (WeightedKind::SurfGrad, Selector::SurfGrad, HarmonicMode::Y),
                (WeightedKind::VectorSurfCurl, Selector::VectorSurfCurl, HarmonicMode::Y),
                (WeightedKind::Curl, Selector::Curl, HarmonicMode::YNormal),
                (WeightedKind::CurlAdjoint, Selector::CurlAdjoint, HarmonicMode::CrossGradY),
                (WeightedKind::Averaging, Selector::Averaging, HarmonicMode::GradY),
            ][which];
            let (q, s) = if fam == HarmonicMode::Y {
                let u = |p: UnitVector3| eval_mode(fam, l, m, p).unwrap().scalar().unwrap();
                let spec = apply(&OperatorKind::nonlocal(sel, &t), SpectrumRef::Scalar(&ScalarSpectrum::mode(6, l, m).unwrap()))
                    .unwrap()
                    .into_vector()
                    .unwrap();
                (o.quadrature_apply_weighted(kind, Field::Scalar(&u), x).unwrap().value, FieldValue::Vector(spec.eval(x)))
            } else {
                let v = |p: UnitVector3| eval_mode(fam, l, m, p).unwrap().vector().unwrap();
                let spec = apply(&OperatorKind::nonlocal(sel, &t), SpectrumRef::Vector(&VectorSpectrum::mode(6, fam, l, m).unwrap()))
                    .unwrap();
                let s = match spec {
                    crate::operators::Spectrum::Scalar(u) => FieldValue::Scalar(u.eval(x)),
                    crate::operators::Spectrum::Vector(w) => FieldValue::Vector(w.eval(x)),
                };
                (o.quadrature_apply_weighted(kind, Field::Vector(&v), x).unwrap().value, s)
            };
            let err = q.distance(s).unwrap() / s.norm().max(1.0);
            proptest::prop_assert!(err < 1e-6, "{:?} l={} m={} err={}", kind, l, m, err);
        }
    }
}
