//! Local and weighted nonlocal surface operators as per-degree multipliers.
//!
//! With `L = ℓ(ℓ+1)`, `M_ℓ = Λ_ℓ` (nonlocal) or `1` (local):
//!
//! | operator | action |
//! |---|---|
//! | `SurfDiv` | `u = −M L V^s` |
//! | `ScalarSurfCurl` | `u = M L V^t` |
//! | `SurfGrad` | `V^s = M u` |
//! | `VectorSurfCurl` | `V^t = M u` |
//! | `LaplaceBeltrami` | `−L u` |
//! | `NonlocalLaplacian` | `(λ_ℓ{ρ_δ} − λ_0{ρ_δ}) u` |
//!
//! `Curl`, `CurlAdjoint` and `Averaging` mix the three vector channels.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::harmonics::{lm_index, ScalarSpectrum, SpectrumRef, VectorSpectrum};
use crate::kernels::{laplacian_multipliers, EigenTables, KernelParams};
use crate::{Error, Result};

/// Which operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    SurfDiv,
    ScalarSurfCurl,
    SurfGrad,
    VectorSurfCurl,
    Curl,
    CurlAdjoint,
    LaplaceBeltrami,
    NonlocalLaplacian,
    Averaging,
}

impl Selector {
    pub const ALL: [Selector; 9] = [
        Selector::SurfDiv,
        Selector::ScalarSurfCurl,
        Selector::SurfGrad,
        Selector::VectorSurfCurl,
        Selector::Curl,
        Selector::CurlAdjoint,
        Selector::LaplaceBeltrami,
        Selector::NonlocalLaplacian,
        Selector::Averaging,
    ];

    /// Whether the operator consumes a vector spectrum.
    pub fn takes_vector(self) -> bool {
        matches!(
            self,
            Selector::SurfDiv | Selector::ScalarSurfCurl | Selector::Curl | Selector::CurlAdjoint | Selector::Averaging
        )
    }

    /// Whether the operator produces a vector spectrum.
    pub fn returns_vector(self) -> bool {
        matches!(
            self,
            Selector::SurfGrad | Selector::VectorSurfCurl | Selector::Curl | Selector::CurlAdjoint | Selector::Averaging
        )
    }
}

/// Local operators or nonlocal ones with their tables.
#[derive(Debug, Clone, Copy)]
pub enum Locality<'a> {
    Local,
    Nonlocal(&'a EigenTables),
}

/// Operator plus locality.
#[derive(Debug, Clone, Copy)]
pub struct OperatorKind<'a> {
    pub selector: Selector,
    pub locality: Locality<'a>,
}

impl<'a> OperatorKind<'a> {
    pub fn local(selector: Selector) -> Self {
        Self { selector, locality: Locality::Local }
    }

    pub fn nonlocal(selector: Selector, tables: &'a EigenTables) -> Self {
        Self { selector, locality: Locality::Nonlocal(tables) }
    }
}

/// Owned output of [`apply`].
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Scalar(ScalarSpectrum),
    Vector(VectorSpectrum),
}

impl Spectrum {
    pub fn as_ref(&self) -> SpectrumRef<'_> {
        match self {
            Spectrum::Scalar(s) => SpectrumRef::Scalar(s),
            Spectrum::Vector(v) => SpectrumRef::Vector(v),
        }
    }

    pub fn into_scalar(self) -> Result<ScalarSpectrum> {
        match self {
            Spectrum::Scalar(s) => Ok(s),
            Spectrum::Vector(_) => Err(Error::TypeMismatch("expected a scalar spectrum")),
        }
    }

    pub fn into_vector(self) -> Result<VectorSpectrum> {
        match self {
            Spectrum::Vector(v) => Ok(v),
            Spectrum::Scalar(_) => Err(Error::TypeMismatch("expected a vector spectrum")),
        }
    }
}

/// Per-degree table entries used by the multipliers.
#[derive(Debug, Clone, Copy)]
struct Row {
    lambda: f64,
    theta: f64,
    theta0: f64,
    mu: f64,
    mu_t: f64,
    tg: f64,
    lap: f64,
}

fn rows(locality: Locality<'_>, lmax: usize, need_tables: bool) -> Result<Vec<Row>> {
    match locality {
        Locality::Local => {
            if need_tables {
                return Err(Error::MissingTables);
            }
            Ok((0..=lmax)
                .map(|_| Row { lambda: 1.0, theta: 1.0, theta0: 1.0, mu: 0.0, mu_t: 0.0, tg: 0.0, lap: 0.0 })
                .collect())
        }
        Locality::Nonlocal(t) => {
            if t.l_max < lmax {
                return Err(Error::MissingTables);
            }
            Ok((0..=lmax)
                .map(|l| Row {
                    lambda: t.lambda[l],
                    theta: t.theta[l],
                    theta0: t.theta[0],
                    mu: t.mu[l],
                    mu_t: t.mu_t[l],
                    tg: t.tg[l],
                    lap: t.laplacian[l],
                })
                .collect())
        }
    }
}

/// Applies an operator to a spectrum in coefficient space.
///
/// ```
/// use nlsphere::harmonics::{HarmonicMode, SpectrumRef, VectorSpectrum};
/// use nlsphere::operators::{apply, OperatorKind, Selector};
/// let v = VectorSpectrum::mode(4, HarmonicMode::GradY, 3, 1).unwrap();
/// let u = apply(&OperatorKind::local(Selector::SurfDiv), SpectrumRef::Vector(&v))
///     .unwrap()
///     .into_scalar()
///     .unwrap();
/// assert_eq!(u.get(3, 1).re, -12.0);
/// ```
pub fn apply(kind: &OperatorKind<'_>, input: SpectrumRef<'_>) -> Result<Spectrum> {
    let sel = kind.selector;
    let lmax = match (sel.takes_vector(), input) {
        (true, SpectrumRef::Vector(v)) => v.lmax,
        (false, SpectrumRef::Scalar(u)) => u.lmax,
        (true, SpectrumRef::Scalar(_)) => return Err(Error::TypeMismatch("operator takes a vector spectrum")),
        (false, SpectrumRef::Vector(_)) => return Err(Error::TypeMismatch("operator takes a scalar spectrum")),
    };
    if sel == Selector::LaplaceBeltrami && matches!(kind.locality, Locality::Nonlocal(_)) {
        return Err(Error::InvalidInput("LaplaceBeltrami is local only"));
    }
    let need_tables = matches!(sel, Selector::NonlocalLaplacian | Selector::Averaging);
    let rows = rows(kind.locality, lmax, need_tables)?;
    let nonlocal = matches!(kind.locality, Locality::Nonlocal(_));
    let zero = Complex64::new(0.0, 0.0);

    match input {
        SpectrumRef::Vector(v) => {
            let mut su = ScalarSpectrum::zeros(lmax);
            let mut out = VectorSpectrum::zeros(lmax);
            for l in 0..=lmax {
                let r = rows[l];
                let ll = (l * (l + 1)) as f64;
                for m in -(l as i64)..=(l as i64) {
                    let i = lm_index(l, m);
                    let (s, t, x) = if l == 0 { (zero, zero, v.x[i]) } else { (v.s[i], v.t[i], v.x[i]) };
                    match sel {
                        Selector::SurfDiv => su.coeffs[i] = -r.lambda * ll * s,
                        Selector::ScalarSurfCurl => su.coeffs[i] = r.lambda * ll * t,
                        Selector::Curl | Selector::CurlAdjoint => {
                            let sign = if sel == Selector::Curl { 1.0 } else { -1.0 };
                            let (ps, pt) = if nonlocal {
                                (
                                    -sign * r.theta0 + r.theta - r.lambda,
                                    sign * r.theta0 + r.theta - r.lambda,
                                )
                            } else {
                                (-sign, sign)
                            };
                            out.s[i] = ps * t;
                            out.t[i] = pt * s - r.lambda * x;
                            out.x[i] = -ll * r.lambda * t;
                        }
                        Selector::Averaging => {
                            out.s[i] = r.mu_t * s + r.mu * x;
                            out.t[i] = r.lambda * t;
                            out.x[i] = ll * r.mu * s + r.tg * x;
                        }
                        _ => unreachable!("scalar-input operator"),
                    }
                    if l == 0 {
                        out.s[i] = zero;
                        out.t[i] = zero;
                    }
                }
            }
            Ok(if sel.returns_vector() { Spectrum::Vector(out) } else { Spectrum::Scalar(su) })
        }
        SpectrumRef::Scalar(u) => {
            let mut su = ScalarSpectrum::zeros(lmax);
            let mut out = VectorSpectrum::zeros(lmax);
            for l in 0..=lmax {
                let r = rows[l];
                let ll = (l * (l + 1)) as f64;
                for m in -(l as i64)..=(l as i64) {
                    let i = lm_index(l, m);
                    let c = u.coeffs[i];
                    match sel {
                        Selector::SurfGrad if l > 0 => out.s[i] = r.lambda * c,
                        Selector::VectorSurfCurl if l > 0 => out.t[i] = r.lambda * c,
                        Selector::SurfGrad | Selector::VectorSurfCurl => {}
                        Selector::LaplaceBeltrami => su.coeffs[i] = -ll * c,
                        Selector::NonlocalLaplacian => su.coeffs[i] = r.lap * c,
                        _ => unreachable!("vector-input operator"),
                    }
                }
            }
            Ok(if sel.returns_vector() { Spectrum::Vector(out) } else { Spectrum::Scalar(su) })
        }
    }
}

/// `λ_ℓ{ρ_δ} − λ_0{ρ_δ}` for `ℓ ≤ l_max`; zero at `ℓ = 0`, negative above.
pub fn nonlocal_laplacian_multipliers(params: &KernelParams, l_max: usize) -> Result<Vec<f64>> {
    laplacian_multipliers(params, l_max)
}

/// The 3×3 block of `Curl` (or `CurlAdjoint`) at degree `ℓ` acting on the
/// orthonormal channels `(√L V^s, √L V^t, V^x)`.
pub fn curl_block(locality: Locality<'_>, l: usize, adjoint: bool) -> Result<[[f64; 3]; 3]> {
    if l == 0 {
        return Ok([[0.0; 3]; 3]);
    }
    let r = rows(locality, l, false)?[l];
    let nonlocal = matches!(locality, Locality::Nonlocal(_));
    let sign = if adjoint { -1.0 } else { 1.0 };
    let (ps, pt) = if nonlocal {
        (-sign * r.theta0 + r.theta - r.lambda, sign * r.theta0 + r.theta - r.lambda)
    } else {
        (-sign, sign)
    };
    let q = libm::sqrt((l * (l + 1)) as f64);
    Ok([[0.0, ps, 0.0], [pt, 0.0, -r.lambda * q], [0.0, -q * r.lambda, 0.0]])
}
