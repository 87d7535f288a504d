//! Cap integrals, boundary circulations and the nonlocal Stokes residual.
//!
//! The cap is `{θ < θ₀}` and its boundary circle is traversed with tangent
//! `s = e_φ`. Only `m = 0` coefficients survive the azimuthal integration, so
//! both sides reduce to sums over `ℓ`.

use alloc::vec;

use core::f64::consts::PI;

use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use crate::geometry::SphCoord;
use crate::harmonics::{lm_index, LegendreTable, ScalarSpectrum, SpectrumRef, VectorSpectrum};
use crate::operators::{apply, Locality, OperatorKind, Selector};
use crate::quadrature::{quadrature_rule, QuadratureKind};
use crate::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Spherical cap `{θ < θ₀}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    theta0: f64,
}

impl Cap {
    /// `θ₀` must lie strictly inside `(0, π)`.
    pub fn new(theta0: f64) -> Result<Self> {
        if !(theta0 > 0.0 && theta0 < PI) {
            return Err(Error::InvalidInput("cap angle must lie in (0, pi)"));
        }
        Ok(Self { theta0 })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }
}

/// `∫_{t_lo}^{t_hi} P̃_ℓ^0(t) dt` for all `ℓ ≤ lmax`, exact by Gauss–Legendre.
fn zonal_integrals(lmax: usize, t_lo: f64, t_hi: f64) -> Result<vec::Vec<f64>> {
    let rule = quadrature_rule(QuadratureKind::GaussLegendre, lmax / 2 + 2)?;
    let (half, mid) = ((t_hi - t_lo) / 2.0, (t_hi + t_lo) / 2.0);
    let mut out = vec![0.0; lmax + 1];
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let table = LegendreTable::new(lmax, mid + half * s);
        for (l, o) in out.iter_mut().enumerate() {
            *o += w * half * table.p(l, 0);
        }
    }
    Ok(out)
}

fn zonal_sum(f: &ScalarSpectrum, ints: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, &i) in ints.iter().enumerate() {
        acc += f.coeffs[lm_index(l, 0)] * (SQRT_2PI * i);
    }
    acc
}

/// `∫_Σ f dΩ` over the cap.
///
/// ```
/// use nlsphere::harmonics::ScalarSpectrum;
/// use nlsphere::stokes::{cap_surface_integral, Cap};
/// let one = ScalarSpectrum::mode(0, 0, 0).unwrap();
/// let cap = Cap::new(std::f64::consts::FRAC_PI_2).unwrap();
/// let area = cap_surface_integral(&one, &cap).unwrap() * (4.0 * std::f64::consts::PI).sqrt();
/// assert!((area.re - 2.0 * std::f64::consts::PI).abs() < 1e-13);
/// ```
pub fn cap_surface_integral(f: &ScalarSpectrum, cap: &Cap) -> Result<Complex64> {
    Ok(zonal_sum(f, &zonal_integrals(f.lmax, cos(cap.theta0), 1.0)?))
}

/// `∫ f dΩ` over the complementary cap `{θ > θ₀}`.
pub fn complement_surface_integral(f: &ScalarSpectrum, cap: &Cap) -> Result<Complex64> {
    Ok(zonal_sum(f, &zonal_integrals(f.lmax, -1.0, cos(cap.theta0))?))
}

/// `∮ V · e_φ dω` along `θ = θ₀`. Only toroidal `m = 0` modes contribute:
/// `√(2π) sin θ₀ Σ_ℓ V^t_{ℓ,0} ∂_θ P̃_ℓ^0(cos θ₀)`.
pub fn boundary_circulation(v: &VectorSpectrum, cap: &Cap) -> Complex64 {
    let table = LegendreTable::new(v.lmax, cos(cap.theta0));
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 1..=v.lmax {
        acc += v.t[lm_index(l, 0)] * table.dp_dtheta(l, 0);
    }
    acc * (SQRT_2PI * sin(cap.theta0))
}

/// [`boundary_circulation`] by synthesis on `n_phi` ring points and the
/// trapezoid rule, exact once `n_phi > lmax`.
pub fn boundary_circulation_ring(v: &VectorSpectrum, cap: &Cap, n_phi: usize) -> Result<Complex64> {
    if n_phi == 0 {
        return Err(Error::InvalidInput("ring needs at least one point"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n_phi {
        let c = SphCoord::new(cap.theta0, 2.0 * PI * k as f64 / n_phi as f64)?;
        let (_, e_phi) = c.frame();
        acc += v.eval(c.to_unit()).dot_real(e_phi);
    }
    Ok(acc * (2.0 * PI * sin(cap.theta0) / n_phi as f64))
}

/// [`cap_surface_integral`] by pointwise evaluation on a Gauss–Legendre ×
/// uniform grid over the cap.
pub fn cap_surface_integral_grid(f: &ScalarSpectrum, cap: &Cap, n_theta: usize, n_phi: usize) -> Result<Complex64> {
    let rule = quadrature_rule(QuadratureKind::GaussLegendre, n_theta)?;
    if n_phi == 0 {
        return Err(Error::InvalidInput("grid needs at least one longitude"));
    }
    let c0 = cos(cap.theta0);
    let (half, mid) = ((1.0 - c0) / 2.0, (1.0 + c0) / 2.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let theta = libm::acos((mid + half * s).clamp(-1.0, 1.0));
        for k in 0..n_phi {
            let p = SphCoord::new(theta, 2.0 * PI * k as f64 / n_phi as f64)?.to_unit();
            acc += f.eval(p) * (w * half * 2.0 * PI / n_phi as f64);
        }
    }
    Ok(acc)
}

/// Both sides of the Stokes identity and their relative defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesReport {
    pub theta0: f64,
    /// `∫_Σ C^δ{V}·x dΩ`.
    pub lhs: Complex64,
    /// `∮ A^δ{V}·s dω`.
    pub rhs: Complex64,
    pub residual: f64,
}

fn relative_defect(lhs: Complex64, rhs: Complex64) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    let d = (lhs - rhs).norm();
    if scale < 1e-14 {
        d
    } else {
        d / scale
    }
}

/// Cap integral of the normal component of the curl against the boundary
/// circulation of the averaged field.
///
/// With [`Locality::Local`] the averaging operator is the identity and the
/// curl is the local one, which is the classical Stokes theorem.
pub fn stokes_residual(v: &VectorSpectrum, cap: &Cap, locality: Locality<'_>) -> Result<StokesReport> {
    let curl = apply(&OperatorKind { selector: Selector::Curl, locality }, SpectrumRef::Vector(v))?.into_vector()?;
    let normal = ScalarSpectrum::from_coeffs(curl.lmax, curl.x)?;
    let lhs = cap_surface_integral(&normal, cap)?;
    let rhs = match locality {
        Locality::Local => boundary_circulation(v, cap),
        Locality::Nonlocal(_) => {
            let avg = apply(&OperatorKind { selector: Selector::Averaging, locality }, SpectrumRef::Vector(v))?
                .into_vector()?;
            boundary_circulation(&avg, cap)
        }
    };
    Ok(StokesReport { theta0: cap.theta0, lhs, rhs, residual: relative_defect(lhs, rhs) })
}

/// `−2π √(3/(4π)) Λ₁ sin²θ₀`, both sides for `V = x × ∇_S Y_{1,0}`.
pub fn zonal_closed_form(lambda1: f64, cap: &Cap) -> f64 {
    let s = sin(cap.theta0);
    -2.0 * PI * sqrt(3.0 / (4.0 * PI)) * lambda1 * s * s
}
