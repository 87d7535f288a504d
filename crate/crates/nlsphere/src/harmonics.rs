//! Spherical harmonics, vector spherical harmonics and their transforms.
//!
//! Phase convention: `P̃_ℓ^m = (−1)^m Q_ℓ^{|m|}` for `m > 0` and
//! `P̃_ℓ^m = Q_ℓ^{|m|}` for `m ≤ 0`, where `Q_ℓ^m ≥ 0` near the north pole is
//! normalized so that `∫_{-1}^{1} (Q_ℓ^m)² dt = 1`. Then
//! `Y_{ℓ,m}(θ, φ) = e^{imφ} P̃_ℓ^m(cos θ) / √(2π)` and
//! `Y_{ℓ,−m} = (−1)^m conj(Y_{ℓ,m})`.
//!
//! Coefficients are stored at index `ℓ² + ℓ + m`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, pow, sin, sqrt};
use num_complex::Complex64;

use crate::geometry::{CVec3, SphCoord, UnitVector3, Vec3};
use crate::quadrature::SphereGrid;
use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Position of `(ℓ, m)` in a coefficient vector.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients up to degree `lmax`.
#[inline]
pub fn n_coeffs(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

fn check_lm(l: usize, m: i64) -> Result<()> {
    if m.unsigned_abs() as usize > l {
        Err(Error::InvalidInput("|m| > l"))
    } else {
        Ok(())
    }
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalized associated Legendre data at a single `t = cos θ`.
///
/// Holds `Q_ℓ^m`, `Q_ℓ^m / sin θ` and `dQ_ℓ^m/dθ` for `0 ≤ m ≤ ℓ ≤ lmax`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    lmax: usize,
    q: Vec<f64>,
    q_over_s: Vec<f64>,
    dq: Vec<f64>,
}

impl LegendreTable {
    /// Builds the table at `t ∈ [−1, 1]`.
    pub fn new(lmax: usize, t: f64) -> Self {
        let t = t.clamp(-1.0, 1.0);
        let s = sqrt((1.0 - t * t).max(0.0));
        let n = tri(lmax, lmax) + 1;
        let mut q = vec![0.0; n];
        let mut qs = vec![0.0; n];
        // diagonal seeds: q_mm = c_m s^m, and c_m s^{m−1} for the 1/s table
        let mut c = sqrt(0.5);
        for m in 0..=lmax {
            if m > 0 {
                let mf = m as f64;
                c *= sqrt((2.0 * mf + 1.0) / (2.0 * mf));
            }
            let smm = if m == 0 { 1.0 } else { pow(s, m as f64) };
            let smm1 = if m == 0 { 0.0 } else if m == 1 { 1.0 } else { pow(s, (m - 1) as f64) };
            fill_column(&mut q, lmax, m, t, c * smm);
            fill_column(&mut qs, lmax, m, t, c * smm1);
        }
        let mut dq = vec![0.0; n];
        for l in 0..=lmax {
            let lf = l as f64;
            dq[tri(l, 0)] = if l == 0 { 0.0 } else { -sqrt(lf * (lf + 1.0)) * q[tri(l, 1)] };
            for m in 1..=l {
                let mf = m as f64;
                let up = if m < l { q[tri(l, m + 1)] } else { 0.0 };
                dq[tri(l, m)] = 0.5
                    * (sqrt((lf + mf) * (lf - mf + 1.0)) * q[tri(l, m - 1)]
                        - sqrt((lf + mf + 1.0) * (lf - mf)) * up);
            }
        }
        Self { lmax, q, q_over_s: qs, dq }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    #[inline]
    fn sign(m: i64) -> f64 {
        if m > 0 && m % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// `P̃_ℓ^m(t)`.
    #[inline]
    pub fn p(&self, l: usize, m: i64) -> f64 {
        Self::sign(m) * self.q[tri(l, m.unsigned_abs() as usize)]
    }

    /// `P̃_ℓ^m(t) / sin θ` (finite at the poles; zero there unless `|m| = 1`).
    #[inline]
    pub fn p_over_sin(&self, l: usize, m: i64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        Self::sign(m) * self.q_over_s[tri(l, m.unsigned_abs() as usize)]
    }

    /// `d P̃_ℓ^m(cos θ) / dθ`.
    #[inline]
    pub fn dp_dtheta(&self, l: usize, m: i64) -> f64 {
        Self::sign(m) * self.dq[tri(l, m.unsigned_abs() as usize)]
    }
}

fn fill_column(q: &mut [f64], lmax: usize, m: usize, t: f64, seed: f64) {
    q[tri(m, m)] = seed;
    if m + 1 > lmax {
        return;
    }
    let mf = m as f64;
    q[tri(m + 1, m)] = sqrt(2.0 * mf + 3.0) * t * seed;
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let den = lf * lf - mf * mf;
        let a = sqrt((4.0 * lf * lf - 1.0) / den);
        let b = sqrt((2.0 * lf + 1.0) * (lf - 1.0 - mf) * (lf - 1.0 + mf) / ((2.0 * lf - 3.0) * den));
        q[tri(l, m)] = a * t * q[tri(l - 1, m)] - b * q[tri(l - 2, m)];
    }
}

/// `P̃_ℓ^m(t)` for a single `(ℓ, m)`.
///
/// The `i^{m+|m|}` phase is `±1`, so the imaginary part is always zero.
///
/// ```
/// use nlsphere::harmonics::normalized_assoc_legendre;
/// let v = normalized_assoc_legendre(1, 0, 0.3).unwrap();
/// assert!((v.re - 1.5f64.sqrt() * 0.3).abs() < 1e-15 && v.im == 0.0);
/// ```
pub fn normalized_assoc_legendre(l: usize, m: i64, t: f64) -> Result<Complex64> {
    check_lm(l, m)?;
    if !t.is_finite() || !(-1.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput("t outside [-1, 1]"));
    }
    Ok(Complex64::new(LegendreTable::new(l, t).p(l, m), 0.0))
}

/// Which member of the harmonic families to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicMode {
    /// `Y_{ℓ,m}`.
    Y,
    /// `∇_S Y_{ℓ,m}`.
    GradY,
    /// `x × ∇_S Y_{ℓ,m}`.
    CrossGradY,
    /// `Y_{ℓ,m} x`.
    YNormal,
}

/// Result of [`eval_mode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeValue {
    Scalar(Complex64),
    Vector(CVec3),
}

impl ModeValue {
    pub fn scalar(self) -> Option<Complex64> {
        match self {
            ModeValue::Scalar(v) => Some(v),
            ModeValue::Vector(_) => None,
        }
    }
    pub fn vector(self) -> Option<CVec3> {
        match self {
            ModeValue::Vector(v) => Some(v),
            ModeValue::Scalar(_) => None,
        }
    }
}

/// Frame quantities of one harmonic at one point.
#[derive(Debug, Clone, Copy)]
struct Local {
    y: Complex64,
    /// `∂_θ Y`.
    dy: Complex64,
    /// `(im / sin θ) Y`.
    iy: Complex64,
}

fn local(table: &LegendreTable, l: usize, m: i64, phi: f64) -> Local {
    let e = Complex64::new(cos(m as f64 * phi), sin(m as f64 * phi)) * INV_SQRT_2PI;
    Local {
        y: e * table.p(l, m),
        dy: e * table.dp_dtheta(l, m),
        iy: e * Complex64::new(0.0, m as f64 * table.p_over_sin(l, m)),
    }
}

fn frame_vec(base: SphCoord, v_theta: Complex64, v_phi: Complex64, v_r: Complex64) -> CVec3 {
    let (et, ep) = base.frame();
    let x = Vec3::from(base.to_unit());
    et.complex().scale(v_theta) + ep.complex().scale(v_phi) + x.complex().scale(v_r)
}

/// Evaluates a scalar or vector spherical harmonic at a point.
///
/// At the poles longitude is canonicalized to zero and the tangential modes
/// take their limit along that meridian.
pub fn eval_mode(mode: HarmonicMode, l: usize, m: i64, point: UnitVector3) -> Result<ModeValue> {
    check_lm(l, m)?;
    let p = UnitVector3::new(point.x, point.y, point.z)?;
    let c = p.to_sph();
    let table = LegendreTable::new(l, p.z);
    let z = local(&table, l, m, c.phi);
    let zero = Complex64::new(0.0, 0.0);
    Ok(match mode {
        HarmonicMode::Y => ModeValue::Scalar(z.y),
        HarmonicMode::GradY => ModeValue::Vector(frame_vec(c, z.dy, z.iy, zero)),
        HarmonicMode::CrossGradY => ModeValue::Vector(frame_vec(c, -z.iy, z.dy, zero)),
        HarmonicMode::YNormal => ModeValue::Vector(frame_vec(c, zero, zero, z.y)),
    })
}

/// Coefficients `u_{ℓ,m}` of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpectrum {
    pub lmax: usize,
    pub coeffs: Vec<Complex64>,
}

impl ScalarSpectrum {
    pub fn zeros(lmax: usize) -> Self {
        Self { lmax, coeffs: vec![Complex64::new(0.0, 0.0); n_coeffs(lmax)] }
    }

    /// A single harmonic `Y_{ℓ,m}` with unit coefficient.
    pub fn mode(lmax: usize, l: usize, m: i64) -> Result<Self> {
        check_lm(l, m)?;
        if l > lmax {
            return Err(Error::InvalidInput("l > lmax"));
        }
        let mut s = Self::zeros(lmax);
        s.coeffs[lm_index(l, m)] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_coeffs(lmax: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != n_coeffs(lmax) {
            return Err(Error::ShapeMismatch { expected: n_coeffs(lmax), found: coeffs.len() });
        }
        Ok(Self { lmax, coeffs })
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[lm_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        self.coeffs[lm_index(l, m)] = v;
    }

    /// Point evaluation `Σ u_{ℓ,m} Y_{ℓ,m}(x)`.
    pub fn eval(&self, x: UnitVector3) -> Complex64 {
        let c = x.to_sph();
        let table = LegendreTable::new(self.lmax, x.z);
        let mut out = Complex64::new(0.0, 0.0);
        for l in 0..=self.lmax {
            for m in -(l as i64)..=(l as i64) {
                let u = self.coeffs[lm_index(l, m)];
                if u.re != 0.0 || u.im != 0.0 {
                    out += u * local(&table, l, m, c.phi).y;
                }
            }
        }
        out
    }

    /// Surface gradient at a point.
    pub fn eval_grad(&self, x: UnitVector3) -> CVec3 {
        let c = x.to_sph();
        let table = LegendreTable::new(self.lmax, x.z);
        let (mut vt, mut vp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for l in 1..=self.lmax {
            for m in -(l as i64)..=(l as i64) {
                let u = self.coeffs[lm_index(l, m)];
                if u.re != 0.0 || u.im != 0.0 {
                    let z = local(&table, l, m, c.phi);
                    vt += u * z.dy;
                    vp += u * z.iy;
                }
            }
        }
        frame_vec(c, vt, vp, Complex64::new(0.0, 0.0))
    }

    /// `Σ |u_{ℓ,m}|²`, the squared L² norm.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Spheroidal, toroidal and normal coefficients of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSpectrum {
    pub lmax: usize,
    pub s: Vec<Complex64>,
    pub t: Vec<Complex64>,
    pub x: Vec<Complex64>,
}

impl VectorSpectrum {
    pub fn zeros(lmax: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n_coeffs(lmax)];
        Self { lmax, s: z.clone(), t: z.clone(), x: z }
    }

    /// A single vector harmonic with unit coefficient.
    pub fn mode(lmax: usize, mode: HarmonicMode, l: usize, m: i64) -> Result<Self> {
        check_lm(l, m)?;
        if l > lmax {
            return Err(Error::InvalidInput("l > lmax"));
        }
        let mut v = Self::zeros(lmax);
        let i = lm_index(l, m);
        let one = Complex64::new(1.0, 0.0);
        match mode {
            HarmonicMode::GradY => v.s[i] = one,
            HarmonicMode::CrossGradY => v.t[i] = one,
            HarmonicMode::YNormal => v.x[i] = one,
            HarmonicMode::Y => return Err(Error::TypeMismatch("Y is a scalar mode")),
        }
        if l == 0 {
            v.s[0] = Complex64::new(0.0, 0.0);
            v.t[0] = Complex64::new(0.0, 0.0);
        }
        Ok(v)
    }

    /// Point evaluation as a Cartesian vector.
    pub fn eval(&self, p: UnitVector3) -> CVec3 {
        let c = p.to_sph();
        let table = LegendreTable::new(self.lmax, p.z);
        let zero = Complex64::new(0.0, 0.0);
        let (mut vt, mut vp, mut vr) = (zero, zero, zero);
        for l in 0..=self.lmax {
            for m in -(l as i64)..=(l as i64) {
                let i = lm_index(l, m);
                let (s, t, x) = (self.s[i], self.t[i], self.x[i]);
                if s == zero && t == zero && x == zero {
                    continue;
                }
                let z = local(&table, l, m, c.phi);
                vt += s * z.dy - t * z.iy;
                vp += s * z.iy + t * z.dy;
                vr += x * z.y;
            }
        }
        frame_vec(c, vt, vp, vr)
    }

    /// `Σ ℓ(ℓ+1)(|V^s|² + |V^t|²) + |V^x|²`, the squared L² norm.
    pub fn l2_norm_sqr(&self) -> f64 {
        let mut acc = 0.0;
        for l in 0..=self.lmax {
            let w = (l * (l + 1)) as f64;
            for m in -(l as i64)..=(l as i64) {
                let i = lm_index(l, m);
                acc += w * (self.s[i].norm_sqr() + self.t[i].norm_sqr()) + self.x[i].norm_sqr();
            }
        }
        acc
    }
}

/// Transform direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Analysis,
    Synthesis,
}

/// Grid values from a scalar spectrum (row-major grid layout).
pub fn scalar_synthesis(grid: &SphereGrid, u: &ScalarSpectrum) -> Vec<Complex64> {
    let lmax = u.lmax;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut fm = vec![Complex64::new(0.0, 0.0); 2 * lmax + 1];
    for i in 0..grid.n_theta {
        let table = LegendreTable::new(lmax, grid.cos_theta[i]);
        for m in -(lmax as i64)..=(lmax as i64) {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (m.unsigned_abs() as usize)..=lmax {
                acc += u.coeffs[lm_index(l, m)] * table.p(l, m);
            }
            fm[(m + lmax as i64) as usize] = acc * INV_SQRT_2PI;
        }
        for j in 0..grid.n_phi {
            let phi = grid.phi[j];
            let mut v = Complex64::new(0.0, 0.0);
            for m in -(lmax as i64)..=(lmax as i64) {
                let f = fm[(m + lmax as i64) as usize];
                if f.re != 0.0 || f.im != 0.0 {
                    v += f * Complex64::new(cos(m as f64 * phi), sin(m as f64 * phi));
                }
            }
            out[i * grid.n_phi + j] = v;
        }
    }
    out
}

/// Longitudinal Fourier sums `Σ_j f_ij e^{−imφ_j} (2π/n_φ)` for `|m| ≤ lmax`.
fn fourier_rows(grid: &SphereGrid, lmax: usize, f: impl Fn(usize, usize) -> Complex64) -> Vec<Complex64> {
    let nm = 2 * lmax + 1;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.n_theta * nm];
    let dphi = 2.0 * PI / grid.n_phi as f64;
    for i in 0..grid.n_theta {
        for j in 0..grid.n_phi {
            let v = f(i, j);
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let phi = grid.phi[j];
            for m in -(lmax as i64)..=(lmax as i64) {
                let e = Complex64::new(cos(m as f64 * phi), -sin(m as f64 * phi));
                out[i * nm + (m + lmax as i64) as usize] += v * e * dphi;
            }
        }
    }
    out
}

/// Spectrum of grid samples up to degree `lmax`.
pub fn scalar_analysis(grid: &SphereGrid, data: &[Complex64], lmax: usize) -> Result<ScalarSpectrum> {
    grid.check_resolves(lmax)?;
    if data.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: data.len() });
    }
    let nm = 2 * lmax + 1;
    let rows = fourier_rows(grid, lmax, |i, j| data[i * grid.n_phi + j]);
    let mut u = ScalarSpectrum::zeros(lmax);
    for i in 0..grid.n_theta {
        let table = LegendreTable::new(lmax, grid.cos_theta[i]);
        let w = grid.lat_weights[i] * INV_SQRT_2PI;
        for m in -(lmax as i64)..=(lmax as i64) {
            let f = rows[i * nm + (m + lmax as i64) as usize] * w;
            for l in (m.unsigned_abs() as usize)..=lmax {
                u.coeffs[lm_index(l, m)] += f * table.p(l, m);
            }
        }
    }
    Ok(u)
}

/// Scalar transform in either direction.
pub enum ScalarData<'a> {
    Spectrum(&'a ScalarSpectrum),
    Samples(&'a [Complex64], usize),
}

/// Output of [`scalar_transform`].
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarTransformed {
    Spectrum(ScalarSpectrum),
    Samples(Vec<Complex64>),
}

/// Analysis of samples (with target `lmax`) or synthesis of a spectrum.
pub fn scalar_transform(
    direction: Direction,
    grid: &SphereGrid,
    data: ScalarData<'_>,
) -> Result<ScalarTransformed> {
    match (direction, data) {
        (Direction::Synthesis, ScalarData::Spectrum(u)) => {
            Ok(ScalarTransformed::Samples(scalar_synthesis(grid, u)))
        }
        (Direction::Analysis, ScalarData::Samples(d, lmax)) => {
            Ok(ScalarTransformed::Spectrum(scalar_analysis(grid, d, lmax)?))
        }
        _ => Err(Error::TypeMismatch("direction does not match data")),
    }
}

/// Cartesian grid samples of a vector spectrum.
pub fn vector_synthesis(grid: &SphereGrid, v: &VectorSpectrum) -> Vec<CVec3> {
    let lmax = v.lmax;
    let nm = 2 * lmax + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![CVec3::ZERO; grid.len()];
    let mut ft = vec![zero; nm];
    let mut fp = vec![zero; nm];
    let mut fr = vec![zero; nm];
    for i in 0..grid.n_theta {
        let table = LegendreTable::new(lmax, grid.cos_theta[i]);
        for m in -(lmax as i64)..=(lmax as i64) {
            let (mut a, mut b, mut c) = (zero, zero, zero);
            let im = Complex64::new(0.0, m as f64);
            for l in (m.unsigned_abs() as usize)..=lmax {
                let k = lm_index(l, m);
                let dp = table.dp_dtheta(l, m);
                let ps = im * table.p_over_sin(l, m);
                a += v.s[k] * dp - v.t[k] * ps;
                b += v.s[k] * ps + v.t[k] * dp;
                c += v.x[k] * table.p(l, m);
            }
            let o = (m + lmax as i64) as usize;
            ft[o] = a * INV_SQRT_2PI;
            fp[o] = b * INV_SQRT_2PI;
            fr[o] = c * INV_SQRT_2PI;
        }
        for j in 0..grid.n_phi {
            let phi = grid.phi[j];
            let (mut a, mut b, mut c) = (zero, zero, zero);
            for m in -(lmax as i64)..=(lmax as i64) {
                let e = Complex64::new(cos(m as f64 * phi), sin(m as f64 * phi));
                let o = (m + lmax as i64) as usize;
                a += ft[o] * e;
                b += fp[o] * e;
                c += fr[o] * e;
            }
            out[i * grid.n_phi + j] = frame_vec(grid.coord(i, j), a, b, c);
        }
    }
    out
}

/// Projects Cartesian vector samples onto the three harmonic families.
pub fn vector_analysis(grid: &SphereGrid, data: &[CVec3], lmax: usize) -> Result<VectorSpectrum> {
    grid.check_resolves(lmax)?;
    if data.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: data.len() });
    }
    let nm = 2 * lmax + 1;
    let comp = |i: usize, j: usize, which: usize| -> Complex64 {
        let c = grid.coord(i, j);
        let (et, ep) = c.frame();
        let v = data[i * grid.n_phi + j];
        match which {
            0 => v.dot_real(et),
            1 => v.dot_real(ep),
            _ => v.dot_real(Vec3::from(c.to_unit())),
        }
    };
    let rt = fourier_rows(grid, lmax, |i, j| comp(i, j, 0));
    let rp = fourier_rows(grid, lmax, |i, j| comp(i, j, 1));
    let rr = fourier_rows(grid, lmax, |i, j| comp(i, j, 2));
    let mut out = VectorSpectrum::zeros(lmax);
    for i in 0..grid.n_theta {
        let table = LegendreTable::new(lmax, grid.cos_theta[i]);
        let w = grid.lat_weights[i] * INV_SQRT_2PI;
        for m in -(lmax as i64)..=(lmax as i64) {
            let o = i * nm + (m + lmax as i64) as usize;
            let (vt, vp, vr) = (rt[o] * w, rp[o] * w, rr[o] * w);
            let im = Complex64::new(0.0, m as f64);
            for l in (m.unsigned_abs() as usize)..=lmax {
                let k = lm_index(l, m);
                let dp = table.dp_dtheta(l, m);
                let ps = im * table.p_over_sin(l, m);
                out.x[k] += vr * table.p(l, m);
                if l > 0 {
                    let inv = 1.0 / (l * (l + 1)) as f64;
                    out.s[k] += (vt * dp - vp * ps) * inv;
                    out.t[k] += (vp * dp + vt * ps) * inv;
                }
            }
        }
    }
    Ok(out)
}

/// Vector transform input.
pub enum VectorData<'a> {
    Spectrum(&'a VectorSpectrum),
    Samples(&'a [CVec3], usize),
}

/// Output of [`vector_transform`].
#[derive(Debug, Clone, PartialEq)]
pub enum VectorTransformed {
    Spectrum(VectorSpectrum),
    Samples(Vec<CVec3>),
}

/// Vector analysis or synthesis.
pub fn vector_transform(
    direction: Direction,
    grid: &SphereGrid,
    data: VectorData<'_>,
) -> Result<VectorTransformed> {
    match (direction, data) {
        (Direction::Synthesis, VectorData::Spectrum(v)) => {
            Ok(VectorTransformed::Samples(vector_synthesis(grid, v)))
        }
        (Direction::Analysis, VectorData::Samples(d, lmax)) => {
            Ok(VectorTransformed::Spectrum(vector_analysis(grid, d, lmax)?))
        }
        _ => Err(Error::TypeMismatch("direction does not match data")),
    }
}

/// Either kind of spectrum.
#[derive(Debug, Clone, Copy)]
pub enum SpectrumRef<'a> {
    Scalar(&'a ScalarSpectrum),
    Vector(&'a VectorSpectrum),
}

/// Sobolev `H^s` norm computed from coefficients.
///
/// ```
/// use nlsphere::harmonics::{sobolev_norm, ScalarSpectrum, SpectrumRef};
/// let u = ScalarSpectrum::mode(2, 1, 0).unwrap();
/// assert!((sobolev_norm(SpectrumRef::Scalar(&u), 1.0) - 1.5).abs() < 1e-15);
/// ```
pub fn sobolev_norm(spectrum: SpectrumRef<'_>, s: f64) -> f64 {
    let mut acc = 0.0;
    match spectrum {
        SpectrumRef::Scalar(u) => {
            for l in 0..=u.lmax {
                let w = pow(l as f64 + 0.5, 2.0 * s);
                for m in -(l as i64)..=(l as i64) {
                    acc += w * u.coeffs[lm_index(l, m)].norm_sqr();
                }
            }
        }
        SpectrumRef::Vector(v) => {
            for l in 0..=v.lmax {
                let w = pow(l as f64 + 0.5, 2.0 * s);
                let w2 = w * (l as f64 + 0.5) * (l as f64 + 0.5);
                for m in -(l as i64)..=(l as i64) {
                    let k = lm_index(l, m);
                    acc += w2 * (v.s[k].norm_sqr() + v.t[k].norm_sqr()) + w * v.x[k].norm_sqr();
                }
            }
        }
    }
    sqrt(acc)
}

/// Coefficients of a real field: `u_{ℓ,−m} = (−1)^m conj(u_{ℓ,m})`.
fn real_symmetric(lmax: usize, normal: &mut dyn FnMut() -> f64) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n_coeffs(lmax)];
    for l in 0..=lmax {
        c[lm_index(l, 0)] = Complex64::new(normal(), 0.0);
        for m in 1..=(l as i64) {
            let v = Complex64::new(normal(), normal()) * core::f64::consts::FRAC_1_SQRT_2;
            c[lm_index(l, m)] = v;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            c[lm_index(l, -m)] = v.conj() * sign;
        }
    }
    c
}

/// Random real scalar field with unit L² norm, coefficients drawn from `normal`.
pub fn random_scalar_spectrum(lmax: usize, normal: &mut dyn FnMut() -> f64) -> ScalarSpectrum {
    let mut u = ScalarSpectrum { lmax, coeffs: real_symmetric(lmax, normal) };
    let n = sqrt(u.l2_norm_sqr());
    if n > 0.0 {
        u.coeffs.iter_mut().for_each(|c| *c /= n);
    }
    u
}

/// Random real vector field with unit L² norm.
pub fn random_vector_spectrum(lmax: usize, normal: &mut dyn FnMut() -> f64) -> VectorSpectrum {
    let mut v = VectorSpectrum {
        lmax,
        s: real_symmetric(lmax, normal),
        t: real_symmetric(lmax, normal),
        x: real_symmetric(lmax, normal),
    };
    v.s[0] = Complex64::new(0.0, 0.0);
    v.t[0] = Complex64::new(0.0, 0.0);
    let n = sqrt(v.l2_norm_sqr());
    if n > 0.0 {
        for c in v.s.iter_mut().chain(v.t.iter_mut()).chain(v.x.iter_mut()) {
            *c /= n;
        }
    }
    v
}
