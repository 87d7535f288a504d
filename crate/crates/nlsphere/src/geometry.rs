//! Points, frames and rotations on the unit sphere.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use libm::{acos, atan2, cos, sin, sqrt};
use num_complex::Complex64;

use crate::{Error, Result};

/// A point of 𝕊² in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A point of 𝕊² in colatitude/longitude form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphCoord {
    /// Colatitude in `[0, π]`.
    pub theta: f64,
    /// Longitude in `[0, 2π)`.
    pub phi: f64,
}

/// A tangent vector given in the `(e_θ, e_φ)` frame at its base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub v_theta: f64,
    pub v_phi: f64,
    pub base: SphCoord,
}

impl UnitVector3 {
    /// Normalizes `(x, y, z)`; rejects non-finite or zero input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinates"));
        }
        let r = sqrt(x * x + y * y + z * z);
        if r == 0.0 {
            return Err(Error::InvalidInput("zero vector has no direction"));
        }
        Ok(Self { x: x / r, y: y / r, z: z / r })
    }

    pub const NORTH: Self = Self { x: 0.0, y: 0.0, z: 1.0 };

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn to_sph(self) -> SphCoord {
        let theta = acos(self.z.clamp(-1.0, 1.0));
        let rho = sqrt(self.x * self.x + self.y * self.y);
        let phi = if rho == 0.0 {
            0.0
        } else {
            let p = atan2(self.y, self.x);
            if p < 0.0 {
                let q = p + 2.0 * PI;
                if q >= 2.0 * PI {
                    0.0
                } else {
                    q
                }
            } else {
                p
            }
        };
        SphCoord { theta, phi }
    }

    /// Local frame `(e_θ, e_φ)` at this point; φ is canonicalized to 0 at the poles.
    pub fn frame(self) -> (Vec3, Vec3) {
        self.to_sph().frame()
    }
}

impl SphCoord {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidInput("non-finite angles"));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidInput("theta outside [0, pi]"));
        }
        let mut p = phi % (2.0 * PI);
        if p < 0.0 {
            p += 2.0 * PI;
        }
        if p >= 2.0 * PI {
            p = 0.0;
        }
        if theta == 0.0 || theta == PI {
            p = 0.0;
        }
        Ok(Self { theta, phi: p })
    }

    pub fn to_unit(self) -> UnitVector3 {
        let s = sin(self.theta);
        UnitVector3 { x: s * cos(self.phi), y: s * sin(self.phi), z: cos(self.theta) }
    }

    /// `(e_θ, e_φ)` as Cartesian vectors.
    pub fn frame(self) -> (Vec3, Vec3) {
        let (st, ct) = (sin(self.theta), cos(self.theta));
        let (sp, cp) = (sin(self.phi), cos(self.phi));
        (Vec3([ct * cp, ct * sp, -st]), Vec3([-sp, cp, 0.0]))
    }
}

impl TangentVector {
    pub fn to_cartesian(self) -> Vec3 {
        let (et, ep) = self.base.frame();
        et * self.v_theta + ep * self.v_phi
    }
}

/// Either representation of a point, for [`convert`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Sph(SphCoord),
    Cart(UnitVector3),
}

/// Converts a point to the other representation.
///
/// ```
/// use nlsphere::geometry::{convert, Point, SphCoord, UnitVector3};
/// let p = convert(Point::Cart(UnitVector3::new(0.0, 0.0, -1.0).unwrap())).unwrap();
/// assert_eq!(p, Point::Sph(SphCoord { theta: std::f64::consts::PI, phi: 0.0 }));
/// ```
pub fn convert(p: Point) -> Result<Point> {
    match p {
        Point::Sph(s) => {
            let s = SphCoord::new(s.theta, s.phi)?;
            Ok(Point::Cart(s.to_unit()))
        }
        Point::Cart(c) => {
            let c = UnitVector3::new(c.x, c.y, c.z)?;
            Ok(Point::Sph(c.to_sph()))
        }
    }
}

/// Chordal distance `√(2(1 − x·y))`.
pub fn euclidean_distance(x: UnitVector3, y: UnitVector3) -> f64 {
    let t = x.dot(y).clamp(-1.0, 1.0);
    sqrt(2.0 * (1.0 - t))
}

/// A real 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub fn dot(self, o: Self) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }
    pub fn cross(self, o: Self) -> Self {
        let (a, b) = (self.0, o.0);
        Vec3([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
    }
    pub fn norm(self) -> f64 {
        sqrt(self.dot(self))
    }
    pub fn complex(self) -> CVec3 {
        CVec3([self.0[0].into(), self.0[1].into(), self.0[2].into()])
    }
}

impl From<UnitVector3> for Vec3 {
    fn from(u: UnitVector3) -> Self {
        Vec3([u.x, u.y, u.z])
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}
impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}
impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}
impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// A complex 3-vector; vector harmonics are complex-valued.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub const ZERO: Self = CVec3([Complex64::new(0.0, 0.0); 3]);

    /// Bilinear dot product (no conjugation).
    pub fn dot(self, o: Self) -> Complex64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }
    pub fn dot_real(self, v: Vec3) -> Complex64 {
        self.0[0] * v.0[0] + self.0[1] * v.0[1] + self.0[2] * v.0[2]
    }
    pub fn cross(self, o: Self) -> Self {
        let (a, b) = (self.0, o.0);
        CVec3([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
    }
    /// `v × self` for a real `v`.
    pub fn cross_left(self, v: Vec3) -> Self {
        v.complex().cross(self)
    }
    pub fn scale(self, c: Complex64) -> Self {
        CVec3([self.0[0] * c, self.0[1] * c, self.0[2] * c])
    }
    pub fn conj(self) -> Self {
        CVec3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }
    pub fn norm(self) -> f64 {
        sqrt(self.0.iter().map(|c| c.norm_sqr()).sum::<f64>())
    }
    pub fn re(self) -> Vec3 {
        Vec3([self.0[0].re, self.0[1].re, self.0[2].re])
    }
}

impl Add for CVec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CVec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}
impl Sub for CVec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CVec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}
impl Neg for CVec3 {
    type Output = Self;
    fn neg(self) -> Self {
        CVec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}
impl Mul<f64> for CVec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// Proper rotation taking the north pole to a given point.
///
/// Built with the Rodrigues formula about `ẑ × x`; columns are the images of
/// `x̂, ŷ, ẑ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleRotation {
    m: [[f64; 3]; 3],
}

impl PoleRotation {
    pub fn to_point(x: UnitVector3) -> Self {
        let c = x.z;
        // axis k = ẑ × x = (−y, x, 0), |k| = sin angle
        let (kx, ky) = (-x.y, x.x);
        let s2 = kx * kx + ky * ky;
        let m = if s2 < 1e-30 {
            if c > 0.0 {
                [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
            } else {
                // half turn about x̂
                [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
            }
        } else {
            // R = c I + [k]× + k kᵀ (1 − c)/s²
            let f = (1.0 - c) / s2;
            [
                [c + kx * kx * f, kx * ky * f, ky],
                [kx * ky * f, c + ky * ky * f, -kx],
                [-ky, kx, c],
            ]
        };
        Self { m }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        let a = v.0;
        Vec3([
            m[0][0] * a[0] + m[0][1] * a[1] + m[0][2] * a[2],
            m[1][0] * a[0] + m[1][1] * a[1] + m[1][2] * a[2],
            m[2][0] * a[0] + m[2][1] * a[1] + m[2][2] * a[2],
        ])
    }

    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        let a = v.0;
        Vec3([
            m[0][0] * a[0] + m[1][0] * a[1] + m[2][0] * a[2],
            m[0][1] * a[0] + m[1][1] * a[1] + m[2][1] * a[2],
            m[0][2] * a[0] + m[1][2] * a[1] + m[2][2] * a[2],
        ])
    }

    /// Images of `x̂` and `ŷ`: an orthonormal tangent basis at the target point.
    pub fn tangent_basis(&self) -> (Vec3, Vec3) {
        let m = &self.m;
        (Vec3([m[0][0], m[1][0], m[2][0]]), Vec3([m[0][1], m[1][1], m[2][1]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_conversions() {
        let n = SphCoord::new(0.0, 0.0).unwrap().to_unit();
        assert_eq!(n.to_array(), [0.0, 0.0, 1.0]);
        let e = SphCoord::new(PI / 2.0, 0.0).unwrap().to_unit();
        assert!((e.x - 1.0).abs() < 1e-15 && e.y.abs() < 1e-15 && e.z.abs() < 1e-15);
        let s = UnitVector3::new(0.0, 0.0, -1.0).unwrap().to_sph();
        assert_eq!(s, SphCoord { theta: PI, phi: 0.0 });
        assert!(UnitVector3::new(f64::NAN, 0.0, 1.0).is_err());
        assert!(SphCoord::new(4.0, 0.0).is_err());
    }

    #[test]
    fn distances() {
        let a = UnitVector3::new(1.0, 0.0, 0.0).unwrap();
        let b = UnitVector3::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(euclidean_distance(a, a), 0.0);
        assert_eq!(euclidean_distance(a, UnitVector3::new(-1.0, 0.0, 0.0).unwrap()), 2.0);
        assert!((euclidean_distance(a, b) - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rotation_maps_pole() {
        for &(x, y, z) in &[(0.3, -0.2, 0.9), (0.0, 0.0, -1.0), (1.0, 0.0, 0.0), (-0.5, 0.5, -0.7)] {
            let p = UnitVector3::new(x, y, z).unwrap();
            let r = PoleRotation::to_point(p);
            let img = r.apply(Vec3([0.0, 0.0, 1.0]));
            assert!((img - Vec3::from(p)).norm() < 1e-14);
            let (e1, e2) = r.tangent_basis();
            assert!(e1.dot(Vec3::from(p)).abs() < 1e-14);
            assert!(e2.dot(Vec3::from(p)).abs() < 1e-14);
            assert!((e1.cross(e2) - Vec3::from(p)).norm() < 1e-14);
            let back = r.apply_inverse(Vec3::from(p));
            assert!((back - Vec3([0.0, 0.0, 1.0])).norm() < 1e-14);
        }
    }
}
