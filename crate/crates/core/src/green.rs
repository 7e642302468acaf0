//! Free-space dyadic Green's tensor of the vector Helmholtz equation.
//!
//! With `x = k r` and `e` the unit separation vector,
//!
//! ```text
//! G(r, w) = e^{ix} / (4 pi k^2 r^3) * [ h(x) e(x)e - f(x) 1 ]
//! f(x) = 1 - i x - x^2,   h(x) = 3 - 3 i x - x^2
//! ```
//!
//! This is the causal propagator: `Im G(r, r) = k / 6 pi` on the diagonal and
//! the static limit reproduces the dipole field `(3 e(x)e - 1) / (4 pi k^2 r^3)`.
//! `G` carries units of 1/m so that `mu0 w^2 G p` is an electric field.
//!
//! Internally the tensor is written as `(B e(x)e - A 1) / (4 pi r)` with
//! `A = e^{ix} f / x^2` and `B = e^{ix} h / x^2`. Both are entire apart from
//! the double pole and are summed as power series for small `|x|`, where the
//! closed form loses digits to cancellation.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};

/// Real 3x3 matrix, row-major.
pub type RealTensor3 = [[f64; 3]; 3];

/// 3x3 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTensor3(pub [[Complex64; 3]; 3]);

impl ComplexTensor3 {
    pub fn zeros() -> Self {
        Self([[Complex64::new(0.0, 0.0); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diagonal(Complex64::new(1.0, 0.0))
    }

    pub fn diagonal(v: Complex64) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            t.0[i][i] = v;
        }
        t
    }

    pub fn from_real(m: &RealTensor3) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = Complex64::new(m[i][j], 0.0);
            }
        }
        t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn re(&self) -> RealTensor3 {
        self.0.map(|row| row.map(|z| z.re))
    }

    pub fn im(&self) -> RealTensor3 {
        self.0.map(|row| row.map(|z| z.im))
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `u^dagger . G . v` for complex 3-vectors.
    pub fn sandwich(&self, u: &[Complex64; 3], v: &[Complex64; 3]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += u[i].conj() * self.0[i][j] * v[j];
            }
        }
        acc
    }

    /// `R . G . R^T` for a real matrix `R`.
    pub fn rotate(&self, rot: &RealTensor3) -> Self {
        let r = Self::from_real(rot);
        r * *self * r.transpose()
    }
}

impl Mul for ComplexTensor3 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        t
    }
}

impl Mul<Complex64> for ComplexTensor3 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        Self(self.0.map(|row| row.map(|z| z * s)))
    }
}

impl Mul<f64> for ComplexTensor3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|row| row.map(|z| z * s)))
    }
}

impl Add for ComplexTensor3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut t = self;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] += rhs.0[i][j];
            }
        }
        t
    }
}

impl Sub for ComplexTensor3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs * -1.0
    }
}

/// Displacement `r2 - r1` between two points [m].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub d: [f64; 3],
}

impl Separation {
    pub fn new(d: [f64; 3]) -> Result<Self> {
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("separation components must be finite"));
        }
        Ok(Self { d })
    }

    /// Separation of length `r` along `x`, the inter-sphere axis.
    pub fn along_x(r: f64) -> Self {
        Self { d: [r, 0.0, 0.0] }
    }

    /// In-plane separation at angle `phi` from the `x` axis.
    pub fn in_plane(r: f64, phi: f64) -> Self {
        Self {
            d: [r * phi.cos(), r * phi.sin(), 0.0],
        }
    }

    pub fn distance(&self) -> f64 {
        let [x, y, z] = self.d;
        x.hypot(y).hypot(z)
    }

    /// Unit vector along the separation.
    pub fn unit(&self) -> Result<[f64; 3]> {
        let r = self.distance();
        if r == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        Ok(self.d.map(|v| v / r))
    }

    pub fn reversed(&self) -> Self {
        Self {
            d: self.d.map(|v| -v),
        }
    }

    pub fn rotated(&self, rot: &RealTensor3) -> Self {
        let mut d = [0.0; 3];
        for (i, di) in d.iter_mut().enumerate() {
            *di = (0..3).map(|j| rot[i][j] * self.d[j]).sum();
        }
        Self { d }
    }
}

/// `f(x) = 1 - i x - x^2`.
pub fn helper_f(x: Complex64) -> Complex64 {
    1.0 - Complex64::i() * x - x * x
}

/// `h(x) = 3 - 3 i x - x^2`.
pub fn helper_h(x: Complex64) -> Complex64 {
    3.0 - 3.0 * Complex64::i() * x - x * x
}

/// Below this `|kr|` the scalar kernels are summed as series.
const SERIES_RADIUS: f64 = 0.5;

/// Scalar kernels `(A, B) = (e^{ix} f(x), e^{ix} h(x)) / x^2`.
///
/// With `y = i x` the Taylor coefficients are `e^y f = sum (n-1)^2 y^n / n!`
/// and `e^y h = sum (n-1)(n-3) y^n / n!`; dividing by `x^2 = -y^2` leaves a
/// Laurent series starting at `y^-2`.
pub(crate) fn kernels(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() >= SERIES_RADIUS {
        let e = (Complex64::i() * x).exp();
        let x2 = x * x;
        return (e * helper_f(x) / x2, e * helper_h(x) / x2);
    }
    let y = Complex64::i() * x;
    // y^n / n! accumulated; the sums are then divided by -y^2.
    let mut pw = Complex64::new(1.0, 0.0);
    let mut sa = Complex64::new(0.0, 0.0);
    let mut sb = Complex64::new(0.0, 0.0);
    for n in 0..40u32 {
        if n > 0 {
            pw = pw * y / n as f64;
        }
        let nf = n as f64;
        let ta = pw * (nf - 1.0) * (nf - 1.0);
        let tb = pw * (nf - 1.0) * (nf - 3.0);
        sa += ta;
        sb += tb;
        if n > 4 && pw.norm() < 1e-18 {
            break;
        }
    }
    let y2 = y * y;
    (-sa / y2, -sb / y2)
}

fn tensor_from_kernels(e: &[f64; 3], a: Complex64, b: Complex64, r: f64) -> ComplexTensor3 {
    let pre = 1.0 / (4.0 * std::f64::consts::PI * r);
    let mut t = ComplexTensor3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut v = b * (e[i] * e[j]);
            if i == j {
                v -= a;
            }
            t.0[i][j] = v * pre;
        }
    }
    t
}

fn checked_geometry(separation: &Separation) -> Result<(f64, [f64; 3])> {
    let r = separation.distance();
    if !r.is_finite() {
        return Err(Error::InvalidSeparation(r));
    }
    let e = separation.unit()?;
    Ok((r, e))
}

/// Green's tensor at real angular frequency `omega > 0`.
pub fn green_free(separation: &Separation, omega: f64) -> Result<ComplexTensor3> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!("omega must be > 0, got {omega}")));
    }
    green_free_complex(separation, Complex64::new(omega, 0.0))
}

/// Green's tensor at a complex frequency in the closed upper half plane.
pub fn green_free_complex(separation: &Separation, omega: Complex64) -> Result<ComplexTensor3> {
    let (r, e) = checked_geometry(separation)?;
    if omega.norm() == 0.0 {
        return Err(Error::invalid("omega must be nonzero"));
    }
    let (a, b) = kernels(omega * r / C);
    Ok(tensor_from_kernels(&e, a, b, r))
}

/// Imaginary part of the coincidence limit, `(k / 6 pi) 1`, returned as a
/// tensor with zero real part. The divergent real part is never formed.
pub fn green_free_im_coincident(omega: f64) -> Result<ComplexTensor3> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!("omega must be > 0, got {omega}")));
    }
    let k = omega / C;
    Ok(ComplexTensor3::diagonal(Complex64::new(
        0.0,
        k / (6.0 * std::f64::consts::PI),
    )))
}

/// Green's tensor at imaginary frequency `i xi`; real and decaying as
/// `e^{-xi r / c}`.
pub fn green_free_imag_axis(separation: &Separation, xi: f64) -> Result<RealTensor3> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("xi must be > 0, got {xi}")));
    }
    let (r, e) = checked_geometry(separation)?;
    let u = xi * r / C;
    // x = i u, so e^{ix} f / x^2 = -e^{-u}(1 + u + u^2)/u^2 and likewise for h.
    let (a, b) = if u < SERIES_RADIUS {
        let (a, b) = kernels(Complex64::new(0.0, u));
        (a.re, b.re)
    } else {
        let em = (-u).exp() / (u * u);
        (-em * (1.0 + u + u * u), -em * (3.0 + 3.0 * u + u * u))
    };
    let pre = 1.0 / (4.0 * std::f64::consts::PI * r);
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = b * e[i] * e[j];
            if i == j {
                v -= a;
            }
            t[i][j] = v * pre;
        }
    }
    Ok(t)
}
