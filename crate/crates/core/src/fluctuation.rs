//! Thermal Casimir-Polder interaction between two polarizable spheres.
//!
//! The exact potential is
//!
//! ```text
//! U(r) = -(hbar c / pi r^7) (R_A R_B)^3 Im int_0^inf dx a_A a_B e^{2ix} P(x) coth(a x)
//! P(x) = 3 - 6(ix) + 5(ix)^2 - 2(ix)^3 + (ix)^4,   a = hbar c / (2 k_B T r)
//! ```
//!
//! with `a_A = (eps - 1)/(eps + 2)` evaluated at `w = x c / r`. It is computed
//! two independent ways:
//!
//! * [`cp_full_matsubara`] closes the contour in the upper half plane and sums
//!   the residues of `coth` at the Matsubara frequencies `xi_n = 2 pi n k_B T / hbar`,
//!   `U = -2 k_B T (R_A R_B / r^2)^3 sum'_n a_A a_B e^{-2u} Q(u)` with
//!   `u = xi_n r / c` and `Q(u) = 3 + 6u + 5u^2 + 2u^3 + u^4`.
//! * [`cp_full_quadrature`] integrates the real-frequency expression directly.
//!   Because `a^2 x^4` tends to a constant the real-axis integrand never
//!   decays, so by default the path is rotated onto the ray `x = s e^{i theta}`
//!   where `e^{2ix}` is exponentially damped. The `coth` pole at the origin is
//!   subtracted analytically.
//!
//! The closed-form regime approximations are [`cp_near`], [`cp_intermediate`]
//! and [`cp_far`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{C, HBAR, K_B, MU0};
use crate::error::{Error, Result};
use crate::green::{green_free_complex, Separation};
use crate::material::{
    alpha_tilde_complex, alpha_tilde_imag, dimensionless_moments_pair, GroundMomentContour, Sphere,
    MATSUBARA_CAP, MATSUBARA_TAIL,
};
use crate::quadrature::{integrate, wynn_epsilon, Tolerance};

/// Ratio of the closed-form far-field asymptote `-6 k_B T (R/r)^6 a(0)^2` to the
/// exact zero-frequency Matsubara term `-3 k_B T (R/r)^6 a(0)^2`.
pub const FAR_FIELD_FORM_RATIO: f64 = 2.0;

/// Temperature of the thermal bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnvironment {
    pub temperature: f64,
}

impl ThermalEnvironment {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature must be >= 0 K, got {temperature}"
            )));
        }
        Ok(Self { temperature })
    }

    pub fn kt(&self) -> f64 {
        K_B * self.temperature
    }

    /// `hbar c / k_B T`; infinite at `T = 0`.
    pub fn thermal_wavelength(&self) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            HBAR * C / self.kt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpMethod {
    Matsubara,
    Quadrature,
    Explicit,
    Near,
    Intermediate,
    Far,
}

impl CpMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CpMethod::Matsubara => "matsubara",
            CpMethod::Quadrature => "quadrature",
            CpMethod::Explicit => "explicit",
            CpMethod::Near => "near",
            CpMethod::Intermediate => "intermediate",
            CpMethod::Far => "far",
        }
    }
}

impl fmt::Display for CpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpResult {
    /// Potential energy [J].
    pub value: f64,
    pub method: CpMethod,
    /// Matsubara terms summed or integrand evaluations used.
    pub terms_used: usize,
    /// Estimated relative error.
    pub est_error: f64,
}

impl CpResult {
    fn closed_form(value: f64, method: CpMethod) -> Self {
        Self {
            value,
            method,
            terms_used: 0,
            est_error: 0.0,
        }
    }

    pub fn kelvin(&self) -> f64 {
        self.value / K_B
    }
}

/// Integration path for the real-frequency quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contour {
    /// The literal real axis, summed over half-period cells with Wynn's
    /// epsilon acceleration. Only well conditioned for dispersive
    /// polarizabilities and separations up to a few hundred nanometres.
    RealAxis,
    /// The ray `x = s e^{i angle}`, `0 < angle < pi/2`.
    Ray { angle: f64 },
}

/// Frequency dependence of the polarizability entering the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizabilityModel {
    #[default]
    Dispersive,
    /// Frozen at its static value `a(0)`.
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub contour: Contour,
    pub polarizability: PolarizabilityModel,
    /// Relative tolerance of the adaptive quadrature.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            contour: Contour::Ray { angle: FRAC_PI_4 },
            polarizability: PolarizabilityModel::Dispersive,
            rel_tol: 1e-10,
        }
    }
}

fn check_separation(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidSeparation(r));
    }
    Ok(())
}

fn positive_temperature(env: &ThermalEnvironment, what: &str) -> Result<f64> {
    if env.temperature > 0.0 {
        Ok(env.temperature)
    } else {
        Err(Error::invalid(format!("{what} requires T > 0")))
    }
}

/// `(R_A R_B)^3`.
fn radii_product(a: &Sphere, b: &Sphere) -> f64 {
    (a.radius * b.radius).powi(3)
}

fn static_alpha_product(a: &Sphere, b: &Sphere) -> f64 {
    alpha_tilde_imag(&a.material, 0.0) * alpha_tilde_imag(&b.material, 0.0)
}

/// `Q(u) = 3 + 6u + 5u^2 + 2u^3 + u^4`, the rotated polynomial.
#[inline]
fn q_poly(u: f64) -> f64 {
    3.0 + u * (6.0 + u * (5.0 + u * (2.0 + u)))
}

/// `P(x)` with `y = i x`.
#[inline]
fn p_poly(x: Complex64) -> Complex64 {
    let y = Complex64::i() * x;
    3.0 + y * (-6.0 + y * (5.0 + y * (-2.0 + y)))
}

/// Exact potential from the Matsubara residue sum.
pub fn cp_full_matsubara(
    a: &Sphere,
    b: &Sphere,
    r: f64,
    env: &ThermalEnvironment,
) -> Result<CpResult> {
    cp_full_matsubara_with(a, b, r, env, PolarizabilityModel::Dispersive)
}

pub fn cp_full_matsubara_with(
    a: &Sphere,
    b: &Sphere,
    r: f64,
    env: &ThermalEnvironment,
    model: PolarizabilityModel,
) -> Result<CpResult> {
    check_separation(r)?;
    let t = positive_temperature(env, "the Matsubara sum")?;
    let step = TAU * K_B * t / HBAR;
    let alpha0 = static_alpha_product(a, b);
    let alpha = |xi: f64| match model {
        PolarizabilityModel::Dispersive => {
            alpha_tilde_imag(&a.material, xi) * alpha_tilde_imag(&b.material, xi)
        }
        PolarizabilityModel::Static => alpha0,
    };

    let mut sum = 0.5 * q_poly(0.0) * alpha0;
    let mut n = 0usize;
    let mut last;
    loop {
        n += 1;
        if n > MATSUBARA_CAP {
            return Err(Error::NonConvergent {
                what: "Casimir-Polder Matsubara sum",
                terms: MATSUBARA_CAP,
            });
        }
        let xi = n as f64 * step;
        let u = xi * r / C;
        last = alpha(xi) * (-2.0 * u).exp() * q_poly(u);
        sum += last;
        if last < MATSUBARA_TAIL * sum {
            break;
        }
    }
    let value = -2.0 * env.kt() * radii_product(a, b) / r.powi(6) * sum;
    // Terms fall off at least as n^-4 once past the cutoff, bounding the tail.
    let est_error = last * n as f64 / 3.0 / sum;
    Ok(CpResult {
        value,
        method: CpMethod::Matsubara,
        terms_used: n + 1,
        est_error,
    })
}

/// `coth(z) - 1/z` for `Re z >= 0`, stable near the origin and for large `|z|`.
fn coth_minus_pole(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let z2 = z * z;
        return z * (1.0 / 3.0 + z2 * (-1.0 / 45.0 + z2 * (2.0 / 945.0 - z2 / 4725.0)));
    }
    let w = (-2.0 * z).exp();
    (1.0 + w) / (1.0 - w) - 1.0 / z
}

/// The real-frequency integrand with the thermal pole at `x = 0` removed.
///
/// For `T > 0` returns `g(x) coth(a x) - g(0) e^{2ix} / (a x)` where
/// `g = a_A a_B e^{2ix} P`; the subtracted term contributes `g(0) pi / 2a`
/// to `Im int_0^inf`. At `T = 0` returns `g(x)`.
pub(crate) struct CpIntegrand<'s> {
    a: &'s Sphere,
    b: &'s Sphere,
    /// Frequency per unit `x`, `c / r`.
    omega_scale: f64,
    /// `hbar c / (2 k_B T r)`, zero at `T = 0`.
    thermal: f64,
    model: PolarizabilityModel,
    g0: f64,
}

impl<'s> CpIntegrand<'s> {
    pub(crate) fn new(
        a: &'s Sphere,
        b: &'s Sphere,
        r: f64,
        env: &ThermalEnvironment,
        model: PolarizabilityModel,
    ) -> Self {
        let thermal = if env.temperature > 0.0 {
            HBAR * C / (2.0 * env.kt() * r)
        } else {
            0.0
        };
        Self {
            a,
            b,
            omega_scale: C / r,
            thermal,
            model,
            g0: 3.0 * static_alpha_product(a, b),
        }
    }

    fn alpha(&self, x: Complex64) -> Complex64 {
        match self.model {
            PolarizabilityModel::Dispersive => {
                let w = x * self.omega_scale;
                alpha_tilde_complex(&self.a.material, w) * alpha_tilde_complex(&self.b.material, w)
            }
            PolarizabilityModel::Static => Complex64::new(self.g0 / 3.0, 0.0),
        }
    }

    pub(crate) fn eval(&self, x: Complex64) -> Complex64 {
        let e2 = (2.0 * Complex64::i() * x).exp();
        let ap = self.alpha(x) * p_poly(x);
        if self.thermal == 0.0 {
            return ap * e2;
        }
        let z = x * self.thermal;
        e2 * ((ap - self.g0) / z + ap * coth_minus_pole(z))
    }

    /// Analytic contribution of the subtracted pole to `Im int`.
    fn pole_term(&self) -> f64 {
        if self.thermal == 0.0 {
            0.0
        } else {
            self.g0 * FRAC_PI_2 / self.thermal
        }
    }
}

/// Breakpoints in `s` spanning every scale of the integrand: the two
/// resonances, the thermal length and the retardation length.
fn ray_breakpoints(a: &Sphere, b: &Sphere, r: f64, thermal: f64, s_max: f64) -> Vec<f64> {
    let mut scales = vec![1.0];
    for m in [&a.material, &b.material] {
        scales.push(m.omega_t1 * r / C);
        scales.push(m.omega_t2 * r / C);
    }
    if thermal > 0.0 {
        scales.push(1.0 / thermal);
    }
    let lo = scales.iter().copied().fold(f64::INFINITY, f64::min) * 1e-3;
    let mut pts = vec![0.0];
    let decades = (s_max / lo).log10().ceil() as usize;
    for i in 0..=4 * decades {
        let s = lo * 10f64.powf(i as f64 / 4.0);
        if s < s_max {
            pts.push(s);
        }
    }
    for &s in &scales {
        for f in [0.5, 1.0, 2.0] {
            if s * f > lo && s * f < s_max {
                pts.push(s * f);
            }
        }
    }
    pts.push(s_max);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
    pts
}

struct ImIntegral {
    value: f64,
    abs_error: f64,
    evaluations: usize,
}

fn ray_integral(
    f: &dyn Fn(Complex64) -> Complex64,
    angle: f64,
    pts: &[f64],
    rel_tol: f64,
) -> Result<ImIntegral> {
    let dir = Complex64::from_polar(1.0, angle);
    let tol = Tolerance {
        abs: 0.0,
        rel: rel_tol,
        max_intervals: 50_000,
    };
    let res = integrate(|s| f(dir * s) * dir, pts, tol)?;
    Ok(ImIntegral {
        value: res.value.im,
        abs_error: res.abs_error,
        evaluations: res.evaluations,
    })
}

/// Real-axis integration over half-period cells of `e^{2ix}`, accelerated
/// with Wynn's epsilon over the partial sums.
fn real_axis_integral(
    f: &dyn Fn(Complex64) -> Complex64,
    first_scale: &[f64],
    x_settle: f64,
    rel_tol: f64,
) -> Result<ImIntegral> {
    const CELL: f64 = FRAC_PI_2;
    const MAX_CELLS: usize = 200_000;
    const WINDOW: usize = 40;
    let cells = ((x_settle / CELL).ceil() as usize).max(4 * WINDOW);
    if cells > MAX_CELLS {
        return Err(Error::QuadratureFailure(format!(
            "real-axis contour needs {cells} half-period cells; use the rotated contour at this separation"
        )));
    }
    let tol = Tolerance {
        abs: 0.0,
        rel: rel_tol,
        max_intervals: 20_000,
    };
    let g = |x: f64| f(Complex64::new(x, 0.0));
    let mut sums = Vec::with_capacity(cells);
    let mut acc = 0.0;
    let mut abs_error = 0.0;
    let mut evaluations = 0;
    for m in 0..cells {
        let lo = m as f64 * CELL;
        let hi = lo + CELL;
        let mut pts = vec![lo];
        pts.extend(first_scale.iter().copied().filter(|&s| s > lo && s < hi));
        pts.push(hi);
        let res = integrate(g, &pts, tol)?;
        acc += res.value.im;
        abs_error += res.abs_error;
        evaluations += res.evaluations;
        sums.push(acc);
    }
    let (value, wynn_err) = wynn_epsilon(&sums[sums.len() - WINDOW..]);
    if !value.is_finite() || wynn_err > 1e-4 * value.abs().max(1e-300) {
        return Err(Error::QuadratureFailure(format!(
            "half-period cell sum did not converge: estimate {value:e}, change {wynn_err:e}"
        )));
    }
    Ok(ImIntegral {
        value,
        abs_error: abs_error + wynn_err,
        evaluations,
    })
}

/// Exact potential by quadrature of the real-frequency integral along the
/// default rotated contour.
pub fn cp_full_quadrature(
    a: &Sphere,
    b: &Sphere,
    r: f64,
    env: &ThermalEnvironment,
) -> Result<CpResult> {
    cp_full_quadrature_with(a, b, r, env, &QuadratureOptions::default())
}

pub fn cp_full_quadrature_with(
    a: &Sphere,
    b: &Sphere,
    r: f64,
    env: &ThermalEnvironment,
    opts: &QuadratureOptions,
) -> Result<CpResult> {
    check_separation(r)?;
    let integrand = CpIntegrand::new(a, b, r, env, opts.polarizability);
    let f = |x: Complex64| integrand.eval(x);
    let im = match opts.contour {
        Contour::Ray { angle } => {
            if !(angle > 0.0 && angle < FRAC_PI_2) {
                return Err(Error::invalid(format!(
                    "contour angle must lie in (0, pi/2), got {angle}"
                )));
            }
            let s_max = 40.0 / angle.sin();
            let pts = ray_breakpoints(a, b, r, integrand.thermal, s_max);
            ray_integral(&f, angle, &pts, opts.rel_tol)?
        }
        Contour::RealAxis => {
            if opts.polarizability == PolarizabilityModel::Static {
                return Err(Error::invalid(
                    "the real-axis contour diverges for a static polarizability; use a rotated contour",
                ));
            }
            let x_t2 = a.material.omega_t2.max(b.material.omega_t2) * r / C;
            let pts = ray_breakpoints(a, b, r, integrand.thermal, FRAC_PI_2);
            ray_axis_guard(real_axis_integral(&f, &pts, 20.0 * x_t2, opts.rel_tol))?
        }
    };
    let total = im.value + integrand.pole_term();
    let value = -(HBAR * C / (PI * r.powi(7))) * radii_product(a, b) * total;
    Ok(CpResult {
        value,
        method: CpMethod::Quadrature,
        terms_used: im.evaluations,
        est_error: im.abs_error / total.abs().max(1e-300),
    })
}

fn ray_axis_guard(r: Result<ImIntegral>) -> Result<ImIntegral> {
    r.map_err(|e| match e {
        Error::QuadratureFailure(msg) => Error::QuadratureFailure(format!("real axis: {msg}")),
        e => e,
    })
}

/// The same potential from the trace form of the second-order interaction,
/// `-(hbar mu0^2 / 2 pi) Im int dw w^4 alpha_A alpha_B Tr[G(w) G(w)] coth(hbar w / 2 k_B T)`,
/// with the full Green's tensor evaluated along the rotated contour. It shares
/// no algebra with the polynomial `P` and serves as a formulation check.
pub fn cp_second_order_explicit(
    a: &Sphere,
    b: &Sphere,
    r: f64,
    env: &ThermalEnvironment,
) -> Result<CpResult> {
    check_separation(r)?;
    let sep = Separation::along_x(r);
    let va = a.volume_factor();
    let vb = b.volume_factor();
    let kernel = |w: Complex64| -> Result<Complex64> {
        let g = green_free_complex(&sep, w)?;
        let alpha =
            alpha_tilde_complex(&a.material, w) * alpha_tilde_complex(&b.material, w) * va * vb;
        Ok(w.powi(4) * MU0 * MU0 * alpha * (g * g).trace())
    };
    // Low-frequency limit of the kernel, real by symmetry.
    let h0 = kernel(Complex64::new(1e-7 * C / r, 0.0))?.re;
    let b_t = if env.temperature > 0.0 {
        HBAR / (2.0 * env.kt())
    } else {
        0.0
    };
    let k_r = r / C;

    let angle = FRAC_PI_4;
    let dir = Complex64::from_polar(1.0, angle);
    let s_max = 40.0 / angle.sin();
    let pts = ray_breakpoints(a, b, r, b_t * C / r, s_max);
    let failed = std::cell::Cell::new(None);
    let f = |s: f64| {
        let w = dir * s / k_r;
        let kern = match kernel(w) {
            Ok(v) => v,
            Err(e) => {
                failed.set(Some(e.to_string()));
                return Complex64::new(0.0, 0.0);
            }
        };
        let val = if b_t == 0.0 {
            kern
        } else {
            let z = w * b_t;
            let e2 = (2.0 * Complex64::i() * w * k_r).exp();
            (kern - h0 * e2) / z + kern * coth_minus_pole(z)
        };
        val * dir / k_r
    };
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-10,
        max_intervals: 50_000,
    };
    let res = integrate(f, &pts, tol)?;
    if let Some(msg) = failed.take() {
        return Err(Error::QuadratureFailure(msg));
    }
    let pole = if b_t > 0.0 { h0 * FRAC_PI_2 / b_t } else { 0.0 };
    let total = res.value.im + pole;
    Ok(CpResult {
        value: -HBAR / TAU * total,
        method: CpMethod::Explicit,
        terms_used: res.evaluations,
        est_error: res.abs_error / total.abs().max(1e-300),
    })
}

/// Non-retarded limit `r << c / w_t2`:
/// `-4 k_B T (R_A R_B / r^2)^3 N_T - (hbar w_t2 / pi)(R_A R_B / r^2)^3 N_0`.
///
/// At `T = 0` the product `k_B T N_T` tends to `hbar w_t2 N_0 / 2 pi`, which is
/// used in place of the vanishing sum.
pub fn cp_near(a: &Sphere, b: &Sphere, r: f64, env: &ThermalEnvironment) -> Result<CpResult> {
    check_separation(r)?;
    let geom = radii_product(a, b) / r.powi(6);
    let hw = HBAR * a.material.omega_t2;
    let (thermal, ground) = if env.temperature > 0.0 {
        let m = dimensionless_moments_pair(
            &a.material,
            &b.material,
            env.temperature,
            GroundMomentContour::ImaginaryAxis,
        )?;
        (env.kt() * m.thermal, m.ground)
    } else {
        let m = dimensionless_moments_pair(
            &a.material,
            &b.material,
            1.0,
            GroundMomentContour::ImaginaryAxis,
        )?;
        (hw * m.ground / TAU, m.ground)
    };
    let value = -4.0 * thermal * geom - hw / PI * geom * ground;
    Ok(CpResult::closed_form(value, CpMethod::Near))
}

/// Retarded zero-temperature limit `c / w_t2 << r << lambda_T`:
/// `-(23/4)(hbar c / pi r)(R_A R_B / r^2)^3 a_A(0) a_B(0)`.
pub fn cp_intermediate(a: &Sphere, b: &Sphere, r: f64) -> Result<CpResult> {
    check_separation(r)?;
    let value = -(23.0 / 4.0) * HBAR * C / (PI * r) * radii_product(a, b) / r.powi(6)
        * static_alpha_product(a, b);
    Ok(CpResult::closed_form(value, CpMethod::Intermediate))
}

/// Classical thermal limit `r >> lambda_T` in its customary closed form,
/// `-6 k_B T (R_A R_B / r^2)^3 a_A(0) a_B(0)`. The exact zero-frequency term
/// is smaller by [`FAR_FIELD_FORM_RATIO`]; see [`cp_far_exact`].
pub fn cp_far(a: &Sphere, b: &Sphere, r: f64, env: &ThermalEnvironment) -> Result<CpResult> {
    check_separation(r)?;
    positive_temperature(env, "the far-field asymptote")?;
    let value = -6.0 * env.kt() * radii_product(a, b) / r.powi(6) * static_alpha_product(a, b);
    Ok(CpResult::closed_form(value, CpMethod::Far))
}

/// Zero-frequency Matsubara term, the true `r >> lambda_T` asymptote.
pub fn cp_far_exact(a: &Sphere, b: &Sphere, r: f64, env: &ThermalEnvironment) -> Result<CpResult> {
    let mut res = cp_far(a, b, r, env)?;
    res.value /= FAR_FIELD_FORM_RATIO;
    Ok(res)
}

/// Exact potential with the default strategy: Matsubara summation for
/// `T > 0`, quadrature at `T = 0` or when the sum fails.
pub fn cp_exact(a: &Sphere, b: &Sphere, r: f64, env: &ThermalEnvironment) -> Result<CpResult> {
    if env.temperature == 0.0 {
        return cp_full_quadrature(a, b, r, env);
    }
    match cp_full_matsubara(a, b, r, env) {
        Ok(v) => Ok(v),
        Err(Error::NonConvergent { .. }) => cp_full_quadrature(a, b, r, env),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(r: f64) -> Sphere {
        Sphere::silica(r).unwrap()
    }

    fn env(t: f64) -> ThermalEnvironment {
        ThermalEnvironment::new(t).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn rotated_polynomial_has_twenty_three_quarters_moment() {
        // int_0^inf Q(u) e^{-2u} du = 3/2 + 6/4 + 10/8 + 12/16 + 24/32.
        let sum: f64 = [3.0 / 2.0, 6.0 / 4.0, 10.0 / 8.0, 12.0 / 16.0, 24.0 / 32.0]
            .iter()
            .sum();
        assert_eq!(sum, 23.0 / 4.0);
    }

    #[test]
    fn p_and_q_agree_on_imaginary_axis() {
        // P(i u) e^{2i(iu)} = Q(u) e^{-2u}.
        for u in [0.0, 0.3, 2.0, 7.5] {
            let p = p_poly(Complex64::new(0.0, u));
            assert!((p.re - q_poly(u)).abs() < 1e-12 * q_poly(u));
            assert!(p.im.abs() < 1e-12);
        }
    }

    #[test]
    fn coth_series_matches_closed_form() {
        for z in [
            Complex64::new(0.099, 0.0),
            Complex64::new(0.07, 0.07),
            Complex64::new(0.0, 0.09),
        ] {
            let w = (-2.0 * z).exp();
            let direct = (1.0 + w) / (1.0 - w) - 1.0 / z;
            assert!((coth_minus_pole(z) - direct).norm() < 1e-11);
        }
    }

    #[test]
    fn integrand_finite_at_origin() {
        let s = sphere(100e-9);
        let f = CpIntegrand::new(&s, &s, 1e-6, &env(300.0), PolarizabilityModel::Dispersive);
        let v1 = f.eval(Complex64::new(1e-9, 0.0));
        let v2 = f.eval(Complex64::new(1e-7, 0.0));
        assert!(v1.re.is_finite() && v1.im.is_finite());
        assert!((v1 - v2).norm() < 1e-3 * (1.0 + v2.norm()));
    }

    #[test]
    fn static_zero_temperature_quadrature_gives_casimir_polder() {
        let s = sphere(100e-9);
        let r = 1e-6;
        let opts = QuadratureOptions {
            polarizability: PolarizabilityModel::Static,
            ..Default::default()
        };
        let q = cp_full_quadrature_with(&s, &s, r, &env(0.0), &opts).unwrap();
        let i = cp_intermediate(&s, &s, r).unwrap();
        assert!(rel(q.value, i.value) < 1e-8, "{} vs {}", q.value, i.value);
    }

    #[test]
    fn intermediate_coefficient() {
        let s = sphere(100e-9);
        let r = 2e-6;
        let u = cp_intermediate(&s, &s, r).unwrap().value;
        let a0 = alpha_tilde_imag(&s.material, 0.0);
        let coeff = u * r.powi(7) * PI / (HBAR * C * 1e-42 * a0 * a0);
        assert!((coeff + 23.0 / 4.0).abs() < 1e-12);
        let u2 = cp_intermediate(&s, &s, 2.0 * r).unwrap().value;
        assert!((u2 / u - 2f64.powi(-7)).abs() < 1e-15);
    }

    #[test]
    fn matsubara_and_quadrature_agree() {
        let s = sphere(100e-9);
        for t in [4.0, 300.0] {
            for r in [5e-9, 80e-9, 1e-6, 2e-5] {
                let m = cp_full_matsubara(&s, &s, r, &env(t)).unwrap();
                let q = cp_full_quadrature(&s, &s, r, &env(t)).unwrap();
                assert!(
                    rel(m.value, q.value) < 1e-6,
                    "T={t} r={r}: {} vs {}",
                    m.value,
                    q.value
                );
            }
        }
    }

    #[test]
    fn real_axis_contour_at_short_range() {
        let s = sphere(20e-9);
        let r = 50e-9;
        let e = env(300.0);
        let opts = QuadratureOptions {
            contour: Contour::RealAxis,
            ..Default::default()
        };
        let q = cp_full_quadrature_with(&s, &s, r, &e, &opts).unwrap();
        let m = cp_full_matsubara(&s, &s, r, &e).unwrap();
        assert!(rel(q.value, m.value) < 5e-3, "{} vs {}", q.value, m.value);
    }

    #[test]
    fn real_axis_contour_rejects_static_model() {
        let s = sphere(20e-9);
        let opts = QuadratureOptions {
            contour: Contour::RealAxis,
            polarizability: PolarizabilityModel::Static,
            ..Default::default()
        };
        assert!(cp_full_quadrature_with(&s, &s, 1e-6, &env(300.0), &opts).is_err());
    }

    #[test]
    fn explicit_trace_form_matches() {
        let s = sphere(100e-9);
        for (r, t) in [(100e-9, 300.0), (1e-6, 300.0), (30e-9, 4.0)] {
            let x = cp_second_order_explicit(&s, &s, r, &env(t)).unwrap();
            let q = cp_full_quadrature(&s, &s, r, &env(t)).unwrap();
            assert!(
                rel(x.value, q.value) < 1e-6,
                "r={r}: {} vs {}",
                x.value,
                q.value
            );
        }
    }

    #[test]
    fn explicit_zero_temperature_matches_ground_state() {
        let s = sphere(100e-9);
        let r = 1e-6;
        let x = cp_second_order_explicit(&s, &s, r, &env(0.0)).unwrap();
        let q = cp_full_quadrature(&s, &s, r, &env(0.0)).unwrap();
        assert!(rel(x.value, q.value) < 1e-6);
        // At 1 um the infrared phonon resonance (c / w_t1 = 2.3 um) is still
        // active, so the dispersive ground state sits well below the static one.
        let i = cp_intermediate(&s, &s, r).unwrap();
        assert!(x.value.abs() < i.value.abs());
        assert!(x.value.abs() > 0.3 * i.value.abs());
    }

    #[test]
    fn far_asymptote_is_twice_zero_frequency_term() {
        let s = sphere(100e-9);
        let e = env(300.0);
        let r = 20.0 * e.thermal_wavelength();
        let full = cp_full_matsubara(&s, &s, r, &e).unwrap().value;
        let far = cp_far(&s, &s, r, &e).unwrap().value;
        let exact = cp_far_exact(&s, &s, r, &e).unwrap().value;
        assert!(rel(far / full, FAR_FIELD_FORM_RATIO) < 1e-6);
        assert!(rel(exact, full) < 1e-6);
        let far2 = cp_far(&s, &s, r, &env(600.0)).unwrap().value;
        assert!(rel(far2 / far, 2.0) < 1e-15);
    }

    #[test]
    fn near_asymptote() {
        let s = sphere(1e-10);
        let e = env(300.0);
        let r = 1.1e-10;
        let near = cp_near(&s, &s, r, &e).unwrap().value;
        let full = cp_full_matsubara(&s, &s, r, &e).unwrap().value;
        assert!(rel(near, full) < 0.05, "{near} vs {full}");
        let near2 = cp_near(&s, &s, 2.0 * r, &e).unwrap().value;
        assert!(rel(near2 / near, 2f64.powi(-6)) < 1e-14);
    }

    #[test]
    fn near_zero_temperature_limit_is_continuous() {
        let s = sphere(1e-9);
        let r = 2e-9;
        let zero = cp_near(&s, &s, r, &env(0.0)).unwrap().value;
        let cold = cp_near(&s, &s, r, &env(1.0)).unwrap().value;
        assert!(rel(cold, zero) < 1e-3);
        let full = cp_full_quadrature(&s, &s, r, &env(0.0)).unwrap().value;
        assert!(rel(zero, full) < 0.02);
    }

    #[test]
    fn attractive_and_monotone() {
        let s = sphere(50e-9);
        let e = env(300.0);
        let mut last = f64::NEG_INFINITY;
        for i in 0..60 {
            let r = 1e-9 * 10f64.powf(i as f64 / 10.0);
            let u = cp_full_matsubara(&s, &s, r, &e).unwrap().value;
            assert!(u < 0.0);
            assert!(u > last);
            last = u;
        }
    }

    #[test]
    fn invalid_inputs() {
        let s = sphere(50e-9);
        assert!(matches!(
            cp_full_matsubara(&s, &s, 0.0, &env(300.0)),
            Err(Error::InvalidSeparation(_))
        ));
        assert!(cp_full_matsubara(&s, &s, 1e-6, &env(0.0)).is_err());
        assert!(ThermalEnvironment::new(-1.0).is_err());
        assert!(env(0.0).thermal_wavelength().is_infinite());
        let fallback = cp_exact(&s, &s, 1e-6, &env(0.0)).unwrap();
        assert_eq!(fallback.method, CpMethod::Quadrature);
    }
}
