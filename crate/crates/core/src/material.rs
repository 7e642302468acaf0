//! Two-oscillator Drude-Lorentz dielectric response and Clausius-Mossotti
//! polarizability of a small sphere.
//!
//! The built-in silica constants are interpreted as angular frequencies in
//! rad/s. A material can be loaded from JSON to override them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{C, EPS0, HBAR, K_B};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, Tolerance};

/// Oscillator constants of `eps(w) = 1 + sum_j wp_j^2 / (wt_j^2 - w^2 - i g_j w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrudeLorentzParams {
    pub omega_p1: f64,
    pub omega_p2: f64,
    pub omega_t1: f64,
    pub omega_t2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl DrudeLorentzParams {
    /// Fused silica: an infrared phonon oscillator and a dominant UV transition.
    pub const SILICA: Self = Self {
        omega_p1: 1.75e14,
        omega_p2: 2.96e16,
        omega_t1: 1.32e14,
        omega_t2: 2.72e16,
        gamma1: 4.28e13,
        gamma2: 8.09e15,
    };

    pub fn new(
        omega_p1: f64,
        omega_p2: f64,
        omega_t1: f64,
        omega_t2: f64,
        gamma1: f64,
        gamma2: f64,
    ) -> Result<Self> {
        let p = Self {
            omega_p1,
            omega_p2,
            omega_t1,
            omega_t2,
            gamma1,
            gamma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_p1,
            self.omega_p2,
            self.omega_t1,
            self.omega_t2,
            self.gamma1,
            self.gamma2,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid(
                "all Drude-Lorentz constants must be finite and > 0",
            ));
        }
        if self.omega_t2 <= self.omega_t1 {
            return Err(Error::invalid("omega_t2 must exceed omega_t1"));
        }
        Ok(())
    }

    /// Look up a named preset. Only `"silica"` is built in.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "silica" | "sio2" => Some(Self::SILICA),
            _ => None,
        }
    }

    /// Parse a JSON object carrying the six constants (rad/s).
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("material JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// Permittivity at an arbitrary complex frequency (analytic in the upper
    /// half plane).
    pub fn permittivity_at(&self, omega: Complex64) -> Complex64 {
        let i = Complex64::i();
        let term = |wp: f64, wt: f64, g: f64| {
            Complex64::from(wp * wp) / (wt * wt - omega * omega - i * g * omega)
        };
        1.0 + term(self.omega_p1, self.omega_t1, self.gamma1)
            + term(self.omega_p2, self.omega_t2, self.gamma2)
    }

    /// Reduced wavelength `c / omega_t2` of the dominant transition; the
    /// length scale separating the non-retarded and retarded CP regimes.
    pub fn transition_length(&self) -> f64 {
        C / self.omega_t2
    }

    /// Static permittivity `1 + (wp1/wt1)^2 + (wp2/wt2)^2`.
    pub fn static_permittivity(&self) -> f64 {
        permittivity_imag_axis(self, 0.0)
    }
}

impl Default for DrudeLorentzParams {
    fn default() -> Self {
        Self::SILICA
    }
}

/// Which frequency axis a frequency argument lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyAxis {
    Real,
    Imaginary,
}

/// A homogeneous sphere treated as a point dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub radius: f64,
    pub material: DrudeLorentzParams,
}

impl Sphere {
    pub fn new(radius: f64, material: DrudeLorentzParams) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!(
                "sphere radius must be > 0, got {radius}"
            )));
        }
        material.validate()?;
        Ok(Self { radius, material })
    }

    pub fn silica(radius: f64) -> Result<Self> {
        Self::new(radius, DrudeLorentzParams::SILICA)
    }

    /// Point-dipole validity at drive wavelength `wavelength`: `R < lambda / 2 pi`.
    /// Violations are reported, never rejected.
    pub fn is_point_dipole(&self, wavelength: f64) -> bool {
        self.radius < wavelength / std::f64::consts::TAU
    }

    /// `4 pi eps0 R^3`, the polarizability volume prefactor [C m^2 / V].
    pub fn volume_factor(&self) -> f64 {
        4.0 * std::f64::consts::PI * EPS0 * self.radius.powi(3)
    }
}

/// Complex permittivity on the real frequency axis.
pub fn permittivity(material: &DrudeLorentzParams, omega: f64) -> Complex64 {
    material.permittivity_at(Complex64::new(omega, 0.0))
}

/// Permittivity at imaginary frequency `i xi`; real by construction.
pub fn permittivity_imag_axis(material: &DrudeLorentzParams, xi: f64) -> f64 {
    let term = |wp: f64, wt: f64, g: f64| wp * wp / (wt * wt + xi * xi + g * xi);
    1.0 + term(material.omega_p1, material.omega_t1, material.gamma1)
        + term(material.omega_p2, material.omega_t2, material.gamma2)
}

fn clausius_mossotti(eps: Complex64) -> Result<Complex64> {
    let denom = eps + 2.0;
    if denom.norm() < 1e-12 {
        return Err(Error::DegenerateDenominator(denom.norm()));
    }
    Ok((eps - 1.0) / denom)
}

/// Dimensionless polarizability `(eps - 1) / (eps + 2)`.
pub fn dimensionless_polarizability(
    material: &DrudeLorentzParams,
    frequency: f64,
    axis: FrequencyAxis,
) -> Result<Complex64> {
    if !(frequency >= 0.0) {
        return Err(Error::invalid("frequency must be >= 0"));
    }
    match axis {
        FrequencyAxis::Real => clausius_mossotti(permittivity(material, frequency)),
        FrequencyAxis::Imaginary => {
            let eps = permittivity_imag_axis(material, frequency);
            if (eps + 2.0).abs() < 1e-12 {
                return Err(Error::DegenerateDenominator((eps + 2.0).abs()));
            }
            Ok(Complex64::new((eps - 1.0) / (eps + 2.0), 0.0))
        }
    }
}

/// Real dimensionless polarizability at imaginary frequency `i xi`.
pub(crate) fn alpha_tilde_imag(material: &DrudeLorentzParams, xi: f64) -> f64 {
    let eps = permittivity_imag_axis(material, xi);
    (eps - 1.0) / (eps + 2.0)
}

/// Dimensionless polarizability at a complex frequency.
pub(crate) fn alpha_tilde_complex(material: &DrudeLorentzParams, omega: Complex64) -> Complex64 {
    let eps = material.permittivity_at(omega);
    (eps - 1.0) / (eps + 2.0)
}

/// Clausius-Mossotti polarizability `4 pi eps0 R^3 (eps - 1)/(eps + 2)` [C m^2/V].
pub fn polarizability(sphere: &Sphere, frequency: f64, axis: FrequencyAxis) -> Result<Complex64> {
    Ok(dimensionless_polarizability(&sphere.material, frequency, axis)? * sphere.volume_factor())
}

/// Contour used for the ground-state moment `N_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundMomentContour {
    /// `int_0^inf d xi alpha(i xi)^2`, real and convergent.
    #[default]
    ImaginaryAxis,
    /// Real part of `int_0^inf d w alpha(w)^2` taken literally on the real axis.
    RealAxis,
}

/// Near-field Matsubara moments in units of `omega_t2` of the first material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessMoments {
    /// `sum_{j>=1} alpha_A(i xi_j) alpha_B(i xi_j)`.
    pub thermal: f64,
    /// `int_0^inf d xi~ alpha_A alpha_B`.
    pub ground: f64,
    pub terms_used: usize,
}

pub(crate) const MATSUBARA_TAIL: f64 = 1e-10;
pub(crate) const MATSUBARA_CAP: usize = 10_000_000;

/// `N_T` and `N_0` for one material at temperature `temperature` [K].
pub fn dimensionless_moments(
    material: &DrudeLorentzParams,
    temperature: f64,
) -> Result<DimensionlessMoments> {
    dimensionless_moments_pair(
        material,
        material,
        temperature,
        GroundMomentContour::default(),
    )
}

/// Mixed moments for two materials. Frequencies are scaled by the first
/// material's `omega_t2`.
pub fn dimensionless_moments_pair(
    a: &DrudeLorentzParams,
    b: &DrudeLorentzParams,
    temperature: f64,
    contour: GroundMomentContour,
) -> Result<DimensionlessMoments> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid(
            "temperature must be > 0 for the Matsubara moments",
        ));
    }
    let scale = a.omega_t2;
    let step = std::f64::consts::TAU * K_B * temperature / HBAR;

    let mut thermal = 0.0;
    let mut j = 1usize;
    loop {
        let xi = j as f64 * step;
        let term = alpha_tilde_imag(a, xi) * alpha_tilde_imag(b, xi);
        thermal += term;
        if term < MATSUBARA_TAIL * thermal {
            break;
        }
        j += 1;
        if j > MATSUBARA_CAP {
            return Err(Error::NonConvergent {
                what: "Matsubara moment N_T",
                terms: MATSUBARA_CAP,
            });
        }
    }

    let ground = ground_moment(a, b, scale, contour)?;
    Ok(DimensionlessMoments {
        thermal,
        ground,
        terms_used: j,
    })
}

fn ground_moment(
    a: &DrudeLorentzParams,
    b: &DrudeLorentzParams,
    scale: f64,
    contour: GroundMomentContour,
) -> Result<f64> {
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-12,
        max_intervals: 50_000,
    };
    let r = match contour {
        GroundMomentContour::ImaginaryAxis => integrate_half_line(
            |s| alpha_tilde_imag(a, s * scale) * alpha_tilde_imag(b, s * scale),
            tol,
        )?,
        GroundMomentContour::RealAxis => integrate_half_line(
            |s| {
                let w = Complex64::new(s * scale, 0.0);
                (alpha_tilde_complex(a, w) * alpha_tilde_complex(b, w)).re
            },
            tol,
        )?,
    };
    Ok(r.value.re)
}
