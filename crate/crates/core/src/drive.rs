//! Potentials induced by the tweezer drive.
//!
//! Each sphere sits in its own tweezer, a flat single-mode field of intensity
//! `I`, phase `phi` and polarization `p` propagating along `z`. The field
//! amplitude follows `|E|^2 = 2 I / (eps0 c)`. The spheres respond with the
//! real part of their polarizability at the drive frequency.
//!
//! * trap: `U = -(1/4) alpha |E|^2`;
//! * optical binding on sphere A:
//!   `U_A = -(1/2) mu0 w^2 alpha_A alpha_B |E_A||E_B| Re{ e^{i dphi} p_A^* . G(r_A, r_B) . p_B }`
//!   with `dphi = phi_B - phi_A`, and the roles swapped for sphere B.
//!
//! Squeezed-vacuum and cat-state drives are mapped onto an equivalent coherent
//! drive plus a multiplier, see [`DriveState::effective`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{C, EPS0, HBAR, MU0};
use crate::error::{Error, Result};
use crate::green::{green_free, Separation};
use crate::material::{dimensionless_polarizability, FrequencyAxis, Sphere};

/// Complex unit polarization vector in the `x`-`y` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 3]", into = "[[f64; 2]; 3]")]
pub struct Polarization([Complex64; 3]);

impl Polarization {
    pub const X: Self = Self([
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ]);
    pub const Y: Self = Self([
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    ]);

    pub fn new(v: [Complex64; 3]) -> Result<Self> {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() < 1e-9) {
            return Err(Error::invalid(format!(
                "polarization must have unit norm, got {norm}"
            )));
        }
        if v[2].norm() > 1e-12 {
            return Err(Error::invalid(
                "polarization must be transverse to the z propagation axis",
            ));
        }
        Ok(Self(v))
    }

    /// Linear polarization at angle `angle` from `x`.
    pub fn linear(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self([
            Complex64::new(c, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
        ])
    }

    pub fn vector(&self) -> &[Complex64; 3] {
        &self.0
    }
}

impl TryFrom<[[f64; 2]; 3]> for Polarization {
    type Error = Error;
    fn try_from(v: [[f64; 2]; 3]) -> Result<Self> {
        Self::new(v.map(|[re, im]| Complex64::new(re, im)))
    }
}

impl From<Polarization> for [[f64; 2]; 3] {
    fn from(p: Polarization) -> Self {
        p.0.map(|c| [c.re, c.im])
    }
}

/// One tweezer beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TweezerDrive {
    /// Intensity [W/m^2].
    pub intensity: f64,
    /// Vacuum wavelength [m].
    pub wavelength: f64,
    /// Optical phase [rad].
    pub phase: f64,
    pub polarization: Polarization,
}

impl TweezerDrive {
    pub fn new(
        intensity: f64,
        wavelength: f64,
        phase: f64,
        polarization: Polarization,
    ) -> Result<Self> {
        let t = Self {
            intensity,
            wavelength,
            phase,
            polarization,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::invalid(format!(
                "intensity must be >= 0, got {}",
                self.intensity
            )));
        }
        check_wavelength(self.wavelength)?;
        if !self.phase.is_finite() {
            return Err(Error::invalid("phase must be finite"));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        TAU * C / self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Peak field amplitude `sqrt(2 I / eps0 c)` [V/m].
    pub fn field_amplitude(&self) -> f64 {
        (2.0 * self.intensity / (EPS0 * C)).sqrt()
    }
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::invalid(format!(
            "wavelength must be > 0, got {wavelength}"
        )));
    }
    Ok(())
}

/// A pair of coherent tweezers, A and B, at a common wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentDrive {
    pub a: TweezerDrive,
    pub b: TweezerDrive,
}

impl CoherentDrive {
    pub fn new(a: TweezerDrive, b: TweezerDrive) -> Result<Self> {
        a.validate()?;
        b.validate()?;
        if (a.wavelength - b.wavelength).abs() > 1e-12 * a.wavelength {
            return Err(Error::invalid("both tweezers must share one wavelength"));
        }
        Ok(Self { a, b })
    }

    /// Equal intensities and polarizations, phases `0` and `dphi`.
    pub fn symmetric(
        intensity: f64,
        wavelength: f64,
        dphi: f64,
        polarization: Polarization,
    ) -> Result<Self> {
        Self::new(
            TweezerDrive::new(intensity, wavelength, 0.0, polarization)?,
            TweezerDrive::new(intensity, wavelength, dphi, polarization)?,
        )
    }

    /// `phi_B - phi_A`.
    pub fn delta_phi(&self) -> f64 {
        self.b.phase - self.a.phase
    }

    pub fn wavelength(&self) -> f64 {
        self.a.wavelength
    }

    pub fn with_delta_phi(&self, dphi: f64) -> Self {
        let mut d = *self;
        d.b.phase = d.a.phase + dphi;
        d
    }

    pub fn scaled_intensity(&self, factor: f64) -> Self {
        let mut d = *self;
        d.a.intensity *= factor;
        d.b.intensity *= factor;
        d
    }

    pub fn tweezer(&self, target: Target) -> &TweezerDrive {
        match target {
            Target::A => &self.a,
            Target::B => &self.b,
        }
    }
}

/// Interpretation of a cat-state drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatMode {
    /// Coherent superposition `|beta> + e^{i theta} |-beta>`.
    #[default]
    Superposition,
    /// Incoherent mixture of `|beta>` and `|-beta>`.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveState {
    Coherent(CoherentDrive),
    SqueezedVacuum {
        r: f64,
        wavelength: f64,
        polarization: Polarization,
    },
    Cat {
        beta_mag: f64,
        theta: f64,
        wavelength: f64,
        polarization: Polarization,
        /// Intensity of the coherent state `|beta>` at the spheres [W/m^2].
        reference_intensity: f64,
        #[serde(default)]
        mode: CatMode,
    },
}

/// A drive expressed through the coherent machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDrive {
    pub coherent: CoherentDrive,
    /// Factor applied to both the trap and the binding potentials.
    pub multiplier: f64,
}

impl DriveState {
    pub fn validate(&self) -> Result<()> {
        self.effective().map(|_| ())
    }

    pub fn wavelength(&self) -> f64 {
        match self {
            DriveState::Coherent(d) => d.wavelength(),
            DriveState::SqueezedVacuum { wavelength, .. } | DriveState::Cat { wavelength, .. } => {
                *wavelength
            }
        }
    }

    pub fn effective(&self) -> Result<EffectiveDrive> {
        match *self {
            DriveState::Coherent(d) => {
                let d = CoherentDrive::new(d.a, d.b)?;
                Ok(EffectiveDrive {
                    coherent: d,
                    multiplier: 1.0,
                })
            }
            DriveState::SqueezedVacuum {
                r,
                wavelength,
                polarization,
            } => {
                let i_eff = squeezed_equivalent(r, wavelength)?;
                let d = CoherentDrive::symmetric(i_eff, wavelength, 0.0, polarization)?;
                Ok(EffectiveDrive {
                    coherent: d,
                    multiplier: 1.0,
                })
            }
            DriveState::Cat {
                beta_mag,
                theta,
                wavelength,
                polarization,
                reference_intensity,
                mode,
            } => {
                let kappa = cat_factor(beta_mag, theta, mode)?;
                let d =
                    CoherentDrive::symmetric(reference_intensity, wavelength, 0.0, polarization)?;
                Ok(EffectiveDrive {
                    coherent: d,
                    multiplier: kappa,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObFormulation {
    GreenExact,
    Near,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObResult {
    /// Potential energy [J].
    pub value: f64,
    pub target: Target,
    pub formulation: ObFormulation,
}

/// `e^{i phi}`, with `sin` forced to zero at integer multiples of `pi` so
/// that the binding potentials of the two spheres coincide exactly there.
pub(crate) fn phasor(phi: f64) -> Complex64 {
    let (s, c) = phi.sin_cos();
    if s.abs() < 8.0 * f64::EPSILON * phi.abs().max(1.0) {
        Complex64::new(c.signum(), 0.0)
    } else {
        Complex64::new(c, s)
    }
}

/// Real part of the dimensionless polarizability at the drive wavelength.
pub fn drive_alpha(sphere: &Sphere, wavelength: f64) -> Result<f64> {
    check_wavelength(wavelength)?;
    Ok(
        dimensionless_polarizability(&sphere.material, TAU * C / wavelength, FrequencyAxis::Real)?
            .re,
    )
}

/// Single-tweezer trap, `-(1/4) alpha |E|^2` [J].
pub fn trap_potential(sphere: &Sphere, tweezer: &TweezerDrive) -> Result<f64> {
    tweezer.validate()?;
    let alpha = drive_alpha(sphere, tweezer.wavelength)? * sphere.volume_factor();
    Ok(-0.25 * alpha * tweezer.field_amplitude().powi(2))
}

struct ObPair {
    /// `(1/2) mu0 w^2 alpha_A alpha_B |E_A| |E_B|` [J m].
    scale: f64,
    k: f64,
    omega: f64,
}

fn ob_pair(a: &Sphere, b: &Sphere, drive: &CoherentDrive) -> Result<ObPair> {
    let drive = CoherentDrive::new(drive.a, drive.b)?;
    let lambda = drive.wavelength();
    let omega = TAU * C / lambda;
    let alpha_a = drive_alpha(a, lambda)? * a.volume_factor();
    let alpha_b = drive_alpha(b, lambda)? * b.volume_factor();
    let scale = 0.5
        * MU0
        * omega
        * omega
        * alpha_a
        * alpha_b
        * drive.a.field_amplitude()
        * drive.b.field_amplitude();
    Ok(ObPair {
        scale,
        k: omega / C,
        omega,
    })
}

/// `(p_self, p_other, e^{+-i dphi})` for the requested sphere.
fn roles(drive: &CoherentDrive, target: Target) -> (&[Complex64; 3], &[Complex64; 3], Complex64) {
    let dphi = drive.delta_phi();
    match target {
        Target::A => (
            drive.a.polarization.vector(),
            drive.b.polarization.vector(),
            phasor(dphi),
        ),
        Target::B => (
            drive.b.polarization.vector(),
            drive.a.polarization.vector(),
            phasor(-dphi),
        ),
    }
}

/// Complex binding amplitude `Z` of the requested sphere, independent of the
/// relative phase: `U_A = Re{Z e^{i dphi}}` and `U_B = Re{Z e^{-i dphi}}`.
pub fn optical_binding_amplitude(
    a: &Sphere,
    b: &Sphere,
    drive: &CoherentDrive,
    separation: &Separation,
    target: Target,
) -> Result<Complex64> {
    let pair = ob_pair(a, b, drive)?;
    let (p_self, p_other, _) = roles(drive, target);
    let sep = match target {
        Target::A => *separation,
        Target::B => separation.reversed(),
    };
    let g = green_free(&sep, pair.omega)?;
    Ok(-pair.scale * g.sandwich(p_self, p_other))
}

/// `e^{+i dphi}` for sphere A, `e^{-i dphi}` for sphere B.
pub(crate) fn phase_factor(dphi: f64, target: Target) -> Complex64 {
    match target {
        Target::A => phasor(dphi),
        Target::B => phasor(-dphi),
    }
}

/// Interparticle binding potential from the full Green's tensor. The
/// separation points from A to B; the divergent self term is excluded.
pub fn optical_binding_exact(
    a: &Sphere,
    b: &Sphere,
    drive: &CoherentDrive,
    separation: &Separation,
    target: Target,
) -> Result<ObResult> {
    let z = optical_binding_amplitude(a, b, drive, separation, target)?;
    let value = (z * phase_factor(drive.delta_phi(), target)).re;
    Ok(ObResult {
        value,
        target,
        formulation: ObFormulation::GreenExact,
    })
}

/// `p_self^* . M . p_other` for a real matrix `M = c1 1 + c2 x(x)x`,
/// the separation being along `x`.
fn contract_axial(
    p_self: &[Complex64; 3],
    p_other: &[Complex64; 3],
    c1: f64,
    c2: f64,
) -> Complex64 {
    let dot: Complex64 = (0..3).map(|i| p_self[i].conj() * p_other[i]).sum();
    dot * c1 + p_self[0].conj() * p_other[0] * c2
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidSeparation(r));
    }
    Ok(())
}

/// Near-field (`k r << 1`) binding along `x`:
/// `(4 pi sqrt(I_A I_B) / c)(R_A R_B)^3 / r^3 a_A a_B Re{ e^{+-i dphi} p^*(1 - 3 x(x)x) p }`,
/// which reduces to `4 pi (I/c) R^3 (R/r)^3 a^2 cos(dphi)` for equal spheres and
/// `y` polarization.
pub fn optical_binding_near(
    a: &Sphere,
    b: &Sphere,
    drive: &CoherentDrive,
    r: f64,
    target: Target,
) -> Result<ObResult> {
    check_r(r)?;
    let pair = ob_pair(a, b, drive)?;
    let (p_self, p_other, ph) = roles(drive, target);
    let tensor = contract_axial(p_self, p_other, 1.0, -3.0);
    let coeff = pair.scale / (4.0 * PI * pair.k * pair.k * r.powi(3));
    Ok(ObResult {
        value: coeff * (ph * tensor).re,
        target,
        formulation: ObFormulation::Near,
    })
}

/// Far-field (`k r >> 1`) binding along `x`:
/// `-(4 pi sqrt(I_A I_B) / c)(R_A R_B)^3 k^2 / r a_A a_B Re{ e^{i(kr +- dphi)} p^*(1 - x(x)x) p }`.
pub fn optical_binding_far(
    a: &Sphere,
    b: &Sphere,
    drive: &CoherentDrive,
    r: f64,
    target: Target,
) -> Result<ObResult> {
    check_r(r)?;
    let pair = ob_pair(a, b, drive)?;
    let (p_self, p_other, ph) = roles(drive, target);
    let tensor = contract_axial(p_self, p_other, 1.0, -1.0);
    let coeff = -pair.scale / (4.0 * PI * r);
    let value = coeff * (phasor(pair.k * r) * ph * tensor).re;
    Ok(ObResult {
        value,
        target,
        formulation: ObFormulation::Far,
    })
}

/// Local phase of the binding oscillation at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub r: f64,
    /// Modulus of the complex binding amplitude [J].
    pub amplitude: f64,
    /// Phase relative to the near-field law `+cos(dphi)`, in `(-pi, pi]`.
    pub near_offset: f64,
    /// Phase relative to the far-field law `-cos(k r + dphi)`, in `(-pi, pi]`.
    pub far_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub points: Vec<PhasePoint>,
    /// First separation where the far-field offset crosses `pi/2`: the
    /// radiative zone where the binding goes as `sin(k r +- dphi)`.
    pub crossover_r: Option<f64>,
}

fn wrap(phi: f64) -> f64 {
    let t = (phi + PI).rem_euclid(TAU) - PI;
    if t == -PI {
        PI
    } else {
        t
    }
}

/// Extracts the local phase of the exact binding potential of sphere A.
///
/// The potential is linear in `e^{i dphi}`, so its values at `dphi = 0` and
/// `dphi = -pi/2` are the in-phase and quadrature components of a complex
/// amplitude `Z(r)` with `U_A = Re{Z e^{i dphi}}`. The offsets compare
/// `arg Z` with the near (`0`) and far (`k r + pi`) conventions.
pub fn radiative_phase_check(
    a: &Sphere,
    b: &Sphere,
    drive: &CoherentDrive,
    r_grid: &[f64],
) -> Result<PhaseReport> {
    if r_grid.is_empty() || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            "r grid must be non-empty and strictly increasing",
        ));
    }
    let k = TAU / drive.wavelength();
    let mut points = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let sep = Separation::along_x(r);
        let re = optical_binding_exact(a, b, &drive.with_delta_phi(0.0), &sep, Target::A)?.value;
        let im =
            optical_binding_exact(a, b, &drive.with_delta_phi(-FRAC_PI_2), &sep, Target::A)?.value;
        let amplitude = re.hypot(im);
        if amplitude < 1e-30 {
            return Err(Error::FitFailure(format!(
                "binding amplitude {amplitude:e} J at r = {r:e} m is too small"
            )));
        }
        let psi = im.atan2(re);
        points.push(PhasePoint {
            r,
            amplitude,
            near_offset: wrap(psi),
            far_offset: wrap(psi - k * r - PI),
        });
    }
    let crossover_r = points.windows(2).find_map(|w| {
        let (f0, f1) = (
            w[0].far_offset.abs() - FRAC_PI_2,
            w[1].far_offset.abs() - FRAC_PI_2,
        );
        (f0 >= 0.0 && f1 < 0.0).then(|| w[0].r + (w[1].r - w[0].r) * f0 / (f0 - f1))
    });
    Ok(PhaseReport {
        points,
        crossover_r,
    })
}

/// Effective coherent intensity of a squeezed vacuum,
/// `I_eff = sinh^2(r) hbar w0 c / (2 pi)^4` [W/m^2].
pub fn squeezed_equivalent(r: f64, wavelength: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "squeeze parameter must be >= 0, got {r}"
        )));
    }
    check_wavelength(wavelength)?;
    let omega = TAU * C / wavelength;
    Ok(r.sinh().powi(2) * HBAR * omega * C / TAU.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingRequirement {
    /// Squeeze parameter.
    pub r: f64,
    /// `20 r log10(e)`.
    pub db: f64,
}

/// Squeezing needed for a squeezed vacuum to act like a coherent drive of
/// intensity `intensity` [W/m^2].
pub fn required_squeezing(intensity: f64, wavelength: f64) -> Result<SqueezingRequirement> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::invalid(format!(
            "intensity must be >= 0, got {intensity}"
        )));
    }
    check_wavelength(wavelength)?;
    let omega = TAU * C / wavelength;
    let r = (TAU.powi(4) * intensity / (HBAR * omega * C))
        .sqrt()
        .asinh();
    Ok(SqueezingRequirement {
        r,
        db: 20.0 * r * std::f64::consts::LOG10_E,
    })
}

/// Multiplier of the coherent potentials for a cat-state drive,
/// `kappa = 2 (1 - cos theta) / (2 + 2 e^{-2 beta^2} cos theta)`.
pub fn cat_factor(beta_mag: f64, theta: f64, mode: CatMode) -> Result<f64> {
    if !(beta_mag >= 0.0 && beta_mag.is_finite()) {
        return Err(Error::invalid(format!(
            "|beta| must be >= 0, got {beta_mag}"
        )));
    }
    if !theta.is_finite() {
        return Err(Error::invalid("theta must be finite"));
    }
    if mode == CatMode::Mixture {
        return Ok(1.0);
    }
    let cos = theta.cos();
    let norm = 2.0 + 2.0 * (-2.0 * beta_mag * beta_mag).exp() * cos;
    if norm < 1e-300 {
        return Err(Error::invalid(
            "the odd cat state with beta = 0 has zero norm",
        ));
    }
    Ok(2.0 * (1.0 - cos) / norm)
}
