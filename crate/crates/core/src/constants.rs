//! CODATA 2018 constants in SI units.

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum [m/s].
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity [F/m].
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability [H/m], fixed by `1 / (eps0 c^2)` so the two stay consistent.
pub const MU0: f64 = 1.0 / (EPS0 * C * C);

/// Square metres per square micrometre, for intensities quoted in W/um^2.
pub const UM2_PER_M2: f64 = 1e12;

/// Convert an energy in joules to kelvin.
#[inline]
pub fn joules_to_kelvin(u: f64) -> f64 {
    u / K_B
}
