//! Radiative interaction landscape between two dielectric nanospheres.
//!
//! The crate combines three families of potentials acting on a pair of
//! optically trapped spheres separated along `x`:
//!
//! * the thermal Casimir-Polder potential mediated by field fluctuations
//!   ([`fluctuation`]), evaluated either as a Matsubara sum or by quadrature
//!   of the real-frequency integral along a rotated contour;
//! * the tweezer trap and optical binding potentials of a coherent drive,
//!   with squeezed-vacuum and cat-state drives mapped onto the coherent
//!   machinery ([`drive`]);
//! * composition and analysis of the total per-sphere potentials: phase
//!   sweeps, minima tracking, mutual stability and regime slopes
//!   ([`landscape`]).
//!
//! All quantities are SI. Frequencies are angular frequencies in rad/s.

pub mod constants;
pub mod drive;
pub mod error;
pub mod fluctuation;
pub mod green;
pub mod landscape;
pub mod material;
pub mod quadrature;

pub use drive::{
    cat_factor, drive_alpha, optical_binding_amplitude, optical_binding_exact, optical_binding_far,
    optical_binding_near, radiative_phase_check, required_squeezing, squeezed_equivalent,
    trap_potential, CatMode, CoherentDrive, DriveState, EffectiveDrive, ObFormulation, ObResult,
    PhasePoint, PhaseReport, Polarization, SqueezingRequirement, Target, TweezerDrive,
};
pub use error::{Error, Result};
pub use fluctuation::{
    cp_exact, cp_far, cp_far_exact, cp_full_matsubara, cp_full_matsubara_with, cp_full_quadrature,
    cp_full_quadrature_with, cp_intermediate, cp_near, cp_second_order_explicit, Contour, CpMethod,
    CpResult, PolarizabilityModel, QuadratureOptions, ThermalEnvironment, FAR_FIELD_FORM_RATIO,
};
pub use green::{
    green_free, green_free_complex, green_free_im_coincident, green_free_imag_axis, helper_f,
    helper_h, ComplexTensor3, RealTensor3, Separation,
};
pub use landscape::{
    classify_regimes, deepest_well_near, find_maxima, find_minima, lin_grid, log_grid, phase_sweep,
    polarization_map, stability_analysis, stability_from_field, total_potential, well_depth,
    CpMethodChoice, Crossing, Extremum, Interaction, MapPoint, PhaseField, PolarizationConfig,
    PotentialBreakdown, RegimeFit, RegimeKind, RegimeTable, ScenarioConfig, ScenarioOptions,
    StabilityReport, WellDepth,
};
pub use material::{
    dimensionless_moments, dimensionless_moments_pair, dimensionless_polarizability, permittivity,
    permittivity_imag_axis, polarizability, DimensionlessMoments, DrudeLorentzParams,
    FrequencyAxis, GroundMomentContour, Sphere,
};
