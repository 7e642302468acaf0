//! Total per-sphere potentials and their analysis along the inter-sphere
//! axis: phase sweeps, minima tracking, mutual stability, polarization maps
//! and power-law regime fits.
//!
//! Grid evaluations run in parallel; every reduction happens after an ordered
//! gather, so results do not depend on the thread count.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{C, K_B};
use crate::drive::{
    optical_binding_amplitude, phase_factor, trap_potential, CoherentDrive, DriveState,
    EffectiveDrive, Polarization, Target,
};
use crate::error::{Error, Result};
use crate::fluctuation::{
    cp_exact, cp_full_matsubara_with, cp_full_quadrature, CpMethod, CpResult, PolarizabilityModel,
    ThermalEnvironment,
};
use crate::green::Separation;
use crate::material::Sphere;

/// How the Casimir-Polder term is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpMethodChoice {
    /// Matsubara sum, falling back to quadrature at `T = 0` or on failure.
    #[default]
    Matsubara,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    pub include_trap: bool,
    pub cp_method: CpMethodChoice,
    /// Minima of A and B closer than this form a mutual bound state [m].
    /// Defaults to `lambda0 / 100`.
    pub tol_r: Option<f64>,
    /// Crossings within this distance of `0` or `pi` count as conservative [rad].
    pub tol_phi: f64,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            include_trap: true,
            cp_method: CpMethodChoice::Matsubara,
            tol_r: None,
            tol_phi: PI / 50.0,
        }
    }
}

/// Two spheres on the `x` axis, A at the origin and B at `x = r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub sphere_a: Sphere,
    pub sphere_b: Sphere,
    pub drive: DriveState,
    pub env: ThermalEnvironment,
    /// Separations [m], strictly increasing.
    pub r_grid: Vec<f64>,
    pub options: ScenarioOptions,
}

impl ScenarioConfig {
    /// Checks everything except the contact condition on the grid.
    pub fn validate_physics(&self) -> Result<()> {
        Sphere::new(self.sphere_a.radius, self.sphere_a.material)?;
        Sphere::new(self.sphere_b.radius, self.sphere_b.material)?;
        ThermalEnvironment::new(self.env.temperature)?;
        self.drive.validate()?;
        check_grid(&self.r_grid)?;
        if let Some(t) = self.options.tol_r {
            if !(t > 0.0) {
                return Err(Error::invalid("tol_r must be > 0"));
            }
        }
        if !(self.options.tol_phi > 0.0) {
            return Err(Error::invalid("tol_phi must be > 0"));
        }
        Ok(())
    }

    /// Full validation: the spheres must not overlap anywhere on the grid.
    pub fn validate(&self) -> Result<()> {
        self.validate_physics()?;
        let contact = self.contact_distance();
        if self.r_grid[0] <= contact {
            return Err(Error::invalid(format!(
                "grid starts at {:e} m, inside the contact distance R_A + R_B = {contact:e} m",
                self.r_grid[0]
            )));
        }
        Ok(())
    }

    pub fn contact_distance(&self) -> f64 {
        self.sphere_a.radius + self.sphere_b.radius
    }

    pub fn wavelength(&self) -> f64 {
        self.drive.wavelength()
    }

    pub fn tol_r(&self) -> f64 {
        self.options.tol_r.unwrap_or(self.wavelength() / 100.0)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("r grid is empty"));
    }
    if grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::invalid("r grid values must be finite and > 0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("r grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` log-spaced points from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Potentials at one separation [J].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialBreakdown {
    pub r: f64,
    pub trap_a: f64,
    pub trap_b: f64,
    pub ob_a: f64,
    pub ob_b: f64,
    pub cp: f64,
    pub total_a: f64,
    pub total_b: f64,
    pub cp_method: CpMethod,
}

impl PotentialBreakdown {
    fn new(r: f64, trap: (f64, f64), ob: (f64, f64), cp: &CpResult) -> Self {
        Self {
            r,
            trap_a: trap.0,
            trap_b: trap.1,
            ob_a: ob.0,
            ob_b: ob.1,
            cp: cp.value,
            total_a: trap.0 + ob.0 + cp.value,
            total_b: trap.1 + ob.1 + cp.value,
            cp_method: cp.method,
        }
    }

    /// The same breakdown with every energy divided by `k_B` [K].
    pub fn to_kelvin(&self) -> Self {
        let k = |v: f64| v / K_B;
        Self {
            r: self.r,
            trap_a: k(self.trap_a),
            trap_b: k(self.trap_b),
            ob_a: k(self.ob_a),
            ob_b: k(self.ob_b),
            cp: k(self.cp),
            total_a: k(self.total_a),
            total_b: k(self.total_b),
            cp_method: self.cp_method,
        }
    }
}

fn cp_value(config: &ScenarioConfig, r: f64) -> Result<CpResult> {
    let (a, b, env) = (&config.sphere_a, &config.sphere_b, &config.env);
    match config.options.cp_method {
        CpMethodChoice::Matsubara => cp_exact(a, b, r, env),
        CpMethodChoice::Quadrature => cp_full_quadrature(a, b, r, env),
    }
}

/// Trap potentials of A and B including the drive multiplier.
fn traps(config: &ScenarioConfig, eff: &EffectiveDrive) -> Result<(f64, f64)> {
    if !config.options.include_trap {
        return Ok((0.0, 0.0));
    }
    Ok((
        eff.multiplier * trap_potential(&config.sphere_a, &eff.coherent.a)?,
        eff.multiplier * trap_potential(&config.sphere_b, &eff.coherent.b)?,
    ))
}

/// Binding amplitudes of A and B at separation `sep`, multiplier applied.
fn amplitudes(
    config: &ScenarioConfig,
    eff: &EffectiveDrive,
    sep: &Separation,
) -> Result<(Complex64, Complex64)> {
    let (a, b, d) = (&config.sphere_a, &config.sphere_b, &eff.coherent);
    Ok((
        optical_binding_amplitude(a, b, d, sep, Target::A)? * eff.multiplier,
        optical_binding_amplitude(a, b, d, sep, Target::B)? * eff.multiplier,
    ))
}

fn binding(z: (Complex64, Complex64), dphi: f64) -> (f64, f64) {
    (
        (z.0 * phase_factor(dphi, Target::A)).re,
        (z.1 * phase_factor(dphi, Target::B)).re,
    )
}

/// Per-sphere potentials on the configured grid.
pub fn total_potential(config: &ScenarioConfig) -> Result<Vec<PotentialBreakdown>> {
    config.validate()?;
    let eff = config.drive.effective()?;
    let trap = traps(config, &eff)?;
    let dphi = eff.coherent.delta_phi();
    config
        .r_grid
        .par_iter()
        .map(|&r| {
            let point = || -> Result<PotentialBreakdown> {
                let cp = cp_value(config, r)?;
                let ob = binding(amplitudes(config, &eff, &Separation::along_x(r))?, dphi);
                let p = PotentialBreakdown::new(r, trap, ob, &cp);
                if !(p.total_a.is_finite() && p.total_b.is_finite()) {
                    return Err(Error::QuadratureFailure("non-finite potential".into()));
                }
                Ok(p)
            };
            point().map_err(|e| e.at(r))
        })
        .collect()
}

/// Potentials over an `(r, dphi)` grid. Entry `[i * dphi.len() + j]`
/// belongs to `r[i]` and `dphi[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseField {
    pub r: Vec<f64>,
    pub dphi: Vec<f64>,
    pub u_a: Vec<f64>,
    pub u_b: Vec<f64>,
    pub cp_method: Vec<CpMethod>,
}

impl PhaseField {
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.u_a[i * self.dphi.len() + j]
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.u_b[i * self.dphi.len() + j]
    }

    /// `U_A(r)` at phase index `j`.
    pub fn column_a(&self, j: usize) -> Vec<f64> {
        (0..self.r.len()).map(|i| self.a(i, j)).collect()
    }

    pub fn column_b(&self, j: usize) -> Vec<f64> {
        (0..self.r.len()).map(|i| self.b(i, j)).collect()
    }
}

fn check_phase_grid(phases: &[f64]) -> Result<()> {
    if phases.is_empty() || phases.iter().any(|p| !(0.0..TAU).contains(p)) {
        return Err(Error::invalid(
            "phase grid must be non-empty and lie in [0, 2 pi)",
        ));
    }
    Ok(())
}

/// Total potentials of both spheres as functions of separation and relative
/// phase. The CP term and the complex binding amplitudes are computed once
/// per separation and reused for every phase.
pub fn phase_sweep(config: &ScenarioConfig, phases: &[f64]) -> Result<PhaseField> {
    config.validate()?;
    check_phase_grid(phases)?;
    let eff = config.drive.effective()?;
    let trap = traps(config, &eff)?;
    let rows: Vec<(Vec<f64>, Vec<f64>, CpMethod)> = config
        .r_grid
        .par_iter()
        .map(|&r| {
            let row = || -> Result<_> {
                let cp = cp_value(config, r)?;
                let z = amplitudes(config, &eff, &Separation::along_x(r))?;
                let mut ua = Vec::with_capacity(phases.len());
                let mut ub = Vec::with_capacity(phases.len());
                for &p in phases {
                    let ob = binding(z, p);
                    ua.push(trap.0 + ob.0 + cp.value);
                    ub.push(trap.1 + ob.1 + cp.value);
                }
                Ok((ua, ub, cp.method))
            };
            row().map_err(|e| e.at(r))
        })
        .collect::<Result<_>>()?;
    let mut field = PhaseField {
        r: config.r_grid.clone(),
        dphi: phases.to_vec(),
        u_a: Vec::with_capacity(rows.len() * phases.len()),
        u_b: Vec::with_capacity(rows.len() * phases.len()),
        cp_method: Vec::with_capacity(rows.len()),
    };
    for (ua, ub, m) in rows {
        field.u_a.extend(ua);
        field.u_b.extend(ub);
        field.cp_method.push(m);
    }
    Ok(field)
}

/// A refined extremum of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub r: f64,
    pub u: f64,
    /// Index of the grid sample closest to the extremum.
    pub index: usize,
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (d10, d12) = (x[1] - x[0], x[1] - x[2]);
    let (f10, f12) = (y[1] - y[0], y[1] - y[2]);
    let den = d10 * f12 - d12 * f10;
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let xv = x[1] - 0.5 * (d10 * d10 * f12 - d12 * d12 * f10) / den;
    if !(xv >= x[0] && xv <= x[2]) {
        return None;
    }
    // Lagrange form evaluated at the vertex.
    let l0 = (xv - x[1]) * (xv - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
    let l1 = (xv - x[0]) * (xv - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
    let l2 = (xv - x[0]) * (xv - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
    Some((xv, y[0] * l0 + y[1] * l1 + y[2] * l2))
}

fn check_curve(r: &[f64], u: &[f64]) -> Result<()> {
    if r.len() != u.len() {
        return Err(Error::invalid("r and U must have equal length"));
    }
    if r.len() < 3 {
        return Err(Error::invalid(
            "at least three samples are needed to locate extrema",
        ));
    }
    check_grid(r)
}

/// Interior extrema of `sign * u`; a run of equal samples counts once, at
/// its smallest `r`.
fn extrema(r: &[f64], u: &[f64], sign: f64) -> Vec<Extremum> {
    let n = u.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if sign * u[i] < sign * u[i - 1] {
            let mut j = i;
            while j + 1 < n && u[j + 1] == u[i] {
                j += 1;
            }
            if j + 1 < n && sign * u[j + 1] > sign * u[j] {
                let refined = if j == i {
                    parabola_vertex([r[i - 1], r[i], r[i + 1]], [u[i - 1], u[i], u[i + 1]])
                } else {
                    None
                };
                let (rv, uv) = refined.unwrap_or((r[i], u[i]));
                out.push(Extremum {
                    r: rv,
                    u: uv,
                    index: i,
                });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Interior local minima of a sampled curve, refined by three-point
/// parabolic interpolation. Endpoints are never reported.
pub fn find_minima(r: &[f64], u: &[f64]) -> Result<Vec<Extremum>> {
    check_curve(r, u)?;
    let m = extrema(r, u, 1.0);
    if m.is_empty() {
        Err(Error::EmptyResult)
    } else {
        Ok(m)
    }
}

/// Interior local maxima, as [`find_minima`].
pub fn find_maxima(r: &[f64], u: &[f64]) -> Result<Vec<Extremum>> {
    check_curve(r, u)?;
    let m = extrema(r, u, -1.0);
    if m.is_empty() {
        Err(Error::EmptyResult)
    } else {
        Ok(m)
    }
}

/// Depth of a potential well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellDepth {
    pub minimum: Extremum,
    /// Barrier on the small-r side: the nearest local maximum, or the first
    /// grid sample when the curve rises monotonically towards contact.
    pub inner_barrier: f64,
    /// Barrier on the large-r side, defined likewise.
    pub outer_barrier: f64,
    /// Escape depth `min(inner, outer) - U_min` [units of `u`].
    pub depth: f64,
}

/// Escape depth of the well at `minimum`.
pub fn well_depth(r: &[f64], u: &[f64], minimum: &Extremum) -> Result<WellDepth> {
    check_curve(r, u)?;
    let maxima = extrema(r, u, -1.0);
    let inner = maxima
        .iter()
        .rev()
        .find(|m| m.index < minimum.index)
        .map_or(u[0], |m| m.u);
    let outer = maxima
        .iter()
        .find(|m| m.index > minimum.index)
        .map_or(u[u.len() - 1], |m| m.u);
    Ok(WellDepth {
        minimum: *minimum,
        inner_barrier: inner,
        outer_barrier: outer,
        depth: inner.min(outer) - minimum.u,
    })
}

/// The deepest well among minima in `[target / 2, 2 target]`.
pub fn deepest_well_near(r: &[f64], u: &[f64], target: f64) -> Result<WellDepth> {
    let minima = find_minima(r, u)?;
    let best = minima
        .iter()
        .filter(|m| m.r >= 0.5 * target && m.r <= 2.0 * target)
        .min_by(|a, b| a.u.total_cmp(&b.u))
        .ok_or(Error::EmptyResult)?;
    well_depth(r, u, best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub dphi_rad: f64,
    /// Mean position of the coinciding minima [m].
    pub r_m: f64,
    /// Escape depth of sphere A's well [K].
    #[serde(rename = "depth_K")]
    pub depth_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub phases: Vec<f64>,
    /// Refined minima positions of A for each phase [m].
    pub minima_a: Vec<Vec<f64>>,
    pub minima_b: Vec<Vec<f64>>,
    pub crossings: Vec<Crossing>,
    /// Phases at which `U_A = U_B` at every separation.
    pub conservative_phases: Vec<f64>,
    /// True when every crossing lies within `tol_phi` of `0` or `pi`.
    pub crossings_at_conservative_phases: bool,
    pub tol_r: f64,
    pub tol_phi: f64,
}

/// Distance from `phi` to the nearest multiple of `pi`.
fn distance_to_conservative(phi: f64) -> f64 {
    let t = phi.rem_euclid(PI);
    t.min(PI - t)
}

/// Minima tracks of both spheres over a phase grid, and the phases where a
/// minimum of A coincides with one of B: only there can the pair rest in a
/// common bound state.
pub fn stability_analysis(config: &ScenarioConfig, phases: &[f64]) -> Result<StabilityReport> {
    let field = phase_sweep(config, phases)?;
    stability_from_field(&field, config.tol_r(), config.options.tol_phi)
}

/// [`stability_analysis`] on an already computed sweep.
pub fn stability_from_field(
    field: &PhaseField,
    tol_r: f64,
    tol_phi: f64,
) -> Result<StabilityReport> {
    if !(tol_r > 0.0 && tol_phi > 0.0) {
        return Err(Error::invalid("stability tolerances must be > 0"));
    }
    let phases = &field.dphi;
    let per_phase: Vec<(Vec<f64>, Vec<f64>, Vec<Crossing>, bool)> = (0..phases.len())
        .into_par_iter()
        .map(|j| {
            let ua = field.column_a(j);
            let ub = field.column_b(j);
            let ma = extrema(&field.r, &ua, 1.0);
            let mb = extrema(&field.r, &ub, 1.0);
            let mut crossings = Vec::new();
            for a in &ma {
                if let Some(b) = mb.iter().find(|b| (a.r - b.r).abs() < tol_r) {
                    let depth = well_depth(&field.r, &ua, a)?.depth;
                    crossings.push(Crossing {
                        dphi_rad: phases[j],
                        r_m: 0.5 * (a.r + b.r),
                        depth_k: depth / K_B,
                    });
                }
            }
            let conservative = ua.iter().zip(&ub).all(|(x, y)| x == y);
            Ok((
                ma.iter().map(|m| m.r).collect(),
                mb.iter().map(|m| m.r).collect(),
                crossings,
                conservative,
            ))
        })
        .collect::<Result<_>>()?;

    let mut report = StabilityReport {
        phases: phases.to_vec(),
        minima_a: Vec::new(),
        minima_b: Vec::new(),
        crossings: Vec::new(),
        conservative_phases: Vec::new(),
        crossings_at_conservative_phases: true,
        tol_r,
        tol_phi,
    };
    for (j, (ma, mb, cr, cons)) in per_phase.into_iter().enumerate() {
        report.minima_a.push(ma);
        report.minima_b.push(mb);
        report.crossings.extend(cr);
        if cons {
            report.conservative_phases.push(phases[j]);
        }
    }
    report.crossings_at_conservative_phases = report
        .crossings
        .iter()
        .all(|c| distance_to_conservative(c.dphi_rad) <= tol_phi);
    Ok(report)
}

/// Tweezer polarizations of A and B for the polarization maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationConfig {
    Yy,
    Xy,
    Xx,
}

impl PolarizationConfig {
    pub const ALL: [Self; 3] = [Self::Yy, Self::Xy, Self::Xx];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Yy => "yy",
            Self::Xy => "xy",
            Self::Xx => "xx",
        }
    }

    /// Polarizations of (A, B).
    pub fn vectors(&self) -> (Polarization, Polarization) {
        match self {
            Self::Yy => (Polarization::Y, Polarization::Y),
            Self::Xy => (Polarization::X, Polarization::Y),
            Self::Xx => (Polarization::X, Polarization::X),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "yy" => Some(Self::Yy),
            "xy" => Some(Self::Xy),
            "xx" => Some(Self::Xx),
            _ => None,
        }
    }
}

fn with_polarizations(d: &CoherentDrive, pol: PolarizationConfig) -> CoherentDrive {
    let (pa, pb) = pol.vectors();
    let mut d = *d;
    d.a.polarization = pa;
    d.b.polarization = pb;
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub x: f64,
    pub y: f64,
    /// Total potential of A with B at `(x, y, 0)` [J].
    pub u: f64,
}

/// Total potential of sphere A (at the origin) as sphere B moves over the
/// `z = 0` plane. Points inside the contact disk are omitted.
pub fn polarization_map(
    config: &ScenarioConfig,
    pol: PolarizationConfig,
    xs: &[f64],
    ys: &[f64],
) -> Result<Vec<MapPoint>> {
    config.validate_physics()?;
    let mut eff = config.drive.effective()?;
    eff.coherent = with_polarizations(&eff.coherent, pol);
    let trap = traps(config, &eff)?;
    let dphi = eff.coherent.delta_phi();
    let contact = config.contact_distance();
    let points: Vec<(f64, f64)> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .filter(|(x, y)| x.hypot(*y) > contact)
        .collect();
    points
        .par_iter()
        .map(|&(x, y)| {
            let sep = Separation::new([x, y, 0.0])?;
            let r = sep.distance();
            let point = || -> Result<MapPoint> {
                let cp = cp_value(config, r)?;
                let ob = binding(amplitudes(config, &eff, &sep)?, dphi);
                Ok(MapPoint {
                    x,
                    y,
                    u: trap.0 + ob.0 + cp.value,
                })
            };
            point().map_err(|e| e.at(r))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Near,
    Intermediate,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Cp,
    Ob,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeFit {
    pub interaction: Interaction,
    pub regime: RegimeKind,
    pub r_min: f64,
    pub r_max: f64,
    /// Least-squares slope of `ln|U|` against `ln r`.
    pub slope: f64,
    pub expected: f64,
    pub within_tolerance: bool,
    /// Slope with the polarizability frozen at its static value.
    pub static_slope: Option<f64>,
    /// Whether the fit window lies inside the configured grid.
    pub within_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeTable {
    /// `c / w_t2` [m].
    pub lambda_t2: f64,
    /// `hbar c / k_B T` [m].
    pub lambda_thermal: f64,
    /// Drive wavelength [m].
    pub lambda_0: f64,
    pub tolerance: f64,
    pub fits: Vec<RegimeFit>,
}

pub const SLOPE_TOLERANCE: f64 = 0.15;
const FIT_POINTS: usize = 11;
const REQUIRED_DECADES: f64 = 4.0;

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::FitFailure("need at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 || !(sxy / sxx).is_finite() {
        return Err(Error::FitFailure("degenerate abscissae".into()));
    }
    Ok(sxy / sxx)
}

fn log_log_slope(rs: &[f64], us: &[f64]) -> Result<f64> {
    if us.iter().any(|u| *u == 0.0 || !u.is_finite()) {
        return Err(Error::FitFailure(
            "zero or non-finite sample in fit window".into(),
        ));
    }
    let lx: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = us.iter().map(|u| u.abs().ln()).collect();
    fit_slope(&lx, &ly)
}

/// Fitted power laws of the CP and binding potentials in their asymptotic
/// windows:
///
/// | interaction | regime | window |
/// |---|---|---|
/// | CP | near | `[l_t2/100, l_t2/10]` |
/// | CP | intermediate | `[10 l_t2, 100 l_t2]` |
/// | CP | far | `[10 l_T, 100 l_T]` |
/// | OB | near | `[l0/1000, l0/100]` |
/// | OB | far | `[100 l0, 1000 l0]`, at `k r = 2 pi m` |
///
/// The configured grid must span at least four decades. Windows are fixed by
/// the physical length scales; contact overlap is not checked since the
/// near-field windows lie far below any realistic sphere size.
pub fn classify_regimes(config: &ScenarioConfig) -> Result<RegimeTable> {
    config.validate_physics()?;
    let grid = &config.r_grid;
    let decades = (grid[grid.len() - 1] / grid[0]).log10();
    if decades < REQUIRED_DECADES {
        return Err(Error::InsufficientSpan {
            decades,
            required: REQUIRED_DECADES,
        });
    }
    let (a, b, env) = (&config.sphere_a, &config.sphere_b, &config.env);
    let lambda_t2 = C / a.material.omega_t2.max(b.material.omega_t2);
    let lambda_thermal = env.thermal_wavelength();
    let eff = config.drive.effective()?;
    let lambda_0 = eff.coherent.wavelength();
    let in_grid = |lo: f64, hi: f64| {
        lo >= grid[0] * (1.0 - 1e-12) && hi <= grid[grid.len() - 1] * (1.0 + 1e-12)
    };

    let cp_fit = |regime: RegimeKind, lo: f64, hi: f64, expected: f64| -> Result<RegimeFit> {
        let rs = log_grid(lo, hi, FIT_POINTS);
        let us = rs
            .par_iter()
            .map(|&r| cp_value(config, r).map(|c| c.value))
            .collect::<Result<Vec<_>>>()?;
        let slope = log_log_slope(&rs, &us)?;
        let static_slope = if env.temperature > 0.0 {
            let us = rs
                .par_iter()
                .map(|&r| {
                    cp_full_matsubara_with(a, b, r, env, PolarizabilityModel::Static)
                        .map(|c| c.value)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(log_log_slope(&rs, &us)?)
        } else {
            None
        };
        Ok(RegimeFit {
            interaction: Interaction::Cp,
            regime,
            r_min: lo,
            r_max: hi,
            slope,
            expected,
            within_tolerance: (slope - expected).abs() <= SLOPE_TOLERANCE,
            static_slope,
            within_grid: in_grid(lo, hi),
        })
    };

    let mut fits = vec![
        cp_fit(RegimeKind::Near, lambda_t2 / 100.0, lambda_t2 / 10.0, -6.0)?,
        cp_fit(
            RegimeKind::Intermediate,
            10.0 * lambda_t2,
            100.0 * lambda_t2,
            -7.0,
        )?,
    ];
    if lambda_thermal.is_finite() {
        fits.push(cp_fit(
            RegimeKind::Far,
            10.0 * lambda_thermal,
            100.0 * lambda_thermal,
            -6.0,
        )?);
    }

    let ob_at = |r: f64| -> Result<f64> {
        let z = amplitudes(config, &eff, &Separation::along_x(r))?;
        Ok(binding(z, eff.coherent.delta_phi()).0)
    };
    let ob_fit = |regime: RegimeKind, rs: Vec<f64>, expected: f64| -> Result<RegimeFit> {
        let us = rs.iter().map(|&r| ob_at(r)).collect::<Result<Vec<_>>>()?;
        let slope = log_log_slope(&rs, &us)?;
        let (lo, hi) = (rs[0], rs[rs.len() - 1]);
        Ok(RegimeFit {
            interaction: Interaction::Ob,
            regime,
            r_min: lo,
            r_max: hi,
            slope,
            expected,
            within_tolerance: (slope - expected).abs() <= SLOPE_TOLERANCE,
            static_slope: None,
            within_grid: in_grid(lo, hi),
        })
    };
    fits.push(ob_fit(
        RegimeKind::Near,
        log_grid(lambda_0 / 1000.0, lambda_0 / 100.0, FIT_POINTS),
        -3.0,
    )?);
    // Whole wavelengths, log spaced, keep the cosine of the far law at one phase.
    let mut far_rs: Vec<f64> = log_grid(100.0, 1000.0, FIT_POINTS)
        .iter()
        .map(|m| m.round() * lambda_0)
        .collect();
    far_rs.dedup();
    fits.push(ob_fit(RegimeKind::Far, far_rs, -1.0)?);

    Ok(RegimeTable {
        lambda_t2,
        lambda_thermal,
        lambda_0,
        tolerance: SLOPE_TOLERANCE,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 1064e-9;

    fn config(intensity: f64, dphi: f64, grid: Vec<f64>) -> ScenarioConfig {
        let s = Sphere::silica(100e-9).unwrap();
        ScenarioConfig {
            sphere_a: s,
            sphere_b: s,
            drive: DriveState::Coherent(
                CoherentDrive::symmetric(intensity, LAMBDA, dphi, Polarization::Y).unwrap(),
            ),
            env: ThermalEnvironment::new(300.0).unwrap(),
            r_grid: grid,
            options: ScenarioOptions::default(),
        }
    }

    #[test]
    fn parabola_recovers_vertex() {
        let (xv, yv) = parabola_vertex([0.0, 1.0, 3.0], [4.0, 1.0, 1.0]).unwrap();
        // y = (x - 2)^2 passes through (0,4),(1,1),(3,1).
        assert!((xv - 2.0).abs() < 1e-14 && yv.abs() < 1e-14);
    }

    #[test]
    fn minima_of_synthetic_cosine() {
        let k = TAU / LAMBDA;
        let r = lin_grid(0.2 * LAMBDA, 4.0 * LAMBDA, 400);
        let u: Vec<f64> = r.iter().map(|&x| (k * x).cos() / x).collect();
        let mins = find_minima(&r, &u).unwrap();
        let fine = lin_grid(0.2 * LAMBDA, 4.0 * LAMBDA, 400_000);
        let uf: Vec<f64> = fine.iter().map(|&x| (k * x).cos() / x).collect();
        let brute = extrema(&fine, &uf, 1.0);
        assert_eq!(mins.len(), brute.len());
        let h = r[1] - r[0];
        for (m, b) in mins.iter().zip(&brute) {
            assert!((m.r - b.r).abs() < 0.05 * h, "{} {}", m.r, b.r);
        }
    }

    #[test]
    fn monotone_and_flat_curves_have_no_minima() {
        let r = lin_grid(1.0, 2.0, 10);
        let mono: Vec<f64> = r.iter().map(|x| -1.0 / x).collect();
        assert!(matches!(find_minima(&r, &mono), Err(Error::EmptyResult)));
        assert!(matches!(
            find_minima(&r, &[1.0; 10]),
            Err(Error::EmptyResult)
        ));
        assert!(find_minima(&r[..2], &mono[..2]).is_err());
    }

    #[test]
    fn plateau_minimum_reported_at_smaller_r() {
        let r = [1.0, 2.0, 3.0, 4.0, 5.0];
        let u = [3.0, 1.0, 1.0, 2.0, 4.0];
        let m = find_minima(&r, &u).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].r, 2.0);
    }

    #[test]
    fn additive_composition() {
        let cfg = config(1e10, 0.3, log_grid(250e-9, 3e-6, 40));
        for p in total_potential(&cfg).unwrap() {
            assert_eq!(p.total_a, p.trap_a + p.ob_a + p.cp);
            assert_eq!(p.total_b, p.trap_b + p.ob_b + p.cp);
        }
        let off = config(0.0, 0.0, log_grid(250e-9, 3e-6, 20));
        for p in total_potential(&off).unwrap() {
            assert_eq!(p.total_a, p.cp);
            assert_eq!(p.trap_a, 0.0);
            assert_eq!(p.ob_b, 0.0);
        }
    }

    #[test]
    fn rejects_overlapping_grid() {
        let cfg = config(1e10, 0.0, log_grid(150e-9, 3e-6, 10));
        assert!(total_potential(&cfg).unwrap_err().is_input_error());
    }

    #[test]
    fn well_near_lambda() {
        let cfg = config(1e10, 0.0, log_grid(201e-9, 5.0 * LAMBDA, 3000));
        let pts = total_potential(&cfg).unwrap();
        let r: Vec<f64> = pts.iter().map(|p| p.r).collect();
        let u: Vec<f64> = pts.iter().map(|p| p.total_a / K_B).collect();
        let w = deepest_well_near(&r, &u, LAMBDA).unwrap();
        assert!(
            (w.minimum.r / LAMBDA - 0.946).abs() < 0.01,
            "{}",
            w.minimum.r / LAMBDA
        );
        assert!((130.0..=270.0).contains(&w.depth), "{}", w.depth);

        let cfg2 = config(2e10, 0.0, cfg.r_grid.clone());
        let u2: Vec<f64> = total_potential(&cfg2)
            .unwrap()
            .iter()
            .map(|p| p.total_a / K_B)
            .collect();
        let w2 = deepest_well_near(&r, &u2, LAMBDA).unwrap();
        assert!((w2.depth / w.depth - 2.0).abs() < 0.05 * 2.0);
    }

    #[test]
    fn phase_sweep_consistency() {
        let grid = log_grid(250e-9, 4e-6, 50);
        let phases: Vec<f64> = (0..101).map(|j| TAU * j as f64 / 101.0).collect();
        let cfg = config(1e10, 0.0, grid);
        let field = phase_sweep(&cfg, &phases).unwrap();
        let direct = total_potential(&cfg).unwrap();
        for (i, p) in direct.iter().enumerate() {
            assert_eq!(field.a(i, 0), p.total_a);
            assert_eq!(field.b(i, 0), p.total_b);
        }
        // Reflection about pi: the phase 2 pi - dphi_j is dphi_{101 - j}.
        for i in 0..field.r.len() {
            for j in 1..101 {
                let a = field.a(i, j);
                let b = field.b(i, 101 - j);
                assert!((a - b).abs() <= 1e-12 * a.abs(), "{i} {j}");
            }
        }
        assert!(phase_sweep(&cfg, &[TAU]).is_err());
    }

    #[test]
    fn opposite_oscillation_at_quarter_phase() {
        let cfg = config(
            1e10,
            std::f64::consts::FRAC_PI_2,
            log_grid(0.5 * LAMBDA, 5.0 * LAMBDA, 3000),
        );
        let pts = total_potential(&cfg).unwrap();
        let r: Vec<f64> = pts.iter().map(|p| p.r).collect();
        let ua: Vec<f64> = pts.iter().map(|p| p.total_a).collect();
        let ub: Vec<f64> = pts.iter().map(|p| p.total_b).collect();
        let mins_a = find_minima(&r, &ua).unwrap();
        let max_b = find_maxima(&r, &ub).unwrap();
        for m in mins_a.iter().filter(|m| m.r > 1.5 * LAMBDA) {
            let nearest = max_b
                .iter()
                .map(|x| (x.r - m.r).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < LAMBDA / 4.0);
        }
    }

    #[test]
    fn stability_crossings_only_at_conservative_phases() {
        let mut cfg = config(1e10, 0.0, log_grid(210e-9, 5.0 * LAMBDA, 800));
        cfg.options.tol_r = Some(LAMBDA / 100.0);
        let phases: Vec<f64> = (0..101).map(|j| TAU * j as f64 / 101.0).collect();
        let rep = stability_analysis(&cfg, &phases).unwrap();
        assert!(!rep.crossings.is_empty());
        assert!(rep.crossings_at_conservative_phases, "{:?}", rep.crossings);
        assert!(rep.conservative_phases.contains(&0.0));

        let off = config(0.0, 0.0, cfg.r_grid.clone());
        let rep = stability_analysis(&off, &phases).unwrap();
        assert!(rep.crossings.is_empty());
        assert!(rep.minima_a.iter().all(|m| m.is_empty()));
    }

    #[test]
    fn polarization_maps_are_rotations() {
        let cfg = config(1e10, 0.0, log_grid(250e-9, 3e-6, 10));
        let xs = lin_grid(-1.5e-6, 1.5e-6, 13);
        let yy = polarization_map(&cfg, PolarizationConfig::Yy, &xs, &xs).unwrap();
        let xx = polarization_map(&cfg, PolarizationConfig::Xx, &xs, &xs).unwrap();
        assert_eq!(yy.len(), xx.len());
        for p in &yy {
            // Rotating by 90 degrees maps (x, y) to (-y, x).
            let q = xx
                .iter()
                .find(|q| (q.x + p.y).abs() < 1e-15 && (q.y - p.x).abs() < 1e-15)
                .unwrap();
            assert!((p.u - q.u).abs() <= 1e-9 * p.u.abs());
        }
        assert!(yy.iter().all(|p| p.x.hypot(p.y) > 200e-9));
    }

    #[test]
    fn regimes_need_four_decades() {
        let cfg = config(1e10, 0.0, log_grid(1e-9, 1e-6, 10));
        assert!(matches!(
            classify_regimes(&cfg),
            Err(Error::InsufficientSpan { .. })
        ));
    }
}
