//! Run configuration: presets, config files and flag overrides, merged in
//! that order into one fully resolved [`RunConfig`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use casimirbind_core::constants::UM2_PER_M2;
use casimirbind_core::{
    lin_grid, log_grid, CatMode, CoherentDrive, CpMethodChoice, DriveState, DrudeLorentzParams,
    PolarizationConfig, ScenarioConfig, ScenarioOptions, Sphere, ThermalEnvironment,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const PRESETS: [&str; 5] = ["fig2", "fig3a", "fig3b", "fig4", "fig5"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Lin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min_m: f64,
    pub max_m: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    /// Parses `min:max:points:log|lin`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("grid must be min:max:points:log|lin, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let spacing = match parts[3] {
            "log" => Spacing::Log,
            "lin" => Spacing::Lin,
            _ => return Err(bad()),
        };
        Ok(Self {
            min_m: parts[0].trim().parse().map_err(|_| bad())?,
            max_m: parts[1].trim().parse().map_err(|_| bad())?,
            points: parts[2].trim().parse().map_err(|_| bad())?,
            spacing,
        })
    }

    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.min_m > 0.0 && self.max_m > self.min_m && self.max_m.is_finite()) {
            return Err(CliError::Config(format!(
                "grid needs 0 < min < max, got [{}, {}]",
                self.min_m, self.max_m
            )));
        }
        if self.points < 2 {
            return Err(CliError::Config("grid needs at least 2 points".into()));
        }
        Ok(match self.spacing {
            Spacing::Log => log_grid(self.min_m, self.max_m, self.points),
            Spacing::Lin => lin_grid(self.min_m, self.max_m, self.points),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    Coherent,
    SqueezedVacuum,
    Cat,
}

/// A fully resolved run. Every field is explicit, so the echo in a manifest
/// reproduces the run on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub radius_m: f64,
    pub material: DrudeLorentzParams,
    pub temperature_k: f64,
    pub drive_kind: DriveKind,
    /// Tweezer intensity [W/um^2]; the cat reference intensity for cat drives.
    pub intensity_w_um2: f64,
    pub wavelength_m: f64,
    pub dphi_rad: f64,
    pub pol: PolarizationConfig,
    pub squeeze_r: f64,
    pub cat_beta: f64,
    pub cat_theta: f64,
    pub cat_mode: CatMode,
    pub grid: GridSpec,
    pub phase_points: usize,
    /// Half width of the square polarization-map window [m].
    pub map_extent_m: f64,
    pub map_points: usize,
    pub include_trap: bool,
    pub cp_method: CpMethodChoice,
    pub tol_r_m: Option<f64>,
    pub tol_phi_rad: f64,
}

const LAMBDA0: f64 = 1064e-9;

fn base() -> RunConfig {
    RunConfig {
        preset: None,
        radius_m: 100e-9,
        material: DrudeLorentzParams::SILICA,
        temperature_k: 300.0,
        drive_kind: DriveKind::Coherent,
        intensity_w_um2: 1e-2,
        wavelength_m: LAMBDA0,
        dphi_rad: 0.0,
        pol: PolarizationConfig::Yy,
        squeeze_r: 0.0,
        cat_beta: 0.0,
        cat_theta: 0.0,
        cat_mode: CatMode::Superposition,
        grid: GridSpec {
            min_m: 210e-9,
            max_m: 5.0 * LAMBDA0,
            points: 2000,
            spacing: Spacing::Log,
        },
        phase_points: 101,
        map_extent_m: 2.0 * LAMBDA0,
        map_points: 161,
        include_trap: true,
        cp_method: CpMethodChoice::Matsubara,
        tol_r_m: None,
        tol_phi_rad: PI / 50.0,
    }
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let mut c = base();
    c.preset = Some(name.to_string());
    match name {
        "fig2" => {
            c.grid = GridSpec {
                min_m: 1e-10,
                max_m: 1e-2,
                points: 400,
                spacing: Spacing::Log,
            };
        }
        "fig3a" | "fig4" | "fig5" => {}
        "fig3b" => c.dphi_rad = FRAC_PI_2,
        _ => {
            return Err(CliError::Config(format!(
                "unknown preset {name:?}; known: {}",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(c)
}

/// Shallow merge of `overlay` into `base`; both must be JSON objects.
fn merge(base: &mut Map<String, Value>, overlay: Map<String, Value>) {
    for (k, v) in overlay {
        base.insert(k, v);
    }
}

fn as_object(v: Value, what: &str) -> Result<Map<String, Value>, CliError> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Config(format!("{what} must be a JSON object"))),
    }
}

/// Reads a config file. A run manifest is accepted too: its `config` echo
/// is used.
pub fn read_config_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("config {} is not valid JSON: {e}", path.display()))
    })?;
    let mut m = as_object(v, "config")?;
    if m.contains_key("tool") {
        if let Some(inner) = m.remove("config") {
            m = as_object(inner, "manifest config")?;
        }
    }
    // A material may be given by name.
    if let Some(Value::String(name)) = m.get("material") {
        let params = DrudeLorentzParams::preset(name)
            .ok_or_else(|| CliError::Config(format!("unknown material {name:?}")))?;
        m.insert(
            "material".into(),
            serde_json::to_value(params).expect("material serializes"),
        );
    }
    Ok(m)
}

/// Resolves preset < file < flags. The preset named in the file (or the
/// default `fig3a`) applies unless a preset flag overrides it.
pub fn resolve(
    preset_flag: Option<&str>,
    file: Option<Map<String, Value>>,
    flags: Map<String, Value>,
) -> Result<RunConfig, CliError> {
    let file_preset = file
        .as_ref()
        .and_then(|m| m.get("preset"))
        .and_then(Value::as_str)
        .map(str::to_string);
    let name = preset_flag
        .map(str::to_string)
        .or(file_preset)
        .unwrap_or_else(|| "fig3a".to_string());
    let mut merged = as_object(
        serde_json::to_value(preset(&name)?).expect("config serializes"),
        "preset",
    )?;
    if let Some(f) = file {
        merge(&mut merged, f);
    }
    merge(&mut merged, flags);
    merged.insert("preset".into(), Value::String(name));
    let cfg: RunConfig = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
    cfg.check()?;
    Ok(cfg)
}

impl RunConfig {
    fn check(&self) -> Result<(), CliError> {
        let c = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(msg.into()))
            }
        };
        c(
            self.intensity_w_um2 >= 0.0 && self.intensity_w_um2.is_finite(),
            "intensity must be >= 0",
        )?;
        c(self.dphi_rad.is_finite(), "dphi must be finite")?;
        c(self.phase_points >= 1, "phase_points must be >= 1")?;
        c(self.map_points >= 2, "map_points must be >= 2")?;
        c(
            self.map_extent_m > 0.0 && self.map_extent_m.is_finite(),
            "map_extent_m must be > 0",
        )?;
        self.grid.values()?;
        Ok(())
    }

    pub fn intensity_si(&self) -> f64 {
        self.intensity_w_um2 * UM2_PER_M2
    }

    pub fn drive(&self) -> Result<DriveState, CliError> {
        let (pa, _) = self.pol.vectors();
        Ok(match self.drive_kind {
            DriveKind::Coherent => {
                let (pa, pb) = self.pol.vectors();
                let mut d = CoherentDrive::symmetric(
                    self.intensity_si(),
                    self.wavelength_m,
                    self.dphi_rad,
                    pa,
                )?;
                d.b.polarization = pb;
                DriveState::Coherent(d)
            }
            DriveKind::SqueezedVacuum => DriveState::SqueezedVacuum {
                r: self.squeeze_r,
                wavelength: self.wavelength_m,
                polarization: pa,
            },
            DriveKind::Cat => DriveState::Cat {
                beta_mag: self.cat_beta,
                theta: self.cat_theta,
                wavelength: self.wavelength_m,
                polarization: pa,
                reference_intensity: self.intensity_si(),
                mode: self.cat_mode,
            },
        })
    }

    pub fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let sphere = Sphere::new(self.radius_m, self.material)?;
        let cfg = ScenarioConfig {
            sphere_a: sphere,
            sphere_b: sphere,
            drive: self.drive()?,
            env: ThermalEnvironment::new(self.temperature_k)?,
            r_grid: self.grid.values()?,
            options: ScenarioOptions {
                include_trap: self.include_trap,
                cp_method: self.cp_method,
                tol_r: self.tol_r_m,
                tol_phi: self.tol_phi_rad,
            },
        };
        cfg.validate_physics()?;
        Ok(cfg)
    }

    /// Phase grid `2 pi j / n`, `j = 0..n`.
    pub fn phases(&self) -> Vec<f64> {
        (0..self.phase_points)
            .map(|j| TAU * j as f64 / self.phase_points as f64)
            .collect()
    }

    pub fn map_axis(&self) -> Vec<f64> {
        lin_grid(-self.map_extent_m, self.map_extent_m, self.map_points)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
