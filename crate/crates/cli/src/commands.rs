//! Subcommand implementations. Each computes everything in memory, then
//! hands the rendered files to [`write_run`].

use std::path::Path;

use casimirbind_core::constants::{K_B, UM2_PER_M2};
use casimirbind_core::{
    classify_regimes, cp_exact, cp_full_quadrature, optical_binding_exact, phase_sweep,
    polarization_map, required_squeezing, squeezed_equivalent, stability_from_field,
    total_potential, CpMethodChoice, PolarizationConfig, Separation, Target,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{write_run, CsvBuilder, Rendered, RunManifest};

pub const POTENTIAL_HEADER: &str =
    "r_m,U_trap_A_K,U_OB_A_K,U_OB_B_K,U_CP_K,U_total_A_K,U_total_B_K,cp_method";
pub const PHASE_HEADER: &str = "r_m,dphi_rad,U_A_K,U_B_K";
pub const MAP_HEADER: &str = "x_m,y_m,U_K";
pub const CURVES_HEADER: &str = "r_m,U_CP_K,U_OB_A_K";

/// Shared inputs of the file-producing subcommands.
pub struct Run<'a> {
    pub config: &'a RunConfig,
    pub out: &'a Path,
    pub timestamp: &'a str,
    pub threads: usize,
}

impl Run<'_> {
    fn csv(&self, command: &str, header: &str) -> CsvBuilder {
        CsvBuilder::new(command, self.config, self.timestamp, header)
    }

    fn finish(&self, command: &str, files: Vec<Rendered>) -> Result<RunManifest, CliError> {
        write_run(
            self.out,
            command,
            self.config,
            self.timestamp,
            self.threads,
            files,
        )
    }
}

fn json_file<T: Serialize>(name: &str, value: &T) -> Rendered {
    let mut body = serde_json::to_string_pretty(value).expect("output serializes");
    body.push('\n');
    Rendered {
        name: name.into(),
        body,
        rows: 0,
    }
}

pub fn potential(run: &Run) -> Result<RunManifest, CliError> {
    let scenario = run.config.scenario()?;
    let points = total_potential(&scenario)?;
    let mut csv = run.csv("potential", POTENTIAL_HEADER);
    for p in points.iter().map(|p| p.to_kelvin()) {
        csv.row(
            &[p.r, p.trap_a, p.ob_a, p.ob_b, p.cp, p.total_a, p.total_b],
            Some(p.cp_method.as_str()),
        )?;
    }
    run.finish("potential", vec![csv.finish("potential.csv")])
}

pub fn phase(run: &Run) -> Result<RunManifest, CliError> {
    let scenario = run.config.scenario()?;
    let field = phase_sweep(&scenario, &run.config.phases())?;
    let report = stability_from_field(&field, scenario.tol_r(), scenario.options.tol_phi)?;
    let mut csv = run.csv("phase", PHASE_HEADER);
    for (i, &r) in field.r.iter().enumerate() {
        for (j, &p) in field.dphi.iter().enumerate() {
            csv.row(&[r, p, field.a(i, j) / K_B, field.b(i, j) / K_B], None)?;
        }
    }
    run.finish(
        "phase",
        vec![
            csv.finish("phase.csv"),
            json_file("stability.json", &report),
        ],
    )
}

pub fn polmap(run: &Run, only: Option<PolarizationConfig>) -> Result<RunManifest, CliError> {
    let scenario = run.config.scenario()?;
    let axis = run.config.map_axis();
    let configs = only.map_or(PolarizationConfig::ALL.to_vec(), |p| vec![p]);
    let mut files = Vec::new();
    for pol in configs {
        let points = polarization_map(&scenario, pol, &axis, &axis)?;
        let mut csv = run.csv("polmap", MAP_HEADER);
        for p in points {
            csv.row(&[p.x, p.y, p.u / K_B], None)?;
        }
        files.push(csv.finish(&format!("polmap_{}.csv", pol.as_str())));
    }
    run.finish("polmap", files)
}

pub fn regimes(run: &Run) -> Result<RunManifest, CliError> {
    let scenario = run.config.scenario()?;
    let table = classify_regimes(&scenario)?;
    // CP and binding curves over the whole grid, as point dipoles.
    let eff = scenario.drive.effective()?;
    let (a, b, env) = (&scenario.sphere_a, &scenario.sphere_b, &scenario.env);
    let rows = scenario
        .r_grid
        .par_iter()
        .map(|&r| {
            let cp = match scenario.options.cp_method {
                CpMethodChoice::Matsubara => cp_exact(a, b, r, env),
                CpMethodChoice::Quadrature => cp_full_quadrature(a, b, r, env),
            }
            .map_err(|e| e.at(r))?;
            let ob = optical_binding_exact(a, b, &eff.coherent, &Separation::along_x(r), Target::A)
                .map_err(|e| e.at(r))?;
            Ok([r, cp.kelvin(), eff.multiplier * ob.value / K_B])
        })
        .collect::<Result<Vec<_>, casimirbind_core::Error>>()?;
    let mut csv = run.csv("regimes", CURVES_HEADER);
    for row in rows {
        csv.row(&row, None)?;
    }
    run.finish(
        "regimes",
        vec![
            json_file("regimes.json", &table),
            csv.finish("regimes_curves.csv"),
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SqueezeReport {
    pub r: f64,
    #[serde(rename = "dB")]
    pub db: f64,
    /// Equivalent coherent intensity [W/um^2].
    #[serde(rename = "I_eff")]
    pub i_eff: f64,
}

/// Squeezing for a target intensity [W/um^2], or the equivalent intensity of
/// a given squeeze parameter.
pub fn squeeze(
    intensity: Option<f64>,
    squeeze_r: Option<f64>,
    wavelength: f64,
) -> Result<SqueezeReport, CliError> {
    let r = match (intensity, squeeze_r) {
        (Some(i), None) => required_squeezing(i * UM2_PER_M2, wavelength)?.r,
        (None, Some(r)) => r,
        _ => {
            return Err(CliError::Config(
                "give exactly one of --intensity and --squeeze-r".into(),
            ))
        }
    };
    let i_eff = squeezed_equivalent(r, wavelength)? / UM2_PER_M2;
    Ok(SqueezeReport {
        r,
        db: 20.0 * r * std::f64::consts::LOG10_E,
        i_eff,
    })
}

/// A short human summary of a finished run.
pub fn summary(manifest: &RunManifest) -> String {
    let files: Vec<String> = manifest
        .outputs
        .iter()
        .map(|o| format!("{} ({} rows)", o.file, o.rows))
        .collect();
    format!("{}: wrote {}", manifest.command, files.join(", "))
}
