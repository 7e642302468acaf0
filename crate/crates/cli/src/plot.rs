//! Gnuplot script generation for a finished run directory. Pure templating:
//! the script reads the CSVs by relative path at plot time.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::output::{RunManifest, MANIFEST};

pub const SCRIPT: &str = "plot.gp";

fn read_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path)
        .map_err(|_| CliError::MissingData(format!("{} not found", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::MissingData(format!("{} is not a run manifest: {e}", path.display()))
    })
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
}

fn potential(s: &mut String, file: &str, title: &str) {
    header(s, title);
    let _ = writeln!(s, "set logscale x");
    let _ = writeln!(s, "set xlabel 'r [m]'");
    let _ = writeln!(s, "set ylabel 'U [K]'");
    let _ = writeln!(s, "plot '{file}' using 1:6 with lines title 'U_A', \\");
    let _ = writeln!(s, "     '{file}' using 1:7 with lines title 'U_B'");
}

fn phase(s: &mut String, file: &str, title: &str) {
    header(s, title);
    let _ = writeln!(s, "set logscale x");
    let _ = writeln!(s, "set xlabel 'r [m]'");
    let _ = writeln!(s, "set ylabel 'dphi [rad]'");
    let _ = writeln!(s, "set cblabel 'U [K]'");
    let _ = writeln!(s, "set view map");
    let _ = writeln!(s, "set multiplot layout 1,2");
    let _ = writeln!(
        s,
        "splot '{file}' using 1:2:3 with points pointtype 5 pointsize 0.3 palette title 'sphere A'"
    );
    let _ = writeln!(
        s,
        "splot '{file}' using 1:2:4 with points pointtype 5 pointsize 0.3 palette title 'sphere B'"
    );
    let _ = writeln!(s, "unset multiplot");
}

fn polmap(s: &mut String, file: &str, title: &str) {
    header(s, title);
    let _ = writeln!(s, "set xlabel 'x [m]'");
    let _ = writeln!(s, "set ylabel 'y [m]'");
    let _ = writeln!(s, "set cblabel 'U [K]'");
    let _ = writeln!(s, "set view map");
    let _ = writeln!(s, "set size ratio -1");
    let _ = writeln!(
        s,
        "splot '{file}' using 1:2:3 with points pointtype 5 pointsize 0.3 palette notitle"
    );
}

fn curves(s: &mut String, file: &str, title: &str) {
    header(s, title);
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set format y '10^{{%L}}'");
    let _ = writeln!(s, "set xlabel 'r [m]'");
    let _ = writeln!(s, "set ylabel '|U| [K]'");
    let _ = writeln!(
        s,
        "plot '{file}' using 1:(abs($2)) with lines title '|U_CP|', \\"
    );
    let _ = writeln!(
        s,
        "     '{file}' using 1:(abs($3)) with lines title '|U_OB|'"
    );
}

/// Renders the script for the run in `dir` without touching the disk.
pub fn render(dir: &Path) -> Result<String, CliError> {
    let m = read_manifest(dir)?;
    for o in &m.outputs {
        if !dir.join(&o.file).is_file() {
            return Err(CliError::MissingData(format!(
                "{} listed in the manifest is missing",
                o.file
            )));
        }
    }
    let preset = m.config.preset.clone().unwrap_or_default();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# {} {} plot for run {} ({preset})",
        m.tool, m.command, m.config_hash
    );
    let _ = writeln!(s, "set terminal pngcairo size 1000,700");
    for o in m.outputs.iter().filter(|o| o.file.ends_with(".csv")) {
        let stem = o.file.trim_end_matches(".csv");
        let _ = writeln!(s, "\nset output '{stem}.png'");
        let title = format!("{preset} {stem}");
        match m.command.as_str() {
            "potential" => potential(&mut s, &o.file, &title),
            "phase" => phase(&mut s, &o.file, &title),
            "polmap" => polmap(&mut s, &o.file, &title),
            "regimes" => curves(&mut s, &o.file, &title),
            other => {
                return Err(CliError::MissingData(format!(
                    "no plot template for command {other:?}"
                )))
            }
        }
        let _ = writeln!(s, "reset");
    }
    Ok(s)
}
