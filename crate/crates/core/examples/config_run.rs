//! Drives the same code path as the command-line tool from a TOML string,
//! then repeats the run from its manifest.
//!
//! cargo run --release --example config_run

use nv_dnp::config::parse_config;
use nv_dnp::run::{load_config, run, RunOptions, Subcommand};

const DOC: &str = r#"
[system]
field.magnitude = "4.04 mT"
field.theta = "42 deg"
field.phi = "85 deg"
hyperfine.parallel = "199.7 MHz"
hyperfine.perpendicular = "120.3 MHz"
hyperfine.polar = "106 deg"
hyperfine.azimuth = "120 deg"
rabi = "1.4 MHz"

[sweep]
start = -10
stop = 10
points = 21
center = "midpoint"
time = "30 us"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(DOC)?;
    let dir = std::env::temp_dir().join("nv-dnp-config-run");
    std::fs::create_dir_all(&dir)?;
    let first = dir.join("spectrum.tsv");

    let out = run(Subcommand::SweepFrequency, cfg, &RunOptions { out: Some(first.clone()), ..Default::default() })?;
    let manifest = out.manifest_path.expect("manifest written next to the data");
    println!("data:     {}", first.display());
    println!("manifest: {}", manifest.display());
    println!("derived:  {}", out.manifest["derived"]);

    let again = run(
        Subcommand::SweepFrequency,
        load_config(&manifest)?,
        &RunOptions { out: Some(dir.join("repeat.tsv")), ..Default::default() },
    )?;
    println!("rerun identical: {}", again.data == out.data);
    Ok(())
}
