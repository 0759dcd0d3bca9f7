//! The `simulate`, `sweep` and `verify` commands. Each returns a process exit
//! code; the binary only parses flags and forwards here.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{render_sim_config, render_sweep_config, ConfigMap};
use crate::error::{CfmError, Result};
use crate::report::{
    steps_csv, sweep_csv, RunManifest, STEPS_FILE, STEPS_MANIFEST, SWEEP_FILE, SWEEP_MANIFEST, TOOL_VERSION,
    VERIFY_REPORT,
};
use crate::sim::{run_path, run_sweep};
use crate::verify::{run_all, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunArgs {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    /// `KEY=VALUE` overrides, applied in order after the config file.
    pub set: Vec<String>,
}

pub fn exit_code_for(err: &CfmError) -> i32 {
    match err {
        CfmError::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Reads the config file (if any) and applies overrides.
pub fn load_config(args: &RunArgs) -> Result<ConfigMap> {
    let mut map = match &args.config {
        Some(path) => ConfigMap::parse(&fs::read_to_string(path)?)?,
        None => ConfigMap::default(),
    };
    for assignment in &args.set {
        map.apply_override(assignment)?;
    }
    if let Some(seed) = args.seed {
        map.set("master_seed", seed)?;
    }
    if let Some(paths) = args.paths {
        map.set("n_paths", paths)?;
    }
    Ok(map)
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_outputs(out: &Path, files: &[(&str, String)]) -> Result<()> {
    fs::create_dir_all(out)?;
    for (name, body) in files {
        fs::write(out.join(name), body)?;
    }
    Ok(())
}

/// Single path (index 0): writes `steps.csv` and its manifest.
pub fn simulate(args: &RunArgs) -> Result<PathBuf> {
    let cfg = load_config(args)?.to_sim_config()?;
    let result = run_path(&cfg, 0)?;
    let csv = steps_csv(result.steps.as_deref().unwrap_or_default());
    let manifest = RunManifest {
        command: "simulate".into(),
        tool_version: TOOL_VERSION.into(),
        master_seed: cfg.master_seed,
        timestamp_unix: timestamp(),
        outputs: vec![STEPS_FILE.into()],
        config_echo: render_sim_config(&cfg),
    };
    write_outputs(&args.out, &[(STEPS_FILE, csv), (STEPS_MANIFEST, manifest.render())])?;
    Ok(args.out.join(STEPS_FILE))
}

/// Grid sweep: writes `sweep.csv` and its manifest.
pub fn sweep(args: &RunArgs) -> Result<PathBuf> {
    let (grid, base) = load_config(args)?.to_sweep()?;
    let cells = run_sweep(&grid, &base)?;
    let manifest = RunManifest {
        command: "sweep".into(),
        tool_version: TOOL_VERSION.into(),
        master_seed: base.master_seed,
        timestamp_unix: timestamp(),
        outputs: vec![SWEEP_FILE.into()],
        config_echo: render_sweep_config(&grid, &base),
    };
    write_outputs(&args.out, &[(SWEEP_FILE, sweep_csv(&cells)), (SWEEP_MANIFEST, manifest.render())])?;
    Ok(args.out.join(SWEEP_FILE))
}

pub fn cmd_simulate(args: &RunArgs) -> i32 {
    report_result(simulate(args))
}

pub fn cmd_sweep(args: &RunArgs) -> i32 {
    report_result(sweep(args))
}

fn report_result(result: Result<PathBuf>) -> i32 {
    match result {
        Ok(path) => {
            println!("wrote {}", path.display());
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

/// Runs every property suite, prints one line per suite and writes the same
/// lines to `verify_report.txt` under `out`.
pub fn cmd_verify(out: &Path, opts: &VerifyOptions) -> i32 {
    let outcomes = match run_all(opts) {
        Ok(outcomes) => outcomes,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VERIFY_FAILED;
        }
    };
    let mut report = String::new();
    for outcome in &outcomes {
        let line = outcome.line();
        println!("{line}");
        report.push_str(&line);
        report.push('\n');
    }
    if let Err(err) = write_outputs(out, &[(VERIFY_REPORT, report)]) {
        eprintln!("error: {err}");
        return EXIT_IO;
    }
    if outcomes.iter().all(|o| o.passed) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}
