//! CSV and manifest writers.
//!
//! Floats are printed like C's `%.17g`, which round-trips every `f64` and does
//! not depend on the locale. Lines end in `\n` with no trailing whitespace.

use std::fmt::Write as _;

use crate::sim::{AggregateCell, StepRecord};

pub const STEPS_HEADER: &str = "t,S,pool_price,x1,x2,fee_income,hat_f,arb_profit,noise_venue,noise_side,noise_size";
pub const SWEEP_HEADER: &str = "gamma,sigma,lambda,mean_diff,std_diff,n_paths";

pub const STEPS_FILE: &str = "steps.csv";
pub const STEPS_MANIFEST: &str = "steps.manifest.txt";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SWEEP_MANIFEST: &str = "sweep.manifest.txt";
pub const VERIFY_REPORT: &str = "verify_report.txt";

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.17g`: 17 significant digits, trailing zeros removed, scientific
/// notation outside `1e-5 <= |x| < 1e17`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn steps_csv(steps: &[StepRecord]) -> String {
    let mut out = String::with_capacity(steps.len() * 200 + 128);
    out.push_str(STEPS_HEADER);
    out.push('\n');
    for rec in steps {
        let (venue, side, size) = match &rec.noise {
            Some(ev) => (ev.venue.as_str(), ev.side.as_str(), format_float(ev.size)),
            None => ("none", "none", "0".to_string()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            format_float(rec.t),
            format_float(rec.s),
            format_float(rec.pool_price),
            format_float(rec.x1),
            format_float(rec.x2),
            format_float(rec.fee_income),
            format_float(rec.hat_f),
            format_float(rec.arb_profit),
            venue,
            side,
            size
        );
    }
    out
}

/// One row per cell, in the order given (the engine emits `(lambda, sigma, gamma)` order).
pub fn sweep_csv(cells: &[AggregateCell]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for cell in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_float(cell.gamma),
            format_float(cell.sigma),
            format_float(cell.lambda),
            format_float(cell.mean_diff),
            format_float(cell.std_diff),
            cell.n_paths
        );
    }
    out
}

/// Metadata written as `#` comments ahead of the resolved config, so the
/// manifest itself is a valid config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub master_seed: u64,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
    pub config_echo: String,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# cfm-lab run manifest");
        let _ = writeln!(out, "# command = {}", self.command);
        let _ = writeln!(out, "# tool_version = {}", self.tool_version);
        let _ = writeln!(out, "# master_seed = {}", self.master_seed);
        let _ = writeln!(out, "# timestamp_unix = {}", self.timestamp_unix);
        for path in &self.outputs {
            let _ = writeln!(out, "# output = {path}");
        }
        let _ = writeln!(
            out,
            "# note = hat_f uses the pool marked to market at the reference price for every gamma; the bound is exact only at gamma = 1"
        );
        out.push_str(&self.config_echo);
        out
    }
}
