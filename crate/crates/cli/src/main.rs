use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ghostsnr::acquisition::{self, AcquisitionQuery, AcquisitionReport, Side};
use ghostsnr::analytic::{self, SnrResult};
use ghostsnr::wick::{variance_c, OracleOptions};
use ghostsnr::model::band_of;
use ghostsnr::Band;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

mod config;
mod figure;
mod render;

use config::{load_value, log_space, set_path, Built, ConfigError, RunConfig};
use render::{fmt_g, svg_loglog, Table};

/// Failed comparison; exit code 2.
#[derive(Debug)]
struct ValidationFailed(String);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailed {}

#[derive(Parser)]
#[command(name = "ghostsnr", version, about = "Ghost-imaging SNR: closed forms, moment-factoring oracle, Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. --set detector.eta=0.8 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print machine-readable JSON.
    #[arg(long)]
    json: bool,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form SNR for one configuration, or a sweep if the config has one.
    Snr(Common),
    /// Curves of normalized SNR against brightness (2a 2b 3a 3b 4a 4b).
    Figure {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the closed form with the oracle, or the oracle with Monte Carlo.
    Validate {
        #[arg(long, conflicts_with = "mc")]
        oracle: bool,
        #[arg(long)]
        mc: bool,
        /// Relative tolerance for --oracle.
        #[arg(long, default_value_t = 0.15)]
        tolerance: f64,
        /// Largest |z| accepted for --mc.
        #[arg(long, default_value_t = 3.0)]
        max_z: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Averaging time of a quantum source relative to a classical one.
    Acquisition {
        /// Built-in pair: broadband or cross-band.
        #[arg(long, conflicts_with = "config")]
        example: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Snr(c) => cmd_snr(&c),
        Cmd::Figure { name, common } => cmd_figure(&name, &common),
        Cmd::Validate {
            oracle,
            mc,
            tolerance,
            max_z,
            common,
        } => cmd_validate(oracle, mc, tolerance, max_z, &common),
        Cmd::Acquisition { example, common } => cmd_acquisition(example.as_deref(), &common),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ValidationFailed>().is_some() || e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<ghostsnr::Error>() {
        Some(ghostsnr::Error::NonConvergence(_)) => 3,
        Some(ghostsnr::Error::InvalidParameter { .. }) => 2,
        Some(ghostsnr::Error::UnsupportedState(_) | ghostsnr::Error::UnsupportedRegime(_)) => 2,
        _ => 1,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load(c: &Common) -> Result<(Value, RunConfig)> {
    let v = load_value(c.config.as_deref(), &c.set)?;
    let rc = RunConfig::from_value(v.clone())?;
    Ok((v, rc))
}

fn cmd_snr(c: &Common) -> Result<()> {
    let (v, rc) = load(c)?;
    let csv = c.csv.clone().or(rc.output.csv.as_ref().map(PathBuf::from));
    let svg = c.svg.clone().or(rc.output.svg.as_ref().map(PathBuf::from));
    let json = c.json || rc.output.json;
    if let Some(sw) = rc.sweep.clone() {
        let mut base = v;
        if let Some(o) = base.as_object_mut() {
            o.remove("sweep");
        }
        let xs = log_space(sw.from, sw.to, sw.points.max(1));
        let rows: Vec<Result<Vec<f64>>> = xs
            .par_iter()
            .map(|&x| {
                let mut vv = base.clone();
                set_path(&mut vv, &sw.variable, x.into())?;
                let b = RunConfig::from_value(vv)?.build()?;
                let r = analytic::snr(&b.query(b.ti_or(1.0))?)?;
                Ok(vec![
                    x,
                    r.snr,
                    r.snr_normalized,
                    r.asymptotes.low_brightness / r.inputs.ti_over_t0,
                    r.asymptotes.high_brightness / r.inputs.ti_over_t0,
                ])
            })
            .collect();
        let mut t = Table::new(
            [sw.variable.as_str(), "snr", "snr_normalized", "low_asymptote", "high_asymptote"]
                .map(String::from)
                .to_vec(),
        );
        t.rows = rows.into_iter().collect::<Result<_>>()?;
        if let Some(p) = &svg {
            let mut plot = t.clone();
            plot.header.remove(1);
            for r in &mut plot.rows {
                r.remove(1);
            }
            write_file(p, &svg_loglog(&plot, "SNR sweep", "SNR T0/TI"))?;
        }
        match &csv {
            Some(p) => write_file(p, &t.to_csv())?,
            None => print!("{}", t.to_csv()),
        }
        return Ok(());
    }

    let b = rc.build()?;
    let r = analytic::snr(&b.query(b.ti_or(1.0))?)?;
    if let Some(p) = &csv {
        let mut t = Table::new(
            ["brightness", "omega_b_t0", "ti_over_t0", "snr", "snr_normalized", "low_asymptote", "high_asymptote"]
                .map(String::from)
                .to_vec(),
        );
        t.rows.push(vec![
            r.inputs.brightness,
            r.inputs.omega_b_t0,
            r.inputs.ti_over_t0,
            r.snr,
            r.snr_normalized,
            r.asymptotes.low_brightness / r.inputs.ti_over_t0,
            r.asymptotes.high_brightness / r.inputs.ti_over_t0,
        ]);
        write_file(p, &t.to_csv())?;
    }
    if json {
        print_json(&r)
    } else {
        print_snr(&r);
        Ok(())
    }
}

fn print_snr(r: &SnrResult) {
    let n = &r.inputs;
    println!("cell              {:?}", r.cell);
    println!(
        "inputs            I={} omegaB_T0={} rho0sq_over_A1={} AT_prime_over_rho0sq={} eta={} |T|={} TI_over_T0={}",
        fmt_g(n.brightness),
        fmt_g(n.omega_b_t0),
        fmt_g(n.rho_sq_over_a1),
        fmt_g(n.area_over_rho_sq),
        fmt_g(n.eta),
        fmt_g(n.transmission),
        fmt_g(n.ti_over_t0)
    );
    println!("snr               {}", fmt_g(r.snr));
    println!("snr_normalized    {}", fmt_g(r.snr_normalized));
    println!("numerator         {}", fmt_g(r.numerator));
    println!("noise terms");
    for t in &r.noise_terms {
        println!("  {:<28} {}", t.label, fmt_g(t.value));
    }
    println!("dominant          {}", r.dominant);
    println!("low asymptote     {}", fmt_g(r.asymptotes.low_brightness));
    println!("high asymptote    {}", fmt_g(r.asymptotes.high_brightness));
    for w in &r.warnings {
        println!("warning: {w:?}");
    }
}

fn cmd_figure(name: &str, c: &Common) -> Result<()> {
    let mut f = figure::Figure::by_name(name)?;
    for s in &c.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("overrides take the form key=value, got `{s}`"))?;
        f.apply(k, v)?;
    }
    let t = f.table()?;
    if let Some(p) = &c.svg {
        let title = format!("Fig. {}: {}", f.name, f.title);
        write_file(p, &svg_loglog(&t, &title, "SNR T0/TI"))?;
    }
    match &c.csv {
        Some(p) => write_file(p, &t.to_csv()),
        None => {
            print!("{}", t.to_csv());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct OracleReport {
    analytic_snr: f64,
    oracle_snr: f64,
    oracle_snr_correlated_only: f64,
    relative_difference: f64,
    tolerance: f64,
    pass: bool,
    quadrature_error_estimate: f64,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct McReport {
    mc_snr: f64,
    stderr: f64,
    trials: usize,
    oracle_snr: f64,
    analytic_snr: Option<f64>,
    z: f64,
    max_z: f64,
    pass: bool,
    warnings: Vec<String>,
}

/// Averaging time for validation runs when the config gives none.
fn validation_ti(b: &Built) -> f64 {
    let t0 = b.t0();
    b.averaging_time
        .unwrap_or(1e3 * t0.max(1.0 / b.system.detector.omega_b()))
}

fn cmd_validate(oracle: bool, mc: bool, tol: f64, max_z: f64, c: &Common) -> Result<()> {
    if oracle == mc {
        bail!("choose one of --oracle or --mc");
    }
    let (_, rc) = load(c)?;
    let b = rc.build()?;
    let ti = validation_ti(&b);
    if mc && !b.system.source.kind().is_classical() {
        return Err(ghostsnr::Error::UnsupportedState(
            "the quantum state has no proper P representation; use --oracle".into(),
        )
        .into());
    }
    let analytic = analytic::snr(&b.query(ti)?).ok();
    let o = variance_c(&b.system, ti, &OracleOptions::default())?;
    if oracle {
        let a = analytic
            .as_ref()
            .map(|r| r.snr)
            .ok_or_else(|| anyhow::anyhow!("no closed form for this configuration"))?;
        let rel = o.snr / a - 1.0;
        let rep = OracleReport {
            analytic_snr: a,
            oracle_snr: o.snr,
            oracle_snr_correlated_only: o.snr_correlated_only(),
            relative_difference: rel,
            tolerance: tol,
            pass: rel.abs() <= tol,
            quadrature_error_estimate: o.quadrature_error_estimate,
            warnings: o.warnings.clone(),
        };
        if c.json {
            print_json(&rep)?;
        } else {
            println!("analytic SNR              {}", fmt_g(rep.analytic_snr));
            println!("oracle SNR                {}", fmt_g(rep.oracle_snr));
            println!("oracle SNR (correlated)   {}", fmt_g(rep.oracle_snr_correlated_only));
            println!("relative difference       {}", fmt_g(rel));
            for w in &rep.warnings {
                println!("warning: {w}");
            }
            println!("{} (tolerance {})", if rep.pass { "PASS" } else { "FAIL" }, fmt_g(tol));
        }
        if !rep.pass {
            return Err(ValidationFailed(format!("oracle differs from the closed form by {}", fmt_g(rel))).into());
        }
        return Ok(());
    }

    let est = ghostsnr::mc::estimate_snr(&b.system, ti, c.trials, c.seed)?;
    let z = (est.snr_hat - o.snr) / est.stderr;
    let rep = McReport {
        mc_snr: est.snr_hat,
        stderr: est.stderr,
        trials: est.n_trials,
        oracle_snr: o.snr,
        analytic_snr: analytic.map(|r| r.snr),
        z,
        max_z,
        pass: z.abs() <= max_z,
        warnings: est.warnings.clone(),
    };
    if c.json {
        print_json(&rep)?;
    } else {
        println!("MC SNR        {} +- {} ({} trials)", fmt_g(rep.mc_snr), fmt_g(rep.stderr), rep.trials);
        println!("oracle SNR    {}", fmt_g(rep.oracle_snr));
        if let Some(a) = rep.analytic_snr {
            println!("analytic SNR  {}", fmt_g(a));
        }
        println!("z             {}", fmt_g(z));
        for w in &rep.warnings {
            println!("warning: {w}");
        }
        println!("{} (|z| <= {})", if rep.pass { "PASS" } else { "FAIL" }, fmt_g(max_z));
    }
    if !rep.pass {
        return Err(ValidationFailed(format!("MC differs from the oracle by z = {}", fmt_g(z))).into());
    }
    Ok(())
}

fn side_from(v: &Value, name: &str) -> Result<Side> {
    let sub = v
        .get(name)
        .cloned()
        .ok_or_else(|| ConfigError {
            field: name.into(),
            reason: format!("the pair config needs a `{name}` block"),
        })?;
    let b = RunConfig::from_value(sub)?.build()?;
    let bt = b.system.detector.omega_b() * b.t0();
    let band = match band_of(bt, &Default::default()) {
        Band::Intermediate if bt >= 1.0 => Band::Narrowband,
        Band::Intermediate => Band::Broadband,
        x => x,
    };
    let mut side = Side::new(b.system, band);
    side.area_override = b.area_override;
    Ok(side)
}

fn cmd_acquisition(example: Option<&str>, c: &Common) -> Result<()> {
    let (q, reference): (AcquisitionQuery, Option<(String, f64)>) = match example {
        Some(ex) => {
            let mut eta = 0.9;
            for s in &c.set {
                match s.split_once('=') {
                    Some(("eta" | "detector.eta", x)) => eta = x.parse().context("eta")?,
                    _ => bail!("examples accept only --set eta=<value>"),
                }
            }
            match ex {
                "broadband" => (
                    acquisition::broadband_example(eta)?,
                    Some(("1/(100 eta^2)".into(), 1.0 / (100.0 * eta * eta))),
                ),
                "cross-band" | "crossband" => (
                    acquisition::cross_band_example(eta)?,
                    Some(("4e-3/eta^2".into(), 4e-3 / (eta * eta))),
                ),
                _ => bail!("unknown example `{ex}`; expected broadband or cross-band"),
            }
        }
        None => {
            let v = load_value(c.config.as_deref(), &c.set)?;
            let target = v.get("target_snr").and_then(Value::as_f64).unwrap_or(1.0);
            let q = AcquisitionQuery {
                classical: side_from(&v, "classical")?,
                quantum: side_from(&v, "quantum")?,
                target_snr: target,
            };
            (q, None)
        }
    };
    let r: AcquisitionReport = acquisition::compare(&q)?;
    if c.json {
        #[derive(Serialize)]
        struct Out<'a> {
            #[serde(flatten)]
            report: &'a AcquisitionReport,
            reference: Option<f64>,
        }
        return print_json(&Out {
            report: &r,
            reference: reference.as_ref().map(|x| x.1),
        });
    }
    match &reference {
        Some((label, val)) => println!("T_q/T_c = {} (reference {label} = {})", fmt_g(r.ratio), fmt_g(*val)),
        None => println!("T_q/T_c = {}", fmt_g(r.ratio)),
    }
    println!("T_q = {} s, T_c = {} s for SNR {}", fmt_g(r.t_quantum), fmt_g(r.t_classical), fmt_g(q.target_snr));
    println!("inversion ratio = {}", fmt_g(r.inversion_ratio));
    for w in &r.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
