//! `capacity solve | sweep-theta | sweep-ratio | regimes`.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde_json::json;
use sicap_core::capacity::{build_lp, c_sic, regime_report, solve_lp, LpForm, LpSolution, Regime};
use sicap_core::eit::eit_system;
use sicap_core::spectral::{pencil_spectrum, PencilSpectrum};

use crate::io::{load_channel, resolve_out_dir, sig, CsvTable, RunManifest, Units};
use crate::util::parallel_map;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormChoice {
    DualMin,
    CappedMax,
    Both,
}

impl FormChoice {
    fn forms(self) -> Vec<LpForm> {
        match self {
            FormChoice::DualMin => vec![LpForm::DualMin],
            FormChoice::CappedMax => vec![LpForm::CappedMax],
            FormChoice::Both => vec![LpForm::DualMin, LpForm::CappedMax],
        }
    }
}

fn form_name(form: LpForm) -> &'static str {
    match form {
        LpForm::DualMin => "DualMin",
        LpForm::CappedMax => "CappedMax",
    }
}

fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::RateDominant => "RateDominant",
        Regime::LeakageDominant => "LeakageDominant",
        Regime::Intermediate => "Intermediate",
    }
}

fn spectrum_for(path: &std::path::Path) -> Result<PencilSpectrum> {
    let wc = load_channel(path)?;
    let sys = eit_system(&wc)?;
    Ok(pencil_spectrum(&sys)?)
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Rate budget in nats.
    #[arg(long)]
    pub rate: f64,
    /// Leakage budget in nats.
    #[arg(long)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = FormChoice::Both)]
    pub form: FormChoice,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn solve(args: SolveArgs, units: Units, out_dir: Option<PathBuf>) -> Result<()> {
    let spec = spectrum_for(&args.channel)?;
    let lp = build_lp(&spec, args.rate, args.theta)?;
    let f = units.factor();

    let mut table = CsvTable::new(
        "capacity-solve.v1",
        &["form", "rate", "theta", "rho", "nu", "value", "regime"],
    );
    for form in args.form.forms() {
        let sol = solve_lp(&lp, form)?;
        table.push(vec![
            form_name(form).to_string(),
            sig(args.rate),
            sig(args.theta),
            sig(sol.rho),
            sig(sol.nu),
            sig(c_sic(&sol) * f),
            regime_name(sol.regime).to_string(),
        ]);
        println!(
            "{}: rho={:.6} nu={:.6} value={:.9} {} [{}]",
            form_name(form),
            sol.rho,
            sol.nu,
            c_sic(&sol) * f,
            units.name(),
            regime_name(sol.regime)
        );
    }

    let dir = resolve_out_dir(out_dir)?;
    let path = args
        .output
        .unwrap_or_else(|| dir.join("capacity_solve.csv"));
    table.write(&path)?;

    let params = json!({
        "channel": args.channel.display().to_string(),
        "rate": args.rate,
        "theta": args.theta,
    });
    let mut manifest = RunManifest::new("capacity solve", units, params);
    manifest.output(&path);
    manifest.write(&dir, "capacity_solve")?;
    Ok(())
}

#[derive(Args)]
pub struct SweepThetaArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = FormChoice::DualMin)]
    pub form: FormChoice,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Row result shared by the two sweep commands: per-point solutions or a
/// per-point error string, so a singular pencil degrades rows instead of
/// aborting the run.
type SweepRow = std::result::Result<Vec<(LpForm, LpSolution)>, String>;

fn sweep_rows(
    spec: &Result<PencilSpectrum>,
    budgets: &[(f64, f64)],
    forms: &[LpForm],
) -> Vec<SweepRow> {
    // Status strings land in one CSV cell; strip the delimiter.
    let cell = |e: &dyn std::fmt::Display| e.to_string().replace(',', ";");
    parallel_map(budgets, |&(r, theta)| {
        let spec = match spec {
            Ok(s) => s,
            Err(e) => return Err(cell(e)),
        };
        let lp = build_lp(spec, r, theta).map_err(|e| cell(&e))?;
        forms
            .iter()
            .map(|&form| solve_lp(&lp, form).map(|s| (form, s)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| cell(&e))
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn sweep_theta(args: SweepThetaArgs, units: Units, out_dir: Option<PathBuf>) -> Result<()> {
    let spec = spectrum_for(&args.channel);
    let thetas = linspace(args.theta_min, args.theta_max, args.points);
    let budgets: Vec<(f64, f64)> = thetas.iter().map(|&t| (args.rate, t)).collect();
    let forms = args.form.forms();
    let rows = sweep_rows(&spec, &budgets, &forms);
    let f = units.factor();

    let mut table = CsvTable::new(
        "capacity-sweep-theta.v1",
        &[
            "index", "theta", "form", "rho", "nu", "value", "regime", "status",
        ],
    );
    for (i, (theta, row)) in thetas.iter().zip(&rows).enumerate() {
        match row {
            Ok(sols) => {
                for (form, sol) in sols {
                    table.push(vec![
                        i.to_string(),
                        sig(*theta),
                        form_name(*form).to_string(),
                        sig(sol.rho),
                        sig(sol.nu),
                        sig(c_sic(sol) * f),
                        regime_name(sol.regime).to_string(),
                        "ok".to_string(),
                    ]);
                }
            }
            Err(msg) => table.push(vec![
                i.to_string(),
                sig(*theta),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                msg.clone(),
            ]),
        }
    }

    let dir = resolve_out_dir(out_dir)?;
    let path = args.output.unwrap_or_else(|| dir.join("sweep_theta.csv"));
    table.write(&path)?;
    println!("wrote {} ({} grid points)", path.display(), args.points);

    let params = json!({
        "channel": args.channel.display().to_string(),
        "rate": args.rate,
        "theta_min": args.theta_min,
        "theta_max": args.theta_max,
        "points": args.points,
    });
    let mut manifest = RunManifest::new("capacity sweep-theta", units, params);
    manifest.output(&path);
    manifest.write(&dir, "sweep_theta")?;
    Ok(())
}

#[derive(Args)]
pub struct SweepRatioArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub ratio_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub ratio_max: f64,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = FormChoice::DualMin)]
    pub form: FormChoice,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn sweep_ratio(args: SweepRatioArgs, units: Units, out_dir: Option<PathBuf>) -> Result<()> {
    let spec = spectrum_for(&args.channel);
    let ratios = linspace(args.ratio_min, args.ratio_max, args.points);
    let budgets: Vec<(f64, f64)> = ratios.iter().map(|&q| (args.rate, q * args.rate)).collect();
    let forms = args.form.forms();
    let rows = sweep_rows(&spec, &budgets, &forms);
    let f = units.factor();

    let mut table = CsvTable::new(
        "capacity-sweep-ratio.v1",
        &[
            "index",
            "ratio",
            "form",
            "rho",
            "nu",
            "value",
            "normalized",
            "regime",
            "status",
        ],
    );
    for (i, (ratio, row)) in ratios.iter().zip(&rows).enumerate() {
        match row {
            Ok(sols) => {
                for (form, sol) in sols {
                    table.push(vec![
                        i.to_string(),
                        sig(*ratio),
                        form_name(*form).to_string(),
                        sig(sol.rho),
                        sig(sol.nu),
                        sig(c_sic(sol) * f),
                        sig(c_sic(sol) / args.rate),
                        regime_name(sol.regime).to_string(),
                        "ok".to_string(),
                    ]);
                }
            }
            Err(msg) => table.push(vec![
                i.to_string(),
                sig(*ratio),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                msg.clone(),
            ]),
        }
    }

    let dir = resolve_out_dir(out_dir)?;
    let path = args.output.unwrap_or_else(|| dir.join("sweep_ratio.csv"));
    table.write(&path)?;
    if let Ok(spec) = &spec {
        println!(
            "normalized capacity saturates at {:.9}",
            spec.lam_max_perp_v()
        );
    }
    println!("wrote {} ({} grid points)", path.display(), args.points);

    let params = json!({
        "channel": args.channel.display().to_string(),
        "rate": args.rate,
        "ratio_min": args.ratio_min,
        "ratio_max": args.ratio_max,
        "points": args.points,
    });
    let mut manifest = RunManifest::new("capacity sweep-ratio", units, params);
    manifest.output(&path);
    manifest.write(&dir, "sweep_ratio")?;
    Ok(())
}

#[derive(Args)]
pub struct RegimesArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub rate: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn regimes(args: RegimesArgs, units: Units, out_dir: Option<PathBuf>) -> Result<()> {
    let spec = spectrum_for(&args.channel)?;
    let lp = build_lp(&spec, args.rate, args.theta)?;
    let report = regime_report(&lp, &spec);
    let f = units.factor();

    let mut table = CsvTable::new(
        "capacity-regimes.v1",
        &["item", "rho", "nu", "value", "regime"],
    );
    for (name, sol) in [
        ("dual_min", &report.dual_min),
        ("capped_max", &report.capped_max),
    ] {
        table.push(vec![
            name.to_string(),
            sig(sol.rho),
            sig(sol.nu),
            sig(c_sic(sol) * f),
            regime_name(sol.regime).to_string(),
        ]);
    }
    table.push(vec![
        "rate_axis_candidate".to_string(),
        String::new(),
        String::new(),
        sig(report.c_r * f),
        String::new(),
    ]);
    table.push(vec![
        "leakage_axis_candidate".to_string(),
        String::new(),
        String::new(),
        sig(report.c_theta * f),
        String::new(),
    ]);
    if report.c_inter.is_finite() {
        table.push(vec![
            "best_interior_candidate".to_string(),
            String::new(),
            String::new(),
            sig(report.c_inter * f),
            String::new(),
        ]);
    }
    for v in &report.interior_vertices {
        table.push(vec![
            format!("interior_vertex_{}_{}", v.modes.0, v.modes.1),
            sig(v.rho),
            sig(v.nu),
            sig(v.value * f),
            String::new(),
        ]);
    }

    println!(
        "dual_min={:.9} capped_max={:.9} c_r={:.9} c_theta={:.9} ({} interior vertices)",
        c_sic(&report.dual_min) * f,
        c_sic(&report.capped_max) * f,
        report.c_r * f,
        report.c_theta * f,
        report.interior_vertices.len()
    );

    let dir = resolve_out_dir(out_dir)?;
    let path = args.output.unwrap_or_else(|| dir.join("regimes.csv"));
    table.write(&path)?;

    let params = json!({
        "channel": args.channel.display().to_string(),
        "rate": args.rate,
        "theta": args.theta,
    });
    let mut manifest = RunManifest::new("capacity regimes", units, params);
    manifest.output(&path);
    manifest.write(&dir, "regimes")?;
    Ok(())
}
