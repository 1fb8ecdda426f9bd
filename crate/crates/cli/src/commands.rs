use std::fs;
use std::io::{self, Write};
use std::path::Path;

use jointex::effective::{dispersive_ratios, EffectiveParams, Renormalized};
use jointex::export::{write_scan, write_trajectory};
use jointex::presets::ALL_PRESETS;
use jointex::scan::{scan_effective, scan_full};
use jointex::scenario::{base_spec, scan_settings, ScenarioReport, TraceSummary};
use jointex::{
    build_effective_hamiltonian, effective_params, run_document, run_scenario, validation, ConfigDocument,
    EffectiveOptions, Error, ModelKind, Objective, Preset, Run, RunOptions, ScanResult, ScanSettings,
};

use crate::Failure;

type CmdResult = Result<(), Failure>;

pub fn preset_named(name: &str) -> Option<Preset> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    ALL_PRESETS.into_iter().find(|p| p.name() == stem)
}

/// Reads a config file; a missing path that names a preset loads the
/// embedded copy, so `fig5` and `fig5.json` work without a checkout.
pub fn load(config: &str) -> Result<ConfigDocument, Failure> {
    let path = Path::new(config);
    if path.exists() {
        return Ok(ConfigDocument::from_path(path)?);
    }
    match preset_named(config) {
        Some(p) => Ok(p.document()),
        None => Err(Error::Config(format!("no such config file or preset: {config}")).into()),
    }
}

fn fmt_renormalized(r: &Renormalized) -> String {
    format!("{:.9} {:+.6e} n", r.constant, r.per_photon)
}

fn print_params(p: &EffectiveParams) {
    println!("family            {:?}", p.family);
    println!("chi               {:.9e} GHz", p.chi);
    println!("chi (angular)     {:.9e} rad/ns", std::f64::consts::TAU * p.chi);
    match p.period_ns() {
        Some(t) => println!("T = pi/chi        {t:.3} ns"),
        None => println!("T = pi/chi        non-interacting"),
    }
    for (k, path) in p.paths.iter().enumerate() {
        let d = path.detunings;
        println!(
            "path {k}            g_p {:.6} g_s {:.6} g_2 {:.6} GHz; delta_p {:.6} delta_s {:.6} delta_2 {:.6} GHz",
            path.g_p, path.g_s, path.g_2, d.delta_p, d.delta_s, d.delta_2
        );
    }
    if let Some(r) = &p.renormalized {
        println!("cavity            {} GHz", fmt_renormalized(&r.cavity));
        println!("atom1             {} GHz", fmt_renormalized(&r.atom1));
        println!("atom2             {} GHz", fmt_renormalized(&r.atom2));
        if let Some(aux) = &r.aux {
            println!("aux level         {} GHz", fmt_renormalized(aux));
        }
    }
    if let Some(d) = &p.drive {
        println!(
            "drive             eps {:.6} eps' {:.6} GHz at {:.6} GHz, phase {:.6}",
            d.epsilon, d.epsilon_prime, d.frequency, d.phase
        );
        println!(
            "drive detunings   delta_d {:.6} delta_d' {:.6} delta_s {:.6} delta_2 {:.6} GHz",
            d.detunings.delta_d, d.detunings.delta_d_prime, d.detunings.delta_s, d.detunings.delta_2
        );
        println!("chi_d             {:.9e} GHz, GHZ time pi/(4 chi_d) {:.3} ns", d.chi_d, d.ghz_time_ns);
    }
    for r in &p.dispersive_ratios {
        println!("ratio             {:<20} {:.4}", r.label, r.ratio);
    }
    for w in &p.warnings {
        println!("warning           {w}");
    }
}

pub fn chi(config: &str, json: bool) -> CmdResult {
    let spec = load(config)?.system_spec()?;
    match effective_params(&spec) {
        Ok(p) if json => println!("{}", serde_json::to_string_pretty(&p).map_err(Error::Json)?),
        Ok(p) => print_params(&p),
        Err(Error::UnsupportedFamily(family)) => {
            println!("family            {family}");
            println!("chi               no closed form for this family; use `scan` on the full model");
            for r in dispersive_ratios(&spec) {
                println!("ratio             {:<20} {:.4}", r.label, r.ratio);
            }
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

/// Diagnostic lines of one run. The eigenvalue bound only means something
/// for density matrices and the Fock cutoff only for the full model.
fn summary_lines(s: &TraceSummary, run: &Run) -> Vec<String> {
    let mut out = Vec::new();
    match s.first_peak {
        Some((t, v)) => out.push(format!("first peak        {v:.6} at {t:.2} ns")),
        None => out.push("first peak        none".into()),
    }
    match s.period_ns {
        Some(p) => out.push(format!("period            {p:.2} ns")),
        None => out.push("period            none".into()),
    }
    out.push(format!("target maxima     {:.4?}", s.target_maxima));
    out.push(format!("max leakage       {:.4e}", s.max_leakage));
    out.push(format!("max |g2 - exc_q1| {:.4e}", s.max_g2_minus_exc_q1));
    out.push(format!("g2 at n maxima    {:.4?}", s.g2_at_photon_maxima));
    out.push(format!("max norm drift    {:.3e}", s.max_norm_drift));
    if run.dissipative {
        out.push(format!("min eigenvalue    {:.3e}", s.min_eigenvalue));
    }
    if run.model == ModelKind::Full {
        out.push(format!("max top Fock      {:.3e}", s.max_top_fock));
    }
    out
}

pub fn evolve(config: &str, opts: &RunOptions, out: Option<&Path>) -> CmdResult {
    let doc = load(config)?;
    let run = run_document(&doc, opts)?;
    let tr = &run.trajectory;
    let summary = jointex::scenario::summarize(tr, &doc.target_label()?)?;
    let mut lines = vec![format!(
        "model {:?}, dissipative {}, operating point {:.6} GHz, {} samples, {} steps",
        run.model,
        run.dissipative,
        run.operating_point(),
        tr.times.len(),
        tr.stats.accepted
    )];
    lines.extend(summary_lines(&summary, &run));
    match out {
        Some(path) => {
            write_trajectory(fs::File::create(path)?, tr)?;
            lines.iter().for_each(|l| println!("{l}"));
        }
        None => {
            write_trajectory(io::stdout().lock(), tr)?;
            lines.iter().for_each(|l| eprintln!("{l}"));
        }
    }
    Ok(())
}

pub struct ScanArgs {
    pub range: Option<(f64, f64)>,
    pub objective: Option<Objective>,
    pub model: ModelKind,
    pub n_max: Option<usize>,
}

pub fn scan(config: &str, args: ScanArgs, out: Option<&Path>) -> CmdResult {
    let doc = load(config)?;
    let spec = base_spec(&doc, &RunOptions { n_max: args.n_max, ..RunOptions::default() })?;
    let mut settings = match &doc.scan {
        Some(section) => scan_settings(&doc, section)?,
        None => match args.range {
            Some((lo, hi)) => ScanSettings::new(lo, hi, Objective::default(), doc.initial_label()?, doc.target_label()?),
            None => return Err(Error::Config("config has no scan section; pass --range".into()).into()),
        },
    };
    if let Some((lo, hi)) = args.range {
        settings.lo = lo;
        settings.hi = hi;
    }
    if let Some(o) = args.objective {
        settings.objective = o;
    }
    let result: ScanResult = match args.model {
        ModelKind::Full => scan_full(&spec, &settings)?,
        ModelKind::Effective => scan_effective(&build_effective_hamiltonian(&spec, &EffectiveOptions::default())?, &settings)?,
    };
    if let Some(path) = out {
        write_scan(fs::File::create(path)?, &result)?;
    }
    println!(
        "best {:.9} GHz, objective {:.9e} ({:?}, {} evaluations)",
        result.best.omega, result.best.objective, result.objective, result.evaluations
    );
    Ok(())
}

fn print_report(report: &ScenarioReport) {
    println!("scenario {}", report.preset);
    if let Some(t) = report.analytic_period_ns {
        println!("analytic period   {t:.3} ns");
    }
    for r in &report.runs {
        println!();
        println!(
            "[{}] model {:?}, dissipative {}, operating point {:.6} GHz",
            r.label,
            r.run.model,
            r.run.dissipative,
            r.run.operating_point()
        );
        summary_lines(&r.summary, &r.run).iter().for_each(|l| println!("  {l}"));
    }
    if let Some(g) = &report.ghz {
        println!();
        println!("GHZ chi_d {:.6e} GHz, time {:.2} ns, effective fidelity {:.9}", g.chi_d, g.ghz_time_ns, g.effective_fidelity);
        if let (Some(w), Some(t), Some(f)) = (g.drive_frequency, g.full_ghz_time_ns, g.full_fidelity) {
            println!("GHZ full model: pump {w:.6} GHz, fidelity {f:.6} at {t:.2} ns");
        }
    }
    println!();
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &report.checks {
        println!("{}  {:width$}  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

pub fn scenario(preset: Preset, opts: &RunOptions, out: Option<&Path>) -> CmdResult {
    let report = run_scenario(preset, opts)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        for r in &report.runs {
            write_trajectory(fs::File::create(dir.join(format!("{}.csv", r.label)))?, &r.run.trajectory)?;
            if let Some(scan) = &r.run.scan {
                write_scan(fs::File::create(dir.join(format!("{}_scan.csv", r.label)))?, scan)?;
            }
        }
    }
    print_report(&report);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::checks(format!("scenario {preset}: checks failed")))
    }
}

pub fn validate(config: Option<&str>) -> CmdResult {
    let spec = match config {
        Some(c) => Some(load(c)?.system_spec()?),
        None => None,
    };
    let report = validation::validate(spec.as_ref());
    print!("{}", report.table());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::checks("validation failed"))
    }
}

pub fn preset(name: Option<Preset>) -> CmdResult {
    let mut stdout = io::stdout().lock();
    match name {
        Some(p) => writeln!(stdout, "{}", p.json().trim_end())?,
        None => {
            for p in ALL_PRESETS {
                writeln!(stdout, "{p}")?;
            }
        }
    }
    Ok(())
}
