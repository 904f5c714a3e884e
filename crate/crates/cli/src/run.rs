use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::Instant;

use geon_core::radial::solve_modes_with;
use geon_core::rates::{evaluate_rate, sweep_rates, RateConfig, RatePoint};
use geon_core::response::{evaluate_point, sweep, ResponseConfig, ResponsePoint, SweepKind};
use geon_core::spacetime::local_temperature;
use geon_core::table::{build_table_with, load_expecting, persist, write_text};
use geon_core::{CacheOutcome, TableCache};

use crate::args::{Cli, Command, OutputArgs, RateArgs, ResponseArgs, SweepArgs, SweepVar, TableAction};
use crate::config::{self, ConfigFile, Gap, Numerics, PointSettings};
use crate::csv;
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(p) => ConfigFile::read(p)?,
        None => ConfigFile::default(),
    };
    let numerics = Numerics::resolve(&cli.global, &file)?;
    match cli.command {
        Command::Modes { l, omega, r } => {
            let r = file_radius(r, &file)?;
            modes(l, omega, r, &numerics)
        }
        Command::Table { action } => table(action, &numerics, &file),
        Command::Response(a) => response(&a, &numerics, &file),
        Command::Rate(a) => rate(&a, &numerics, &file),
    }
}

fn file_radius(flag: Option<f64>, file: &ConfigFile) -> Result<f64, CliError> {
    let p = crate::args::PointArgs { r: flag, ..Default::default() };
    Ok(PointSettings::resolve(&p, file)?.r)
}

fn modes(l: u32, omega: f64, r: f64, n: &Numerics) -> Result<(), CliError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(CliError::Usage(format!("omega must be positive, got {omega}")));
    }
    let s = solve_modes_with(l, omega, r, &n.solver)?;
    let mut out = io::stdout().lock();
    writeln!(out, "l = {l}, omega = {omega}, r = {r}, matching radius {}", s.r_far)?;
    writeln!(out, "A_in = {:e}", s.a_in)?;
    writeln!(out, "B_in = {:e}", s.b_in)?;
    writeln!(out, "A_up = {:e}", s.a_up)?;
    writeln!(out, "B_up = {:e}", s.b_up)?;
    writeln!(out, "|B_in|^2 = {:e}", s.b_in.norm_sqr())?;
    writeln!(out, "|R_in(r)|^2 = {:e}", s.r_in.norm_sqr())?;
    writeln!(out, "|R_up(r)|^2 = {:e}", s.r_up.norm_sqr())?;
    writeln!(out, "unitarity defect = {:e}", s.unitarity_defect())?;
    writeln!(out, "reciprocity defect = {:e}", s.reciprocity_defect())?;
    writeln!(out, "wronskian drift = {:e}", s.wronskian_drift)?;
    Ok(())
}

fn cache(n: &Numerics, replace_unreadable: bool) -> TableCache {
    TableCache::with_solver(n.l_max, n.grid, n.solver).with_directory(&n.cache_dir, replace_unreadable)
}

fn report(r: f64, outcome: &CacheOutcome) {
    match outcome {
        CacheOutcome::Memory => {}
        CacheOutcome::Loaded(p) => eprintln!("cache hit for r = {r}: {}", p.display()),
        CacheOutcome::Built(Some(p)) => eprintln!("built table for r = {r}: {}", p.display()),
        CacheOutcome::Built(None) => eprintln!("built table for r = {r}"),
        CacheOutcome::Replaced { path, reason } => {
            eprintln!("warning: rebuilt unreadable table {} ({reason})", path.display())
        }
    }
}

fn table(action: TableAction, n: &Numerics, file: &ConfigFile) -> Result<(), CliError> {
    match action {
        TableAction::Build { r, force } => {
            let radii = if r.is_empty() { vec![file_radius(None, file)?] } else { r };
            for r in radii {
                let start = Instant::now();
                if force {
                    force_build(r, n)?;
                } else {
                    let (_, outcome) = cache(n, false).fetch(r)?;
                    report(r, &outcome);
                }
                eprintln!("  {:.1} s", start.elapsed().as_secs_f64());
            }
            Ok(())
        }
        TableAction::Inspect { r, force, dump } => {
            let r = file_radius(r, file)?;
            let c = cache(n, force);
            let path = c.path_for(r)?.expect("cache has a directory");
            if !path.exists() {
                return Err(CliError::Usage(format!(
                    "no table cached at {}; run `geon table build` first",
                    path.display()
                )));
            }
            let (t, outcome) = c.fetch(r)?;
            report(r, &outcome);
            let g = t.grid();
            let mut out = io::stdout().lock();
            writeln!(out, "file: {}", path.display())?;
            writeln!(out, "r = {}", t.r_det())?;
            writeln!(out, "l_max = {}", t.l_max())?;
            writeln!(out, "grid: omega in [{}, {}], {} nodes", g.omega_min, g.omega_max, g.nodes)?;
            writeln!(out, "worst unitarity defect = {:e}", t.worst_unitarity_defect())?;
            writeln!(out, "worst reciprocity defect = {:e}", t.worst_reciprocity_defect())?;
            writeln!(out, "worst wronskian drift = {:e}", t.worst_wronskian_drift())?;
            writeln!(out, "repaired entries = {}", t.repaired().len())?;
            if let Some(d) = dump {
                write_text(&t, &d)?;
            }
            Ok(())
        }
    }
}

fn force_build(r: f64, n: &Numerics) -> Result<(), CliError> {
    let c = cache(n, true);
    let params = c.params(r)?;
    let path = c.path_for(r)?.expect("cache has a directory");
    if path.exists() {
        if let Err(e) = load_expecting(&path, &params) {
            eprintln!("warning: replacing unreadable table {} ({e})", path.display());
        }
    }
    let t = build_table_with(&params, &n.solver)?;
    std::fs::create_dir_all(&n.cache_dir)?;
    persist(&t, &path)?;
    eprintln!("built table for r = {r}: {}", path.display());
    Ok(())
}

fn sweep_values(s: &SweepArgs) -> Result<Option<(SweepVar, Vec<f64>)>, CliError> {
    let Some(var) = s.sweep else {
        if !s.values.is_empty() || s.from.is_some() || s.to.is_some() || s.steps.is_some() {
            return Err(CliError::Usage("sweep values given without --sweep".into()));
        }
        return Ok(None);
    };
    if !s.values.is_empty() {
        return Ok(Some((var, s.values.clone())));
    }
    let (Some(a), Some(b), Some(k)) = (s.from, s.to, s.steps) else {
        return Err(CliError::Usage("--sweep needs --values or all of --from, --to, --steps".into()));
    };
    if k == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if s.log && !(a > 0.0 && b > 0.0) {
        return Err(CliError::Usage("a logarithmic sweep needs positive end points".into()));
    }
    let values = (0..k)
        .map(|i| {
            if i == 0 || k == 1 {
                return a;
            }
            if i == k - 1 {
                return b;
            }
            let (lo, hi) = ((k - 1 - i) as f64, i as f64);
            let span = (k - 1) as f64;
            if s.log {
                ((lo * a.ln() + hi * b.ln()) / span).exp()
            } else {
                (lo * a + hi * b) / span
            }
        })
        .collect();
    Ok(Some((var, values)))
}

fn gap_at(gap: Gap, r: f64) -> Result<f64, CliError> {
    Ok(match gap {
        Gap::Absolute(w) => w,
        Gap::Thermal(x) => x * local_temperature(r)?,
    })
}

/// One evaluation and its sweep value, if any.
struct Planned<P> {
    value: Option<f64>,
    point: P,
}

fn writer(o: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &o.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn finish(failed: usize, total: usize) -> Result<(), CliError> {
    if failed > 0 {
        Err(CliError::Points { failed, total })
    } else {
        Ok(())
    }
}

fn core_kind(var: SweepVar) -> SweepKind {
    match var {
        SweepVar::Omega | SweepVar::OmegaT => SweepKind::Gap,
        SweepVar::Radius => SweepKind::Radius,
        SweepVar::Sigma => SweepKind::Sigma,
        SweepVar::Tau0 => SweepKind::Tau0,
    }
}

fn response(a: &ResponseArgs, n: &Numerics, file: &ConfigFile) -> Result<(), CliError> {
    let point = PointSettings::resolve(&a.point, file)?;
    let sigma = config::sigma(a.sigma, file)?;
    let budget = config::optional(a.tau0_budget, file, "tau0_budget")?;
    let cfg: ResponseConfig = n.response_config(budget);
    let sweep_spec = sweep_values(&a.sweep)?;
    let tables = cache(n, false);

    let mut out = writer(&a.output)?;
    csv::preamble(&mut out, !a.output.no_timestamp)?;
    let mut out = ::csv::Writer::from_writer(out);
    out.write_record(csv::RESPONSE_HEADER).map_err(io::Error::from)?;
    let (mut failed, mut total) = (0, 0);
    let var_label = sweep_spec.as_ref().map_or("none", |(v, _)| v.label());
    for &vacuum in &point.vacua {
        let base = ResponsePoint { gap: gap_at(point.gap, point.r)?, r: point.r, sigma, tau0: point.tau0, vacuum };
        let plan: Vec<Planned<ResponsePoint>> = match &sweep_spec {
            None => vec![Planned { value: None, point: base }],
            Some((var, values)) => values
                .iter()
                .map(|&v| {
                    let p = match var {
                        SweepVar::OmegaT => base.with(SweepKind::Gap, v * local_temperature(base.r)?),
                        SweepVar::Radius => {
                            let mut p = base.with(SweepKind::Radius, v);
                            if v > 1.0 {
                                p.gap = gap_at(point.gap, v)?;
                            }
                            p
                        }
                        other => base.with(core_kind(*other), v),
                    };
                    Ok(Planned { value: Some(v), point: p })
                })
                .collect::<Result<_, CliError>>()?,
        };
        let results = evaluate_responses(&plan, sweep_spec.as_ref().map(|s| s.0), &tables, &cfg);
        for (log_r, outcome) in tables.take_log() {
            report(log_r, &outcome);
        }
        for (p, res) in plan.iter().zip(&results) {
            total += 1;
            failed += usize::from(res.is_err());
            let row = csv::ResponseRow {
                key: csv::Key { var: var_label, value: p.value },
                vacuum,
                r: p.point.r,
                gap: p.point.gap,
                sigma: p.point.sigma,
                tau0: p.point.tau0,
                result: res.as_ref(),
            };
            csv::response_row(&mut out, &row).map_err(io::Error::from)?;
        }
    }
    out.flush()?;
    finish(failed, total)
}

fn evaluate_responses(
    plan: &[Planned<ResponsePoint>],
    var: Option<SweepVar>,
    tables: &TableCache,
    cfg: &ResponseConfig,
) -> Vec<geon_core::Result<geon_core::ResponseResult>> {
    match var {
        // Points differ in more than the swept field, or share one table
        // only point by point: evaluate them one at a time.
        None | Some(SweepVar::Radius) => plan.iter().map(|p| evaluate_point(&p.point, tables, cfg)).collect(),
        Some(v) => {
            let kind = core_kind(v);
            let values: Vec<f64> = plan.iter().map(|p| field(&p.point, kind)).collect();
            sweep(kind, &values, &plan[0].point, tables, cfg)
        }
    }
}

fn field(p: &ResponsePoint, kind: SweepKind) -> f64 {
    match kind {
        SweepKind::Gap => p.gap,
        SweepKind::Radius => p.r,
        SweepKind::Sigma => p.sigma,
        SweepKind::Tau0 => p.tau0,
    }
}

fn rate(a: &RateArgs, n: &Numerics, file: &ConfigFile) -> Result<(), CliError> {
    let point = PointSettings::resolve(&a.point, file)?;
    let cfg: RateConfig = n.rate_config(
        config::optional(a.pv_window, file, "pv_window")?,
        config::optional(a.pv_tol, file, "pv_tol")?,
    );
    let sweep_spec = sweep_values(&a.sweep)?;
    if matches!(sweep_spec, Some((SweepVar::Sigma, _))) {
        return Err(CliError::Usage("the rates do not depend on sigma".into()));
    }
    let tables = cache(n, false);

    let mut out = writer(&a.output)?;
    csv::preamble(&mut out, !a.output.no_timestamp)?;
    let mut out = ::csv::Writer::from_writer(out);
    out.write_record(csv::RATE_HEADER).map_err(io::Error::from)?;
    let (mut failed, mut total) = (0, 0);
    let var_label = sweep_spec.as_ref().map_or("none", |(v, _)| v.label());
    for &vacuum in &point.vacua {
        let base = RatePoint { gap: gap_at(point.gap, point.r)?, r: point.r, tau0: point.tau0, vacuum };
        let plan: Vec<Planned<RatePoint>> = match &sweep_spec {
            None => vec![Planned { value: None, point: base }],
            Some((var, values)) => values
                .iter()
                .map(|&v| {
                    let mut p = base;
                    match var {
                        SweepVar::Omega => p.gap = v,
                        SweepVar::OmegaT => p.gap = v * local_temperature(base.r)?,
                        SweepVar::Radius => {
                            p.r = v;
                            if v > 1.0 {
                                p.gap = gap_at(point.gap, v)?;
                            }
                        }
                        SweepVar::Tau0 => p.tau0 = v,
                        SweepVar::Sigma => unreachable!("rejected above"),
                    }
                    Ok(Planned { value: Some(v), point: p })
                })
                .collect::<Result<_, CliError>>()?,
        };
        let results = match sweep_spec.as_ref().map(|s| s.0) {
            None | Some(SweepVar::Radius) => plan.iter().map(|p| evaluate_rate(&p.point, &tables, &cfg)).collect(),
            Some(v) => {
                let kind = core_kind(v);
                let values: Vec<f64> = plan
                    .iter()
                    .map(|p| if kind == SweepKind::Gap { p.point.gap } else { p.point.tau0 })
                    .collect();
                sweep_rates(kind, &values, &plan[0].point, &tables, &cfg)
            }
        };
        for (log_r, outcome) in tables.take_log() {
            report(log_r, &outcome);
        }
        for (p, res) in plan.iter().zip(&results) {
            total += 1;
            failed += usize::from(res.is_err());
            let row = csv::RateRow {
                key: csv::Key { var: var_label, value: p.value },
                vacuum,
                r: p.point.r,
                gap: p.point.gap,
                tau0: p.point.tau0,
                result: res.as_ref(),
            };
            csv::rate_row(&mut out, &row).map_err(io::Error::from)?;
        }
    }
    out.flush()?;
    finish(failed, total)
}
