#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cosmic_area::congruence::{
    envelope_violation, integrate_raychaudhuri, monotone_quotient_check, GeneralizedFlrw,
    RicciProfile,
};
use cosmic_area::counterexample::divergence_report;
use cosmic_area::initial_data::{load_initial_data, InitialDataSet};
use cosmic_area::integral_bounds::{
    write_area_sweep_csv, write_volume_sweep_csv, AreaBoundReport, VolumeBoundReport,
};
use cosmic_area::level_sets::{
    generalized_area, left_limsup, sandwich_check, AreaHistory, Schedule,
};
use cosmic_area::model_geometry::ModelGeometry;
use cosmic_area::verify::{run_all, VerifyConfig, DEFAULT_INSTANCES, DEFAULT_SEED};
use cosmic_area::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "cosmic-area",
    version,
    about = "Area and volume bounds for level sets of the cosmological time"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Bound sweep for an initial data file.
    Bounds(BoundsArgs),
    /// Area and volume of a model geometry.
    Model(ModelArgs),
    /// Evolve a congruence or a cellwise warped product.
    Evolve(EvolveArgs),
    /// Generalized area of a level set from volume quotients.
    GenArea(GenAreaArgs),
    /// Areas of the L^p counterexample family against the would-be bound.
    Counterexample(CounterexampleArgs),
    /// Run the oracle suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Quantity {
    #[default]
    Area,
    Volume,
}

#[derive(Args, Debug, Serialize)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TimeArgs {
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', conflicts_with = "t_grid")]
    t: Vec<f64>,
    /// Uniform grid `start:stop:count`.
    #[arg(long, value_parser = parse_grid)]
    t_grid: Option<Grid>,
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Grid {
    start: f64,
    stop: f64,
    count: usize,
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:stop:count".into());
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"));
    let count = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("'{}': {e}", parts[2]))?;
    let grid = Grid {
        start: num(parts[0])?,
        stop: num(parts[1])?,
        count,
    };
    if grid.count < 2 || !(grid.stop > grid.start) {
        return Err("grid needs stop > start and count >= 2".into());
    }
    Ok(grid)
}

impl TimeArgs {
    fn resolve(&self) -> Result<Vec<f64>> {
        let times = match self.t_grid {
            Some(g) => (0..g.count)
                .map(|i| g.start + (g.stop - g.start) * i as f64 / (g.count - 1) as f64)
                .collect(),
            None => self.t.clone(),
        };
        if times.is_empty() {
            return Err(Error::Domain("no times given (use --t or --t-grid)".into()));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::Domain(format!("time {t} must be finite and >= 0")));
        }
        Ok(times)
    }
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    /// Initial data as `id,weight,H[,K]` CSV or JSON.
    #[arg(long)]
    input: PathBuf,
    /// Dimension, if the CSV has no `# n=` line.
    #[arg(long)]
    n: Option<u32>,
    #[command(flatten)]
    times: TimeArgs,
    #[arg(long, value_enum, default_value_t)]
    quantity: Quantity,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct ModelArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    base_area: f64,
    #[command(flatten)]
    times: TimeArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct EvolveArgs {
    /// Cellwise warped product as JSON; otherwise a single fiber is evolved.
    #[arg(long, conflicts_with_all = ["theta0", "ricci", "ricci_file"])]
    spacetime: Option<PathBuf>,
    /// Initial expansion of the fiber.
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    /// Constant Ricci term along the fiber.
    #[arg(long, conflicts_with = "ricci_file")]
    ricci: Option<f64>,
    /// Ricci profile as JSON.
    #[arg(long)]
    ricci_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Comparison constant; defaults to the largest positive initial expansion.
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct GenAreaArgs {
    /// Model geometry history with this initial mean curvature (needs --n).
    #[arg(long, conflicts_with_all = ["spacetime", "samples", "jump"])]
    model_beta: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// Cellwise warped product as JSON.
    #[arg(long, conflicts_with_all = ["samples", "jump"])]
    spacetime: Option<PathBuf>,
    /// Sampled history as `t,area[,slope]` CSV.
    #[arg(long, conflicts_with = "jump")]
    samples: Option<PathBuf>,
    /// Piecewise-constant history `time,left,right`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    jump: Option<Vec<f64>>,
    /// Level of the level set.
    #[arg(long)]
    t: f64,
    /// End of the history domain; defaults to `2t` (at least 1).
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
    /// Tolerance of the sandwich inequalities.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct CounterexampleArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    t: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    j: Vec<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_INSTANCES)]
    instances: usize,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "-".into())
}

/// Right-aligned columns.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

fn csv_text(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn json_text(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn simple_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    csv_text(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    })
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn load_data(path: &Path, n: Option<u32>) -> Result<InitialDataSet> {
    let label = path.display().to_string();
    if path.extension().is_some_and(|e| e == "json") {
        let data = InitialDataSet::from_json(&read_text(path)?)?;
        if let Some(n) = n.filter(|&n| n != data.n) {
            return Err(Error::Parse {
                row: None,
                message: format!("dimension {n} conflicts with file dimension {}", data.n),
            });
        }
        Ok(data)
    } else {
        load_initial_data(File::open(path)?, n, &label)
    }
}

fn run_bounds(a: &BoundsArgs) -> Result<String> {
    let data = load_data(&a.input, a.n)?;
    let times = a.times.resolve()?;
    let header = [
        "t",
        "exact",
        "jensen_h",
        "from_k",
        "tg",
        "binomial_sum",
        "ordering",
    ];
    let summary = |t, exact, jensen, from_k, tg, terms: &[f64], holds: bool| {
        vec![
            num(t),
            num(exact),
            num(jensen),
            opt(from_k),
            opt(tg),
            num(cosmic_area::numerics::pairwise_sum(terms)),
            if holds {
                "ok".into()
            } else {
                "VIOLATED".into()
            },
        ]
    };
    match a.quantity {
        Quantity::Area => {
            let reports = times
                .iter()
                .map(|&t| AreaBoundReport::compute(&data, t))
                .collect::<Result<Vec<_>>>()?;
            match a.output.format {
                Format::Table => {
                    let rows: Vec<_> = reports
                        .iter()
                        .map(|r| {
                            summary(
                                r.t,
                                r.exact,
                                r.jensen_h,
                                r.from_k,
                                r.tg_pointwise,
                                &r.binomial_terms,
                                r.certificate.holds(),
                            )
                        })
                        .collect();
                    Ok(table(&header, &rows))
                }
                Format::Csv => csv_text(|buf| write_area_sweep_csv(&reports, buf)),
                Format::Json => json_text(&reports),
            }
        }
        Quantity::Volume => {
            let reports = times
                .iter()
                .map(|&t| VolumeBoundReport::compute(&data, t))
                .collect::<Result<Vec<_>>>()?;
            match a.output.format {
                Format::Table => {
                    let rows: Vec<_> = reports
                        .iter()
                        .map(|r| {
                            summary(
                                r.t,
                                r.exact,
                                r.jensen_h,
                                r.from_k,
                                r.tg_pointwise,
                                &r.binomial_terms,
                                r.certificate.holds(),
                            )
                        })
                        .collect();
                    Ok(table(&header, &rows))
                }
                Format::Csv => csv_text(|buf| write_volume_sweep_csv(&reports, buf)),
                Format::Json => json_text(&reports),
            }
        }
    }
}

fn run_model(a: &ModelArgs) -> Result<String> {
    let model = ModelGeometry::new(a.n, a.beta)?;
    let times = a.times.resolve()?;
    let header = ["t", "scale_factor", "area", "volume", "mean_curvature"];
    let rows = times
        .iter()
        .map(|&t| {
            Ok(vec![
                num(t),
                num(model.scale_factor(t)?),
                num(model.area(a.base_area, t)?),
                num(model.volume(a.base_area, t)?),
                num(model.mean_curvature(t)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    match a.output.format {
        Format::Table => Ok(table(&header, &rows)),
        Format::Csv => simple_csv(&header, &rows),
        Format::Json => {
            let objects: Vec<_> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), json!(v.parse::<f64>().unwrap_or(f64::NAN))))
                        .collect::<serde_json::Map<_, _>>()
                })
                .collect();
            json_text(&objects)
        }
    }
}

fn comment_lines(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
}

fn run_evolve(a: &EvolveArgs) -> Result<String> {
    if let Some(path) = &a.spacetime {
        let st = GeneralizedFlrw::from_json(&read_text(path)?)?;
        let steps = (a.t_end / a.step).round().max(1.0) as usize;
        let grid: Vec<f64> = (0..=steps)
            .map(|i| a.t_end * i as f64 / steps as f64)
            .collect();
        let areas = grid
            .iter()
            .map(|&t| st.total_area(t))
            .collect::<Result<Vec<_>>>()?;
        let sec = st.sec_check(&grid)?;
        let beta = a.beta.unwrap_or(st.max_initial_h_plus()?);
        let quotient = monotone_quotient_check(&grid, &areas, beta, st.n)?;
        let sec_ok = sec.iter().all(|v| v.holds);
        let header = ["t", "area"];
        let rows: Vec<Vec<String>> = grid
            .iter()
            .zip(&areas)
            .map(|(&t, &s)| vec![num(t), num(s)])
            .collect();
        return match a.output.format {
            Format::Json => json_text(&json!({
                "times": grid,
                "areas": areas,
                "sec": sec,
                "beta": beta,
                "quotient": quotient,
            })),
            format => {
                let summary = comment_lines(&[
                    ("energy condition", sec_ok.to_string()),
                    ("beta", num(beta)),
                    (
                        "quotient non-increasing",
                        quotient.non_increasing.to_string(),
                    ),
                    ("quotient max relative increase", num(quotient.max_increase)),
                ]);
                let body = if format == Format::Csv {
                    simple_csv(&header, &rows)?
                } else {
                    table(&header, &rows)
                };
                Ok(summary + &body)
            }
        };
    }

    let theta0 = a
        .theta0
        .ok_or_else(|| Error::Domain("evolve needs --spacetime or --theta0".into()))?;
    let n =
        a.n.ok_or_else(|| Error::Domain("evolve --theta0 needs --n".into()))?;
    let ricci = match (&a.ricci, &a.ricci_file) {
        (Some(v), _) => RicciProfile::constant(*v)?,
        (None, Some(path)) => serde_json::from_str(&read_text(path)?)?,
        (None, None) => RicciProfile::Zero,
    };
    let traj = integrate_raychaudhuri(theta0, &ricci, n, a.t_end, a.step)?;
    let beta = a.beta.unwrap_or(theta0.max(0.0));
    let quotient = monotone_quotient_check(&traj.times(), &traj.areas(), beta, n)?;
    let envelope = if beta > 0.0 {
        match envelope_violation(&traj, beta, n) {
            Ok(v) => Some(v),
            Err(Error::Hypothesis(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    match a.output.format {
        Format::Json => json_text(&json!({
            "trajectory": traj,
            "beta": beta,
            "quotient": quotient,
            "envelope_violation": envelope,
        })),
        format => {
            let summary = comment_lines(&[
                ("focal time", opt(traj.focal_time)),
                ("truncated", traj.truncated.to_string()),
                ("energy condition", traj.sec.to_string()),
                ("beta", num(beta)),
                (
                    "quotient non-increasing",
                    quotient.non_increasing.to_string(),
                ),
                ("quotient max relative increase", num(quotient.max_increase)),
                ("envelope violation", opt(envelope)),
            ]);
            let body = if format == Format::Csv {
                csv_text(|buf| traj.write_csv(buf))?
            } else {
                let rows: Vec<_> = traj
                    .samples
                    .iter()
                    .map(|s| vec![num(s.tau), num(s.theta), num(s.area)])
                    .collect();
                table(&["tau", "theta", "A"], &rows)
            };
            Ok(summary + &body)
        }
    }
}

fn load_samples(path: &Path) -> Result<AreaHistory> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let with_slope = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["t", "area"] => false,
        ["t", "area", "slope"] => true,
        other => {
            return Err(Error::Parse {
                row: Some(1),
                message: format!("expected header t,area[,slope], got {other:?}"),
            })
        }
    };
    let (mut times, mut areas, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize);
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse {
                    row,
                    message: format!("field {} is missing or not a number", i + 1),
                })
        };
        times.push(field(0)?);
        areas.push(field(1)?);
        if with_slope {
            slopes.push(field(2)?);
        }
    }
    AreaHistory::samples(times, areas, with_slope.then_some(slopes))
}

fn run_gen_area(a: &GenAreaArgs) -> Result<String> {
    let t_max = a.t_max.unwrap_or((2.0 * a.t).max(1.0));
    let history = if let Some(beta) = a.model_beta {
        let n =
            a.n.ok_or_else(|| Error::Domain("--model-beta needs --n".into()))?;
        AreaHistory::model(ModelGeometry::new(n, beta)?, 1.0, t_max)?
    } else if let Some(path) = &a.spacetime {
        AreaHistory::from_flrw(&GeneralizedFlrw::from_json(&read_text(path)?)?, t_max)?
    } else if let Some(path) = &a.samples {
        load_samples(path)?
    } else if let Some(j) = &a.jump {
        let &[at, left, right] = j.as_slice() else {
            return Err(Error::Domain(
                "--jump takes exactly three values time,left,right".into(),
            ));
        };
        if !(at > 0.0 && left >= 0.0 && right >= 0.0) {
            return Err(Error::Domain(
                "--jump needs time > 0 and nonnegative areas".into(),
            ));
        }
        AreaHistory::exact(
            t_max.max(at),
            move |t| if t < at { left } else { right },
            move |t| left * t.min(at) + right * (t - at).max(0.0),
        )?
    } else {
        return Err(Error::Domain(
            "gen-area needs one of --model-beta, --spacetime, --samples, --jump".into(),
        ));
    };
    let defaults = Schedule::default_for(a.t);
    let schedule = Schedule {
        h0: a.h0.unwrap_or(if a.t > 0.0 {
            defaults.h0
        } else {
            history.t_max() / 10.0
        }),
        ratio: a.ratio,
        count: a.count,
        tail_fraction: a.tail_fraction,
    };
    let est = generalized_area(&history, a.t, schedule)?;
    let s_t = history.area_at(a.t)?;
    let left = left_limsup(&history, &est)?;
    let verdict = sandwich_check(s_t, &est, left, a.tol)?;
    match a.output.format {
        Format::Json => json_text(&json!({
            "estimate": est,
            "area_at_t": s_t,
            "left_limsup": left,
            "sandwich": verdict,
        })),
        format => {
            let summary = comment_lines(&[
                ("estimate", num(est.estimate)),
                ("area at t", num(s_t)),
                ("left limsup", num(left)),
                ("sandwich holds", verdict.holds.to_string()),
                ("truncated", est.truncated.to_string()),
                ("forward clipped", est.forward_clipped.to_string()),
            ]);
            let body = if format == Format::Csv {
                csv_text(|buf| est.write_csv(buf))?
            } else {
                let rows: Vec<_> = est
                    .h_schedule
                    .iter()
                    .zip(&est.quotients)
                    .map(|(&h, &q)| vec![num(h), num(q)])
                    .collect();
                table(&["h", "quotient"], &rows)
            };
            Ok(summary + &body)
        }
    }
}

fn run_counterexample(a: &CounterexampleArgs) -> Result<String> {
    let report = divergence_report(a.p, a.n, a.t, &a.j)?;
    match a.output.format {
        Format::Json => json_text(&report),
        format => {
            let summary = comment_lines(&[
                (
                    "first violation",
                    report.first_violation.map_or("-".into(), |j| j.to_string()),
                ),
                ("ratios increasing", report.increasing.to_string()),
                ("growth slope", opt(report.growth_slope)),
                ("expected slope", num(f64::from(a.n) / a.p - 1.0)),
            ]);
            let body = if format == Format::Csv {
                csv_text(|buf| report.write_csv(buf))?
            } else {
                let rows: Vec<_> = report
                    .rows
                    .iter()
                    .map(|r| vec![r.j.to_string(), num(r.area), num(r.bound), num(r.ratio)])
                    .collect();
                table(&["j", "area", "bound", "ratio"], &rows)
            };
            Ok(summary + &body)
        }
    }
}

fn run_verify(a: &VerifyArgs) -> Result<(String, bool)> {
    let config = VerifyConfig {
        seed: a.seed,
        instances: a.instances,
        step: a.step,
    };
    let outcomes = run_all(&config)?;
    let passed = outcomes.iter().all(|o| o.passed);
    let text = match a.output.format {
        Format::Json => json_text(&outcomes)?,
        Format::Csv => {
            let rows: Vec<_> = outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.index.to_string(),
                        o.name.clone(),
                        o.passed.to_string(),
                        o.detail.clone(),
                    ]
                })
                .collect();
            simple_csv(&["index", "name", "passed", "detail"], &rows)?
        }
        Format::Table => outcomes.iter().map(|o| o.line() + "\n").collect(),
    };
    Ok((text, passed))
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Bounds(a) => &a.output,
        Command::Model(a) => &a.output,
        Command::Evolve(a) => &a.output,
        Command::GenArea(a) => &a.output,
        Command::Counterexample(a) => &a.output,
        Command::Verify(a) => &a.output,
    }
}

/// Returns the rendered output and whether all checks passed.
fn run(command: &Command) -> Result<(String, bool)> {
    let (body, passed) = match command {
        Command::Bounds(a) => (run_bounds(a)?, true),
        Command::Model(a) => (run_model(a)?, true),
        Command::Evolve(a) => (run_evolve(a)?, true),
        Command::GenArea(a) => (run_gen_area(a)?, true),
        Command::Counterexample(a) => (run_counterexample(a)?, true),
        Command::Verify(a) => run_verify(a)?,
    };
    Ok((echo(command)? + &body, passed))
}

fn echo(command: &Command) -> Result<String> {
    Ok(format!(
        "# cosmic-area {} {}\n",
        env!("CARGO_PKG_VERSION"),
        serde_json::to_string(command)?
    ))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli.command).and_then(|(text, passed)| {
        emit(&text, output_args(&cli.command).out.as_deref())?;
        Ok(passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
