//! `mhcy` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when some defect or check
//! fails, 2 on input errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::motivic::TwistRule;
use crate::nearby::SNCScenario;
use crate::report::{self, Conventions, ReportDocument, ScenarioReport};
use crate::scenario::ScenarioFile;
use crate::verify::{self, VerificationReport};
use crate::Rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEFECT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Default conventions file looked up next to the first scenario.
pub const CONVENTIONS_FILE: &str = "conventions.toml";

#[derive(Debug, Parser)]
#[command(
    name = "mhcy",
    version,
    about = "Exact specialization checks for motivic Hodge-Chern classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Lhs,
    Rhs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fix the twist convention on a scenario and write the conventions file.
    Calibrate {
        scenario: PathBuf,
        /// Where to write the conventions file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the specialization identity on each scenario.
    Verify {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Also evaluate both sides at this rational value of y.
        #[arg(long)]
        y_eval: Option<String>,
        #[arg(long)]
        conventions: Option<PathBuf>,
        /// Include wall-clock durations.
        #[arg(long)]
        timings: bool,
    },
    /// Print one or both sides of the identity.
    Class {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        side: Option<Side>,
        #[arg(long)]
        conventions: Option<PathBuf>,
    },
    /// Print the nearby, restriction and vanishing classes.
    Nearby { scenario: PathBuf },
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Calibrate {
            scenario,
            out: path,
        } => calibrate(&scenario, path.as_deref(), out),
        Command::Verify {
            scenarios,
            json,
            y_eval,
            conventions,
            timings,
        } => verify_many(
            &scenarios,
            json,
            y_eval.as_deref(),
            conventions.as_deref(),
            timings,
            out,
        ),
        Command::Class {
            scenario,
            side,
            conventions,
        } => class(&scenario, side, conventions.as_deref(), out),
        Command::Nearby { scenario } => nearby(&scenario, out),
    };
    match result {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn load_conventions(explicit: Option<&Path>, first: &Path) -> Result<Conventions, InputError> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let p = first
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(CONVENTIONS_FILE);
            if !p.exists() {
                return Err(InputError(format!(
                    "no conventions file given and {} does not exist; run `mhcy calibrate` first",
                    p.display()
                )));
            }
            p
        }
    };
    Ok(Conventions::load(path)?)
}

fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn calibrate(path: &Path, dest: Option<&Path>, out: &mut dyn Write) -> Result<i32, InputError> {
    let s = crate::scenario::parse_scenario(path)?;
    let cal = match verify::calibrate(&s) {
        Ok(c) => c,
        Err(e @ verify::VerifyError::Ambiguous { .. }) => {
            writeln!(out, "{e}")?;
            return Ok(EXIT_DEFECT);
        }
        Err(e) => return Err(e.into()),
    };
    let conv = Conventions::from_calibration(&cal);
    write!(
        out,
        "{}",
        table(&[
            (
                "scenario",
                format!("{} ({} on {})", s.id, s.function_label, s.ambient_label)
            ),
            ("naive defect", conv.defects.naive.clone()),
            ("shifted defect", conv.defects.shifted.clone()),
            ("frozen", conv.twist.to_string()),
        ])
    )?;
    match dest {
        Some(p) => {
            std::fs::write(p, conv.to_toml())
                .map_err(|e| InputError(format!("io error: {}: {e}", p.display())))?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => write!(out, "\n{}", conv.to_toml())?,
    }
    Ok(EXIT_OK)
}

fn expect_mismatches(file: &ScenarioFile, s: &SNCScenario, r: &VerificationReport) -> Vec<String> {
    let Some(e) = &file.expect else {
        return Vec::new();
    };
    if e.convention.is_some_and(|c| c != r.convention) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cmp = |field: &str, want: &Option<String>, got: String| {
        if let Some(w) = want {
            if *w != got {
                out.push(format!("{field}: expected {w}, got {got}"));
            }
        }
    };
    cmp("nearby", &e.nearby, s.nearby_class().render());
    cmp("lhs", &e.lhs, r.lhs.render());
    cmp("rhs", &e.rhs, r.rhs.render());
    cmp("defect", &e.defect, r.defect.render());
    if let Some(a) = &e.acampo {
        let got = vec![r.acampo.0, r.acampo.1];
        if *a != got {
            out.push(format!("acampo: expected {a:?}, got {got:?}"));
        }
    }
    out
}

fn check_one(
    path: &Path,
    rule: TwistRule,
    y0: Option<&Rational>,
    timings: bool,
) -> Result<ScenarioReport, String> {
    let start = Instant::now();
    let file = ScenarioFile::load(path).map_err(|e| e.to_string())?;
    let s = file.build().map_err(|e| e.to_string())?;
    let r = verify::check_identity(&s, rule).map_err(|e| e.to_string())?;
    let mut j = ScenarioReport::from_report(&r, &s.ambient_label, &s.function_label);
    if s.family.is_some() {
        j.smooth_case = Some(
            verify::check_smooth_case(&s, rule)
                .map_err(|e| e.to_string())?
                .pass(),
        );
    }
    if let Some(y) = y0 {
        j.evaluation = Some(report::evaluation(&r, y));
    }
    j.expect_mismatches = expect_mismatches(&file, &s, &r);
    if timings {
        j.duration_ms = Some(report::millis(start.elapsed()));
    }
    Ok(j)
}

fn yes(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

fn render_report(j: &ScenarioReport, timings: bool) -> String {
    let shadow = match (&j.shadow.left, &j.shadow.right, &j.shadow.pole) {
        (Some(l), Some(r), _) => format!("{l} {} {r}", if j.shadow.agree { "=" } else { "!=" }),
        (_, _, Some(p)) => format!("pole: {p}"),
        _ => String::new(),
    };
    let mut rows = vec![
        (
            "scenario",
            format!("{} ({} on {})", j.scenario, j.function, j.ambient),
        ),
        ("convention", j.convention.to_string()),
        ("presentation", j.completeness.clone()),
        ("LHS", j.lhs.clone()),
        ("RHS", j.rhs.clone()),
        ("defect", j.defect.clone()),
        ("(1+y) | RHS", yes(j.divisible)),
        ("y = -1", shadow),
        (
            "A'Campo",
            format!(
                "{} {} {}",
                j.acampo.nearby_euler,
                if j.acampo.agree { "=" } else { "!=" },
                j.acampo.component_sum
            ),
        ),
    ];
    if let Some(h) = &j.homology {
        rows.push(("td_* LHS", h.lhs.clone()));
        rows.push(("td_* RHS", h.rhs.clone()));
        rows.push((
            "normalized",
            format!(
                "denominator exponent {}, {}",
                h.normalized_denominator,
                yes(h.normalized_pass)
            ),
        ));
    }
    if let Some(sc) = j.smooth_case {
        rows.push(("lambda_y route", yes(sc)));
    }
    if let Some(ev) = &j.evaluation {
        let fmt = |v: &[(String, String)]| {
            if v.is_empty() {
                "0".to_string()
            } else {
                v.iter()
                    .map(|(g, x)| format!("[O_{g}] = {x}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            }
        };
        rows.push(("at y", ev.y.clone()));
        rows.push(("  LHS", fmt(&ev.lhs)));
        rows.push(("  RHS", fmt(&ev.rhs)));
        rows.push(("  defect", fmt(&ev.defect)));
    }
    for m in &j.expect_mismatches {
        rows.push(("expect", m.clone()));
    }
    if timings {
        if let Some(d) = &j.duration_ms {
            rows.push(("time", format!("{d} ms")));
        }
    }
    rows.push(("result", if j.ok() { "PASS" } else { "FAIL" }.into()));
    table(&rows)
}

fn verify_many(
    paths: &[PathBuf],
    json: bool,
    y_eval: Option<&str>,
    conventions: Option<&Path>,
    timings: bool,
    out: &mut dyn Write,
) -> Result<i32, InputError> {
    let start = Instant::now();
    let conv = load_conventions(conventions, &paths[0])?;
    let y0 = match y_eval {
        Some(t) => Some(
            Rational::from_str(t)
                .map_err(|_| InputError(format!("--y-eval: `{t}` is not a rational p/q")))?,
        ),
        None => None,
    };
    let results: Vec<Result<ScenarioReport, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = paths
            .iter()
            .map(|p| scope.spawn(|| check_one(p, conv.twist, y0.as_ref(), timings)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    });
    let mut reports = Vec::new();
    for (p, r) in paths.iter().zip(results) {
        match r {
            Ok(j) => reports.push(j),
            Err(e) => return Err(InputError(format!("{}: {e}", p.display()))),
        }
    }
    let mut doc = ReportDocument::new(conv.twist, Some(conv.calibrated_on.clone()), reports);
    if timings {
        doc.summary.duration_ms = Some(report::millis(start.elapsed()));
    }
    if json {
        let text = doc.to_json();
        writeln!(out, "{text}")?;
        if let Ok(dir) = std::env::var(report::REPORT_DIR_ENV) {
            let dest = Path::new(&dir).join("verify-report.json");
            std::fs::write(&dest, format!("{text}\n"))
                .map_err(|e| InputError(format!("io error: {}: {e}", dest.display())))?;
        }
    } else {
        for j in &doc.scenarios {
            writeln!(out, "{}", render_report(j, timings))?;
        }
        let width = doc
            .scenarios
            .iter()
            .map(|j| j.scenario.len())
            .max()
            .unwrap_or(0)
            .max(8);
        writeln!(out, "{:<width$}  {:<8}  result", "scenario", "defect")?;
        for j in &doc.scenarios {
            let d = if j.defect == "0" { "0" } else { "nonzero" };
            writeln!(
                out,
                "{:<width$}  {:<8}  {}",
                j.scenario,
                d,
                if j.ok() { "PASS" } else { "FAIL" }
            )?;
        }
        writeln!(
            out,
            "{} passed, {} failed (convention {}, calibrated on {})",
            doc.summary.passed, doc.summary.failed, doc.convention, conv.calibrated_on
        )?;
    }
    Ok(if doc.all_ok() { EXIT_OK } else { EXIT_DEFECT })
}

fn class(
    path: &Path,
    side: Option<Side>,
    conventions: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, InputError> {
    let s = crate::scenario::parse_scenario(path)?;
    let conv = load_conventions(conventions, path)?;
    let (lhs, rhs) = verify::theorem_sides(&s, &s.identity_class(), conv.twist)?;
    match side {
        Some(Side::Lhs) => writeln!(out, "{}", lhs.render())?,
        Some(Side::Rhs) => writeln!(out, "{}", rhs.render())?,
        None => write!(
            out,
            "{}",
            table(&[("LHS", lhs.render()), ("RHS", rhs.render())])
        )?,
    }
    Ok(EXIT_OK)
}

fn nearby(path: &Path, out: &mut dyn Write) -> Result<i32, InputError> {
    let s = crate::scenario::parse_scenario(path)?;
    let (l, r, eq) = s.acampo_check();
    write!(
        out,
        "{}",
        table(&[
            ("Psi'", s.nearby_class().render()),
            ("i^*", s.i_star_class().render()),
            ("Phi'", s.vanishing_class().render()),
            (
                "A'Campo",
                format!("{l} {} {r}", if eq { "=" } else { "!=" })
            ),
        ])
    )?;
    Ok(EXIT_OK)
}
