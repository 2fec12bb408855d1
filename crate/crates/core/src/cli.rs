//! Command dispatch: problem ingestion, report emission and exit codes.
//!
//! Exit codes: 0 stable/holds/certified, 1 unstable/violated,
//! 2 inconclusive (also: oracle found nothing), 3 usage or input errors,
//! 4 internal errors.

use std::ffi::OsString;
use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use crate::engine::{
    analyze, oracle_falsify, robust_margin, EngineSettings, OracleOutcome, Problem, Timing,
    Verdict,
};
use crate::freqdom::{hinf_lt_one, sector_positivity, spr_check, FreqSettings, SectorSpec};
use crate::kharitonov::{EdgeId, VertexId};
use crate::poly::Polynomial;
use crate::problem::{builtin_fixture, ProblemFile};
use crate::testing_sets::{
    collapse_patterns, count_formulas, expand_pattern, pattern_config_count, EntryState, Method,
};

#[derive(Debug, Parser)]
#[command(
    name = "imstab",
    version,
    about = "Robust Hurwitz stability of interval polynomial matrix families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    #[value(name = "prop1")]
    Prop1,
    #[value(name = "thm1_row")]
    Thm1Row,
    #[value(name = "thm1_column")]
    Thm1Column,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Prop1 => Method::Prop1,
            MethodArg::Thm1Row => Method::Thm1Row,
            MethodArg::Thm1Column => Method::Thm1Column,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FreqKind {
    Hinf,
    Spr,
    Sector,
}

#[derive(Debug, Clone, Args)]
struct CommonOpts {
    /// Problem file path, or builtin:manipulator / builtin:manipulator_theta0.
    problem: String,
    /// Uncertainty scale applied to center/scale template coefficients.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Routh pivot tolerance (relative).
    #[arg(long)]
    tol: Option<f64>,
    /// Steps per lambda axis for grid fallbacks.
    #[arg(long)]
    grid_steps: Option<usize>,
    /// Frequency resolution floor (relative to omega_max).
    #[arg(long)]
    freq_floor: Option<f64>,
    /// Deterministic subsampling cap on expanded configurations.
    #[arg(long)]
    max_configs: Option<u64>,
    /// Sample count for the falsification oracle.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for configuration checks.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide robust stability over a reduced testing set.
    Analyze {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value_t = MethodArg::Thm1Row)]
        method: MethodArg,
    },
    /// Bisect the largest stable uncertainty scale of a template problem.
    Margin {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value_t = MethodArg::Thm1Row)]
        method: MethodArg,
        /// Bracket as lo:hi; analyze must be stable at lo and not at hi.
        #[arg(long, default_value = "0:1")]
        eps_range: String,
        /// Bisection width target.
        #[arg(long, default_value_t = 1e-3)]
        margin_tol: f64,
    },
    /// Exact testing-set counts: formulas, raw and collapsed patterns.
    Count {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Emit testing-set configurations (or pattern skeletons).
    Enumerate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value_t = MethodArg::Thm1Row)]
        method: MethodArg,
        /// Emit only pattern skeletons instead of full configurations.
        #[arg(long)]
        patterns_only: bool,
    },
    /// Print Kharitonov vertex and edge sets for every matrix entry.
    Kharitonov {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Monte Carlo falsification with vertex exhaustion.
    Oracle {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Frequency-domain checks over the testing set.
    Freq {
        #[arg(value_enum)]
        check: FreqKind,
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value_t = MethodArg::Thm1Row)]
        method: MethodArg,
    },
    /// Run the bundled manipulator fixture end to end.
    Example {
        /// Uncertainty scale for the analysis step.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Also bisect the robust margin (slower).
        #[arg(long)]
        margin: bool,
        /// Write the fixture JSON to this path and continue.
        #[arg(long)]
        write_fixture: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// Run the CLI against an argument vector; returns (exit code, output).
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            return (code, e.to_string());
        }
    };
    match dispatch(cli) {
        Ok(out) => out,
        Err(e) => (e.code, format!("error: {}\n", e.message)),
    }
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

fn load(common: &CommonOpts) -> Result<(ProblemFile, Problem, EngineSettings), CliError> {
    let (text, origin) = match common.problem.strip_prefix("builtin:") {
        Some(name) => match builtin_fixture(name) {
            Some(text) => (text.to_string(), format!("builtin:{name}")),
            None => {
                return Err(CliError::input(format!(
                    "unknown builtin problem '{name}' (try builtin:manipulator)"
                )))
            }
        },
        None => match std::fs::read_to_string(&common.problem) {
            Ok(text) => (text, common.problem.clone()),
            Err(e) => return Err(CliError::input(format!("cannot read {}: {e}", common.problem))),
        },
    };
    let file = ProblemFile::parse(&text, &origin).map_err(|e| CliError::input(e.to_string()))?;
    let problem = file.resolve(common.eps).map_err(|e| CliError::input(e.to_string()))?;

    let mut settings = EngineSettings::default();
    if let Some(patch) = &file.settings {
        patch.apply(&mut settings);
    }
    if let Some(tol) = common.tol {
        settings.routh_tol = tol;
    }
    if let Some(steps) = common.grid_steps {
        settings.grid_steps = steps;
    }
    if let Some(floor) = common.freq_floor {
        settings.freq_floor = floor;
    }
    settings.max_configs = common.max_configs.or(settings.max_configs);
    settings.seed = common.seed;
    settings.jobs = common.jobs;
    Ok((file, problem, settings))
}

fn render<T: Serialize>(format: Format, value: &T, table: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Table => table(),
    }
}

fn verdict_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Stable => 0,
        Verdict::Unstable => 1,
        Verdict::Inconclusive => 2,
    }
}

#[derive(Serialize)]
struct MethodCount {
    method: Method,
    patterns_raw: u64,
    patterns_collapsed: u64,
    max_arity: usize,
    /// collapsed patterns x 4^(nondegenerate entries), mirroring the
    /// per-pattern vertex/edge choice bookkeeping
    #[serde(with = "crate::testing_sets::biguint_string")]
    full_after_collapse: BigUint,
    /// distinct configurations actually expanded (values deduplicated)
    #[serde(with = "crate::testing_sets::biguint_string")]
    distinct_configurations: BigUint,
}

#[derive(Serialize)]
struct CountReport {
    problem: String,
    n: usize,
    eps: f64,
    nondegenerate_entries: usize,
    formulas: crate::testing_sets::CountFormulas,
    methods: Vec<MethodCount>,
}

fn count_report(origin: &str, problem: &Problem, eps: f64) -> CountReport {
    let n = problem.dim();
    let nondeg = problem.b.nondegenerate_entries() + problem.d.nondegenerate_entries();
    let methods = [Method::Prop1, Method::Thm1Row, Method::Thm1Column]
        .into_iter()
        .map(|method| {
            let raw = method.patterns(n);
            let collapsed = collapse_patterns(&raw, &problem.b, &problem.d);
            let max_arity = collapsed.iter().map(|p| p.edges.len()).max().unwrap_or(0);
            let full = BigUint::from(collapsed.len())
                * BigUint::from(4_u32).pow(nondeg as u32);
            let distinct: BigUint = collapsed
                .iter()
                .map(|p| pattern_config_count(p, &problem.b, &problem.d, true))
                .sum();
            MethodCount {
                method,
                patterns_raw: raw.len() as u64,
                patterns_collapsed: collapsed.len() as u64,
                max_arity,
                full_after_collapse: full,
                distinct_configurations: distinct,
            }
        })
        .collect();
    CountReport {
        problem: origin.to_string(),
        n,
        eps,
        nondegenerate_entries: nondeg,
        formulas: count_formulas(n),
        methods,
    }
}

fn count_table(report: &CountReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "problem: {} (n = {}, eps = {})", report.problem, report.n, report.eps);
    let _ = writeln!(out, "nondegenerate entries: {}", report.nondegenerate_entries);
    let _ = writeln!(
        out,
        "formulas: prop1 = {}, thm1 = {}, prop1 patterns = {}, thm1 patterns = {}",
        report.formulas.prop1,
        report.formulas.thm1,
        report.formulas.prop1_patterns,
        report.formulas.thm1_patterns
    );
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>10} {:>6} {:>20} {:>12}",
        "method", "raw", "collapsed", "arity", "full(collapsed)", "distinct"
    );
    for m in &report.methods {
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>10} {:>6} {:>20} {:>12}",
            m.method.name(),
            m.patterns_raw,
            m.patterns_collapsed,
            m.max_arity,
            m.full_after_collapse.to_string(),
            m.distinct_configurations.to_string()
        );
    }
    out
}

fn analyze_table(report: &crate::engine::AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method: {}", report.method.name());
    let _ = writeln!(
        out,
        "patterns: {} raw, {} after collapse; configurations: {}{}",
        report.patterns_raw,
        report.patterns,
        report.configurations,
        if report.subsampled { " (subsampled)" } else { "" }
    );
    let _ = writeln!(
        out,
        "checked {} (stable {}, unstable {}, inconclusive {})",
        report.counts.checked, report.counts.stable, report.counts.unstable, report.counts.inconclusive
    );
    if let Some(w) = &report.witness {
        let _ = writeln!(
            out,
            "witness: configuration {} of pattern {} at lambda {:?}",
            w.configuration, w.pattern, w.lambda
        );
        let _ = writeln!(out, "witness determinant: {}", w.determinant);
    }
    let _ = writeln!(out, "verdict: {:?}", report.verdict);
    out
}

#[derive(Serialize)]
struct MarginReport {
    problem: String,
    method: Method,
    eps_lo: f64,
    eps_hi: f64,
    margin_tol: f64,
    stable_eps: f64,
    unstable_eps: f64,
    steps: Vec<crate::engine::MarginStep>,
    settings: EngineSettings,
    timing: Timing,
}

#[derive(Serialize)]
struct SelectionView {
    position: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<usize>,
}

#[derive(Serialize)]
struct ConfigView {
    pattern: usize,
    label: String,
    arity: usize,
    edges: Vec<String>,
    selections: Vec<SelectionView>,
}

#[derive(Serialize)]
struct PatternView {
    pattern: usize,
    label: String,
    arity: usize,
    edges: Vec<String>,
    merged: usize,
}

#[derive(Serialize)]
struct EnumerateReport {
    problem: String,
    method: Method,
    eps: f64,
    patterns_only: bool,
    total: String,
    emitted: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    patterns: Vec<PatternView>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    configurations: Vec<ConfigView>,
}

#[derive(Serialize)]
struct EntryView {
    entry: String,
    bounds: Vec<[f64; 2]>,
    full_point: bool,
    vertices: Vec<Vec<f64>>,
    edges: Vec<EdgeView>,
}

#[derive(Serialize)]
struct EdgeView {
    pair: String,
    from: Vec<f64>,
    to: Vec<f64>,
    degenerate: bool,
}

#[derive(Serialize)]
struct KharitonovReport {
    problem: String,
    eps: f64,
    entries: Vec<EntryView>,
}

#[derive(Serialize)]
struct OracleReport {
    problem: String,
    eps: f64,
    samples: u64,
    seed: u64,
    #[serde(flatten)]
    outcome: OracleOutcome,
    settings: EngineSettings,
    timing: Timing,
}

#[derive(Serialize)]
struct ExampleReport {
    problem: String,
    eps: f64,
    counts: CountReport,
    analyses: Vec<crate::engine::AnalysisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<MarginReport>,
}

fn dispatch(cli: Cli) -> Result<(i32, String), CliError> {
    match cli.command {
        Command::Analyze { common, method } => {
            let (_, problem, settings) = load(&common)?;
            let report = analyze(&problem, method.into(), &settings)
                .map_err(|e| CliError::internal(e.to_string()))?;
            let out = render(common.format, &report, || analyze_table(&report));
            Ok((verdict_code(report.verdict), out))
        }
        Command::Margin { common, method, eps_range, margin_tol } => {
            let (file, _, settings) = load(&common)?;
            if !file.has_template() {
                return Err(CliError::input(
                    "margin needs center/scale template coefficients in B or D",
                ));
            }
            let (lo, hi) = parse_range(&eps_range)?;
            let started = std::time::Instant::now();
            let template = |eps: f64| {
                file.resolve(eps).map_err(|e| crate::engine::EngineError::Template(e.to_string()))
            };
            let result = robust_margin(&template, lo, hi, margin_tol, method.into(), &settings)
                .map_err(|e| CliError::internal(e.to_string()))?;
            let report = MarginReport {
                problem: common.problem.clone(),
                method: method.into(),
                eps_lo: lo,
                eps_hi: hi,
                margin_tol,
                stable_eps: result.stable_eps,
                unstable_eps: result.unstable_eps,
                steps: result.steps,
                settings,
                timing: Timing { wall_ms: started.elapsed().as_millis() },
            };
            let out = render(common.format, &report, || {
                format!(
                    "margin ({}): stable up to eps = {}, unstable at eps = {}\n",
                    report.method.name(),
                    report.stable_eps,
                    report.unstable_eps
                )
            });
            Ok((0, out))
        }
        Command::Count { common } => {
            let (_, problem, _) = load(&common)?;
            let report = count_report(&common.problem, &problem, common.eps);
            let out = render(common.format, &report, || count_table(&report));
            Ok((0, out))
        }
        Command::Enumerate { common, method, patterns_only } => {
            let (_, problem, settings) = load(&common)?;
            let m: Method = method.into();
            let raw = m.patterns(problem.dim());
            let collapsed = collapse_patterns(&raw, &problem.b, &problem.d);
            let total: BigUint = collapsed
                .iter()
                .map(|p| pattern_config_count(p, &problem.b, &problem.d, settings.dedup_values))
                .sum();
            let mut report = EnumerateReport {
                problem: common.problem.clone(),
                method: m,
                eps: common.eps,
                patterns_only,
                total: if patterns_only { collapsed.len().to_string() } else { total.to_string() },
                emitted: 0,
                patterns: Vec::new(),
                configurations: Vec::new(),
            };
            if patterns_only {
                for (pi, pat) in collapsed.iter().enumerate() {
                    report.patterns.push(PatternView {
                        pattern: pi,
                        label: pat.label.clone(),
                        arity: pat.edges.len(),
                        edges: pat.edges.iter().map(|p| p.to_string()).collect(),
                        merged: pat.merged,
                    });
                }
                report.emitted = report.patterns.len() as u64;
            } else {
                let cap = settings.max_configs.unwrap_or(u64::MAX);
                'emit: for (pi, pat) in collapsed.iter().enumerate() {
                    for config in
                        expand_pattern(pat, pi, &problem.b, &problem.d, settings.dedup_values)
                    {
                        if report.emitted >= cap {
                            break 'emit;
                        }
                        let selections = config
                            .states
                            .iter()
                            .enumerate()
                            .map(|(flat, state)| {
                                let n = config.n;
                                let side = if flat < n * n {
                                    crate::testing_sets::Side::B
                                } else {
                                    crate::testing_sets::Side::D
                                };
                                let local = flat % (n * n);
                                let pos = crate::testing_sets::Position::new(
                                    side,
                                    local / n,
                                    local % n,
                                );
                                match state {
                                    EntryState::Vertex { id, .. } => SelectionView {
                                        position: pos.to_string(),
                                        vertex: Some(id.index()),
                                        edge: None,
                                    },
                                    EntryState::Edge { id, .. } => SelectionView {
                                        position: pos.to_string(),
                                        vertex: None,
                                        edge: Some(id.index()),
                                    },
                                }
                            })
                            .collect();
                        report.configurations.push(ConfigView {
                            pattern: pi,
                            label: pat.label.clone(),
                            arity: config.arity(),
                            edges: config.edges.iter().map(|p| p.to_string()).collect(),
                            selections,
                        });
                        report.emitted += 1;
                    }
                }
            }
            let out = render(common.format, &report, || {
                format!("{} items of {} total\n", report.emitted, report.total)
            });
            Ok((0, out))
        }
        Command::Kharitonov { common } => {
            let (_, problem, _) = load(&common)?;
            let n = problem.dim();
            let mut entries = Vec::new();
            for (tag, matrix) in [("B", &problem.b), ("D", &problem.d)] {
                for i in 0..n {
                    for j in 0..n {
                        let ip = matrix.entry(i, j);
                        entries.push(EntryView {
                            entry: format!("{tag}({},{})", i + 1, j + 1),
                            bounds: ip.bounds().iter().map(|&(lo, hi)| [lo, hi]).collect(),
                            full_point: ip.is_full_point(),
                            vertices: VertexId::ALL
                                .iter()
                                .map(|&id| ip.vertex(id).coeffs().to_vec())
                                .collect(),
                            edges: EdgeId::ALL
                                .iter()
                                .map(|&id| {
                                    let (f, t) = id.endpoints();
                                    let seg = ip.edge(id);
                                    EdgeView {
                                        pair: format!("({},{})", f.index(), t.index()),
                                        from: seg.from.coeffs().to_vec(),
                                        to: seg.to.coeffs().to_vec(),
                                        degenerate: seg.is_degenerate(),
                                    }
                                })
                                .collect(),
                        });
                    }
                }
            }
            let report =
                KharitonovReport { problem: common.problem.clone(), eps: common.eps, entries };
            let out = render(common.format, &report, || {
                let mut s = String::new();
                for e in &report.entries {
                    let _ = writeln!(s, "{}: full_point={}", e.entry, e.full_point);
                    for (k, v) in e.vertices.iter().enumerate() {
                        let _ = writeln!(s, "  K{}: {:?}", k + 1, v);
                    }
                }
                s
            });
            Ok((0, out))
        }
        Command::Oracle { common } => {
            let (_, problem, settings) = load(&common)?;
            let started = std::time::Instant::now();
            let outcome = oracle_falsify(&problem, common.samples, common.seed, &settings)
                .map_err(|e| CliError::internal(e.to_string()))?;
            let code = match &outcome {
                OracleOutcome::Witness(_) => 1,
                OracleOutcome::NoneFound { .. } => 2,
            };
            let report = OracleReport {
                problem: common.problem.clone(),
                eps: common.eps,
                samples: common.samples,
                seed: common.seed,
                outcome,
                settings,
                timing: Timing { wall_ms: started.elapsed().as_millis() },
            };
            let out = render(common.format, &report, || match &report.outcome {
                OracleOutcome::Witness(w) => format!("witness found: {}\n", w.source),
                OracleOutcome::NoneFound { samples, vertex_combos } => format!(
                    "no witness in {samples} samples and {vertex_combos} vertex combinations\n"
                ),
            });
            Ok((code, out))
        }
        Command::Freq { check, common, method } => {
            let (file, problem, settings) = load(&common)?;
            let fs = FreqSettings::default();
            let report = match check {
                FreqKind::Hinf => hinf_lt_one(&problem, method.into(), &settings, &fs),
                FreqKind::Spr => spr_check(&problem, method.into(), &settings, &fs),
                FreqKind::Sector => {
                    let block = file
                        .checks
                        .as_ref()
                        .and_then(|c| c.sector.as_ref())
                        .ok_or_else(|| {
                            CliError::input(
                                "sector check needs a checks.sector block with K and eta",
                            )
                        })?;
                    let spec = SectorSpec::new(block.k.clone(), block.eta)
                        .map_err(|e| CliError::input(e.to_string()))?;
                    sector_positivity(&problem, &spec, method.into(), &settings, &fs)
                }
            };
            let code = report.outcome.exit_code();
            let out = render(common.format, &report, || {
                format!("{}: {:?}\n", report.check, report.outcome)
            });
            Ok((code, out))
        }
        Command::Example { eps, margin, write_fixture, format, jobs } => {
            if let Some(path) = &write_fixture {
                std::fs::write(path, crate::problem::MANIPULATOR_FIXTURE)
                    .map_err(|e| CliError::input(format!("cannot write {path}: {e}")))?;
            }
            let file = ProblemFile::parse(crate::problem::MANIPULATOR_FIXTURE, "builtin")
                .expect("bundled fixture parses");
            let mut settings = EngineSettings::default();
            settings.jobs = jobs;
            // counting needs nondegenerate template entries: any eps > 0
            let counting_eps = if eps > 0.0 { eps } else { 0.5 };
            let counting_problem =
                file.resolve(counting_eps).expect("bundled fixture resolves");
            let counts = count_report("builtin:manipulator", &counting_problem, counting_eps);
            let problem = file.resolve(eps).map_err(|e| CliError::input(e.to_string()))?;
            let mut analyses = Vec::new();
            for m in [Method::Prop1, Method::Thm1Row, Method::Thm1Column] {
                analyses.push(
                    analyze(&problem, m, &settings)
                        .map_err(|e| CliError::internal(e.to_string()))?,
                );
            }
            let margin_report = if margin {
                let started = std::time::Instant::now();
                let template = |e: f64| {
                    file.resolve(e)
                        .map_err(|e| crate::engine::EngineError::Template(e.to_string()))
                };
                let result =
                    robust_margin(&template, 0.0, 0.2, 1e-3, Method::Thm1Row, &settings)
                        .map_err(|e| CliError::internal(e.to_string()))?;
                Some(MarginReport {
                    problem: "builtin:manipulator".to_string(),
                    method: Method::Thm1Row,
                    eps_lo: 0.0,
                    eps_hi: 0.2,
                    margin_tol: 1e-3,
                    stable_eps: result.stable_eps,
                    unstable_eps: result.unstable_eps,
                    steps: result.steps,
                    settings: settings.clone(),
                    timing: Timing { wall_ms: started.elapsed().as_millis() },
                })
            } else {
                None
            };
            let worst = analyses
                .iter()
                .map(|a| verdict_code(a.verdict))
                .max()
                .unwrap_or(2);
            let report = ExampleReport {
                problem: "builtin:manipulator".to_string(),
                eps,
                counts,
                analyses,
                margin: margin_report,
            };
            let out = render(format, &report, || {
                let mut s = count_table(&report.counts);
                for a in &report.analyses {
                    let _ = writeln!(
                        s,
                        "analyze {} at eps = {}: {:?} ({} configurations)",
                        a.method.name(),
                        report.eps,
                        a.verdict,
                        a.configurations
                    );
                }
                if let Some(m) = &report.margin {
                    let _ = writeln!(
                        s,
                        "margin: stable up to {}, unstable at {}",
                        m.stable_eps, m.unstable_eps
                    );
                }
                s
            });
            Ok((worst, out))
        }
    }
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| CliError::input(format!("--eps-range expects lo:hi, got '{text}'")))?;
    let lo: f64 = lo.parse().map_err(|_| CliError::input(format!("bad lo in '{text}'")))?;
    let hi: f64 = hi.parse().map_err(|_| CliError::input(format!("bad hi in '{text}'")))?;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(CliError::input(format!("--eps-range needs finite lo < hi, got '{text}'")));
    }
    Ok((lo, hi))
}

#[allow(dead_code)]
fn type_check_polynomial_display(p: &Polynomial) -> String {
    p.to_string()
}
