//! The `hsp` command line: `simulate`, `verify` and `groups`.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage error,
//! 3 resource cap exceeded.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::error::{HspError, Result};
use crate::group::{
    distinct_cyclic_subgroups, enumerate_subgroups, parse_group_string, subgroup_closure, Element, FiniteGroup,
    Subgroup, ENUMERATION_CAP, NAMED_FAMILIES,
};
use crate::report::{
    to_json, AnalysisSection, ExperimentReport, ResolvedConfig, SimulationResults, Timing, VerifyConfig,
    VerifyReport, SCHEMA_VERSION,
};
use crate::runtime::{
    analysis_rng, default_m, make_oracle_from_subgroup, run_analysis, run_trials, test_schedule, RunConfig,
    TrialResult, RNG_NAME,
};
use crate::scalar::{Scalar, ScalarMode};
use crate::tensor::{CompressOptions, DEFAULT_TERM_CAP};
use crate::verification::{check_dense, check_lemma1, check_lemma2, check_success_bound, fleet, LemmaReport};
use crate::Rational;

pub const SEED_ENV: &str = "HSP_SEED";

#[derive(Parser, Debug)]
#[command(name = "hsp", version, about = "Hidden subgroup identification by sequential coset projections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the algorithm on one group and hidden subgroup.
    Simulate(SimulateArgs),
    /// Run one of the exhaustive checkers.
    Verify(VerifyArgs),
    /// Describe the built-in groups.
    Groups {
        #[command(subcommand)]
        action: GroupsAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum GroupsAction {
    List,
    Show { group: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sampled,
    Analysis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalarArg {
    Exact,
    Float,
}

impl From<ScalarArg> for ScalarMode {
    fn from(s: ScalarArg) -> Self {
        match s {
            ScalarArg::Exact => ScalarMode::Exact,
            ScalarArg::Float => ScalarMode::Float,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Lemma1,
    Lemma2,
    Bound,
    Dense,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Group spec: Z:n, D:n, S:n, Q8, products like Z:2xZ:4, or file:<path>.
    #[arg(long)]
    pub group: String,
    /// Seed; falls back to $HSP_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "exact")]
    pub scalar: ScalarArg,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Generators of H, comma separated: indices or element names.
    #[arg(long, default_value = "")]
    pub subgroup_gens: String,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value = "sampled")]
    pub mode: Mode,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub skip_implied: bool,
    /// Element test order, comma separated; defaults to index order.
    #[arg(long)]
    pub ordering: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
    pub term_cap: usize,
    /// Float mode only: fold linearly dependent terms.
    #[arg(long)]
    pub rank_reduction: bool,
    /// Per-trial rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: Check,
    /// A group spec, or `fleet` for every verification group.
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 5)]
    pub max_m: usize,
    #[arg(long, default_value_t = 3)]
    pub draws: usize,
    /// m for lemma2/bound/dense; defaults to ⌈4 log₂|G|⌉ + 2 (dense: 3).
    #[arg(long)]
    pub m: Option<usize>,
    /// Restrict lemma2/bound to one H; default is every subgroup.
    #[arg(long)]
    pub subgroup_gens: Option<String>,
    /// Sampled trials replayed by the dense check.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses and runs a command line without touching the process streams.
pub fn invoke<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Invocation { code, stdout: text, stderr: String::new() }
            } else {
                Invocation { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(cli) {
        Ok((code, stdout)) => Invocation { code, stdout, stderr: String::new() },
        Err(e) => Invocation {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: error_json(&e),
        },
    }
}

fn error_json(e: &HspError) -> String {
    #[derive(Serialize)]
    struct ErrorDoc<'a> {
        schema: u32,
        error: &'a str,
        message: String,
    }
    to_json(&ErrorDoc {
        schema: SCHEMA_VERSION,
        error: e.kind(),
        message: e.to_string(),
    })
}

/// Runs a parsed command; returns the exit code and what goes to stdout.
pub fn execute(cli: Cli) -> Result<(i32, String)> {
    let threads = match &cli.command {
        Command::Simulate(a) => a.common.threads,
        Command::Verify(a) => a.common.threads,
        Command::Groups { .. } => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| HspError::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Verify(a) => verify(&a),
        Command::Groups { action } => groups(&action).map(|s| (0, s)),
    })
}

fn resolve_seed(seed: Option<u64>) -> Result<u64> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| HspError::InvalidInput(format!("{SEED_ENV}={v:?} is not a u64"))),
        Err(_) => Ok(0),
    }
}

/// Splits on commas outside parentheses, so `(0,1),(1,0)` is two tokens.
fn split_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.into_iter().map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn parse_elements(group: &FiniteGroup, s: &str) -> Result<Vec<Element>> {
    split_tokens(s).iter().map(|t| group.parse_element(t)).collect()
}

fn emit(out: &Option<PathBuf>, json: String) -> Result<String> {
    match out {
        Some(path) => {
            std::fs::write(path, &json)
                .map_err(|e| HspError::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(json),
    }
}

fn simulate(a: &SimulateArgs) -> Result<(i32, String)> {
    let start = Instant::now();
    let group = Arc::new(parse_group_string(&a.common.group)?);
    let gens = parse_elements(&group, &a.subgroup_gens)?;
    let h = subgroup_closure(&group, &gens);
    let ordering = match &a.ordering {
        Some(s) => parse_elements(&group, s)?,
        None => group.elements().collect(),
    };
    let scalar: ScalarMode = a.common.scalar.into();
    let config = RunConfig {
        m: a.m.unwrap_or_else(|| default_m(group.order())),
        ordering,
        skip_implied: a.skip_implied,
        scalar_mode: scalar,
        seed: resolve_seed(a.common.seed)?,
        compress: CompressOptions {
            term_cap: a.term_cap,
            rank_reduction: a.rank_reduction,
            ..CompressOptions::default()
        },
        trials: a.trials,
    };
    config.validate(&group)?;
    let (results, csv_rows) = match scalar {
        ScalarMode::Exact => simulate_with::<Rational>(&group, &h, &config, a.mode)?,
        ScalarMode::Float => simulate_with::<f64>(&group, &h, &config, a.mode)?,
    };
    if let (Some(path), Some(rows)) = (&a.csv, csv_rows) {
        write_csv(path, &rows)?;
    }
    let report = ExperimentReport {
        schema: SCHEMA_VERSION,
        command: "simulate",
        config: ResolvedConfig {
            group: a.common.group.clone(),
            group_order: group.order(),
            subgroup_gens: gens.iter().map(|&g| group.name(g).to_string()).collect(),
            h: h.members().to_vec(),
            h_names: h.member_names(),
            m: config.m,
            m_default: default_m(group.order()),
            ordering: config.ordering.clone(),
            scalar: scalar.name().to_string(),
            seed: config.seed,
            rng: RNG_NAME.to_string(),
            mode: match a.mode {
                Mode::Sampled => "sampled",
                Mode::Analysis => "analysis",
            }
            .to_string(),
            trials: if a.mode == Mode::Sampled { config.trials } else { 0 },
            skip_implied: config.skip_implied,
            term_cap: config.compress.term_cap,
            rank_reduction: config.compress.rank_reduction,
        },
        results,
        timing: Timing {
            elapsed_ms: start.elapsed().as_millis(),
        },
    };
    Ok((0, emit(&a.common.out, to_json(&report))?))
}

struct CsvRow {
    trial: usize,
    reps: String,
    x: String,
    matches_h: bool,
    all_correct: bool,
    is_subgroup: bool,
    oracle_calls: u64,
    outcomes: String,
    p_plus: String,
}

fn simulate_with<S: Scalar>(
    group: &Arc<FiniteGroup>,
    h: &Subgroup,
    config: &RunConfig,
    mode: Mode,
) -> Result<(SimulationResults, Option<Vec<CsvRow>>)> {
    let n = group.order();
    let reps: Vec<Element> = {
        let mut rng = analysis_rng(config.seed);
        (0..config.m).map(|_| rng.gen_range(0..n)).collect()
    };
    let trace = run_analysis::<S>(h, config, &reps)?;
    let schedule = test_schedule(group, &config.ordering);
    let (sampled, rows) = if mode == Mode::Sampled {
        let oracle = make_oracle_from_subgroup(h);
        let (summary, results) = run_trials::<S>(&oracle, config, &schedule, Some(h))?;
        (Some(summary), Some(results.iter().enumerate().map(|(i, r)| csv_row(i, r)).collect()))
    } else {
        (None, None)
    };
    let results = SimulationResults {
        oracle_calls_per_trial: config.m,
        classical_queries: n,
        classical_to_quantum_ratio: n as f64 / config.m as f64,
        theorem1_target: 1.0 - 1.0 / n as f64,
        bound_at_m: 1.0 - 2.0 * n as f64 / 2f64.powf(config.m as f64 / 2.0),
        scheduled_tests: schedule.len(),
        analysis: AnalysisSection {
            reps: trace.reps.clone(),
            success_probability: trace.final_success_prob.render(),
            success_probability_f64: trace.final_success_prob.to_f64(),
            steps: trace.steps_json(),
        },
        sampled,
    };
    Ok((results, rows))
}

fn csv_row<S: Scalar>(i: usize, r: &TrialResult<S>) -> CsvRow {
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    CsvRow {
        trial: i,
        reps: join(&r.reps),
        x: join(&r.x),
        matches_h: r.matches_h.unwrap_or(false),
        all_correct: r.all_correct.unwrap_or(false),
        is_subgroup: r.is_subgroup,
        oracle_calls: r.oracle_calls,
        outcomes: r
            .record
            .steps
            .iter()
            .map(|s| format!("{}{:+}", if s.skipped() { "s" } else { "" }, s.outcome.sign()))
            .collect::<Vec<_>>()
            .join(" "),
        p_plus: r
            .record
            .steps
            .iter()
            .map(|s| s.p_plus.as_ref().map_or("-".to_string(), Scalar::render))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn write_csv(path: &PathBuf, rows: &[CsvRow]) -> Result<()> {
    let io = |e: csv::Error| HspError::InvalidInput(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["trial", "reps", "x", "matches_h", "all_correct", "is_subgroup", "oracle_calls", "outcomes", "p_plus"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.reps.clone(),
            r.x.clone(),
            r.matches_h.to_string(),
            r.all_correct.to_string(),
            r.is_subgroup.to_string(),
            r.oracle_calls.to_string(),
            r.outcomes.clone(),
            r.p_plus.clone(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| HspError::InvalidInput(e.to_string()))
}

fn verify(a: &VerifyArgs) -> Result<(i32, String)> {
    let start = Instant::now();
    let seed = resolve_seed(a.common.seed)?;
    let groups: Vec<(String, Arc<FiniteGroup>)> = if a.common.group == "fleet" {
        fleet()
    } else {
        vec![(a.common.group.clone(), Arc::new(parse_group_string(&a.common.group)?))]
    };
    let scalar: ScalarMode = a.common.scalar.into();
    let mut reports: Vec<LemmaReport> = Vec::new();
    let mut m_used = None;
    for (label, group) in &groups {
        if group.order() > ENUMERATION_CAP {
            return Err(HspError::VerificationScaleExceeded {
                order: group.order(),
                cap: ENUMERATION_CAP,
            });
        }
        match a.check {
            Check::Lemma1 => reports.push(check_lemma1(group, label, a.max_m, a.draws, seed)?),
            Check::Lemma2 | Check::Bound => {
                let subgroups = match &a.subgroup_gens {
                    Some(g) => vec![subgroup_closure(group, &parse_elements(group, g)?)],
                    None => enumerate_subgroups(group)?,
                };
                let mut config = RunConfig::for_group(group);
                config.seed = seed;
                if let Some(m) = a.m {
                    config.m = m;
                }
                m_used = a.m;
                let mut merged = LemmaReport::new(if a.check == Check::Bound { "bound" } else { "lemma2" }, label);
                for h in &subgroups {
                    let r = if a.check == Check::Bound {
                        check_success_bound(h, &config, label)?
                    } else {
                        check_lemma2(h, &config, label)?
                    };
                    merged.absorb(r);
                }
                reports.push(merged);
            }
            Check::Dense => {
                let m = a.m.unwrap_or(3);
                m_used = Some(m);
                reports.push(match scalar {
                    ScalarMode::Exact => check_dense::<Rational>(group, label, m, a.trials, seed)?,
                    ScalarMode::Float => check_dense::<f64>(group, label, m, a.trials, seed)?,
                });
            }
        }
    }
    let config = VerifyConfig {
        check: format!("{:?}", a.check).to_lowercase(),
        group: a.common.group.clone(),
        scalar: scalar.name().to_string(),
        seed,
        max_m: (a.check == Check::Lemma1).then_some(a.max_m),
        draws: (a.check == Check::Lemma1).then_some(a.draws),
        m: m_used,
        trials: (a.check == Check::Dense).then_some(a.trials),
    };
    let report = VerifyReport::new(config, reports, start.elapsed().as_millis());
    let code = if report.pass { 0 } else { 1 };
    Ok((code, emit(&a.common.out, to_json(&report))?))
}

#[derive(Serialize)]
struct FamilyDoc {
    spec: &'static str,
    description: &'static str,
}

#[derive(Serialize)]
struct ListDoc {
    schema: u32,
    families: Vec<FamilyDoc>,
    fleet: Vec<&'static str>,
}

#[derive(Serialize)]
struct ScheduledDoc {
    subgroup: Vec<String>,
    generators: Vec<String>,
}

#[derive(Serialize)]
struct ShowDoc {
    schema: u32,
    group: String,
    order: usize,
    abelian: bool,
    elements: Vec<String>,
    subgroups: Option<usize>,
    cyclic_subgroups: usize,
    scheduled_tests: usize,
    schedule: Vec<ScheduledDoc>,
    default_m: usize,
}

fn groups(action: &GroupsAction) -> Result<String> {
    match action {
        GroupsAction::List => Ok(to_json(&ListDoc {
            schema: SCHEMA_VERSION,
            families: NAMED_FAMILIES
                .iter()
                .map(|&(spec, description)| FamilyDoc { spec, description })
                .collect(),
            fleet: crate::verification::FLEET.to_vec(),
        })),
        GroupsAction::Show { group: spec } => {
            let group = Arc::new(parse_group_string(spec)?);
            let names = |v: &[Element]| v.iter().map(|&x| group.name(x).to_string()).collect::<Vec<_>>();
            let subgroups = if group.order() <= ENUMERATION_CAP {
                Some(enumerate_subgroups(&group)?.len())
            } else {
                None
            };
            let ordering: Vec<Element> = group.elements().collect();
            let schedule = test_schedule(&group, &ordering);
            Ok(to_json(&ShowDoc {
                schema: SCHEMA_VERSION,
                group: spec.clone(),
                order: group.order(),
                abelian: group.is_abelian(),
                elements: names(&ordering),
                subgroups,
                cyclic_subgroups: distinct_cyclic_subgroups(&group).len(),
                scheduled_tests: schedule.len(),
                schedule: schedule
                    .iter()
                    .map(|t| ScheduledDoc {
                        subgroup: names(t.subgroup.members()),
                        generators: names(&t.generators),
                    })
                    .collect(),
                default_m: default_m(group.order()),
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_splitting_respects_parentheses() {
        assert_eq!(split_tokens(""), Vec::<String>::new());
        assert_eq!(split_tokens("1, 2"), vec!["1", "2"]);
        assert_eq!(split_tokens("(0,1),(1,0)"), vec!["(0,1)", "(1,0)"]);
        assert_eq!(split_tokens("(012),(01)(23)"), vec!["(012)", "(01)(23)"]);
    }

    #[test]
    fn usage_errors_exit_2() {
        let r = invoke(["hsp", "simulate", "--group", "W:3"]);
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("UnsupportedGroup"));
        let r = invoke(["hsp", "simulate"]);
        assert_eq!(r.code, 2);
        let r = invoke(["hsp", "simulate", "--group", "Z:4", "--subgroup-gens", "nope"]);
        assert_eq!(r.code, 2);
    }

    #[test]
    fn cap_errors_exit_3() {
        let r = invoke(["hsp", "verify", "lemma1", "--group", "S:5"]);
        assert_eq!(r.code, 3);
        assert!(r.stderr.contains("VerificationScaleExceeded"));
        let r = invoke(["hsp", "verify", "dense", "--group", "S:3", "--m", "9"]);
        assert_eq!(r.code, 3);
        let r = invoke([
            "hsp", "simulate", "--group", "D:4", "--mode", "analysis", "--term-cap", "2",
        ]);
        assert_eq!(r.code, 3);
        assert!(r.stderr.contains("TermBudgetExceeded"));
    }
}
