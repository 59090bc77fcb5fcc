//! The `delegation-lab` command line.
//!
//! Exit status is 0 on success, 2 for invalid input or usage, 3 when a
//! desk-scale cap would be exceeded.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::One;

use crate::benchmark::best_nonadaptive_set;
use crate::builtin;
use crate::caps::Caps;
use crate::delegation::{
    compose_outer, evaluate_policy, is_symmetric_policy, policy_from_greedy, threshold_policy, Policy,
    PolicyEvaluation, TieBreakMode,
};
use crate::error::{Error, Result};
use crate::gen::{self, OuterShape, Shape};
use crate::instance::Instance;
use crate::lottery::{evaluate_lottery_menu, search_two_lottery_menus, table1_menu};
use crate::oracle::exact_delegation_gap;
use crate::prophet::{best_greedy_family, evaluate_vs_almighty, samuel_cahn_threshold, GreedyFamily, ProphetReport};
use crate::rational::{self, rat, Rational};
use crate::report::Report;
use crate::schema;

#[derive(Debug, Parser)]
#[command(name = "delegation-lab", version, about = "Exact experiments on delegated stochastic probing")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Instance JSON file.
    #[arg(long, global = true, conflicts_with = "builtin")]
    pub instance: Option<PathBuf>,

    /// Built-in instance: table1, table2 or coins2.
    #[arg(long, global = true)]
    pub builtin: Option<String>,

    /// Parameter of the table instances, e.g. 1/4.
    #[arg(long, global = true)]
    pub epsilon: Option<String>,

    /// adversarial, principal-favoring or lexicographic.
    #[arg(long, global = true)]
    pub tie_break: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,

    /// Step of the lottery grid search, e.g. 1/100.
    #[arg(long, global = true)]
    pub grid: Option<String>,

    /// Cap overrides such as `scenarios=5000,policy_candidates=12`; applied
    /// on top of DELEGATION_LAB_CAPS.
    #[arg(long, global = true)]
    pub caps: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best deterministic policy by exhaustive enumeration.
    Gap,
    /// Evaluate a policy or a lottery menu file.
    EvalPolicy(EvalArgs),
    /// Construct a policy and evaluate it.
    BuildPolicy(BuildArgs),
    /// Greedy gambler against the almighty adversary.
    ProphetCheck(ProphetArgs),
    /// Best fixed probe set against adaptive probing.
    Adaptivity,
    /// Rerun a stored experiment.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EvalArgs {
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long)]
    pub menu: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    /// Median-rule threshold.
    Threshold,
    /// Best greedy family found by search.
    FromGreedy,
    /// Best fixed probe set, then the threshold policy on it.
    Composed,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(value_enum)]
    pub construction: Construction,
    /// Also write the policy JSON here.
    #[arg(long)]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProphetArgs {
    /// Search all greedy families instead of using the median rule.
    #[arg(long)]
    pub search: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Lotteries beat deterministic policies on the first table instance.
    PropLotteryPositive,
    /// Lotteries do not help on the second table instance.
    PropLotteryNegative,
    /// Threshold policies keep half on random instances.
    CorHalf,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Random instances for cor-half.
    #[arg(long, default_value_t = 200)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Process exit status and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Capacity { .. } => 3,
        _ => 2,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                RunOutput { code, stdout: text, stderr: String::new() }
            } else {
                RunOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let start = Instant::now();
    match execute(&config) {
        Ok(report) => {
            let stdout = match config.output {
                OutputFormat::Text => Ok(report.to_text()),
                OutputFormat::Json => report.to_json(),
                OutputFormat::Csv => Ok(report.to_csv(start.elapsed().as_millis())),
            };
            match stdout {
                Ok(stdout) => RunOutput { code: 0, stdout, stderr: String::new() },
                Err(e) => RunOutput { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
            }
        }
        Err(e) => RunOutput { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

struct Context {
    caps: Caps,
    epsilon: Option<Rational>,
    tie_break: Option<TieBreakMode>,
}

impl Context {
    fn mode(&self) -> TieBreakMode {
        self.tie_break.unwrap_or_default()
    }
}

fn parse_epsilon(s: &str) -> Result<Rational> {
    let eps = rational::parse(s)?;
    if eps <= Rational::from_integer(0.into()) || eps >= Rational::one() {
        return Err(Error::input(format!("epsilon {s} must lie in (0, 1)")));
    }
    Ok(eps)
}

fn load(config: &RunConfig, ctx: &Context) -> Result<(Instance, String)> {
    match (&config.instance, &config.builtin) {
        (Some(path), _) => Ok((schema::load_instance(path)?, path.display().to_string())),
        (None, Some(name)) => Ok((builtin::by_name(name, ctx.epsilon.as_ref())?, name.clone())),
        (None, None) => Err(Error::input("give --instance FILE or --builtin NAME")),
    }
}

pub fn execute(config: &RunConfig) -> Result<Report> {
    let mut caps = Caps::from_env()?;
    if let Some(spec) = &config.caps {
        caps = caps.with_overrides(spec)?;
    }
    let ctx = Context {
        caps,
        epsilon: config.epsilon.as_deref().map(parse_epsilon).transpose()?,
        tie_break: config.tie_break.as_deref().map(str::parse).transpose()?,
    };
    match &config.command {
        Command::Gap => gap(config, &ctx),
        Command::EvalPolicy(args) => eval_policy(config, &ctx, args),
        Command::BuildPolicy(args) => build_policy(config, &ctx, args),
        Command::ProphetCheck(args) => prophet_check(config, &ctx, args),
        Command::Adaptivity => adaptivity(config, &ctx),
        Command::Reproduce(args) => reproduce(config, &ctx, args),
    }
}

fn header(name: &str, label: &str, ctx: &Context, mode: Option<TieBreakMode>) -> Report {
    Report::new(name, label, ctx.epsilon.as_ref(), mode.map(|m| m.as_str()).unwrap_or("-"))
}

fn describe_set(instance: &Instance, set: crate::ElementSet) -> String {
    let ids: Vec<&str> = set.iter().map(|e| instance.id(e)).collect();
    format!("{{{}}}", ids.join(", "))
}

fn add_evaluation(report: &mut Report, instance: &Instance, ev: &PolicyEvaluation) {
    report
        .number("principal_value", &ev.principal_value)
        .number("agent_value", &ev.agent_value)
        .number("non_delegated_value", &ev.non_delegated_value)
        .number("alpha", &ev.alpha);
    for (set, p) in &ev.probe_distribution {
        report.number(format!("probes {}", describe_set(instance, *set)), p);
    }
}

fn gap(config: &RunConfig, ctx: &Context) -> Result<Report> {
    let (instance, label) = load(config, ctx)?;
    let mode = ctx.mode();
    let gap = exact_delegation_gap(&instance, mode, &ctx.caps)?;
    let mut report = header("gap", &label, ctx, Some(mode));
    report
        .row("", Some(&gap.best_value), Some(&gap.alpha_star))
        .number("alpha_star", &gap.alpha_star)
        .number("best_value", &gap.best_value)
        .number("non_delegated_value", &gap.non_delegated_value)
        .text("policies_enumerated", gap.policies_enumerated.to_string())
        .text("best_policy", schema::policy_to_compact_json(&instance, &gap.best_policy, &ctx.caps)?);
    Ok(report)
}

fn eval_policy(config: &RunConfig, ctx: &Context, args: &EvalArgs) -> Result<Report> {
    let (instance, label) = load(config, ctx)?;
    let mode = ctx.mode();
    let mut report = header("eval-policy", &label, ctx, Some(mode));
    let ev = if let Some(path) = &args.policy {
        let policy = schema::parse_policy(&instance, &std::fs::read_to_string(path)?)?;
        let ev = evaluate_policy(&instance, &policy, mode, &ctx.caps)?;
        report.text("symmetric", is_symmetric_policy(&instance, &policy, &ctx.caps)?.to_string());
        ev
    } else {
        let path = args.menu.as_ref().expect("clap requires --policy or --menu");
        let menu = schema::parse_menu(&instance, &std::fs::read_to_string(path)?)?;
        evaluate_lottery_menu(&instance, &menu, mode, &ctx.caps)?
    };
    report.row("", Some(&ev.principal_value), Some(&ev.alpha));
    add_evaluation(&mut report, &instance, &ev);
    Ok(report)
}

fn build_policy(config: &RunConfig, ctx: &Context, args: &BuildArgs) -> Result<Report> {
    let (instance, label) = load(config, ctx)?;
    let mode = ctx.mode();
    let (policy, note) = match args.construction {
        Construction::Threshold => {
            let tau = samuel_cahn_threshold(&instance)?;
            (Policy::XThreshold { tau: tau.clone() }, format!("tau = {}", rational::display(&tau)))
        }
        Construction::FromGreedy => {
            let (family, prophet) = best_greedy_family(&instance, &ctx.caps)?;
            (policy_from_greedy(family), format!("greedy ratio = {}", rational::display(&prophet.ratio)))
        }
        Construction::Composed => {
            let (policy, f) = compose_outer(&instance, threshold_policy, &ctx.caps)?;
            (policy, format!("probe set = {}", describe_set(&instance, f)))
        }
    };
    let json = schema::policy_to_json(&instance, &policy, &ctx.caps)?;
    if let Some(path) = &args.save {
        std::fs::write(path, format!("{json}\n"))?;
    }
    let ev = evaluate_policy(&instance, &policy, mode, &ctx.caps)?;
    let name = match args.construction {
        Construction::Threshold => "threshold",
        Construction::FromGreedy => "from-greedy",
        Construction::Composed => "composed",
    };
    let mut report = header(&format!("build-policy {name}"), &label, ctx, Some(mode));
    report.row("", Some(&ev.principal_value), Some(&ev.alpha)).text("construction", note);
    add_evaluation(&mut report, &instance, &ev);
    report.text("policy", schema::policy_to_compact_json(&instance, &policy, &ctx.caps)?);
    Ok(report)
}

fn add_prophet(report: &mut Report, instance: &Instance, prophet: &ProphetReport) {
    report
        .number("gambler_value", &prophet.gambler_value)
        .number("prophet_value", &prophet.prophet_value)
        .number("ratio", &prophet.ratio);
    for t in &prophet.scenarios {
        let realized: Vec<String> = t
            .realization
            .atoms()
            .iter()
            .enumerate()
            .map(|(e, &a)| format!("{}={}", instance.id(e), instance.atoms(e)[a].x))
            .collect();
        let order: Vec<&str> = t.worst_order.iter().map(|&e| instance.id(e)).collect();
        report.text(
            format!("scenario [{}]", realized.join(" ")),
            format!(
                "p {}, prophet {}, gambler {}, worst order {}",
                rational::exact(&t.probability),
                rational::exact(&t.prophet),
                rational::exact(&t.gambler),
                order.join(" ")
            ),
        );
    }
}

fn prophet_check(config: &RunConfig, ctx: &Context, args: &ProphetArgs) -> Result<Report> {
    let (instance, label) = load(config, ctx)?;
    let mut report = header("prophet-check", &label, ctx, None);
    let (family, prophet) = if args.search {
        best_greedy_family(&instance, &ctx.caps)?
    } else {
        let tau = samuel_cahn_threshold(&instance)?;
        report.number("tau", &tau);
        let family = GreedyFamily::threshold(&instance, &tau);
        let prophet = evaluate_vs_almighty(&instance, &family, &ctx.caps)?;
        (family, prophet)
    };
    report.row("", Some(&prophet.gambler_value), Some(&prophet.ratio));
    report.text("family_maximal_sets", family.maximal_sets().len().to_string());
    add_prophet(&mut report, &instance, &prophet);
    Ok(report)
}

fn adaptivity(config: &RunConfig, ctx: &Context) -> Result<Report> {
    let (instance, label) = load(config, ctx)?;
    let best = best_nonadaptive_set(&instance, &ctx.caps)?;
    let mut report = header("adaptivity", &label, ctx, None);
    report
        .row("", Some(&best.expected_value), Some(&best.ratio_to_adaptive))
        .text("best_set", describe_set(&instance, best.best_set))
        .number("nonadaptive_value", &best.expected_value)
        .number("adaptive_value", &best.adaptive_value)
        .number("ratio_to_adaptive", &best.ratio_to_adaptive)
        .text("sets_considered", best.sets_considered.to_string());
    Ok(report)
}

fn grid_step(config: &RunConfig) -> Result<Rational> {
    config.grid.as_deref().map(rational::parse).transpose().map(|g| g.unwrap_or_else(|| rat(1, 100)))
}

fn reproduce(config: &RunConfig, ctx: &Context, args: &ReproduceArgs) -> Result<Report> {
    let eps = ctx.epsilon.clone().unwrap_or_else(|| rat(1, 4));
    match args.experiment {
        Experiment::PropLotteryPositive => {
            if eps >= rat(1, 2) {
                return Err(Error::input("the stated menu needs epsilon < 1/2"));
            }
            let mode = ctx.mode();
            let instance = builtin::table1(&eps)?;
            let gap = exact_delegation_gap(&instance, mode, &ctx.caps)?;
            let lottery = evaluate_lottery_menu(&instance, &table1_menu(&instance, &eps)?, mode, &ctx.caps)?;
            let mut report = Report::new("reproduce prop-lottery-positive", "table1", Some(&eps), mode.as_str());
            report
                .row("deterministic", Some(&gap.best_value), Some(&gap.alpha_star))
                .row("lottery", Some(&lottery.principal_value), Some(&lottery.alpha))
                .number("non_delegated_value", &gap.non_delegated_value)
                .number("deterministic_alpha", &gap.alpha_star)
                .number("lottery_value", &lottery.principal_value)
                .number("lottery_alpha", &lottery.alpha)
                .number("alpha_improvement", &(&lottery.alpha - &gap.alpha_star));
            Ok(report)
        }
        Experiment::PropLotteryNegative => {
            let mode = ctx.tie_break.unwrap_or(TieBreakMode::PrincipalFavoring);
            let instance = builtin::table2(&eps)?;
            let step = grid_step(config)?;
            let gap = exact_delegation_gap(&instance, mode, &ctx.caps)?;
            let (menu, best) = search_two_lottery_menus(&instance, &step, mode, &ctx.caps)?;
            let mut report = Report::new("reproduce prop-lottery-negative", "table2", Some(&eps), mode.as_str());
            report
                .row("deterministic", Some(&gap.best_value), Some(&gap.alpha_star))
                .row("lottery", Some(&best.principal_value), Some(&best.alpha))
                .number("non_delegated_value", &gap.non_delegated_value)
                .number("grid_step", &step)
                .text("best_menu", schema::menu_to_compact_json(&instance, &menu)?);
            Ok(report)
        }
        Experiment::CorHalf => {
            let mode = ctx.mode();
            let shape = Shape::desk(OuterShape::Free);
            let mut rng = gen::rng(args.seed);
            let mut worst: Option<Rational> = None;
            let mut violations = 0u64;
            for _ in 0..args.count {
                let instance = gen::random_instance(&mut rng, &shape);
                let ev = evaluate_policy(&instance, &threshold_policy(&instance)?, mode, &ctx.caps)?;
                if ev.alpha < rat(1, 2) {
                    violations += 1;
                }
                if worst.as_ref().is_none_or(|w| ev.alpha < *w) {
                    worst = Some(ev.alpha);
                }
            }
            let mut report = Report::new("reproduce cor-half", format!("random seed {}", args.seed), None, mode.as_str());
            report.row("min-alpha", None, worst.as_ref());
            if let Some(w) = &worst {
                report.number("min_alpha", w);
            }
            report
                .text("instances", args.count.to_string())
                .text("violations", violations.to_string());
            Ok(report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> String {
        let out = run(std::iter::once("delegation-lab").chain(args.iter().copied()));
        assert_eq!(out.code, 0, "stderr: {}", out.stderr);
        out.stdout
    }

    #[test]
    fn gap_on_table2() {
        let out = run_ok(&["gap", "--builtin", "table2", "--epsilon", "1/2", "--tie-break", "principal-favoring"]);
        assert!(out.contains("alpha 2/3 (≈ 0.666667)"), "{out}");
    }

    #[test]
    fn exit_codes() {
        let bad = run(["delegation-lab", "gap", "--builtin", "table9"]);
        assert_eq!(bad.code, 2);
        let missing = run(["delegation-lab", "gap", "--builtin", "table1"]);
        assert_eq!(missing.code, 2);
        let capped = run(["delegation-lab", "gap", "--builtin", "table1", "--epsilon", "1/4", "--caps", "policy_candidates=2"]);
        assert_eq!(capped.code, 3);
        assert!(capped.stderr.contains("capacity"));
        let usage = run(["delegation-lab", "frobnicate"]);
        assert_eq!(usage.code, 2);
        assert_eq!(run(["delegation-lab", "--help"]).code, 0);
    }
}
