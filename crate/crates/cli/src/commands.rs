use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use avalanche_core::combinatorics::{
    forest_identity_lhs, identity_lhs, identity_rhs, induction_step_check, ordered_forest_sum,
    profile_weight,
};
use avalanche_core::distributions::{
    abelian_pmf, avalanche_pmf, conditional_pmf, limit_pmf, powerlaw_slope, tail_log_ratio,
    AvalancheParams, LimitParams,
};
use avalanche_core::exact::{parse_rational, to_f64, ExactRational};
use avalanche_core::stats::{chi_square_gof, DEFAULT_MIN_EXPECTED};
use avalanche_core::tower::{
    exact_pmf_for, make_tower_system, simulate_tower, tower_pmf_bruteforce, CoordinateTower,
    TowerSystem,
};
use avalanche_core::trees::tree_census;
use avalanche_core::urn::{simulate_urns, urn_pmf_bruteforce, urn_pmf_formula, UrnConfig};
use avalanche_core::{Pmf, SimResult};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use crate::output::Report;
use crate::GlobalArgs;

/// Inconsistent or missing flags.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_exact(text: &str) -> std::result::Result<ExactRational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

/// Accepts `num/den` or a decimal.
fn parse_alpha(text: &str) -> std::result::Result<f64, String> {
    if text.contains('/') {
        parse_rational(text)
            .map(|r| to_f64(&r))
            .map_err(|e| e.to_string())
    } else {
        text.parse::<f64>()
            .map_err(|e| format!("bad alpha `{text}`: {e}"))
    }
}

fn parse_u64_list(text: &str, want: usize, what: &str) -> std::result::Result<Vec<u64>, String> {
    let parts: Vec<u64> = text
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("bad {what} `{text}`: {e}"))?;
    if parts.len() != want {
        return Err(format!(
            "{what} needs {want} comma-separated integers, got `{text}`"
        ));
    }
    Ok(parts)
}

fn parse_coord(text: &str) -> std::result::Result<CoordinateTower, String> {
    let v = parse_u64_list(text, 3, "coordinate L,w,height")?;
    Ok(CoordinateTower::new(v[0], v[1], v[2]))
}

fn parse_uniform(text: &str) -> std::result::Result<(CoordinateTower, u64), String> {
    let v = parse_u64_list(text, 4, "uniform L,w,height,N")?;
    Ok((CoordinateTower::new(v[0], v[1], v[2]), v[3]))
}

fn parse_window(text: &str) -> std::result::Result<(u64, u64), String> {
    let v = parse_u64_list(text, 2, "fit window aMin,aMax")?;
    Ok((v[0], v[1]))
}

fn read_json(path: &PathBuf) -> Result<Value> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn kv_csv(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("field,value\n");
    for (k, v) in pairs {
        writeln!(out, "{k},{v}").expect("writing to a String");
    }
    out
}

// ---------------------------------------------------------------- identity

#[derive(Args, Debug)]
pub struct IdentityArgs {
    #[arg(long)]
    pub n: u64,
    /// Also check the induction invariant at stage s.
    #[arg(long)]
    pub s: Option<u64>,
    /// Check the rooted-forest form (with the 1/r! block correction).
    #[arg(long)]
    pub forest: bool,
}

pub fn identity(args: &IdentityArgs) -> Result<Report> {
    let n = args.n;
    let rhs = identity_rhs(n)?;
    let lhs = if args.forest {
        forest_identity_lhs(n)?
    } else {
        identity_lhs(n)?
    };
    let mut passed = lhs == rhs;
    let mut doc = json!({
        "n": n,
        "lhs": lhs.to_string(),
        "rhs": rhs.to_string(),
        "equal": lhs == rhs,
    });
    let mut rows = vec![
        ("n", n.to_string()),
        ("lhs", lhs.to_string()),
        ("rhs", rhs.to_string()),
        ("equal", (lhs == rhs).to_string()),
    ];
    if args.forest {
        let ordered = ordered_forest_sum(n)?;
        doc["forest"] = json!(true);
        doc["uncorrected_ordered_sum"] = json!(ordered.to_string());
        rows.push(("uncorrected_ordered_sum", ordered.to_string()));
    }
    if let Some(s) = args.s {
        let step = induction_step_check(n, s)?;
        let ok = step.total() == rhs;
        passed &= ok;
        doc["s"] = json!(s);
        doc["partial"] = json!(step.partial.to_string());
        doc["remainder"] = json!(step.remainder.to_string());
        doc["induction_equal"] = json!(ok);
        rows.push(("s", s.to_string()));
        rows.push(("partial", step.partial.to_string()));
        rows.push(("remainder", step.remainder.to_string()));
        rows.push(("induction_equal", ok.to_string()));
    }
    let mut report = Report::new(doc, kv_csv(&rows));
    report.passed = passed;
    Ok(report)
}

// ------------------------------------------------------------------- trees

#[derive(Args, Debug)]
pub struct TreesArgs {
    #[arg(long)]
    pub n: u64,
}

pub fn trees(args: &TreesArgs, global: &GlobalArgs) -> Result<Report> {
    let census = tree_census(args.n, &global.limits())?;
    let rhs = identity_rhs(args.n)?;
    let consistent = census.total_rooted_trees == rhs
        && census
            .profile_counts
            .iter()
            .all(|(c, k)| *k == profile_weight(c));
    let mut doc = census.to_json();
    doc["matches_identity"] = json!(consistent);
    let mut csv = String::from("parts,count\n");
    for (c, k) in &census.profile_counts {
        let parts: Vec<String> = c.parts().iter().map(u64::to_string).collect();
        writeln!(csv, "{},{k}", parts.join("-")).expect("writing to a String");
    }
    let mut report = Report::new(doc, csv);
    report.passed = consistent;
    Ok(report)
}

// --------------------------------------------------------------------- pmf

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfModel {
    Avalanche,
    Abelian,
    Conditional,
    Limit,
}

#[derive(Args, Debug)]
pub struct PmfArgs {
    #[arg(long, value_enum)]
    pub model: PmfModel,
    /// Number of coordinates.
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Excitation probability as num/den.
    #[arg(long, value_parser = parse_exact)]
    pub p: Option<ExactRational>,
    /// Criticality parameter of the limit law, in [0, 1].
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    /// Truncation point of the limit law.
    #[arg(long, default_value_t = 100)]
    pub amax: u64,
}

fn pmf_report(pmf: &Pmf, digits: usize) -> Report {
    Report::new(pmf.to_json(), pmf.to_csv(digits))
}

pub fn build_pmf(args: &PmfArgs) -> Result<Pmf> {
    if args.model == PmfModel::Limit {
        let alpha = args
            .alpha
            .ok_or_else(|| usage("--model limit needs --alpha"))?;
        return Ok(limit_pmf(&LimitParams::new(alpha, args.amax)?));
    }
    let n = args.n.ok_or_else(|| usage("exact models need --N"))?;
    let p = args
        .p
        .clone()
        .ok_or_else(|| usage("exact models need --p num/den"))?;
    let params = AvalancheParams::new(n, p)?;
    Ok(match args.model {
        PmfModel::Avalanche => avalanche_pmf(&params),
        PmfModel::Abelian => abelian_pmf(&params),
        PmfModel::Conditional => conditional_pmf(&params),
        PmfModel::Limit => unreachable!(),
    })
}

pub fn pmf(args: &PmfArgs, global: &GlobalArgs) -> Result<Report> {
    let pmf = build_pmf(args)?;
    Ok(pmf_report(&pmf, global.precision))
}

// ---------------------------------------------------------------- simulate

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimModelArg {
    Urn,
    Tower,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: SimModelArg,
    /// Urn model: number of balls.
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Urn model: number of urns.
    #[arg(long = "M")]
    pub m: Option<u64>,
    /// Tower model: one coordinate as L,w,height (repeatable).
    #[arg(long = "coord", value_parser = parse_coord)]
    pub coords: Vec<CoordinateTower>,
    /// Tower model: N identical coordinates as L,w,height,N.
    #[arg(long, value_parser = parse_uniform, conflicts_with = "coords")]
    pub uniform: Option<(CoordinateTower, u64)>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub shards: u32,
    /// Also enumerate the model exhaustively and check it against the closed form.
    #[arg(long)]
    pub exact_oracle: bool,
    /// Add a goodness-of-fit report against the model's exact law.
    #[arg(long)]
    pub compare: bool,
    /// Merge threshold for chi-square bins.
    #[arg(long, default_value_t = DEFAULT_MIN_EXPECTED)]
    pub min_expected: f64,
}

enum Model {
    Urn(UrnConfig),
    Tower(TowerSystem),
}

fn build_model(args: &SimulateArgs) -> Result<Model> {
    match args.model {
        SimModelArg::Urn => {
            let n = args.n.ok_or_else(|| usage("--model urn needs --N"))?;
            let m = args.m.ok_or_else(|| usage("--model urn needs --M"))?;
            Ok(Model::Urn(UrnConfig::new(n, m)?))
        }
        SimModelArg::Tower => {
            let sys = match (&args.uniform, args.coords.is_empty()) {
                (Some((t, n)), true) => TowerSystem::uniform(*t, *n as usize)?,
                (None, false) => make_tower_system(&args.coords)?,
                _ => {
                    return Err(usage(
                        "--model tower needs --uniform or one or more --coord",
                    ))
                }
            };
            Ok(Model::Tower(sys))
        }
    }
}

pub fn simulate(args: &SimulateArgs, global: &GlobalArgs) -> Result<Report> {
    if args.trials < 1 || args.shards < 1 {
        return Err(usage("--trials and --shards must be at least 1"));
    }
    let limits = global.limits();
    let model = build_model(args)?;
    let res: SimResult = match &model {
        Model::Urn(cfg) => simulate_urns(cfg, args.trials, args.seed, args.shards)?,
        Model::Tower(sys) => simulate_tower(sys, args.trials, args.seed, args.shards)?,
    };
    let mut doc = res.to_json();
    let mut side = serde_json::Map::new();
    let mut passed = true;

    if args.exact_oracle {
        let (brute, formula) = match &model {
            Model::Urn(cfg) => (urn_pmf_bruteforce(cfg, &limits)?, urn_pmf_formula(cfg)?),
            Model::Tower(sys) => (
                tower_pmf_bruteforce(sys, &limits)?,
                exact_pmf_for(sys, &limits)?,
            ),
        };
        let equal = brute.exact_probs() == formula.exact_probs();
        passed &= equal;
        let oracle = json!({
            "equal": equal,
            "bruteforce": brute.to_json(),
            "formula": formula.to_json(),
        });
        doc["oracle"] = oracle.clone();
        side.insert("oracle".into(), oracle);
    }
    if args.compare {
        let expected = match &model {
            Model::Urn(cfg) => urn_pmf_formula(cfg)?,
            Model::Tower(sys) => exact_pmf_for(sys, &limits)?,
        };
        let report = chi_square_gof(&res, &expected, args.min_expected)?;
        let gof = serde_json::to_value(&report)?;
        doc["gof"] = gof.clone();
        side.insert("gof".into(), gof);
    }
    let mut report = Report::new(doc, res.to_csv());
    if !side.is_empty() {
        report.csv_side = Some(Value::Object(side));
    }
    report.passed = passed;
    Ok(report)
}

// -------------------------------------------------------------------- tail

#[derive(Args, Debug)]
pub struct TailArgs {
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Truncation point of the limit law; the fit window must lie below it.
    #[arg(long, default_value_t = 600)]
    pub amax: u64,
    #[arg(long, value_parser = parse_window, default_value = "50,500")]
    pub fit_window: (u64, u64),
}

pub fn tail(args: &TailArgs) -> Result<Report> {
    let params = LimitParams::new(args.alpha, args.amax)?;
    let pmf = limit_pmf(&params);
    let (lo, hi) = args.fit_window;
    let mut rows = Vec::new();
    let mut csv = String::from("a,log_ratio,a_log_ratio\n");
    for a in 1..args.amax {
        if pmf.get_f64(a) <= 0.0 || pmf.get_f64(a + 1) <= 0.0 {
            break;
        }
        let ratio = tail_log_ratio(&pmf, a)?;
        writeln!(csv, "{a},{ratio},{}", a as f64 * ratio).expect("writing to a String");
        rows.push(json!({"a": a, "log_ratio": ratio, "a_log_ratio": a as f64 * ratio}));
    }
    if rows.is_empty() {
        // Surfaces the underlying domain error (e.g. a point mass at 0).
        tail_log_ratio(&pmf, 0)?;
        tail_log_ratio(&pmf, 1)?;
    }
    let slope = powerlaw_slope(&pmf, lo, hi)?;
    let doc = json!({
        "alpha": args.alpha,
        "amax": args.amax,
        "deficit": pmf.deficit(),
        "fit_window": [lo, hi],
        "slope": slope,
        "rows": rows,
    });
    let mut report = Report::new(doc, csv);
    report.csv_side = Some(json!({"fit_window": [lo, hi], "slope": slope}));
    Ok(report)
}

// ----------------------------------------------------------------- compare

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Simulation JSON written by `simulate`.
    #[arg(long)]
    pub sim: PathBuf,
    /// PMF JSON written by `pmf`.
    #[arg(long)]
    pub pmf: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_EXPECTED)]
    pub min_expected: f64,
}

pub fn compare(args: &CompareArgs) -> Result<Report> {
    let res = SimResult::from_json(&read_json(&args.sim)?)?;
    let expected = Pmf::from_json(&read_json(&args.pmf)?)?;
    let report = chi_square_gof(&res, &expected, args.min_expected)?;
    let csv = format!(
        "tv,chi2,dof,p,trials\n{},{},{},{},{}\n",
        report.tv_distance, report.chi_square, report.dof, report.approx_p_value, report.trials
    );
    Ok(Report::new(serde_json::to_value(&report)?, csv))
}
