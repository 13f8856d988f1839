use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use ccs_core::analyzer::{
    expected_survivors_approx, expected_survivors_exact, reduction_ratio, reduction_ratio_entering,
    reduction_ratio_last_stage,
};
use ccs_core::sim::{measure_reduction, run_experiment, ExperimentConfig, Mode};
use ccs_core::treecode::{CodeProfile, DEFAULT_PATH_CAP};

use crate::output::{Document, Table};
use crate::{load_config, metadata, CliError, Common};

/// Parity bits per slot of the 75-bit, 11-slot reference allocation.
pub const REFERENCE_PARITY: [usize; 11] = [0, 6, 8, 8, 8, 8, 8, 8, 8, 13, 15];
/// Information bits per slot of the same allocation (15-bit sub-blocks).
pub const REFERENCE_INFO: [usize; 11] = [15, 9, 7, 7, 7, 7, 7, 7, 7, 2, 0];

/// A comma-separated or ranged list of integers given as one argument.
#[derive(Clone, Debug, PartialEq)]
pub struct List(pub Vec<usize>);

fn parse_list(s: &str) -> Result<List, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

fn parse_range(s: &str) -> Result<List, String> {
    range(s).map(List)
}

fn range(s: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<usize> = s
        .split(':')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a] => Ok(vec![a]),
        [a, b] => Ok((a..=b).collect()),
        [a, b, step] if step > 0 => Ok((a..=b).step_by(step).collect()),
        _ => Err(format!("expected start:end[:step], got {s:?}")),
    }
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Active users K
    #[arg(long = "users", short = 'k')]
    k: Option<usize>,
    /// Information bits per slot, comma separated
    #[arg(long, value_parser = parse_list)]
    m: Option<List>,
    /// Parity bits per slot, comma separated, starting with slot 0
    #[arg(long, value_parser = parse_list)]
    l: Option<List>,
    /// Last stage to report (defaults to the last slot)
    #[arg(long)]
    max_stage: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeFile {
    k: Option<usize>,
    m: Option<Vec<usize>>,
    l: Option<Vec<usize>>,
    max_stage: Option<usize>,
}

#[derive(Serialize)]
struct AnalyzeRow {
    stage: usize,
    exact: f64,
    approx: f64,
    ratio: Option<f64>,
}

pub fn analyze(args: &AnalyzeArgs, common: &Common) -> Result<Document, CliError> {
    let file: AnalyzeFile = load_config(common.config.as_deref())?.unwrap_or_default();
    let k = args
        .k
        .or(file.k)
        .ok_or_else(|| CliError::Invalid("K is required (--users or config)".into()))?;
    let l = args
        .l
        .clone()
        .map(|v| v.0)
        .or(file.l)
        .unwrap_or_else(|| REFERENCE_PARITY.to_vec());
    let m = args
        .m
        .clone()
        .map(|v| v.0)
        .or(file.m)
        .unwrap_or_else(|| REFERENCE_INFO.to_vec());
    let profile = CodeProfile::new(k, m.clone(), l.clone())?;
    let max_stage = args
        .max_stage
        .or(file.max_stage)
        .unwrap_or(profile.slots() - 1);
    if max_stage == 0 || max_stage >= profile.slots() {
        return Err(CliError::Invalid(format!(
            "max stage {max_stage} outside 1..={}",
            profile.slots() - 1
        )));
    }
    let rows = (1..=max_stage)
        .map(|stage| {
            let exact = expected_survivors_exact(k, &m, &l, stage)?;
            let approx = expected_survivors_approx(k, &l, stage);
            Ok(AnalyzeRow {
                stage,
                exact,
                approx,
                ratio: (approx != 0.0).then(|| exact / approx),
            })
        })
        .collect::<Result<Vec<_>, ccs_core::Error>>()?;
    let doc = json!({
        "metadata": metadata("analyze", common.seed),
        "parameters": { "k": k, "m": m, "l": l },
        "rows": rows,
    });
    Ok(Document::new(doc, Table::Rows("rows")))
}

#[derive(Args, Debug)]
pub struct ReductionArgs {
    /// User counts as start:end[:step]
    #[arg(long, value_parser = parse_range)]
    k_range: Option<List>,
    /// Parity bits per slot, comma separated, starting with slot 0
    #[arg(long, value_parser = parse_list)]
    l: Option<List>,
    /// Information bits per slot, used by --simulate
    #[arg(long, value_parser = parse_list)]
    m: Option<List>,
    /// Add a column measured from error-free stitching
    #[arg(long)]
    simulate: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReductionFile {
    k_values: Option<Vec<usize>>,
    l: Option<Vec<usize>>,
    m: Option<Vec<usize>>,
    trials: Option<usize>,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct ReductionRow {
    k: usize,
    slot: usize,
    parity_bits: usize,
    ratio: f64,
    ratio_entering: f64,
    ratio_last_stage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulated_stderr: Option<f64>,
}

pub const DEFAULT_REDUCTION_TRIALS: usize = 200;

pub fn reduction_curve(args: &ReductionArgs, common: &Common) -> Result<Document, CliError> {
    let file: ReductionFile = load_config(common.config.as_deref())?.unwrap_or_default();
    let ks = args
        .k_range
        .clone()
        .map(|v| v.0)
        .or(file.k_values)
        .unwrap_or_else(|| (25..=150).step_by(25).collect());
    let l = args
        .l
        .clone()
        .map(|v| v.0)
        .or(file.l)
        .unwrap_or_else(|| REFERENCE_PARITY.to_vec());
    if l.is_empty() {
        return Err(CliError::Invalid("parity profile is empty".into()));
    }
    let trials = common
        .trials
        .or(file.trials)
        .unwrap_or(DEFAULT_REDUCTION_TRIALS);
    let seed = common.seed.or(file.seed).unwrap_or(0);
    let m = args.m.clone().map(|v| v.0).or(file.m);

    let mut rows = Vec::new();
    for &k in &ks {
        let measured = if args.simulate {
            let m = m.clone().unwrap_or_else(|| {
                if l == REFERENCE_PARITY {
                    REFERENCE_INFO.to_vec()
                } else {
                    vec![8; l.len()]
                }
            });
            let cfg = ExperimentConfig {
                profile: CodeProfile::new(k, m, l.clone())?,
                channel: None,
                rows_per_slot: Vec::new(),
                mode: Mode::ErrorFreeLists,
                trials,
                master_seed: seed,
                path_cap: DEFAULT_PATH_CAP,
                distinct_messages: true,
            };
            Some(measure_reduction(&cfg)?)
        } else {
            None
        };
        for (slot, &bits) in l.iter().enumerate() {
            rows.push(ReductionRow {
                k,
                slot,
                parity_bits: bits,
                ratio: reduction_ratio(k, &l, slot),
                ratio_entering: reduction_ratio_entering(k, &l, slot),
                ratio_last_stage: reduction_ratio_last_stage(k, &l, slot),
                simulated: measured.as_ref().map(|r| r[slot].mean),
                simulated_stderr: measured.as_ref().map(|r| r[slot].stderr),
            });
        }
    }
    let mut meta = metadata("reduction-curve", args.simulate.then_some(seed));
    if args.simulate {
        meta["trials"] = json!(trials);
    }
    let doc = json!({ "metadata": meta, "rows": rows });
    Ok(Document::new(doc, Table::Rows("rows")))
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Decoding mode, overriding the config file
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum ModeArg {
    Standard,
    Enhanced,
    ErrorFreeLists,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Standard => Mode::Standard,
            ModeArg::Enhanced => Mode::Enhanced,
            ModeArg::ErrorFreeLists => Mode::ErrorFreeLists,
        }
    }
}

/// Returns the report and, for runs with more than half the trials blown up,
/// a message for the degraded exit.
pub fn simulate(
    args: &SimulateArgs,
    common: &Common,
) -> Result<(Document, Option<String>), CliError> {
    let mut cfg: ExperimentConfig = load_config(common.config.as_deref())?
        .ok_or_else(|| CliError::Invalid("simulate needs --config".into()))?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode.into();
    }
    let report = run_experiment(&cfg)?;
    let degraded = (report.blowup_fraction() > 0.5).then(|| {
        format!(
            "{} of {} trials exceeded the path cap of {}",
            report.blowups, report.metadata.trials, cfg.path_cap
        )
    });
    let doc = serde_json::to_value(&report).map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok((Document::new(doc, Table::PerSlot), degraded))
}
