//! Seeded end-to-end Monte Carlo experiments.
//!
//! Every trial draws its own parity generator, messages and channel noise from
//! streams keyed by `(master_seed, "trial", t, ...)`. The sensing matrices are
//! shared by all trials of an experiment. Standard and enhanced runs of the same
//! configuration therefore see identical messages, generators and noise.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitBlock;
use crate::seed::SeedPath;
use crate::slotcs::{
    recover_support, transmit_slot, ChannelParams, SensingMatrix, MAX_MATERIALIZED_WIDTH,
};
use crate::treecode::{
    encode, prune_column_index_set, CodeProfile, Codeword, DecodeMode, DecodeOutcome,
    ParityGenerator, SlotList, TreeDecoder, DEFAULT_PATH_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Recover every slot over the full sensing matrix, then stitch.
    Standard,
    /// Stitch in tandem with recovery and prune each slot's columns to the
    /// admissible parity patterns.
    Enhanced,
    /// Bypass the channel and hand the true slot lists to the stitcher.
    ErrorFreeLists,
}

fn default_path_cap() -> usize {
    DEFAULT_PATH_CAP
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub profile: CodeProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParams>,
    #[serde(default)]
    pub rows_per_slot: Vec<usize>,
    pub mode: Mode,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_path_cap")]
    pub path_cap: usize,
    /// Draw the `K` messages of a trial without replacement.
    #[serde(default = "default_true")]
    pub distinct_messages: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.profile;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if p.active() == 0 {
            return Err(Error::InvalidConfig(
                "at least one active message is required".into(),
            ));
        }
        if self.distinct_messages
            && p.message_bits() < 64
            && (p.active() as u64) > 1u64 << p.message_bits()
        {
            return Err(Error::InvalidConfig(format!(
                "{} distinct messages do not exist with B = {}",
                p.active(),
                p.message_bits()
            )));
        }
        if let Some(j) = (0..p.slots()).find(|&j| p.width(j) > 63) {
            return Err(Error::InvalidConfig(format!(
                "slot {j} is wider than 63 bits"
            )));
        }
        if self.mode == Mode::ErrorFreeLists {
            return Ok(());
        }
        let ch = self.channel.ok_or_else(|| {
            Error::InvalidConfig("channel parameters are required for this mode".into())
        })?;
        ch.validate()?;
        if self.rows_per_slot.len() != p.slots() {
            return Err(Error::InvalidConfig(format!(
                "rows_per_slot has {} entries for {} slots",
                self.rows_per_slot.len(),
                p.slots()
            )));
        }
        if let Some(j) = (0..p.slots()).find(|&j| self.rows_per_slot[j] == 0) {
            return Err(Error::InvalidConfig(format!(
                "slot {j} has no channel uses"
            )));
        }
        if let Some(j) = (0..p.slots()).find(|&j| p.width(j) > MAX_MATERIALIZED_WIDTH) {
            return Err(Error::GuardExceeded {
                what: "slot width for channel simulation",
                value: p.width(j),
                limit: MAX_MATERIALIZED_WIDTH,
            });
        }
        Ok(())
    }

    /// Total channel uses `Σ n_j`.
    pub fn channel_uses(&self) -> usize {
        self.rows_per_slot.iter().sum()
    }
}

/// Raw result of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    /// Transmitted messages absent from the output list.
    pub missing: usize,
    /// Live partial paths after each stage.
    pub survivors_per_stage: Vec<usize>,
    /// Candidate columns searched in each slot.
    pub columns_searched: Vec<u64>,
    /// Columns searched over the full width of each slot.
    pub reduction: Vec<f64>,
    /// Transmitted sub-blocks whose column was pruned away.
    pub pruned_true_columns: usize,
    pub blown_up: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStderr {
    pub fn of(samples: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = samples.into_iter().collect();
        let n = v.len() as f64;
        if v.is_empty() {
            return MeanStderr {
                mean: 0.0,
                stderr: 0.0,
            };
        }
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MeanStderr {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub master_seed: u64,
    pub version: String,
    pub mode: Mode,
    pub trials: usize,
    pub active_messages: usize,
    pub message_bits: usize,
    pub slots: usize,
    pub channel_uses: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eb_n0_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub metadata: ReportMetadata,
    /// Per-user error probability with binomial standard error over trials x K.
    pub pupe: MeanStderr,
    pub survivors_per_stage: Vec<MeanStderr>,
    pub measured_reduction_per_slot: Vec<MeanStderr>,
    pub columns_searched_per_slot: Vec<MeanStderr>,
    pub pruned_true_columns: usize,
    pub blowups: usize,
}

impl TrialReport {
    pub fn blowup_fraction(&self) -> f64 {
        self.blowups as f64 / self.metadata.trials as f64
    }
}

/// Sensing matrices of an experiment, one per slot, generated once.
pub fn codebook(cfg: &ExperimentConfig) -> Result<Vec<SensingMatrix>> {
    let p = &cfg.profile;
    let seed = SeedPath::new(cfg.master_seed).push("codebook").key_u64();
    (0..p.slots())
        .map(|j| SensingMatrix::new(j, cfg.rows_per_slot[j], p.width(j), seed)?.materialized())
        .collect()
}

fn draw_messages<R: Rng + ?Sized>(
    profile: &CodeProfile,
    distinct: bool,
    rng: &mut R,
) -> Vec<BitBlock> {
    let b = profile.message_bits();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(profile.active());
    while out.len() < profile.active() {
        let msg = BitBlock::random(b, rng);
        if !distinct || seen.insert(msg.clone()) {
            out.push(msg);
        }
    }
    out
}

fn trial_path(cfg: &ExperimentConfig, t: usize) -> SeedPath {
    SeedPath::new(cfg.master_seed).push("trial").push(t)
}

/// Runs trial `t` of `cfg`; `matrices` is required for channel modes.
pub fn run_trial(
    cfg: &ExperimentConfig,
    matrices: &[SensingMatrix],
    t: usize,
) -> Result<TrialOutcome> {
    let p = &cfg.profile;
    let path = trial_path(cfg, t);
    let g = ParityGenerator::random(p, &mut path.child("generator").rng());
    let messages = draw_messages(p, cfg.distinct_messages, &mut path.child("messages").rng());
    let codewords: Vec<Codeword> = messages
        .iter()
        .map(|m| encode(m, p, &g))
        .collect::<Result<_>>()?;

    let n = p.slots();
    let full: Vec<u64> = (0..n).map(|j| 1u64 << p.width(j)).collect();
    let mut columns_searched = full.clone();
    let mut pruned_true_columns = 0;

    let outcome: DecodeOutcome = match cfg.mode {
        Mode::ErrorFreeLists => {
            let lists: Vec<SlotList> = (0..n)
                .map(|j| SlotList::from_codewords(j, p, &codewords))
                .collect::<Result<_>>()?;
            let mut dec = TreeDecoder::new(p, &g, &lists[0], DecodeMode::Enhanced)?
                .with_path_cap(cfg.path_cap);
            for (j, list) in lists.iter().enumerate().skip(1) {
                if !dec.blew_up() {
                    let adm = dec.admissible_patterns()?;
                    columns_searched[j] = (adm.len() as u64) << p.m(j);
                }
                dec.extend(list)?;
            }
            dec.finish()
        }
        Mode::Standard | Mode::Enhanced => {
            let channel = cfg
                .channel
                .expect("validated configuration has channel parameters")
                .channel(p.message_bits(), n);
            let k = p.active();
            let observe = |j: usize, candidates: Option<&[u64]>| -> Result<SlotList> {
                let truth: Vec<u64> = codewords.iter().map(|c| c.index(j)).collect();
                let mut noise = path.child("slot").push(j).push("noise").rng();
                let obs = transmit_slot(&truth, &matrices[j], &channel, &mut noise)?;
                let found = recover_support(&obs.y, &matrices[j], k, candidates)?;
                SlotList::from_indices(j, p, found)
            };
            if cfg.mode == Mode::Standard {
                let lists: Vec<SlotList> =
                    (0..n).map(|j| observe(j, None)).collect::<Result<_>>()?;
                let mut dec = TreeDecoder::new(p, &g, &lists[0], DecodeMode::Standard)?
                    .with_path_cap(cfg.path_cap);
                for list in &lists[1..] {
                    dec.extend(list)?;
                }
                dec.finish()
            } else {
                let list0 = observe(0, None)?;
                let mut dec = TreeDecoder::new(p, &g, &list0, DecodeMode::Enhanced)?
                    .with_path_cap(cfg.path_cap);
                for (j, searched) in columns_searched.iter_mut().enumerate().skip(1) {
                    if dec.blew_up() {
                        break;
                    }
                    let adm = dec.admissible_patterns()?;
                    let keep = prune_column_index_set(p, j, &adm);
                    *searched = keep.len() as u64;
                    pruned_true_columns += codewords
                        .iter()
                        .filter(|c| keep.binary_search(&c.index(j)).is_err())
                        .count();
                    let list = observe(j, Some(&keep))?;
                    dec.extend(&list)?;
                }
                dec.finish()
            }
        }
    };

    let blown_up = outcome.blew_up();
    let missing = if blown_up {
        messages.len()
    } else {
        messages
            .iter()
            .filter(|m| !outcome.recovered.contains(*m))
            .count()
    };
    let mut survivors = outcome.survivors_per_stage;
    survivors.resize(n, 0);
    let reduction = columns_searched
        .iter()
        .zip(&full)
        .map(|(&c, &f)| c as f64 / f as f64)
        .collect();
    Ok(TrialOutcome {
        missing,
        survivors_per_stage: survivors,
        columns_searched,
        reduction,
        pruned_true_columns,
        blown_up,
    })
}

/// Runs every trial of `cfg` (in parallel) and returns the outcomes in trial order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let matrices = if cfg.mode == Mode::ErrorFreeLists {
        Vec::new()
    } else {
        codebook(cfg)?
    };
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &matrices, t))
        .collect()
}

/// Aggregates outcomes in trial order.
pub fn summarize(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> TrialReport {
    let p = &cfg.profile;
    let n = p.slots();
    let users = (outcomes.len() * p.active()) as f64;
    let missing: usize = outcomes.iter().map(|o| o.missing).sum();
    let pupe = missing as f64 / users;
    let per_slot = |f: &dyn Fn(&TrialOutcome, usize) -> f64| -> Vec<MeanStderr> {
        (0..n)
            .map(|j| MeanStderr::of(outcomes.iter().map(|o| f(o, j))))
            .collect()
    };
    let note = match cfg.mode {
        Mode::ErrorFreeLists => Some("error-free lists: channel parameters ignored".to_string()),
        Mode::Standard => {
            Some("standard decoding: no pruning, reduction is 1 in every slot".to_string())
        }
        Mode::Enhanced => None,
    };
    TrialReport {
        metadata: ReportMetadata {
            master_seed: cfg.master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: cfg.mode,
            trials: outcomes.len(),
            active_messages: p.active(),
            message_bits: p.message_bits(),
            slots: n,
            channel_uses: if cfg.mode == Mode::ErrorFreeLists {
                0
            } else {
                cfg.channel_uses()
            },
            eb_n0_db: if cfg.mode == Mode::ErrorFreeLists {
                None
            } else {
                cfg.channel.map(|c| c.eb_n0_db)
            },
            note,
        },
        pupe: MeanStderr {
            mean: pupe,
            stderr: (pupe * (1.0 - pupe) / users).sqrt(),
        },
        survivors_per_stage: per_slot(&|o, j| o.survivors_per_stage[j] as f64),
        measured_reduction_per_slot: per_slot(&|o, j| o.reduction[j]),
        columns_searched_per_slot: per_slot(&|o, j| o.columns_searched[j] as f64),
        pruned_true_columns: outcomes.iter().map(|o| o.pruned_true_columns).sum(),
        blowups: outcomes.iter().filter(|o| o.blown_up).count(),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialReport> {
    let outcomes = run_trials(cfg)?;
    Ok(summarize(cfg, &outcomes))
}

/// Mean over trials of `|admissible patterns| / 2^{l_j}` for every slot.
pub fn measure_reduction(cfg: &ExperimentConfig) -> Result<Vec<MeanStderr>> {
    if cfg.mode != Mode::ErrorFreeLists {
        return Err(Error::InvalidConfig(
            "reduction is measured with error-free lists".into(),
        ));
    }
    Ok(run_experiment(cfg)?.measured_reduction_per_slot)
}
