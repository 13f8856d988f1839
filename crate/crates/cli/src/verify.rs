use clap::{Args, ValueEnum};
use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use ccs_core::analyzer::{
    bell, class_size, enumerate_patterns, expected_survivors_exact, mc_survivor_oracle, pgf,
    PatternSequence,
};
use ccs_core::seed::SeedPath;
use ccs_core::Dyadic;

use crate::output::{Document, Table};
use crate::{metadata, CliError, Common};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Pgf,
    Oracle,
    Patterns,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
}

#[derive(Serialize)]
struct Check {
    suite: &'static str,
    check: String,
    passed: bool,
    detail: String,
}

pub const DEFAULT_ORACLE_TRIALS: usize = 100_000;

/// Small configurations `(K, m, l, stage)` for the oracle comparison.
pub const ORACLE_CONFIGS: [(usize, &[usize], &[usize], usize); 5] = [
    (3, &[3, 3, 3], &[0, 2, 2], 2),
    (2, &[2, 3, 2, 3], &[0, 1, 2, 3], 3),
    (4, &[2, 2, 3], &[0, 3, 1], 2),
    (3, &[2, 3, 2, 2], &[0, 1, 1, 2], 3),
    (4, &[3, 2], &[0, 2], 1),
];

fn seq(v: &[usize]) -> PatternSequence {
    PatternSequence::new(v.to_vec()).expect("valid pattern")
}

fn patterns() -> Vec<Check> {
    let mut out = Vec::new();
    for j in 1..=8 {
        let count = enumerate_patterns(j).len();
        out.push(Check {
            suite: "patterns",
            check: format!("|P_{j}| = B_{j}"),
            passed: BigUint::from(count) == bell(j),
            detail: format!("{count} vs {}", bell(j)),
        });
    }
    let listed: [&[&str]; 3] = [
        &["(1)"],
        &["(1,1)", "(1,2)"],
        &["(1,1,1)", "(1,1,3)", "(1,2,1)", "(1,2,2)", "(1,2,3)"],
    ];
    for (i, want) in listed.iter().enumerate() {
        let got: Vec<String> = enumerate_patterns(i + 1)
            .iter()
            .map(|p| p.to_string())
            .collect();
        out.push(Check {
            suite: "patterns",
            check: format!("P_{} listing", i + 1),
            passed: got == *want,
            detail: got.join(" "),
        });
    }
    for j in 1..=6 {
        let pats = enumerate_patterns(j);
        let bad: Vec<usize> = (1..=10usize)
            .filter(|&k| {
                pats.iter().map(|p| class_size(p, k)).sum::<BigUint>()
                    != BigUint::from(k).pow(j as u32 - 1)
            })
            .collect();
        out.push(Check {
            suite: "patterns",
            check: format!("sum of n(s) over P_{j} = K^{}", j - 1),
            passed: bad.is_empty(),
            detail: if bad.is_empty() {
                "K = 1..10".into()
            } else {
                format!("fails for K in {bad:?}")
            },
        });
    }
    out
}

fn pgfs(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = SeedPath::new(seed).push("verify-pgf").rng();
    let mut failures = Vec::new();
    let draws = 200;
    for _ in 0..draws {
        let m = [rng.random_range(0..=16usize), rng.random_range(0..=16usize)];
        let l = [
            0,
            rng.random_range(0..=16usize),
            rng.random_range(0..=16usize),
        ];
        let a = Dyadic::pow2_neg((m[0] + m[1]) as u32);
        let b = Dyadic::pow2_neg(m[0] as u32);
        let mut want_113 = ccs_core::analyzer::SparsePgf::new();
        want_113.add_term(l[2] as u64, a.complement());
        want_113.add_term(0, a);
        let mut want_122 = ccs_core::analyzer::SparsePgf::new();
        want_122.add_term((l[1] + l[2]) as u64, b.complement());
        want_122.add_term(0, b);
        let mut want_111 = ccs_core::analyzer::SparsePgf::new();
        want_111.add_term(0, Dyadic::one());
        for (s, want) in [
            ([1, 1, 1], want_111),
            ([1, 1, 3], want_113),
            ([1, 2, 2], want_122),
        ] {
            let got = pgf(&seq(&s), &m, &l)?;
            if got != want {
                failures.push(format!("{s:?} m={m:?} l={l:?}"));
            }
        }
    }
    Ok(vec![Check {
        suite: "pgf",
        check: "closed forms for (1,1,1), (1,1,3), (1,2,2)".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{draws} random profiles with m_q <= 16, exact dyadic equality")
        } else {
            failures.join("; ")
        },
    }])
}

fn oracle(trials: usize, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for (i, (k, m, l, stage)) in ORACLE_CONFIGS.into_iter().enumerate() {
        let exact = expected_survivors_exact(k, m, l, stage)?;
        let est = mc_survivor_oracle(
            k,
            m,
            l,
            stage,
            trials,
            SeedPath::new(seed).push(i).key_u64(),
        )?;
        let z = if est.stderr > 0.0 {
            (est.mean - exact) / est.stderr
        } else {
            0.0
        };
        out.push(Check {
            suite: "oracle",
            check: format!("K={k} m={m:?} l={l:?} stage={stage}"),
            passed: z.abs() <= 3.0,
            detail: format!(
                "exact {exact:.6} oracle {:.6} +- {:.6} (z = {z:.2})",
                est.mean, est.stderr
            ),
        });
    }
    Ok(out)
}

/// Runs the selected suite; the flag is true when every check passed.
pub fn run(args: &VerifyArgs, common: &Common) -> Result<(Document, bool), CliError> {
    let seed = common.seed.unwrap_or(0);
    let trials = common.trials.unwrap_or(DEFAULT_ORACLE_TRIALS);
    let mut checks = Vec::new();
    if matches!(args.suite, Suite::Patterns | Suite::All) {
        checks.extend(patterns());
    }
    if matches!(args.suite, Suite::Pgf | Suite::All) {
        checks.extend(pgfs(seed)?);
    }
    if matches!(args.suite, Suite::Oracle | Suite::All) {
        checks.extend(oracle(trials, seed)?);
    }
    for c in &checks {
        eprintln!(
            "{} {}: {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.suite,
            c.check,
            c.detail
        );
    }
    let passed = checks.iter().all(|c| c.passed);
    let mut meta = metadata("verify", Some(seed));
    if matches!(args.suite, Suite::Oracle | Suite::All) {
        meta["trials"] = json!(trials);
    }
    let doc = json!({ "metadata": meta, "passed": passed, "checks": checks });
    Ok((Document::new(doc, Table::Rows("checks")), passed))
}
