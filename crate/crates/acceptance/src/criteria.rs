//! The acceptance criteria, one function each. Every function returns a
//! [`CriterionResult`]; thresholds, tolerances and runtime budgets are fixed
//! here and not configurable.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use ipec::confidence::{self, ConfidenceScores};
use ipec::evaluation;
use ipec::memory::{AuxiliaryMemory, Strategy};
use ipec::metric::{self, Metric, Prototype};
use ipec::rng::StreamRng;
use ipec::{engine, ClassId, Embedding, Mode, RunConfig, RunOutput, SampleId, Stage, Thresholds};
use rayon::prelude::*;

use crate::benchmark;
use crate::oracle::Oracle;

pub const ORACLE_REL_TOL: f64 = 1e-9;
pub const ORACLE_CASES: usize = 1_000;
pub const SEEDS: [u64; 10] = [42, 43, 44, 45, 46, 47, 48, 49, 50, 51];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let budget = self
            .budget
            .map(|b| format!(" / budget {:.0}s", b.as_secs_f64()))
            .unwrap_or_default();
        format!(
            "[{}] criterion {:>2}: {} ({:.2}s{}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            budget,
            self.detail
        )
    }
}

fn timed(
    id: u8,
    title: &'static str,
    budget: Option<Duration>,
    body: impl FnOnce() -> (bool, String),
) -> CriterionResult {
    let start = Instant::now();
    let (ok, mut detail) = body();
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed <= b);
    if !in_budget {
        detail.push_str("; over runtime budget");
    }
    CriterionResult {
        id,
        title,
        passed: ok && in_budget,
        detail,
        elapsed,
        budget,
    }
}

fn run(config: &RunConfig) -> RunOutput {
    engine::run(benchmark::store(), config).expect("benchmark run")
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

// ---------------------------------------------------------------------------
// 1. oracle equivalence

/// Implementation entry points checked against the oracle. Swappable so the
/// suite's sensitivity can be tested with a mutated kernel.
#[derive(Clone, Copy)]
pub struct Kernels {
    pub softmax: fn(&[f64]) -> Vec<f64>,
    pub entropy: fn(&[f64]) -> f64,
    pub global_confidence: fn(&[f64]) -> f64,
    pub local_confidence: fn(&[f64]) -> f64,
    pub euclidean: fn(&[f64], &[f64]) -> f64,
    pub cosine: fn(&[f64], &[f64]) -> f64,
    pub mean: fn(&[Vec<f64>]) -> Vec<f64>,
}

fn probs(p: &[f64]) -> ipec::Probabilities {
    ipec::Probabilities { values: p.to_vec() }
}

fn single_logit(q: &[f64], p: &[f64], m: Metric) -> f64 {
    let proto = Prototype {
        class_local: 0,
        vector: p.to_vec(),
        support_count: 1,
        aux_count: 0,
    };
    metric::logits(q, &[proto], m).expect("valid input").values[0]
}

impl Default for Kernels {
    fn default() -> Self {
        Self {
            softmax: |v| metric::softmax(v).values,
            entropy: |p| confidence::entropy(&probs(p)),
            global_confidence: |p| confidence::global_confidence(&probs(p)),
            local_confidence: |p| confidence::local_confidence(&probs(p)),
            euclidean: |q, p| single_logit(q, p, Metric::Euclidean),
            cosine: |q, p| single_logit(q, p, Metric::Cosine),
            mean: |vs| {
                let refs: Vec<&[f64]> = vs.iter().map(Vec::as_slice).collect();
                metric::prototype_from_support(0, &refs).expect("non-empty").vector
            },
        }
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

pub fn oracle_equivalence_with(kernels: &Kernels) -> (bool, String) {
    let mut oracle = Oracle::new();
    let mut rng = StreamRng::from_seed(20_240_601);
    let mut worst: HashMap<&'static str, f64> = HashMap::new();
    let mut note = |name: &'static str, got: f64, want: f64| {
        let e = rel_err(got, want);
        let slot = worst.entry(name).or_insert(0.0);
        if e > *slot || e.is_nan() {
            *slot = e;
        }
    };

    for _ in 0..ORACLE_CASES {
        let classes = 2 + rng.below(9) as usize;
        // logit scale log-uniform over [0.01, 300]
        let scale = 10f64.powf(-2.0 + rng.uniform() * (300f64.log10() + 2.0));
        let logits: Vec<f64> = (0..classes).map(|_| scale * (2.0 * rng.uniform() - 1.0)).collect();
        let got = (kernels.softmax)(&logits);
        let want = oracle.softmax(&logits);
        for (g, w) in got.iter().zip(&want) {
            note("softmax", *g, *w);
        }

        let p = metric::softmax(&logits).values;
        note("entropy", (kernels.entropy)(&p), oracle.entropy(&p));
        note("delta", (kernels.global_confidence)(&p), oracle.global_confidence(&p));
        note("delta_prime", (kernels.local_confidence)(&p), oracle.local_confidence(&p));

        let d = 1 + rng.below(64) as usize;
        let spread = 0.1 + 10.0 * rng.uniform();
        let q: Vec<f64> = (0..d).map(|_| spread * rng.standard_normal()).collect();
        let c: Vec<f64> = (0..d).map(|_| spread * rng.standard_normal()).collect();
        note("euclidean", (kernels.euclidean)(&q, &c), oracle.neg_squared_distance(&q, &c));
        note("cosine", (kernels.cosine)(&q, &c), oracle.cosine(&q, &c));

        let n = 1 + rng.below(50) as usize;
        let offset = 5.0 * rng.standard_normal();
        let set: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| offset + spread * rng.standard_normal()).collect())
            .collect();
        let got = (kernels.mean)(&set);
        for (g, w) in got.iter().zip(oracle.mean(&set)) {
            note("prototype_mean", *g, w);
        }
    }

    let mut names: Vec<_> = worst.iter().collect();
    names.sort_by_key(|(k, _)| **k);
    let ok = names.iter().all(|(_, &e)| e <= ORACLE_REL_TOL);
    let detail = names
        .iter()
        .map(|(k, e)| format!("{k}={e:.1e}"))
        .collect::<Vec<_>>()
        .join(" ");
    (ok, format!("max rel err over {ORACLE_CASES} cases: {detail}"))
}

pub fn c01_oracle_equivalence() -> CriterionResult {
    timed(1, "oracle equivalence", secs(10), || {
        oracle_equivalence_with(&Kernels::default())
    })
}

// ---------------------------------------------------------------------------
// 2. pn reduction

pub fn c02_pn_reduction() -> CriterionResult {
    timed(2, "ipec with tau = tau' = 1 reproduces pn", secs(30), || {
        let mut ipec = benchmark::config(Mode::Ipec, 1, 200, benchmark::SEED);
        ipec.thresholds = Thresholds {
            tau: 1.0,
            tau_prime: 1.0,
        };
        let pn = benchmark::config(Mode::Pn, 1, 200, benchmark::SEED);
        let (a, b) = rayon::join(|| run(&ipec), || run(&pn));
        let log_a = evaluation::predictions_csv(&a.records, benchmark::N_WAY).expect("csv");
        let log_b = evaluation::predictions_csv(&b.records, benchmark::N_WAY).expect("csv");
        let same = log_a == log_b;
        (
            same,
            format!(
                "{} records, logs {} ({} vs {} bytes)",
                a.records.len(),
                if same { "byte-identical" } else { "differ" },
                log_a.len(),
                log_b.len()
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 3. ipec beats pn

fn ipec_config(k_shot: usize, seed: u64) -> RunConfig {
    benchmark::config(Mode::Ipec, k_shot, 300, seed)
}

fn pn_config(k_shot: usize, seed: u64) -> RunConfig {
    benchmark::config(Mode::Pn, k_shot, 300, seed)
}

pub fn c03_ipec_beats_pn() -> CriterionResult {
    timed(3, "ipec beats pn at 1 shot", secs(300), || {
        let gaps: Vec<(u64, f64, f64)> = SEEDS
            .par_iter()
            .map(|&seed| {
                let ipec = run(&ipec_config(1, seed)).report.mean_accuracy;
                let pn = run(&pn_config(1, seed)).report.mean_accuracy;
                (seed, ipec, pn)
            })
            .collect();
        let positive = gaps.iter().filter(|(_, i, p)| i > p).count();
        let mean_ipec = gaps.iter().map(|g| g.1).sum::<f64>() / gaps.len() as f64;
        let mean_pn = gaps.iter().map(|g| g.2).sum::<f64>() / gaps.len() as f64;
        (
            positive == SEEDS.len() && mean_ipec > mean_pn,
            format!(
                "gap > 0 for {positive}/{} seeds; mean ipec {mean_ipec:.6} vs pn {mean_pn:.6}",
                SEEDS.len()
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 4. shot-gap compression

pub fn c04_shot_gap() -> CriterionResult {
    timed(4, "ipec compresses the 1-shot/5-shot gap", secs(600), || {
        let rows: Vec<(f64, f64)> = SEEDS
            .par_iter()
            .map(|&seed| {
                let acc = |c: RunConfig| run(&c).report.mean_accuracy;
                let ipec_gap = acc(ipec_config(5, seed)) - acc(ipec_config(1, seed));
                let pn_gap = acc(pn_config(5, seed)) - acc(pn_config(1, seed));
                (ipec_gap, pn_gap)
            })
            .collect();
        let smaller = rows.iter().filter(|(i, p)| i < p).count();
        let fmt: Vec<String> = rows.iter().map(|(i, p)| format!("{i:.4}/{p:.4}")).collect();
        (
            smaller == SEEDS.len(),
            format!(
                "ipec gap < pn gap for {smaller}/{} seeds (ipec/pn: {})",
                SEEDS.len(),
                fmt.join(" ")
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 5. convergence

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn c05_convergence() -> CriterionResult {
    timed(5, "auxiliary mean converges; warm-up sufficient", secs(120), || {
        let accepted = ConfidenceScores {
            delta: 1.0,
            delta_prime: 1.0,
            conf_max: 1.0,
        };
        let mu = &benchmark::class_specs()[0].mean;
        let wins = (0..100u64)
            .into_par_iter()
            .filter(|&trial| {
                let mut rng = StreamRng::from_seed(7_000 + trial);
                let mut memory = AuxiliaryMemory::new(benchmark::DIMENSION, Strategy::Remove);
                let mut err_at_10 = f64::NAN;
                for i in 0..1000u64 {
                    let e = Embedding {
                        sample_id: SampleId(i),
                        vector: mu.iter().map(|m| m + rng.standard_normal()).collect(),
                        true_class: ClassId(0),
                    };
                    memory.update(&e, ClassId(0), accepted, i).expect("update");
                    if i == 9 {
                        err_at_10 = l2(&metric::mean_vector(&memory.retrieve(ClassId(0))).unwrap(), mu);
                    }
                }
                let err_at_1000 = l2(&metric::mean_vector(&memory.retrieve(ClassId(0))).unwrap(), mu);
                err_at_1000 < err_at_10
            })
            .count();

        let mut cfg = benchmark::config(Mode::IpecTwoStage, 1, 1, benchmark::SEED);
        cfg.warmup_batches = 500;
        let out = run(&cfg);
        let conv = out.report.convergence.unwrap_or_default();
        let sufficient = conv.iter().filter(|c| c.warmup_sufficient).count();
        let worst_ratio = conv
            .iter()
            .map(|c| c.aux_mean_error / c.support_error)
            .fold(0.0, f64::max);
        (
            wins >= 95 && conv.len() == benchmark::CLASSES as usize && sufficient == conv.len(),
            format!(
                "n=1000 beats n=10 in {wins}/100 trials; warm-up sufficient for {sufficient}/{} classes \
                 (worst aux/support error ratio {worst_ratio:.3})",
                benchmark::CLASSES
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 6. two-stage dynamics

fn two_stage(warmup: u64, seed: u64) -> RunConfig {
    let mut cfg = benchmark::config(Mode::IpecTwoStage, 1, 300, seed);
    cfg.strategy = Strategy::Add;
    cfg.warmup_batches = warmup;
    cfg
}

pub fn c06_two_stage_dynamics() -> CriterionResult {
    timed(6, "two-stage warm-up dynamics", secs(600), || {
        let lengths = [50u64, 200, 800];
        let sweep: Vec<(f64, f64, usize)> = lengths
            .par_iter()
            .map(|&w| {
                let r = run(&two_stage(w, benchmark::SEED)).report;
                (r.mean_accuracy, r.ci95, r.final_memory().entries)
            })
            .collect();
        let rising = sweep[1].0 >= sweep[0].0;
        let plateau_tol = sweep[1].1.max(sweep[2].1);
        let plateau = sweep[2].0 >= sweep[1].0 - plateau_tol;
        let memory_grows = sweep.windows(2).all(|w| w[1].2 > w[0].2);

        let improving = SEEDS
            .par_iter()
            .filter(|&&seed| {
                let r = run(&two_stage(800, seed)).report;
                let cum = &r.warmup_cumulative_accuracy;
                cum[cum.len() - 1] > cum[9]
            })
            .count();
        let pts: Vec<String> = lengths
            .iter()
            .zip(&sweep)
            .map(|(w, (a, c, m))| format!("w={w}: {a:.4}±{c:.4} mem={m}"))
            .collect();
        (
            rising && plateau && memory_grows && improving >= 9,
            format!(
                "{}; accuracy non-decreasing={} memory increasing={}; warm-up cumulative accuracy improved for {improving}/10 seeds",
                pts.join(", "),
                rising && plateau,
                memory_grows
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 7. freeze contract

pub fn c07_freeze_contract() -> CriterionResult {
    timed(7, "frozen memory is constant during testing", None, || {
        let mut cfg = benchmark::config(Mode::IpecTwoStage, 1, 100, benchmark::SEED);
        cfg.warmup_batches = 200;
        let out = run(&cfg);
        let curve = &out.report.memory_curve;
        let constant = curve.windows(2).all(|w| w[0] == w[1]);
        let dump = |m: &AuxiliaryMemory| {
            let mut buf = Vec::new();
            m.dump_csv(&mut buf).expect("dump");
            buf
        };
        let before = dump(out.frozen_snapshot.as_ref().expect("snapshot"));
        let after = dump(out.memory.as_ref().expect("memory"));
        let dir = tempfile::tempdir().expect("tempdir");
        evaluation::emit(&out, dir.path()).expect("emit");
        let emitted = std::fs::read(dir.path().join("aux_dump.csv")).expect("aux_dump.csv");
        let identical = before == after && after == emitted;
        (
            constant && identical && !curve.is_empty(),
            format!(
                "{} scored batches at {} entries; dump before/after test stage {}",
                curve.len(),
                curve.first().map_or(0, |u| u.entries),
                if identical { "byte-identical" } else { "differs" }
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 8. strategy semantics

/// Brute-force state machine over `(sample, class)` pairs, independent of
/// `AuxiliaryMemory`. Returns outcome labels and final per-class id lists.
pub fn replay_oracle(strategy: Strategy, ops: &[(u64, u32)]) -> (Vec<&'static str>, Vec<(u32, Vec<u64>)>) {
    // full history of live (id, class) entries in insertion order
    let mut live: Vec<(u64, u32)> = Vec::new();
    let mut first_class: HashMap<u64, u32> = HashMap::new();
    let mut labels = Vec::new();
    for &(id, class) in ops {
        let label = match strategy {
            Strategy::Add => {
                live.push((id, class));
                first_class.entry(id).or_insert(class);
                "inserted"
            }
            Strategy::Replace | Strategy::Remove => match live.iter().position(|&(i, _)| i == id) {
                None => {
                    live.push((id, class));
                    "inserted"
                }
                Some(pos) if live[pos].1 == class => "skipped_duplicate",
                Some(pos) => {
                    live.remove(pos);
                    if strategy == Strategy::Replace {
                        live.push((id, class));
                        "moved"
                    } else {
                        "purged"
                    }
                }
            },
        };
        labels.push(label);
    }
    let mut classes: Vec<u32> = live.iter().map(|&(_, c)| c).collect();
    classes.sort_unstable();
    classes.dedup();
    let sets = classes
        .into_iter()
        .map(|c| (c, live.iter().filter(|e| e.1 == c).map(|e| e.0).collect()))
        .collect();
    (labels, sets)
}

fn apply_memory(strategy: Strategy, ops: &[(u64, u32)]) -> (Vec<&'static str>, Vec<(u32, Vec<u64>)>) {
    let scores = ConfidenceScores {
        delta: 0.9,
        delta_prime: 0.9,
        conf_max: 0.9,
    };
    let mut m = AuxiliaryMemory::new(2, strategy);
    let labels = ops
        .iter()
        .enumerate()
        .map(|(t, &(id, class))| {
            let e = Embedding {
                sample_id: SampleId(id),
                vector: vec![id as f64, class as f64],
                true_class: ClassId(0),
            };
            m.update(&e, ClassId(class), scores, t as u64).expect("update").label()
        })
        .collect();
    let sets = m
        .classes()
        .map(|c| (c.0, m.entries(c).iter().map(|e| e.sample_id.0).collect()))
        .collect();
    (labels, sets)
}

pub fn c08_strategy_semantics() -> CriterionResult {
    timed(8, "update strategies match replay oracle", None, || {
        let strategies = [Strategy::Add, Strategy::Replace, Strategy::Remove];
        let mismatches: Vec<usize> = strategies
            .par_iter()
            .enumerate()
            .map(|(si, &strategy)| {
                let mut rng = StreamRng::from_seed(800 + si as u64);
                (0..10_000)
                    .filter(|_| {
                        let len = rng.below(60) as usize;
                        let pool = 1 + rng.below(20);
                        let ops: Vec<(u64, u32)> = (0..len)
                            .map(|_| (rng.below(pool), rng.below(5) as u32))
                            .collect();
                        replay_oracle(strategy, &ops) != apply_memory(strategy, &ops)
                    })
                    .count()
            })
            .collect();

        let mut rng = StreamRng::from_seed(808);
        let mut conflict_free_diffs = 0;
        for _ in 0..1_000 {
            let len = rng.below(60);
            let ops: Vec<(u64, u32)> = (0..len).map(|i| (i, rng.below(5) as u32)).collect();
            let finals: Vec<_> = strategies.iter().map(|&s| apply_memory(s, &ops).1).collect();
            if finals[0] != finals[1] || finals[1] != finals[2] {
                conflict_free_diffs += 1;
            }
        }
        (
            mismatches.iter().all(|&m| m == 0) && conflict_free_diffs == 0,
            format!(
                "mismatches ADD/REPLACE/REMOVE = {:?} over 10000 sequences each; \
                 conflict-free disagreements {conflict_free_diffs}/1000",
                mismatches
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 9. shot removal

pub fn c09_shot_removal() -> CriterionResult {
    timed(9, "shot-removal accuracy rises then flattens in k", secs(600), || {
        let ks: [Option<u64>; 5] = [Some(1), Some(5), Some(20), Some(100), None];
        let accs: Vec<f64> = ks
            .par_iter()
            .map(|&k| {
                let mut cfg = ipec_config(1, benchmark::SEED);
                cfg.shot_removal_k = k;
                run(&cfg).report.mean_accuracy
            })
            .collect();
        let gains: Vec<f64> = accs.windows(2).map(|w| w[1] - w[0]).collect();
        let non_decreasing = gains.iter().all(|&g| g >= 0.0);
        let first_largest = gains[0] > 0.0 && gains.iter().all(|&g| g <= gains[0]);
        let pts: Vec<String> = ks
            .iter()
            .zip(&accs)
            .map(|(k, a)| format!("k={}: {a:.5}", k.map_or("inf".to_string(), |k| k.to_string())))
            .collect();
        (
            non_decreasing && first_largest,
            format!(
                "{}; non-decreasing={non_decreasing}, largest positive gain at smallest k={first_largest}",
                pts.join(", ")
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 10. correlation ordering

pub fn c10_correlation_ordering() -> CriterionResult {
    timed(10, "r2(delta', delta) < r2(delta, conf_max)", None, || {
        let out = run(&ipec_config(1, benchmark::SEED));
        let scores: Vec<ConfidenceScores> = out
            .records
            .iter()
            .filter(|r| r.stage == Stage::Test)
            .map(|r| r.scores)
            .collect();
        let table = match confidence::correlation_table(&scores) {
            Ok(t) => t,
            Err(e) => {
                let distinct = |f: fn(&ConfidenceScores) -> f64| {
                    let mut v: Vec<u64> = scores.iter().map(|s| f(s).to_bits()).collect();
                    v.sort_unstable();
                    v.dedup();
                    v.len()
                };
                return (
                    false,
                    format!(
                        "{e}; distinct values over {} records: delta {}, delta_prime {}, conf_max {}",
                        scores.len(),
                        distinct(|s| s.delta),
                        distinct(|s| s.delta_prime),
                        distinct(|s| s.conf_max)
                    ),
                );
            }
        };
        let mut oracle = Oracle::new();
        let col = |f: fn(&ConfidenceScores) -> f64| scores.iter().map(f).collect::<Vec<_>>();
        let (d, dp, cm) = (col(|s| s.delta), col(|s| s.delta_prime), col(|s| s.conf_max));
        let ref_dp_d = oracle.r2(&dp, &d);
        let ref_d_cm = oracle.r2(&d, &cm);
        let agrees = rel_err(table.delta_prime_vs_delta, ref_dp_d) <= ORACLE_REL_TOL
            && rel_err(table.delta_vs_conf_max, ref_d_cm) <= ORACLE_REL_TOL;
        (
            agrees && ref_dp_d < ref_d_cm,
            format!(
                "r2(delta', delta) = {ref_dp_d:.4}, r2(delta, conf_max) = {ref_d_cm:.4}, \
                 r2(delta', conf_max) = {:.4}; implementation agrees with oracle={agrees}",
                table.delta_prime_vs_conf_max
            ),
        )
    })
}

// ---------------------------------------------------------------------------
// 11. determinism

const EMITTED: [&str; 4] = ["report.json", "predictions.csv", "curves.csv", "aux_dump.csv"];

fn emitted_bytes(cfg: &RunConfig, dir: &Path) -> Vec<Vec<u8>> {
    evaluation::emit(&run(cfg), dir).expect("emit");
    EMITTED
        .iter()
        .map(|f| std::fs::read(dir.join(f)).expect("emitted file"))
        .collect()
}

pub fn c11_determinism() -> CriterionResult {
    timed(11, "repeated runs emit byte-identical files", None, || {
        let mut two_stage = benchmark::config(Mode::IpecTwoStage, 1, 100, benchmark::SEED);
        two_stage.warmup_batches = 100;
        let mut removal = benchmark::config(Mode::Ipec, 1, 100, benchmark::SEED);
        removal.shot_removal_k = Some(5);
        let configs = [
            benchmark::config(Mode::Pn, 1, 100, benchmark::SEED),
            benchmark::config(Mode::Ipec, 5, 100, benchmark::SEED),
            two_stage,
            removal,
        ];
        let diffs: Vec<String> = configs
            .par_iter()
            .flat_map(|cfg| {
                let a = tempfile::tempdir().expect("tempdir");
                let b = tempfile::tempdir().expect("tempdir");
                let first = emitted_bytes(cfg, a.path());
                let second = emitted_bytes(cfg, b.path());
                EMITTED
                    .iter()
                    .zip(first.iter().zip(&second))
                    .filter(|(_, (x, y))| x != y)
                    .map(|(f, _)| format!("{}:{f}", cfg.mode))
                    .collect::<Vec<_>>()
            })
            .collect();
        (
            diffs.is_empty(),
            if diffs.is_empty() {
                format!("{} configs x {} files identical", configs.len(), EMITTED.len())
            } else {
                format!("differing files: {}", diffs.join(", "))
            },
        )
    })
}

pub fn all() -> Vec<fn() -> CriterionResult> {
    vec![
        c01_oracle_equivalence,
        c02_pn_reduction,
        c03_ipec_beats_pn,
        c04_shot_gap,
        c05_convergence,
        c06_two_stage_dynamics,
        c07_freeze_contract,
        c08_strategy_semantics,
        c09_shot_removal,
        c10_correlation_ordering,
        c11_determinism,
    ]
}

/// Runs every criterion in order, printing one line per criterion as it finishes.
pub fn run_all(mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    all()
        .into_iter()
        .map(|c| {
            let r = c();
            on_result(&r);
            r
        })
        .collect()
}
