//! Experiment drivers: PAC validation on adversarial instances, precision
//! versus speedup comparisons, and single queries.

use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::bandit::{median_elimination_topk, EliminationConfig};
use crate::baselines::{naive_topk, LshIndex};
use crate::data::{gen_adversarial, DatasetSpec, Distribution};
use crate::error::{Error, Result};
use crate::exec::{mix_seed, Execution};
use crate::io::{CurvePoint, RunRecord};
use crate::metrics::{percentile, precision, suboptimality};
use crate::mips::{mips_topk, search_topk, ObjectiveKind, SearchParams};
use crate::vectors::{dot, Query, VectorSet};

/// Ids of the `k` largest values, ties to the smaller id.
pub fn top_ids(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateConfig {
    pub n: usize,
    pub dim: usize,
    pub runs: usize,
    pub k: usize,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub seed: u64,
    pub execution: Execution,
    /// Record wall times. Off by default so that results files are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            n: 500,
            dim: 5000,
            runs: 20,
            k: 1,
            epsilons: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            deltas: vec![0.01, 0.05, 0.1, 0.2, 0.3],
            seed: 0,
            execution: Execution::default(),
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationRun {
    pub epsilon: f64,
    pub delta: f64,
    pub run: usize,
    pub seed: u64,
    pub returned: Vec<usize>,
    pub precision: f64,
    pub suboptimality: f64,
    pub pulls_total: u64,
    pub max_arm_pulls: usize,
    pub rounds: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub epsilon: f64,
    pub delta: f64,
    pub runs: usize,
    /// Nearest-rank `(1 - delta)`-percentile of the runs' suboptimalities.
    pub percentile_suboptimality: f64,
    pub mean_suboptimality: f64,
    /// Fraction of runs with suboptimality above epsilon.
    pub failure_rate: f64,
    /// `delta + 2 sqrt(delta (1 - delta) / runs)`.
    pub failure_allowance: f64,
    pub max_arm_pulls: usize,
    pub pull_bound_violations: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateReport {
    pub config: ValidateConfig,
    pub runs: Vec<ValidationRun>,
    pub cells: Vec<CellSummary>,
}

impl ValidateReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    /// Per epsilon, the mean over deltas of the cell percentiles.
    pub fn epsilon_means(&self) -> Vec<(f64, f64)> {
        self.config
            .epsilons
            .iter()
            .map(|&e| {
                let cells: Vec<&CellSummary> =
                    self.cells.iter().filter(|c| c.epsilon == e).collect();
                let mean = cells
                    .iter()
                    .map(|c| c.percentile_suboptimality)
                    .sum::<f64>()
                    / cells.len() as f64;
                (e, mean)
            })
            .collect()
    }

    /// Per-run lines, then one line per cell, then one line per epsilon.
    pub fn records(&self) -> Vec<RunRecord> {
        let cfg = &self.config;
        let ops_naive = (cfg.n * cfg.dim) as u64;
        let mut out: Vec<RunRecord> = self
            .runs
            .iter()
            .map(|r| RunRecord {
                method: "me".into(),
                params: json!({
                    "n": cfg.n,
                    "dim": cfg.dim,
                    "run": r.run,
                    "returned": r.returned,
                    "max_arm_pulls": r.max_arm_pulls,
                    "rounds": r.rounds,
                }),
                k: cfg.k,
                epsilon: Some(r.epsilon),
                delta: Some(r.delta),
                seed: r.seed,
                precision: Some(r.precision),
                suboptimality: Some(r.suboptimality),
                pulls_total: Some(r.pulls_total),
                ops_naive,
                wall_ms: cfg.timing.then_some(r.wall_ms),
            })
            .collect();
        out.extend(self.cells.iter().map(|c| {
            let runs: Vec<&ValidationRun> = self
                .runs
                .iter()
                .filter(|r| r.epsilon == c.epsilon && r.delta == c.delta)
                .collect();
            RunRecord {
                method: "me-cell".into(),
                params: json!({
                    "n": cfg.n,
                    "dim": cfg.dim,
                    "runs": c.runs,
                    "percentile_level": 1.0 - c.delta,
                    "mean_suboptimality": c.mean_suboptimality,
                    "failure_rate": c.failure_rate,
                    "failure_allowance": c.failure_allowance,
                    "max_arm_pulls": c.max_arm_pulls,
                    "pull_bound_violations": c.pull_bound_violations,
                    "pass": c.pass,
                }),
                k: cfg.k,
                epsilon: Some(c.epsilon),
                delta: Some(c.delta),
                seed: cfg.seed,
                precision: Some(runs.iter().map(|r| r.precision).sum::<f64>() / runs.len() as f64),
                suboptimality: Some(c.percentile_suboptimality),
                pulls_total: Some(runs.iter().map(|r| r.pulls_total).sum()),
                ops_naive: ops_naive * runs.len() as u64,
                wall_ms: cfg.timing.then(|| runs.iter().map(|r| r.wall_ms).sum()),
            }
        }));
        out.extend(self.epsilon_means().into_iter().map(|(e, mean)| RunRecord {
            method: "me-epsilon".into(),
            params: json!({
                "mean_percentile_suboptimality": mean,
                "all_cells_pass": self.cells.iter().filter(|c| c.epsilon == e).all(|c| c.pass),
            }),
            k: cfg.k,
            epsilon: Some(e),
            delta: None,
            seed: cfg.seed,
            precision: None,
            suboptimality: Some(mean),
            pulls_total: None,
            ops_naive,
            wall_ms: None,
        }));
        out
    }
}

/// For every `(epsilon, delta)` pair, runs median elimination on `runs`
/// freshly generated adversarial instances and checks that the
/// `(1 - delta)`-percentile suboptimality stays within epsilon.
pub fn run_validate(config: &ValidateConfig) -> Result<ValidateReport> {
    if config.runs == 0 || config.epsilons.is_empty() || config.deltas.is_empty() {
        return Err(Error::Config("validation grid is empty".into()));
    }
    if config.k > config.n {
        return Err(Error::Config(format!(
            "K={} exceeds n={}",
            config.k, config.n
        )));
    }
    let cells: Vec<(f64, f64)> = config
        .epsilons
        .iter()
        .flat_map(|&e| config.deltas.iter().map(move |&d| (e, d)))
        .collect();
    for &(e, d) in &cells {
        EliminationConfig::new(config.k, e, d).validate()?;
    }
    let inner = if config.execution.is_parallel() {
        Execution::Sequential
    } else {
        config.execution
    };
    let jobs = cells.len() * config.runs;
    let runs = config
        .execution
        .map_range(jobs, |job| -> Result<ValidationRun> {
            let (cell, run) = (job / config.runs, job % config.runs);
            let (epsilon, delta) = cells[cell];
            let seed = mix_seed(mix_seed(config.seed, cell as u64), run as u64);
            let spec = DatasetSpec::new(Distribution::Adversarial, config.n, config.dim, seed);
            let instance = gen_adversarial(&spec)?;
            let means = instance.list_means();
            let me = EliminationConfig::new(config.k, epsilon, delta)
                .with_seed(seed)
                .with_execution(inner);
            let start = Instant::now();
            let out = median_elimination_topk(&instance.arms, &me)?;
            let wall_ms = elapsed_ms(start);
            Ok(ValidationRun {
                epsilon,
                delta,
                run,
                seed,
                precision: precision(&out.arms, &top_ids(&means, config.k), config.k)?,
                suboptimality: suboptimality(&out.arms, &means, config.k)?,
                returned: out.arms,
                pulls_total: out.trace.total_pulls,
                max_arm_pulls: out.trace.max_arm_pulls,
                rounds: out.trace.rounds.len(),
                wall_ms,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let cells = cells
        .iter()
        .enumerate()
        .map(|(i, &(epsilon, delta))| {
            let cell = &runs[i * config.runs..(i + 1) * config.runs];
            let subs: Vec<f64> = cell.iter().map(|r| r.suboptimality).collect();
            let pct = percentile(&subs, 1.0 - delta)?;
            let violations = cell.iter().filter(|r| r.max_arm_pulls > config.dim).count();
            let r = config.runs as f64;
            Ok(CellSummary {
                epsilon,
                delta,
                runs: config.runs,
                percentile_suboptimality: pct,
                mean_suboptimality: subs.iter().sum::<f64>() / r,
                failure_rate: subs.iter().filter(|&&s| s > epsilon).count() as f64 / r,
                failure_allowance: delta + 2.0 * (delta * (1.0 - delta) / r).sqrt(),
                max_arm_pulls: cell.iter().map(|r| r.max_arm_pulls).max().unwrap_or(0),
                pull_bound_violations: violations,
                pass: pct <= epsilon && violations == 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidateReport {
        config: config.clone(),
        runs,
        cells,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lsh,
    Me,
    Naive,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lsh => "lsh",
            Method::Me => "me",
            Method::Naive => "naive",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lsh" => Ok(Method::Lsh),
            "me" => Ok(Method::Me),
            "naive" => Ok(Method::Naive),
            other => Err(Error::Config(format!(
                "unknown method {other:?}, expected me, lsh or naive"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub methods: Vec<Method>,
    pub k: usize,
    /// Mean-scale tolerances swept for median elimination.
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Bits per hash (AND width) swept for LSH.
    pub lsh_bits: Vec<usize>,
    /// Table counts (OR width) swept for LSH.
    pub lsh_tables: Vec<usize>,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            methods: vec![Method::Me, Method::Lsh, Method::Naive],
            k: 5,
            epsilons: vec![
                0.01, 0.03, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0,
                24.0, 32.0, 64.0, 128.0,
            ],
            deltas: vec![0.1],
            lsh_bits: vec![1, 2, 4, 6, 8, 12, 16, 20],
            lsh_tables: vec![1, 2, 5, 10, 20, 50],
            seed: 0,
            execution: Execution::default(),
        }
    }
}

/// One method setting, aggregated over queries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Setting {
    pub method: Method,
    pub knob: String,
    /// Numeric knob values, used for ordering.
    pub knob_values: Vec<f64>,
    pub precision: f64,
    /// Mean suboptimality on the inner-product mean scale.
    pub suboptimality: f64,
    /// Mean scalar multiplications per query.
    pub mean_ops: f64,
    /// `n * N / mean_ops`.
    pub speedup_ops: f64,
    /// Total naive wall time over total method wall time.
    pub speedup_wall: f64,
    pub wall_ms: f64,
    pub padded_queries: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub k: usize,
    pub seed: u64,
    pub ops_naive: u64,
    pub queries: usize,
    pub settings: Vec<Setting>,
}

impl CompareReport {
    /// Rows sorted by method, then knob.
    pub fn curve(&self) -> Vec<CurvePoint> {
        self.settings
            .iter()
            .map(|s| CurvePoint {
                method: s.method.name().into(),
                knob: s.knob.clone(),
                precision: s.precision,
                speedup_ops: s.speedup_ops,
                speedup_wall: s.speedup_wall,
            })
            .collect()
    }

    pub fn records(&self) -> Vec<RunRecord> {
        self.settings
            .iter()
            .map(|s| {
                let (epsilon, delta) = match s.method {
                    Method::Me => (Some(s.knob_values[0]), Some(s.knob_values[1])),
                    _ => (None, None),
                };
                RunRecord {
                    method: s.method.name().into(),
                    params: json!({
                        "knob": s.knob,
                        "queries": self.queries,
                        "mean_ops": s.mean_ops,
                        "speedup_ops": s.speedup_ops,
                        "speedup_wall": s.speedup_wall,
                        "padded_queries": s.padded_queries,
                    }),
                    k: self.k,
                    epsilon,
                    delta,
                    seed: self.seed,
                    precision: Some(s.precision),
                    suboptimality: Some(s.suboptimality),
                    pulls_total: (s.method == Method::Me)
                        .then(|| (s.mean_ops * self.queries as f64).round() as u64),
                    ops_naive: self.ops_naive,
                    wall_ms: Some(s.wall_ms),
                }
            })
            .collect()
    }

    pub fn method(&self, method: Method) -> impl Iterator<Item = &Setting> {
        self.settings.iter().filter(move |s| s.method == method)
    }
}

struct Truth {
    ids: Vec<usize>,
    means: Vec<f64>,
    wall_ms: f64,
}

#[derive(Default)]
struct Tally {
    precision: f64,
    suboptimality: f64,
    ops: f64,
    wall_ms: f64,
    padded: usize,
}

fn fmt_knob(x: f64) -> String {
    format!("{x}")
}

/// Sweeps every requested method over its knob grid on `queries` and
/// measures precision against exhaustive search together with op-count and
/// wall-clock speedups.
pub fn run_compare(
    vectors: &VectorSet,
    queries: &VectorSet,
    config: &CompareConfig,
) -> Result<CompareReport> {
    if queries.dim() != vectors.dim() {
        return Err(Error::Config(format!(
            "queries have dimension {}, dataset has {}",
            queries.dim(),
            vectors.dim()
        )));
    }
    if config.k == 0 || config.k > vectors.rows() {
        return Err(Error::Config(format!(
            "K={} must lie in [1, {}]",
            config.k,
            vectors.rows()
        )));
    }
    let k = config.k;
    let (n, dim) = (vectors.rows(), vectors.dim());
    let ops_naive = (n * dim) as u64;
    let exec = config.execution;
    let qs: Vec<Query> = (0..queries.rows()).map(|i| queries.query(i)).collect();

    let truths: Vec<Truth> = qs
        .iter()
        .map(|q| {
            let start = Instant::now();
            let exact = naive_topk(vectors, q, k, exec)?;
            let wall_ms = elapsed_ms(start);
            let means = exec.map_range(n, |i| dot(vectors.row(i), q.values()) / dim as f64);
            Ok(Truth {
                ids: exact.ids,
                means,
                wall_ms,
            })
        })
        .collect::<Result<_>>()?;
    let naive_wall: f64 = truths.iter().map(|t| t.wall_ms).sum();
    let nq = qs.len() as f64;

    let finish = |method: Method, knob: String, knob_values: Vec<f64>, t: Tally| {
        let mean_ops = t.ops / nq;
        Setting {
            method,
            knob,
            knob_values,
            precision: t.precision / nq,
            suboptimality: t.suboptimality / nq,
            mean_ops,
            speedup_ops: ops_naive as f64 / mean_ops.max(1.0),
            speedup_wall: naive_wall / t.wall_ms.max(1e-9),
            wall_ms: t.wall_ms,
            padded_queries: t.padded,
        }
    };

    let mut methods = config.methods.clone();
    methods.sort_unstable();
    methods.dedup();
    let mut settings = Vec::new();
    for method in methods {
        match method {
            Method::Naive => {
                let mut t = Tally::default();
                for (q, truth) in qs.iter().zip(&truths) {
                    let exact = naive_topk(vectors, q, k, exec)?;
                    t.precision += precision(&exact.ids, &truth.ids, k)?;
                    t.suboptimality += suboptimality(&exact.ids, &truth.means, k)?;
                    t.ops += exact.ops as f64;
                    t.wall_ms += truth.wall_ms;
                }
                settings.push(finish(method, "exhaustive".into(), vec![], t));
            }
            Method::Me => {
                let mut grid: Vec<(f64, f64)> = config
                    .epsilons
                    .iter()
                    .flat_map(|&e| config.deltas.iter().map(move |&d| (e, d)))
                    .collect();
                grid.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
                for (epsilon, delta) in grid {
                    let mut t = Tally::default();
                    for (qi, (q, truth)) in qs.iter().zip(&truths).enumerate() {
                        let params =
                            SearchParams::new(k, epsilon, delta, mix_seed(config.seed, qi as u64))
                                .with_execution(exec);
                        let start = Instant::now();
                        let out = mips_topk(vectors, q, &params)?;
                        t.wall_ms += elapsed_ms(start);
                        t.precision += precision(&out.arms, &truth.ids, k)?;
                        t.suboptimality += suboptimality(&out.arms, &truth.means, k)?;
                        t.ops += out.trace.total_pulls as f64;
                    }
                    let knob = format!("eps={};delta={}", fmt_knob(epsilon), fmt_knob(delta));
                    settings.push(finish(method, knob, vec![epsilon, delta], t));
                }
            }
            Method::Lsh => {
                let (Some(&max_bits), Some(&max_tables)) =
                    (config.lsh_bits.iter().max(), config.lsh_tables.iter().max())
                else {
                    return Err(Error::Config("LSH grid is empty".into()));
                };
                let full = LshIndex::build(vectors, max_bits, max_tables, config.seed, exec)?;
                let mut grid: Vec<(usize, usize)> = config
                    .lsh_bits
                    .iter()
                    .flat_map(|&a| config.lsh_tables.iter().map(move |&b| (a, b)))
                    .collect();
                grid.sort_unstable();
                grid.dedup();
                for (bits, tables) in grid {
                    let index = full.restrict(bits, tables)?;
                    let mut t = Tally::default();
                    for (q, truth) in qs.iter().zip(&truths) {
                        let start = Instant::now();
                        let out = index.query(vectors, q, k)?;
                        t.wall_ms += elapsed_ms(start);
                        t.precision += precision(&out.ids, &truth.ids, k)?;
                        t.suboptimality += suboptimality(&out.ids, &truth.means, k)?;
                        t.ops += out.ops as f64;
                        t.padded += out.padded as usize;
                    }
                    let knob = format!("a={bits};b={tables}");
                    settings.push(finish(method, knob, vec![bits as f64, tables as f64], t));
                }
            }
        }
    }
    Ok(CompareReport {
        k,
        seed: config.seed,
        ops_naive,
        queries: qs.len(),
        settings,
    })
}

/// An LSH setting that median elimination fails to match.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceGap {
    pub lsh_knob: String,
    pub lsh_speedup: f64,
    pub lsh_precision: f64,
    /// Best ME precision among settings at least as fast, if any.
    pub me_precision: Option<f64>,
}

/// Best precision of `points` among those with op-count speedup >= `speedup`.
pub fn precision_at_speedup<'a>(
    points: impl IntoIterator<Item = &'a CurvePoint>,
    speedup: f64,
) -> Option<f64> {
    points
        .into_iter()
        .filter(|p| p.speedup_ops >= speedup)
        .map(|p| p.precision)
        .max_by(f64::total_cmp)
}

/// LSH points with speedup >= `min_speedup` whose precision exceeds the best
/// ME precision at an equal or higher op-count speedup.
pub fn me_vs_lsh_gaps(curve: &[CurvePoint], min_speedup: f64) -> Vec<DominanceGap> {
    let me: Vec<&CurvePoint> = curve.iter().filter(|p| p.method == "me").collect();
    curve
        .iter()
        .filter(|p| p.method == "lsh" && p.speedup_ops >= min_speedup)
        .filter_map(|p| {
            let best = precision_at_speedup(me.iter().copied(), p.speedup_ops);
            match best {
                Some(m) if m >= p.precision => None,
                _ => Some(DominanceGap {
                    lsh_knob: p.knob.clone(),
                    lsh_speedup: p.speedup_ops,
                    lsh_precision: p.precision,
                    me_precision: best,
                }),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryReport {
    pub ids: Vec<usize>,
    /// Empirical mean times `N`: an estimate of `q . v`, or of `-|q - v|^2`
    /// for nearest neighbor queries. `None` for unpulled arms.
    pub estimated_scores: Vec<Option<f64>>,
    pub pulls_total: u64,
    pub ops_naive: u64,
    pub speedup_ops: f64,
    pub rounds: usize,
    pub degenerate: bool,
}

pub fn run_query(
    vectors: &VectorSet,
    query: &Query,
    kind: ObjectiveKind,
    params: &SearchParams,
) -> Result<QueryReport> {
    let out = search_topk(vectors, query, kind, params)?;
    let dim = vectors.dim() as f64;
    let ops_naive = (vectors.rows() * vectors.dim()) as u64;
    Ok(QueryReport {
        ids: out.arms,
        estimated_scores: out
            .trace
            .returned
            .iter()
            .map(|s| s.empirical_mean.map(|m| m * dim))
            .collect(),
        pulls_total: out.trace.total_pulls,
        ops_naive,
        speedup_ops: ops_naive as f64 / (out.trace.total_pulls.max(1)) as f64,
        rounds: out.trace.rounds.len(),
        degenerate: out.trace.degenerate,
    })
}
