//! Replicate orchestration and result files.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use abcsuff_core::abc::with_workers;
use abcsuff_core::divergence::ks_two_sample;
use abcsuff_core::models::gaussian::{conjugate_posterior, log_marginal_likelihood};
use abcsuff_core::rng::{self, tag};
use abcsuff_core::selection::{select_models, select_parameters, Backend, Problem};
use abcsuff_core::{
    abc_joint, abc_parameter, bayes_factor_from_particles, evaluate_subset, prior_predictive_scales, io, registry, AbcUsage, Dataset, Error,
    ModelSpec, NoiseStream, ReferenceTable, SelectionTrace, StatisticPool, StatisticSubset,
};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::spec::{BackendKind, ExperimentKind, ExperimentSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub model: String,
    pub parameters: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSubset {
    pub model: String,
    pub statistics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfRecord {
    pub statistics: Vec<String>,
    pub log_bf_true: f64,
    pub log_bf_abc: f64,
    /// Accepted particles per model.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub statistics: Vec<String>,
    pub particles: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateReport {
    pub replicate: usize,
    pub seed: u64,
    /// Failure reason; `None` on success.
    pub error: Option<String>,
    pub truth: TruthRecord,
    pub selected: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_model: Vec<ModelSubset>,
    pub trace: Option<SelectionTrace>,
    pub abc: AbcUsage,
    pub acceptance_rate: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bayes_factors: Vec<BfRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub statistic: usize,
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfCorrelation {
    pub statistics: Vec<String>,
    pub pearson: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub replicates: usize,
    pub failed: usize,
    pub frequencies: Vec<Frequency>,
    /// Joint runs: statistics in the union of the per-model subsets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameter_frequencies: Vec<Frequency>,
    /// Joint runs: statistics added beyond that union.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub additional_frequencies: Vec<Frequency>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bf_correlations: Vec<BfCorrelation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_passed: Option<usize>,
    pub abc_runs: u64,
    pub simulations: u64,
    pub table_simulations: u64,
    /// Per-component distance divisors, when standardisation is on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_scales: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub replicates: Vec<ReplicateReport>,
    pub aggregate: Aggregate,
    /// The only field that varies between identical reruns.
    pub wall_seconds: f64,
}

/// Seed of replicate `r`.
pub fn replicate_seed(master: u64, r: usize) -> u64 {
    rng::mix(master, &[tag::REPLICATE, r as u64])
}

struct Context {
    spec: ExperimentSpec,
    pool: StatisticPool,
    models: Vec<ModelSpec>,
    truth: ModelSpec,
    external: Option<Dataset>,
    noise: NoiseStream,
    backend: Backend,
}

/// Runs every replicate and writes `report.json` and the CSV tables to the
/// spec's output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport, CliError> {
    spec.validate()?;
    let start = Instant::now();
    let report = with_workers(spec.workers, || compute(spec))?;
    let report = RunReport {
        wall_seconds: start.elapsed().as_secs_f64(),
        ..report
    };
    write_outputs(&report, &spec.outdir)?;
    Ok(report)
}

fn compute(spec: &ExperimentSpec) -> Result<RunReport, CliError> {
    let pool = registry::pool(&spec.pool)?;
    let models = registry::models(&spec.models, &spec.options)?;
    let truth = registry::model(spec.truth_model(), 0, &spec.options)?;
    let external = match &spec.truth.dataset {
        Some(p) => Some(io::read_dataset(p, rng::mix(spec.seed, &[tag::OBSERVED]))?),
        None => None,
    };
    let noise = NoiseStream::new(rng::mix(spec.seed, &[tag::NOISE]));
    let mut scales = None;
    let pool = if spec.abc.standardize {
        let s = prior_predictive_scales(
            &models,
            &pool,
            spec.abc.pilot_draws,
            rng::mix(spec.seed, &[tag::PILOT]),
            noise,
            spec.abc.distance,
        )?;
        let scaled = pool.with_scales(&s)?;
        scales = Some(s);
        scaled
    } else {
        pool
    };
    let mut table_simulations = 0;
    let backend = match spec.backend.kind {
        BackendKind::Simulate => Backend::Simulate,
        BackendKind::Tables => {
            let seed = rng::mix(spec.seed, &[tag::TABLE]);
            let tables = models
                .iter()
                .map(|m| ReferenceTable::build(m, &pool, spec.backend.rows, seed, noise, spec.abc.distance))
                .collect::<Result<Vec<_>, _>>()?;
            table_simulations = (spec.backend.rows * models.len()) as u64;
            Backend::Tables(Arc::new(tables))
        }
    };
    let ctx = Context {
        spec: spec.clone(),
        pool,
        models,
        truth,
        external,
        noise,
        backend,
    };
    let replicates: Vec<ReplicateReport> = (0..spec.replicates).into_par_iter().map(|r| ctx.replicate(r)).collect();
    let mut aggregate = aggregate(&ctx, &replicates, table_simulations);
    aggregate.distance_scales = scales;
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        spec: spec.clone(),
        replicates,
        aggregate,
        wall_seconds: 0.0,
    })
}

impl Context {
    fn observe(&self, seed: u64) -> Result<(Dataset, TruthRecord), Error> {
        if let Some(d) = &self.external {
            let truth = TruthRecord {
                model: "external".into(),
                parameters: None,
            };
            return Ok((d.clone(), truth));
        }
        let mut prior = rng::stream(seed, &[tag::OBSERVED, 0]);
        let theta = match &self.spec.truth.parameters {
            Some(p) => p.clone(),
            None => self.truth.model.sample_prior(&mut prior),
        };
        let id = rng::mix(seed, &[tag::OBSERVED]);
        let data = self.truth.model.simulate(&theta, id, &mut rng::stream(seed, &[tag::OBSERVED, 1]))?;
        let truth = TruthRecord {
            model: self.truth.name().to_string(),
            parameters: Some(theta),
        };
        Ok((data, truth))
    }

    fn replicate(&self, r: usize) -> ReplicateReport {
        let seed = replicate_seed(self.spec.seed, r);
        let mut rep = ReplicateReport {
            replicate: r,
            seed,
            error: None,
            truth: TruthRecord {
                model: self.spec.truth_model().to_string(),
                parameters: None,
            },
            selected: None,
            per_model: Vec::new(),
            trace: None,
            abc: AbcUsage::default(),
            acceptance_rate: 0.0,
            bayes_factors: Vec::new(),
            check: None,
        };
        if let Err(e) = self.fill(seed, &mut rep) {
            if let Error::Selection { trace, .. } = &e {
                rep.abc = rep.abc + trace.abc;
                rep.trace = Some((**trace).clone());
            }
            rep.error = Some(e.to_string());
        }
        rep.acceptance_rate = rep.abc.acceptance_rate();
        rep
    }

    fn fill(&self, seed: u64, rep: &mut ReplicateReport) -> Result<(), Error> {
        let (data, truth) = self.observe(seed)?;
        rep.truth = truth;
        let cfg = self.spec.selection_config(rng::mix(seed, &[tag::PROPOSAL]), rng::mix(seed, &[tag::SHUFFLE]));
        let problem = Problem::new(&self.pool, &data, self.noise).with_backend(self.backend.clone());
        match self.spec.kind {
            ExperimentKind::SelectParams => {
                let (subset, trace) = select_parameters(&problem, &self.models[0], &cfg)?;
                rep.abc = trace.abc;
                rep.selected = Some(subset.names(&self.pool));
                rep.trace = Some(trace);
            }
            ExperimentKind::SelectJoint => {
                let sel = select_models(&problem, &self.models, &cfg)?;
                rep.abc = sel.trace.abc;
                rep.selected = Some(sel.subset.names(&self.pool));
                rep.per_model = self.per_model(&sel.per_model);
                rep.trace = Some(sel.trace);
            }
            ExperimentKind::BfScatter => {
                let mut sets: Vec<StatisticSubset> = self
                    .spec
                    .bf
                    .statistic_sets
                    .iter()
                    .map(|s| self.pool.subset_by_names(s))
                    .collect::<Result<_, _>>()?;
                if self.spec.bf.include_selected {
                    let sel = select_models(&problem, &self.models, &cfg)?;
                    rep.abc = sel.trace.abc;
                    rep.selected = Some(sel.subset.names(&self.pool));
                    rep.per_model = self.per_model(&sel.per_model);
                    sets.push(sel.subset.clone());
                    rep.trace = Some(sel.trace);
                }
                let y = data.as_real_vector().ok_or_else(|| Error::InvalidDataset("expected real data".into()))?;
                let log_bf_true = self.log_marginal(0, y) - self.log_marginal(1, y);
                for (k, subset) in sets.iter().enumerate() {
                    let obs = evaluate_subset(&self.pool, subset, &data, self.noise)?;
                    let particles = abc_joint(&self.models, None, &self.pool, subset, &obs, self.noise, &cfg.abc)?;
                    rep.abc = rep.abc
                        + AbcUsage {
                            runs: 1,
                            proposals: particles.proposals,
                            accepted: particles.accepted() as u64,
                        };
                    let label = if k < self.spec.bf.statistic_sets.len() {
                        subset.names(&self.pool)
                    } else {
                        vec!["selected".to_string()]
                    };
                    rep.bayes_factors.push(BfRecord {
                        statistics: label,
                        log_bf_true,
                        log_bf_abc: bayes_factor_from_particles(&particles, 0, 1).ln(),
                        counts: particles.model_counts(2),
                    });
                }
            }
            ExperimentKind::PosteriorCheck => {
                let subset = self.pool.subset_by_names(&self.spec.check.statistics)?;
                let obs = evaluate_subset(&self.pool, &subset, &data, self.noise)?;
                let model = &self.models[0];
                let particles = abc_parameter(model, &self.pool, &subset, &obs, self.noise, &cfg.abc)?;
                rep.abc = AbcUsage {
                    runs: 1,
                    proposals: particles.proposals,
                    accepted: particles.accepted() as u64,
                };
                let y = data.as_real_vector().ok_or_else(|| Error::InvalidDataset("expected real data".into()))?;
                let (mean, var) = conjugate_posterior(y, self.sigma(0), self.spec.options.gaussian.a);
                let normal = Normal::new(mean, var.sqrt()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
                let mut r = rng::stream(seed, &[tag::OBSERVED, 2]);
                let exact: Vec<f64> = (0..self.spec.check.draws).map(|_| normal.sample(&mut r)).collect();
                let (d, p) = ks_two_sample(&particles.column(0), &exact)?;
                rep.check = Some(CheckRecord {
                    statistics: subset.names(&self.pool),
                    particles: particles.accepted(),
                    ks_statistic: d,
                    p_value: p,
                    passed: p > self.spec.check.p_threshold,
                });
            }
        }
        Ok(())
    }

    fn per_model(&self, subsets: &[StatisticSubset]) -> Vec<ModelSubset> {
        self.models
            .iter()
            .zip(subsets)
            .map(|(m, s)| ModelSubset {
                model: m.name().to_string(),
                statistics: s.names(&self.pool),
            })
            .collect()
    }

    fn sigma(&self, model: usize) -> f64 {
        let g = &self.spec.options.gaussian;
        if self.models[model].name() == "gauss1" {
            g.sigma1
        } else {
            g.sigma2
        }
    }

    fn log_marginal(&self, model: usize, y: &[f64]) -> f64 {
        log_marginal_likelihood(y, self.sigma(model), self.spec.options.gaussian.a)
    }
}

/// Sample Pearson correlation; NaN when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Per-statistic count of replicates whose `chosen` set contains it.
fn tally(pool: &StatisticPool, reps: &[ReplicateReport], chosen: impl Fn(&ReplicateReport, &str) -> bool) -> Vec<Frequency> {
    pool.statistics()
        .iter()
        .enumerate()
        .map(|(i, s)| Frequency {
            statistic: i,
            name: s.name().to_string(),
            count: reps.iter().filter(|r| chosen(r, s.name())).count(),
        })
        .collect()
}

fn in_union(r: &ReplicateReport, name: &str) -> bool {
    r.per_model.iter().any(|m| m.statistics.iter().any(|n| n == name))
}

fn in_final(r: &ReplicateReport, name: &str) -> bool {
    r.selected.as_ref().is_some_and(|sel| sel.iter().any(|n| n == name))
}

fn aggregate(ctx: &Context, reps: &[ReplicateReport], table_simulations: u64) -> Aggregate {
    let frequencies = tally(&ctx.pool, reps, in_final);
    let joint = reps.iter().any(|r| !r.per_model.is_empty());
    let (parameter_frequencies, additional_frequencies) = if joint {
        (
            tally(&ctx.pool, reps, in_union),
            tally(&ctx.pool, reps, |r, n| in_final(r, n) && !in_union(r, n)),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let mut bf_correlations: Vec<BfCorrelation> = Vec::new();
    if let Some(first) = reps.iter().find(|r| !r.bayes_factors.is_empty()) {
        for (k, rec) in first.bayes_factors.iter().enumerate() {
            let pairs: Vec<(f64, f64)> = reps
                .iter()
                .filter_map(|r| r.bayes_factors.get(k))
                .map(|b| (b.log_bf_true, b.log_bf_abc))
                .collect();
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            bf_correlations.push(BfCorrelation {
                statistics: rec.statistics.clone(),
                pearson: pearson(&x, &y),
                replicates: pairs.len(),
            });
        }
    }
    let check_passed = (ctx.spec.kind == ExperimentKind::PosteriorCheck)
        .then(|| reps.iter().filter(|r| r.check.as_ref().is_some_and(|c| c.passed)).count());
    Aggregate {
        replicates: reps.len(),
        failed: reps.iter().filter(|r| r.error.is_some()).count(),
        frequencies,
        parameter_frequencies,
        additional_frequencies,
        bf_correlations,
        check_passed,
        abc_runs: reps.iter().map(|r| r.abc.runs).sum(),
        simulations: if ctx.spec.backend.kind == BackendKind::Tables {
            0
        } else {
            reps.iter().map(|r| r.abc.proposals).sum()
        },
        table_simulations,
        distance_scales: None,
    }
}

pub fn write_outputs(report: &RunReport, outdir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(outdir).map_err(|e| CliError::io(format!("creating {}", outdir.display()), e))?;
    let json = serde_json::to_string_pretty(report)?;
    let path = outdir.join("report.json");
    fs::write(&path, json + "\n").map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;

    let a = &report.aggregate;
    write_frequencies(&outdir.join("frequencies.csv"), &a.frequencies, a.replicates)?;
    if !a.parameter_frequencies.is_empty() {
        write_frequencies(&outdir.join("frequencies_parameters.csv"), &a.parameter_frequencies, a.replicates)?;
        write_frequencies(&outdir.join("frequencies_additional.csv"), &a.additional_frequencies, a.replicates)?;
    }

    if report.replicates.iter().any(|r| !r.bayes_factors.is_empty()) {
        let mut w = csv::Writer::from_path(outdir.join("bf_scatter.csv"))?;
        w.write_record(["replicate", "log_bf_true", "log_bf_abc", "statistics"])?;
        for r in &report.replicates {
            for b in &r.bayes_factors {
                w.write_record([
                    r.replicate.to_string(),
                    b.log_bf_true.to_string(),
                    b.log_bf_abc.to_string(),
                    b.statistics.join("+"),
                ])?;
            }
        }
        w.flush().map_err(|e| CliError::io("writing bf_scatter.csv", e))?;
    }
    Ok(())
}

fn write_frequencies(path: &Path, table: &[Frequency], r: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["statistic", "name", "count", "R"])?;
    for f in table {
        w.write_record([f.statistic.to_string(), f.name.clone(), f.count.to_string(), r.to_string()])?;
    }
    w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn read_report(path: &Path) -> Result<RunReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    Ok(serde_json::from_str(&text)?)
}
