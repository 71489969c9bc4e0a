//! Run orchestration: construct, classify, update, record.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{self, Boundary, ClassifierKind, MedianRule, Partition};
use crate::colony::{self, ChoiceTable, Params, PheromoneField, TourRecord, Variant};
use crate::error::{Error, Result};
use crate::tsplib::{Instance, Length};
use crate::update::{self, EliteTarget, PunishRankScope};

/// Behavioural switches and constants that are not part of [`Params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    pub boundary: Boundary,
    pub median_rule: MedianRule,
    pub elite_target: EliteTarget,
    pub punish_scope: PunishRankScope,
    pub floor: f64,
    /// Branching-factor cut position.
    pub lambda: f64,
    /// Smoothing strength.
    pub smoothing_delta: f64,
    /// Smooth once the average branching factor drops below this.
    pub smoothing_trigger: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            boundary: Boundary::default(),
            median_rule: MedianRule::default(),
            elite_target: EliteTarget::default(),
            punish_scope: PunishRankScope::default(),
            floor: colony::DEFAULT_FLOOR,
            lambda: 0.05,
            smoothing_delta: 0.5,
            smoothing_trigger: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Instance name or path, echoed into results.
    pub instance: String,
    pub variant: Variant,
    pub classifier: Option<ClassifierKind>,
    pub params: Params,
    pub seed: u64,
    pub stop_at_optimum: bool,
    pub optimum: Option<Length>,
    #[serde(default)]
    pub options: Options,
}

impl RunConfig {
    /// A config with default parameters and the per-instance ant count.
    pub fn new(inst: &Instance, variant: Variant, classifier: Option<ClassifierKind>) -> Self {
        RunConfig {
            instance: inst.name().to_string(),
            variant,
            classifier,
            params: Params {
                num_ants: default_ants(inst.name(), inst.dimension()),
                ..Params::default()
            },
            seed: 0,
            stop_at_optimum: false,
            optimum: inst.optimum(),
            options: Options::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        match (self.variant.is_dynamic(), self.classifier) {
            (true, None) => {
                return Err(Error::Config(format!(
                    "variant {} needs a classifier",
                    self.variant
                )))
            }
            (false, Some(k)) => {
                return Err(Error::Config(format!(
                    "classifier {k} requires a dynamic variant, not {}",
                    self.variant
                )))
            }
            _ => {}
        }
        let o = &self.options;
        if !(o.floor > 0.0) {
            return Err(Error::Config("pheromone floor must be positive".into()));
        }
        if !(o.lambda > 0.0 && o.lambda < 1.0) {
            return Err(Error::Config("lambda must lie in (0, 1)".into()));
        }
        if !(o.smoothing_delta > 0.0 && o.smoothing_delta <= 1.0) {
            return Err(Error::Config("smoothing delta must lie in (0, 1]".into()));
        }
        if self.variant == Variant::Mmas && self.params.rho >= 1.0 {
            return Err(Error::Config("MMAS needs rho < 1".into()));
        }
        Ok(())
    }

    /// Table-style label such as `DEAMed_pun` or `MMAS+IB+PTS`.
    pub fn label(&self) -> String {
        algorithm_label(self.variant, self.classifier)
    }
}

pub fn algorithm_label(variant: Variant, classifier: Option<ClassifierKind>) -> String {
    let suffix = classifier.map_or("", ClassifierKind::label_suffix);
    match variant {
        Variant::As => "AS".into(),
        Variant::Ea => "EA".into(),
        Variant::Ra => "RA".into(),
        Variant::Mmas => "MMAS+IB+PTS".into(),
        Variant::Dea => format!("DEA{suffix}"),
        Variant::Dra => format!("DRA{suffix}"),
        Variant::DeaPun => format!("DEA{suffix}_pun"),
        Variant::DraPun => format!("DRA{suffix}_pun"),
    }
}

/// Default colony size per instance; unknown instances get
/// `max(10, n/10)` rounded to a multiple of ten.
pub fn default_ants(name: &str, n: usize) -> usize {
    match name.to_ascii_lowercase().as_str() {
        "bays29" | "att48" | "st70" | "eil76" => 10,
        "eil51" | "kroa100" => 20,
        "kroa200" | "lin318" => 30,
        _ => {
            let raw = (n / 10).max(10);
            ((raw + 5) / 10 * 10).max(10)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub index: usize,
    pub best: Length,
    pub threshold: Option<f64>,
    pub elite_count: usize,
    pub best_so_far: Length,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    OptimumReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub best_tour: Vec<usize>,
    pub best_length: Length,
    pub iterations: usize,
    pub trace: Vec<IterationStats>,
    pub termination: Termination,
}

impl RunResult {
    pub fn label(&self) -> String {
        self.config.label()
    }

    pub fn iteration_bests(&self) -> Vec<Length> {
        self.trace.iter().map(|s| s.best).collect()
    }

    pub fn elite_counts(&self) -> Vec<usize> {
        self.trace.iter().map(|s| s.elite_count).collect()
    }
}

/// Mutable state of one run.
pub struct Colony<'a> {
    inst: &'a Instance,
    config: RunConfig,
    tau: PheromoneField,
    rng: ChaCha8Rng,
    best_so_far: Option<TourRecord>,
    iteration: usize,
}

impl<'a> Colony<'a> {
    pub fn new(inst: &'a Instance, config: RunConfig) -> Result<Self> {
        config.validate()?;
        let tau = colony::init_pheromone(inst, &config.params, config.variant, config.options.floor)?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Colony {
            inst,
            config,
            tau,
            rng,
            best_so_far: None,
            iteration: 0,
        })
    }

    pub fn pheromone(&self) -> &PheromoneField {
        &self.tau
    }

    pub fn best_so_far(&self) -> Option<&TourRecord> {
        self.best_so_far.as_ref()
    }

    /// Builds one tour per ant; start cities are drawn uniformly with replacement.
    pub fn construct_tours(&mut self) -> Result<Vec<TourRecord>> {
        let table = ChoiceTable::new(&self.tau, self.inst, &self.config.params);
        let n = self.inst.dimension();
        (0..self.config.params.num_ants)
            .map(|_| {
                let start = self.rng.random_range(0..n);
                table.construct(&mut self.rng, start, self.inst)
            })
            .collect()
    }

    pub fn run_iteration(&mut self) -> Result<IterationStats> {
        let mut tours = self.construct_tours()?;
        let ib = update::rank_order(&tours)[0];
        let improved = self
            .best_so_far
            .as_ref()
            .is_none_or(|b| tours[ib].length < b.length);
        if improved {
            self.best_so_far = Some(tours[ib].clone());
        }
        let best = self.best_so_far.clone().expect("set above");

        let params = &self.config.params;
        let opts = &self.config.options;
        let mut threshold_value = None;
        let mut branching = None;
        let elite_count;

        match self.config.variant {
            Variant::As => {
                update::evaporate(&mut self.tau, params.rho);
                update::as_deposit(&mut self.tau, &tours, params.q_deposit);
                elite_count = tours.len();
            }
            Variant::Ea => {
                let e = params.static_elite_count();
                update::evaporate(&mut self.tau, params.rho);
                update::as_deposit(&mut self.tau, &tours, params.q_deposit);
                update::elitist_bonus_static(&mut self.tau, &best, e, params.q_deposit);
                elite_count = e;
            }
            Variant::Ra => {
                let sigma = params.static_elite_count();
                update::evaporate(&mut self.tau, params.rho);
                update::as_deposit(&mut self.tau, &tours, params.q_deposit);
                update::rank_update_static(&mut self.tau, &tours, sigma, params.q_deposit, &best)?;
                elite_count = sigma;
            }
            Variant::Mmas => {
                if improved {
                    let bounds = colony::mmas_bounds(self.inst.dimension(), params.rho, best.length)?;
                    self.tau.set_bounds(Some(bounds));
                }
                update::evaporate(&mut self.tau, params.rho);
                update::mmas_update(&mut self.tau, &tours[ib])?;
                let bf = update::average_branching_factor(&self.tau, opts.lambda);
                if bf < opts.smoothing_trigger {
                    let (_, tau_max) = self.tau.bounds().expect("MMAS field is bounded");
                    update::smooth_trails(&mut self.tau, opts.smoothing_delta, tau_max);
                }
                branching = Some(bf);
                elite_count = 1;
            }
            variant => {
                let kind = self.config.classifier.expect("validated");
                let lengths: Vec<Length> = tours.iter().map(|t| t.length).collect();
                let threshold = classify::threshold(kind, &lengths, opts.median_rule)?;
                let Partition { elite, non_elite } =
                    classify::classify(&mut tours, &threshold, opts.boundary);
                threshold_value = Some(threshold.value);
                elite_count = elite.len();

                update::evaporate(&mut self.tau, params.rho);
                update::as_deposit(&mut self.tau, &tours, params.q_deposit);
                let elite_tours: Vec<&TourRecord> = elite.iter().map(|&k| &tours[k]).collect();
                if variant.is_rank_based() {
                    update::dynamic_rank_update(&mut self.tau, &elite_tours, params.q_deposit, &best);
                } else {
                    update::dynamic_elitist_update(
                        &mut self.tau,
                        &elite_tours,
                        params.q_deposit,
                        opts.elite_target,
                        &best,
                    );
                }
                if variant.punishes() {
                    if variant.is_rank_based() {
                        update::punish_rank(&mut self.tau, &tours, params.q_punish, opts.punish_scope);
                    } else {
                        let losers: Vec<&TourRecord> =
                            non_elite.iter().map(|&k| &tours[k]).collect();
                        update::punish_elitist(&mut self.tau, &losers, elite_count, params.q_punish);
                    }
                }
            }
        }

        self.check_field()?;
        let stats = IterationStats {
            index: self.iteration,
            best: tours[ib].length,
            threshold: threshold_value,
            elite_count,
            best_so_far: best.length,
            branching,
        };
        self.iteration += 1;
        Ok(stats)
    }

    fn check_field(&self) -> Result<()> {
        let lo = self.tau.lower_limit();
        let min = self.tau.min_off_diagonal();
        if !(min >= lo) {
            return Err(Error::Invariant(format!(
                "iteration {}: trail {min} below limit {lo}",
                self.iteration
            )));
        }
        if let Some((_, hi)) = self.tau.bounds() {
            let max = self.tau.max_off_diagonal();
            if max > hi {
                return Err(Error::Invariant(format!(
                    "iteration {}: trail {max} above tau_max {hi}",
                    self.iteration
                )));
            }
        }
        Ok(())
    }

    pub fn run(mut self) -> Result<RunResult> {
        let mut trace = Vec::with_capacity(self.config.params.max_iterations);
        let mut termination = Termination::MaxIterations;
        let target = self.config.optimum.filter(|_| self.config.stop_at_optimum);
        for _ in 0..self.config.params.max_iterations {
            let stats = self.run_iteration()?;
            let done = target.is_some_and(|opt| stats.best_so_far <= opt);
            trace.push(stats);
            if done {
                termination = Termination::OptimumReached;
                break;
            }
        }
        let best = self.best_so_far.expect("at least one iteration ran");
        Ok(RunResult {
            config: self.config,
            best_tour: best.perm,
            best_length: best.length,
            iterations: trace.len(),
            trace,
            termination,
        })
    }
}

/// Executes one seeded run to completion.
pub fn run(inst: &Instance, config: &RunConfig) -> Result<RunResult> {
    Colony::new(inst, config.clone())?.run()
}

/// Executes every config, possibly in parallel; results keep input order.
pub fn sweep(inst: &Instance, configs: &[RunConfig]) -> Vec<Result<RunResult>> {
    configs.par_iter().map(|c| run(inst, c)).collect()
}

/// `count` copies of `base` seeded `seed_base + index`.
pub fn seeded(base: &RunConfig, count: usize, seed_base: u64) -> Vec<RunConfig> {
    (0..count)
        .map(|k| RunConfig {
            seed: seed_base.wrapping_add(k as u64),
            ..base.clone()
        })
        .collect()
}

/// Cartesian product of exponent and persistence values over `base`.
pub fn param_grid(base: &RunConfig, alphas: &[f64], betas: &[f64], rhos: &[f64]) -> Vec<RunConfig> {
    let mut out = Vec::with_capacity(alphas.len() * betas.len() * rhos.len());
    for &alpha in alphas {
        for &beta in betas {
            for &rho in rhos {
                let mut c = base.clone();
                c.params.alpha = alpha;
                c.params.beta = beta;
                c.params.rho = rho;
                out.push(c);
            }
        }
    }
    out
}
