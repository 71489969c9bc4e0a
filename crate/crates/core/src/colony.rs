//! Solution construction shared by every algorithm variant.
//!
//! Ants move with probability proportional to `tau^alpha * eta^beta`
//! over unvisited cities, where `eta = 1 / distance`. All randomness flows
//! through a caller-owned RNG: one uniform draw picks the start city and one
//! uniform draw is spent per construction step, ant by ant.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tsplib::{Instance, Length};

/// Default non-negativity floor for AS-family trails.
pub const DEFAULT_FLOOR: f64 = 1e-7;

/// The pheromone-update family a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    As,
    Ea,
    Ra,
    Mmas,
    Dea,
    Dra,
    DeaPun,
    DraPun,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::As,
        Variant::Ea,
        Variant::Ra,
        Variant::Mmas,
        Variant::Dea,
        Variant::Dra,
        Variant::DeaPun,
        Variant::DraPun,
    ];

    /// Dynamic variants pick their elite ants with a statistical classifier.
    pub fn is_dynamic(self) -> bool {
        matches!(
            self,
            Variant::Dea | Variant::Dra | Variant::DeaPun | Variant::DraPun
        )
    }

    pub fn punishes(self) -> bool {
        matches!(self, Variant::DeaPun | Variant::DraPun)
    }

    pub fn is_rank_based(self) -> bool {
        matches!(self, Variant::Ra | Variant::Dra | Variant::DraPun)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::As => "as",
            Variant::Ea => "ea",
            Variant::Ra => "ra",
            Variant::Mmas => "mmas",
            Variant::Dea => "dea",
            Variant::Dra => "dra",
            Variant::DeaPun => "dea-pun",
            Variant::DraPun => "dra-pun",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

/// Numeric parameters of a colony.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
    /// Trail persistence: the fraction of pheromone kept per iteration.
    pub rho: f64,
    pub q_deposit: f64,
    pub q_punish: f64,
    pub num_ants: usize,
    pub max_iterations: usize,
    /// Fixed elite count for the static EA/RA baselines; `None` means all ants.
    pub sigma_fixed: Option<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            alpha: 1.0,
            beta: 2.0,
            rho: 0.9,
            q_deposit: 100.0,
            q_punish: 10.0,
            num_ants: 10,
            max_iterations: 5000,
            sigma_fixed: None,
        }
    }
}

impl Params {
    pub const EXPONENT_MAX: f64 = 5.0;

    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| (0.0..=Self::EXPONENT_MAX).contains(&x);
        if !in_range(self.alpha) || !in_range(self.beta) {
            return Err(Error::Config(format!(
                "alpha and beta must lie in [0, {}], got {} and {}",
                Self::EXPONENT_MAX,
                self.alpha,
                self.beta
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if !(self.q_deposit > 0.0) {
            return Err(Error::Config("Q must be positive".into()));
        }
        if !(self.q_punish >= 0.0) {
            return Err(Error::Config("Q* must be non-negative".into()));
        }
        if self.num_ants == 0 {
            return Err(Error::Config("at least one ant is required".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("at least one iteration is required".into()));
        }
        if let Some(sigma) = self.sigma_fixed {
            if sigma == 0 || sigma > self.num_ants {
                return Err(Error::Config(format!(
                    "fixed elite count {sigma} must lie in [1, {}]",
                    self.num_ants
                )));
            }
        }
        Ok(())
    }

    /// Elite count used by the static baselines.
    pub fn static_elite_count(&self) -> usize {
        self.sigma_fixed.unwrap_or(self.num_ants)
    }
}

/// Dense symmetric matrix of trail intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneField {
    n: usize,
    tau: Vec<f64>,
    bounds: Option<(f64, f64)>,
    floor: f64,
}

impl PheromoneField {
    /// Uniform off-diagonal field; the diagonal is unused and held at zero.
    pub fn uniform(n: usize, value: f64, floor: f64) -> Self {
        let mut tau = vec![value; n * n];
        for i in 0..n {
            tau[i * n + i] = 0.0;
        }
        PheromoneField {
            n,
            tau,
            bounds: None,
            floor,
        }
    }

    pub fn with_bounds(mut self, tau_min: f64, tau_max: f64) -> Self {
        self.bounds = Some((tau_min, tau_max));
        self
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    /// Writes `value` to both orientations of edge `(i, j)` without clamping.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.tau[i * self.n + j] = value;
        self.tau[j * self.n + i] = value;
    }

    /// Adds `delta` to both orientations of edge `(i, j)` without clamping.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, delta: f64) {
        self.tau[i * self.n + j] += delta;
        self.tau[j * self.n + i] += delta;
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    pub fn set_bounds(&mut self, bounds: Option<(f64, f64)>) {
        self.bounds = bounds;
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// The smallest value any edge may hold: `tau_min` when bounded, else the floor.
    pub fn lower_limit(&self) -> f64 {
        match self.bounds {
            Some((lo, _)) => lo.max(self.floor),
            None => self.floor,
        }
    }

    /// Clamps every off-diagonal entry into the active limits.
    pub fn clamp_all(&mut self) {
        let lo = self.lower_limit();
        let hi = self.bounds.map_or(f64::INFINITY, |(_, hi)| hi);
        self.for_each_edge_mut(|t| *t = t.clamp(lo, hi));
    }

    /// Raises entries below the lower limit; leaves the upper side alone.
    pub fn clamp_floor(&mut self) {
        let lo = self.lower_limit();
        self.for_each_edge_mut(|t| {
            if *t < lo {
                *t = lo
            }
        });
    }

    /// Applies `f` to every off-diagonal entry (both orientations).
    pub fn for_each_edge_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        let n = self.n;
        for (k, t) in self.tau.iter_mut().enumerate() {
            if k / n != k % n {
                f(t);
            }
        }
    }

    /// Iterates `(i, j, tau)` over the upper triangle.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(i, j, t)| self.get(j, i) == t)
    }

    pub fn min_off_diagonal(&self) -> f64 {
        self.edges().map(|(_, _, t)| t).fold(f64::INFINITY, f64::min)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        self.edges().map(|(_, _, t)| t).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One ant's completed tour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TourRecord {
    pub perm: Vec<usize>,
    pub length: Length,
    pub elite: bool,
}

impl TourRecord {
    pub fn new(inst: &Instance, perm: Vec<usize>) -> Result<Self> {
        let length = inst.tour_length(&perm)?;
        Ok(TourRecord {
            perm,
            length,
            elite: false,
        })
    }

    /// Undirected edges of the closed tour.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.perm.len();
        (0..n).map(move |k| (self.perm[k], self.perm[(k + 1) % n]))
    }
}

/// Per-iteration cache of `tau^alpha * eta^beta` for every edge.
#[derive(Debug, Clone)]
pub struct ChoiceTable {
    n: usize,
    weights: Vec<f64>,
}

impl ChoiceTable {
    pub fn new(tau: &PheromoneField, inst: &Instance, params: &Params) -> Self {
        let n = inst.dimension();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let eta = 1.0 / inst.weight(i, j) as f64;
                let w = pow(tau.get(i, j), params.alpha) * pow(eta, params.beta);
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        ChoiceTable { n, weights }
    }

    #[inline]
    fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Probability vector over all cities; zero on visited ones.
    pub fn probabilities(&self, current: usize, visited: &[bool]) -> Result<Vec<f64>> {
        let mut probs = vec![0.0; self.n];
        let mut total = 0.0;
        let mut feasible = 0usize;
        for j in 0..self.n {
            if !visited[j] && j != current {
                let w = self.weight(current, j);
                probs[j] = w;
                total += w;
                feasible += 1;
            }
        }
        if feasible == 0 {
            return Err(Error::Invariant(format!(
                "no unvisited city left when leaving city {current}"
            )));
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Invariant(format!(
                "transition weights from city {current} sum to {total}"
            )));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(probs)
    }

    /// Builds a complete tour from `start`, spending one uniform draw per step.
    pub fn construct<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        start: usize,
        inst: &Instance,
    ) -> Result<TourRecord> {
        let n = self.n;
        if start >= n {
            return Err(Error::CityOutOfRange {
                index: start,
                dimension: n,
            });
        }
        let mut visited = vec![false; n];
        let mut perm = Vec::with_capacity(n);
        visited[start] = true;
        perm.push(start);
        let mut current = start;
        for _ in 1..n {
            let draw: f64 = rng.random();
            let mut total = 0.0;
            let mut last_feasible = None;
            for j in 0..n {
                if !visited[j] {
                    total += self.weight(current, j);
                    last_feasible = Some(j);
                }
            }
            let last_feasible = last_feasible.ok_or_else(|| {
                Error::Invariant(format!("no unvisited city left when leaving city {current}"))
            })?;
            if !(total > 0.0) || !total.is_finite() {
                return Err(Error::Invariant(format!(
                    "transition weights from city {current} sum to {total}"
                )));
            }
            let target = draw * total;
            let mut acc = 0.0;
            let mut next = last_feasible;
            for j in 0..n {
                if !visited[j] {
                    acc += self.weight(current, j);
                    if acc > target {
                        next = j;
                        break;
                    }
                }
            }
            visited[next] = true;
            perm.push(next);
            current = next;
        }
        let length = inst.closed_length(&perm);
        Ok(TourRecord {
            perm,
            length,
            elite: false,
        })
    }
}

#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// Transition probabilities from `current` over the unvisited cities.
pub fn transition_probabilities(
    current: usize,
    visited: &[bool],
    tau: &PheromoneField,
    inst: &Instance,
    params: &Params,
) -> Result<Vec<f64>> {
    if current >= inst.dimension() {
        return Err(Error::CityOutOfRange {
            index: current,
            dimension: inst.dimension(),
        });
    }
    ChoiceTable::new(tau, inst, params).probabilities(current, visited)
}

/// Builds one tour by roulette-wheel sampling from `start`.
pub fn construct_tour<R: Rng + ?Sized>(
    rng: &mut R,
    start: usize,
    tau: &PheromoneField,
    inst: &Instance,
    params: &Params,
) -> Result<TourRecord> {
    ChoiceTable::new(tau, inst, params).construct(rng, start, inst)
}

/// Greedy nearest-neighbour tour length; ties go to the lowest city index.
pub fn nearest_neighbor_length(inst: &Instance, start: usize) -> Length {
    let n = inst.dimension();
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut current = start;
    let mut length = 0;
    for _ in 1..n {
        let (next, d) = (0..n)
            .filter(|&j| !visited[j])
            .map(|j| (j, inst.weight(current, j)))
            .min_by_key(|&(j, d)| (d, j))
            .expect("unvisited city remains");
        visited[next] = true;
        length += d;
        current = next;
    }
    length + inst.weight(current, start)
}

/// MMAS trail limits for a reference tour length.
pub fn mmas_bounds(n: usize, rho: f64, reference: Length) -> Result<(f64, f64)> {
    if rho >= 1.0 {
        return Err(Error::Config(
            "MMAS needs rho < 1: tau_max = 1/((1 - rho) L) is undefined otherwise".into(),
        ));
    }
    let tau_max = 1.0 / ((1.0 - rho) * reference as f64);
    Ok((tau_max / (2.0 * n as f64), tau_max))
}

/// Initial trails: `m / L_nn` for the AS family, `tau_max` with active limits for MMAS.
pub fn init_pheromone(
    inst: &Instance,
    params: &Params,
    variant: Variant,
    floor: f64,
) -> Result<PheromoneField> {
    let n = inst.dimension();
    let l_nn = nearest_neighbor_length(inst, 0);
    match variant {
        Variant::Mmas => {
            let (tau_min, tau_max) = mmas_bounds(n, params.rho, l_nn)?;
            Ok(PheromoneField::uniform(n, tau_max, floor).with_bounds(tau_min, tau_max))
        }
        _ => Ok(PheromoneField::uniform(
            n,
            params.num_ants as f64 / l_nn as f64,
            floor,
        )),
    }
}
