//! Pheromone update rules.
//!
//! Every rule mutates a run-owned [`PheromoneField`] in place and touches
//! both orientations of each edge, so symmetry is preserved. Subtractive
//! rules and evaporation clamp to the field's lower limit.

use serde::{Deserialize, Serialize};

use crate::colony::{PheromoneField, TourRecord};
use crate::error::{Error, Result};

/// Where a dynamic elitist ant lays its extra deposit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EliteTarget {
    #[default]
    OwnTour,
    BestSoFar,
}

/// How the rank index `k` of the rank-based punishment is counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PunishRankScope {
    /// `k` is the 1-based rank among all ants of the iteration.
    #[default]
    AllAnts,
    /// `k` is the 1-based rank among the non-performing ants only.
    NonElite,
}

fn deposit_on(tau: &mut PheromoneField, tour: &TourRecord, amount: f64) {
    for (i, j) in tour.edges() {
        tau.add(i, j, amount);
    }
}

fn withdraw_from(tau: &mut PheromoneField, tour: &TourRecord, amount: f64) {
    let lo = tau.lower_limit();
    for (i, j) in tour.edges() {
        let v = (tau.get(i, j) - amount).max(lo);
        tau.set(i, j, v);
    }
}

/// Indices of `tours` sorted by ascending length, ties by index.
pub fn rank_order(tours: &[TourRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tours.len()).collect();
    order.sort_by_key(|&k| (tours[k].length, k));
    order
}

/// Multiplies every trail by the persistence `rho`, then clamps to the lower limit.
pub fn evaporate(tau: &mut PheromoneField, rho: f64) {
    let lo = tau.lower_limit();
    tau.for_each_edge_mut(|t| *t = (*t * rho).max(lo));
}

/// Ant System deposit: ant `k` adds `Q / L_k` on each of its edges.
pub fn as_deposit(tau: &mut PheromoneField, tours: &[TourRecord], q: f64) {
    for tour in tours {
        deposit_on(tau, tour, q / tour.length as f64);
    }
}

/// Elitist bonus `e * Q / L*` on the best-so-far tour.
pub fn elitist_bonus_static(tau: &mut PheromoneField, best_so_far: &TourRecord, e: usize, q: f64) {
    if e == 0 {
        return;
    }
    deposit_on(tau, best_so_far, e as f64 * q / best_so_far.length as f64);
}

/// Rank-based update over the `sigma - 1` best tours plus `sigma * Q / L*`
/// on the best-so-far tour.
pub fn rank_update_static(
    tau: &mut PheromoneField,
    tours: &[TourRecord],
    sigma: usize,
    q: f64,
    best_so_far: &TourRecord,
) -> Result<()> {
    if sigma > tours.len() {
        return Err(Error::Config(format!(
            "rank update needs sigma <= m, got sigma = {sigma} with {} ants",
            tours.len()
        )));
    }
    let order = rank_order(tours);
    let ranked: Vec<&TourRecord> = order.iter().map(|&k| &tours[k]).collect();
    ranked_deposit(tau, &ranked, sigma, q, best_so_far);
    Ok(())
}

/// Shared by the static and dynamic rank rules. `ranked` is sorted best first.
fn ranked_deposit(
    tau: &mut PheromoneField,
    ranked: &[&TourRecord],
    sigma: usize,
    q: f64,
    best_so_far: &TourRecord,
) {
    for (idx, tour) in ranked.iter().take(sigma.saturating_sub(1)).enumerate() {
        let mu = idx + 1;
        deposit_on(tau, tour, (sigma - mu) as f64 * q / tour.length as f64);
    }
    deposit_on(tau, best_so_far, sigma as f64 * q / best_so_far.length as f64);
}

/// Iteration-best deposit `1 / L_ib` followed by clamping into `[tau_min, tau_max]`.
///
/// Evaporation is the caller's job.
pub fn mmas_update(tau: &mut PheromoneField, iteration_best: &TourRecord) -> Result<()> {
    if tau.bounds().is_none() {
        return Err(Error::Config("MMAS update needs trail limits".into()));
    }
    deposit_on(tau, iteration_best, 1.0 / iteration_best.length as f64);
    tau.clamp_all();
    Ok(())
}

/// Number of edges leaving `node` whose trail exceeds
/// `min + lambda * (max - min)` over that node's edges.
///
/// A node whose edges all carry the same trail reports 1.
pub fn branching_factor(tau: &PheromoneField, node: usize, lambda: f64) -> usize {
    let n = tau.dimension();
    let values = (0..n).filter(|&j| j != node).map(|j| tau.get(node, j));
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    if lo == hi {
        return 1;
    }
    let cut = lo + lambda * (hi - lo);
    values.filter(|&t| t > cut).count()
}

/// Mean branching factor over all nodes, halved because every tour uses two
/// edges at each node. A converged colony reads 1.
pub fn average_branching_factor(tau: &PheromoneField, lambda: f64) -> f64 {
    let n = tau.dimension();
    let total: usize = (0..n).map(|node| branching_factor(tau, node, lambda)).sum();
    total as f64 / (2.0 * n as f64)
}

/// Moves every trail a fraction `delta` of the way to `tau_max`.
pub fn smooth_trails(tau: &mut PheromoneField, delta: f64, tau_max: f64) {
    tau.for_each_edge_mut(|t| *t += delta * (tau_max - *t));
}

/// Dynamic elitist reinforcement: with `e = |elite|`, each elite ant adds
/// `e * Q / L_k`, on its own tour or on the best-so-far tour.
pub fn dynamic_elitist_update(
    tau: &mut PheromoneField,
    elite: &[&TourRecord],
    q: f64,
    target: EliteTarget,
    best_so_far: &TourRecord,
) {
    let e = elite.len() as f64;
    for tour in elite {
        let amount = e * q / tour.length as f64;
        match target {
            EliteTarget::OwnTour => deposit_on(tau, tour, amount),
            EliteTarget::BestSoFar => deposit_on(tau, best_so_far, amount),
        }
    }
}

/// Dynamic rank reinforcement: the rank update with `sigma = |elite|`.
pub fn dynamic_rank_update(
    tau: &mut PheromoneField,
    elite: &[&TourRecord],
    q: f64,
    best_so_far: &TourRecord,
) {
    let mut ranked = elite.to_vec();
    // stable sort keeps ant order among equal lengths
    ranked.sort_by_key(|t| t.length);
    ranked_deposit(tau, &ranked, ranked.len(), q, best_so_far);
}

/// Elitist punishment: each non-performing ant removes `e * Q* / L_k` from its edges.
pub fn punish_elitist(tau: &mut PheromoneField, non_elite: &[&TourRecord], e: usize, q_star: f64) {
    if q_star == 0.0 || e == 0 {
        return;
    }
    for tour in non_elite {
        withdraw_from(tau, tour, e as f64 * q_star / tour.length as f64);
    }
}

/// Rank punishment: a non-performing ant at rank `k` removes `Q* (m - k) / L_k`.
pub fn punish_rank(
    tau: &mut PheromoneField,
    tours: &[TourRecord],
    q_star: f64,
    scope: PunishRankScope,
) {
    if q_star == 0.0 {
        return;
    }
    let m = tours.len();
    let order = rank_order(tours);
    let mut non_elite_rank = 0;
    for (idx, &k) in order.iter().enumerate() {
        let tour = &tours[k];
        if tour.elite {
            continue;
        }
        non_elite_rank += 1;
        let rank = match scope {
            PunishRankScope::AllAnts => idx + 1,
            PunishRankScope::NonElite => non_elite_rank,
        };
        let weight = (m - rank) as f64;
        if weight > 0.0 {
            withdraw_from(tau, tour, q_star * weight / tour.length as f64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colony::DEFAULT_FLOOR;

    fn tour(perm: &[usize], length: u64) -> TourRecord {
        TourRecord {
            perm: perm.to_vec(),
            length,
            elite: false,
        }
    }

    fn field(n: usize, v: f64) -> PheromoneField {
        PheromoneField::uniform(n, v, DEFAULT_FLOOR)
    }

    fn on_tour(t: &TourRecord, i: usize, j: usize) -> bool {
        t.edges().any(|(a, b)| (a, b) == (i, j) || (a, b) == (j, i))
    }

    #[test]
    fn evaporation_identity_and_scalar() {
        let mut f = field(4, 2.0);
        evaporate(&mut f, 1.0);
        assert_eq!(f, field(4, 2.0));
        evaporate(&mut f, 0.7);
        assert!(f.edges().all(|(_, _, t)| (t - 1.4).abs() < 1e-15));
    }

    #[test]
    fn evaporation_stops_at_floor() {
        let mut f = field(4, 1.0);
        for _ in 0..200 {
            evaporate(&mut f, 0.7);
            assert!(f.min_off_diagonal() >= DEFAULT_FLOOR);
        }
        assert!(f.edges().all(|(_, _, t)| t == DEFAULT_FLOOR));
    }

    #[test]
    fn evaporation_respects_tau_min() {
        let mut f = field(4, 1.0).with_bounds(0.25, 1.0);
        for _ in 0..50 {
            evaporate(&mut f, 0.5);
        }
        assert!(f.edges().all(|(_, _, t)| t == 0.25));
    }

    #[test]
    fn as_deposit_single_and_double() {
        let t = tour(&[0, 1, 2, 3], 8);
        let mut f = field(4, 0.0);
        as_deposit(&mut f, std::slice::from_ref(&t), 4.0);
        for (i, j, v) in f.edges() {
            assert_eq!(v, if on_tour(&t, i, j) { 0.5 } else { 0.0 });
        }
        let mut g = field(4, 0.0);
        as_deposit(&mut g, &[t.clone(), t.clone()], 4.0);
        assert_eq!(g.get(0, 1), 1.0);
        assert_eq!(g.get(1, 0), 1.0);
        assert_eq!(g.get(0, 2), 0.0);
    }

    #[test]
    fn elitist_bonus_arithmetic() {
        let best = tour(&[0, 2, 1, 3, 4], 250);
        let mut f = field(5, 1.0);
        elitist_bonus_static(&mut f, &best, 0, 100.0);
        assert_eq!(f, field(5, 1.0));
        elitist_bonus_static(&mut f, &best, 5, 100.0);
        for (i, j, v) in f.edges() {
            let expected = if on_tour(&best, i, j) { 3.0 } else { 1.0 };
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_static_sigma_one_is_best_only() {
        let tours = vec![tour(&[0, 1, 2, 3], 20), tour(&[0, 2, 1, 3], 10)];
        let best = tour(&[0, 3, 1, 2], 5);
        let mut f = field(4, 0.0);
        rank_update_static(&mut f, &tours, 1, 1.0, &best).unwrap();
        for (i, j, v) in f.edges() {
            assert_eq!(v, if on_tour(&best, i, j) { 0.2 } else { 0.0 });
        }
    }

    #[test]
    fn rank_static_weights() {
        // sigma = 3, Q = 1, ranked [10, 20]: rank-1 deposits 2/10, rank-2 deposits 1/20
        let a = tour(&[0, 1, 2, 3, 4], 20);
        let b = tour(&[0, 2, 4, 1, 3], 10);
        let c = tour(&[0, 3, 1, 4, 2], 40);
        let best = tour(&[0, 4, 3, 2, 1], 1000);
        let mut f = field(5, 0.0);
        rank_update_static(&mut f, &[a.clone(), b.clone(), c.clone()], 3, 1.0, &best).unwrap();
        for (i, j, v) in f.edges() {
            let mut want = 0.0;
            if on_tour(&b, i, j) {
                want += 0.2;
            }
            if on_tour(&a, i, j) {
                want += 0.05;
            }
            if on_tour(&best, i, j) {
                want += 3.0 / 1000.0;
            }
            assert!((v - want).abs() < 1e-12, "edge ({i},{j}) {v} vs {want}");
        }
    }

    #[test]
    fn rank_static_rejects_sigma_above_m() {
        let tours = vec![tour(&[0, 1, 2], 3)];
        let mut f = field(3, 1.0);
        assert!(rank_update_static(&mut f, &tours, 2, 1.0, &tours[0]).is_err());
    }

    #[test]
    fn mmas_clamps_to_tau_max() {
        let t = tour(&[0, 1, 2, 3], 2);
        let mut f = field(4, 0.9).with_bounds(0.1, 1.0);
        mmas_update(&mut f, &t).unwrap();
        for (i, j, v) in f.edges() {
            assert_eq!(v, if on_tour(&t, i, j) { 1.0 } else { 0.9 });
        }
    }

    #[test]
    fn mmas_from_floor_is_local() {
        let t = tour(&[0, 1, 2, 3], 100);
        let mut f = field(4, 0.1).with_bounds(0.1, 1.0);
        mmas_update(&mut f, &t).unwrap();
        for (i, j, v) in f.edges() {
            assert_eq!(v > 0.1, on_tour(&t, i, j));
        }
    }

    #[test]
    fn mmas_needs_bounds() {
        let t = tour(&[0, 1, 2], 3);
        assert!(mmas_update(&mut field(3, 1.0), &t).is_err());
    }

    #[test]
    fn repeated_ib_update_reaches_fixed_point() {
        let t = tour(&[0, 2, 4, 1, 3, 5], 60);
        let rho = 0.9;
        let tau_max = 1.0 / ((1.0 - rho) * 60.0);
        let tau_min = tau_max / 12.0;
        let mut f = field(6, 0.5 * tau_max).with_bounds(tau_min, tau_max);
        for _ in 0..10_000 {
            evaporate(&mut f, rho);
            mmas_update(&mut f, &t).unwrap();
        }
        for (i, j, v) in f.edges() {
            let want = if on_tour(&t, i, j) { tau_max } else { tau_min };
            assert!((v - want).abs() < 1e-12, "({i},{j}) {v} vs {want}");
        }
    }

    #[test]
    fn branching_factor_examples() {
        let mut f = field(4, 1.0);
        f.set(0, 3, 10.0);
        // node 0 sees [1, 1, 10]; cut = 1.45
        assert_eq!(branching_factor(&f, 0, 0.05), 1);
        // all equal reports 1
        let g = field(4, 2.0);
        assert_eq!(branching_factor(&g, 2, 0.05), 1);
    }

    #[test]
    fn converged_field_averages_one() {
        let t = tour(&[0, 1, 2, 3, 4, 5], 6);
        let mut f = field(6, 0.01);
        for (i, j) in t.edges() {
            f.set(i, j, 1.0);
        }
        assert_eq!(average_branching_factor(&f, 0.05), 1.0);
    }

    #[test]
    fn smoothing_examples() {
        let mut f = field(4, 0.2);
        f.set(0, 1, 1.0);
        let mut full = f.clone();
        smooth_trails(&mut full, 1.0, 1.0);
        assert!(full.edges().all(|(_, _, t)| t == 1.0));
        smooth_trails(&mut f, 0.5, 1.0);
        assert!((f.get(0, 2) - 0.6).abs() < 1e-15);
        assert_eq!(f.get(0, 1), 1.0);
    }

    #[test]
    fn dynamic_elitist_arithmetic() {
        let t = tour(&[0, 1, 2, 3], 500);
        let others: Vec<TourRecord> = (0..3).map(|_| tour(&[0, 2, 1, 3], 900)).collect();
        let best = tour(&[0, 3, 2, 1], 400);
        let mut f = field(4, 0.0);
        let elite: Vec<&TourRecord> = std::iter::once(&t).chain(others.iter()).collect();
        dynamic_elitist_update(&mut f, &elite[..1], 100.0, EliteTarget::OwnTour, &best);
        assert!((f.get(0, 1) - 0.2).abs() < 1e-15);
        assert_eq!(f.get(0, 2), 0.0);

        let mut g = field(4, 0.0);
        dynamic_elitist_update(&mut g, &elite[..1], 100.0, EliteTarget::BestSoFar, &best);
        assert!((g.get(0, 3) - 0.2).abs() < 1e-15);
        assert!((g.get(0, 1) - 0.2).abs() < 1e-15);
        assert_eq!(g.get(0, 2), 0.0);
    }

    #[test]
    fn dynamic_elitist_four_ants() {
        // e = 4, Q = 100, L = 500 gives 0.8 each
        let elite_tours = vec![
            tour(&[0, 1, 2, 3, 4], 500),
            tour(&[0, 1, 2, 3, 4], 500),
            tour(&[0, 1, 2, 3, 4], 500),
            tour(&[0, 1, 2, 3, 4], 500),
        ];
        let elite: Vec<&TourRecord> = elite_tours.iter().collect();
        let mut f = field(5, 0.0);
        dynamic_elitist_update(&mut f, &elite[..1], 100.0, EliteTarget::OwnTour, &elite_tours[0]);
        dynamic_elitist_update(&mut f, &elite, 100.0, EliteTarget::OwnTour, &elite_tours[0]);
        // first call: e = 1 gives 0.2; second: 4 ants times 0.8
        assert!((f.get(0, 1) - (0.2 + 3.2)).abs() < 1e-12);
        assert_eq!(f.get(0, 2), 0.0);
    }

    #[test]
    fn dynamic_rank_weights() {
        let a = tour(&[0, 1, 2, 3, 4], 30);
        let b = tour(&[0, 2, 4, 1, 3], 10);
        let c = tour(&[0, 3, 1, 4, 2], 20);
        let best = tour(&[0, 4, 3, 2, 1], 9);
        let mut f = field(5, 0.0);
        dynamic_rank_update(&mut f, &[&a, &b, &c], 1.0, &best);
        for (i, j, v) in f.edges() {
            let mut want = 0.0;
            if on_tour(&b, i, j) {
                want += 2.0 / 10.0;
            }
            if on_tour(&c, i, j) {
                want += 1.0 / 20.0;
            }
            if on_tour(&best, i, j) {
                want += 3.0 / 9.0;
            }
            assert!((v - want).abs() < 1e-12);
        }
        // sigma = 1 leaves only the best-so-far term
        let mut g = field(5, 0.0);
        dynamic_rank_update(&mut g, &[&a], 1.0, &best);
        for (i, j, v) in g.edges() {
            let want = if on_tour(&best, i, j) { 1.0 / 9.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn elitist_punishment() {
        let t = tour(&[0, 1, 2, 3], 100);
        let mut f = field(4, 1.0);
        punish_elitist(&mut f, &[&t], 2, 0.0);
        assert_eq!(f, field(4, 1.0));
        punish_elitist(&mut f, &[&t], 2, 10.0);
        assert!((f.get(0, 1) - 0.8).abs() < 1e-15);
        assert_eq!(f.get(0, 2), 1.0);

        let mut low = field(4, DEFAULT_FLOOR);
        punish_elitist(&mut low, &[&t], 2, 10.0);
        assert!(low.edges().all(|(_, _, v)| v == DEFAULT_FLOOR));
    }

    #[test]
    fn rank_punishment() {
        // m = 5; the non-elite ant at overall rank 3 has length 50 and loses 10 * 2 / 50
        let mut tours = vec![
            tour(&[0, 1, 2, 3, 4], 10),
            tour(&[0, 1, 2, 3, 4], 20),
            tour(&[0, 2, 4, 1, 3], 50),
            tour(&[0, 1, 2, 3, 4], 60),
            tour(&[0, 3, 1, 4, 2], 70),
        ];
        tours[0].elite = true;
        tours[1].elite = true;
        let mut f = field(5, 1.0);
        punish_rank(&mut f, &tours[..3], 10.0, PunishRankScope::AllAnts);
        // only three ants here: rank 3 of m = 3 has zero weight
        assert_eq!(f, field(5, 1.0));

        let mut only_third = tours.clone();
        only_third[3].elite = true;
        only_third[4].elite = true;
        punish_rank(&mut f, &only_third, 10.0, PunishRankScope::AllAnts);
        for (i, j, v) in f.edges() {
            let want = if on_tour(&tours[2], i, j) { 0.6 } else { 1.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn worst_ant_is_never_punished() {
        let mut tours = vec![tour(&[0, 1, 2, 3], 10), tour(&[0, 2, 1, 3], 90)];
        tours[0].elite = true;
        let mut f = field(4, 1.0);
        punish_rank(&mut f, &tours, 10.0, PunishRankScope::AllAnts);
        assert_eq!(f, field(4, 1.0));
        // counted within the non-elite class the same ant has rank 1 of m = 2
        punish_rank(&mut f, &tours, 10.0, PunishRankScope::NonElite);
        assert!((f.get(0, 2) - (1.0 - 10.0 / 90.0)).abs() < 1e-12);
    }
}
