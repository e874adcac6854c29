//! Seeded genetic algorithm over box-bounded real parameter vectors.
//!
//! Operator suite: tournament selection (size 3), uniform crossover,
//! Gaussian mutation (log-space for rate-like genes, linear for
//! frequency-like genes), elitism. Each mutation draws its sigma
//! log-uniformly from [mutation_scale / 10^4, mutation_scale], so the same
//! population simultaneously takes exploratory jumps and sub-percent polish
//! steps; narrow spectral features leave no cost gradient beyond one
//! linewidth, and a single-scale kick distribution stalls on them. All
//! random draws come from one ChaCha stream on the calling thread in a
//! fixed order; fitness evaluation is farmed out with rayon but collected
//! in population order, so parallel evaluation cannot change the result and
//! identical (settings, seed) give bitwise-identical outcomes.
//!
//! Initialization accepts per-gene hint values (e.g. spectral peak
//! positions read off the data): most initial draws of a hinted gene start
//! near a hint instead of uniformly across the box, which puts the
//! population on the data's cost trenches from generation zero. When the
//! best cost stalls for [`RESTART_STALL`] generations the worst half of the
//! population is redrawn from that initialization distribution, undoing
//! premature collapse without touching the leaders.
//!
//! A mutation may carry a caller-supplied repair: a deterministic update of
//! companion genes that keeps a data-visible combination fixed (the fitter
//! uses it to hold dressed peak positions still while a coupling mutates,
//! turning a curved cost valley into an axis-aligned one).

use crate::error::{Error, Result};
use crate::fit::{Bounds, GaSettings, Scale};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const TOURNAMENT_SIZE: usize = 3;

/// Generations without improvement before the worst half of the population
/// is reinitialized.
const RESTART_STALL: usize = 40;

/// Per-kick sigma spans this many decades below `mutation_scale`.
const SIGMA_DECADES: f64 = 4.0;

/// Deterministic companion update applied after a gene mutates:
/// `repair(genome, gene_index, old_value)`.
pub(crate) type Repair<'a> = dyn Fn(&mut [f64], usize, f64) + Sync + 'a;

pub(crate) struct GaOutcome {
    pub best: Vec<f64>,
    pub cost: f64,
    /// Best population cost per generation, generation 0 first. Monotone
    /// non-increasing thanks to elitism.
    pub history: Vec<f64>,
}

/// Fraction of initial draws that start near a hint when hints exist.
const HINTED_FRACTION: f64 = 0.7;
/// Jitter around a hint, as a fraction of the bound span.
const HINT_JITTER: f64 = 0.01;

fn init_gene(bounds: &Bounds, hints: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    if !hints.is_empty() && rng.random::<f64>() < HINTED_FRACTION {
        let hint = hints[rng.random_range(0..hints.len())];
        let z: f64 = rng.sample(StandardNormal);
        let jittered = match bounds.scale {
            Scale::Linear => hint + HINT_JITTER * (bounds.hi - bounds.lo) * z,
            Scale::Log => hint * (HINT_JITTER * (bounds.hi / bounds.lo).ln() * z).exp(),
        };
        return jittered.clamp(bounds.lo, bounds.hi);
    }
    let u: f64 = rng.random();
    match bounds.scale {
        Scale::Linear => bounds.lo + u * (bounds.hi - bounds.lo),
        Scale::Log => (bounds.lo.ln() + u * (bounds.hi.ln() - bounds.lo.ln())).exp(),
    }
}

fn mutate_gene(x: f64, bounds: &Bounds, scale: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    let sigma = scale * 10f64.powf(-SIGMA_DECADES * u);
    let z: f64 = rng.sample(StandardNormal);
    let kicked = match bounds.scale {
        Scale::Linear => x + sigma * (bounds.hi - bounds.lo) * z,
        Scale::Log => x * (sigma * (bounds.hi / bounds.lo).ln() * z).exp(),
    };
    kicked.clamp(bounds.lo, bounds.hi)
}

/// Index of the tournament winner: lowest cost, ties to the lowest index.
fn tournament(costs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..costs.len());
    for _ in 1..TOURNAMENT_SIZE {
        let challenger = rng.random_range(0..costs.len());
        if costs[challenger].total_cmp(&costs[winner]).then(challenger.cmp(&winner)).is_lt() {
            winner = challenger;
        }
    }
    winner
}

pub(crate) fn run<F>(
    bounds: &[Bounds],
    hints: &[Vec<f64>],
    repair: Option<&Repair<'_>>,
    evaluate: F,
    settings: &GaSettings,
) -> Result<GaOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    settings.validate()?;
    if bounds.is_empty() {
        return Err(Error::Precondition("genetic algorithm needs at least one gene".into()));
    }
    debug_assert_eq!(hints.len(), bounds.len());
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let pop_size = settings.population;

    let eval_all = |pop: &[Vec<f64>]| -> Vec<f64> {
        pop.par_iter()
            .map(|candidate| {
                let c = evaluate(candidate);
                if c.is_nan() {
                    f64::INFINITY
                } else {
                    c
                }
            })
            .collect()
    };

    let mut population: Vec<Vec<f64>> = (0..pop_size)
        .map(|_| {
            bounds
                .iter()
                .zip(hints)
                .map(|(b, h)| init_gene(b, h, &mut rng))
                .collect()
        })
        .collect();
    let mut costs = eval_all(&population);

    let order_of = |costs: &[f64]| -> Vec<usize> {
        let mut order: Vec<usize> = (0..costs.len()).collect();
        order.sort_by(|&i, &j| costs[i].total_cmp(&costs[j]).then(i.cmp(&j)));
        order
    };

    let mut order = order_of(&costs);
    let mut best = population[order[0]].clone();
    let mut best_cost = costs[order[0]];
    let mut history = vec![best_cost];
    let mut last_improvement = 0usize;

    let mut last_restart = 0usize;
    for generation in 1..=settings.generations {
        if settings.stall_generations > 0
            && generation - last_improvement > settings.stall_generations
        {
            break;
        }

        // diversity restart: keep the leading half, redraw the rest
        if generation - last_improvement.max(last_restart) > RESTART_STALL {
            for &idx in order.iter().skip(pop_size / 2) {
                population[idx] = bounds
                    .iter()
                    .zip(hints)
                    .map(|(b, h)| init_gene(b, h, &mut rng))
                    .collect();
            }
            costs = eval_all(&population);
            order = order_of(&costs);
            last_restart = generation;
        }

        let mut next = Vec::with_capacity(pop_size);
        for &idx in order.iter().take(settings.elite_count) {
            next.push(population[idx].clone());
        }
        while next.len() < pop_size {
            let p1 = tournament(&costs, &mut rng);
            let p2 = tournament(&costs, &mut rng);
            let mut child = if rng.random::<f64>() < settings.crossover_rate {
                bounds
                    .iter()
                    .enumerate()
                    .map(|(g, _)| {
                        if rng.random::<f64>() < 0.5 {
                            population[p1][g]
                        } else {
                            population[p2][g]
                        }
                    })
                    .collect()
            } else {
                population[p1].clone()
            };
            for (g, b) in bounds.iter().enumerate() {
                if rng.random::<f64>() < settings.mutation_rate {
                    let old = child[g];
                    child[g] = mutate_gene(old, b, settings.mutation_scale, &mut rng);
                    if let Some(repair) = repair {
                        repair(&mut child, g, old);
                    }
                }
            }
            next.push(child);
        }

        population = next;
        costs = eval_all(&population);
        order = order_of(&costs);
        let gen_best = costs[order[0]];
        history.push(gen_best);
        if gen_best < best_cost {
            best_cost = gen_best;
            best = population[order[0]].clone();
            last_improvement = generation;
        }
    }

    if !best_cost.is_finite() {
        return Err(Error::AllCandidatesInfeasible {
            generation: history.len() - 1,
            population: pop_size,
        });
    }
    Ok(GaOutcome { best, cost: best_cost, history })
}
