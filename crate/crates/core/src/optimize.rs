//! Parameter search for the largest certified Delta at a given x0.
//!
//! The integer pair (m, n) is enumerated on an outer schedule (parity
//! coupling makes relaxation awkward, and the optimal m collapses to its
//! minimum as n grows). The continuous block (log10 delta, a, log10 T1) is
//! optimized by differential evolution with a hard feasibility gate:
//! infeasible members score a large penalty shifted by the margin deficit so
//! the population still drifts toward the feasible set.
//!
//! Determinism: per-generation RNG streams are derived from the master seed
//! and (m, n, generation); trial members are drawn sequentially, evaluated
//! in parallel, and selected in fixed population order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{self, Certificate, SearchParams};
use crate::constants::ResolvedConstants;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::zeros::ZeroSummary;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub m_range: (u32, u32),
    pub n_schedule: Vec<u32>,
    pub de_population: usize,
    pub de_weight: f64,
    pub de_crossover: f64,
    pub de_generations: u32,
    pub rng_seed: u64,
    pub log10_delta_bounds: (f64, f64),
    pub a_bounds: (f64, f64),
    pub log10_t1_bounds: (f64, f64),
    pub stall_limit: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            m_range: (2, 4),
            n_schedule: vec![
                1, 3, 5, 7, 9, 15, 21, 29, 41, 47, 55, 61, 85, 97, 201, 465, 609, 885, 1029, 1171,
            ],
            de_population: 30,
            de_weight: 0.8,
            de_crossover: 0.9,
            de_generations: 200,
            rng_seed: 0,
            log10_delta_bounds: (-40.0, -6.0),
            a_bounds: (0.0, 0.5),
            // (log10 T0, log10 H), strictly inside
            log10_t1_bounds: (8.0193, 12.4771),
            // the small-n end of the schedule is a plateau (n = 1 beats
            // n = 3..9), so the stall window must span it
            stall_limit: 6,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.de_population < 4 {
            return Err(Error::Domain(
                "differential evolution needs a population of at least 4".into(),
            ));
        }
        if self.log10_delta_bounds.1 > -6.0 + 1e-12 && self.log10_delta_bounds.1 != -6.0 {
            return Err(Error::Domain("delta bound exceeds the 1e-6 cap".into()));
        }
        if self.a_bounds.0 < 0.0 || self.a_bounds.1 > 0.5 {
            return Err(Error::Domain("a bounds must lie inside [0, 1/2]".into()));
        }
        if self.log10_t1_bounds.0 < 8.0192 || self.log10_t1_bounds.1 > 12.4772 {
            return Err(Error::Domain("T1 bounds must lie inside (T0, H)".into()));
        }
        if !(0.0..=2.0).contains(&self.de_weight) || !(0.0..=1.0).contains(&self.de_crossover) {
            return Err(Error::Domain("DE hyperparameters out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TracePoint {
    pub m: u32,
    pub n: u32,
    pub generation: u32,
    /// log10 of the best certified Delta so far; NaN while infeasible.
    pub best_log10_delta_cap: f64,
    pub best_score: f64,
    /// Margin of the best member; NaN when evaluation failed outright.
    pub best_margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Certificate,
    pub trace: Vec<TracePoint>,
    pub evaluations: u64,
    pub wall_time_s: f64,
}

type Genotype = [f64; 3];

#[derive(Debug, Clone)]
struct Bounds {
    lo: Genotype,
    hi: Genotype,
}

impl Bounds {
    fn from_config(cfg: &SearchConfig) -> Bounds {
        Bounds {
            lo: [
                cfg.log10_delta_bounds.0,
                cfg.a_bounds.0,
                cfg.log10_t1_bounds.0,
            ],
            hi: [
                cfg.log10_delta_bounds.1,
                cfg.a_bounds.1,
                cfg.log10_t1_bounds.1,
            ],
        }
    }

    fn clamp(&self, g: &mut Genotype) {
        for i in 0..3 {
            g[i] = g[i].clamp(self.lo[i], self.hi[i]);
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Genotype {
        let mut g = [0.0; 3];
        for i in 0..3 {
            g[i] = rng.gen_range(self.lo[i]..=self.hi[i]);
        }
        g
    }
}

/// Stable 64-bit mix for per-generation RNG streams.
fn stream_seed(master: u64, m: u32, n: u32, generation: u32) -> u64 {
    let mut z = master
        ^ (u64::from(m) << 48)
        ^ (u64::from(n) << 32)
        ^ u64::from(generation);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn params_from_genotype(m: u32, n: u32, g: &Genotype) -> SearchParams {
    SearchParams::new(
        m,
        n,
        &format!("{:.16e}", 10f64.powf(g[0])),
        &format!("{:.16e}", g[1]),
        &format!("{:.16e}", 10f64.powf(g[2])),
    )
}

/// Round each search coordinate to 5 decimal places, matching how final
/// parameters are reported.
fn round_genotype(g: &Genotype) -> Genotype {
    let mut out = *g;
    for v in &mut out {
        *v = (*v * 1e5).round() / 1e5;
    }
    out
}

const INFEASIBLE_BASE: f64 = -1e6;
const INVALID_SCORE: f64 = -1e9;

struct Evaluation {
    score: f64,
    margin: Option<f64>,
}

fn evaluate(
    x0: &Interval,
    m: u32,
    n: u32,
    g: &Genotype,
    c: &ResolvedConstants,
    zs: Option<&ZeroSummary>,
) -> Evaluation {
    let params = params_from_genotype(m, n, g);
    let rp = match params.resolve(c) {
        Ok(rp) => rp,
        Err(_) => {
            return Evaluation {
                score: INVALID_SCORE,
                margin: None,
            }
        }
    };
    let x0_big = match certify::derive_x0(x0, &rp, c) {
        Ok(v) => v,
        Err(_) => {
            return Evaluation {
                score: INVALID_SCORE,
                margin: None,
            }
        }
    };
    let result = match certify::evaluate_margin(&x0_big, &rp, c, zs) {
        Ok(r) => r,
        Err(_) => {
            return Evaluation {
                score: INFEASIBLE_BASE,
                margin: None,
            }
        }
    };
    let margin = result.margin.to_f64();
    if result.margin.is_strictly_positive() {
        let cap = match certify::delta_cap(&rp, c) {
            Ok(cap) => cap,
            Err(_) => {
                return Evaluation {
                    score: INVALID_SCORE,
                    margin: Some(margin),
                }
            }
        };
        // log10 Delta, computed in interval space since Delta overflows f64
        // for large x0.
        let score = cap.ln().map(|l| l.to_f64() / std::f64::consts::LN_10);
        Evaluation {
            score: score.unwrap_or(INVALID_SCORE),
            margin: Some(margin),
        }
    } else {
        Evaluation {
            score: INFEASIBLE_BASE - (1.0 + margin.abs()).ln(),
            margin: Some(margin),
        }
    }
}

struct DeOutcome {
    best_genotype: Genotype,
    best_score: f64,
    least_infeasible_margin: Option<f64>,
    evaluations: u64,
    trace: Vec<TracePoint>,
}

/// Differential evolution over the continuous block at fixed (m, n).
/// Stops early once the best score stagnates for 30 generations.
#[allow(clippy::too_many_arguments)]
fn run_de(
    x0: &Interval,
    m: u32,
    n: u32,
    cfg: &SearchConfig,
    bounds: &Bounds,
    seed_member: Option<Genotype>,
    c: &ResolvedConstants,
    zs: Option<&ZeroSummary>,
) -> DeOutcome {
    let pop_size = cfg.de_population;
    let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(cfg.rng_seed, m, n, 0));
    let mut pop: Vec<Genotype> = (0..pop_size).map(|_| bounds.sample(&mut rng)).collect();
    if let Some(seed) = seed_member {
        pop[0] = seed;
    }
    let mut scores: Vec<Evaluation> = pop
        .par_iter()
        .map(|g| evaluate(x0, m, n, g, c, zs))
        .collect();
    let mut evaluations = pop_size as u64;
    let mut trace = Vec::new();
    let mut stagnant = 0u32;
    let mut last_best = f64::NEG_INFINITY;
    for generation in 1..=cfg.de_generations {
        let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(cfg.rng_seed, m, n, generation));
        let mut trials: Vec<Genotype> = Vec::with_capacity(pop_size);
        for i in 0..pop_size {
            let mut pick = || loop {
                let r = rng.gen_range(0..pop_size);
                if r != i {
                    return r;
                }
            };
            let (r1, r2, r3) = {
                let a = pick();
                let b = loop {
                    let v = pick();
                    if v != a {
                        break v;
                    }
                };
                let cc = loop {
                    let v = pick();
                    if v != a && v != b {
                        break v;
                    }
                };
                (a, b, cc)
            };
            let mut trial = pop[i];
            let j_rand = rng.gen_range(0..3);
            for j in 0..3 {
                let mutant = pop[r1][j] + cfg.de_weight * (pop[r2][j] - pop[r3][j]);
                if j == j_rand || rng.gen_bool(cfg.de_crossover) {
                    trial[j] = mutant;
                }
            }
            bounds.clamp(&mut trial);
            trials.push(trial);
        }
        let trial_scores: Vec<Evaluation> = trials
            .par_iter()
            .map(|g| evaluate(x0, m, n, g, c, zs))
            .collect();
        evaluations += pop_size as u64;
        for i in 0..pop_size {
            if trial_scores[i].score >= scores[i].score {
                pop[i] = trials[i];
                scores[i] = Evaluation {
                    score: trial_scores[i].score,
                    margin: trial_scores[i].margin,
                };
            }
        }
        let best_idx = best_index(&scores);
        let best_score = scores[best_idx].score;
        trace.push(TracePoint {
            m,
            n,
            generation,
            best_log10_delta_cap: if best_score > INFEASIBLE_BASE {
                best_score
            } else {
                f64::NAN
            },
            best_score,
            best_margin: scores[best_idx].margin.unwrap_or(f64::NAN),
        });
        if best_score - last_best < 1e-9 {
            stagnant += 1;
            if stagnant >= 30 {
                break;
            }
        } else {
            stagnant = 0;
            last_best = best_score;
        }
    }
    let best_idx = best_index(&scores);
    let least_infeasible_margin = scores
        .iter()
        .filter_map(|e| e.margin)
        .fold(None, |acc: Option<f64>, v| {
            Some(match acc {
                Some(a) if a >= v => a,
                _ => v,
            })
        });
    DeOutcome {
        best_genotype: pop[best_idx],
        best_score: scores[best_idx].score,
        least_infeasible_margin,
        evaluations,
        trace,
    }
}

fn best_index(scores: &[Evaluation]) -> usize {
    let mut best = 0;
    for (i, e) in scores.iter().enumerate() {
        if e.score > scores[best].score {
            best = i;
        }
    }
    best
}

/// Certify the DE winner, preferring the 5-decimal rounding of its search
/// coordinates when that rounding stays feasible.
fn finalize(
    x0: &Interval,
    m: u32,
    n: u32,
    g: &Genotype,
    c: &ResolvedConstants,
    zs: Option<&ZeroSummary>,
) -> Result<Certificate> {
    let rounded = round_genotype(g);
    let cert = certify::certify(x0, &params_from_genotype(m, n, &rounded), c, zs);
    if let Ok(cert) = cert {
        if cert.valid {
            return Ok(cert);
        }
    }
    certify::certify(x0, &params_from_genotype(m, n, g), c, zs)
}

/// Search over the full (m, n) schedule for the largest certified Delta.
pub fn optimize(
    x0: &Interval,
    cfg: &SearchConfig,
    c: &ResolvedConstants,
    zs: Option<&ZeroSummary>,
) -> Result<SearchResult> {
    cfg.validate()?;
    if cfg.de_generations == 0 {
        return Err(Error::NoFeasiblePoint("generation budget is zero".into()));
    }
    let started = std::time::Instant::now();
    let bounds = Bounds::from_config(cfg);
    let mut best: Option<(f64, u32, u32, Genotype)> = None;
    let mut least_infeasible: Option<f64> = None;
    let mut evaluations = 0u64;
    let mut trace = Vec::new();
    let mut prev_m_order: Option<i64> = None;
    for m in cfg.m_range.0..=cfg.m_range.1 {
        let mut m_best_order: Option<i64> = None;
        let mut stall = 0u32;
        for &n in cfg.n_schedule.iter().filter(|&&n| m % 2 == 0 || n % 2 == 1) {
            let outcome = run_de(x0, m, n, cfg, &bounds, None, c, zs);
            evaluations += outcome.evaluations;
            trace.extend(outcome.trace);
            if let Some(v) = outcome.least_infeasible_margin {
                least_infeasible = Some(least_infeasible.map_or(v, |a| a.max(v)));
            }
            if outcome.best_score > INFEASIBLE_BASE {
                if best.as_ref().map_or(true, |b| outcome.best_score > b.0) {
                    best = Some((outcome.best_score, m, n, outcome.best_genotype));
                }
                let order = outcome.best_score.floor() as i64;
                if m_best_order.map_or(true, |o| order > o) {
                    m_best_order = Some(order);
                    stall = 0;
                } else {
                    stall += 1;
                }
            } else {
                stall += 1;
            }
            if stall >= cfg.stall_limit {
                break;
            }
        }
        // larger m stops paying once its best order no longer improves
        match (prev_m_order, m_best_order) {
            (Some(prev), Some(cur)) if cur <= prev => break,
            (Some(_), None) => break,
            _ => {}
        }
        if let Some(cur) = m_best_order {
            prev_m_order = Some(cur);
        }
    }
    let (_, m, n, genotype) = best.ok_or_else(|| {
        Error::NoFeasiblePoint(format!(
            "no certified point within budget; least-infeasible margin {:?}",
            least_infeasible
        ))
    })?;
    let best_cert = finalize(x0, m, n, &genotype, c, zs)?;
    Ok(SearchResult {
        best: best_cert,
        trace,
        evaluations,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Local polish around known-good parameters: DE restricted to a shrunk box
/// (about 20% in log delta, 50% in a, half a decade in T1), with the seed
/// included in the initial population.
pub fn refine(
    x0: &Interval,
    seed_params: &SearchParams,
    cfg: &SearchConfig,
    c: &ResolvedConstants,
    zs: Option<&ZeroSummary>,
) -> Result<SearchResult> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let delta: f64 = seed_params.delta.parse().map_err(|_| {
        Error::Parse(format!("seed delta {:?} is not a decimal", seed_params.delta))
    })?;
    let a: f64 = seed_params
        .a
        .parse()
        .map_err(|_| Error::Parse(format!("seed a {:?} is not a decimal", seed_params.a)))?;
    let t1: f64 = seed_params
        .t1
        .parse()
        .map_err(|_| Error::Parse(format!("seed T1 {:?} is not a decimal", seed_params.t1)))?;
    let g = [delta.log10(), a, t1.log10()];
    let defaults = Bounds::from_config(&SearchConfig::default());
    let mut bounds = Bounds {
        lo: [g[0] * 1.2, (a * 0.5).max(0.0), g[2] - 0.5],
        hi: [g[0] * 0.8, (a * 1.5).min(0.5), g[2] + 0.5],
    };
    for i in 0..3 {
        bounds.lo[i] = bounds.lo[i].max(defaults.lo[i]);
        bounds.hi[i] = bounds.hi[i].min(defaults.hi[i]);
    }
    let outcome = run_de(
        x0,
        seed_params.m,
        seed_params.n,
        cfg,
        &bounds,
        Some(g),
        c,
        zs,
    );
    if outcome.best_score <= INFEASIBLE_BASE {
        return Err(Error::NoFeasiblePoint(format!(
            "refinement found no certified point; least-infeasible margin {:?}",
            outcome.least_infeasible_margin
        )));
    }
    let best = finalize(x0, seed_params.m, seed_params.n, &outcome.best_genotype, c, zs)?;
    Ok(SearchResult {
        best,
        trace: outcome.trace,
        evaluations: outcome.evaluations,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Ordinary least squares of y on x. Inputs are (log x0, log Delta) pairs.
pub fn fit_regression(rows: &[(f64, f64)]) -> Result<(f64, f64)> {
    if rows.len() < 3 {
        return Err(Error::Degenerate(
            "regression needs at least 3 rows".into(),
        ));
    }
    let n = rows.len() as f64;
    let mean_x = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_y = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|r| (r.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x0 values are equal".into()));
    }
    let sxy: f64 = rows
        .iter()
        .map(|r| (r.0 - mean_x) * (r.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}
