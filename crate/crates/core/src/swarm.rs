//! Repulsive particle swarm minimizer over a bounded box.
//!
//! Each iteration runs in bulk-synchronous phases:
//!
//! 1. velocity update and move for every particle (all random draws happen
//!    here, sequentially, from one seeded stream);
//! 2. parallel evaluation of the moved particles;
//! 3. `local_search_steps` rounds of probing at `x ± v/2^(s−1)`, each round
//!    evaluated in parallel;
//! 4. reinitialization of the worst particles, evaluated in parallel.
//!
//! Results are always gathered in particle order, so the run is bit-identical
//! for any worker count.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub type Rng64 = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwarmError {
    #[error("invalid swarm setting `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("bounds for dimension {dim} are not ordered: [{lower}, {upper}]")]
    Bounds { dim: usize, lower: f64, upper: f64 },
    #[error("bounds have {lower} lower and {upper} upper limits")]
    BoundsLength { lower: usize, upper: usize },
    #[error("seed position has dimension {got}, expected {expected}")]
    SeedDimension { got: usize, expected: usize },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

fn config_error(field: &'static str, reason: impl Into<String>) -> SwarmError {
    SwarmError::Config {
        field,
        reason: reason.into(),
    }
}

/// Per-dimension box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SwarmError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(SwarmError::BoundsLength {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        for (dim, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SwarmError::Bounds {
                    dim,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval repeated `dim` times.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self, SwarmError> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, dim: usize) -> f64 {
        self.upper[dim] - self.lower[dim]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| (lo..=hi).contains(&v))
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[d], self.upper[d]);
        }
    }

    fn sample(&self, rng: &mut Rng64) -> Vec<f64> {
        (0..self.dim())
            .map(|d| self.lower[d] + rng.random::<f64>() * self.width(d))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Nearest particles under box-normalized Euclidean distance.
    Closest,
    /// Index neighbours on a ring.
    Ring,
    /// Fresh uniform picks every iteration.
    Random,
}

impl std::str::FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closest" => Ok(Self::Closest),
            "ring" => Ok(Self::Ring),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown topology `{other}` (closest, ring, random)")),
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Closest => "closest",
            Self::Ring => "ring",
            Self::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub particles: usize,
    pub iterations: usize,
    /// Hard cap on fitness calls, including the initial population.
    pub eval_budget: Option<usize>,
    pub neighborhood_size: usize,
    pub topology: Topology,
    pub local_search_steps: usize,
    pub worst_reset_count: usize,
    pub inertia: f64,
    /// Pull towards the particle's own best.
    pub cognitive: f64,
    /// Pull towards the neighbourhood best.
    pub social: f64,
    /// Random perturbation, as a fraction of each box width.
    pub perturbation: f64,
    pub velocity_max_frac: f64,
    pub velocity_init_frac: f64,
    pub seed: u64,
    /// Evaluation threads; 0 lets the pool pick.
    pub workers: usize,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            particles: 100,
            iterations: 400,
            eval_budget: None,
            neighborhood_size: 20,
            topology: Topology::Closest,
            local_search_steps: 2,
            worst_reset_count: 2,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            perturbation: 0.01,
            velocity_max_frac: 0.5,
            velocity_init_frac: 0.1,
            seed: 0x5157_4152_4d00,
            workers: 1,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), SwarmError> {
        if self.particles == 0 {
            return Err(config_error("particles", "must be at least 1"));
        }
        if self.neighborhood_size >= self.particles {
            return Err(config_error(
                "neighborhood_size",
                format!("must be below the particle count {}", self.particles),
            ));
        }
        if self.worst_reset_count >= self.particles {
            return Err(config_error(
                "worst_reset_count",
                format!("must be below the particle count {}", self.particles),
            ));
        }
        for (field, value) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
            ("perturbation", self.perturbation),
        ] {
            if !value.is_finite() {
                return Err(config_error(field, "must be finite"));
            }
        }
        for (field, value) in [
            ("velocity_max_frac", self.velocity_max_frac),
            ("velocity_init_frac", self.velocity_init_frac),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(config_error(field, "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub fitness: f64,
}

impl Particle {
    fn record(&mut self, fitness: f64) {
        self.fitness = fitness;
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
            self.best_position.clone_from(&self.position);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// 0 is the initial population.
    pub iteration: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].best_fitness <= w[0].best_fitness)
    }

    pub fn final_best(&self) -> Option<f64> {
        self.rows.last().map(|r| r.best_fitness)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmOutcome {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub trace: ConvergenceTrace,
    pub evaluations: usize,
}

/// Uniform positions in the box and velocities in `±velocity_init_frac·width`.
///
/// Fitness fields start at `+∞`; the caller evaluates them.
pub fn initialize(bounds: &SearchBounds, config: &SwarmConfig, rng: &mut Rng64) -> Vec<Particle> {
    (0..config.particles)
        .map(|_| fresh_particle(bounds, config, rng))
        .collect()
}

fn fresh_particle(bounds: &SearchBounds, config: &SwarmConfig, rng: &mut Rng64) -> Particle {
    let position = bounds.sample(rng);
    let velocity = (0..bounds.dim())
        .map(|d| rng.random_range(-1.0..=1.0) * config.velocity_init_frac * bounds.width(d))
        .collect();
    Particle {
        best_position: position.clone(),
        position,
        velocity,
        best_fitness: f64::INFINITY,
        fitness: f64::INFINITY,
    }
}

/// `w·v + c1·r1∘(p_best − x) + c2·r2∘(n_best − x) + c3·r3∘z∘width`, clamped per dimension.
pub fn update_velocity(
    particle: &Particle,
    neighborhood_best: &[f64],
    bounds: &SearchBounds,
    config: &SwarmConfig,
    rng: &mut Rng64,
) -> Vec<f64> {
    (0..bounds.dim())
        .map(|d| {
            let x = particle.position[d];
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let r3: f64 = rng.random();
            let z: f64 = rng.random_range(-1.0..=1.0);
            let width = bounds.width(d);
            let v = config.inertia * particle.velocity[d]
                + config.cognitive * r1 * (particle.best_position[d] - x)
                + config.social * r2 * (neighborhood_best[d] - x)
                + config.perturbation * r3 * z * width;
            let vmax = config.velocity_max_frac * width;
            v.clamp(-vmax, vmax)
        })
        .collect()
}

/// Indices of the particles `index` exchanges information with (never itself).
pub fn neighborhood(
    index: usize,
    particles: &[Particle],
    bounds: &SearchBounds,
    config: &SwarmConfig,
    rng: &mut Rng64,
) -> Vec<usize> {
    let n = particles.len();
    let k = config.neighborhood_size.min(n.saturating_sub(1));
    if k == 0 {
        return Vec::new();
    }
    match config.topology {
        Topology::Closest => {
            let me = &particles[index].position;
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != index)
                .map(|j| {
                    let d2 = particles[j]
                        .position
                        .iter()
                        .zip(me)
                        .enumerate()
                        .map(|(d, (a, b))| ((a - b) / bounds.width(d)).powi(2))
                        .sum::<f64>();
                    (d2, j)
                })
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.truncate(k);
            others.into_iter().map(|(_, j)| j).collect()
        }
        Topology::Ring => {
            let half = k / 2;
            let mut out = Vec::with_capacity(k);
            for off in 1..=half {
                out.push((index + n - off % n) % n);
                out.push((index + off) % n);
            }
            if k % 2 == 1 {
                out.push((index + half + 1) % n);
            }
            out.sort_unstable();
            out.dedup();
            out
        }
        Topology::Random => index::sample(rng, n - 1, k)
            .into_iter()
            .map(|j| if j >= index { j + 1 } else { j })
            .collect(),
    }
}

fn neighborhood_best<'a>(index: usize, neighbours: &[usize], particles: &'a [Particle]) -> &'a [f64] {
    let mut best = index;
    for &j in neighbours {
        let (fj, fb) = (particles[j].best_fitness, particles[best].best_fitness);
        if fj < fb || (fj == fb && j < best) {
            best = j;
        }
    }
    &particles[best].best_position
}

/// The two probes of local-search step `step` (1-based): `x ± v/2^(step−1)`, clamped.
pub fn probe_positions(particle: &Particle, step: usize, bounds: &SearchBounds) -> [Vec<f64>; 2] {
    let scale = 0.5f64.powi(step.saturating_sub(1) as i32);
    let mut forward: Vec<f64> = particle
        .position
        .iter()
        .zip(&particle.velocity)
        .map(|(x, v)| x + scale * v)
        .collect();
    let mut backward: Vec<f64> = particle
        .position
        .iter()
        .zip(&particle.velocity)
        .map(|(x, v)| x - scale * v)
        .collect();
    bounds.clamp(&mut forward);
    bounds.clamp(&mut backward);
    [forward, backward]
}

/// Moves the particle to the better probe if it strictly beats the current fitness.
fn accept_probe(particle: &mut Particle, probes: [Vec<f64>; 2], fitness: [f64; 2]) -> bool {
    let pick = if fitness[1] < fitness[0] { 1 } else { 0 };
    if fitness[pick] < particle.fitness {
        let [forward, backward] = probes;
        particle.position = if pick == 0 { forward } else { backward };
        particle.record(fitness[pick]);
        true
    } else {
        false
    }
}

/// Probes along and against the velocity for `steps` rounds. Returns the
/// number of fitness evaluations spent.
pub fn local_search<F>(particle: &mut Particle, fitness_fn: F, steps: usize, bounds: &SearchBounds) -> usize
where
    F: Fn(&[f64]) -> f64,
{
    for step in 1..=steps {
        let probes = probe_positions(particle, step, bounds);
        let values = [sanitize(fitness_fn(&probes[0])), sanitize(fitness_fn(&probes[1]))];
        accept_probe(particle, probes, values);
    }
    2 * steps
}

/// Picks the `count` particles with the highest current fitness (ties: lower
/// index first) and gives them fresh positions and velocities. Returns the
/// reset indices in ascending order; their fitness is left at `+∞`.
pub fn reset_worst(
    particles: &mut [Particle],
    count: usize,
    bounds: &SearchBounds,
    config: &SwarmConfig,
    rng: &mut Rng64,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..particles.len()).collect();
    order.sort_by(|&a, &b| {
        particles[b]
            .fitness
            .total_cmp(&particles[a].fitness)
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = order.into_iter().take(count).collect();
    chosen.sort_unstable();
    for &i in &chosen {
        particles[i] = fresh_particle(bounds, config, rng);
    }
    chosen
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

struct Evaluator<'f, F> {
    fitness_fn: &'f F,
    pool: Option<rayon::ThreadPool>,
    used: usize,
    budget: Option<usize>,
}

impl<F> Evaluator<'_, F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    /// Evaluates as many leading positions as the budget allows.
    fn run(&mut self, positions: &[&[f64]]) -> Vec<f64> {
        let granted = match self.budget {
            Some(b) => positions.len().min(b.saturating_sub(self.used)),
            None => positions.len(),
        };
        self.used += granted;
        let batch = &positions[..granted];
        let f = self.fitness_fn;
        match &self.pool {
            Some(pool) => pool.install(|| batch.par_iter().map(|x| sanitize(f(x))).collect()),
            None => batch.iter().map(|x| sanitize(f(x))).collect(),
        }
    }

    fn exhausted(&self) -> bool {
        self.budget.is_some_and(|b| self.used >= b)
    }
}

struct Elite {
    position: Vec<f64>,
    fitness: f64,
}

impl Elite {
    fn offer(&mut self, particles: &[Particle]) {
        for p in particles {
            if p.best_fitness < self.fitness {
                self.fitness = p.best_fitness;
                self.position.clone_from(&p.best_position);
            }
        }
    }
}

fn trace_row(iteration: usize, elite: &Elite, particles: &[Particle], evaluations: usize) -> TraceRow {
    let mean = particles.iter().map(|p| p.fitness).sum::<f64>() / particles.len() as f64;
    TraceRow {
        iteration,
        best_fitness: elite.fitness,
        mean_fitness: mean,
        evaluations,
    }
}

/// Minimizes `fitness_fn` over `bounds`.
///
/// `seeds` replace the first initial positions (clamped into the box).
/// `progress` is called once per trace row, including the initial one.
pub fn optimize<F>(
    fitness_fn: &F,
    bounds: &SearchBounds,
    config: &SwarmConfig,
    seeds: &[Vec<f64>],
    mut progress: Option<&mut dyn FnMut(&TraceRow)>,
) -> Result<SwarmOutcome, SwarmError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    if let Some(bad) = seeds.iter().find(|s| s.len() != bounds.dim()) {
        return Err(SwarmError::SeedDimension {
            got: bad.len(),
            expected: bounds.dim(),
        });
    }
    let pool = if config.workers == 1 {
        None
    } else {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| SwarmError::Pool(e.to_string()))?,
        )
    };
    let mut eval = Evaluator {
        fitness_fn,
        pool,
        used: 0,
        budget: config.eval_budget,
    };
    let mut rng = Rng64::seed_from_u64(config.seed);
    let mut particles = initialize(bounds, config, &mut rng);
    for (p, seed) in particles.iter_mut().zip(seeds) {
        p.position.clone_from(seed);
        bounds.clamp(&mut p.position);
        p.best_position.clone_from(&p.position);
    }

    let values = eval.run(&particles.iter().map(|p| p.position.as_slice()).collect::<Vec<_>>());
    for (p, f) in particles.iter_mut().zip(values) {
        p.record(f);
    }
    let mut elite = Elite {
        position: particles[0].position.clone(),
        fitness: f64::INFINITY,
    };
    elite.offer(&particles);
    let mut trace = ConvergenceTrace::default();
    let mut push = |row: TraceRow, trace: &mut ConvergenceTrace| {
        if let Some(cb) = progress.as_mut() {
            cb(&row);
        }
        trace.rows.push(row);
    };
    push(trace_row(0, &elite, &particles, eval.used), &mut trace);

    for iteration in 1..=config.iterations {
        if eval.exhausted() {
            break;
        }

        // Sequential phase: every random draw of this iteration except resets.
        let mut moved: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(particles.len());
        for i in 0..particles.len() {
            let neighbours = neighborhood(i, &particles, bounds, config, &mut rng);
            let nbest = neighborhood_best(i, &neighbours, &particles);
            let mut velocity = update_velocity(&particles[i], nbest, bounds, config, &mut rng);
            let mut position: Vec<f64> = particles[i]
                .position
                .iter()
                .zip(&velocity)
                .map(|(x, v)| x + v)
                .collect();
            for d in 0..bounds.dim() {
                let clamped = position[d].clamp(bounds.lower[d], bounds.upper[d]);
                if clamped != position[d] {
                    position[d] = clamped;
                    velocity[d] = 0.0;
                }
            }
            moved.push((position, velocity));
        }

        let values = eval.run(&moved.iter().map(|(x, _)| x.as_slice()).collect::<Vec<_>>());
        for ((p, (x, v)), f) in particles.iter_mut().zip(moved).zip(values) {
            p.position = x;
            p.velocity = v;
            p.record(f);
        }

        for step in 1..=config.local_search_steps {
            let probes: Vec<[Vec<f64>; 2]> = particles
                .iter()
                .map(|p| probe_positions(p, step, bounds))
                .collect();
            let flat: Vec<&[f64]> = probes
                .iter()
                .flat_map(|[a, b]| [a.as_slice(), b.as_slice()])
                .collect();
            let values = eval.run(&flat);
            for ((p, pr), fv) in particles.iter_mut().zip(probes).zip(values.chunks_exact(2)) {
                accept_probe(p, pr, [fv[0], fv[1]]);
            }
        }

        if config.worst_reset_count > 0 && !eval.exhausted() {
            // Fold the soon-to-be-forgotten personal bests into the elite first.
            elite.offer(&particles);
            let reset = reset_worst(&mut particles, config.worst_reset_count, bounds, config, &mut rng);
            let values = eval.run(
                &reset
                    .iter()
                    .map(|&i| particles[i].position.as_slice())
                    .collect::<Vec<_>>(),
            );
            let evaluated = values.len();
            for (&i, f) in reset.iter().zip(values) {
                particles[i].record(f);
            }
            // Out of budget mid-reset: the rest stay unevaluated at +∞.
            debug_assert!(evaluated == reset.len() || eval.exhausted());
        }

        elite.offer(&particles);
        push(trace_row(iteration, &elite, &particles, eval.used), &mut trace);
    }

    Ok(SwarmOutcome {
        best_position: elite.position,
        best_fitness: elite.fitness,
        trace,
        evaluations: eval.used,
    })
}
