//! Regularized-Laplacian voting dynamics.
//!
//! Decided agents enter at ±1, undecided agents at a small noisy value mixing
//! the candidate's merit with uniform noise, and the final decision vector is
//! the closed-form minimizer of
//!
//! ```text
//! φ(x) = ½(‖x − x₀‖² + ε(x − 1)ᵀ(x + 1) + μ·xᵀLx)
//! ```
//!
//! i.e. `x = ((1 + ε)I + μL)⁻¹ x₀`.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use nalgebra::{Cholesky, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CommitteeGraph, DepartmentData, Matrix, ModelParams, ProductivityVector};

/// How the candidate's merit `m_c ∈ [−1, 1]` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum MeritMode {
    /// Supplied directly.
    Fixed(f64),
    /// `(p_c − P_max/2) / P_max`.
    Midpoint,
    /// `(p_c − Σp/(2N)) / P_max`.
    Mean,
}

impl FromStr for MeritMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Self::Midpoint),
            "mean" => Ok(Self::Mean),
            other => match other.strip_prefix("fixed:") {
                Some(v) => v
                    .parse::<f64>()
                    .map(Self::Fixed)
                    .map_err(|_| Error::Parameter(format!("bad fixed merit value `{v}`"))),
                None => Err(Error::Parameter(format!(
                    "unknown merit mode `{other}` (expected midpoint, mean or fixed:<v>)"
                ))),
            },
        }
    }
}

/// Denominator of the productivity mixing weight for undecided agents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeritReference {
    #[default]
    PMax,
    MaxProductivity,
}

/// Which agents move in the solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Every agent, decided or not, is solved for jointly.
    #[default]
    Joint,
    /// Only undecided agents move; all others stay at their initial value.
    Clamped,
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(Self::Joint),
            "clamped" => Ok(Self::Clamped),
            other => Err(Error::Parameter(format!("unknown solve mode `{other}`"))),
        }
    }
}

/// Committee partition and dynamics parameters. Agents are zero-based positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VotingScenario {
    pub v_plus: BTreeSet<usize>,
    pub v_minus: BTreeSet<usize>,
    pub v_undecided: BTreeSet<usize>,
    pub candidate: usize,
    pub candidate_assignment: f64,
    /// Graph members outside the committee, with their fixed initial value.
    pub non_voters: BTreeMap<usize, f64>,
    pub merit: MeritMode,
    pub merit_reference: MeritReference,
    pub alpha: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub solve_mode: SolveMode,
}

impl VotingScenario {
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut owner: Vec<Option<&str>> = vec![None; n];
        let mut claim = |i: usize, what: &'static str| -> Result<()> {
            let slot = owner
                .get_mut(i)
                .ok_or_else(|| Error::Scenario(format!("agent #{} is outside the graph", i + 1)))?;
            if let Some(prev) = slot {
                return Err(Error::Scenario(format!("agent #{} is in both {prev} and {what}", i + 1)));
            }
            *slot = Some(what);
            Ok(())
        };
        claim(self.candidate, "candidate")?;
        for &i in &self.v_plus {
            claim(i, "v_plus")?;
        }
        for &i in &self.v_minus {
            claim(i, "v_minus")?;
        }
        for &i in &self.v_undecided {
            claim(i, "v_undecided")?;
        }
        for &i in self.non_voters.keys() {
            claim(i, "non_voters")?;
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::Scenario(format!("agent #{} is not assigned to any set", i + 1)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Parameter(format!("mu must be nonnegative, got {}", self.mu)));
        }
        if let MeritMode::Fixed(m) = self.merit {
            if !(m.abs() <= 1.0) {
                return Err(Error::Parameter(format!("fixed merit must lie in [-1, 1], got {m}")));
            }
        }
        Ok(())
    }
}

/// Seed plus stream index of a counter-based generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

pub fn candidate_merit(p: &ProductivityVector, candidate: usize, p_max: f64, mode: MeritMode) -> Result<f64> {
    if !(p_max > 0.0) {
        return Err(Error::Parameter(format!("p_max must be positive, got {p_max}")));
    }
    let pc = *p
        .values
        .get(candidate)
        .ok_or_else(|| Error::UnknownAgent(format!("#{}", candidate + 1)))?;
    let m = match mode {
        MeritMode::Fixed(m) => {
            if !(m.abs() <= 1.0) {
                return Err(Error::Parameter(format!("fixed merit must lie in [-1, 1], got {m}")));
            }
            m
        }
        MeritMode::Midpoint => (pc - 0.5 * p_max) / p_max,
        MeritMode::Mean => (pc - p.sum() / (2.0 * p.len() as f64)) / p_max,
    };
    Ok(m.clamp(-1.0, 1.0))
}

/// The productivity value an undecided agent's mixing weight is measured against.
pub fn merit_reference_value(p: &ProductivityVector, p_max: f64, reference: MeritReference) -> f64 {
    match reference {
        MeritReference::PMax => p_max,
        MeritReference::MaxProductivity => p.values.iter().copied().fold(0.0, f64::max),
    }
}

/// Initial decision vector with noise drawn from `draw` (one call per
/// undecided agent, in ascending agent order).
pub fn initial_votes(
    scenario: &VotingScenario,
    p: &ProductivityVector,
    reference: f64,
    m_c: f64,
    mut draw: impl FnMut() -> f64,
) -> Result<Vec<f64>> {
    let n = p.len();
    let mut x0 = vec![0.0; n];
    x0[scenario.candidate] = scenario.candidate_assignment;
    for (&i, &v) in &scenario.non_voters {
        x0[i] = v;
    }
    for &i in &scenario.v_plus {
        x0[i] = 1.0;
    }
    for &i in &scenario.v_minus {
        x0[i] = -1.0;
    }
    for &i in &scenario.v_undecided {
        let share = p.values[i] / reference;
        if !(0.0..=1.0).contains(&share) {
            return Err(Error::ProductivityAboveReference { i, p: p.values[i], reference });
        }
        x0[i] = scenario.alpha * (share * m_c + (1.0 - share) * draw());
    }
    Ok(x0)
}

/// Initial decision vector with `r ~ U[−1, 1]` drawn from the given stream.
pub fn initialize_votes(
    scenario: &VotingScenario,
    p: &ProductivityVector,
    p_max: f64,
    m_c: f64,
    rng: RngSpec,
) -> Result<Vec<f64>> {
    scenario.validate(p.len())?;
    let reference = merit_reference_value(p, p_max, scenario.merit_reference);
    let mut gen = rng.rng();
    initial_votes(scenario, p, reference, m_c, || gen.random_range(-1.0..=1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteOutcome {
    pub x0: Vec<f64>,
    pub x: Vec<f64>,
    pub cost_at_solution: f64,
    /// Max-norm of `∇φ` over the agents that were free to move.
    pub gradient_norm: f64,
}

/// Factorized system `(1 + ε)I + μL`, reusable across many right-hand sides.
pub struct VoteSolver {
    laplacian: Matrix,
    mu: f64,
    eps: f64,
    /// Agents being solved for, ascending.
    free: Vec<usize>,
    system: Matrix,
    factor: Cholesky<f64, Dyn>,
}

impl VoteSolver {
    pub fn joint(laplacian: &Matrix, mu: f64, eps: f64) -> Result<Self> {
        Self::new(laplacian, mu, eps, (0..laplacian.nrows()).collect())
    }

    /// Solve only for `free`; every other agent keeps its initial value.
    pub fn clamped(laplacian: &Matrix, mu: f64, eps: f64, free: &BTreeSet<usize>) -> Result<Self> {
        Self::new(laplacian, mu, eps, free.iter().copied().collect())
    }

    fn new(laplacian: &Matrix, mu: f64, eps: f64, free: Vec<usize>) -> Result<Self> {
        if !laplacian.is_square() {
            return Err(Error::Dimension(format!("L is {}x{}", laplacian.nrows(), laplacian.ncols())));
        }
        if !(mu >= 0.0 && eps > -1.0) {
            return Err(Error::Parameter(format!("need mu >= 0 and eps > -1, got mu={mu}, eps={eps}")));
        }
        let n = laplacian.nrows();
        if let Some(&bad) = free.iter().find(|&&i| i >= n) {
            return Err(Error::UnknownAgent(format!("#{}", bad + 1)));
        }
        let k = free.len();
        let system = Matrix::from_fn(k, k, |a, b| {
            let diag = if a == b { 1.0 + eps } else { 0.0 };
            diag + mu * laplacian[(free[a], free[b])]
        });
        let factor = Cholesky::new(system.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            laplacian: laplacian.clone(),
            mu,
            eps,
            free,
            system,
            factor,
        })
    }

    pub fn solve(&self, x0: &[f64]) -> Result<VoteOutcome> {
        let n = self.laplacian.nrows();
        if x0.len() != n {
            return Err(Error::Dimension(format!("x0 has {} entries for {n} agents", x0.len())));
        }
        let x0v = DVector::from_column_slice(x0);
        let mut is_free = vec![false; n];
        for &i in &self.free {
            is_free[i] = true;
        }
        // Right-hand side: x0 on the free block minus the pull of fixed agents.
        let rhs = DVector::from_iterator(
            self.free.len(),
            self.free.iter().map(|&i| {
                let pull: f64 = (0..n)
                    .filter(|&j| !is_free[j])
                    .map(|j| self.laplacian[(i, j)] * x0[j])
                    .sum();
                x0[i] - self.mu * pull
            }),
        );
        let mut y = self.factor.solve(&rhs);
        let residual = &rhs - &self.system * &y;
        y += self.factor.solve(&residual);

        let mut x = x0v.clone();
        for (k, &i) in self.free.iter().enumerate() {
            x[i] = y[k];
        }
        let grad = gradient(&x, &x0v, &self.laplacian, self.mu, self.eps);
        let gradient_norm = self.free.iter().map(|&i| grad[i].abs()).fold(0.0, f64::max);
        let cost_at_solution = cost(x.as_slice(), x0, &self.laplacian, self.mu, self.eps);
        Ok(VoteOutcome {
            x0: x0.to_vec(),
            x: x.as_slice().to_vec(),
            cost_at_solution,
            gradient_norm,
        })
    }
}

fn gradient(x: &DVector<f64>, x0: &DVector<f64>, l: &Matrix, mu: f64, eps: f64) -> DVector<f64> {
    (x - x0) + x * eps + (l * x) * mu
}

/// Closed-form joint solve of `((1 + ε)I + μL)x = x₀`.
pub fn solve_votes(l: &Matrix, x0: &[f64], mu: f64, eps: f64) -> Result<VoteOutcome> {
    VoteSolver::joint(l, mu, eps)?.solve(x0)
}

pub fn cost(x: &[f64], x0: &[f64], l: &Matrix, mu: f64, eps: f64) -> f64 {
    let xv = DVector::from_column_slice(x);
    let fidelity: f64 = x.iter().zip(x0).map(|(a, b)| (a - b).powi(2)).sum();
    let polarity: f64 = x.iter().map(|v| (v - 1.0) * (v + 1.0)).sum();
    let smoothness = xv.dot(&(l * &xv));
    0.5 * (fidelity + eps * polarity + mu * smoothness)
}

/// `½ Σᵢ Σ_{j≠i} W_ij (x_i − x_j)²`, which equals `xᵀLx`.
pub fn laplacian_quadratic(w: &Matrix, x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += w[(i, j)] * (x[i] - x[j]).powi(2);
            }
        }
    }
    0.5 * total
}

/// Per-agent statistics of the final decision over Monte Carlo trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteStatistics {
    /// Undecided agents, ascending.
    pub agents: Vec<usize>,
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub merit: f64,
}

impl VoteStatistics {
    pub fn mean_of(&self, agent: usize) -> Option<f64> {
        self.agents.iter().position(|&a| a == agent).map(|k| self.mean[k])
    }

    pub fn std_of(&self, agent: usize) -> Option<f64> {
        self.agents.iter().position(|&a| a == agent).map(|k| self.std[k])
    }
}

/// One draw-and-solve per trial on stream `trial`; statistics are summed in
/// trial order so the result does not depend on scheduling.
pub fn monte_carlo_votes(
    graph: &CommitteeGraph,
    scenario: &VotingScenario,
    trials: usize,
    seed: u64,
) -> Result<VoteStatistics> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let n = graph.len();
    scenario.validate(n)?;
    let p = &graph.productivity;
    let p_max = graph.params.p_max;
    let m_c = candidate_merit(p, scenario.candidate, p_max, scenario.merit)?;
    let reference = merit_reference_value(p, p_max, scenario.merit_reference);
    let solver = match scenario.solve_mode {
        SolveMode::Joint => VoteSolver::joint(&graph.laplacian, scenario.mu, scenario.epsilon)?,
        SolveMode::Clamped => {
            VoteSolver::clamped(&graph.laplacian, scenario.mu, scenario.epsilon, &scenario.v_undecided)?
        }
    };

    let finals: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut gen = RngSpec::new(seed, t as u64).rng();
            let x0 = initial_votes(scenario, p, reference, m_c, || gen.random_range(-1.0..=1.0))?;
            Ok(solver.solve(&x0)?.x)
        })
        .collect::<Result<_>>()?;

    let agents: Vec<usize> = scenario.v_undecided.iter().copied().collect();
    let count = trials as f64;
    let mut mean = vec![0.0; agents.len()];
    for x in &finals {
        for (m, &a) in mean.iter_mut().zip(&agents) {
            *m += x[a];
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0.0; agents.len()];
    for x in &finals {
        for ((v, &a), m) in var.iter_mut().zip(&agents).zip(&mean) {
            *v += (x[a] - m).powi(2);
        }
    }
    let std = var.into_iter().map(|v| (v / count).sqrt()).collect();
    Ok(VoteStatistics {
        agents,
        mean,
        std,
        trials,
        seed,
        merit: m_c,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub gamma: f64,
    pub mu: f64,
    pub agent: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub gammas: Vec<f64>,
    pub mus: Vec<f64>,
    /// Undecided agents by ascending adjusted productivity.
    pub agents: Vec<usize>,
    /// Ordered by gamma, then mu, then agent (in `agents` order).
    pub cells: Vec<SweepCell>,
    pub trials: usize,
    pub seed: u64,
}

impl SweepResult {
    pub fn cell(&self, gamma_idx: usize, mu_idx: usize, agent: usize) -> Option<&SweepCell> {
        let k = self.agents.iter().position(|&a| a == agent)?;
        let stride = self.agents.len();
        self.cells.get((gamma_idx * self.mus.len() + mu_idx) * stride + k)
    }

    /// Means of `agent` across gammas at one mu.
    pub fn gamma_series(&self, mu_idx: usize, agent: usize) -> Vec<f64> {
        (0..self.gammas.len())
            .filter_map(|g| self.cell(g, mu_idx, agent).map(|c| c.mean))
            .collect()
    }
}

/// Full factorial over `gammas × mus`; the graph is rebuilt for every gamma
/// and every cell reuses `seed`, so gamma and mu are the only varying factors.
pub fn gamma_sweep(
    data: &DepartmentData,
    params: &ModelParams,
    scenario: &VotingScenario,
    gammas: &[f64],
    mus: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SweepResult> {
    if gammas.is_empty() || mus.is_empty() {
        return Err(Error::Parameter("gamma and mu sweeps must be non-empty".into()));
    }
    let mut agents: Vec<usize> = scenario.v_undecided.iter().copied().collect();
    let mut cells = Vec::with_capacity(gammas.len() * mus.len() * agents.len());
    let mut order_fixed = false;
    for &gamma in gammas {
        let graph = CommitteeGraph::build(data, &ModelParams { gamma, ..params.clone() })?;
        if !order_fixed {
            let p = &graph.productivity.values;
            agents.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
            order_fixed = true;
        }
        for &mu in mus {
            let stats = monte_carlo_votes(&graph, &VotingScenario { mu, ..scenario.clone() }, trials, seed)?;
            for &agent in &agents {
                cells.push(SweepCell {
                    gamma,
                    mu,
                    agent,
                    mean: stats.mean_of(agent).unwrap_or(f64::NAN),
                    std: stats.std_of(agent).unwrap_or(f64::NAN),
                });
            }
        }
    }
    Ok(SweepResult {
        gammas: gammas.to_vec(),
        mus: mus.to_vec(),
        agents,
        cells,
        trials,
        seed,
    })
}
