//! Embedded eleven-agent department and one-call reproduction of its figures.
//!
//! Agent labels are `1..=11`; positions are the label minus one. The
//! collaboration matrix is stored verbatim, including the one
//! asymmetric pair, and is symmetrized when the graph is built.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{symmetrize_pairs, AsymmetryReport, CommitteeGraph, DepartmentData, Matrix, ModelParams, Role};
use crate::spectral::{
    eigendecompose, embed, positive_area_fraction, sample_field, Bounds, FieldGrid, InfluenceDiagram, Provenance,
};
use crate::voting::{gamma_sweep, MeritMode, MeritReference, SolveMode, SweepResult, VotingScenario};

pub const AGENTS: usize = 11;

/// Reference productivity vector, before role increments.
pub const PRODUCTIVITY: [f64; AGENTS] = [4.127, 0.229, 0.930, 1.788, 3.779, 0.789, 4.087, 2.769, 0.138, 2.637, 0.727];

/// Reference collaboration matrix, verbatim.
#[rustfmt::skip]
pub const COLLABORATION: [[f64; AGENTS]; AGENTS] = [
    [0.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.891, 1.363, 0.000, 0.441, 0.000],
    [0.000, 0.000, 0.016, 0.000, 0.000, 0.000, 0.185, 0.000, 0.000, 0.000, 0.000],
    [0.000, 0.016, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000],
    [0.000, 0.000, 0.000, 0.000, 0.063, 0.000, 0.812, 0.436, 0.000, 0.385, 0.398],
    [0.000, 0.000, 0.000, 0.063, 0.000, 0.000, 0.526, 0.146, 0.252, 0.000, 0.000],
    [0.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.101, 0.000, 0.000, 0.000],
    [0.891, 0.185, 0.000, 0.812, 0.526, 0.000, 0.000, 0.371, 0.000, 0.049, 0.000],
    [1.369, 0.000, 0.000, 0.436, 0.146, 0.101, 0.371, 0.000, 0.117, 0.016, 0.000],
    [0.000, 0.000, 0.000, 0.000, 0.252, 0.000, 0.000, 0.117, 0.000, 0.000, 0.000],
    [0.441, 0.000, 0.000, 0.385, 0.000, 0.000, 0.049, 0.016, 0.000, 0.000, 0.000],
    [0.000, 0.000, 0.000, 0.398, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000],
];

// Zero-based positions.
pub const CANDIDATE: usize = 0;
pub const CHAIR: usize = 3;
pub const COORDINATOR: usize = 8;
pub const SUPPORTERS: [usize; 2] = [6, 7];
pub const OPPONENTS: [usize; 3] = [5, 9, 10];
pub const UNDECIDED: [usize; 4] = [1, 2, 4, 8];
pub const INBRED: [usize; 4] = [1, 2, 3, 10];

pub const ETA: f64 = 0.25;
pub const P_MAX: f64 = 7.0;
pub const GAMMA: f64 = 0.25;
pub const ALPHA: f64 = 0.15;
pub const EPSILON: f64 = 0.0;
pub const MU: f64 = 1.0;
pub const SIGMA: f64 = 4e-4;
pub const WIDE_SIGMA: f64 = 16e-4;

pub const FIGURE1_ETAS: [f64; 3] = [0.20, 0.35, 0.50];
pub const FIGURE1_P_MAXES: [f64; 3] = [6.0, 9.0, 12.0];
pub const FIGURE4_GAMMAS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const FIGURE4_MUS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn collaboration_raw() -> Matrix {
    Matrix::from_fn(AGENTS, AGENTS, |i, j| COLLABORATION[i][j])
}

pub fn department() -> DepartmentData {
    DepartmentData {
        agents: (1..=AGENTS).map(|i| i.to_string()).collect(),
        criteria: BTreeMap::new(),
        pair_criteria: BTreeMap::new(),
        productivity: Some(PRODUCTIVITY.to_vec()),
        collaboration: Some(collaboration_raw()),
        roles: BTreeMap::from([(CHAIR, Role::Chair), (COORDINATOR, Role::Coordinator)]),
        inbred: INBRED.into_iter().collect(),
    }
}

/// Default model parameters. The criterion weights are the ones the
/// reference vector was derived with; they are informational here since the
/// vector itself is the input.
pub fn default_params() -> ModelParams {
    let weights: BTreeMap<String, f64> = [("JOUR", 0.67), ("PUBL", 0.33), ("FUND", 1.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    ModelParams {
        individual_weights: weights.clone(),
        pair_weights: weights,
        eta: ETA,
        p_max: P_MAX,
        gamma: GAMMA,
        ..Default::default()
    }
}

pub fn default_scenario() -> VotingScenario {
    VotingScenario {
        v_plus: SUPPORTERS.into_iter().collect(),
        v_minus: OPPONENTS.into_iter().collect(),
        v_undecided: UNDECIDED.into_iter().collect(),
        candidate: CANDIDATE,
        candidate_assignment: 1.0,
        non_voters: BTreeMap::from([(CHAIR, 0.0)]),
        merit: MeritMode::Midpoint,
        merit_reference: MeritReference::PMax,
        alpha: ALPHA,
        epsilon: EPSILON,
        mu: MU,
        solve_mode: SolveMode::Joint,
    }
}

#[derive(Clone, Debug)]
pub struct CaseStudy {
    pub department: DepartmentData,
    /// Symmetrized collaboration matrix.
    pub collaboration: Matrix,
    pub asymmetry: AsymmetryReport,
    pub scenario: VotingScenario,
    pub params: ModelParams,
}

impl CaseStudy {
    pub fn graph(&self, params: &ModelParams) -> Result<CommitteeGraph> {
        CommitteeGraph::build(&self.department, params)
    }

    pub fn diagram(&self, params: &ModelParams) -> Result<InfluenceDiagram> {
        let graph = self.graph(params)?;
        let mut diagram = embed(&eigendecompose(&graph.laplacian, 1e-12)?)?;
        diagram.provenance = Some(Provenance {
            eta: params.eta,
            p_max: params.p_max,
            gamma: params.gamma,
        });
        Ok(diagram)
    }
}

/// Role adjustments are not applied here; graph construction applies them.
pub fn load_case_study() -> CaseStudy {
    let params = default_params();
    let (collaboration, asymmetry) = symmetrize_pairs(&collaboration_raw(), params.symmetry_tol);
    CaseStudy {
        department: department(),
        collaboration,
        asymmetry,
        scenario: default_scenario(),
        params,
    }
}

/// Colour class of an agent in diagram plots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentClass {
    Candidate,
    Supporter,
    Opponent,
    Undecided,
    Chair,
    NonVoter,
}

impl AgentClass {
    pub fn name(self) -> &'static str {
        match self {
            AgentClass::Candidate => "candidate",
            AgentClass::Supporter => "supporter",
            AgentClass::Opponent => "opponent",
            AgentClass::Undecided => "undecided",
            AgentClass::Chair => "chair",
            AgentClass::NonVoter => "non-voter",
        }
    }
}

pub fn agent_classes(scenario: &VotingScenario, roles: &BTreeMap<usize, Role>, n: usize) -> Vec<AgentClass> {
    (0..n)
        .map(|i| {
            if i == scenario.candidate {
                AgentClass::Candidate
            } else if scenario.v_plus.contains(&i) {
                AgentClass::Supporter
            } else if scenario.v_minus.contains(&i) {
                AgentClass::Opponent
            } else if scenario.v_undecided.contains(&i) {
                AgentClass::Undecided
            } else if roles.get(&i) == Some(&Role::Chair) {
                AgentClass::Chair
            } else {
                AgentClass::NonVoter
            }
        })
        .collect()
}

/// Kendall's tau-b between two paired samples.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_a, mut ties_b) = (0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let da = (a[i] - a[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal);
            let db = (b[i] - b[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal);
            use std::cmp::Ordering::Equal;
            match (da, db) {
                (Equal, Equal) => {}
                (Equal, _) => ties_a += 1,
                (_, Equal) => ties_b += 1,
                _ if da == db => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let denom = (((concordant + discordant + ties_a) * (concordant + discordant + ties_b)) as f64).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (concordant - discordant) as f64 / denom
}

/// Pairwise distances among all agents outside `excluded`, in `(i, j)`, `i < j` order.
pub fn pairwise_distances(diagram: &InfluenceDiagram, excluded: &BTreeSet<usize>) -> Vec<f64> {
    let keep: Vec<usize> = (0..diagram.len()).filter(|i| !excluded.contains(i)).collect();
    let mut out = Vec::new();
    for (k, &i) in keep.iter().enumerate() {
        for &j in &keep[k + 1..] {
            out.push(diagram.distance(i, j));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Figure1Cell {
    pub eta: f64,
    pub p_max: f64,
    pub diagram: InfluenceDiagram,
    pub bounding_box_diagonal: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub a: usize,
    pub b: usize,
    pub tau: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Figure1 {
    /// Row-major over `FIGURE1_ETAS × FIGURE1_P_MAXES`.
    pub cells: Vec<Figure1Cell>,
    /// Kendall tau of pairwise distances (chair and coordinator excluded)
    /// for every pair of cells.
    pub correlations: Vec<RankCorrelation>,
}

impl Figure1 {
    pub fn min_tau(&self) -> f64 {
        self.correlations.iter().map(|c| c.tau).fold(f64::INFINITY, f64::min)
    }
}

/// Diagram grid over eta × P_max with no inbreeding term.
pub fn reproduce_figure1(cs: &CaseStudy) -> Result<Figure1> {
    let mut cells = Vec::new();
    for &eta in &FIGURE1_ETAS {
        for &p_max in &FIGURE1_P_MAXES {
            let params = ModelParams {
                eta,
                p_max,
                gamma: 0.0,
                ..cs.params.clone()
            };
            let diagram = cs.diagram(&params)?;
            let bounding_box_diagonal = diagram.bounding_box_diagonal();
            cells.push(Figure1Cell {
                eta,
                p_max,
                diagram,
                bounding_box_diagonal,
            });
        }
    }
    let excluded: BTreeSet<usize> = [CHAIR, COORDINATOR].into();
    let distances: Vec<Vec<f64>> = cells.iter().map(|c| pairwise_distances(&c.diagram, &excluded)).collect();
    let mut correlations = Vec::new();
    for a in 0..cells.len() {
        for b in (a + 1)..cells.len() {
            correlations.push(RankCorrelation {
                a,
                b,
                tau: kendall_tau(&distances[a], &distances[b]),
            });
        }
    }
    Ok(Figure1 { cells, correlations })
}

pub fn reproduce_figure2(cs: &CaseStudy) -> Result<InfluenceDiagram> {
    cs.diagram(&cs.params)
}

/// Grid and assignment knobs for the chair-influence fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldOptions {
    /// Growth of the bounding square per side, as a fraction of its side.
    pub margin: f64,
    pub resolution: usize,
    pub sigma: f64,
    /// Chair width in the strong-chair panel.
    pub wide_sigma: f64,
    pub candidate_value: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            margin: 0.1,
            resolution: 200,
            sigma: SIGMA,
            wide_sigma: WIDE_SIGMA,
            candidate_value: 0.0,
        }
    }
}

/// Decided agents at ±1, undecided at 0, chair at `chair_value`.
pub fn figure3_assignments(scenario: &VotingScenario, n: usize, chair_value: f64, candidate_value: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for &i in &scenario.v_plus {
        x[i] = 1.0;
    }
    for &i in &scenario.v_minus {
        x[i] = -1.0;
    }
    x[scenario.candidate] = candidate_value;
    x[CHAIR] = chair_value;
    x
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Figure3Panel {
    pub chair_value: f64,
    pub chair_sigma: f64,
    pub assignments: Vec<f64>,
    pub grid: FieldGrid,
    pub positive_fraction: f64,
}

/// Reference positive-area shares for the three chair panels.
pub const FIGURE3_TARGETS: [f64; 3] = [0.28, 0.42, 0.94];

/// Chair absent, chair as an ordinary supporter, chair as a strong wide supporter.
pub fn reproduce_figure3(cs: &CaseStudy, opts: &FieldOptions) -> Result<(InfluenceDiagram, Vec<Figure3Panel>)> {
    let diagram = reproduce_figure2(cs)?;
    let n = diagram.len();
    let bounds = Bounds::square_around(&diagram.points, opts.margin);
    let mut panels = Vec::new();
    for (chair_value, chair_sigma) in [(0.0, opts.sigma), (1.0, opts.sigma), (2.0, opts.wide_sigma)] {
        let assignments = figure3_assignments(&cs.scenario, n, chair_value, opts.candidate_value);
        let mut sigma = vec![opts.sigma; n];
        sigma[CHAIR] = chair_sigma;
        let grid = sample_field(&diagram, &assignments, &sigma, bounds, opts.resolution)?;
        let positive_fraction = positive_area_fraction(&grid)?;
        panels.push(Figure3Panel {
            chair_value,
            chair_sigma,
            assignments,
            grid,
            positive_fraction,
        });
    }
    Ok((diagram, panels))
}

pub fn reproduce_figure4(cs: &CaseStudy, trials: usize, seed: u64) -> Result<SweepResult> {
    gamma_sweep(
        &cs.department,
        &cs.params,
        &cs.scenario,
        &FIGURE4_GAMMAS,
        &FIGURE4_MUS,
        trials,
        seed,
    )
}
