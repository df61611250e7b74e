//! Construction of the committee interaction graph.
//!
//! Raw scholarship data becomes a productivity vector, a collaboration matrix
//! `R`, a social-interaction matrix `S`, an inbreeding term, and finally the
//! weight matrix `W = R + S + B` and its Laplacian. All matrices are dense:
//! the graph is complete by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// How normalized criterion shares are scaled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductivityScale {
    /// Plain department share; each criterion contributes at most its weight.
    Fraction,
    /// Share multiplied by the agent count, so the average agent scores `Σβ`.
    #[default]
    PerAgentMean,
}

impl FromStr for ProductivityScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fraction" => Ok(Self::Fraction),
            "per-agent-mean" => Ok(Self::PerAgentMean),
            other => Err(Error::Parameter(format!("unknown productivity scale `{other}`"))),
        }
    }
}

/// Which agent pairs receive the extra inbreeding weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InbreedingIndicator {
    /// Pairs of inbred agents are linked more strongly.
    #[default]
    Narrative,
    /// Pairs of non-inbred agents are linked more strongly.
    Literal,
}

impl FromStr for InbreedingIndicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "narrative" => Ok(Self::Narrative),
            "literal" => Ok(Self::Literal),
            other => Err(Error::Parameter(format!("unknown inbreeding indicator `{other}`"))),
        }
    }
}

/// Administrative role that earns a productivity increment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Chair,
    Coordinator,
}

impl Role {
    pub fn increment(self) -> f64 {
        match self {
            Role::Chair => 2.0,
            Role::Coordinator => 1.0,
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chair" => Ok(Role::Chair),
            "coordinator" => Ok(Role::Coordinator),
            other => Err(Error::UnknownRole(other.to_string())),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Chair => "chair",
            Role::Coordinator => "coordinator",
        })
    }
}

/// Scholarship data for one department.
///
/// Agents are addressed by position (zero-based) everywhere except in labels.
/// `productivity` and `collaboration`, when present, are treated as
/// already-derived inputs and take precedence over the raw criteria.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DepartmentData {
    pub agents: Vec<String>,
    pub criteria: BTreeMap<String, Vec<f64>>,
    pub pair_criteria: BTreeMap<String, Matrix>,
    pub productivity: Option<Vec<f64>>,
    pub collaboration: Option<Matrix>,
    pub roles: BTreeMap<usize, Role>,
    pub inbred: BTreeSet<usize>,
}

impl DepartmentData {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.agents
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownAgent(label.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::EmptyDepartment);
        }
        let mut seen = BTreeSet::new();
        for a in &self.agents {
            if !seen.insert(a.as_str()) {
                return Err(Error::DuplicateAgent(a.clone()));
            }
        }
        for (name, values) in &self.criteria {
            check_values(name, values, &self.agents)?;
        }
        if let Some(p) = &self.productivity {
            check_values("productivity", p, &self.agents)?;
        }
        for (name, m) in &self.pair_criteria {
            check_pair_table(name, m, &self.agents)?;
        }
        if let Some(r) = &self.collaboration {
            check_pair_table("collaboration", r, &self.agents)?;
        }
        if self.criteria.is_empty() && self.productivity.is_none() {
            return Err(Error::NoCriteria);
        }
        for &i in self.roles.keys().chain(self.inbred.iter()) {
            if i >= n {
                return Err(Error::UnknownAgent(format!("#{}", i + 1)));
            }
        }
        Ok(())
    }
}

fn check_values(name: &str, values: &[f64], agents: &[String]) -> Result<()> {
    if values.len() != agents.len() {
        return Err(Error::Dimension(format!(
            "criterion `{name}` has {} values for {} agents",
            values.len(),
            agents.len()
        )));
    }
    for (v, a) in values.iter().zip(agents) {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(Error::NegativeCriterion {
                criterion: name.to_string(),
                agent: a.clone(),
                value: *v,
            });
        }
    }
    Ok(())
}

fn check_pair_table(name: &str, m: &Matrix, agents: &[String]) -> Result<()> {
    let n = agents.len();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "pair table `{name}` is {}x{} for {n} agents",
            m.nrows(),
            m.ncols()
        )));
    }
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::NegativeCriterion {
                    criterion: name.to_string(),
                    agent: format!("{}/{}", agents[i], agents[j]),
                    value: v,
                });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Per-criterion weights for productivity; missing criteria weigh 1.
    pub individual_weights: BTreeMap<String, f64>,
    /// Per-criterion weights for collaboration; missing criteria weigh 1.
    pub pair_weights: BTreeMap<String, f64>,
    pub eta: f64,
    pub p_max: f64,
    pub gamma: f64,
    pub scale: ProductivityScale,
    pub indicator: InbreedingIndicator,
    /// Pair-table asymmetry above this is flagged in the report.
    pub symmetry_tol: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            individual_weights: BTreeMap::new(),
            pair_weights: BTreeMap::new(),
            eta: 0.25,
            p_max: 7.0,
            gamma: 0.25,
            scale: ProductivityScale::PerAgentMean,
            indicator: InbreedingIndicator::Narrative,
            symmetry_tol: 1e-9,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Parameter(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return Err(Error::Parameter(format!("p_max must be positive, got {}", self.p_max)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Parameter(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        for (name, w) in self.individual_weights.iter().chain(&self.pair_weights) {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::Parameter(format!("weight for `{name}` must be nonnegative, got {w}")));
            }
        }
        Ok(())
    }

    fn individual_weight(&self, criterion: &str) -> f64 {
        self.individual_weights.get(criterion).copied().unwrap_or(1.0)
    }

    fn pair_weight(&self, criterion: &str) -> f64 {
        self.pair_weights.get(criterion).copied().unwrap_or(1.0)
    }

    fn scale_factor(&self, n: usize) -> f64 {
        match self.scale {
            ProductivityScale::Fraction => 1.0,
            ProductivityScale::PerAgentMean => n as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductivityVector {
    pub values: Vec<f64>,
    pub adjusted: bool,
}

impl ProductivityVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, adjusted: false }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Weighted share of department output per agent.
pub fn compute_productivity(data: &DepartmentData, params: &ModelParams) -> Result<ProductivityVector> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDepartment);
    }
    if data.criteria.is_empty() {
        return Err(Error::NoCriteria);
    }
    let scale = params.scale_factor(n);
    let mut p = vec![0.0; n];
    for (name, values) in &data.criteria {
        check_values(name, values, &data.agents)?;
        let total: f64 = values.iter().sum();
        if total == 0.0 {
            continue;
        }
        let beta = params.individual_weight(name);
        for (pi, v) in p.iter_mut().zip(values) {
            *pi += scale * beta * v / total;
        }
    }
    Ok(ProductivityVector::new(p))
}

/// Adds the administrative increments: chair +2, coordinator +1.
pub fn apply_role_adjustments(
    p: &ProductivityVector,
    roles: &BTreeMap<usize, Role>,
) -> Result<ProductivityVector> {
    if p.adjusted {
        return Err(Error::AlreadyAdjusted);
    }
    let mut values = p.values.clone();
    for (&i, role) in roles {
        let slot = values
            .get_mut(i)
            .ok_or_else(|| Error::UnknownAgent(format!("#{}", i + 1)))?;
        *slot += role.increment();
    }
    Ok(ProductivityVector { values, adjusted: true })
}

/// Largest pairwise disagreement between `M_ij` and `M_ji`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryReport {
    pub max: f64,
    /// Zero-based `(i, j)` with `i < j` where `max` occurs.
    pub pair: Option<(usize, usize)>,
    /// Number of unordered pairs with any disagreement at all.
    pub asymmetric_pairs: usize,
    pub tolerance: f64,
}

impl AsymmetryReport {
    pub fn exceeds_tolerance(&self) -> bool {
        self.max > self.tolerance
    }

    fn merge(&mut self, other: &AsymmetryReport) {
        if other.max > self.max {
            self.max = other.max;
            self.pair = other.pair;
        }
        self.asymmetric_pairs += other.asymmetric_pairs;
    }
}

/// Returns `(M + Mᵀ)/2` with a zero diagonal, plus the asymmetry found.
pub fn symmetrize_pairs(m: &Matrix, tol: f64) -> (Matrix, AsymmetryReport) {
    assert!(m.is_square(), "symmetrize_pairs needs a square matrix");
    let n = m.nrows();
    let mut out = Matrix::zeros(n, n);
    let mut report = AsymmetryReport { tolerance: tol, ..Default::default() };
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            let gap = (a - b).abs();
            if gap > 0.0 {
                report.asymmetric_pairs += 1;
                if gap > report.max {
                    report.max = gap;
                    report.pair = Some((i, j));
                }
            }
            let avg = if a == b { a } else { 0.5 * (a + b) };
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    (out, report)
}

/// Collaboration matrix `R`, normalized by per-agent department totals.
///
/// Each pair table is symmetrized first; the merged asymmetry report covers
/// all tables.
pub fn compute_collaboration(data: &DepartmentData, params: &ModelParams) -> Result<(Matrix, AsymmetryReport)> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDepartment);
    }
    let scale = params.scale_factor(n);
    let mut r = Matrix::zeros(n, n);
    let mut report = AsymmetryReport { tolerance: params.symmetry_tol, ..Default::default() };
    for (name, table) in &data.pair_criteria {
        check_pair_table(name, table, &data.agents)?;
        let totals = data
            .criteria
            .get(name)
            .ok_or_else(|| Error::UnnormalizedPairCriterion(name.clone()))?;
        let (sym, rep) = symmetrize_pairs(table, params.symmetry_tol);
        report.merge(&rep);
        let total: f64 = totals.iter().sum();
        if total == 0.0 {
            continue;
        }
        r += sym * (scale * params.pair_weight(name) / total);
    }
    r.fill_diagonal(0.0);
    Ok((r, report))
}

/// Social interaction `S_ij = P_max − η√(p_i p_j)` off the diagonal.
pub fn compute_social(p: &ProductivityVector, params: &ModelParams) -> Result<Matrix> {
    let n = p.len();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = params.p_max - params.eta * (p.values[i] * p.values[j]).sqrt();
            if v <= 0.0 {
                return Err(Error::NonPositiveWeight { i, j, value: v });
            }
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

/// Rank-one inbreeding term `γuuᵀ` with its diagonal removed.
pub fn compute_inbreeding_term(
    inbred: &BTreeSet<usize>,
    gamma: f64,
    n: usize,
    indicator: InbreedingIndicator,
) -> Result<Matrix> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("gamma must be nonnegative, got {gamma}")));
    }
    if let Some(&bad) = inbred.iter().find(|&&i| i >= n) {
        return Err(Error::UnknownAgent(format!("#{}", bad + 1)));
    }
    let flagged: Vec<bool> = (0..n)
        .map(|i| match indicator {
            InbreedingIndicator::Narrative => inbred.contains(&i),
            InbreedingIndicator::Literal => !inbred.contains(&i),
        })
        .collect();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i != j && flagged[i] && flagged[j] {
            gamma
        } else {
            0.0
        }
    }))
}

/// `W = R + S + B`; every off-diagonal entry must be strictly positive.
pub fn assemble_weights(r: &Matrix, s: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = r.nrows();
    for (name, m) in [("R", r), ("S", s), ("B", b)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
        }
    }
    let mut w = r + s + b;
    w.fill_diagonal(0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = w[(i, j)];
            if !(v > 0.0) {
                return Err(Error::NonPositiveWeight { i, j, value: v });
            }
        }
    }
    Ok(w)
}

pub fn max_asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Combinatorial Laplacian `L = diag(W·1) − W`.
pub fn laplacian(w: &Matrix) -> Result<Matrix> {
    if !w.is_square() {
        return Err(Error::Dimension(format!("W is {}x{}", w.nrows(), w.ncols())));
    }
    let asym = max_asymmetry(w);
    if asym > 0.0 {
        return Err(Error::NotSymmetric(asym));
    }
    let n = w.nrows();
    let mut l = -w.clone();
    for i in 0..n {
        let degree: f64 = (0..n).filter(|&k| k != i).map(|k| w[(i, k)]).sum();
        l[(i, i)] = degree;
    }
    Ok(l)
}

/// Every matrix derived from a department under one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct CommitteeGraph {
    pub productivity_raw: ProductivityVector,
    pub productivity: ProductivityVector,
    pub collaboration: Matrix,
    pub social: Matrix,
    pub inbreeding: Matrix,
    pub weights: Matrix,
    pub laplacian: Matrix,
    pub asymmetry: AsymmetryReport,
    pub params: ModelParams,
}

impl CommitteeGraph {
    pub fn build(data: &DepartmentData, params: &ModelParams) -> Result<Self> {
        data.validate()?;
        params.validate()?;
        let n = data.len();
        let raw = match &data.productivity {
            Some(p) => ProductivityVector::new(p.clone()),
            None => compute_productivity(data, params)?,
        };
        let adjusted = apply_role_adjustments(&raw, &data.roles)?;
        let (mut collaboration, mut asymmetry) = compute_collaboration(data, params)?;
        if let Some(given) = &data.collaboration {
            let (sym, rep) = symmetrize_pairs(given, params.symmetry_tol);
            collaboration += sym;
            asymmetry.merge(&rep);
        }
        let social = compute_social(&adjusted, params)?;
        let inbreeding = compute_inbreeding_term(&data.inbred, params.gamma, n, params.indicator)?;
        let weights = assemble_weights(&collaboration, &social, &inbreeding)?;
        let laplacian = laplacian(&weights)?;
        Ok(Self {
            productivity_raw: raw,
            productivity: adjusted,
            collaboration,
            social,
            inbreeding,
            weights,
            laplacian,
            asymmetry,
            params: params.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    fn criterion_weights() -> BTreeMap<String, f64> {
        [("JOUR", 0.67), ("PUBL", 0.33), ("FUND", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    fn fraction_params() -> ModelParams {
        ModelParams {
            individual_weights: criterion_weights(),
            pair_weights: criterion_weights(),
            scale: ProductivityScale::Fraction,
            ..Default::default()
        }
    }

    fn dept(criteria: &[(&str, Vec<f64>)]) -> DepartmentData {
        let n = criteria[0].1.len();
        DepartmentData {
            agents: labels(n),
            criteria: criteria.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn symmetric_department_splits_evenly() {
        let d = dept(&[("JOUR", vec![2.0, 2.0]), ("PUBL", vec![5.0, 5.0]), ("FUND", vec![1.0, 1.0])]);
        let p = compute_productivity(&d, &fraction_params()).unwrap();
        assert_abs_diff_eq!(p.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.values[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_agent_holds_everything() {
        let d = dept(&[("JOUR", vec![3.0]), ("PUBL", vec![7.0]), ("FUND", vec![1e5])]);
        let p = compute_productivity(&d, &fraction_params()).unwrap();
        assert_abs_diff_eq!(p.values[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_total_criterion_contributes_nothing() {
        let d = dept(&[("JOUR", vec![3.0, 1.0]), ("PUBL", vec![0.0, 0.0]), ("FUND", vec![1.0, 0.0])]);
        let p = compute_productivity(&d, &fraction_params()).unwrap();
        assert_abs_diff_eq!(p.values[0], 1.5025, epsilon = 1e-12);
        assert_abs_diff_eq!(p.values[1], 0.1675, epsilon = 1e-12);
    }

    #[test]
    fn per_agent_mean_scales_by_agent_count() {
        let d = dept(&[("JOUR", vec![3.0, 1.0, 0.0]), ("FUND", vec![1.0, 2.0, 5.0])]);
        let mut params = fraction_params();
        let frac = compute_productivity(&d, &params).unwrap();
        params.scale = ProductivityScale::PerAgentMean;
        let mean = compute_productivity(&d, &params).unwrap();
        assert_abs_diff_eq!(frac.sum(), 1.67, epsilon = 1e-12);
        assert_abs_diff_eq!(mean.sum(), 3.0 * 1.67, epsilon = 1e-12);
    }

    #[test]
    fn productivity_errors() {
        let empty = DepartmentData::default();
        assert!(matches!(compute_productivity(&empty, &fraction_params()), Err(Error::EmptyDepartment)));
        let neg = dept(&[("JOUR", vec![1.0, -1.0])]);
        assert!(matches!(
            compute_productivity(&neg, &fraction_params()),
            Err(Error::NegativeCriterion { .. })
        ));
    }

    #[test]
    fn role_adjustments() {
        let p = ProductivityVector::new(vec![1.0, 2.0, 3.0]);
        let unchanged = apply_role_adjustments(&p, &BTreeMap::new()).unwrap();
        assert_eq!(unchanged.values, p.values);
        assert!(unchanged.adjusted);

        let roles = BTreeMap::from([(0, Role::Chair), (2, Role::Coordinator)]);
        let adj = apply_role_adjustments(&p, &roles).unwrap();
        assert_eq!(adj.values, vec![3.0, 2.0, 4.0]);
        assert!(matches!(apply_role_adjustments(&adj, &roles), Err(Error::AlreadyAdjusted)));
        assert!(matches!("dean".parse::<Role>(), Err(Error::UnknownRole(_))));
    }

    #[test]
    fn collaboration_from_joint_publication() {
        let mut d = dept(&[("JOUR", vec![3.0, 1.0])]);
        d.pair_criteria
            .insert("JOUR".into(), Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let (r, rep) = compute_collaboration(&d, &fraction_params()).unwrap();
        assert_abs_diff_eq!(r[(0, 1)], 0.1675, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(1, 0)], 0.1675, epsilon = 1e-12);
        assert_eq!(r[(0, 0)], 0.0);
        assert_eq!(rep.asymmetric_pairs, 0);
    }

    #[test]
    fn no_joint_work_gives_zero_collaboration() {
        let mut d = dept(&[("JOUR", vec![3.0, 1.0, 2.0])]);
        d.pair_criteria.insert("JOUR".into(), Matrix::zeros(3, 3));
        let (r, _) = compute_collaboration(&d, &fraction_params()).unwrap();
        assert_eq!(r, Matrix::zeros(3, 3));
    }

    #[test]
    fn pair_criterion_needs_individual_totals() {
        let mut d = dept(&[("JOUR", vec![3.0, 1.0])]);
        d.pair_criteria.insert("FUND".into(), Matrix::zeros(2, 2));
        assert!(matches!(
            compute_collaboration(&d, &fraction_params()),
            Err(Error::UnnormalizedPairCriterion(_))
        ));
    }

    #[test]
    fn shared_output_matches_productivity_normalization() {
        // Every publication is joint between agents 1 and 2 and nobody else publishes.
        let mut d = dept(&[("JOUR", vec![4.0, 4.0, 0.0])]);
        d.pair_criteria.insert(
            "JOUR".into(),
            Matrix::from_row_slice(3, 3, &[0.0, 4.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        );
        let params = fraction_params();
        let p = compute_productivity(&d, &params).unwrap();
        let (r, _) = compute_collaboration(&d, &params).unwrap();
        assert_abs_diff_eq!(r[(0, 1)], p.values[0], epsilon = 1e-12);
        assert_abs_diff_eq!(r[(0, 1)] + p.values[1], 0.67, epsilon = 1e-12);
    }

    #[test]
    fn symmetrize_cases() {
        let sym = Matrix::from_row_slice(2, 2, &[0.0, 1.5, 1.5, 0.0]);
        let (out, rep) = symmetrize_pairs(&sym, 1e-9);
        assert_eq!(out, sym);
        assert_eq!(rep.max, 0.0);
        assert_eq!(rep.pair, None);

        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 3.0, 0.0]);
        let (out, rep) = symmetrize_pairs(&m, 1e-9);
        assert_eq!(out, Matrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
        assert_eq!(rep.max, 2.0);
        assert_eq!(rep.pair, Some((0, 1)));
        assert!(rep.exceeds_tolerance());
    }

    #[test]
    fn social_matrix_entries() {
        let params = ModelParams { eta: 0.25, p_max: 7.0, ..Default::default() };
        let s = compute_social(&ProductivityVector::new(vec![4.127, 0.229]), &params).unwrap();
        assert_abs_diff_eq!(s[(0, 1)], 6.7570, epsilon = 5e-5);
        assert_eq!(s[(0, 0)], 0.0);
        let s = compute_social(&ProductivityVector::new(vec![0.0, 0.0]), &params).unwrap();
        assert_eq!(s[(0, 1)], 7.0);
        let s = compute_social(&ProductivityVector::new(vec![4.0, 4.0]), &params).unwrap();
        assert_abs_diff_eq!(s[(1, 0)], 6.0, epsilon = 1e-12);
    }

    #[test]
    fn social_rejects_nonpositive_entries() {
        let params = ModelParams { eta: 0.9, p_max: 1.0, ..Default::default() };
        let err = compute_social(&ProductivityVector::new(vec![0.1, 4.0, 3.0]), &params).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { i: 1, j: 2, .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn inbreeding_term_links_inbred_pairs() {
        let inbred: BTreeSet<usize> = [1, 2, 3, 10].into();
        let b = compute_inbreeding_term(&inbred, 0.25, 11, InbreedingIndicator::Narrative).unwrap();
        assert_eq!(b[(1, 2)], 0.25);
        assert_eq!(b[(1, 4)], 0.0);
        assert_eq!(b[(1, 1)], 0.0);
        assert_eq!(b[(10, 3)], 0.25);

        let lit = compute_inbreeding_term(&inbred, 0.25, 11, InbreedingIndicator::Literal).unwrap();
        assert_eq!(lit[(1, 2)], 0.0);
        assert_eq!(lit[(0, 4)], 0.25);

        let zero = compute_inbreeding_term(&inbred, 0.0, 11, InbreedingIndicator::Narrative).unwrap();
        assert_eq!(zero, Matrix::zeros(11, 11));

        let all: BTreeSet<usize> = (0..4).collect();
        let ones = compute_inbreeding_term(&all, 1.0, 4, InbreedingIndicator::Narrative).unwrap();
        assert_eq!(ones, Matrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 }));

        assert!(compute_inbreeding_term(&inbred, -0.1, 11, InbreedingIndicator::Narrative).is_err());
    }

    #[test]
    fn weights_and_laplacian() {
        let s = Matrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        let zero = Matrix::zeros(2, 2);
        let w = assemble_weights(&zero, &s, &zero).unwrap();
        assert_eq!(w, s);

        let doubled = assemble_weights(&(&zero * 2.0), &(&s * 2.0), &(&zero * 2.0)).unwrap();
        assert_eq!(doubled, &w * 2.0);

        let l = laplacian(&w).unwrap();
        assert_eq!(l, Matrix::from_row_slice(2, 2, &[3.0, -3.0, -3.0, 3.0]));

        assert!(matches!(assemble_weights(&zero, &zero, &zero), Err(Error::NonPositiveWeight { .. })));
        let asym = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(laplacian(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().validate().is_ok());
        assert!(ModelParams { eta: 1.0, ..Default::default() }.validate().is_err());
        assert!(ModelParams { p_max: 0.0, ..Default::default() }.validate().is_err());
        assert!(ModelParams { gamma: -1.0, ..Default::default() }.validate().is_err());
    }
}
