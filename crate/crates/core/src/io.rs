//! JSON input documents, CSV matrix exchange, and run manifests.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{DepartmentData, Matrix, ModelParams, Role};
use crate::voting::{MeritMode, MeritReference, SolveMode, VotingScenario};

/// Agent label; integers in JSON are accepted and written back as integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Label(pub String);

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.parse::<u64>() {
            Ok(v) if v.to_string() == self.0 => s.serialize_u64(v),
            _ => s.serialize_str(&self.0),
        }
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Int(v) => Label(v.to_string()),
            Raw::Str(s) => Label(s),
        })
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

/// On-disk department description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepartmentDocument {
    pub agents: Vec<Label>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub criteria: BTreeMap<String, Vec<f64>>,
    /// Row-major square tables.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pair_criteria: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub criterion_weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pair_weights: BTreeMap<String, f64>,
    /// Precomputed productivity, used instead of `criteria` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub productivity: Option<Vec<f64>>,
    /// Precomputed collaboration, added to whatever `pair_criteria` yield.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collaboration: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub roles: BTreeMap<String, String>,
    #[serde(default)]
    pub inbred_set: Vec<Label>,
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "table `{name}` has a row of length {} in a {n}-row table",
            bad.len()
        )));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl DepartmentDocument {
    pub fn into_domain(self) -> Result<(DepartmentData, BTreeMap<String, f64>, BTreeMap<String, f64>)> {
        let agents: Vec<String> = self.agents.into_iter().map(|l| l.0).collect();
        let mut data = DepartmentData {
            agents,
            criteria: self.criteria,
            ..Default::default()
        };
        for (name, rows) in &self.pair_criteria {
            data.pair_criteria.insert(name.clone(), rows_to_matrix(name, rows)?);
        }
        data.productivity = self.productivity;
        data.collaboration = self
            .collaboration
            .as_deref()
            .map(|rows| rows_to_matrix("collaboration", rows))
            .transpose()?;
        for (label, tag) in &self.roles {
            let i = data.index_of(label)?;
            data.roles.insert(i, tag.parse::<Role>()?);
        }
        for label in &self.inbred_set {
            let i = data.index_of(&label.0)?;
            data.inbred.insert(i);
        }
        data.validate()?;
        Ok((data, self.criterion_weights, self.pair_weights))
    }

    pub fn from_domain(data: &DepartmentData, params: &ModelParams) -> Self {
        Self {
            agents: data.agents.iter().map(|a| Label(a.clone())).collect(),
            criteria: data.criteria.clone(),
            pair_criteria: data
                .pair_criteria
                .iter()
                .map(|(k, m)| (k.clone(), matrix_to_rows(m)))
                .collect(),
            criterion_weights: params.individual_weights.clone(),
            pair_weights: params.pair_weights.clone(),
            productivity: data.productivity.clone(),
            collaboration: data.collaboration.as_ref().map(matrix_to_rows),
            roles: data
                .roles
                .iter()
                .map(|(&i, r)| (data.agents[i].clone(), r.to_string()))
                .collect(),
            inbred_set: data.inbred.iter().map(|&i| Label(data.agents[i].clone())).collect(),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    fs::File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

pub fn read_department(path: &Path) -> Result<DepartmentDocument> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// On-disk voting scenario. Unset parameters fall back to the caller's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub candidate: Label,
    #[serde(default)]
    pub v_plus: Vec<Label>,
    #[serde(default)]
    pub v_minus: Vec<Label>,
    #[serde(default)]
    pub v_undecided: Vec<Label>,
    #[serde(default)]
    pub non_voters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_assignment: Option<f64>,
    /// `midpoint`, `mean` or `fixed:<value>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merit_reference: Option<MeritReference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_mode: Option<SolveMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

impl Default for Label {
    fn default() -> Self {
        Label(String::new())
    }
}

impl ScenarioDocument {
    /// Resolves labels against `data`; parameters missing from the document
    /// are taken from `defaults`.
    pub fn into_domain(&self, data: &DepartmentData, defaults: &VotingScenario) -> Result<VotingScenario> {
        let resolve = |labels: &[Label]| -> Result<BTreeSet<usize>> {
            labels.iter().map(|l| data.index_of(&l.0)).collect()
        };
        let mut non_voters = BTreeMap::new();
        for (label, &v) in &self.non_voters {
            non_voters.insert(data.index_of(label)?, v);
        }
        let merit = match &self.merit {
            Some(s) => s.parse::<MeritMode>()?,
            None => defaults.merit,
        };
        let scenario = VotingScenario {
            v_plus: resolve(&self.v_plus)?,
            v_minus: resolve(&self.v_minus)?,
            v_undecided: resolve(&self.v_undecided)?,
            candidate: data.index_of(&self.candidate.0)?,
            candidate_assignment: self.candidate_assignment.unwrap_or(defaults.candidate_assignment),
            non_voters,
            merit,
            merit_reference: self.merit_reference.unwrap_or(defaults.merit_reference),
            alpha: self.alpha.unwrap_or(defaults.alpha),
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            mu: self.mu.unwrap_or(defaults.mu),
            solve_mode: self.solve_mode.unwrap_or(defaults.solve_mode),
        };
        scenario.validate(data.len())?;
        Ok(scenario)
    }

    pub fn from_domain(scenario: &VotingScenario, data: &DepartmentData) -> Self {
        let labels = |set: &BTreeSet<usize>| set.iter().map(|&i| Label(data.agents[i].clone())).collect();
        Self {
            candidate: Label(data.agents[scenario.candidate].clone()),
            v_plus: labels(&scenario.v_plus),
            v_minus: labels(&scenario.v_minus),
            v_undecided: labels(&scenario.v_undecided),
            non_voters: scenario
                .non_voters
                .iter()
                .map(|(&i, &v)| (data.agents[i].clone(), v))
                .collect(),
            candidate_assignment: Some(scenario.candidate_assignment),
            merit: Some(merit_string(scenario.merit)),
            merit_reference: Some(scenario.merit_reference),
            alpha: Some(scenario.alpha),
            epsilon: Some(scenario.epsilon),
            mu: Some(scenario.mu),
            solve_mode: Some(scenario.solve_mode),
            seed: None,
            trials: None,
        }
    }
}

pub fn merit_string(m: MeritMode) -> String {
    match m {
        MeritMode::Fixed(v) => format!("fixed:{v}"),
        MeritMode::Midpoint => "midpoint".into(),
        MeritMode::Mean => "mean".into(),
    }
}

pub fn read_scenario(path: &Path) -> Result<ScenarioDocument> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Fixed six-decimal rendering used for matrices.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Nine significant digits, for quantities far below unity.
pub fn fmt_sci(v: f64) -> String {
    format!("{v:.8e}")
}

/// Square matrix as CSV: a header row of agent labels, then one row per agent.
pub fn matrix_to_csv(labels: &[String], m: &Matrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(labels)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| fmt6(*v)))?;
    }
    finish_csv(w)
}

pub fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Malformed(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn matrix_from_csv(text: &str) -> Result<(Vec<String>, Matrix)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let labels: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let n = labels.len();
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != n {
            return Err(Error::Dimension(format!("row {} has {} fields, expected {n}", rows + 1, rec.len())));
        }
        for field in rec.iter() {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Malformed(format!("not a number: `{field}`")))?;
            values.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Dimension(format!("{rows} rows for {n} header labels")));
    }
    Ok((labels, Matrix::from_row_slice(n, n, &values)))
}

pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Matrix)> {
    matrix_from_csv(&read_text(path)?)
}

/// Everything needed to rerun a command exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), v);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study;

    #[test]
    fn labels_accept_numbers_and_strings() {
        let v: Vec<Label> = serde_json::from_str(r#"[1, "b", 30]"#).unwrap();
        assert_eq!(v, vec![Label("1".into()), Label("b".into()), Label("30".into())]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[1,"b",30]"#);
        // Leading zeros are not canonical integers.
        assert_eq!(serde_json::to_string(&Label("007".into())).unwrap(), r#""007""#);
    }

    #[test]
    fn department_document_round_trip() {
        let data = case_study::department();
        let params = case_study::default_params();
        let doc = DepartmentDocument::from_domain(&data, &params);
        let text = to_json_pretty(&doc).unwrap();
        let back: DepartmentDocument = serde_json::from_str(&text).unwrap();
        let (data2, w, pw) = back.into_domain().unwrap();
        assert_eq!(data2, data);
        assert_eq!(w, params.individual_weights);
        assert_eq!(pw, params.pair_weights);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<DepartmentDocument>(r#"{"agents": [1], "colour": 3}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<ScenarioDocument>(r#"{"candidate": 1, "beta": 3}"#);
        assert!(err.is_err());
    }

    #[test]
    fn bad_role_and_agent_are_rejected() {
        let doc: DepartmentDocument =
            serde_json::from_str(r#"{"agents": [1, 2], "productivity": [1, 2], "roles": {"1": "dean"}}"#).unwrap();
        assert!(matches!(doc.into_domain(), Err(Error::UnknownRole(_))));
        let doc: DepartmentDocument =
            serde_json::from_str(r#"{"agents": [1, 2], "productivity": [1, 2], "inbred_set": [3]}"#).unwrap();
        assert!(matches!(doc.into_domain(), Err(Error::UnknownAgent(_))));
    }

    #[test]
    fn scenario_document_round_trip() {
        let data = case_study::department();
        let scenario = case_study::default_scenario();
        let doc = ScenarioDocument::from_domain(&scenario, &data);
        let text = to_json_pretty(&doc).unwrap();
        let back: ScenarioDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_domain(&data, &scenario).unwrap(), scenario);
    }

    #[test]
    fn matrix_csv_shape_errors() {
        assert!(matrix_from_csv("a,b\n1,2\n").is_err());
        assert!(matrix_from_csv("a,b\n1,2\n3\n").is_err());
        assert!(matrix_from_csv("a,b\n1,x\n3,4\n").is_err());
        let (labels, m) = matrix_from_csv("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(labels, vec!["a", "b"]);
        assert_eq!(m[(1, 0)], 3.0);
    }
}
