//! Rendering of results into named text artifacts (CSV, JSON, SVG).
//!
//! Every artifact is built in memory first so file names and bytes are a pure
//! function of the inputs.

use std::fs;
use std::path::Path;

use serde_json::json;

use crate::case_study::{self, agent_classes, CaseStudy, Figure1, Figure3Panel, FIGURE3_TARGETS};
use crate::error::Result;
use crate::io::{finish_csv, fmt6, fmt_sci, matrix_to_csv, to_json_pretty};
use crate::model::{CommitteeGraph, Matrix};
use crate::spectral::{FieldGrid, InfluenceDiagram};
use crate::svg;
use crate::voting::{SweepResult, VoteOutcome, VoteStatistics};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }
}

/// Writes each artifact under `dir` and returns their names.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.contents)?;
        names.push(a.name.clone());
    }
    Ok(names)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn matrix_json(m: &Matrix) -> serde_json::Value {
    json!(m.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn graph_artifacts(labels: &[String], graph: &CommitteeGraph) -> Result<Vec<Artifact>> {
    let mut w = csv_writer();
    w.write_record(["agent_id", "raw", "adjusted"])?;
    for (i, label) in labels.iter().enumerate() {
        w.write_record([
            label.clone(),
            fmt6(graph.productivity_raw.values[i]),
            fmt6(graph.productivity.values[i]),
        ])?;
    }
    let productivity = finish_csv(w)?;
    let doc = json!({
        "agents": labels,
        "productivity_raw": graph.productivity_raw.values,
        "productivity": graph.productivity.values,
        "R": matrix_json(&graph.collaboration),
        "S": matrix_json(&graph.social),
        "B": matrix_json(&graph.inbreeding),
        "W": matrix_json(&graph.weights),
        "L": matrix_json(&graph.laplacian),
        "asymmetry": graph.asymmetry,
        "params": graph.params,
    });
    Ok(vec![
        Artifact::new("productivity.csv", productivity),
        Artifact::new("R.csv", matrix_to_csv(labels, &graph.collaboration)?),
        Artifact::new("S.csv", matrix_to_csv(labels, &graph.social)?),
        Artifact::new("W.csv", matrix_to_csv(labels, &graph.weights)?),
        Artifact::new("L.csv", matrix_to_csv(labels, &graph.laplacian)?),
        Artifact::new("graph.json", to_json_pretty(&doc)?),
    ])
}

pub fn diagram_csv(labels: &[String], diagram: &InfluenceDiagram) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["agent_id", "x", "y"])?;
    for (label, p) in labels.iter().zip(&diagram.points) {
        w.write_record([label.clone(), fmt_sci(p[0]), fmt_sci(p[1])])?;
    }
    finish_csv(w)
}

pub fn spectrum_csv(eigenvalues: &[f64]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["index", "eigenvalue"])?;
    for (k, v) in eigenvalues.iter().enumerate() {
        w.write_record([(k + 1).to_string(), fmt_sci(*v)])?;
    }
    finish_csv(w)
}

pub fn field_csv(grid: &FieldGrid) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["ix", "iy", "x", "y", "value"])?;
    for iy in 0..grid.resolution {
        for ix in 0..grid.resolution {
            let c = grid.cell_center(ix, iy);
            w.write_record([
                ix.to_string(),
                iy.to_string(),
                fmt_sci(c[0]),
                fmt_sci(c[1]),
                fmt_sci(grid.value(ix, iy)),
            ])?;
        }
    }
    finish_csv(w)
}

pub fn outcome_csv(labels: &[String], outcome: &VoteOutcome) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["agent_id", "x0", "x"])?;
    for (i, label) in labels.iter().enumerate() {
        w.write_record([label.clone(), fmt_sci(outcome.x0[i]), fmt_sci(outcome.x[i])])?;
    }
    finish_csv(w)
}

pub fn statistics_csv(labels: &[String], stats: &VoteStatistics) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["agent_id", "mean", "std", "trials"])?;
    for (k, &a) in stats.agents.iter().enumerate() {
        w.write_record([
            labels[a].clone(),
            fmt_sci(stats.mean[k]),
            fmt_sci(stats.std[k]),
            stats.trials.to_string(),
        ])?;
    }
    finish_csv(w)
}

pub fn sweep_csv(labels: &[String], sweep: &SweepResult) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["gamma", "mu", "agent_id", "mean", "std", "trials"])?;
    for c in &sweep.cells {
        w.write_record([
            format!("{}", c.gamma),
            format!("{}", c.mu),
            labels[c.agent].clone(),
            fmt_sci(c.mean),
            fmt_sci(c.std),
            sweep.trials.to_string(),
        ])?;
    }
    finish_csv(w)
}

pub fn sweep_artifacts(labels: &[String], sweep: &SweepResult, stem: &str, title: &str) -> Result<Vec<Artifact>> {
    Ok(vec![
        Artifact::new(format!("{stem}.csv"), sweep_csv(labels, sweep)?),
        Artifact::new(format!("{stem}.json"), to_json_pretty(sweep)?),
        Artifact::new(format!("{stem}.svg"), svg::grouped_bars(sweep, labels, title)),
    ])
}

/// File stem for one diagram of the eta × P_max grid.
pub fn figure1_stem(eta: f64, p_max: f64) -> String {
    format!("fig1_eta{eta:.2}_pmax{p_max}")
}

pub fn figure1_artifacts(cs: &CaseStudy, fig: &Figure1) -> Result<Vec<Artifact>> {
    let labels = &cs.department.agents;
    let classes = agent_classes(&cs.scenario, &cs.department.roles, labels.len());
    let mut out = Vec::new();
    let mut summary = csv_writer();
    summary.write_record(["eta", "p_max", "lambda2", "lambda3", "bounding_box_diagonal"])?;
    for cell in &fig.cells {
        let stem = figure1_stem(cell.eta, cell.p_max);
        out.push(Artifact::new(format!("{stem}.csv"), diagram_csv(labels, &cell.diagram)?));
        let title = format!("eta = {:.2}, P_max = {}, gamma = 0", cell.eta, cell.p_max);
        out.push(Artifact::new(
            format!("{stem}.svg"),
            svg::scatter(&cell.diagram.points, labels, &classes, &title),
        ));
        summary.write_record([
            format!("{:.2}", cell.eta),
            format!("{}", cell.p_max),
            fmt_sci(cell.diagram.lambda2),
            fmt_sci(cell.diagram.lambda3),
            fmt_sci(cell.bounding_box_diagonal),
        ])?;
    }
    out.push(Artifact::new("fig1_summary.csv", finish_csv(summary)?));

    let mut tau = csv_writer();
    tau.write_record(["cell_a", "cell_b", "kendall_tau"])?;
    for c in &fig.correlations {
        let (a, b) = (&fig.cells[c.a], &fig.cells[c.b]);
        tau.write_record([figure1_stem(a.eta, a.p_max), figure1_stem(b.eta, b.p_max), fmt6(c.tau)])?;
    }
    out.push(Artifact::new("fig1_rank_correlation.csv", finish_csv(tau)?));
    Ok(out)
}

pub fn figure2_artifacts(cs: &CaseStudy, diagram: &InfluenceDiagram) -> Result<Vec<Artifact>> {
    let labels = &cs.department.agents;
    let classes = agent_classes(&cs.scenario, &cs.department.roles, labels.len());
    let p = &cs.params;
    let title = format!("eta = {}, P_max = {}, gamma = {}", p.eta, p.p_max, p.gamma);
    Ok(vec![
        Artifact::new("fig2.csv", diagram_csv(labels, diagram)?),
        Artifact::new("fig2.svg", svg::scatter(&diagram.points, labels, &classes, &title)),
    ])
}

pub fn figure3_artifacts(cs: &CaseStudy, diagram: &InfluenceDiagram, panels: &[Figure3Panel]) -> Result<Vec<Artifact>> {
    let labels = &cs.department.agents;
    let classes = agent_classes(&cs.scenario, &cs.department.roles, labels.len());
    let colors: Vec<&str> = classes.iter().map(|c| svg::class_color(*c)).collect();
    let mut out = Vec::new();
    let mut areas = csv_writer();
    areas.write_record(["chair_value", "chair_sigma", "positive_fraction", "reference_fraction"])?;
    for (k, panel) in panels.iter().enumerate() {
        let stem = format!("fig3_chair{}", panel.chair_value);
        out.push(Artifact::new(format!("{stem}.csv"), field_csv(&panel.grid)?));
        let title = format!(
            "chair x = {}, chair sigma = {:e}: {:.1}% positive",
            panel.chair_value,
            panel.chair_sigma,
            100.0 * panel.positive_fraction
        );
        out.push(Artifact::new(
            format!("{stem}.svg"),
            svg::contour(&panel.grid, &diagram.points, labels, &colors, &title),
        ));
        areas.write_record([
            format!("{}", panel.chair_value),
            format!("{:e}", panel.chair_sigma),
            fmt6(panel.positive_fraction),
            FIGURE3_TARGETS.get(k).map(|t| format!("{t}")).unwrap_or_default(),
        ])?;
    }
    out.push(Artifact::new("fig3_areas.csv", finish_csv(areas)?));
    Ok(out)
}

pub fn figure4_artifacts(cs: &CaseStudy, sweep: &SweepResult) -> Result<Vec<Artifact>> {
    sweep_artifacts(
        &cs.department.agents,
        sweep,
        "fig4",
        "Mean final decision of undecided agents by gamma",
    )
}

/// Every case-study figure at the given options.
pub fn all_figures(
    cs: &CaseStudy,
    opts: &case_study::FieldOptions,
    trials: usize,
    seed: u64,
) -> Result<Vec<Artifact>> {
    let mut out = figure1_artifacts(cs, &case_study::reproduce_figure1(cs)?)?;
    out.extend(figure2_artifacts(cs, &case_study::reproduce_figure2(cs)?)?);
    let (diagram, panels) = case_study::reproduce_figure3(cs, opts)?;
    out.extend(figure3_artifacts(cs, &diagram, &panels)?);
    out.extend(figure4_artifacts(cs, &case_study::reproduce_figure4(cs, trials, seed)?)?);
    Ok(out)
}
