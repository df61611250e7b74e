use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use tenure_graph::case_study::{self, agent_classes, FieldOptions};
use tenure_graph::error::{Error, Result};
use tenure_graph::export::{self, Artifact};
use tenure_graph::io::{self, DepartmentDocument, Manifest, ScenarioDocument};
use tenure_graph::model::{CommitteeGraph, DepartmentData, InbreedingIndicator, ModelParams, ProductivityScale};
use tenure_graph::spectral::{self, Bounds, InfluenceDiagram};
use tenure_graph::svg;
use tenure_graph::voting::{self, MeritReference, RngSpec, SolveMode, VotingScenario};

use crate::args::*;

const DEFAULT_TRIALS: usize = 1000;
const DEFAULT_SEED: u64 = 42;
const EMBEDDED: &str = "embedded:case-study";

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => build(a),
        Command::Embed(a) => embed(a),
        Command::Field(a) => field(a),
        Command::Vote(a) => vote(a),
        Command::Sweep(a) => sweep(a),
        Command::CaseStudy(a) => case_study_cmd(a),
        Command::ExportSchema(a) => export_schema(a),
    }
}

/// A department plus the model parameters it is evaluated under.
struct Loaded {
    data: DepartmentData,
    params: ModelParams,
    /// Scenario defaults for this source (the case study's own partition, or
    /// none for user input).
    scenario: Option<VotingScenario>,
    inputs: Vec<String>,
}

impl Loaded {
    fn labels(&self) -> &[String] {
        &self.data.agents
    }

    fn graph(&self) -> Result<CommitteeGraph> {
        CommitteeGraph::build(&self.data, &self.params).inspect_err(|e| self.explain(e))
    }

    fn explain(&self, e: &Error) {
        if let Error::NonPositiveWeight { i, j, value } = e {
            let l = self.labels();
            eprintln!("W check: FAILED, W[{}, {}] = {value:.6} <= 0", l[*i], l[*j]);
        }
    }
}

fn load(input: &InputArgs, model: &ModelArgs) -> Result<Loaded> {
    let mut loaded = if input.case_study {
        let cs = case_study::load_case_study();
        Loaded {
            data: cs.department,
            params: cs.params,
            scenario: Some(cs.scenario),
            inputs: vec![EMBEDDED.to_string()],
        }
    } else {
        let path = input.input.as_deref().expect("clap enforces one input source");
        let (data, individual_weights, pair_weights) = io::read_department(path)?.into_domain()?;
        Loaded {
            data,
            params: ModelParams {
                individual_weights,
                pair_weights,
                ..Default::default()
            },
            scenario: None,
            inputs: vec![path.display().to_string()],
        }
    };
    let p = &mut loaded.params;
    p.eta = model.eta;
    p.p_max = model.pmax;
    p.gamma = model.gamma;
    p.scale = match model.scale {
        ScaleArg::Fraction => ProductivityScale::Fraction,
        ScaleArg::PerAgentMean => ProductivityScale::PerAgentMean,
    };
    p.indicator = match model.indicator {
        IndicatorArg::Narrative => InbreedingIndicator::Narrative,
        IndicatorArg::Literal => InbreedingIndicator::Literal,
    };
    p.symmetry_tol = model.symmetry_tol;
    p.validate()?;
    Ok(loaded)
}

/// Scenario from `--scenario`, else the source's own; document values fill
/// in anything the flags leave unset.
fn load_scenario(
    loaded: &mut Loaded,
    path: Option<&Path>,
    required: bool,
) -> Result<Option<(VotingScenario, ScenarioDocument)>> {
    let defaults = loaded.scenario.clone().unwrap_or_else(case_study::default_scenario);
    match path {
        Some(path) => {
            let doc = io::read_scenario(path)?;
            let scenario = doc.into_domain(&loaded.data, &defaults)?;
            loaded.inputs.push(path.display().to_string());
            Ok(Some((scenario, doc)))
        }
        None => match &loaded.scenario {
            Some(s) => Ok(Some((s.clone(), ScenarioDocument::from_domain(s, &loaded.data)))),
            None if required => Err(Error::Scenario("--scenario is required with --input".into())),
            None => Ok(None),
        },
    }
}

struct Dynamics {
    scenario: VotingScenario,
    trials: usize,
    seed: u64,
}

fn resolve_dynamics(loaded: &mut Loaded, path: Option<&Path>, d: &DynamicsArgs) -> Result<Dynamics> {
    let (mut s, doc) = load_scenario(loaded, path, true)?.expect("required scenario");
    if let Some(v) = d.alpha {
        s.alpha = v;
    }
    if let Some(v) = d.epsilon {
        s.epsilon = v;
    }
    if let Some(v) = d.mu {
        s.mu = v;
    }
    if let Some(m) = &d.merit {
        s.merit = m.parse()?;
    }
    if let Some(r) = d.merit_reference {
        s.merit_reference = match r {
            ReferenceArg::PMax => MeritReference::PMax,
            ReferenceArg::MaxProductivity => MeritReference::MaxProductivity,
        };
    }
    if let Some(m) = d.solve_mode {
        s.solve_mode = match m {
            SolveModeArg::Joint => SolveMode::Joint,
            SolveModeArg::Clamped => SolveMode::Clamped,
        };
    }
    if let Some(v) = d.candidate_value {
        s.candidate_assignment = v;
    }
    s.validate(loaded.data.len())?;
    Ok(Dynamics {
        scenario: s,
        trials: d.trials.or(doc.trials).unwrap_or(DEFAULT_TRIALS),
        seed: d.seed.or(doc.seed).unwrap_or(DEFAULT_SEED),
    })
}

fn model_manifest(cmd: &str, loaded: &Loaded) -> Manifest {
    let mut m = Manifest::new(cmd);
    m.inputs = loaded.inputs.clone();
    let p = &loaded.params;
    m.param("eta", p.eta)
        .param("p_max", p.p_max)
        .param("gamma", p.gamma)
        .param("scale", p.scale)
        .param("indicator", p.indicator)
        .param("symmetry_tol", p.symmetry_tol)
        .param("criterion_weights", &p.individual_weights)
        .param("pair_weights", &p.pair_weights);
    m
}

fn scenario_manifest(m: &mut Manifest, d: &Dynamics, data: &DepartmentData) {
    m.param("scenario", ScenarioDocument::from_domain(&d.scenario, data))
        .param("trials", d.trials);
    m.seed = Some(d.seed);
}

fn finish(out: &Path, mut manifest: Manifest, artifacts: Vec<Artifact>) -> Result<()> {
    let mut names = export::write_artifacts(out, &artifacts)?;
    names.push("manifest.json".into());
    manifest.outputs = names;
    export::write_artifacts(out, &[Artifact::new("manifest.json", io::to_json_pretty(&manifest)?)])?;
    println!("wrote {} files to {}", manifest.outputs.len(), out.display());
    Ok(())
}

fn report_graph(loaded: &Loaded, graph: &CommitteeGraph) {
    let a = &graph.asymmetry;
    if a.exceeds_tolerance() {
        if let Some((i, j)) = a.pair {
            let l = loaded.labels();
            println!(
                "collaboration table asymmetric: {} pair(s), max {:.6} at ({}, {}); symmetrized",
                a.asymmetric_pairs, a.max, l[i], l[j]
            );
        }
    }
    let w = &graph.weights;
    let n = w.nrows();
    let (mut min, mut at) = (f64::INFINITY, (0, 0));
    for i in 0..n {
        for j in 0..n {
            if i != j && w[(i, j)] < min {
                min = w[(i, j)];
                at = (i, j);
            }
        }
    }
    if n > 1 {
        let l = loaded.labels();
        println!("W check: ok, min off-diagonal W[{}, {}] = {min:.6}", l[at.0], l[at.1]);
    }
}

fn build(a: BuildArgs) -> Result<()> {
    let loaded = load(&a.input, &a.model)?;
    let graph = loaded.graph()?;
    report_graph(&loaded, &graph);
    let artifacts = export::graph_artifacts(loaded.labels(), &graph)?;
    finish(&a.out.out, model_manifest("build", &loaded), artifacts)
}

fn diagram_of(loaded: &Loaded, graph: &CommitteeGraph) -> Result<(InfluenceDiagram, Vec<f64>)> {
    let decomp = spectral::eigendecompose(&graph.laplacian, 1e-12)?;
    let mut diagram = spectral::embed(&decomp)?;
    diagram.provenance = Some(spectral::Provenance {
        eta: loaded.params.eta,
        p_max: loaded.params.p_max,
        gamma: loaded.params.gamma,
    });
    if diagram.rotation_ambiguous {
        eprintln!("warning: lambda_2 and lambda_3 nearly coincide; the diagram's orientation is not unique");
    }
    Ok((diagram, decomp.eigenvalues))
}

fn embed(a: EmbedArgs) -> Result<()> {
    let mut loaded = load(&a.input, &a.model)?;
    let scenario = load_scenario(&mut loaded, a.scenario.as_deref(), false)?;
    let graph = loaded.graph()?;
    let (diagram, eigenvalues) = diagram_of(&loaded, &graph)?;
    println!("lambda2 = {:.6}, lambda3 = {:.6}", diagram.lambda2, diagram.lambda3);
    let labels = loaded.labels();
    let title = format!(
        "eta = {}, P_max = {}, gamma = {}",
        loaded.params.eta, loaded.params.p_max, loaded.params.gamma
    );
    let plot = match &scenario {
        Some((s, _)) => svg::scatter(
            &diagram.points,
            labels,
            &agent_classes(s, &loaded.data.roles, labels.len()),
            &title,
        ),
        None => svg::scatter(
            &diagram.points,
            labels,
            &vec![case_study::AgentClass::Undecided; labels.len()],
            &title,
        ),
    };
    let artifacts = vec![
        Artifact::new("diagram.csv", export::diagram_csv(labels, &diagram)?),
        Artifact::new("diagram.json", io::to_json_pretty(&diagram)?),
        Artifact::new("spectrum.csv", export::spectrum_csv(&eigenvalues)?),
        Artifact::new("diagram.svg", plot),
    ];
    finish(&a.out.out, model_manifest("embed", &loaded), artifacts)
}

fn field(a: FieldArgs) -> Result<()> {
    let mut loaded = load(&a.input, &a.model)?;
    let (scenario, _) = load_scenario(&mut loaded, a.scenario.as_deref(), true)?.expect("required scenario");
    let graph = loaded.graph()?;
    let (diagram, _) = diagram_of(&loaded, &graph)?;
    let n = loaded.data.len();

    let mut x = vec![0.0; n];
    for &i in &scenario.v_plus {
        x[i] = 1.0;
    }
    for &i in &scenario.v_minus {
        x[i] = -1.0;
    }
    for (&i, &v) in &scenario.non_voters {
        x[i] = v;
    }
    x[scenario.candidate] = a.grid.candidate_field_value;
    let mut sigma = vec![a.grid.sigma; n];
    for s in &a.assign {
        let (label, v) = parse_assignment(s)?;
        x[loaded.data.index_of(&label)?] = v;
    }
    for s in &a.sigma_agent {
        let (label, v) = parse_assignment(s)?;
        sigma[loaded.data.index_of(&label)?] = v;
    }

    let bounds = Bounds::square_around(&diagram.points, a.grid.margin);
    let grid = spectral::sample_field(&diagram, &x, &sigma, bounds, a.grid.resolution)?;
    let fraction = spectral::positive_area_fraction(&grid)?;
    println!("positive area fraction = {fraction:.6}");

    let labels = loaded.labels();
    let classes = agent_classes(&scenario, &loaded.data.roles, n);
    let colors: Vec<&str> = classes.iter().map(|c| svg::class_color(*c)).collect();
    let title = format!("{:.1}% positive", 100.0 * fraction);
    let summary = json!({
        "assignments": labels.iter().cloned().zip(x.iter().copied()).collect::<BTreeMap<_, _>>(),
        "sigma": labels.iter().cloned().zip(sigma.iter().copied()).collect::<BTreeMap<_, _>>(),
        "bounds": bounds,
        "resolution": a.grid.resolution,
        "positive_fraction": fraction,
    });
    let artifacts = vec![
        Artifact::new("field.csv", export::field_csv(&grid)?),
        Artifact::new("field.json", io::to_json_pretty(&summary)?),
        Artifact::new("field.svg", svg::contour(&grid, &diagram.points, labels, &colors, &title)),
    ];
    let mut m = model_manifest("field", &loaded);
    m.param("assignments", &summary["assignments"])
        .param("sigma", &summary["sigma"])
        .param("margin", a.grid.margin)
        .param("resolution", a.grid.resolution);
    finish(&a.out.out, m, artifacts)
}

fn vote(a: VoteArgs) -> Result<()> {
    let mut loaded = load(&a.input, &a.model)?;
    let d = resolve_dynamics(&mut loaded, a.scenario.as_deref(), &a.dynamics)?;
    let graph = loaded.graph()?;
    let s = &d.scenario;
    let p_max = loaded.params.p_max;
    let m_c = voting::candidate_merit(&graph.productivity, s.candidate, p_max, s.merit)?;

    // Trial 0 in full, for inspection.
    let x0 = voting::initialize_votes(s, &graph.productivity, p_max, m_c, RngSpec::new(d.seed, 0))?;
    let solver = match s.solve_mode {
        SolveMode::Joint => voting::VoteSolver::joint(&graph.laplacian, s.mu, s.epsilon)?,
        SolveMode::Clamped => voting::VoteSolver::clamped(&graph.laplacian, s.mu, s.epsilon, &s.v_undecided)?,
    };
    let outcome = solver.solve(&x0)?;
    let stats = voting::monte_carlo_votes(&graph, s, d.trials, d.seed)?;

    let labels = loaded.labels();
    println!("candidate merit m_c = {m_c:.6}");
    for (k, &agent) in stats.agents.iter().enumerate() {
        println!(
            "agent {:>4}: mean {:+.6e}  std {:.6e}",
            labels[agent], stats.mean[k], stats.std[k]
        );
    }
    let artifacts = vec![
        Artifact::new("votes.csv", export::statistics_csv(labels, &stats)?),
        Artifact::new("votes.json", io::to_json_pretty(&stats)?),
        Artifact::new("trial0.csv", export::outcome_csv(labels, &outcome)?),
    ];
    let mut m = model_manifest("vote", &loaded);
    scenario_manifest(&mut m, &d, &loaded.data);
    finish(&a.out.out, m, artifacts)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let gammas = parse_values(&a.gammas)?;
    let mus = parse_values(&a.mus)?;
    let mut loaded = load(&a.input, &a.model)?;
    let d = resolve_dynamics(&mut loaded, a.scenario.as_deref(), &a.dynamics)?;
    // Validate every gamma up front so a bad cell names its agents.
    for &gamma in &gammas {
        let probe = Loaded {
            params: ModelParams {
                gamma,
                ..loaded.params.clone()
            },
            data: loaded.data.clone(),
            scenario: None,
            inputs: Vec::new(),
        };
        probe.graph()?;
    }
    let result = voting::gamma_sweep(&loaded.data, &loaded.params, &d.scenario, &gammas, &mus, d.trials, d.seed)?;
    println!(
        "{} gamma x {} mu x {} agents = {} cells, {} trials each",
        gammas.len(),
        mus.len(),
        result.agents.len(),
        result.cells.len(),
        d.trials
    );
    let artifacts = export::sweep_artifacts(
        loaded.labels(),
        &result,
        "sweep",
        "Mean final decision of undecided agents by gamma",
    )?;
    let mut m = model_manifest("sweep", &loaded);
    scenario_manifest(&mut m, &d, &loaded.data);
    m.param("gammas", &gammas).param("mus", &mus);
    finish(&a.out.out, m, artifacts)
}

fn case_study_cmd(a: CaseStudyArgs) -> Result<()> {
    let cs = case_study::load_case_study();
    if let Some(CaseStudyAction::Export(out)) = a.action {
        return export_case_study(&cs, &out.out);
    }
    let opts = FieldOptions {
        margin: a.grid.margin,
        resolution: a.grid.resolution,
        sigma: a.grid.sigma,
        wide_sigma: a.wide_sigma,
        candidate_value: a.grid.candidate_field_value,
    };
    let want = |f: FigureArg| a.figure == FigureArg::All || a.figure == f;
    let mut artifacts = Vec::new();
    if want(FigureArg::One) {
        let fig = case_study::reproduce_figure1(&cs)?;
        println!("figure 1: 9 diagrams, min pairwise Kendall tau = {:.4}", fig.min_tau());
        artifacts.extend(export::figure1_artifacts(&cs, &fig)?);
    }
    if want(FigureArg::Two) {
        let diagram = case_study::reproduce_figure2(&cs)?;
        println!("figure 2: lambda2 = {:.6}, lambda3 = {:.6}", diagram.lambda2, diagram.lambda3);
        artifacts.extend(export::figure2_artifacts(&cs, &diagram)?);
    }
    if want(FigureArg::Three) {
        let (diagram, panels) = case_study::reproduce_figure3(&cs, &opts)?;
        for (panel, target) in panels.iter().zip(case_study::FIGURE3_TARGETS) {
            println!(
                "figure 3: chair x = {}, sigma = {:e}: positive fraction {:.4} (reference {target})",
                panel.chair_value, panel.chair_sigma, panel.positive_fraction
            );
        }
        artifacts.extend(export::figure3_artifacts(&cs, &diagram, &panels)?);
    }
    if want(FigureArg::Four) {
        let sweep = case_study::reproduce_figure4(&cs, a.trials, a.seed)?;
        println!("figure 4: {} cells, {} trials each", sweep.cells.len(), sweep.trials);
        artifacts.extend(export::figure4_artifacts(&cs, &sweep)?);
    }

    let mut m = Manifest::new("case-study");
    m.inputs = vec![EMBEDDED.to_string()];
    let p = &cs.params;
    m.param("figure", format!("{:?}", a.figure).to_lowercase())
        .param("eta", p.eta)
        .param("p_max", p.p_max)
        .param("gamma", p.gamma)
        .param("field", opts)
        .param("scenario", ScenarioDocument::from_domain(&cs.scenario, &cs.department))
        .param("trials", a.trials);
    m.seed = Some(a.seed);
    finish(&a.out.out, m, artifacts)
}

fn export_case_study(cs: &case_study::CaseStudy, out: &PathBuf) -> Result<()> {
    let department = DepartmentDocument::from_domain(&cs.department, &cs.params);
    let scenario = ScenarioDocument::from_domain(&cs.scenario, &cs.department);
    let artifacts = vec![
        Artifact::new("department.json", io::to_json_pretty(&department)?),
        Artifact::new("scenario.json", io::to_json_pretty(&scenario)?),
    ];
    let mut m = Manifest::new("case-study export");
    m.inputs = vec![EMBEDDED.to_string()];
    finish(out, m, artifacts)
}

fn export_schema(a: OutArgs) -> Result<()> {
    let number_list = json!({"type": "array", "items": {"type": "number"}});
    let label = json!({"type": ["string", "integer"]});
    let department = json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "department",
        "type": "object",
        "required": ["agents"],
        "additionalProperties": false,
        "properties": {
            "agents": {"type": "array", "items": label, "minItems": 1},
            "criteria": {"type": "object", "additionalProperties": number_list},
            "pair_criteria": {"type": "object", "additionalProperties": {"type": "array", "items": number_list}},
            "criterion_weights": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
            "pair_weights": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
            "productivity": number_list,
            "collaboration": {"type": "array", "items": number_list},
            "roles": {"type": "object", "additionalProperties": {"enum": ["chair", "coordinator"]}},
            "inbred_set": {"type": "array", "items": label},
        },
    });
    let scenario = json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "scenario",
        "type": "object",
        "required": ["candidate"],
        "additionalProperties": false,
        "properties": {
            "candidate": label,
            "v_plus": {"type": "array", "items": label},
            "v_minus": {"type": "array", "items": label},
            "v_undecided": {"type": "array", "items": label},
            "non_voters": {"type": "object", "additionalProperties": {"type": "number"}},
            "candidate_assignment": {"type": "number"},
            "merit": {"type": "string", "pattern": "^(midpoint|mean|fixed:.+)$"},
            "merit_reference": {"enum": ["p-max", "max-productivity"]},
            "alpha": {"type": "number", "minimum": 0},
            "epsilon": {"type": "number", "minimum": 0},
            "mu": {"type": "number", "minimum": 0},
            "solve_mode": {"enum": ["joint", "clamped"]},
            "seed": {"type": "integer", "minimum": 0},
            "trials": {"type": "integer", "minimum": 1},
        },
    });
    let artifacts = vec![
        Artifact::new("department.schema.json", io::to_json_pretty(&department)?),
        Artifact::new("scenario.schema.json", io::to_json_pretty(&scenario)?),
    ];
    finish(&a.out, Manifest::new("export-schema"), artifacts)
}
