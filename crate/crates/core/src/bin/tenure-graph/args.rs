use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tenure_graph::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "tenure-graph", version, about = "Spectral-graph model of promotion & tenure committee voting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build productivity, R, S, W and L for a department.
    Build(BuildArgs),
    /// Compute the 2-D influence diagram.
    Embed(EmbedArgs),
    /// Sample the influence field over the diagram.
    Field(FieldArgs),
    /// Solve the vote dynamics with Monte Carlo averaging.
    Vote(VoteArgs),
    /// Sweep the inbreeding constant and influence constant.
    Sweep(SweepArgs),
    /// Reproduce the embedded case study, or export its dataset.
    CaseStudy(CaseStudyArgs),
    /// Write JSON schemas for the department and scenario documents.
    ExportSchema(OutArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = "TENURE_GRAPH_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Department JSON document.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Use the embedded eleven-agent case study.
    #[arg(long)]
    pub case_study: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Fraction,
    PerAgentMean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IndicatorArg {
    Narrative,
    Literal,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Socialization constant, in (0, 1).
    #[arg(long, default_value_t = 0.25)]
    pub eta: f64,
    /// Maximum-time constant.
    #[arg(long, default_value_t = 7.0)]
    pub pmax: f64,
    /// Inbreeding constant.
    #[arg(long, default_value_t = 0.25)]
    pub gamma: f64,
    /// Productivity normalization.
    #[arg(long, value_enum, default_value_t = ScaleArg::PerAgentMean)]
    pub scale: ScaleArg,
    /// Which agent pairs the inbreeding term links.
    #[arg(long, value_enum, default_value_t = IndicatorArg::Narrative)]
    pub indicator: IndicatorArg,
    /// Pair-table asymmetry above this is reported.
    #[arg(long, default_value_t = 1e-9)]
    pub symmetry_tol: f64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Scenario JSON used to colour agents.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Kernel width for every agent.
    #[arg(long, default_value_t = 4e-4)]
    pub sigma: f64,
    /// Grid cells per axis.
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    /// Growth of the agents' bounding square per side, as a fraction of its side.
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    /// Field value assigned to the candidate.
    #[arg(long, default_value_t = 0.0)]
    pub candidate_field_value: f64,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Scenario JSON; decided agents get ±1, undecided 0, non-voters their value.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Override one agent's field value, as LABEL=VALUE.
    #[arg(long = "assign", value_name = "LABEL=VALUE")]
    pub assign: Vec<String>,
    /// Override one agent's kernel width, as LABEL=SIGMA.
    #[arg(long = "sigma-agent", value_name = "LABEL=SIGMA")]
    pub sigma_agent: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolveModeArg {
    Joint,
    Clamped,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReferenceArg {
    PMax,
    MaxProductivity,
}

/// Dynamics parameters. When given they override the scenario document.
#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Noise amplitude [default: 0.15]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Regularization constant [default: 0]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Influence constant [default: 1]
    #[arg(long)]
    pub mu: Option<f64>,
    /// Candidate merit: midpoint, mean or fixed:<v> [default: midpoint]
    #[arg(long)]
    pub merit: Option<String>,
    /// Productivity reference for undecided agents [default: p-max]
    #[arg(long, value_enum)]
    pub merit_reference: Option<ReferenceArg>,
    /// Solve all agents jointly or only the undecided ones [default: joint]
    #[arg(long, value_enum)]
    pub solve_mode: Option<SolveModeArg>,
    /// Initial decision of the candidate [default: 1]
    #[arg(long)]
    pub candidate_value: Option<f64>,
    /// Monte Carlo trials [default: 1000]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed; trial t uses stream t [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VoteArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Scenario JSON (required with --input).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Scenario JSON (required with --input).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    /// Inbreeding constants: start:end:step (inclusive) or a comma list.
    #[arg(long, default_value = "0:1:0.2")]
    pub gammas: String,
    /// Influence constants: start:end:step (inclusive) or a comma list.
    #[arg(long, default_value = "0.5,1,2")]
    pub mus: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    All,
}

#[derive(Debug, Args)]
pub struct CaseStudyArgs {
    #[command(subcommand)]
    pub action: Option<CaseStudyAction>,
    /// Figure to reproduce.
    #[arg(long, value_enum, default_value_t = FigureArg::All)]
    pub figure: FigureArg,
    /// Monte Carlo trials per sweep cell.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Base seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Chair kernel width in the strong-chair field panel.
    #[arg(long, default_value_t = 16e-4)]
    pub wide_sigma: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Subcommand)]
pub enum CaseStudyAction {
    /// Write the embedded dataset as department.json and scenario.json.
    Export(OutArgs),
}

/// Parses `start:end:step` (endpoints inclusive) or `a,b,c`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parameter(format!("cannot parse value list `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, end, step] = parts[..] else { return Err(bad()) };
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if !(step > 0.0) || end < start {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            let v = start + f64::from(k) * step;
            if v > end + 1e-12 {
                break;
            }
            out.push((v * 1e12).round() / 1e12);
            k += 1;
        }
        out
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

/// Parses `LABEL=VALUE`.
pub fn parse_assignment(s: &str) -> Result<(String, f64)> {
    let (label, value) = s
        .split_once('=')
        .ok_or_else(|| Error::Parameter(format!("expected LABEL=VALUE, got `{s}`")))?;
    let v = value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parameter(format!("bad value in `{s}`")))?;
    Ok((label.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_both_endpoints() {
        assert_eq!(parse_values("0:1:0.2").unwrap(), vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(parse_values("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_values("3").unwrap(), vec![3.0]);
        assert!(parse_values("1:0:0.1").is_err());
        assert!(parse_values("0:1").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn assignments() {
        assert_eq!(parse_assignment("4=2").unwrap(), ("4".to_string(), 2.0));
        assert!(parse_assignment("4").is_err());
    }
}
