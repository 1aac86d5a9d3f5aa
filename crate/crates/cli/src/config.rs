//! Run configuration: command-line arguments that round-trip through JSON.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use euler_mmot::grid::DEFAULT_PATH_CAP;
use euler_mmot::lp::{LpForm, PricingRule, DEFAULT_MONGE_CAP};
use euler_mmot::rational::{format_q, parse_q};
use euler_mmot::{Arith, CostFunction, EndpointMap, SpatialGrid, TimeGrid, Q};

/// Spatial grid: `three-point`, `midpoint:<n>` (even `n`), or `points:<x0>,<x1>,…`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GridSpec {
    ThreePoint,
    Midpoint(usize),
    Points(Vec<Q>),
}

impl GridSpec {
    pub fn build(&self) -> euler_mmot::Result<SpatialGrid> {
        match self {
            GridSpec::ThreePoint => Ok(SpatialGrid::three_point()),
            GridSpec::Midpoint(n) => SpatialGrid::uniform_symmetric(*n),
            GridSpec::Points(points) => SpatialGrid::new(points.clone()),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::ThreePoint => f.write_str("three-point"),
            GridSpec::Midpoint(n) => write!(f, "midpoint:{n}"),
            GridSpec::Points(points) => {
                let text: Vec<String> = points.iter().map(format_q).collect();
                write!(f, "points:{}", text.join(","))
            }
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "three-point" {
            return Ok(GridSpec::ThreePoint);
        }
        if let Some(n) = s.strip_prefix("midpoint:") {
            return n
                .parse()
                .map(GridSpec::Midpoint)
                .map_err(|_| format!("bad midpoint count in '{s}'"));
        }
        if let Some(list) = s.strip_prefix("points:") {
            return list
                .split(',')
                .map(|p| parse_q(p).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()
                .map(GridSpec::Points);
        }
        Err(format!(
            "unknown grid '{s}' (expected three-point, midpoint:<n>, or points:<x0>,<x1>,...)"
        ))
    }
}

impl TryFrom<String> for GridSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(spec: GridSpec) -> String {
        spec.to_string()
    }
}

/// Endpoint coupling: `flip`, `identity`, or `perm:<i0>,<i1>,…` on grid indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EndpointSpec {
    Flip,
    Identity,
    Permutation(Vec<usize>),
}

impl EndpointSpec {
    pub fn build(&self, grid: &SpatialGrid) -> euler_mmot::Result<EndpointMap> {
        let map = match self {
            EndpointSpec::Flip => EndpointMap::flip(grid)?,
            EndpointSpec::Identity => EndpointMap::identity(grid.len()),
            EndpointSpec::Permutation(p) => EndpointMap::new(p.clone())?,
        };
        map.check_grid(grid)?;
        Ok(map)
    }
}

impl fmt::Display for EndpointSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndpointSpec::Flip => f.write_str("flip"),
            EndpointSpec::Identity => f.write_str("identity"),
            EndpointSpec::Permutation(p) => {
                let text: Vec<String> = p.iter().map(usize::to_string).collect();
                write!(f, "perm:{}", text.join(","))
            }
        }
    }
}

impl FromStr for EndpointSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "flip" => Ok(EndpointSpec::Flip),
            "identity" => Ok(EndpointSpec::Identity),
            _ => {
                let list = s.strip_prefix("perm:").ok_or_else(|| {
                    format!("unknown endpoint '{s}' (expected flip, identity, or perm:<i0>,<i1>,...)")
                })?;
                list.split(',')
                    .map(|i| i.trim().parse().map_err(|_| format!("bad index '{i}' in '{s}'")))
                    .collect::<Result<Vec<_>, _>>()
                    .map(EndpointSpec::Permutation)
            }
        }
    }
}

impl TryFrom<String> for EndpointSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<EndpointSpec> for String {
    fn from(spec: EndpointSpec) -> String {
        spec.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// Kinetic action `Σ |ω_i − ω_{i−1}|²` over unit steps.
    Action,
    /// Squared distance to the equal-weight barycenter.
    Barycenter,
    /// Pairwise `1/|x_i − x_j|`; coinciding points are excluded.
    Coulomb,
    FrenkelKontorova,
    CubicSpline,
}

impl CostKind {
    pub fn build(self, timegrid: &TimeGrid) -> CostFunction {
        match self {
            CostKind::Action => CostFunction::Action {
                timegrid: timegrid.clone(),
            },
            CostKind::Barycenter => CostFunction::Barycenter {
                weights: vec![Q::new(1.into(), timegrid.len().into()); timegrid.len()],
            },
            CostKind::Coulomb => CostFunction::Coulomb,
            CostKind::FrenkelKontorova => CostFunction::FrenkelKontorova,
            CostKind::CubicSpline => CostFunction::CubicSpline,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArithArg {
    Rational,
    Float,
}

impl From<ArithArg> for Arith {
    fn from(a: ArithArg) -> Arith {
        match a {
            ArithArg::Rational => Arith::Rational,
            ArithArg::Float => Arith::Float,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    Full,
    Reduced,
}

impl From<FormArg> for LpForm {
    fn from(f: FormArg) -> LpForm {
        match f {
            FormArg::Full => LpForm::Full,
            FormArg::Reduced => LpForm::Reduced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PricingArg {
    Bland,
    Dantzig,
}

impl From<PricingArg> for PricingRule {
    fn from(p: PricingArg) -> PricingRule {
        match p {
            PricingArg::Bland => PricingRule::Bland,
            PricingArg::Dantzig => PricingRule::Dantzig,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderFormat {
    Svg,
    Ascii,
}

/// Solver caps shared by the commands that solve linear programs.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Largest number of enumerated paths.
    #[arg(long, default_value_t = DEFAULT_PATH_CAP as u64)]
    pub path_cap: u64,
    /// Wall-clock limit per linear program in float mode, in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_pivots: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            path_cap: DEFAULT_PATH_CAP as u64,
            time_limit: 60.0,
            max_pivots: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    #[arg(long, default_value = "three-point")]
    pub grid: GridSpec,
    /// Number of unit time steps N.
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    #[arg(long, default_value = "flip")]
    pub endpoint: EndpointSpec,
    #[arg(long, value_enum, default_value_t = CostKind::Action)]
    pub cost: CostKind,
    #[arg(long, value_enum, default_value_t = ArithArg::Rational)]
    pub arith: ArithArg,
    #[arg(long, value_enum, default_value_t = FormArg::Full)]
    pub form: FormArg,
    /// Pricing rule; Bland for rational and Dantzig for float when omitted.
    #[arg(long, value_enum)]
    pub pricing: Option<PricingArg>,
    /// Where to write the optimal plan JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub caps: Caps,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            grid: GridSpec::ThreePoint,
            steps: 3,
            endpoint: EndpointSpec::Flip,
            cost: CostKind::Action,
            arith: ArithArg::Rational,
            form: FormArg::Full,
            pricing: None,
            out: None,
            caps: Caps::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Prop1Config {
    /// Smallest N.
    #[arg(long, default_value_t = 3)]
    pub from: usize,
    /// Largest N.
    #[arg(long, default_value_t = 8)]
    pub to: usize,
    /// Largest number of Monge candidates to enumerate; rows beyond it report `skipped`.
    #[arg(long, default_value_t = DEFAULT_MONGE_CAP as u64)]
    pub monge_cap: u64,
    /// Where to write the CSV report in addition to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub caps: Caps,
}

impl Default for Prop1Config {
    fn default() -> Self {
        Prop1Config {
            from: 3,
            to: 8,
            monge_cap: DEFAULT_MONGE_CAP as u64,
            out: None,
            caps: Caps::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Thm1Config {
    /// Even resolution n: 2n position cells of width 1/n.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Directory for gamma0.json, gamma1.json, gamma2.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Default for Thm1Config {
    fn default() -> Self {
        Thm1Config { n: 8, out_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Grid of an instance; repeat for several grids.
    #[arg(long = "grid")]
    pub grids: Vec<GridSpec>,
    /// Step counts, comma separated.
    #[arg(long = "steps", value_delimiter = ',')]
    pub steps: Vec<usize>,
    #[arg(long, default_value = "flip")]
    pub endpoint: EndpointSpec,
    #[arg(long, value_enum, default_value_t = ArithArg::Float)]
    pub arith: ArithArg,
    /// Where to write the CSV in addition to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub caps: Caps,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grids: Vec::new(),
            steps: Vec::new(),
            endpoint: EndpointSpec::Flip,
            arith: ArithArg::Float,
            out: None,
            caps: Caps::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    /// Plan JSON file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = RenderFormat::Svg)]
    pub format: RenderFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Character columns for ASCII output.
    #[arg(long, default_value_t = 61)]
    pub columns: usize,
    /// Character rows for ASCII output.
    #[arg(long, default_value_t = 21)]
    pub rows: usize,
    /// SVG stroke pixels per unit mass.
    #[arg(long, default_value_t = 40.0)]
    pub stroke_scale: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            input: PathBuf::new(),
            format: RenderFormat::Svg,
            out: None,
            columns: 61,
            rows: 21,
            stroke_scale: 40.0,
        }
    }
}

/// A complete run: one subcommand with its arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, clap::Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Solve one transport linear program and report splitting and Monge status.
    Solve(SolveConfig),
    /// Check the fully discrete mass-splitting claims over a range of N.
    Prop1(Prop1Config),
    /// Build and check the discretized continuous-space optimizer.
    Thm1(Thm1Config),
    /// Solve a grid of instances and tabulate splitting flags.
    Sweep(SweepConfig),
    /// Draw a plan file as SVG or ASCII.
    Render(RenderConfig),
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run configs serialize") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunConfig> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs_parse_and_print() {
        for text in ["three-point", "midpoint:8", "points:-1,-1/3,1/2"] {
            let spec: GridSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("midpoint:x".parse::<GridSpec>().is_err());
        assert!("hexagon".parse::<GridSpec>().is_err());
        assert_eq!(
            "points:-1,0.5".parse::<GridSpec>().unwrap().build().unwrap().len(),
            2
        );
    }

    #[test]
    fn endpoint_specs_parse_and_print() {
        for text in ["flip", "identity", "perm:2,0,1"] {
            let spec: EndpointSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("perm:a".parse::<EndpointSpec>().is_err());
        let grid = SpatialGrid::three_point();
        assert!(EndpointSpec::Permutation(vec![0, 1]).build(&grid).is_err());
        assert_eq!(EndpointSpec::Flip.build(&grid).unwrap().permutation(), &[2, 1, 0]);
    }

    #[test]
    fn run_configs_round_trip() {
        let configs = vec![
            RunConfig::Solve(SolveConfig {
                grid: GridSpec::Points(vec![Q::from_integer((-1).into()), Q::new(1.into(), 2.into())]),
                endpoint: EndpointSpec::Permutation(vec![1, 0]),
                pricing: Some(PricingArg::Dantzig),
                out: Some("plan.json".into()),
                ..SolveConfig::default()
            }),
            RunConfig::Prop1(Prop1Config::default()),
            RunConfig::Thm1(Thm1Config {
                n: 16,
                out_dir: Some("plans".into()),
            }),
            RunConfig::Sweep(SweepConfig {
                grids: vec![GridSpec::ThreePoint, GridSpec::Midpoint(4)],
                steps: vec![3, 4, 5],
                ..SweepConfig::default()
            }),
            RunConfig::Render(RenderConfig {
                input: "plan.json".into(),
                format: RenderFormat::Ascii,
                ..RenderConfig::default()
            }),
        ];
        for config in configs {
            let text = config.to_json();
            assert_eq!(RunConfig::from_json(&text).unwrap(), config, "{text}");
        }
    }

    #[test]
    fn partial_json_takes_defaults() {
        let config = RunConfig::from_json(r#"{"command": "solve", "steps": 4}"#).unwrap();
        let RunConfig::Solve(solve) = config else {
            panic!("expected solve");
        };
        assert_eq!(solve.steps, 4);
        assert_eq!(solve.grid, GridSpec::ThreePoint);
        assert_eq!(solve.caps, Caps::default());
    }
}
