//! JSON run configuration.

use std::f64::consts::PI;
use std::path::Path;

use nonlocal_hj_core::barrier::{certification_exponent, gamma0_boundary, gamma0_interior};
use nonlocal_hj_core::ergodic::DEFAULT_LAMBDAS;
use nonlocal_hj_core::hamiltonian::HamiltonianSpec;
use nonlocal_hj_core::levy::{JumpFunction, LevyMeasureSpec, Normalization};
use nonlocal_hj_core::{GridField, PeriodicGrid, Point};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridConfig,
    pub measure: MeasureConfig,
    #[serde(default)]
    pub jump: JumpConfig,
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one_usize")]
    pub dim: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationConfig {
    #[default]
    Plain,
    Exact,
}

impl From<NormalizationConfig> for Normalization {
    fn from(n: NormalizationConfig) -> Self {
        match n {
            NormalizationConfig::Plain => Normalization::Plain,
            NormalizationConfig::Exact => Normalization::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureConfig {
    Fractional {
        sigma: f64,
        #[serde(default)]
        normalization: NormalizationConfig,
    },
    Halfspace {
        sigma: f64,
        #[serde(default)]
        axis: usize,
        #[serde(default = "yes")]
        positive: bool,
        #[serde(default)]
        normalization: NormalizationConfig,
    },
    Crossed {
        sigma1: f64,
        sigma2: f64,
        #[serde(default)]
        normalization: NormalizationConfig,
    },
    Finite {
        atoms: Vec<AtomConfig>,
        sigma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub offset: Vec<f64>,
    pub weight: f64,
}

impl MeasureConfig {
    pub fn spec(&self) -> Result<LevyMeasureSpec> {
        Ok(match self {
            Self::Fractional { sigma, normalization } => {
                LevyMeasureSpec::Fractional { sigma: *sigma, normalization: (*normalization).into() }
            }
            Self::Halfspace { sigma, axis, positive, normalization } => LevyMeasureSpec::HalfspaceFractional {
                sigma: *sigma,
                axis: *axis,
                positive: *positive,
                normalization: (*normalization).into(),
            },
            Self::Crossed { sigma1, sigma2, normalization } => {
                LevyMeasureSpec::Crossed { sigma1: *sigma1, sigma2: *sigma2, normalization: (*normalization).into() }
            }
            Self::Finite { atoms, sigma } => {
                let atoms = atoms
                    .iter()
                    .map(|a| Ok((point(&a.offset, "measure.atoms.offset")?, a.weight)))
                    .collect::<Result<Vec<_>>>()?;
                LevyMeasureSpec::Finite { atoms, sigma: *sigma }
            }
        })
    }

    pub fn sigma(&self) -> f64 {
        match self {
            Self::Fractional { sigma, .. } | Self::Halfspace { sigma, .. } | Self::Finite { sigma, .. } => *sigma,
            Self::Crossed { sigma1, sigma2, .. } => sigma1.max(*sigma2),
        }
    }
}

/// A scalar profile: a constant or `offset + amplitude·cos(2π·frequency·x_axis + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    Shaped(Shape),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Cosine {
        amplitude: f64,
        #[serde(default = "one_f64")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        axis: usize,
    },
}

impl Profile {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Shaped(Shape::Cosine { amplitude, frequency, phase, offset, axis }) => {
                offset + amplitude * (2.0 * PI * frequency * x[(*axis).min(1)] + phase).cos()
            }
        }
    }

    pub fn field(&self, grid: &PeriodicGrid) -> Result<GridField> {
        Ok(GridField::from_fn(*grid, |p| self.eval(p))?)
    }
}

impl Default for Profile {
    fn default() -> Self {
        Self::Constant(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JumpConfig {
    #[default]
    Identity,
    Dilation {
        c: f64,
    },
    Scaled {
        g: Profile,
    },
}

impl JumpConfig {
    pub fn build(&self, grid: &PeriodicGrid) -> Result<JumpFunction> {
        Ok(match self {
            Self::Identity => JumpFunction::identity(grid),
            Self::Dilation { c } => JumpFunction::dilation(grid, *c)?,
            Self::Scaled { g } => JumpFunction::scaled(g.field(grid)?)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub m: f64,
    #[serde(default = "unit_profile")]
    pub b: Profile,
    #[serde(default)]
    pub f: Profile,
    #[serde(default)]
    pub a1: Option<Profile>,
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub a2: Option<Vec<Profile>>,
    #[serde(default)]
    pub theta: f64,
    /// Blow-up amplitude `A`.
    #[serde(default)]
    pub a: f64,
}

impl HamiltonianConfig {
    pub fn build(&self, grid: &PeriodicGrid) -> Result<HamiltonianSpec> {
        self.build_with_m(grid, self.m)
    }

    pub fn build_with_m(&self, grid: &PeriodicGrid, m: f64) -> Result<HamiltonianSpec> {
        let mut h = HamiltonianSpec::new(self.b.field(grid)?, m, self.f.field(grid)?)?;
        match (&self.a1, self.l) {
            (Some(a1), Some(l)) => h = h.with_lower_order(a1.field(grid)?, l)?,
            (None, None) => {}
            _ => return Err(CliError::Invalid("hamiltonian.a1 and hamiltonian.l go together".into())),
        }
        if let Some(a2) = &self.a2 {
            h = h.with_drift(a2.iter().map(|p| p.field(grid)).collect::<Result<Vec<_>>>()?)?;
        }
        Ok(h.with_blowup(self.theta, self.a)?)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub operator_oracle: OracleConfig,
    #[serde(default)]
    pub barrier: BarrierConfig,
    #[serde(default)]
    pub ergodic: ErgodicConfig,
    #[serde(default)]
    pub regularity: RegularityConfig,
    #[serde(default)]
    pub ltb: LtbConfig,
    #[serde(default)]
    pub covering: CoveringConfig,
    #[serde(default)]
    pub comparison: ComparisonConfig,
    #[serde(default)]
    pub structure: StructureConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Orders to test; the measure's own order when empty.
    pub sigmas: Vec<f64>,
    pub modes: Vec<u32>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { sigmas: Vec::new(), modes: vec![1, 2, 3, 4] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierMode {
    #[default]
    Full,
    Censored,
    LevyIto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierConfig {
    pub x0: Vec<f64>,
    pub r: f64,
    /// Exponent; the applicable `γ0` when absent.
    pub gamma: Option<f64>,
    pub c2: f64,
    /// Forces `C1` instead of running the doubling search.
    pub c1: Option<f64>,
    /// Right-hand side amplitude `A`.
    pub a: f64,
    pub mode: BarrierMode,
    /// Radius of the censoring ball, centred at `x0`.
    pub domain_radius: f64,
    /// Also select with `16 A` and report the inflation of `C1`.
    pub a_scaling: bool,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self {
            x0: vec![0.5, 0.5],
            r: 0.2,
            gamma: None,
            c2: 1.0,
            c1: None,
            a: 1.0,
            mode: BarrierMode::Full,
            domain_radius: 0.45,
            a_scaling: true,
        }
    }
}

impl BarrierConfig {
    /// Boundary exponent when `C2 > 0`, interior exponent otherwise.
    pub fn gamma0(&self, sigma: f64, m: f64, theta: f64) -> f64 {
        if self.c2 > 0.0 {
            gamma0_boundary(sigma, m, theta)
        } else {
            gamma0_interior(sigma, m, theta)
        }
    }

    pub fn gamma(&self, sigma: f64, m: f64, theta: f64) -> f64 {
        certification_exponent(self.gamma.unwrap_or_else(|| self.gamma0(sigma, m, theta)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErgodicConfig {
    pub lambdas: Vec<f64>,
    pub x_ref: usize,
    pub t1: f64,
    pub t2: f64,
    pub cfl: f64,
    pub residual_tol: f64,
}

impl Default for ErgodicConfig {
    fn default() -> Self {
        Self { lambdas: DEFAULT_LAMBDAS.to_vec(), x_ref: 0, t1: 10.0, t2: 20.0, cfl: 0.9, residual_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularityConfig {
    pub fit_lo: Option<f64>,
    pub fit_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LtbConfig {
    pub t_end: f64,
    pub snapshot_dt: f64,
    pub u0: Profile,
}

impl Default for LtbConfig {
    fn default() -> Self {
        Self { t_end: 40.0, snapshot_dt: 0.5, u0: Profile::Constant(0.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoveringConfig {
    pub max_iter: usize,
}

impl Default for CoveringConfig {
    fn default() -> Self {
        Self { max_iter: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonConfig {
    /// Ordered pairs `u0 ≤ v0`.
    pub pairs: usize,
    /// Unordered pairs, checked for monotone `κ` only.
    pub arbitrary_pairs: usize,
    pub t_end: f64,
    pub amplitude: f64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self { pairs: 20, arbitrary_pairs: 4, t_end: 5.0, amplitude: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StructureConfig {
    pub samples: usize,
    /// Exponents to sweep; the Hamiltonian's own `m` when empty.
    pub ms: Vec<f64>,
}

impl Default for StructureConfig {
    fn default() -> Self {
        Self { samples: 10_000, ms: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub oracle_rel_err: f64,
    pub max_doublings: usize,
    pub a_scaling_slack: f64,
    pub bound_tol: f64,
    pub exact_tol: f64,
    pub comparison_tol: f64,
    pub kappa_tol: f64,
    pub gamma_min: f64,
    pub r2_min: f64,
    pub seminorm_spread: f64,
    pub osc_ratio: f64,
    pub slope_tol: f64,
    pub gap_ratio: f64,
    pub gap_monotone_tol: f64,
    pub gap_after: f64,
    pub pushforward_rel_err: f64,
    pub expected_n_star: Option<usize>,
    pub expect_covering_failure: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            oracle_rel_err: 0.02,
            max_doublings: 30,
            a_scaling_slack: 2.0,
            bound_tol: 1e-6,
            exact_tol: 1e-8,
            comparison_tol: 1e-8,
            kappa_tol: 1e-8,
            gamma_min: 0.65,
            r2_min: 0.95,
            seminorm_spread: 0.2,
            osc_ratio: 1.25,
            slope_tol: 1e-2,
            gap_ratio: 0.1,
            gap_monotone_tol: 1e-6,
            gap_after: 2.0,
            pushforward_rel_err: 0.03,
            expected_n_star: None,
            expect_covering_failure: false,
        }
    }
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        Ok(PeriodicGrid::new(self.grid.dim, self.grid.n)?)
    }

    pub fn x0(&self) -> Result<Point> {
        point(&self.experiment.barrier.x0, "experiment.barrier.x0")
    }
}

fn point(v: &[f64], name: &str) -> Result<Point> {
    match v {
        [a] => Ok([*a, 0.0]),
        [a, b] => Ok([*a, *b]),
        _ => Err(CliError::Invalid(format!("{name} needs one or two coordinates"))),
    }
}

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn unit_profile() -> Profile {
    Profile::Constant(1.0)
}
