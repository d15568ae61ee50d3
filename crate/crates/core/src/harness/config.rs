use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conv::WeightSpec;
use crate::error::{Error, Result};
use crate::group::GroupSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Tiny abelian run of the cheap checks.
    Smoke,
    /// Random-tuple inequality checks.
    Fuzz,
    /// Scaling identities for `T_t` on matched grids.
    Scaling,
    /// Peetre maximal functions against Hardy-Littlewood averages and the
    /// weighted vector-valued bound.
    Peetre,
    /// Norm-equivalence band over a family of atoms.
    Equivalence,
    /// Truncated synthesis residuals of a reproducing pair.
    Reproduce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzKind {
    E4,
    #[serde(alias = "lemma41")]
    Subaveraging,
    Nesting,
}

impl std::str::FromStr for FuzzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e4" => Ok(Self::E4),
            "subaveraging" | "lemma41" => Ok(Self::Subaveraging),
            "nesting" => Ok(Self::Nesting),
            _ => Err(Error::Config(format!("unknown fuzz kind {s:?}; expected e4, subaveraging or nesting"))),
        }
    }
}

/// Output grid `GridSpec::for_group(radius, points)`; `refine` multiplies
/// the node density for stability checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_refine")]
    pub refine: f64,
}

fn default_radius() -> f64 {
    3.0
}

fn default_points() -> usize {
    9
}

fn default_refine() -> f64 {
    1.5
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            radius: default_radius(),
            points: default_points(),
            refine: default_refine(),
        }
    }
}

impl GridConfig {
    /// Odd node count about `refine` times denser than `points`.
    pub fn refined_points(&self) -> usize {
        let n = ((self.points - 1) as f64 * self.refine).round() as usize;
        n + n % 2 + 1
    }
}

/// Scales `t = 2^{k/per_octave}` for `|k| <= octaves * per_octave`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    #[serde(default = "default_octaves")]
    pub octaves: i32,
    #[serde(default = "default_per_octave")]
    pub per_octave: usize,
}

fn default_octaves() -> i32 {
    3
}

fn default_per_octave() -> usize {
    2
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            octaves: default_octaves(),
            per_octave: default_per_octave(),
        }
    }
}

/// Test family: the base function dilated by each `dilation` and
/// left-translated by each `translate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub dilations: Vec<f64>,
    #[serde(default)]
    pub translates: Vec<Vec<f64>>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            base: None,
            dilations: vec![1.0],
            translates: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub kind: ExperimentKind,
    #[serde(default = "default_group")]
    pub group: String,
    /// Kernel names; their role depends on the experiment.
    #[serde(default)]
    pub kernels: Vec<String>,
    /// Pair name such as `heat:1,1`.
    #[serde(default)]
    pub pair: Option<String>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    /// Peetre exponent; defaults to `gamma / r`.
    #[serde(default)]
    pub n: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub scales: ScaleConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub weights: Vec<WeightSpec>,
    #[serde(default)]
    pub fuzz: Option<FuzzKind>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// Pass threshold of the experiment's main statistic.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// CSV destination; stdout when absent.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

fn default_group() -> String {
    "heisenberg".into()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad experiment config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        GroupSpec::builtin(&self.group).map_err(|e| Error::Config(e.to_string()))
    }

    /// `N`, from the config or as `gamma / r`.
    pub fn peetre_exponent(&self, g: &GroupSpec) -> Result<f64> {
        match (self.n, self.r) {
            (Some(n), _) if n > 0.0 => Ok(n),
            (Some(n), _) => Err(Error::Config(format!("N must be positive, got {n}"))),
            (None, Some(r)) if r > 0.0 => Ok(g.gamma() / r),
            (None, Some(r)) => Err(Error::Config(format!("r must be positive, got {r}"))),
            (None, None) => Err(Error::Config("either N or r is required".into())),
        }
    }

    /// Parameter ranges each experiment kind requires.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.id.trim().is_empty() {
            return bad("experiment id is empty".into());
        }
        let g = self.group_spec()?;
        if self.grid.points < 3 || self.grid.points % 2 == 0 || !(self.grid.radius > 0.0) || !(self.grid.refine >= 1.0) {
            return bad("grid needs an odd point count >= 3, a positive radius and refine >= 1".into());
        }
        if self.scales.octaves < 0 || self.scales.per_octave == 0 {
            return bad("scales need octaves >= 0 and per_octave >= 1".into());
        }
        if self.family.dilations.iter().any(|s| !(*s > 0.0)) {
            return bad("dilations must be positive".into());
        }
        if self.family.translates.iter().any(|x| x.len() != g.dim()) {
            return bad(format!("translates must have {} coordinates", g.dim()));
        }
        match self.kind {
            ExperimentKind::Equivalence => {
                if self.p.is_empty() || self.p.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                    return bad(format!("Hardy space runs need 0 < p <= 1, got {:?}", self.p));
                }
            }
            ExperimentKind::Peetre => {
                let q = self.q.unwrap_or(f64::NAN);
                if !(q >= 1.0) {
                    return bad(format!("the Peetre domination bound needs q >= 1, got {q}"));
                }
                let r = self.r.unwrap_or(f64::NAN);
                if !(r > 0.0) {
                    return bad(format!("the Peetre domination bound needs r > 0, got {r}"));
                }
                let n = self.peetre_exponent(&g)?;
                if (n - g.gamma() / r).abs() > 1e-12 * n {
                    return bad(format!("N = {n} must equal gamma / r = {}", g.gamma() / r));
                }
                for &p in &self.p {
                    if !(p > g.gamma() / n && p.is_finite()) {
                        return bad(format!("the weighted bound needs gamma / N < p < inf, got p = {p}"));
                    }
                }
            }
            ExperimentKind::Fuzz => {
                if self.fuzz.is_none() {
                    return bad("fuzz runs need a fuzz kind".into());
                }
                if self.samples == Some(0) {
                    return bad("fuzz runs need at least one sample".into());
                }
            }
            ExperimentKind::Reproduce => {
                if self.scales.octaves < 3 {
                    return bad("reproduce runs need octaves >= 3 for three widenings".into());
                }
            }
            ExperimentKind::Smoke | ExperimentKind::Scaling => {}
        }
        Ok(())
    }
}
