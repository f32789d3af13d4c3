//! Scenario files: `{"task": ..., "family": {...}, "params": {...}}`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use sconv::families::StateFamilySpec;
use sconv::renyi::RenyiVariant;
use sconv::testing::TestMode;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Renyi,
    Hoeffding,
    NpSweep,
    ScReport,
    Ldp,
    Family,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Renyi => "renyi",
            Task::Hoeffding => "hoeffding",
            Task::NpSweep => "np-sweep",
            Task::ScReport => "sc-report",
            Task::Ldp => "ldp",
            Task::Family => "family",
            Task::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    task: Task,
    #[serde(default)]
    family: Option<Value>,
    #[serde(default)]
    params: Option<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenyiParams {
    pub alphas: Vec<f64>,
    #[serde(default = "both_variants")]
    pub variants: Vec<RenyiVariant>,
    #[serde(default = "one")]
    pub n_list: Vec<usize>,
}

fn both_variants() -> Vec<RenyiVariant> {
    RenyiVariant::BOTH.to_vec()
}

fn one() -> Vec<usize> {
    vec![1]
}

/// An explicit rate curve for the `hoeffding` task: sampled `ψ(α)` values
/// `{alphas, psis}` or a named analytic form `{kind, ...}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Samples(SampledCurve),
    Analytic(AnalyticCurve),
}

/// Interpolated by a convex piecewise-linear curve through `(1, 0)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledCurve {
    pub alphas: Vec<f64>,
    pub psis: Vec<f64>,
    #[serde(default)]
    pub right_derivative: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticCurve {
    /// `c (t−1)²`.
    Quadratic { c: f64 },
    /// `a0 (t−1)`.
    Linear { a0: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoeffdingParams {
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    pub r_grid: Vec<f64>,
    #[serde(default)]
    pub a_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    #[serde(default)]
    pub a_grid: Option<Vec<f64>>,
    pub n_list: Vec<usize>,
    #[serde(default = "np_mode")]
    pub mode: TestMode,
}

fn np_mode() -> TestMode {
    TestMode::Np
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScParams {
    pub r_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    #[serde(default = "np_mode")]
    pub mode: TestMode,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LdpSource {
    /// Law of `k/n`, `k ~ Binomial(n, p)`.
    Binomial { p: f64, ns: Vec<usize> },
    /// `(1/n) log(ρ̂_n/σ_n)` of the scenario family, pinched.
    Pinched {
        ns: Vec<usize>,
        #[serde(default = "sigma_reference")]
        reference: sconv::ldp::Reference,
    },
}

fn sigma_reference() -> sconv::ldp::Reference {
    sconv::ldp::Reference::Sigma
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpParams {
    pub source: LdpSource,
    pub x_grid: Vec<f64>,
    /// Right end of the lower-bound window; defaults to the largest support point.
    #[serde(default)]
    pub window_end: Option<f64>,
    pub t_range: (f64, f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub n_list: Vec<usize>,
    pub alphas: Vec<f64>,
    #[serde(default = "sandwiched")]
    pub variant: RenyiVariant,
}

fn sandwiched() -> RenyiVariant {
    RenyiVariant::Sandwiched
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    /// Random instances per property.
    #[serde(default)]
    pub cases: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Params {
    Renyi(RenyiParams),
    Hoeffding(HoeffdingParams),
    NpSweep(SweepParams),
    ScReport(ScParams),
    Ldp(LdpParams),
    Family(FamilyParams),
    Verify(VerifyParams),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub task: Task,
    pub family: Option<StateFamilySpec>,
    pub params: Params,
}

fn pointer_of(path: &serde_path_to_error::Path, prefix: &str) -> String {
    use serde_path_to_error::Segment;
    let mut out = prefix.to_string();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

fn from_value<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let pointer = pointer_of(e.path(), prefix);
        CliError::validation(e.inner().to_string(), Some(&pointer))
    })
}

fn nonempty(v: &[f64], pointer: &str) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::validation("grid is empty", Some(pointer)));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::validation("grid has a non-finite entry", Some(pointer)));
    }
    Ok(())
}

fn increasing(ns: &[usize], pointer: &str) -> Result<(), CliError> {
    if ns.is_empty() {
        return Err(CliError::validation("n_list is empty", Some(pointer)));
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::validation("n_list must be positive and strictly increasing", Some(pointer)));
    }
    Ok(())
}

impl Scenario {
    /// Parses and validates a scenario; errors carry a JSON pointer to the
    /// offending field.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path(), "");
            CliError::validation(e.inner().to_string(), Some(&pointer))
        })?;
        let family = match raw.family {
            Some(v) => {
                let spec: StateFamilySpec = from_value(v, "/family")?;
                spec.validate().map_err(|e| CliError::at(e, "/family"))?;
                Some(spec)
            }
            None => None,
        };
        let params_value = raw.params.unwrap_or(Value::Object(Default::default()));
        let p = "/params";
        let params = match raw.task {
            Task::Renyi => {
                let q: RenyiParams = from_value(params_value, p)?;
                nonempty(&q.alphas, "/params/alphas")?;
                increasing(&q.n_list, "/params/n_list")?;
                if q.alphas.iter().any(|a| *a <= 0.0) {
                    return Err(CliError::validation("orders must be positive", Some("/params/alphas")));
                }
                Params::Renyi(q)
            }
            Task::Hoeffding => {
                let q: HoeffdingParams = from_value(params_value, p)?;
                nonempty(&q.r_grid, "/params/r_grid")?;
                if let Some(a) = &q.a_grid {
                    nonempty(a, "/params/a_grid")?;
                }
                Params::Hoeffding(q)
            }
            Task::NpSweep => {
                let q: SweepParams = from_value(params_value, p)?;
                increasing(&q.n_list, "/params/n_list")?;
                if let Some(a) = &q.a_grid {
                    nonempty(a, "/params/a_grid")?;
                }
                Params::NpSweep(q)
            }
            Task::ScReport => {
                let q: ScParams = from_value(params_value, p)?;
                nonempty(&q.r_grid, "/params/r_grid")?;
                increasing(&q.n_list, "/params/n_list")?;
                Params::ScReport(q)
            }
            Task::Ldp => {
                let q: LdpParams = from_value(params_value, p)?;
                nonempty(&q.x_grid, "/params/x_grid")?;
                let ns = match &q.source {
                    LdpSource::Binomial { ns, .. } | LdpSource::Pinched { ns, .. } => ns,
                };
                increasing(ns, "/params/source/ns")?;
                Params::Ldp(q)
            }
            Task::Family => {
                let q: FamilyParams = from_value(params_value, p)?;
                nonempty(&q.alphas, "/params/alphas")?;
                increasing(&q.n_list, "/params/n_list")?;
                Params::Family(q)
            }
            Task::Verify => Params::Verify(from_value(params_value, p)?),
        };
        let needs_family = match &params {
            Params::Renyi(_) | Params::NpSweep(_) | Params::ScReport(_) | Params::Family(_) => true,
            Params::Hoeffding(h) => h.curve.is_none(),
            Params::Ldp(l) => matches!(l.source, LdpSource::Pinched { .. }),
            Params::Verify(_) => false,
        };
        if needs_family && family.is_none() {
            return Err(CliError::validation(format!("task {} needs a family", raw.task.name()), Some("/family")));
        }
        Ok(Scenario { task: raw.task, family, params })
    }

    pub fn family(&self) -> &StateFamilySpec {
        self.family.as_ref().expect("checked at parse time")
    }
}
