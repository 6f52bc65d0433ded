//! Stored-neutron coincidence experiment: rate estimates, Born-rule
//! measurement model and the event-level Monte Carlo.

mod record;
mod sim;

pub use record::{write_events_csv, CountsRecord, RunMetadata};
pub use sim::{
    forced_pairs_record, sample_setting_counts, simulate_run, CoincidenceEvent, PairKind,
    SimulationOutput,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::DetectorProfile;
use crate::spin::{pauli, CMatrix2, TwoQubitState};
use num_complex::Complex64;

/// Output port of a polarizing beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Port {
    pub const BOTH: [Port; 2] = [Port::Plus, Port::Minus];

    pub fn index(self) -> usize {
        match self {
            Port::Plus => 0,
            Port::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Port {
        if i == 0 {
            Port::Plus
        } else {
            Port::Minus
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Port::Plus => 1.0,
            Port::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Port::Plus => "+",
            Port::Minus => "-",
        }
    }

    pub fn parse(s: &str) -> Option<Port> {
        match s.trim() {
            "+" => Some(Port::Plus),
            "-" => Some(Port::Minus),
            _ => None,
        }
    }
}

/// Joint port labels of a coincidence: first arm, second arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointOutcome(pub Port, pub Port);

impl JointOutcome {
    /// `(+,+), (+,−), (−,+), (−,−)`.
    pub const ALL: [JointOutcome; 4] = [
        JointOutcome(Port::Plus, Port::Plus),
        JointOutcome(Port::Plus, Port::Minus),
        JointOutcome(Port::Minus, Port::Plus),
        JointOutcome(Port::Minus, Port::Minus),
    ];

    pub fn index(self) -> usize {
        2 * self.0.index() + self.1.index()
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }
}

/// Analyzer orientation and per-port detection efficiency for both arms.
///
/// `eta1 = [η₊, η₋]` for the first arm, `eta2` likewise for the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSetting {
    pub axis1: [f64; 3],
    pub axis2: [f64; 3],
    #[serde(default = "unit_eta")]
    pub eta1: [f64; 2],
    #[serde(default = "unit_eta")]
    pub eta2: [f64; 2],
}

fn unit_eta() -> [f64; 2] {
    [1.0, 1.0]
}

/// Cartesian unit vector along Pauli axis `i ∈ {1, 2, 3}`.
pub fn unit_axis(i: usize) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[i - 1] = 1.0;
    v
}

impl AnalyzerSetting {
    pub fn new(axis1: [f64; 3], axis2: [f64; 3]) -> Result<Self> {
        Self::with_efficiencies(axis1, axis2, [1.0, 1.0], [1.0, 1.0])
    }

    pub fn with_efficiencies(
        axis1: [f64; 3],
        axis2: [f64; 3],
        eta1: [f64; 2],
        eta2: [f64; 2],
    ) -> Result<Self> {
        let s = Self {
            axis1,
            axis2,
            eta1,
            eta2,
        };
        s.validate()?;
        Ok(s)
    }

    /// Both analyzers along Pauli axes `i` and `j` (1-based).
    pub fn pauli_axes(i: usize, j: usize) -> Result<Self> {
        if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::InvalidArgument(format!(
                "axis pair ({i}, {j}) not in 1..=3"
            )));
        }
        Self::new(unit_axis(i), unit_axis(j))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("axis1", self.axis1), ("axis2", self.axis2)] {
            let n = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n.is_nan() || (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "{name} has norm {n}, expected 1"
                )));
            }
        }
        for eta in self.eta1.iter().chain(&self.eta2) {
            if !(*eta > 0.0 && *eta <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "port efficiency {eta} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn eta(&self, arm: usize, port: Port) -> f64 {
        match arm {
            0 => self.eta1[port.index()],
            _ => self.eta2[port.index()],
        }
    }

    /// If both axes are Pauli axes, their 1-based indices.
    pub fn as_pauli_pair(&self) -> Option<(usize, usize)> {
        let find = |a: &[f64; 3]| (1..=3).find(|&i| close3(a, &unit_axis(i)));
        Some((find(&self.axis1)?, find(&self.axis2)?))
    }
}

fn close3(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// `Π_±(n) = (I ± n·σ)/2`.
pub fn port_projector(axis: &[f64; 3], port: Port) -> CMatrix2 {
    let mut ns = CMatrix2::zeros();
    for (j, n) in axis.iter().enumerate() {
        ns += *pauli(j + 1).expect("valid index").matrix() * Complex64::new(*n, 0.0);
    }
    (CMatrix2::identity() + ns * Complex64::new(port.sign(), 0.0)) * Complex64::new(0.5, 0.0)
}

/// Born probabilities `Tr[ρ Π_α(axis1) ⊗ Π_β(axis2)]` in [`JointOutcome::ALL`]
/// order, before any detector losses.
pub fn born_probabilities(rho: &TwoQubitState, s: &AnalyzerSetting) -> [f64; 4] {
    let mut p = [0.0; 4];
    for o in JointOutcome::ALL {
        let proj = port_projector(&s.axis1, o.0).kronecker(&port_projector(&s.axis2, o.1));
        p[o.index()] = (rho.matrix() * proj).trace().re.max(0.0);
    }
    let total: f64 = p.iter().sum();
    p.map(|v| v / total)
}

/// One emitted pair after the analyzers: its spin outcome and whether each
/// arm's detector fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledPair {
    pub outcome: JointOutcome,
    pub detected: [bool; 2],
}

impl SampledPair {
    pub fn coincidence(&self) -> Option<JointOutcome> {
        (self.detected[0] && self.detected[1]).then_some(self.outcome)
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(3)
}

pub(crate) fn thin<R: Rng + ?Sized>(
    outcome: JointOutcome,
    s: &AnalyzerSetting,
    rng: &mut R,
) -> SampledPair {
    let d1 = rng.random::<f64>() < s.eta(0, outcome.0);
    let d2 = rng.random::<f64>() < s.eta(1, outcome.1);
    SampledPair {
        outcome,
        detected: [d1, d2],
    }
}

/// Draws a joint outcome from the Born rule, then applies port efficiencies.
pub fn sample_outcome<R: Rng + ?Sized>(
    rho: &TwoQubitState,
    s: &AnalyzerSetting,
    rng: &mut R,
) -> SampledPair {
    let probs = born_probabilities(rho, s);
    let outcome = JointOutcome::from_index(sample_index(&probs, rng));
    thin(outcome, s, rng)
}

/// When a plan entry hands over to the next one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// After this many logged coincidences.
    Coincidences(u64),
    /// After this many seconds of run time.
    DwellS(#[serde(with = "inf_f64")] f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub setting: AnalyzerSetting,
    pub target: Target,
}

/// The nine Pauli-axis settings `(i, j) ∈ {1,2,3}²`, row-major in `i`.
pub fn tomography_plan(target: Target, eta1: [f64; 2], eta2: [f64; 2]) -> Result<Vec<PlanEntry>> {
    let mut plan = Vec::with_capacity(9);
    for i in 1..=3 {
        for j in 1..=3 {
            let setting =
                AnalyzerSetting::with_efficiencies(unit_axis(i), unit_axis(j), eta1, eta2)?;
            plan.push(PlanEntry { setting, target });
        }
    }
    Ok(plan)
}

/// Parameters of one filling of the storage vessel.
///
/// Times are in seconds. `duration` may be infinite, in which case the run
/// ends when the plan completes or the vessel is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Trapped neutrons at the start of the run.
    pub n_trapped: u64,
    /// Hole area over vessel wall area.
    pub hole_ratio: f64,
    /// Wall collisions per neutron per second.
    pub collision_rate: f64,
    /// Collimation and detection efficiency.
    pub efficiency: f64,
    /// Coincidence window.
    pub tau: f64,
    #[serde(with = "inf_f64")]
    pub duration: f64,
    /// Effective `k_f · d` of truly paired neutrons at the slit.
    pub pair_separation_x: f64,
    pub profile: DetectorProfile,
    /// Fraction of two-arrival windows that are genuine pairs.
    pub true_pair_fraction: f64,
    pub settings_plan: Vec<PlanEntry>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Vessel and window values of the proposed bottle experiment with a
    /// one-hour run split evenly over the nine tomography settings.
    pub fn reference_vessel() -> Self {
        let duration = 3600.0;
        Self {
            n_trapped: 100_000,
            hole_ratio: 1e-5,
            collision_rate: 50.0,
            efficiency: 0.2,
            tau: 1e-4,
            duration,
            pair_separation_x: 0.0,
            profile: DetectorProfile::PointLike,
            true_pair_fraction: 0.5,
            settings_plan: tomography_plan(Target::DwellS(duration / 9.0), [1.0; 2], [1.0; 2])
                .expect("unit efficiencies"),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let positive = [
            ("hole_ratio", self.hole_ratio),
            ("collision_rate", self.collision_rate),
            ("efficiency", self.efficiency),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.efficiency > 1.0 {
            return bad(format!(
                "efficiency must not exceed 1, got {}",
                self.efficiency
            ));
        }
        if self.hole_ratio > 1.0 {
            return bad(format!(
                "hole_ratio must not exceed 1, got {}",
                self.hole_ratio
            ));
        }
        if self.duration.is_nan() || self.duration < 0.0 {
            return bad(format!(
                "duration must be non-negative, got {}",
                self.duration
            ));
        }
        if !(self.pair_separation_x.is_finite() && self.pair_separation_x >= 0.0) {
            return bad(format!(
                "pair_separation_x must be finite and non-negative, got {}",
                self.pair_separation_x
            ));
        }
        if !(0.0..=1.0).contains(&self.true_pair_fraction) {
            return bad(format!(
                "true_pair_fraction must lie in [0, 1], got {}",
                self.true_pair_fraction
            ));
        }
        self.profile
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if self.settings_plan.is_empty() {
            return bad("settings_plan is empty".into());
        }
        for (k, entry) in self.settings_plan.iter().enumerate() {
            entry
                .setting
                .validate()
                .map_err(|e| Error::InvalidConfig(format!("settings_plan[{k}]: {e}")))?;
            match entry.target {
                Target::Coincidences(0) => {
                    return bad(format!("settings_plan[{k}]: zero coincidence target"))
                }
                Target::DwellS(d) if d.is_nan() || d <= 0.0 => {
                    return bad(format!("settings_plan[{k}]: dwell must be positive"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Emission rate `N r c e` in neutrons per second.
pub fn flux_estimate(cfg: &ExperimentConfig) -> f64 {
    flux_for(cfg.n_trapped as f64, cfg)
}

pub(crate) fn flux_for(n: f64, cfg: &ExperimentConfig) -> f64 {
    n * cfg.hole_ratio * cfg.collision_rate * cfg.efficiency
}

/// Mean number of emissions per coincidence window, `μ = flux · τ`.
pub fn mean_per_window(cfg: &ExperimentConfig) -> f64 {
    flux_estimate(cfg) * cfg.tau
}

/// Probability that a window opened by one arrival collects exactly one more,
/// `μ e^{−μ}`: the chance per detection of logging a coincidence.
pub fn coincidence_probability_per_window(cfg: &ExperimentConfig) -> f64 {
    let mu = mean_per_window(cfg);
    mu * (-mu).exp()
}

/// Coincidences per second at the initial flux.
///
/// Each window opens on an arrival and lasts `τ`, after which the next
/// arrival opens a new one, so windows open at rate `λ/(1 + μ)` and each
/// logs a coincidence with probability `μ e^{−μ}`:
///
/// ```text
/// rate = λ μ e^{−μ} / (1 + μ) ≈ μ² / τ      (μ ≪ 1)
/// ```
pub fn coincidence_rate_estimate(cfg: &ExperimentConfig) -> f64 {
    let lambda = flux_estimate(cfg);
    let mu = lambda * cfg.tau;
    lambda * mu * (-mu).exp() / (1.0 + mu)
}

/// Expected coincidences over the run, integrating the rate while the
/// vessel drains at `N r c e` (valid for `μ ≪ 1`).
pub fn expected_coincidences(cfg: &ExperimentConfig, duration: f64) -> f64 {
    let k = cfg.hole_ratio * cfg.collision_rate * cfg.efficiency;
    let r0 = coincidence_rate_estimate(cfg);
    // rate ∝ N(t)² = N₀² e^{−2kt}
    r0 * (1.0 - (-2.0 * k * duration).exp()) / (2.0 * k)
}

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`,
/// `"nan"` (JSON has no literal for them). Plain numbers are read as-is.
pub mod inf_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, got {other:?}"
                ))),
            },
        }
    }
}
