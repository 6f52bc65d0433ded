use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::record::{CountsRecord, RunMetadata};
use super::{
    born_probabilities, flux_for, sample_index, thin, AnalyzerSetting, ExperimentConfig,
    JointOutcome, Port, Target,
};
use crate::error::{Error, Result};
use crate::fermi::{pair_state, PairQuery};
use crate::spin::TwoQubitState;

/// Origin of a logged coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    True,
    Accidental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceEvent {
    /// Opening time of the window.
    pub t: f64,
    pub kind: PairKind,
    pub outcome: JointOutcome,
    pub setting_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub record: CountsRecord,
    pub events: Vec<CoincidenceEvent>,
}

struct Plan<'a> {
    cfg: &'a ExperimentConfig,
    idx: usize,
    start: f64,
    logged: u64,
}

impl Plan<'_> {
    fn done(&self) -> bool {
        self.idx >= self.cfg.settings_plan.len()
    }

    /// Steps over dwell entries that expired before `t`.
    fn advance_to(&mut self, t: f64) {
        while !self.done() {
            match self.cfg.settings_plan[self.idx].target {
                Target::DwellS(d) if t >= self.start + d => {
                    self.start += d;
                    self.idx += 1;
                    self.logged = 0;
                }
                _ => break,
            }
        }
    }

    /// Counts a logged coincidence; returns true if the entry just completed.
    fn log(&mut self, t: f64) -> bool {
        self.logged += 1;
        if let Target::Coincidences(n) = self.cfg.settings_plan[self.idx].target {
            if self.logged >= n {
                self.idx += 1;
                self.start = t;
                self.logged = 0;
                return true;
            }
        }
        false
    }

    /// Time at which the final entry completes, if it is dwell-bounded.
    fn dwell_end(&self) -> Option<f64> {
        let mut t = self.start;
        for e in &self.cfg.settings_plan[self.idx.min(self.cfg.settings_plan.len())..] {
            match e.target {
                Target::DwellS(d) => t += d,
                Target::Coincidences(_) => return None,
            }
        }
        Some(t)
    }
}

fn record_single<R: Rng>(rng: &mut R, setting: &AnalyzerSetting, singles: &mut [[u64; 2]; 2]) {
    let arm = usize::from(rng.random::<bool>());
    let port = Port::from_index(usize::from(rng.random::<bool>()));
    if rng.random::<f64>() < setting.eta(arm, port) {
        singles[arm][port.index()] += 1;
    }
}

/// Event-level Monte Carlo of one vessel filling.
///
/// Emissions form a Poisson process at `N r c e`, with `N` dropping by one
/// per emission. A window of length `τ` opens at each arrival that is not
/// already inside a window. Windows holding exactly two arrivals are pairs:
/// genuine with probability `true_pair_fraction` (spins in the pair state),
/// accidental otherwise (independent unpolarized spins). Single arrivals and
/// windows with three or more arrivals only contribute singles counts.
pub fn simulate_run(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let n_settings = cfg.settings_plan.len();
    let true_state = pair_state(&PairQuery::new(cfg.pair_separation_x, cfg.profile)?)?;
    let true_probs: Vec<[f64; 4]> = cfg
        .settings_plan
        .iter()
        .map(|e| born_probabilities(&true_state, &e.setting))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut joint = vec![[[0u64; 2]; 2]; n_settings];
    let mut singles = vec![[[0u64; 2]; 2]; n_settings];
    let mut events = Vec::new();
    let mut meta = RunMetadata::default();

    let mut plan = Plan {
        cfg,
        idx: 0,
        start: 0.0,
        logged: 0,
    };
    let mut remaining = cfg.n_trapped;
    let mut clock = 0.0;
    let mut pending: Option<f64> = None;
    let mut stop_time = None;

    loop {
        let open = match pending.take() {
            Some(t) => t,
            None if remaining == 0 => break,
            None => clock + next_gap(&mut rng, remaining, cfg),
        };
        plan.advance_to(open);
        if plan.done() {
            stop_time = Some(plan.start);
            break;
        }
        if open >= cfg.duration {
            break;
        }
        remaining -= 1;
        let mut arrivals = 1u32;
        let close = open + cfg.tau;
        let mut last = open;
        while remaining > 0 {
            let next = last + next_gap(&mut rng, remaining, cfg);
            if next < close && next < cfg.duration {
                remaining -= 1;
                arrivals += 1;
                last = next;
            } else {
                pending = Some(next);
                break;
            }
        }
        clock = last;
        meta.emitted += u64::from(arrivals);

        let sid = plan.idx;
        let setting = &cfg.settings_plan[sid].setting;
        match arrivals {
            2 => {
                let kind = if rng.random::<f64>() < cfg.true_pair_fraction {
                    meta.true_pairs_emitted += 1;
                    PairKind::True
                } else {
                    meta.accidental_pairs_emitted += 1;
                    PairKind::Accidental
                };
                let probs = match kind {
                    PairKind::True => true_probs[sid],
                    PairKind::Accidental => [0.25; 4],
                };
                let outcome = JointOutcome::from_index(sample_index(&probs, &mut rng));
                let sampled = thin(outcome, setting, &mut rng);
                for arm in 0..2 {
                    if sampled.detected[arm] {
                        let port = if arm == 0 { outcome.0 } else { outcome.1 };
                        singles[sid][arm][port.index()] += 1;
                    }
                }
                if let Some(o) = sampled.coincidence() {
                    joint[sid][o.0.index()][o.1.index()] += 1;
                    match kind {
                        PairKind::True => meta.true_coincidences += 1,
                        PairKind::Accidental => meta.accidental_coincidences += 1,
                    }
                    events.push(CoincidenceEvent {
                        t: open,
                        kind,
                        outcome: o,
                        setting_id: sid,
                    });
                    if plan.log(close) && plan.done() {
                        stop_time = Some(close);
                        break;
                    }
                }
            }
            n => {
                if n > 2 {
                    meta.discarded_windows += 1;
                }
                for _ in 0..n {
                    record_single(&mut rng, setting, &mut singles[sid]);
                }
            }
        }
    }

    meta.realized_time = match stop_time {
        Some(t) => t.min(cfg.duration),
        None if cfg.duration.is_finite() => cfg.duration,
        // unbounded run that drained the vessel
        None => plan
            .dwell_end()
            .filter(|t| t.is_finite())
            .unwrap_or(clock)
            .max(clock),
    };
    meta.remaining = remaining;
    meta.config = Some(cfg.clone());

    let record = CountsRecord {
        settings: cfg.settings_plan.iter().map(|e| e.setting).collect(),
        joint,
        singles,
        metadata: meta,
    };
    Ok(SimulationOutput { record, events })
}

fn next_gap<R: Rng>(rng: &mut R, remaining: u64, cfg: &ExperimentConfig) -> f64 {
    let rate = flux_for(remaining as f64, cfg);
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Multinomial coincidence counts for `n` detected pairs of `rho` at one
/// setting, with the detector efficiencies folded into the outcome weights.
pub fn sample_setting_counts<R: Rng + ?Sized>(
    rho: &TwoQubitState,
    setting: &AnalyzerSetting,
    n: u64,
    rng: &mut R,
) -> Result<[u64; 4]> {
    let born = born_probabilities(rho, setting);
    let mut w = [0.0; 4];
    for o in JointOutcome::ALL {
        w[o.index()] = born[o.index()] * setting.eta(0, o.0) * setting.eta(1, o.1);
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("no outcome can be detected".into()));
    }
    let mut counts = [0u64; 4];
    let mut left = n;
    let mut mass = 1.0;
    for k in 0..3 {
        let p = (w[k] / total / mass).clamp(0.0, 1.0);
        let draw = if left == 0 || p == 0.0 {
            0
        } else {
            Binomial::new(left, p)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(rng)
        };
        counts[k] = draw;
        left -= draw;
        mass -= w[k] / total;
        if mass <= 0.0 {
            break;
        }
    }
    counts[3] += left;
    Ok(counts)
}

/// A counts record with `n_per_setting` coincidences from `rho` at every
/// setting and no background. Singles equal the coincidence marginals.
pub fn forced_pairs_record<R: Rng + ?Sized>(
    rho: &TwoQubitState,
    settings: &[AnalyzerSetting],
    n_per_setting: u64,
    rng: &mut R,
) -> Result<CountsRecord> {
    let mut joint = Vec::with_capacity(settings.len());
    let mut singles = Vec::with_capacity(settings.len());
    for s in settings {
        let c = sample_setting_counts(rho, s, n_per_setting, rng)?;
        let j = [[c[0], c[1]], [c[2], c[3]]];
        joint.push(j);
        singles.push([
            [j[0][0] + j[0][1], j[1][0] + j[1][1]],
            [j[0][0] + j[1][0], j[0][1] + j[1][1]],
        ]);
    }
    Ok(CountsRecord {
        settings: settings.to_vec(),
        joint,
        singles,
        metadata: RunMetadata {
            true_coincidences: n_per_setting * settings.len() as u64,
            ..RunMetadata::default()
        },
    })
}
