use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::sim::CoincidenceEvent;
use super::{AnalyzerSetting, ExperimentConfig, JointOutcome, Port};
use crate::error::{Error, Result};

/// Run bookkeeping carried alongside the counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    #[serde(default)]
    pub realized_time: f64,
    #[serde(default)]
    pub emitted: u64,
    #[serde(default)]
    pub remaining: u64,
    #[serde(default)]
    pub true_pairs_emitted: u64,
    #[serde(default)]
    pub accidental_pairs_emitted: u64,
    #[serde(default)]
    pub true_coincidences: u64,
    #[serde(default)]
    pub accidental_coincidences: u64,
    /// Windows with three or more arrivals.
    #[serde(default)]
    pub discarded_windows: u64,
    /// File name of the manifest that produced this record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

/// Coincidence and singles counts per analyzer setting.
///
/// `joint[k][α][β]` counts coincidences at setting `k` with the first arm in
/// port `α` and the second in `β` (index 0 = `+`). `singles[k][arm][port]`
/// counts every detection in that arm and port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub settings: Vec<AnalyzerSetting>,
    #[serde(rename = "joint_counts")]
    pub joint: Vec<[[u64; 2]; 2]>,
    pub singles: Vec<[[u64; 2]; 2]>,
    #[serde(default)]
    pub metadata: RunMetadata,
}

const CSV_HEADER: [&str; 16] = [
    "setting_id",
    "axis1_x",
    "axis1_y",
    "axis1_z",
    "axis2_x",
    "axis2_y",
    "axis2_z",
    "eta1_plus",
    "eta1_minus",
    "eta2_plus",
    "eta2_minus",
    "outcome1",
    "outcome2",
    "count",
    "singles1",
    "singles2",
];

impl CountsRecord {
    pub fn validate(&self) -> Result<()> {
        let n = self.settings.len();
        if self.joint.len() != n || self.singles.len() != n {
            return Err(Error::Format(format!(
                "{} settings but {} joint and {} singles entries",
                n,
                self.joint.len(),
                self.singles.len()
            )));
        }
        for (k, s) in self.settings.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::Format(format!("setting {k}: {e}")))?;
            for a in 0..2 {
                for b in 0..2 {
                    let j = self.joint[k][a][b];
                    if j > self.singles[k][0][a] || j > self.singles[k][1][b] {
                        return Err(Error::Format(format!(
                            "setting {k}: joint count {j} exceeds singles"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn setting_total(&self, k: usize) -> u64 {
        self.joint[k].iter().flatten().sum()
    }

    pub fn total_coincidences(&self) -> u64 {
        (0..self.joint.len()).map(|k| self.setting_total(k)).sum()
    }

    pub fn count(&self, k: usize, o: JointOutcome) -> u64 {
        self.joint[k][o.0.index()][o.1.index()]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: CountsRecord = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }

    /// One row per setting × joint outcome.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for (k, s) in self.settings.iter().enumerate() {
            for o in JointOutcome::ALL {
                let mut row = vec![k.to_string()];
                row.extend(s.axis1.iter().chain(&s.axis2).map(f64::to_string));
                row.extend(s.eta1.iter().chain(&s.eta2).map(f64::to_string));
                row.push(o.0.symbol().into());
                row.push(o.1.symbol().into());
                row.push(self.count(k, o).to_string());
                row.push(self.singles[k][0][o.0.index()].to_string());
                row.push(self.singles[k][1][o.1.index()].to_string());
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`CountsRecord::write_csv`]; lines starting
    /// with `#` are ignored. Metadata is not part of the CSV form.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Format(format!("unexpected CSV header: {headers:?}")));
        }
        let mut settings: Vec<AnalyzerSetting> = Vec::new();
        let mut joint: Vec<[[u64; 2]; 2]> = Vec::new();
        let mut singles: Vec<[[Option<u64>; 2]; 2]> = Vec::new();
        let mut seen: Vec<[bool; 4]> = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let ctx = |msg: &str| Error::Format(format!("CSV row {}: {msg}", line + 1));
            let f = |i: usize| -> Result<f64> {
                row[i]
                    .parse::<f64>()
                    .map_err(|_| ctx(&format!("bad number in {}", CSV_HEADER[i])))
            };
            let u = |i: usize| -> Result<u64> {
                row[i]
                    .parse::<u64>()
                    .map_err(|_| ctx(&format!("bad count in {}", CSV_HEADER[i])))
            };
            let k = u(0)? as usize;
            let setting = AnalyzerSetting {
                axis1: [f(1)?, f(2)?, f(3)?],
                axis2: [f(4)?, f(5)?, f(6)?],
                eta1: [f(7)?, f(8)?],
                eta2: [f(9)?, f(10)?],
            };
            let p1 = Port::parse(&row[11]).ok_or_else(|| ctx("outcome1 must be + or -"))?;
            let p2 = Port::parse(&row[12]).ok_or_else(|| ctx("outcome2 must be + or -"))?;
            let o = JointOutcome(p1, p2);
            if k == settings.len() {
                settings.push(setting);
                joint.push([[0; 2]; 2]);
                singles.push([[None; 2]; 2]);
                seen.push([false; 4]);
            } else if k > settings.len() {
                return Err(ctx("setting ids must be contiguous"));
            } else if settings[k] != setting {
                return Err(ctx("setting parameters differ between rows"));
            }
            if std::mem::replace(&mut seen[k][o.index()], true) {
                return Err(ctx("duplicate outcome row"));
            }
            joint[k][p1.index()][p2.index()] = u(13)?;
            for (arm, port, col) in [(0, p1, 14), (1, p2, 15)] {
                let v = u(col)?;
                let slot = &mut singles[k][arm][port.index()];
                match *slot {
                    Some(prev) if prev != v => return Err(ctx("inconsistent singles")),
                    _ => *slot = Some(v),
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| s.iter().any(|b| !b)) {
            return Err(Error::Format(format!(
                "setting {k} is missing outcome rows"
            )));
        }
        let singles = singles
            .into_iter()
            .map(|s| s.map(|arm| arm.map(|v| v.unwrap_or(0))))
            .collect();
        let r = CountsRecord {
            settings,
            joint,
            singles,
            metadata: RunMetadata::default(),
        };
        r.validate()?;
        Ok(r)
    }
}

/// Writes coincidence events as CSV `t,kind,outcome1,outcome2,setting_id`.
pub fn write_events_csv<W: Write>(events: &[CoincidenceEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "kind", "outcome1", "outcome2", "setting_id"])?;
    for e in events {
        let kind = match e.kind {
            super::sim::PairKind::True => "true",
            super::sim::PairKind::Accidental => "accidental",
        };
        w.write_record([
            e.t.to_string(),
            kind.to_string(),
            e.outcome.0.symbol().to_string(),
            e.outcome.1.symbol().to_string(),
            e.setting_id.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
