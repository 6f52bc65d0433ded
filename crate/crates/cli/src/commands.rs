use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use fermipair::entanglement::EntanglementReport;
use fermipair::experiment::{simulate_run, write_events_csv, CountsRecord};
use fermipair::{
    decompose, end_to_end, entanglement_distance, kernel, pair_state, DetectorProfile, PairQuery,
    TwoQubitState,
};
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::manifest::{csv_header_comment, OutputDir, RunManifest, MANIFEST_NAME};
use crate::Invalid;

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn profile(sigma: f64) -> Result<DetectorProfile> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(invalid(format!(
            "--sigma must be finite and non-negative, got {sigma}"
        )));
    }
    Ok(DetectorProfile::from_sigma(sigma)?)
}

fn check_kf(kf: Option<f64>) -> Result<()> {
    match kf {
        Some(k) if !(k.is_finite() && k > 0.0) => Err(invalid(format!(
            "--kf must be finite and positive, got {k}"
        ))),
        _ => Ok(()),
    }
}

fn pretty(v: &impl Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

// ---------------------------------------------------------------- pair-state

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct PairStateArgs {
    /// Detector separation k_f·d.
    #[arg(long)]
    pub x: f64,
    /// Gaussian detector width in units of 1/k_f; 0 for point-like detectors.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Fermi wavenumber in 1/m; adds the separation in metres to the report.
    #[arg(long)]
    pub kf: Option<f64>,
    /// Write pair_state.json and a manifest here instead of printing.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct PairStateReport {
    x: f64,
    sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    separation_m: Option<f64>,
    g: f64,
    state: TwoQubitState,
    coefficients: [[f64; 4]; 4],
    #[serde(flatten)]
    entanglement: EntanglementReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest: Option<&'static str>,
}

pub fn cmd_pair_state(args: PairStateArgs) -> Result<()> {
    let p = profile(args.sigma)?;
    check_kf(args.kf)?;
    let q = PairQuery::new(args.x, p).map_err(|e| invalid(format!("--x: {e}")))?;
    let rho = pair_state(&q)?;
    let report = PairStateReport {
        x: args.x,
        sigma: args.sigma,
        separation_m: args.kf.map(|k| args.x / k),
        g: kernel(args.x, p)?,
        coefficients: decompose(&rho).a,
        entanglement: EntanglementReport::of(&rho),
        state: rho,
        manifest: args.out_dir.as_ref().map(|_| MANIFEST_NAME),
    };
    match &args.out_dir {
        None => print!("{}", String::from_utf8(pretty(&report)?)?),
        Some(dir) => {
            let mut out = OutputDir::create(dir)?;
            out.write("pair_state.json", &pretty(&report)?)?;
            out.finish("pair-state", None, &args)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------- scan

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub x_step: f64,
    /// Comma-separated detector widths.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub sigma: Vec<f64>,
    /// Write scan.csv and a manifest here instead of printing.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

const MAX_SCAN_POINTS: usize = 10_000_000;

fn grid(args: &ScanArgs) -> Result<Vec<f64>> {
    let (lo, hi, step) = (args.x_min, args.x_max, args.x_step);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(invalid("scan range must be finite"));
    }
    if step <= 0.0 {
        return Err(invalid(format!("--x-step must be positive, got {step}")));
    }
    if lo < 0.0 || hi < lo {
        return Err(invalid(format!("empty or negative range [{lo}, {hi}]")));
    }
    // tolerate rounding in (hi − lo)/step so that the end point is kept
    let n = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if n > MAX_SCAN_POINTS {
        return Err(invalid(format!(
            "{n} grid points exceed the limit of {MAX_SCAN_POINTS}"
        )));
    }
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}

/// Interpolated crossing of g² = ½ between adjacent grid points.
fn scan_crossing(xs: &[f64], gs: &[f64]) -> Option<f64> {
    let h: Vec<f64> = gs.iter().map(|g| g * g - 0.5).collect();
    (1..xs.len()).find_map(|k| {
        (h[k - 1] > 0.0 && h[k] <= 0.0).then(|| {
            let t = h[k - 1] / (h[k - 1] - h[k]);
            xs[k - 1] + t * (xs[k] - xs[k - 1])
        })
    })
}

pub fn cmd_scan(args: ScanArgs) -> Result<()> {
    let xs = grid(&args)?;
    if args.sigma.is_empty() {
        return Err(invalid("at least one --sigma value is required"));
    }
    let profiles = args
        .sigma
        .iter()
        .map(|&s| profile(s))
        .collect::<Result<Vec<_>>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "x",
        "sigma",
        "g",
        "negativity",
        "concurrence",
        "chsh",
        "x_star",
        "x_star_scan",
    ])?;
    for (&sigma, &p) in args.sigma.iter().zip(&profiles) {
        let x_star = entanglement_distance(p)?;
        let gs = xs
            .iter()
            .map(|&x| kernel(x, p))
            .collect::<fermipair::Result<Vec<_>>>()?;
        let crossing = scan_crossing(&xs, &gs)
            .map(|v| v.to_string())
            .unwrap_or_default();
        for (&x, &g) in xs.iter().zip(&gs) {
            let rho = pair_state(&PairQuery::new(x, p)?)?;
            let r = EntanglementReport::of(&rho);
            w.write_record([
                x.to_string(),
                sigma.to_string(),
                g.to_string(),
                r.negativity.to_string(),
                r.concurrence.to_string(),
                r.chsh_max.to_string(),
                x_star.to_string(),
                crossing.clone(),
            ])?;
        }
    }
    let body = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    match &args.out_dir {
        None => print!("{}", String::from_utf8(body)?),
        Some(dir) => {
            let mut text = csv_header_comment().into_bytes();
            text.extend(body);
            let mut out = OutputDir::create(dir)?;
            out.write("scan.csv", &text)?;
            out.finish("scan", None, &args)?;
        }
    }
    Ok(())
}

// --------------------------------------------------------------- ent-distance

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct EntDistanceArgs {
    /// Comma-separated detector widths.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub sigma: Vec<f64>,
    /// Fermi wavenumber in 1/m; adds distances in metres.
    #[arg(long)]
    pub kf: Option<f64>,
    /// Write ent_distance.json and a manifest here instead of printing.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct DistanceRow {
    sigma: f64,
    x_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance_m: Option<f64>,
}

#[derive(Serialize)]
struct DistanceReport {
    results: Vec<DistanceRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest: Option<&'static str>,
}

pub fn cmd_ent_distance(args: EntDistanceArgs) -> Result<()> {
    check_kf(args.kf)?;
    if args.sigma.is_empty() {
        return Err(invalid("at least one --sigma value is required"));
    }
    let mut results = Vec::new();
    for &sigma in &args.sigma {
        let x_star = entanglement_distance(profile(sigma)?)?;
        results.push(DistanceRow {
            sigma,
            x_star,
            distance_m: args.kf.map(|k| x_star / k),
        });
    }
    let report = DistanceReport {
        results,
        manifest: args.out_dir.as_ref().map(|_| MANIFEST_NAME),
    };
    match &args.out_dir {
        None => print!("{}", String::from_utf8(pretty(&report)?)?),
        Some(dir) => {
            let mut out = OutputDir::create(dir)?;
            out.write("ent_distance.json", &pretty(&report)?)?;
            out.finish("ent-distance", None, &args)?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------------ simulate

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    /// TOML run configuration; the proposed-experiment values when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run time in seconds (`inf` allowed).
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub efficiency: Option<f64>,
    #[arg(long)]
    pub true_pair_fraction: Option<f64>,
    /// Separation k_f·d of genuine pairs.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Directory for counts.json, counts.csv, events.csv and the manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => SimConfig::from_toml_file(path)?,
        None => SimConfig::reference(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.duration {
        cfg.duration = v;
    }
    if let Some(v) = args.efficiency {
        cfg.efficiency = v;
    }
    if let Some(v) = args.true_pair_fraction {
        cfg.true_pair_fraction = v;
    }
    if let Some(v) = args.x {
        cfg.pair_separation_x = v;
    }
    if let Some(v) = args.sigma {
        cfg.sigma = v;
    }
    run_simulation(&cfg, &args.out_dir)
}

fn run_simulation(cfg: &SimConfig, dir: &Path) -> Result<()> {
    let experiment = cfg.to_experiment()?;
    let mut sim = simulate_run(&experiment)?;
    sim.record.metadata.config = Some(experiment);
    sim.record.metadata.manifest = Some(MANIFEST_NAME.to_string());

    let mut out = OutputDir::create(dir)?;
    let mut json = sim.record.to_json()?;
    json.push('\n');
    out.write("counts.json", json.as_bytes())?;
    let mut csv_text = csv_header_comment().into_bytes();
    sim.record.write_csv(&mut csv_text)?;
    out.write("counts.csv", &csv_text)?;
    let mut events = csv_header_comment().into_bytes();
    write_events_csv(&sim.events, &mut events)?;
    out.write("events.csv", &events)?;
    let dir = out.finish("simulate", Some(cfg.seed), cfg)?;

    let m = &sim.record.metadata;
    let total = sim.record.total_coincidences();
    let accidental_fraction = if total > 0 {
        format!("{:.3}", m.accidental_coincidences as f64 / total as f64)
    } else {
        "n/a".into()
    };
    println!(
        "simulate: {total} coincidences ({} true, {} accidental; accidental fraction {accidental_fraction}) \
         in {:.1} s, {} neutrons emitted, {} remaining; outputs in {}",
        m.true_coincidences,
        m.accidental_coincidences,
        m.realized_time,
        m.emitted,
        m.remaining,
        dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- tomography

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TomographyArgs {
    /// Counts record, JSON or CSV (by extension).
    #[arg(long)]
    pub counts: PathBuf,
    /// Reference state: `singlet`, `mixed`, `pair:<x>[:<sigma>]`, or a JSON
    /// file with a 4×4 matrix as rows of `[re, im]` pairs.
    #[arg(long)]
    pub target: Option<String>,
    /// Write result.json and a manifest here instead of printing.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

fn read_counts(path: &Path) -> Result<CountsRecord> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let record = if is_csv {
        CountsRecord::read_csv(file)
    } else {
        std::io::read_to_string(file)
            .map_err(fermipair::Error::from)
            .and_then(|t| CountsRecord::from_json(&t))
    };
    record.with_context(|| format!("counts file {}", path.display()))
}

fn parse_target(text: &str) -> Result<TwoQubitState> {
    match text {
        "singlet" => return Ok(TwoQubitState::singlet()),
        "mixed" => return Ok(TwoQubitState::maximally_mixed()),
        _ => {}
    }
    if let Some(rest) = text.strip_prefix("pair:") {
        let mut parts = rest.split(':');
        let num = |s: Option<&str>| -> Result<f64> {
            s.unwrap_or("0")
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad --target {text:?}")))
        };
        let x = num(parts.next())?;
        let sigma = num(parts.next())?;
        if parts.next().is_some() {
            return Err(invalid(format!("bad --target {text:?}")));
        }
        return Ok(pair_state(&PairQuery::new(x, profile(sigma)?)?)?);
    }
    let text = std::fs::read_to_string(text).with_context(|| format!("reading target {text}"))?;
    serde_json::from_str(&text).with_context(|| format!("target state {text}"))
}

pub fn cmd_tomography(args: TomographyArgs) -> Result<()> {
    let record = read_counts(&args.counts)?;
    let target = args.target.as_deref().map(parse_target).transpose()?;
    let mut result = end_to_end(&record)?;
    if let Some(t) = &target {
        result = result.with_target(t);
    }
    let mut doc = serde_json::to_value(&result)?;
    let obj = doc.as_object_mut().expect("struct serializes to an object");
    obj.insert(
        "physical_entanglement".into(),
        serde_json::to_value(EntanglementReport::of(&result.physical_state))?,
    );
    match &args.out_dir {
        None => print!("{}", String::from_utf8(pretty(&doc)?)?),
        Some(dir) => {
            obj.insert("manifest".into(), MANIFEST_NAME.into());
            let mut resolved = args.clone();
            resolved.counts = std::fs::canonicalize(&args.counts)?;
            let mut out = OutputDir::create(dir)?;
            out.write("result.json", &pretty(&doc)?)?;
            let dir = out.finish("tomography", None, &resolved)?;
            let fid = result
                .target_fidelity
                .map(|f| format!(", fidelity to target {f:.4}"))
                .unwrap_or_default();
            println!(
                "tomography: {} coincidences, min eigenvalue of linear inversion {:.4}, \
                 largest standard error {:.4}{fid}; outputs in {}",
                record.total_coincidences(),
                result.min_eigenvalue,
                result.max_std_error(),
                dir.display()
            );
        }
    }
    Ok(())
}

// -------------------------------------------------------------------- replay

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Where to write the reproduced outputs.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let m = RunManifest::read(&args.manifest)?;
    if m.tool_version != fermipair::VERSION {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            m.tool_version,
            fermipair::VERSION
        );
    }
    let cfg = m.config;
    let out = Some(args.out_dir.clone());
    let bad = |e: serde_json::Error| anyhow::Error::from(e).context("manifest config");
    match m.subcommand.as_str() {
        "pair-state" => cmd_pair_state(PairStateArgs {
            out_dir: out,
            ..serde_json::from_value(cfg).map_err(bad)?
        }),
        "scan" => cmd_scan(ScanArgs {
            out_dir: out,
            ..serde_json::from_value(cfg).map_err(bad)?
        }),
        "ent-distance" => cmd_ent_distance(EntDistanceArgs {
            out_dir: out,
            ..serde_json::from_value(cfg).map_err(bad)?
        }),
        "tomography" => cmd_tomography(TomographyArgs {
            out_dir: out,
            ..serde_json::from_value(cfg).map_err(bad)?
        }),
        "simulate" => {
            let sim: SimConfig = serde_json::from_value(cfg).map_err(bad)?;
            run_simulation(&sim, &args.out_dir)
        }
        other => Err(invalid(format!("unknown subcommand {other:?} in manifest"))),
    }
}
