//! `triq`: build states, evaluate witnesses, run beamlines and measurement
//! campaigns, and emit plot-ready scan data.
//!
//! Every command prints a JSON document with a `schema_version` field and a
//! run manifest (command, full parameter set, seed, tool version, output
//! paths). Identical manifests produce byte-identical outputs; CSV floats use
//! fixed 12-significant-digit formatting.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use triq_core::beamline::{run_beamline, BeamlineConfig, ChainKind};
use triq_core::experiment::{
    calibrate, run_campaign, simulate_scan_seeded, CalibrationParameter, CampaignSettings,
    ScanResult, StateKind,
};
use triq_core::states::{
    make_ghz, make_w, path_dephase, DephasingStrength, GHZParams, WParams,
};
use triq_core::suites::{ghz_suite, ksep_suite, w_suite, SuiteOutcome};
use triq_core::tensor::{CVector, DIM};
use triq_core::witnesses::{
    witness_ghz, witness_ksep, witness_ksep_best, witness_w, ElementSource, ProductState,
    WitnessName, WitnessReport,
};
use triq_core::{BasisLabel, DensityMatrix, PureState};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "triq", version, about = "Tripartite path/spin/energy entanglement toolkit")]
struct Cli {
    /// Worker threads for inner loops (results are thread-count independent).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a GHZ or W state and write its amplitudes and density matrix.
    State(StateArgs),
    /// Evaluate an entanglement witness on a builtin or file-loaded state.
    Witness(WitnessArgs),
    /// Run a beamline config JSON and report the output state and survival.
    Simulate(SimulateArgs),
    /// Phase-scan an analysis chain and emit CSV counts plus the fit.
    Scan(ScanArgs),
    /// Run the full measurement campaign for one state.
    Campaign(CampaignArgs),
    /// Emit witness tables next to the published values.
    Reproduce(ReproduceArgs),
    /// Run the randomized witness nonpositivity suites.
    SampleTest(SampleTestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum StateKindArg {
    W,
    Ghz,
}

#[derive(Args, Serialize)]
struct StateArgs {
    #[arg(long, value_enum)]
    kind: StateKindArg,
    /// |101⟩ amplitude of a W state.
    #[arg(long)]
    a: Option<f64>,
    /// |011⟩ amplitude of a W state (carries the i phase).
    #[arg(long)]
    b: Option<f64>,
    /// |002⟩ amplitude of a W state.
    #[arg(long)]
    c: Option<f64>,
    /// |101⟩ amplitude of a GHZ state (carries the i phase).
    #[arg(long)]
    d: Option<f64>,
    /// |010⟩ amplitude of a GHZ state.
    #[arg(long)]
    e: Option<f64>,
    /// Path dephasing strength applied to the density matrix.
    #[arg(long, default_value_t = 0.0)]
    dephase: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum BuiltinState {
    Ghz,
    WSym,
    WAsym,
}

impl BuiltinState {
    fn pure(self) -> PureState {
        match self {
            BuiltinState::Ghz => make_ghz(&GHZParams::balanced()),
            BuiltinState::WSym => make_w(&WParams::symmetric()),
            BuiltinState::WAsym => make_w(&WParams::asymmetric()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WitnessArg {
    Ghz,
    W,
    Ksep,
}

#[derive(Args, Serialize)]
struct WitnessArgs {
    /// Builtin ideal state.
    #[arg(long, value_enum, conflicts_with = "state_file")]
    builtin: Option<BuiltinState>,
    /// State JSON written by the `state` command.
    #[arg(long)]
    state_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    witness: WitnessArg,
    /// Report the scaled W witness (default convention).
    #[arg(long, default_value_t = true)]
    scaled: bool,
    /// Separability order for the ksep witness.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// First Φ factor as a basis label (e.g. 011); best dictionary pair when omitted.
    #[arg(long)]
    phi1: Option<String>,
    /// Second Φ factor as a basis label (e.g. 002).
    #[arg(long)]
    phi2: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    dephase: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// Beamline config JSON file.
    #[arg(long, conflicts_with = "prep")]
    config: Option<PathBuf>,
    /// Builtin preparation beamline instead of a config file.
    #[arg(long, value_enum)]
    prep: Option<BuiltinState>,
    /// Write the effective beamline config JSON here.
    #[arg(long)]
    emit_config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ChainArg {
    Plain,
    SpinFlipPi,
    CoherenceAb,
    CoherenceAc,
    CoherenceBc,
    CoherenceGhz,
}

impl From<ChainArg> for ChainKind {
    fn from(value: ChainArg) -> ChainKind {
        match value {
            ChainArg::Plain => ChainKind::Plain,
            ChainArg::SpinFlipPi => ChainKind::SpinFlipPi,
            ChainArg::CoherenceAb => ChainKind::CoherenceAb,
            ChainArg::CoherenceAc => ChainKind::CoherenceAc,
            ChainArg::CoherenceBc => ChainKind::CoherenceBc,
            ChainArg::CoherenceGhz => ChainKind::CoherenceGhz,
        }
    }
}

#[derive(Args, Serialize)]
struct ScanArgs {
    /// Preparation beamline config JSON (the chain is appended per point).
    #[arg(long, conflicts_with = "prep")]
    config: Option<PathBuf>,
    /// Builtin preparation beamline instead of a config file.
    #[arg(long, value_enum)]
    prep: Option<BuiltinState>,
    #[arg(long, value_enum)]
    chain: ChainArg,
    #[arg(long, default_value_t = 16)]
    points: usize,
    #[arg(long, default_value_t = 1e6)]
    counts: f64,
    #[arg(long, default_value_t = false)]
    poisson: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (phase_rad,counts,fit_value); stdout JSON always
    /// carries the fit summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CampaignArgs {
    #[arg(long, value_enum)]
    state: BuiltinState,
    #[arg(long, default_value_t = 0.0)]
    dephase: f64,
    #[arg(long, default_value_t = 1.0)]
    visibility: f64,
    #[arg(long, default_value_t = 0.0)]
    flipper_error: f64,
    #[arg(long, default_value_t = 1e6)]
    counts: f64,
    #[arg(long, default_value_t = false)]
    poisson: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum TableArg {
    #[value(name = "I")]
    #[serde(rename = "I")]
    One,
    #[value(name = "II")]
    #[serde(rename = "II")]
    Two,
}

#[derive(Args, Serialize)]
struct ReproduceArgs {
    #[arg(long, value_enum)]
    table: TableArg,
    /// Only the ideal and published columns (no campaigns).
    #[arg(long, default_value_t = false)]
    ideal: bool,
    #[arg(long, default_value_t = 1e6)]
    counts: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SuiteArg {
    Ghz,
    W,
    Ksep2,
    Ksep3,
    All,
}

#[derive(Args, Serialize)]
struct SampleTestArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunManifest {
    schema_version: u32,
    tool_version: String,
    command: String,
    params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    outputs: Vec<String>,
}

fn manifest<A: Serialize>(command: &str, args: &A, seed: Option<u64>, out: &Option<PathBuf>) -> RunManifest {
    RunManifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        params: serde_json::to_value(args).expect("args serialize"),
        seed,
        outputs: out.iter().map(|p| p.display().to_string()).collect(),
    }
}

/// Fixed 12-significant-digit float formatting for CSV cells.
fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn complex_rows(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn density_rows(rho: &DensityMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..DIM)
        .map(|i| {
            (0..DIM)
                .map(|j| {
                    let z = rho.matrix()[(i, j)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

fn emit(document: &serde_json::Value, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(document)?;
    println!("{text}");
    if let Some(path) = out {
        fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn parse_label(s: &str) -> Result<BasisLabel> {
    s.parse::<BasisLabel>()
        .map_err(|e| anyhow::anyhow!("invalid basis label {s:?}: {e}"))
}

/// Command-line amplitudes are typically rounded; renormalize when close to
/// unit norm, reject otherwise.
fn renormalize(amps: &mut [&mut f64]) -> Result<()> {
    let norm_sq: f64 = amps.iter().map(|a| **a * **a).sum();
    if (norm_sq - 1.0).abs() > 1e-3 {
        bail!("amplitudes are not normalized: squared norm {norm_sq}");
    }
    let norm = norm_sq.sqrt();
    for a in amps {
        **a /= norm;
    }
    Ok(())
}

fn cmd_state(args: StateArgs) -> Result<()> {
    let pure = match args.kind {
        StateKindArg::W => {
            let (mut a, mut b, mut c) = match (args.a, args.b, args.c) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => bail!("--kind w requires --a, --b, --c"),
            };
            renormalize(&mut [&mut a, &mut b, &mut c])?;
            make_w(&WParams::new(a, b, c)?)
        }
        StateKindArg::Ghz => {
            let (mut d, mut e) = match (args.d, args.e) {
                (Some(d), Some(e)) => (d, e),
                _ => bail!("--kind ghz requires --d and --e"),
            };
            renormalize(&mut [&mut d, &mut e])?;
            make_ghz(&GHZParams::new(d, e)?)
        }
    };
    let rho = path_dephase(&pure.to_density(), DephasingStrength::new(args.dephase)?);
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest("state", &args, None, &args.out),
        "amplitudes": if args.dephase == 0.0 { Some(complex_rows(pure.amplitudes())) } else { None },
        "density_matrix": density_rows(&rho),
    });
    emit(&document, &args.out)
}

fn load_state(args: &WitnessArgs) -> Result<DensityMatrix> {
    let rho = if let Some(builtin) = args.builtin {
        builtin.pure().to_density()
    } else if let Some(path) = &args.state_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if let Some(amps) = value.get("amplitudes").and_then(|a| a.as_array()) {
            if amps.len() != DIM {
                bail!("state file has {} amplitudes, expected {DIM}", amps.len());
            }
            let mut v = CVector::zeros(DIM);
            for (i, entry) in amps.iter().enumerate() {
                let pair = entry
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .context("amplitude entries must be [re, im]")?;
                v[i] = Complex64::new(
                    pair[0].as_f64().context("amplitude must be numeric")?,
                    pair[1].as_f64().context("amplitude must be numeric")?,
                );
            }
            PureState::new(v)?.to_density()
        } else {
            bail!("state file has no \"amplitudes\" array");
        }
    } else {
        bail!("provide --builtin or --state-file");
    };
    Ok(path_dephase(&rho, DephasingStrength::new(args.dephase)?))
}

fn cmd_witness(args: WitnessArgs) -> Result<()> {
    let rho = load_state(&args)?;
    let report = match args.witness {
        WitnessArg::Ghz => WitnessReport {
            name: WitnessName::Ghz,
            value: witness_ghz(&rho),
            uncertainty: None,
            k: None,
            phi_pair: None,
            element_source: ElementSource::Exact,
            defaulted_populations: Vec::new(),
        },
        WitnessArg::W => WitnessReport {
            name: if args.scaled {
                WitnessName::WScaled
            } else {
                WitnessName::WRaw
            },
            value: witness_w(&rho, args.scaled),
            uncertainty: None,
            k: None,
            phi_pair: None,
            element_source: ElementSource::Exact,
            defaulted_populations: Vec::new(),
        },
        WitnessArg::Ksep => {
            let (value, pair) = match (&args.phi1, &args.phi2) {
                (Some(p1), Some(p2)) => {
                    let (l1, l2) = (parse_label(p1)?, parse_label(p2)?);
                    let value = witness_ksep(
                        &rho,
                        args.k,
                        &ProductState::from_label(l1),
                        &ProductState::from_label(l2),
                    )?;
                    (value, (l1, l2))
                }
                (None, None) => witness_ksep_best(&rho, args.k)?,
                _ => bail!("provide both --phi1 and --phi2, or neither"),
            };
            WitnessReport {
                name: WitnessName::Ksep,
                value,
                uncertainty: None,
                k: Some(args.k),
                phi_pair: Some((pair.0.to_string(), pair.1.to_string())),
                element_source: ElementSource::Exact,
                defaulted_populations: Vec::new(),
            }
        }
    };
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest("witness", &args, None, &args.out),
        "report": report,
    });
    emit(&document, &args.out)
}

fn load_config(config: &Option<PathBuf>, prep: Option<BuiltinState>) -> Result<BeamlineConfig> {
    match (config, prep) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Ok(BeamlineConfig::from_json(&text)?)
        }
        (None, Some(builtin)) => Ok(builtin_to_kind(builtin).prep(0.0)),
        _ => bail!("provide exactly one of --config or --prep"),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config = load_config(&args.config, args.prep)?;
    if let Some(path) = &args.emit_config {
        fs::write(path, format!("{}\n", config.to_json()))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let output = run_beamline(&config)?;
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest("simulate", &args, None, &args.out),
        "survival": output.survival,
        "density_matrix": output.rho.as_ref().map(density_rows),
    });
    emit(&document, &args.out)
}

fn scan_csv(scan: &ScanResult) -> String {
    let mut csv = String::from("phase_rad,counts,fit_value\n");
    for (phase, counts) in scan.phases.iter().zip(&scan.counts) {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_sig(*phase),
            fmt_sig(*counts),
            fmt_sig(scan.fit.value(*phase))
        ));
    }
    csv
}

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let config = load_config(&args.config, args.prep)?;
    let scan = simulate_scan_seeded(
        &config,
        args.chain.into(),
        args.points,
        args.counts,
        args.poisson,
        args.seed,
    )?;
    if let Some(path) = &args.out {
        fs::write(path, scan_csv(&scan)).with_context(|| format!("writing {}", path.display()))?;
    }
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest("scan", &args, Some(args.seed), &args.out),
        "scan": scan,
        "csv": scan_csv(&scan),
    });
    let text = serde_json::to_string_pretty(&document)?;
    println!("{text}");
    Ok(())
}

fn builtin_to_kind(state: BuiltinState) -> StateKind {
    match state {
        BuiltinState::Ghz => StateKind::Ghz,
        BuiltinState::WSym => StateKind::WSym,
        BuiltinState::WAsym => StateKind::WAsym,
    }
}

fn cmd_campaign(args: CampaignArgs) -> Result<()> {
    let settings = CampaignSettings {
        dephasing: args.dephase,
        visibility: args.visibility,
        flipper_error: args.flipper_error,
        counts_per_point: args.counts,
        poisson: args.poisson,
        seed: args.seed,
    };
    let outcome = run_campaign(builtin_to_kind(args.state), &settings)?;
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest("campaign", &args, Some(args.seed), &args.out),
        "outcome": outcome,
    });
    emit(&document, &args.out)
}

#[derive(Serialize, Clone)]
struct TableRow {
    state: String,
    witness: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ideal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    with_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dephased: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    published: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    published_dephased: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn noisy_campaign_value(
    kind: StateKind,
    name: WitnessName,
    flipper_error: f64,
    counts: f64,
    seed: u64,
) -> Result<f64> {
    let settings = CampaignSettings {
        visibility: 0.455,
        flipper_error,
        counts_per_point: counts,
        poisson: true,
        seed,
        ..CampaignSettings::default()
    };
    let outcome = run_campaign(kind, &settings)?;
    Ok(outcome
        .reports
        .iter()
        .find(|r| r.name == name)
        .context("witness report missing")?
        .value)
}

fn dephased_campaign_value(
    kind: StateKind,
    target_fidelity: f64,
    counts: f64,
    seed: u64,
) -> Result<f64> {
    let p = calibrate(CalibrationParameter::Dephasing, target_fidelity, kind)?;
    let settings = CampaignSettings {
        dephasing: p,
        visibility: 0.455,
        counts_per_point: counts,
        poisson: true,
        seed,
        ..CampaignSettings::default()
    };
    let outcome = run_campaign(kind, &settings)?;
    Ok(outcome
        .reports
        .iter()
        .find(|r| {
            matches!(
                r.name,
                WitnessName::WScaled | WitnessName::WRaw | WitnessName::Ghz
            )
        })
        .context("witness report missing")?
        .value)
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<()> {
    let ghz_rho = make_ghz(&GHZParams::balanced()).to_density();
    let wsym_rho = make_w(&WParams::symmetric()).to_density();
    let wasym_rho = make_w(&WParams::asymmetric()).to_density();

    let mut rows: Vec<TableRow> = Vec::new();
    match args.table {
        TableArg::One => {
            let push = |state: &str,
                            ideal: f64,
                            published: &str,
                            published_dephased: Option<&str>|
             -> TableRow {
                TableRow {
                    state: state.to_string(),
                    witness: if state == "GHZ" { "I_GHZ" } else { "I_W (scaled)" }.to_string(),
                    ideal: Some(ideal),
                    with_noise: None,
                    dephased: None,
                    published: Some(published.to_string()),
                    published_dephased: published_dephased.map(str::to_string),
                    note: None,
                }
            };
            rows.push(push("GHZ", witness_ghz(&ghz_rho), "0.49±0.01", None));
            rows.push(push(
                "W_sym",
                witness_w(&wsym_rho, true),
                "0.47±0.03",
                Some("-0.04±0.03"),
            ));
            rows.push(push(
                "W_asym",
                witness_w(&wasym_rho, true),
                "0.46±0.02",
                Some("-0.01±0.02"),
            ));
            if !args.ideal {
                let delta =
                    calibrate(CalibrationParameter::FlipperError, 0.985, StateKind::Ghz)?;
                rows[0].with_noise = Some(noisy_campaign_value(
                    StateKind::Ghz,
                    WitnessName::Ghz,
                    delta,
                    args.counts,
                    args.seed,
                )?);
                rows[1].with_noise = Some(noisy_campaign_value(
                    StateKind::WSym,
                    WitnessName::WScaled,
                    0.0,
                    args.counts,
                    args.seed,
                )?);
                rows[2].with_noise = Some(noisy_campaign_value(
                    StateKind::WAsym,
                    WitnessName::WScaled,
                    0.0,
                    args.counts,
                    args.seed,
                )?);
                rows[1].dephased = Some(dephased_campaign_value(
                    StateKind::WSym,
                    0.646,
                    args.counts,
                    args.seed,
                )?);
                rows[2].dephased = Some(dephased_campaign_value(
                    StateKind::WAsym,
                    0.611,
                    args.counts,
                    args.seed,
                )?);
            }
        }
        TableArg::Two => {
            let (x, y) = triq_core::witnesses::ghz_labels();
            let ideal = witness_ksep(
                &ghz_rho,
                3,
                &ProductState::from_label(x),
                &ProductState::from_label(y),
            )?;
            let mut ghz_row = TableRow {
                state: "GHZ".to_string(),
                witness: "I_3-sep (010,101)".to_string(),
                ideal: Some(ideal),
                with_noise: None,
                dephased: None,
                published: Some("0.49±0.01".to_string()),
                published_dephased: None,
                note: None,
            };
            if !args.ideal {
                let delta =
                    calibrate(CalibrationParameter::FlipperError, 0.985, StateKind::Ghz)?;
                ghz_row.with_noise = Some(noisy_campaign_value(
                    StateKind::Ghz,
                    WitnessName::Ksep,
                    delta,
                    args.counts,
                    args.seed,
                )?);
            }
            rows.push(ghz_row);
            for (state, published, published_dephased) in [
                ("W_sym", "0.65±0.15", "0.31±0.12"),
                ("W_asym", "0.45±0.17", "0.11±0.13"),
            ] {
                rows.push(TableRow {
                    state: state.to_string(),
                    witness: "I_k-sep".to_string(),
                    ideal: None,
                    with_noise: None,
                    dephased: None,
                    published: Some(published.to_string()),
                    published_dephased: Some(published_dephased.to_string()),
                    note: Some("phi-unspecified in paper".to_string()),
                });
            }
        }
    }

    for row in &rows {
        let fmt = |v: Option<f64>| v.map_or("     -".to_string(), |v| format!("{v:+.4}"));
        eprintln!(
            "{:<7} {:<18} ideal {}  noisy {}  dephased {}  published {}{}",
            row.state,
            row.witness,
            fmt(row.ideal),
            fmt(row.with_noise),
            fmt(row.dephased),
            row.published.as_deref().unwrap_or("-"),
            row.note
                .as_deref()
                .map(|n| format!("  [{n}]"))
                .unwrap_or_default(),
        );
    }
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest("reproduce", &args, Some(args.seed), &args.out),
        "rows": rows,
    });
    emit(&document, &args.out)
}

fn cmd_sample_test(args: SampleTestArgs) -> Result<()> {
    let mut outcomes: Vec<(String, SuiteOutcome)> = Vec::new();
    let run_ghz = matches!(args.suite, SuiteArg::Ghz | SuiteArg::All);
    let run_w = matches!(args.suite, SuiteArg::W | SuiteArg::All);
    let run_k2 = matches!(args.suite, SuiteArg::Ksep2 | SuiteArg::All);
    let run_k3 = matches!(args.suite, SuiteArg::Ksep3 | SuiteArg::All);
    if run_ghz {
        outcomes.push(("ghz".to_string(), ghz_suite(args.samples, args.seed)));
    }
    if run_w {
        outcomes.push(("w".to_string(), w_suite(args.samples, args.seed)));
    }
    if run_k2 {
        outcomes.push(("ksep2".to_string(), ksep_suite(2, args.samples, args.seed)?));
    }
    if run_k3 {
        outcomes.push(("ksep3".to_string(), ksep_suite(3, args.samples, args.seed)?));
    }
    let all_passed = outcomes.iter().all(|(_, o)| o.passed());
    for (name, outcome) in &outcomes {
        eprintln!(
            "suite {name}: {} ({} samples, max value {:.3e}, {} violations)",
            if outcome.passed() { "PASS" } else { "FAIL" },
            outcome.samples,
            outcome.max_value,
            outcome.violations
        );
    }
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest("sample-test", &args, Some(args.seed), &args.out),
        "outcomes": outcomes.iter().map(|(n, o)| json!({"suite": n, "outcome": o})).collect::<Vec<_>>(),
        "passed": all_passed,
    });
    emit(&document, &args.out)?;
    if !all_passed {
        bail!("nonpositivity violated");
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads == 0 {
        bail!("--threads must be at least 1");
    }
    match cli.command {
        Command::State(args) => cmd_state(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Campaign(args) => cmd_campaign(args),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::SampleTest(args) => cmd_sample_test(args),
    }
}
