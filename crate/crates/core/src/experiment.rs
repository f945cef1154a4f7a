//! Simulated measurement campaign: intensity runs for populations, phase
//! scans with optional Poisson counting noise, sinusoid fitting, contrast
//! extraction, matrix-element reconstruction, and witness assembly.
//!
//! Coherence magnitudes come from fitted scan contrasts divided by the
//! reference contrast of the same scan with the in-interferometer flippers
//! off; populations come from blocked-path intensity ratios against the
//! flippers-off blocked references. Error bars represent counting statistics
//! fed through the fit covariance, propagated in quadrature.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::beamline::{
    analysis_chain, run_beamline, BeamlineConfig, ChainKind, Component, ComponentKind, Location,
    PathId,
};
use crate::error::{Error, Result};
use crate::states::{
    fidelity, make_ghz, make_w, path_dephase, DephasingStrength, GHZParams, WParams,
};
use crate::tensor::{BasisLabel, DensityMatrix, PureState};
use crate::witnesses::{
    ghz_labels, w_component_labels, witness_from_elements, ElementMap, ElementSource, WitnessKind,
    WitnessReport,
};

pub const SCAN_POINTS: usize = 16;
pub const POPULATION_REPEATS: usize = 10;
pub const CONTRAST_REPEATS: usize = 4;

/// Fitted model `A + B·sin(phase + δ)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub mean: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl SinusoidFit {
    pub fn value(&self, phase: f64) -> f64 {
        self.mean + self.amplitude * (phase + self.offset).sin()
    }
}

/// One phase scan: the sampled grid, the (possibly Poisson-drawn) counts, the
/// least-squares fit, and the contrast B/A with its standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub phases: Vec<f64>,
    pub counts: Vec<f64>,
    pub fit: SinusoidFit,
    pub contrast: f64,
    pub contrast_err: f64,
}

pub fn scan_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| 2.0 * PI * k as f64 / points as f64)
        .collect()
}

/// Linear least squares on the basis {1, sin, cos}, converted to
/// amplitude/offset form.
pub fn fit_sinusoid(phases: &[f64], counts: &[f64]) -> Result<SinusoidFit> {
    let (fit, _) = fit_sinusoid_with_cov(phases, counts)?;
    Ok(fit)
}

fn fit_sinusoid_with_cov(phases: &[f64], counts: &[f64]) -> Result<(SinusoidFit, DMatrix<f64>)> {
    let n = phases.len();
    if n != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: counts.len(),
        });
    }
    if n < 3 {
        return Err(Error::DegenerateFit(format!(
            "{n} points, need at least 3"
        )));
    }
    if counts.iter().any(|c| !c.is_finite()) {
        return Err(Error::DegenerateFit("non-finite counts".into()));
    }

    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => phases[i].sin(),
        _ => phases[i].cos(),
    });
    let y = DMatrix::from_column_slice(n, 1, counts);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let gram = xtx
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFit("singular design matrix".into()))?;
    let beta = &gram * xty;
    let (a, bs, bc) = (beta[(0, 0)], beta[(1, 0)], beta[(2, 0)]);

    // counting-statistics covariance: var per point = counts (≥ 1), through
    // the unweighted-LSQ sandwich
    let mut middle = DMatrix::zeros(3, 3);
    for i in 0..n {
        let var = counts[i].max(1.0);
        let row = x.row(i);
        middle += row.transpose() * row * var;
    }
    let cov = &gram * middle * &gram;

    let amplitude = bs.hypot(bc);
    let fit = SinusoidFit {
        mean: a,
        amplitude,
        offset: bc.atan2(bs),
    };
    Ok((fit, cov))
}

fn contrast_from_fit(fit: &SinusoidFit, cov: &DMatrix<f64>) -> Result<(f64, f64)> {
    let a = fit.mean;
    if a <= 0.0 {
        return Err(Error::DegenerateFit(format!("nonpositive mean {a}")));
    }
    let b = fit.amplitude;
    let b_safe = b.max(1e-12);
    // gradient of c = B/A in (A, βs, βc); βs = B cos δ, βc = B sin δ
    let bs = b * fit.offset.cos();
    let bc = b * fit.offset.sin();
    let j = [
        -b / (a * a),
        bs / (b_safe * a),
        bc / (b_safe * a),
    ];
    let mut var = 0.0;
    for (i, ji) in j.iter().enumerate() {
        for (k, jk) in j.iter().enumerate() {
            var += ji * jk * cov[(i, k)];
        }
    }
    // at B ≈ 0 the gradient of B is direction-degenerate; fall back to the
    // raw coefficient variances
    if b < 1e-12 {
        var = (cov[(1, 1)] + cov[(2, 2)]) / (a * a);
    }
    Ok((b / a, var.max(0.0).sqrt()))
}

fn poisson_draw(lambda: f64, rng: &mut ChaCha8Rng) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng)
}

/// Simulates a phase scan of the given analysis chain appended to `prep`.
/// Counts per point accumulate over `repeats` passes of `counts_per_point`
/// expected events each.
pub fn simulate_scan(
    prep: &BeamlineConfig,
    chain: ChainKind,
    points: usize,
    counts_per_point: f64,
    poisson: bool,
    repeats: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ScanResult> {
    if points < 8 {
        return Err(Error::InvalidParameter(format!(
            "scan needs at least 8 points, got {points}"
        )));
    }
    if counts_per_point <= 0.0 {
        return Err(Error::InvalidParameter(
            "counts_per_point must be positive".into(),
        ));
    }
    let phases = scan_grid(points);
    let mut counts = Vec::with_capacity(points);
    for &phase in &phases {
        let config = prep.clone().extend(analysis_chain(chain, phase));
        let survival = run_beamline(&config)?.survival;
        let lambda = survival * counts_per_point;
        let mut total = 0.0;
        for _ in 0..repeats {
            total += if poisson {
                poisson_draw(lambda, rng)
            } else {
                lambda
            };
        }
        counts.push(total);
    }
    let (fit, cov) = fit_sinusoid_with_cov(&phases, &counts)?;
    let (contrast, contrast_err) = contrast_from_fit(&fit, &cov)?;
    Ok(ScanResult {
        phases,
        counts,
        fit,
        contrast,
        contrast_err,
    })
}

/// Convenience wrapper owning its RNG, for one-off scans.
pub fn simulate_scan_seeded(
    prep: &BeamlineConfig,
    chain: ChainKind,
    points: usize,
    counts_per_point: f64,
    poisson: bool,
    seed: u64,
) -> Result<ScanResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_scan(prep, chain, points, counts_per_point, poisson, 1, &mut rng)
}

fn simulate_intensity(
    config: &BeamlineConfig,
    counts_per_point: f64,
    poisson: bool,
    repeats: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let survival = run_beamline(config)?.survival;
    let lambda = survival * counts_per_point;
    let mut total = 0.0;
    for _ in 0..repeats {
        total += if poisson {
            poisson_draw(lambda, rng)
        } else {
            lambda
        };
    }
    Ok((total, total.max(1.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Ghz,
    WSym,
    WAsym,
}

impl StateKind {
    pub fn prep(self, flipper_error: f64) -> BeamlineConfig {
        match self {
            StateKind::Ghz => BeamlineConfig::prep_ghz(flipper_error),
            StateKind::WSym => BeamlineConfig::prep_w(true, flipper_error),
            StateKind::WAsym => BeamlineConfig::prep_w(false, flipper_error),
        }
    }

    pub fn target(self) -> PureState {
        match self {
            StateKind::Ghz => make_ghz(&GHZParams::balanced()),
            StateKind::WSym => make_w(&WParams::symmetric()),
            StateKind::WAsym => make_w(&WParams::asymmetric()),
        }
    }

    /// W-state target amplitude magnitudes keyed by component label.
    fn target_components(self) -> Vec<(BasisLabel, f64)> {
        match self {
            StateKind::Ghz => {
                let (x, y) = ghz_labels();
                vec![(x, std::f64::consts::FRAC_1_SQRT_2), (y, std::f64::consts::FRAC_1_SQRT_2)]
            }
            StateKind::WSym => {
                let p = WParams::symmetric();
                let w = w_component_labels();
                vec![(w[0], p.a()), (w[1], p.b()), (w[2], p.c())]
            }
            StateKind::WAsym => {
                let p = WParams::asymmetric();
                let w = w_component_labels();
                vec![(w[0], p.a()), (w[1], p.b()), (w[2], p.c())]
            }
        }
    }

    pub fn has_absorber(self) -> bool {
        matches!(self, StateKind::WSym)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSettings {
    pub dephasing: f64,
    pub visibility: f64,
    pub flipper_error: f64,
    pub counts_per_point: f64,
    pub poisson: bool,
    pub seed: u64,
}

impl Default for CampaignSettings {
    fn default() -> Self {
        CampaignSettings {
            dephasing: 0.0,
            visibility: 1.0,
            flipper_error: 0.0,
            counts_per_point: 1e6,
            poisson: false,
            seed: 0,
        }
    }
}

impl CampaignSettings {
    fn validate(&self) -> Result<()> {
        DephasingStrength::new(self.dephasing)?;
        if !(0.0 < self.visibility && self.visibility <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "visibility {} not in (0, 1]",
                self.visibility
            )));
        }
        if !(0.0..PI).contains(&self.flipper_error) {
            return Err(Error::InvalidParameter(format!(
                "flipper_error {} not in [0, π)",
                self.flipper_error
            )));
        }
        if self.counts_per_point <= 0.0 {
            return Err(Error::InvalidParameter(
                "counts_per_point must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn dephaser(strength: f64) -> Component {
    Component {
        kind: ComponentKind::Dephaser {
            dephasing: strength,
        },
        location: Location::Both,
    }
}

fn blocker(blocked: PathId) -> Component {
    Component {
        kind: ComponentKind::Blocker { blocked },
        location: Location::Both,
    }
}

/// All raw runs of a campaign, before element extraction. Coherence scans are
/// keyed by their mode name ("ab", "ac", "bc", "ghz"); intensity runs by the
/// population label; references by the kept path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignScans {
    pub state: StateKind,
    pub coherence: BTreeMap<String, ScanResult>,
    pub coherence_refs: BTreeMap<String, ScanResult>,
    pub population_runs: BTreeMap<String, (f64, f64)>,
    pub population_refs: BTreeMap<String, (f64, f64)>,
}

/// Extracted matrix elements with counting-statistics errors, plus the
/// reference contrasts used for normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignResult {
    pub populations: BTreeMap<String, (f64, f64)>,
    pub cross_magnitudes: BTreeMap<String, (f64, f64)>,
    pub reference_contrasts: BTreeMap<String, f64>,
}

fn pair_name(a: BasisLabel, b: BasisLabel) -> String {
    if a <= b {
        format!("{a}:{b}")
    } else {
        format!("{b}:{a}")
    }
}

fn ratio_with_err(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let r = x.0 / y.0;
    let err = ((x.1 / y.0).powi(2) + (x.0 * y.1 / (y.0 * y.0)).powi(2)).sqrt();
    (r, err)
}

fn get_scan<'a>(map: &'a BTreeMap<String, ScanResult>, key: &str, refs: bool) -> Result<&'a ScanResult> {
    map.get(key).ok_or_else(|| {
        Error::MissingRun(if refs {
            format!("reference scan {key}")
        } else {
            format!("coherence scan {key}")
        })
    })
}

fn normalized_contrast(
    scans: &CampaignScans,
    key: &str,
    result: &mut CampaignResult,
) -> Result<(f64, f64)> {
    let meas = get_scan(&scans.coherence, key, false)?;
    let reference = get_scan(&scans.coherence_refs, key, true)?;
    if reference.contrast <= 1e-12 {
        return Err(Error::ZeroReferenceContrast(key.to_string()));
    }
    result
        .reference_contrasts
        .insert(key.to_string(), reference.contrast);
    Ok(ratio_with_err(
        (meas.contrast, meas.contrast_err),
        (reference.contrast, reference.contrast_err),
    ))
}

/// Applies the extraction relations to raw campaign scans: populations from
/// blocked-path intensity ratios, coherence magnitudes from contrasts divided
/// by reference contrasts. Uncertainties propagate in quadrature.
pub fn extract_elements(scans: &CampaignScans) -> Result<CampaignResult> {
    let mut result = CampaignResult {
        populations: BTreeMap::new(),
        cross_magnitudes: BTreeMap::new(),
        reference_contrasts: BTreeMap::new(),
    };

    let ref_i = scans
        .population_refs
        .get("path_I")
        .ok_or_else(|| Error::MissingRun("population reference path_I".into()))?;
    let ref_ii = scans
        .population_refs
        .get("path_II")
        .ok_or_else(|| Error::MissingRun("population reference path_II".into()))?;
    let denom = (ref_i.0 + ref_ii.0, (ref_i.1.powi(2) + ref_ii.1.powi(2)).sqrt());
    if denom.0 <= 0.0 {
        return Err(Error::MissingRun("population references have zero counts".into()));
    }
    for (label, run) in &scans.population_runs {
        result
            .populations
            .insert(label.clone(), ratio_with_err(*run, denom));
    }

    let (ghz_x, ghz_y) = ghz_labels();
    let w = w_component_labels();
    match scans.state {
        StateKind::Ghz => {
            let (r, e) = normalized_contrast(scans, "ghz", &mut result)?;
            result
                .cross_magnitudes
                .insert(pair_name(ghz_x, ghz_y), (r / 2.0, e / 2.0));
        }
        StateKind::WSym | StateKind::WAsym => {
            let (r_ab, e_ab) = normalized_contrast(scans, "ab", &mut result)?;
            let ab = (r_ab / 2.0, e_ab / 2.0);
            result.cross_magnitudes.insert(pair_name(w[0], w[1]), ab);

            let (r_ac, e_ac) = normalized_contrast(scans, "ac", &mut result)?;
            let ac = (r_ac - ab.0, (e_ac.powi(2) + ab.1.powi(2)).sqrt());
            result.cross_magnitudes.insert(pair_name(w[0], w[2]), ac);

            let bc = get_scan(&scans.coherence, "bc", false)?;
            result.cross_magnitudes.insert(
                pair_name(w[1], w[2]),
                (bc.contrast / 2.0, bc.contrast_err / 2.0),
            );
        }
    }
    Ok(result)
}

impl CampaignResult {
    pub fn element_map(&self) -> ElementMap {
        let mut map = ElementMap::new();
        for (label, (value, _)) in &self.populations {
            map.insert_population(label.parse().unwrap(), *value);
        }
        for (pair, (value, _)) in &self.cross_magnitudes {
            let (a, b) = pair.split_once(':').unwrap();
            map.insert_cross(a.parse().unwrap(), b.parse().unwrap(), *value);
        }
        map
    }

    fn population_err(&self, label: BasisLabel) -> f64 {
        self.populations
            .get(&label.to_string())
            .map_or(0.0, |&(_, e)| e)
    }

    fn cross_err(&self, a: BasisLabel, b: BasisLabel) -> f64 {
        self.cross_magnitudes
            .get(&pair_name(a, b))
            .map_or(0.0, |&(_, e)| e)
    }

    /// First-order quadrature through the witness arithmetic. √-terms with a
    /// vanishing (defaulted) partner population contribute zero gradient.
    fn witness_uncertainty(&self, kind: WitnessKind) -> f64 {
        match kind {
            WitnessKind::Ghz => {
                let (x, y) = ghz_labels();
                self.cross_err(x, y)
            }
            WitnessKind::W { scaled } => {
                let w = w_component_labels();
                let mut var = 0.0;
                for i in 0..3 {
                    var += self.population_err(w[i]).powi(2);
                    for j in (i + 1)..3 {
                        // each pair enters the grid twice; raw gradient 2
                        var += (2.0 * self.cross_err(w[i], w[j])).powi(2);
                    }
                }
                let raw = var.sqrt();
                if scaled {
                    raw / 2.0
                } else {
                    raw
                }
            }
            WitnessKind::Ksep { phi1, phi2, .. } => self.cross_err(phi1, phi2),
        }
    }

    /// `⟨t|ρ|t⟩` from measured elements for a target with real amplitude
    /// magnitudes on the given components; phases are carried by the
    /// magnitudes of the cross terms.
    pub fn fidelity_from_elements(&self, components: &[(BasisLabel, f64)]) -> (f64, f64) {
        let mut value = 0.0;
        let mut var = 0.0;
        for (i, (li, ti)) in components.iter().enumerate() {
            let pop = self
                .populations
                .get(&li.to_string())
                .map_or((0.0, 0.0), |&p| p);
            value += ti * ti * pop.0;
            var += (ti * ti * pop.1).powi(2);
            for (lj, tj) in components.iter().skip(i + 1) {
                let cross = self
                    .cross_magnitudes
                    .get(&pair_name(*li, *lj))
                    .map_or((0.0, 0.0), |&c| c);
                value += 2.0 * ti * tj * cross.0;
                var += (2.0 * ti * tj * cross.1).powi(2);
            }
        }
        (value, var.sqrt())
    }
}

/// Full campaign output: raw scans, extracted elements, assembled witness
/// reports, and fidelity against the ideal target.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignOutcome {
    pub state: StateKind,
    pub settings: CampaignSettings,
    pub scans: CampaignScans,
    pub result: CampaignResult,
    pub reports: Vec<WitnessReport>,
    pub fidelity: f64,
    pub fidelity_err: f64,
    /// Fidelity of the dephased simulated state, computed directly.
    pub fidelity_exact: f64,
    /// Post-selection survival of the preparation beamline.
    pub survival: f64,
}

/// The ideal prepared state degraded by the campaign's noise dephasing (the
/// instrument visibility is a property of the measurement, not the state).
pub fn campaign_state(kind: StateKind, settings: &CampaignSettings) -> Result<DensityMatrix> {
    let out = run_beamline(&kind.prep(settings.flipper_error))?;
    let rho = out.rho.ok_or(Error::DegenerateOutput)?;
    Ok(path_dephase(&rho, DephasingStrength::new(settings.dephasing)?))
}

fn witness_plan(kind: StateKind) -> Vec<WitnessKind> {
    let (ghz_x, ghz_y) = ghz_labels();
    let w = w_component_labels();
    match kind {
        StateKind::Ghz => vec![
            WitnessKind::Ghz,
            WitnessKind::Ksep {
                k: 3,
                phi1: ghz_x,
                phi2: ghz_y,
            },
        ],
        StateKind::WSym | StateKind::WAsym => vec![
            WitnessKind::W { scaled: true },
            WitnessKind::Ksep {
                k: 3,
                phi1: w[1],
                phi2: w[2],
            },
        ],
    }
}

/// Runs every scan of the §III.B-style campaign for one state and assembles
/// witness reports from the extracted elements.
pub fn run_campaign(kind: StateKind, settings: &CampaignSettings) -> Result<CampaignOutcome> {
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);

    // counting-time compensation for the absorber campaign
    let n = if kind.has_absorber() {
        settings.counts_per_point * 4.0 / 3.0
    } else {
        settings.counts_per_point
    };
    let instrument = 1.0 - settings.visibility;

    let prep = kind.prep(settings.flipper_error);
    let meas_prep = prep
        .clone()
        .push(dephaser(instrument))
        .push(dephaser(settings.dephasing));
    // coherence references: flippers off, absorber out, noise dephasing off,
    // instrument visibility kept
    let coh_ref_prep = prep
        .flippers_off()
        .without_absorbers()
        .push(dephaser(instrument));
    // population references: flippers off, absorber kept
    let pop_ref_prep = kind.prep(settings.flipper_error).flippers_off();

    let mut coherence = BTreeMap::new();
    let mut coherence_refs = BTreeMap::new();
    let coherence_modes: Vec<(&str, ChainKind, bool)> = match kind {
        StateKind::Ghz => vec![("ghz", ChainKind::CoherenceGhz, true)],
        StateKind::WSym | StateKind::WAsym => vec![
            ("ab", ChainKind::CoherenceAb, true),
            ("ac", ChainKind::CoherenceAc, true),
            ("bc", ChainKind::CoherenceBc, false),
        ],
    };
    for (name, chain, with_ref) in coherence_modes {
        let scan = simulate_scan(
            &meas_prep,
            chain,
            SCAN_POINTS,
            n,
            settings.poisson,
            CONTRAST_REPEATS,
            &mut rng,
        )?;
        coherence.insert(name.to_string(), scan);
        if with_ref {
            let scan = simulate_scan(
                &coh_ref_prep,
                chain,
                SCAN_POINTS,
                n,
                settings.poisson,
                CONTRAST_REPEATS,
                &mut rng,
            )?;
            coherence_refs.insert(name.to_string(), scan);
        }
    }

    let population_modes: Vec<(BasisLabel, PathId, ChainKind)> = match kind {
        StateKind::Ghz => vec![
            (ghz_labels().0, PathId::PathII, ChainKind::Plain),
            (ghz_labels().1, PathId::PathI, ChainKind::SpinFlipPi),
        ],
        StateKind::WSym | StateKind::WAsym => {
            let w = w_component_labels();
            vec![
                (w[0], PathId::PathI, ChainKind::SpinFlipPi),
                (w[1], PathId::PathII, ChainKind::Plain),
                (w[2], PathId::PathII, ChainKind::SpinFlipPi),
            ]
        }
    };
    let mut population_runs = BTreeMap::new();
    for (label, blocked, chain) in population_modes {
        let config = meas_prep
            .clone()
            .push(blocker(blocked))
            .extend(analysis_chain(chain, 0.0));
        let run = simulate_intensity(&config, n, settings.poisson, POPULATION_REPEATS, &mut rng)?;
        population_runs.insert(label.to_string(), run);
    }
    let mut population_refs = BTreeMap::new();
    for (key, blocked) in [("path_I", PathId::PathII), ("path_II", PathId::PathI)] {
        let config = pop_ref_prep
            .clone()
            .push(blocker(blocked))
            .extend(analysis_chain(ChainKind::Plain, 0.0));
        let run = simulate_intensity(&config, n, settings.poisson, POPULATION_REPEATS, &mut rng)?;
        population_refs.insert(key.to_string(), run);
    }

    let scans = CampaignScans {
        state: kind,
        coherence,
        coherence_refs,
        population_runs,
        population_refs,
    };
    let result = extract_elements(&scans)?;
    let elements = result.element_map();

    let mut reports = Vec::new();
    for witness in witness_plan(kind) {
        let mut report = witness_from_elements(&elements, witness, ElementSource::Measured)?;
        report.uncertainty = Some(result.witness_uncertainty(witness));
        reports.push(report);
    }

    let (fid, fid_err) = result.fidelity_from_elements(&kind.target_components());
    let rho = campaign_state(kind, settings)?;
    let fidelity_exact = fidelity(&rho, &kind.target());
    let survival = run_beamline(&kind.prep(settings.flipper_error))?.survival;

    Ok(CampaignOutcome {
        state: kind,
        settings: settings.clone(),
        scans,
        result,
        reports,
        fidelity: fid,
        fidelity_err: fid_err,
        fidelity_exact,
        survival,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationParameter {
    /// Flipper angle error δ (π flips become π − δ).
    FlipperError,
    /// Path dephasing strength p applied to the ideal prepared state.
    Dephasing,
}

fn calibration_fidelity(parameter: CalibrationParameter, value: f64, kind: StateKind) -> Result<f64> {
    let rho = match parameter {
        CalibrationParameter::FlipperError => run_beamline(&kind.prep(value))?
            .rho
            .ok_or(Error::DegenerateOutput)?,
        CalibrationParameter::Dephasing => {
            let ideal = run_beamline(&kind.prep(0.0))?
                .rho
                .ok_or(Error::DegenerateOutput)?;
            path_dephase(&ideal, DephasingStrength::new(value)?)
        }
    };
    Ok(fidelity(&rho, &kind.target()))
}

/// Bisection for the parameter value whose simulated preparation fidelity
/// matches `target` within 1e-4. Fidelity must be monotone non-increasing
/// over the bracket ([0, π/2] for δ, [0, 1] for p).
pub fn calibrate(parameter: CalibrationParameter, target: f64, kind: StateKind) -> Result<f64> {
    if !(0.0 < target && target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target fidelity {target} not in (0, 1]"
        )));
    }
    let (mut lo, mut hi) = match parameter {
        CalibrationParameter::FlipperError => (0.0, PI / 2.0),
        CalibrationParameter::Dephasing => (0.0, 1.0),
    };

    let mut last = f64::INFINITY;
    for k in 0..=8 {
        let v = lo + (hi - lo) * k as f64 / 8.0;
        let f = calibration_fidelity(parameter, v, kind)?;
        if f > last + 1e-12 {
            return Err(Error::CalibrationNotMonotone);
        }
        last = f;
    }

    let f_lo = calibration_fidelity(parameter, lo, kind)?;
    let f_hi = calibration_fidelity(parameter, hi, kind)?;
    if target > f_lo + 1e-12 || target < f_hi - 1e-12 {
        return Err(Error::CalibrationBracket { target, lo, hi });
    }

    // full bisection: an early fidelity-tolerance exit would stop far from
    // the true parameter on the flat part of the curve near target 1
    for _ in 0..100 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f = calibration_fidelity(parameter, mid, kind)?;
        if f > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witnesses::{witness_ksep, witness_w, ProductState, WitnessName};

    fn label(s: &str) -> BasisLabel {
        s.parse().unwrap()
    }

    #[test]
    fn fit_recovers_noiseless_sinusoid() {
        let phases = scan_grid(16);
        let (a, b, d) = (120.0, 35.0, 0.7);
        let counts: Vec<f64> = phases.iter().map(|p| a + b * (p + d).sin()).collect();
        let fit = fit_sinusoid(&phases, &counts).unwrap();
        assert!((fit.mean - a).abs() / a < 1e-9);
        assert!((fit.amplitude - b).abs() / b < 1e-9);
        assert!((fit.offset - d).abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(fit_sinusoid(&[0.0, 1.0], &[1.0, 2.0]).is_err());
        let phases = [0.0, 0.0, 0.0, 0.0];
        let counts = [1.0, 1.0, 1.0, 1.0];
        assert!(fit_sinusoid(&phases, &counts).is_err());
    }

    #[test]
    fn ideal_ghz_coherence_scan_has_full_contrast() {
        let prep = StateKind::Ghz.prep(0.0);
        let scan =
            simulate_scan_seeded(&prep, ChainKind::CoherenceGhz, 16, 1e6, false, 0).unwrap();
        assert!((scan.contrast - 1.0).abs() < 1e-6);
    }

    #[test]
    fn instrument_visibility_sets_reference_contrast() {
        let prep = StateKind::Ghz
            .prep(0.0)
            .flippers_off()
            .push(dephaser(1.0 - 0.455));
        let scan =
            simulate_scan_seeded(&prep, ChainKind::CoherenceGhz, 16, 1e6, false, 0).unwrap();
        assert!((scan.contrast - 0.455).abs() < 1e-9);
    }

    #[test]
    fn blocked_path_scan_has_zero_contrast() {
        let prep = StateKind::Ghz.prep(0.0).push(blocker(PathId::PathI));
        let scan =
            simulate_scan_seeded(&prep, ChainKind::CoherenceGhz, 16, 1e6, false, 0).unwrap();
        assert!(scan.contrast < 1e-9);
    }

    #[test]
    fn zero_noise_closure_w_sym() {
        let outcome = run_campaign(StateKind::WSym, &CampaignSettings::default()).unwrap();
        for l in ["101", "011", "002"] {
            let (v, _) = outcome.result.populations[l];
            assert!((v - 1.0 / 3.0).abs() < 1e-6, "pop {l} = {v}");
        }
        for pair in ["011:101", "002:101", "002:011"] {
            let (v, _) = outcome.result.cross_magnitudes[pair];
            assert!((v - 1.0 / 3.0).abs() < 1e-6, "cross {pair} = {v}");
        }
        assert!((outcome.survival - 0.75).abs() < 1e-12);
        assert!((outcome.fidelity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_noise_closure_w_asym() {
        let outcome = run_campaign(StateKind::WAsym, &CampaignSettings::default()).unwrap();
        let (ab, _) = outcome.result.cross_magnitudes["011:101"];
        assert!((ab - 0.353553390593).abs() < 1e-6);
        let rho = campaign_state(StateKind::WAsym, &CampaignSettings::default()).unwrap();
        for (pair, (a, b)) in [
            ("011:101", (label("011"), label("101"))),
            ("002:101", (label("002"), label("101"))),
            ("002:011", (label("002"), label("011"))),
        ] {
            let (v, _) = outcome.result.cross_magnitudes[pair];
            assert!((v - rho.element(a, b).norm()).abs() < 1e-6, "{pair}");
        }
    }

    #[test]
    fn ideal_ghz_campaign_end_to_end() {
        let outcome = run_campaign(StateKind::Ghz, &CampaignSettings::default()).unwrap();
        let ghz = outcome
            .reports
            .iter()
            .find(|r| r.name == WitnessName::Ghz)
            .unwrap();
        assert!((ghz.value - 0.5).abs() < 1e-6);
        assert!((outcome.fidelity - 1.0).abs() < 1e-6);
        assert!((outcome.fidelity_exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fully_dephased_w_sym_campaign() {
        let settings = CampaignSettings {
            dephasing: 1.0,
            ..CampaignSettings::default()
        };
        let outcome = run_campaign(StateKind::WSym, &settings).unwrap();
        let w = outcome
            .reports
            .iter()
            .find(|r| r.name == WitnessName::WScaled)
            .unwrap();
        assert!((w.value - (-1.0 / 6.0)).abs() < 1e-6);
        let ksep = outcome
            .reports
            .iter()
            .find(|r| r.name == WitnessName::Ksep)
            .unwrap();
        assert!((ksep.value - 1.0 / 3.0).abs() < 1e-6);
        assert!((outcome.fidelity_exact - 5.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn extracted_coherences_scale_linearly_with_dephasing() {
        let mut values = Vec::new();
        for k in 0..=4 {
            let settings = CampaignSettings {
                dephasing: k as f64 / 4.0,
                ..CampaignSettings::default()
            };
            let outcome = run_campaign(StateKind::WSym, &settings).unwrap();
            values.push((
                1.0 - settings.dephasing,
                outcome.result.cross_magnitudes["011:101"].0,
                outcome.result.cross_magnitudes["002:101"].0,
                outcome.result.cross_magnitudes["002:011"].0,
            ));
        }
        for (one_minus_p, ab, ac, bc) in values {
            assert!((ab - one_minus_p / 3.0).abs() < 1e-6);
            assert!((ac - one_minus_p / 3.0).abs() < 1e-6);
            assert!((bc - 1.0 / 3.0).abs() < 1e-6, "bc is dephasing-invariant");
        }
    }

    #[test]
    fn poisson_extraction_stays_within_tolerance() {
        let mut ab_sum = 0.0;
        let repeats = 10;
        for seed in 0..repeats {
            let settings = CampaignSettings {
                counts_per_point: 1e3,
                poisson: true,
                seed,
                ..CampaignSettings::default()
            };
            let outcome = run_campaign(StateKind::WAsym, &settings).unwrap();
            ab_sum += outcome.result.cross_magnitudes["011:101"].0;
        }
        let mean = ab_sum / repeats as f64;
        assert!(
            (mean - 0.353553390593).abs() / 0.353553390593 < 0.05,
            "mean ab {mean}"
        );
    }

    #[test]
    fn visibility_cancels_in_extraction() {
        let settings = CampaignSettings {
            visibility: 0.455,
            ..CampaignSettings::default()
        };
        let outcome = run_campaign(StateKind::WSym, &settings).unwrap();
        assert!((outcome.result.reference_contrasts["ab"] - 0.455).abs() < 1e-9);
        let (ab, _) = outcome.result.cross_magnitudes["011:101"];
        assert!((ab - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn calibrate_examples() {
        let zero = calibrate(CalibrationParameter::FlipperError, 1.0, StateKind::Ghz).unwrap();
        assert!(zero.abs() < 1e-6);

        let p = calibrate(
            CalibrationParameter::Dephasing,
            5.0 / 9.0 + 1e-6,
            StateKind::WSym,
        )
        .unwrap();
        assert!(p > 0.999);

        let p = calibrate(CalibrationParameter::Dephasing, 0.646, StateKind::WSym).unwrap();
        assert!(0.0 < p && p < 1.0);
        let f = calibration_fidelity(CalibrationParameter::Dephasing, p, StateKind::WSym).unwrap();
        assert!((f - 0.646).abs() < 1e-4);

        assert!(calibrate(CalibrationParameter::Dephasing, 0.2, StateKind::WSym).is_err());
    }

    #[test]
    fn calibrated_flipper_error_band_contains_published_value() {
        let delta = calibrate(CalibrationParameter::FlipperError, 0.985, StateKind::Ghz).unwrap();
        let settings = CampaignSettings {
            flipper_error: delta,
            ..CampaignSettings::default()
        };
        let outcome = run_campaign(StateKind::Ghz, &settings).unwrap();
        let ghz = outcome
            .reports
            .iter()
            .find(|r| r.name == WitnessName::Ghz)
            .unwrap();
        assert!(
            (0.44..=0.50).contains(&ghz.value),
            "I_GHZ = {} at delta = {delta}",
            ghz.value
        );
    }

    #[test]
    fn dephased_campaign_matches_direct_witnesses() {
        let settings = CampaignSettings {
            dephasing: 0.35,
            ..CampaignSettings::default()
        };
        let outcome = run_campaign(StateKind::WAsym, &settings).unwrap();
        let rho = campaign_state(StateKind::WAsym, &settings).unwrap();
        let w_report = outcome
            .reports
            .iter()
            .find(|r| r.name == WitnessName::WScaled)
            .unwrap();
        assert!((w_report.value - witness_w(&rho, true)).abs() < 1e-6);
        let ksep_report = outcome
            .reports
            .iter()
            .find(|r| r.name == WitnessName::Ksep)
            .unwrap();
        let direct = witness_ksep(
            &rho,
            3,
            &ProductState::from_label(label("011")),
            &ProductState::from_label(label("002")),
        )
        .unwrap();
        assert!((ksep_report.value - direct).abs() < 1e-6);
    }

    #[test]
    fn missing_scan_errors_name_the_run() {
        let outcome = run_campaign(StateKind::WSym, &CampaignSettings::default()).unwrap();
        let mut scans = outcome.scans.clone();
        scans.coherence.remove("bc");
        match extract_elements(&scans) {
            Err(Error::MissingRun(name)) => assert!(name.contains("bc")),
            other => panic!("expected MissingRun, got {other:?}"),
        }
    }
}
