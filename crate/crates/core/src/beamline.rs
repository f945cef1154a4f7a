//! Operator-level simulation of the interferometer: preparation of the GHZ/W
//! states inside the two-path loop and the post-recombination analysis chain.
//!
//! The leading splitter maps the incoming |path I, ↑, E₀⟩ beam to
//! `(|I⟩+|II⟩)/√2 ⊗ |↑,0⟩`. Components located on a single path act as
//! controlled operations on that path. The first component located
//! `post_recombination` triggers the recombination of the two paths at the
//! last interferometer plate, modeled as a post-selected projection of the
//! path factor onto `(|I⟩+|II⟩)/√2` (only the forward output beam is used).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{path_dephase, DephasingStrength};
use crate::tensor::{
    kron3, BasisLabel, CMatrix, DensityMatrix, PureState, DIM, ENERGY_DIM, SPIN_DIM,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

/// Population below this threshold counts as unoccupied for energy-range
/// truncation checks.
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathId {
    #[serde(rename = "path_I")]
    PathI,
    #[serde(rename = "path_II")]
    PathII,
}

impl PathId {
    fn value(self) -> u8 {
        match self {
            PathId::PathI => 0,
            PathId::PathII => 1,
        }
    }

    fn other(self) -> PathId {
        match self {
            PathId::PathI => PathId::PathII,
            PathId::PathII => PathId::PathI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    #[serde(rename = "path_I")]
    PathI,
    #[serde(rename = "path_II")]
    PathII,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "post_recombination")]
    PostRecombination,
}

/// Kind-specific component descriptor. Serializes with a `kind` tag and a
/// `params` object, e.g.
/// `{"kind": "rf_flipper", "location": "path_II", "params": {"flip_angle": 3.14159, "frequency_multiplier": 1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ComponentKind {
    Splitter {},
    RfFlipper {
        flip_angle: f64,
        frequency_multiplier: u8,
    },
    DcFlipper {
        flip_angle: f64,
    },
    PhaseShifter {
        phase: f64,
    },
    SpinPhaseShifter {
        phase: f64,
    },
    Absorber {
        transmission: f64,
    },
    Blocker {
        blocked: PathId,
    },
    Dephaser {
        dephasing: f64,
    },
    Supermirror {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    #[serde(flatten)]
    pub kind: ComponentKind,
    pub location: Location,
}

impl Component {
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ComponentKind::RfFlipper {
                flip_angle,
                frequency_multiplier,
            } => {
                if !flip_angle.is_finite() {
                    return Err(Error::InvalidParameter("flip_angle must be finite".into()));
                }
                if !matches!(frequency_multiplier, 1 | 2) {
                    return Err(Error::InvalidParameter(format!(
                        "frequency_multiplier must be 1 or 2, got {frequency_multiplier}"
                    )));
                }
            }
            ComponentKind::DcFlipper { flip_angle } => {
                if !flip_angle.is_finite() {
                    return Err(Error::InvalidParameter("flip_angle must be finite".into()));
                }
            }
            ComponentKind::PhaseShifter { phase } | ComponentKind::SpinPhaseShifter { phase } => {
                if !phase.is_finite() {
                    return Err(Error::InvalidParameter("phase must be finite".into()));
                }
            }
            ComponentKind::Absorber { transmission } => {
                if !(0.0..=1.0).contains(transmission) {
                    return Err(Error::InvalidParameter(format!(
                        "transmission {transmission} not in [0, 1]"
                    )));
                }
            }
            ComponentKind::Dephaser { dephasing } => {
                if !(0.0..=1.0).contains(dephasing) {
                    return Err(Error::InvalidParameter(format!(
                        "dephasing {dephasing} not in [0, 1]"
                    )));
                }
            }
            ComponentKind::Splitter {}
            | ComponentKind::Blocker { .. }
            | ComponentKind::Supermirror {} => {}
        }
        Ok(())
    }
}

/// Ordered component list. The incoming beam is the fixed |path I, ↑, E₀⟩
/// mode, handled by the leading splitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamlineConfig {
    pub components: Vec<Component>,
}

impl BeamlineConfig {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let config = BeamlineConfig { components };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let splitters: Vec<usize> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, comp)| matches!(comp.kind, ComponentKind::Splitter {}))
            .map(|(i, _)| i)
            .collect();
        if splitters != vec![0] {
            return Err(Error::InvalidConfig(
                "config must contain exactly one splitter, first".into(),
            ));
        }
        let mirrors: Vec<usize> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, comp)| matches!(comp.kind, ComponentKind::Supermirror {}))
            .map(|(i, _)| i)
            .collect();
        if mirrors.len() > 1 {
            return Err(Error::InvalidConfig("at most one supermirror".into()));
        }
        if let Some(&i) = mirrors.first() {
            if i + 1 != self.components.len() {
                return Err(Error::InvalidConfig(
                    "supermirror must be the last component before detection".into(),
                ));
            }
        }
        for comp in &self.components {
            comp.validate()?;
            if let ComponentKind::RfFlipper { .. } | ComponentKind::DcFlipper { .. } = comp.kind {
                if comp.location == Location::Both {
                    return Err(Error::InvalidConfig(
                        "flippers inside the interferometer must sit on one path".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn push(mut self, component: Component) -> Self {
        self.components.push(component);
        self
    }

    pub fn extend(mut self, fragment: Vec<Component>) -> Self {
        self.components.extend(fragment);
        self
    }

    /// The same beamline with every in-interferometer flipper removed — the
    /// reference configuration of the measurement runs.
    pub fn flippers_off(&self) -> Self {
        BeamlineConfig {
            components: self
                .components
                .iter()
                .filter(|comp| {
                    !(matches!(
                        comp.kind,
                        ComponentKind::RfFlipper { .. } | ComponentKind::DcFlipper { .. }
                    ) && comp.location != Location::PostRecombination)
                })
                .cloned()
                .collect(),
        }
    }

    /// The same beamline with every dephaser removed.
    pub fn without_dephasers(&self) -> Self {
        BeamlineConfig {
            components: self
                .components
                .iter()
                .filter(|comp| !matches!(comp.kind, ComponentKind::Dephaser { .. }))
                .cloned()
                .collect(),
        }
    }

    /// The same beamline with every absorber removed.
    pub fn without_absorbers(&self) -> Self {
        BeamlineConfig {
            components: self
                .components
                .iter()
                .filter(|comp| !matches!(comp.kind, ComponentKind::Absorber { .. }))
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let config: BeamlineConfig = serde_json::from_str(s)
            .map_err(|e| Error::InvalidConfig(format!("JSON parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// GHZ preparation: only the π flipper at frequency ω in path II is on.
    /// `flip_error` subtracts from every nominal flip angle proportionally
    /// (a π flip becomes π − δ).
    pub fn prep_ghz(flip_error: f64) -> Self {
        let scale = 1.0 - flip_error / PI;
        BeamlineConfig {
            components: vec![
                Component {
                    kind: ComponentKind::Splitter {},
                    location: Location::Both,
                },
                Component {
                    kind: ComponentKind::RfFlipper {
                        flip_angle: PI * scale,
                        frequency_multiplier: 1,
                    },
                    location: Location::PathII,
                },
            ],
        }
    }

    /// W preparation: π flip at 2ω then π/2 flip at ω in path I, π flip at ω
    /// in path II; the symmetric variant adds a 50% stochastic absorber in
    /// path II.
    pub fn prep_w(symmetric: bool, flip_error: f64) -> Self {
        let scale = 1.0 - flip_error / PI;
        let mut components = vec![
            Component {
                kind: ComponentKind::Splitter {},
                location: Location::Both,
            },
            Component {
                kind: ComponentKind::RfFlipper {
                    flip_angle: PI * scale,
                    frequency_multiplier: 2,
                },
                location: Location::PathI,
            },
            Component {
                kind: ComponentKind::RfFlipper {
                    flip_angle: PI / 2.0 * scale,
                    frequency_multiplier: 1,
                },
                location: Location::PathI,
            },
            Component {
                kind: ComponentKind::RfFlipper {
                    flip_angle: PI * scale,
                    frequency_multiplier: 1,
                },
                location: Location::PathII,
            },
        ];
        if symmetric {
            components.push(Component {
                kind: ComponentKind::Absorber { transmission: 0.5 },
                location: Location::PathII,
            });
        }
        BeamlineConfig { components }
    }
}

/// Measurement mode of the post-recombination analysis chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    /// Supermirror only.
    Plain,
    /// π flip at ω before the supermirror: selects spin-down populations.
    SpinFlipPi,
    /// DC π/2 flip; interferes the |011⟩/|101⟩ pair under a path-phase scan.
    CoherenceAb,
    /// RF π/2 at ω then DC π/2; interferes |002⟩/|101⟩ under a path-phase scan.
    CoherenceAc,
    /// Spin phase scan then RF π/2 at ω; interferes |002⟩/|011⟩.
    CoherenceBc,
    /// RF π/2 at ω only; interferes the GHZ pair |010⟩/|101⟩ under a
    /// path-phase scan.
    CoherenceGhz,
}

/// Post-recombination component fragment for a measurement mode, with the
/// scanned phase inserted where that mode scans it.
pub fn analysis_chain(kind: ChainKind, scan_phase: f64) -> Vec<Component> {
    let supermirror = Component {
        kind: ComponentKind::Supermirror {},
        location: Location::PostRecombination,
    };
    let rf_end = |angle: f64| Component {
        kind: ComponentKind::RfFlipper {
            flip_angle: angle,
            frequency_multiplier: 1,
        },
        location: Location::PostRecombination,
    };
    let dc_half = Component {
        kind: ComponentKind::DcFlipper {
            flip_angle: PI / 2.0,
        },
        location: Location::PostRecombination,
    };
    let path_phase = Component {
        kind: ComponentKind::PhaseShifter { phase: scan_phase },
        location: Location::PathII,
    };
    match kind {
        ChainKind::Plain => vec![supermirror],
        ChainKind::SpinFlipPi => vec![rf_end(PI), supermirror],
        ChainKind::CoherenceAb => vec![path_phase, dc_half, supermirror],
        ChainKind::CoherenceAc => vec![path_phase, rf_end(PI / 2.0), dc_half, supermirror],
        ChainKind::CoherenceBc => vec![
            Component {
                kind: ComponentKind::SpinPhaseShifter { phase: scan_phase },
                location: Location::PostRecombination,
            },
            rf_end(PI / 2.0),
            supermirror,
        ],
        ChainKind::CoherenceGhz => vec![path_phase, rf_end(PI / 2.0), supermirror],
    }
}

/// Post-selected, renormalized output state plus the probability mass that
/// survived all post-selections.
#[derive(Debug, Clone)]
pub struct BeamOutput {
    pub rho: Option<DensityMatrix>,
    pub survival: f64,
}

/// Spin rotation `|↑⟩ → cos(θ/2)|↑⟩ + i sin(θ/2)|↓⟩` (and symmetrically for
/// |↓⟩), identity on path and energy.
pub fn dc_flipper_unitary(theta: f64) -> CMatrix {
    let cos = c((theta / 2.0).cos());
    let isin = ci((theta / 2.0).sin());
    let spin = CMatrix::from_row_slice(2, 2, &[cos, isin, isin, cos]);
    kron3(
        &CMatrix::identity(2, 2),
        &spin,
        &CMatrix::identity(3, 3),
    )
    .expect("fixed dimensions")
}

/// Spin–energy operator of an RF flipper at frequency multiplier m:
/// `|↑,e⟩ → cos(θ/2)|↑,e⟩ + i sin(θ/2)|↓,e+m⟩` and
/// `|↓,e⟩ → cos(θ/2)|↓,e⟩ + i sin(θ/2)|↑,e−m⟩`.
///
/// Returns the 6×6 operator (spin ⊗ energy, energy fastest) together with the
/// (spin, energy) pairs whose transition would leave the 3-level range; the
/// operator is the identity there and applying it to a state with support on
/// such a pair is a truncation error.
pub fn rf_flipper_unitary(theta: f64, m: u8) -> (CMatrix, Vec<(u8, u8)>) {
    let dim = SPIN_DIM * ENERGY_DIM;
    let mut u = CMatrix::identity(dim, dim);
    let cos = c((theta / 2.0).cos());
    let isin = ci((theta / 2.0).sin());
    let m = m as usize;
    let idx = |spin: usize, energy: usize| spin * ENERGY_DIM + energy;
    let mut forbidden = Vec::new();
    for e in 0..ENERGY_DIM {
        if e + m < ENERGY_DIM {
            // pair (↑, e) ↔ (↓, e+m)
            let up = idx(1, e);
            let dn = idx(0, e + m);
            u[(up, up)] = cos;
            u[(dn, dn)] = cos;
            u[(dn, up)] = isin;
            u[(up, dn)] = isin;
        } else {
            forbidden.push((1u8, e as u8));
        }
        if e < m {
            forbidden.push((0u8, e as u8));
        }
    }
    (u, forbidden)
}

fn embed_path_controlled(op: &CMatrix, path: Option<PathId>) -> CMatrix {
    let dim_rest = SPIN_DIM * ENERGY_DIM;
    assert_eq!(op.nrows(), dim_rest);
    let mut full = CMatrix::zeros(DIM, DIM);
    for p in 0..2usize {
        let active = path.map_or(true, |id| id.value() as usize == p);
        for i in 0..dim_rest {
            for j in 0..dim_rest {
                let v = if active {
                    op[(i, j)]
                } else if i == j {
                    c(1.0)
                } else {
                    c(0.0)
                };
                full[(p * dim_rest + i, p * dim_rest + j)] = v;
            }
        }
    }
    full
}

/// Diagonal Kraus operator over the 12 basis states.
fn diagonal_kraus(f: impl Fn(BasisLabel) -> Complex64) -> CMatrix {
    let mut k = CMatrix::zeros(DIM, DIM);
    for i in 0..DIM {
        let label = BasisLabel::from_index(i).unwrap();
        k[(i, i)] = f(label);
    }
    k
}

struct BeamState {
    rho: CMatrix,
    survival: f64,
    recombined: bool,
    degenerate: bool,
}

impl BeamState {
    fn apply_unitary(&mut self, u: &CMatrix) {
        self.rho = u * &self.rho * u.adjoint();
    }

    /// Applies a (sub-normalized) Kraus operator and post-selects.
    fn post_select(&mut self, k: &CMatrix) {
        let new = k * &self.rho * k.adjoint();
        let tr = new.trace().re;
        self.survival *= tr.max(0.0);
        if tr < 1e-15 {
            self.degenerate = true;
            self.survival = 0.0;
        } else {
            self.rho = new / c(tr);
        }
    }

    fn population(&self, label: BasisLabel) -> f64 {
        self.rho[(label.index(), label.index())].re
    }
}

/// Runs the beamline components in order, returning the post-selected output
/// state and the overall survival probability.
pub fn run_beamline(config: &BeamlineConfig) -> Result<BeamOutput> {
    config.validate()?;

    // incoming |path I, ↑, E₀⟩ beam
    let initial = PureState::basis(BasisLabel::new(0, 1, 0)?);
    let mut state = BeamState {
        rho: initial.to_density().matrix().clone(),
        survival: 1.0,
        recombined: false,
        degenerate: false,
    };

    let sqrt_half = c(std::f64::consts::FRAC_1_SQRT_2);
    for comp in &config.components {
        if state.degenerate {
            break;
        }
        if comp.location == Location::PostRecombination && !state.recombined {
            // last interferometer plate: project the path factor onto
            // (|I⟩+|II⟩)/√2 and keep the forward beam
            let mut plate = CMatrix::zeros(DIM, DIM);
            let rest = SPIN_DIM * ENERGY_DIM;
            for p in 0..2usize {
                for q in 0..2usize {
                    for i in 0..rest {
                        plate[(p * rest + i, q * rest + i)] = sqrt_half * sqrt_half;
                    }
                }
            }
            state.post_select(&plate);
            state.recombined = true;
            if state.degenerate {
                break;
            }
        }

        let path = match comp.location {
            Location::PathI => Some(PathId::PathI),
            Location::PathII => Some(PathId::PathII),
            Location::Both | Location::PostRecombination => None,
        };

        match &comp.kind {
            ComponentKind::Splitter {} => {
                // (|I⟩ + |II⟩)/√2 on the path factor
                let mut u = CMatrix::zeros(DIM, DIM);
                let rest = SPIN_DIM * ENERGY_DIM;
                for i in 0..rest {
                    u[(i, i)] = sqrt_half;
                    u[(rest + i, i)] = sqrt_half;
                    u[(i, rest + i)] = sqrt_half;
                    u[(rest + i, rest + i)] = -sqrt_half;
                }
                state.apply_unitary(&u);
            }
            ComponentKind::RfFlipper {
                flip_angle,
                frequency_multiplier,
            } => {
                let (op, forbidden) = rf_flipper_unitary(*flip_angle, *frequency_multiplier);
                if (flip_angle / 2.0).sin().abs() > 1e-15 {
                    for (spin, energy) in &forbidden {
                        for p in 0..2u8 {
                            if path.map_or(false, |id| id.value() != p) {
                                continue;
                            }
                            let label = BasisLabel::new(p, *spin, *energy)?;
                            if state.population(label) > SUPPORT_TOL {
                                return Err(Error::EnergyTruncation(format!(
                                    "rf flipper (m={frequency_multiplier}) hit populated state |{label}⟩"
                                )));
                            }
                        }
                    }
                }
                state.apply_unitary(&embed_path_controlled(&op, path));
            }
            ComponentKind::DcFlipper { flip_angle } => {
                let full = dc_flipper_unitary(*flip_angle);
                match path {
                    None => state.apply_unitary(&full),
                    Some(_) => {
                        let cos = c((flip_angle / 2.0).cos());
                        let isin = ci((flip_angle / 2.0).sin());
                        let spin = CMatrix::from_row_slice(2, 2, &[cos, isin, isin, cos]);
                        let op = spin.kronecker(&CMatrix::identity(3, 3));
                        state.apply_unitary(&embed_path_controlled(&op, path));
                    }
                }
            }
            ComponentKind::PhaseShifter { phase } => {
                // relative phase on path II (sign convention: path II side)
                let target = path.unwrap_or(PathId::PathII);
                let factor = Complex64::from_polar(1.0, *phase);
                let u = diagonal_kraus(|l| {
                    if l.path() == target.value() {
                        factor
                    } else {
                        c(1.0)
                    }
                });
                state.apply_unitary(&u);
            }
            ComponentKind::SpinPhaseShifter { phase } => {
                let factor = Complex64::from_polar(1.0, *phase);
                let u = diagonal_kraus(|l| if l.spin() == 1 { factor } else { c(1.0) });
                state.apply_unitary(&u);
            }
            ComponentKind::Absorber { transmission } => {
                let target = path.unwrap_or(PathId::PathII);
                let amp = c(transmission.sqrt());
                let k = diagonal_kraus(|l| {
                    if l.path() == target.value() {
                        amp
                    } else {
                        c(1.0)
                    }
                });
                state.post_select(&k);
            }
            ComponentKind::Blocker { blocked } => {
                let open = blocked.other();
                let k = diagonal_kraus(|l| {
                    if l.path() == open.value() {
                        c(1.0)
                    } else {
                        c(0.0)
                    }
                });
                state.post_select(&k);
            }
            ComponentKind::Dephaser { dephasing } => {
                let rho = DensityMatrix::new_unchecked(state.rho.clone());
                let out = path_dephase(&rho, DephasingStrength::new(*dephasing)?);
                state.rho = out.matrix().clone();
            }
            ComponentKind::Supermirror {} => {
                let k = diagonal_kraus(|l| if l.spin() == 1 { c(1.0) } else { c(0.0) });
                state.post_select(&k);
            }
        }
    }

    if state.degenerate {
        return Ok(BeamOutput {
            rho: None,
            survival: 0.0,
        });
    }
    Ok(BeamOutput {
        rho: Some(DensityMatrix::new(state.rho)?),
        survival: state.survival,
    })
}
