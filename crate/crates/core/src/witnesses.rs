//! Nonlinear entanglement witnesses.
//!
//! All three inequalities are of the form "coherence magnitude minus a sum of
//! √-products of populations"; a positive value certifies entanglement outside
//! the corresponding separability class. Every √-term reduces to products of
//! single-copy matrix elements, which is the production evaluation path; the
//! dense two-copy oracle in [`crate::tensor`] cross-checks it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{fidelity, product_pure};
use crate::tensor::{
    swapped_pair_population, BasisLabel, DensityMatrix, PureState, Subsystem, SubsystemSet,
};

/// Labels w₁ = |101⟩, w₂ = |011⟩, w₃ = |002⟩ of the W-state components.
pub fn w_component_labels() -> [BasisLabel; 3] {
    [
        BasisLabel::new(1, 0, 1).unwrap(),
        BasisLabel::new(0, 1, 1).unwrap(),
        BasisLabel::new(0, 0, 2).unwrap(),
    ]
}

/// The GHZ witness pair |010⟩, |101⟩.
pub fn ghz_labels() -> (BasisLabel, BasisLabel) {
    (
        BasisLabel::new(0, 1, 0).unwrap(),
        BasisLabel::new(1, 0, 1).unwrap(),
    )
}

/// `|⟨010|ρ|101⟩| − Σ_{i=1..3} √(⟨x'|ρ|x'⟩⟨y'|ρ|y'⟩)` with x', y' the pair
/// (010, 101) with subsystem i exchanged. Positive certifies genuine
/// multipartite entanglement.
pub fn witness_ghz(rho: &DensityMatrix) -> f64 {
    let (x, y) = ghz_labels();
    let coherence = rho.element(x, y).norm();
    let subtraction: f64 = Subsystem::ALL
        .into_iter()
        .map(|s| swapped_pair_population(rho, x, y, SubsystemSet::single(s)).sqrt())
        .sum();
    coherence - subtraction
}

/// W witness over the full (i, j) grid: the i = j terms reduce to the
/// populations ⟨w_i|ρ|w_i⟩, and the permutation index of term (i, j) is the
/// row index i.
///
/// `scaled` divides the raw value by 2; positive scaling preserves the
/// biseparable bound, and the scaled convention is the default report.
pub fn witness_w(rho: &DensityMatrix, scaled: bool) -> f64 {
    let w = w_component_labels();
    let mut coherence = 0.0;
    let mut subtraction = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                coherence += rho.element(w[i], w[j]).norm();
            }
            let subs = SubsystemSet::single(Subsystem::ALL[i]);
            subtraction += swapped_pair_population(rho, w[i], w[j], subs).sqrt();
        }
    }
    let raw = coherence - subtraction;
    if scaled {
        raw / 2.0
    } else {
        raw
    }
}

/// A pure state given as an explicit product of one factor per subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    path: Vec<Complex64>,
    spin: Vec<Complex64>,
    energy: Vec<Complex64>,
}

impl ProductState {
    pub fn new(
        path: Vec<Complex64>,
        spin: Vec<Complex64>,
        energy: Vec<Complex64>,
    ) -> Result<Self> {
        for (v, dim) in [(&path, 2usize), (&spin, 2), (&energy, 3)] {
            if v.len() != dim {
                return Err(Error::NotProduct);
            }
            let norm_sq: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if (norm_sq - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized(norm_sq));
            }
        }
        Ok(ProductState { path, spin, energy })
    }

    pub fn from_label(label: BasisLabel) -> Self {
        let basis = |dim: usize, k: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[k] = Complex64::new(1.0, 0.0);
            v
        };
        ProductState {
            path: basis(2, label.path() as usize),
            spin: basis(2, label.spin() as usize),
            energy: basis(3, label.energy() as usize),
        }
    }

    fn factor(&self, sub: Subsystem) -> &[Complex64] {
        match sub {
            Subsystem::Path => &self.path,
            Subsystem::Spin => &self.spin,
            Subsystem::Energy => &self.energy,
        }
    }

    /// Exchanges the factors named by `subs` between `self` and `other`.
    pub fn swapped(&self, other: &ProductState, subs: SubsystemSet) -> (ProductState, ProductState) {
        let mut a = self.clone();
        let mut b = other.clone();
        for sub in subs.members() {
            match sub {
                Subsystem::Path => std::mem::swap(&mut a.path, &mut b.path),
                Subsystem::Spin => std::mem::swap(&mut a.spin, &mut b.spin),
                Subsystem::Energy => std::mem::swap(&mut a.energy, &mut b.energy),
            }
        }
        (a, b)
    }

    pub fn to_pure(&self) -> PureState {
        let parts: Vec<(SubsystemSet, Vec<Complex64>)> = Subsystem::ALL
            .into_iter()
            .map(|s| (SubsystemSet::single(s), self.factor(s).to_vec()))
            .collect();
        product_pure(&parts).expect("factors validated at construction")
    }

    /// The basis label, if every factor is a computational basis vector.
    pub fn as_label(&self) -> Option<BasisLabel> {
        let digit = |v: &[Complex64]| -> Option<u8> {
            let mut hit = None;
            for (k, a) in v.iter().enumerate() {
                if a.norm() > 1e-12 {
                    if hit.is_some() || (a.norm() - 1.0).abs() > 1e-12 {
                        return None;
                    }
                    hit = Some(k as u8);
                }
            }
            hit
        };
        let (p, s, e) = (digit(&self.path)?, digit(&self.spin)?, digit(&self.energy)?);
        BasisLabel::new(p, s, e).ok()
    }
}

fn population(rho: &DensityMatrix, phi: &ProductState) -> f64 {
    let v = phi.to_pure();
    let p = (v.amplitudes().adjoint() * rho.matrix() * v.amplitudes())[(0, 0)];
    p.re.max(0.0)
}

/// The k-partitions of {1, 2, 3} as lists of parts.
fn partitions(k: usize) -> Result<Vec<Vec<SubsystemSet>>> {
    match k {
        2 => Ok(Subsystem::ALL
            .into_iter()
            .map(|s| {
                let single = SubsystemSet::single(s);
                vec![single, single.complement()]
            })
            .collect()),
        3 => Ok(vec![Subsystem::ALL
            .into_iter()
            .map(SubsystemSet::single)
            .collect()]),
        _ => Err(Error::InvalidSeparabilityOrder(k)),
    }
}

/// k-separability witness for the product pair Φ = φ₁ ⊗ φ₂:
///
/// `|⟨φ₁|ρ|φ₂⟩| − Σ_{k-partitions {α}} Π_{parts αᵢ} (⟨φ₁'|ρ|φ₁'⟩⟨φ₂'|ρ|φ₂'⟩)^{1/(2k)}`
///
/// where φ₁', φ₂' exchange the αᵢ factors between φ₁ and φ₂. Positive
/// certifies that ρ is not k-separable.
pub fn witness_ksep(
    rho: &DensityMatrix,
    k: usize,
    phi1: &ProductState,
    phi2: &ProductState,
) -> Result<f64> {
    let v1 = phi1.to_pure();
    let v2 = phi2.to_pure();
    let first = (v1.amplitudes().adjoint() * rho.matrix() * v2.amplitudes())[(0, 0)].norm();

    let exponent = 1.0 / (2.0 * k as f64);
    let mut subtraction = 0.0;
    for partition in partitions(k)? {
        let mut term = 1.0;
        for part in &partition {
            let (p1, p2) = phi1.swapped(phi2, *part);
            let e = population(rho, &p1) * population(rho, &p2);
            term *= e.powf(exponent);
        }
        subtraction += term;
    }
    Ok(first - subtraction)
}

/// Fixed dictionary of 20 basis-label pairs used when no Φ is given.
pub fn phi_dictionary() -> Vec<(BasisLabel, BasisLabel)> {
    let pairs = [
        ("010", "101"),
        ("011", "002"),
        ("011", "101"),
        ("002", "101"),
        ("000", "111"),
        ("001", "110"),
        ("010", "100"),
        ("000", "011"),
        ("101", "110"),
        ("010", "001"),
        ("100", "012"),
        ("112", "001"),
        ("012", "102"),
        ("111", "002"),
        ("110", "011"),
        ("000", "112"),
        ("101", "012"),
        ("010", "112"),
        ("100", "002"),
        ("011", "112"),
    ];
    pairs
        .into_iter()
        .map(|(a, b)| (a.parse().unwrap(), b.parse().unwrap()))
        .collect()
}

/// Maximizes [`witness_ksep`] over the 20-pair dictionary; returns the best
/// value and the pair that attains it.
pub fn witness_ksep_best(
    rho: &DensityMatrix,
    k: usize,
) -> Result<(f64, (BasisLabel, BasisLabel))> {
    let mut best: Option<(f64, (BasisLabel, BasisLabel))> = None;
    for (a, b) in phi_dictionary() {
        let v = witness_ksep(
            rho,
            k,
            &ProductState::from_label(a),
            &ProductState::from_label(b),
        )?;
        if best.map_or(true, |(bv, _)| v > bv) {
            best = Some((v, (a, b)));
        }
    }
    Ok(best.expect("dictionary is nonempty"))
}

/// Fidelity witness `⟨target|ρ|target⟩ − 1/2`; the 1/2 threshold is the
/// standard projector-witness bound for both target classes.
pub fn fidelity_witness(rho: &DensityMatrix, target: &PureState) -> f64 {
    fidelity(rho, target) - 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessName {
    #[serde(rename = "GHZ")]
    Ghz,
    #[serde(rename = "W_raw")]
    WRaw,
    #[serde(rename = "W_scaled")]
    WScaled,
    #[serde(rename = "KSEP")]
    Ksep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementSource {
    Exact,
    Measured,
}

/// Evaluated witness value plus the inputs used to produce it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub name: WitnessName,
    pub value: f64,
    /// Counting-statistics standard error, when the inputs carry one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Ket strings of the Φ pair, for k-separability reports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_pair: Option<(String, String)>,
    pub element_source: ElementSource,
    /// Populations that were not supplied and defaulted to zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defaulted_populations: Vec<String>,
}

/// Which witness to evaluate from an element map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessKind {
    Ghz,
    W { scaled: bool },
    Ksep { k: usize, phi1: BasisLabel, phi2: BasisLabel },
}

/// The experimentally accessible element set: populations and cross-term
/// magnitudes keyed by basis labels. Pairs are stored order-insensitively.
#[derive(Debug, Clone, Default)]
pub struct ElementMap {
    populations: BTreeMap<BasisLabel, f64>,
    cross: BTreeMap<(BasisLabel, BasisLabel), f64>,
}

fn pair_key(a: BasisLabel, b: BasisLabel) -> (BasisLabel, BasisLabel) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ElementMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_population(&mut self, label: BasisLabel, value: f64) {
        self.populations.insert(label, value);
    }

    pub fn insert_cross(&mut self, a: BasisLabel, b: BasisLabel, magnitude: f64) {
        self.cross.insert(pair_key(a, b), magnitude);
    }

    /// Population with default 0; the second return flags a defaulted lookup.
    pub fn population(&self, label: BasisLabel) -> (f64, bool) {
        match self.populations.get(&label) {
            Some(&v) => (v, false),
            None => (0.0, true),
        }
    }

    pub fn cross(&self, a: BasisLabel, b: BasisLabel) -> Result<f64> {
        self.cross
            .get(&pair_key(a, b))
            .copied()
            .ok_or_else(|| Error::MissingElement {
                bra: a.to_string(),
                ket: b.to_string(),
            })
    }

    /// Fills the measured element set for a witness from an exact ρ.
    pub fn from_density(rho: &DensityMatrix, kind: WitnessKind) -> Self {
        let mut map = ElementMap::new();
        match kind {
            WitnessKind::Ghz => {
                let (x, y) = ghz_labels();
                map.insert_population(x, rho.population(x));
                map.insert_population(y, rho.population(y));
                map.insert_cross(x, y, rho.element(x, y).norm());
            }
            WitnessKind::W { .. } => {
                let w = w_component_labels();
                for i in 0..3 {
                    map.insert_population(w[i], rho.population(w[i]));
                    for j in (i + 1)..3 {
                        map.insert_cross(w[i], w[j], rho.element(w[i], w[j]).norm());
                    }
                }
            }
            WitnessKind::Ksep { phi1, phi2, .. } => {
                map.insert_population(phi1, rho.population(phi1));
                map.insert_population(phi2, rho.population(phi2));
                map.insert_cross(phi1, phi2, rho.element(phi1, phi2).norm());
            }
        }
        map
    }
}

/// Evaluates a witness from measured elements only. Cross-term magnitudes are
/// required; populations that were not measured default to 0 and are listed in
/// `defaulted_populations` of the report.
pub fn witness_from_elements(
    elements: &ElementMap,
    kind: WitnessKind,
    source: ElementSource,
) -> Result<WitnessReport> {
    let mut defaulted = Vec::new();
    let mut pop = |label: BasisLabel| -> f64 {
        let (v, was_defaulted) = elements.population(label);
        if was_defaulted {
            defaulted.push(label.to_string());
        }
        v
    };

    let report = match kind {
        WitnessKind::Ghz => {
            let (x, y) = ghz_labels();
            let coherence = elements.cross(x, y)?;
            let mut subtraction = 0.0;
            for s in Subsystem::ALL {
                let (xs, ys) = x.swapped(y, SubsystemSet::single(s));
                subtraction += (pop(xs) * pop(ys)).sqrt();
            }
            WitnessReport {
                name: WitnessName::Ghz,
                value: coherence - subtraction,
                k: None,
                phi_pair: None,
                uncertainty: None,
                element_source: source,
                defaulted_populations: Vec::new(),
            }
        }
        WitnessKind::W { scaled } => {
            let w = w_component_labels();
            let mut coherence = 0.0;
            let mut subtraction = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        coherence += elements.cross(w[i], w[j])?;
                        let (wi, wj) = w[i].swapped(w[j], SubsystemSet::single(Subsystem::ALL[i]));
                        subtraction += (pop(wi) * pop(wj)).sqrt();
                    } else {
                        subtraction += pop(w[i]);
                    }
                }
            }
            let raw = coherence - subtraction;
            WitnessReport {
                name: if scaled { WitnessName::WScaled } else { WitnessName::WRaw },
                value: if scaled { raw / 2.0 } else { raw },
                k: None,
                phi_pair: None,
                uncertainty: None,
                element_source: source,
                defaulted_populations: Vec::new(),
            }
        }
        WitnessKind::Ksep { k, phi1, phi2 } => {
            let first = elements.cross(phi1, phi2)?;
            let exponent = 1.0 / (2.0 * k as f64);
            let mut subtraction = 0.0;
            for partition in partitions(k)? {
                let mut term = 1.0;
                for part in &partition {
                    let (p1, p2) = phi1.swapped(phi2, *part);
                    term *= (pop(p1) * pop(p2)).powf(exponent);
                }
                subtraction += term;
            }
            WitnessReport {
                name: WitnessName::Ksep,
                value: first - subtraction,
                k: Some(k),
                phi_pair: Some((phi1.to_string(), phi2.to_string())),
                uncertainty: None,
                element_source: source,
                defaulted_populations: Vec::new(),
            }
        }
    };
    drop(pop);
    defaulted.sort();
    defaulted.dedup();
    Ok(WitnessReport {
        defaulted_populations: defaulted,
        ..report
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        make_ghz, make_w, path_dephase, random_density_matrix, DephasingStrength, GHZParams,
        WParams,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn label(s: &str) -> BasisLabel {
        s.parse().unwrap()
    }

    fn prod(s: &str) -> ProductState {
        ProductState::from_label(s.parse().unwrap())
    }

    #[test]
    fn ghz_witness_examples() {
        let rho = make_ghz(&GHZParams::balanced()).to_density();
        assert!((witness_ghz(&rho) - 0.5).abs() < 1e-12);
        // experimental value for comparison: 0.49 ± 0.01 sits just below ideal
        assert!((witness_ghz(&rho) - 0.49).abs() < 0.011);
    }

    #[test]
    fn w_witness_examples() {
        let sym = make_w(&WParams::symmetric()).to_density();
        assert!((witness_w(&sym, false) - 1.0).abs() < 1e-12);
        assert!((witness_w(&sym, true) - 0.5).abs() < 1e-12);

        let asym = make_w(&WParams::asymmetric()).to_density();
        let expect = (2.0 * (0.5 / 2.0f64.sqrt() + 0.5 / 2.0f64.sqrt() + 0.25) - 1.0) / 2.0;
        assert!((witness_w(&asym, true) - expect).abs() < 1e-12);
        assert!((witness_w(&asym, true) - 0.4571).abs() < 1e-4);

        let dephased = path_dephase(&sym, DephasingStrength::new(1.0).unwrap());
        assert!((witness_w(&dephased, true) + 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn ksep_witness_examples() {
        let ghz = make_ghz(&GHZParams::balanced()).to_density();
        let v3 = witness_ksep(&ghz, 3, &prod("010"), &prod("101")).unwrap();
        assert!((v3 - 0.5).abs() < 1e-12);
        let v2 = witness_ksep(&ghz, 2, &prod("010"), &prod("101")).unwrap();
        assert!((v2 - 0.5).abs() < 1e-12);
        assert!((v2 - witness_ghz(&ghz)).abs() < 1e-12);

        assert!(witness_ksep(&ghz, 4, &prod("010"), &prod("101")).is_err());
    }

    #[test]
    fn ksep_equals_ghz_witness_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let rho = random_density_matrix(&mut rng);
            let v = witness_ksep(&rho, 2, &prod("010"), &prod("101")).unwrap();
            assert!((v - witness_ghz(&rho)).abs() < 1e-12);
        }
    }

    #[test]
    fn dephased_w_remains_inseparable() {
        let sym = path_dephase(
            &make_w(&WParams::symmetric()).to_density(),
            DephasingStrength::new(1.0).unwrap(),
        );
        let v = witness_ksep(&sym, 3, &prod("011"), &prod("002")).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);

        let asym = path_dephase(
            &make_w(&WParams::asymmetric()).to_density(),
            DephasingStrength::new(1.0).unwrap(),
        );
        let v = witness_ksep(&asym, 3, &prod("011"), &prod("002")).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ghz_witness_decays_linearly_under_dephasing() {
        let ghz = make_ghz(&GHZParams::balanced()).to_density();
        let mut last = f64::INFINITY;
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let rho = path_dephase(&ghz, DephasingStrength::new(p).unwrap());
            let v = witness_ghz(&rho);
            assert!((v - (1.0 - p) / 2.0).abs() < 1e-12);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn raw_and_scaled_w_share_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let rho = random_density_matrix(&mut rng);
            let raw = witness_w(&rho, false);
            let scaled = witness_w(&rho, true);
            assert_eq!(raw.signum(), scaled.signum());
            assert!((raw / 2.0 - scaled).abs() < 1e-15);
        }
    }

    #[test]
    fn witness_continuity_under_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = random_density_matrix(&mut rng);
        let mut m = rho.matrix().clone();
        // Hermitian perturbation of max-entry size 1e-8, trace restored
        m[(2, 7)] += Complex64::new(1e-8, 0.0);
        m[(7, 2)] += Complex64::new(1e-8, 0.0);
        m[(0, 0)] += Complex64::new(1e-8, 0.0);
        m[(1, 1)] -= Complex64::new(1e-8, 0.0);
        let perturbed = DensityMatrix::new(m).unwrap();
        assert!((witness_ghz(&rho) - witness_ghz(&perturbed)).abs() <= 1e-6);
        assert!((witness_w(&rho, true) - witness_w(&perturbed, true)).abs() <= 1e-6);
    }

    #[test]
    fn fidelity_witness_examples() {
        let ghz = make_ghz(&GHZParams::balanced());
        assert!((fidelity_witness(&ghz.to_density(), &ghz) - 0.5).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed();
        assert!(fidelity_witness(&mixed, &ghz) < 0.0);
        assert!((fidelity_witness(&mixed, &ghz) - (1.0 / 12.0 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn from_elements_matches_direct_evaluation() {
        let ghz = make_ghz(&GHZParams::balanced()).to_density();
        let map = ElementMap::from_density(&ghz, WitnessKind::Ghz);
        let report = witness_from_elements(&map, WitnessKind::Ghz, ElementSource::Exact).unwrap();
        assert!((report.value - 0.5).abs() < 1e-12);
        // swap populations were never measured
        assert!(!report.defaulted_populations.is_empty());
    }

    #[test]
    fn from_elements_w_arithmetic() {
        let w = w_component_labels();
        let mut map = ElementMap::new();
        for l in w {
            map.insert_population(l, 1.0 / 3.0);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                map.insert_cross(w[i], w[j], 1.0 / 3.0);
            }
        }
        let report =
            witness_from_elements(&map, WitnessKind::W { scaled: true }, ElementSource::Measured)
                .unwrap();
        assert!((report.value - 0.5).abs() < 1e-12);
        assert_eq!(report.element_source, ElementSource::Measured);
    }

    #[test]
    fn from_elements_missing_cross_is_named() {
        let w = w_component_labels();
        let mut map = ElementMap::new();
        for l in w {
            map.insert_population(l, 1.0 / 3.0);
        }
        map.insert_cross(w[0], w[1], 1.0 / 3.0);
        map.insert_cross(w[0], w[2], 1.0 / 3.0);
        // (002, 011) missing
        let err = witness_from_elements(&map, WitnessKind::W { scaled: true }, ElementSource::Measured)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("011") && msg.contains("002"), "{msg}");
    }

    #[test]
    fn product_state_round_trip() {
        for i in 0..12 {
            let l = BasisLabel::from_index(i).unwrap();
            let p = ProductState::from_label(l);
            assert_eq!(p.as_label(), Some(l));
            let rho = p.to_pure().to_density();
            assert!((rho.population(l) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_dictionary_is_fixed() {
        let dict = phi_dictionary();
        assert_eq!(dict.len(), 20);
        assert_eq!(dict[0], (label("010"), label("101")));
        for (a, b) in &dict {
            assert_ne!(a, b);
        }
    }
}
