//! Linear algebra over the composite space `H_path ⊗ H_spin ⊗ H_energy` with
//! dimensions (2, 2, 3), plus the two-copy permutation machinery used by the
//! nonlinear witnesses.
//!
//! Basis ordering is fixed to (path, spin, energy) with energy fastest-varying,
//! so a ket string like `|101⟩` (path II, spin down, energy 1) reads off
//! directly: `index = (path·2 + spin)·3 + energy`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const PATH_DIM: usize = 2;
pub const SPIN_DIM: usize = 2;
pub const ENERGY_DIM: usize = 3;
/// Dimension of the composite space.
pub const DIM: usize = PATH_DIM * SPIN_DIM * ENERGY_DIM;
/// Dimension of the two-copy space.
pub const PAIR_DIM: usize = DIM * DIM;

/// Unit-norm tolerance after constructors and unitary application.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity and trace tolerance for density matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues above this (negative) floor count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// One of the three degrees of freedom. Numbering follows the ket strings:
/// subsystem 1 is path, 2 is spin, 3 is energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Path,
    Spin,
    Energy,
}

impl Subsystem {
    pub const ALL: [Subsystem; 3] = [Subsystem::Path, Subsystem::Spin, Subsystem::Energy];

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Subsystem::Path),
            2 => Ok(Subsystem::Spin),
            3 => Ok(Subsystem::Energy),
            _ => Err(Error::InvalidSubsystemSet(format!(
                "subsystem number {n} not in 1..=3"
            ))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Subsystem::Path => 1,
            Subsystem::Spin => 2,
            Subsystem::Energy => 3,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Subsystem::Path => PATH_DIM,
            Subsystem::Spin => SPIN_DIM,
            Subsystem::Energy => ENERGY_DIM,
        }
    }
}

/// A (path, spin, energy) triple addressing one of the 12 basis states.
///
/// Conventions: path I = 0, path II = 1; spin down = 0, spin up = 1; energy
/// index k means total energy `E0 − k·ħω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    path: u8,
    spin: u8,
    energy: u8,
}

impl BasisLabel {
    pub fn new(path: u8, spin: u8, energy: u8) -> Result<Self> {
        if path > 1 || spin > 1 || energy > 2 {
            return Err(Error::InvalidLabel { path, spin, energy });
        }
        Ok(BasisLabel { path, spin, energy })
    }

    pub fn path(self) -> u8 {
        self.path
    }

    pub fn spin(self) -> u8 {
        self.spin
    }

    pub fn energy(self) -> u8 {
        self.energy
    }

    /// Bijective linear index `(path·2 + spin)·3 + energy`.
    pub fn index(self) -> usize {
        (self.path as usize * SPIN_DIM + self.spin as usize) * ENERGY_DIM + self.energy as usize
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index >= DIM {
            return Err(Error::InvalidIndex(index));
        }
        let energy = (index % ENERGY_DIM) as u8;
        let rest = index / ENERGY_DIM;
        let spin = (rest % SPIN_DIM) as u8;
        let path = (rest / SPIN_DIM) as u8;
        Ok(BasisLabel { path, spin, energy })
    }

    pub fn component(self, sub: Subsystem) -> u8 {
        match sub {
            Subsystem::Path => self.path,
            Subsystem::Spin => self.spin,
            Subsystem::Energy => self.energy,
        }
    }

    fn with_component(mut self, sub: Subsystem, value: u8) -> Self {
        match sub {
            Subsystem::Path => self.path = value,
            Subsystem::Spin => self.spin = value,
            Subsystem::Energy => self.energy = value,
        }
        self
    }

    /// Exchanges the components named by `subs` between `self` and `other`.
    pub fn swapped(self, other: Self, subs: SubsystemSet) -> (Self, Self) {
        let mut a = self;
        let mut b = other;
        for sub in subs.members() {
            let (va, vb) = (self.component(sub), other.component(sub));
            a = a.with_component(sub, vb);
            b = b.with_component(sub, va);
        }
        (a, b)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.path, self.spin, self.energy)
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    /// Parses a three-digit ket string like "101" (path, spin, energy).
    fn from_str(s: &str) -> Result<Self> {
        let digits: Vec<u8> = s
            .chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidSubsystemSet(format!("bad ket string {s:?}")))
            })
            .collect::<Result<_>>()?;
        if digits.len() != 3 {
            return Err(Error::InvalidSubsystemSet(format!(
                "ket string {s:?} must have exactly three digits"
            )));
        }
        BasisLabel::new(digits[0], digits[1], digits[2])
    }
}

/// A nonempty subset of the three subsystems {1: path, 2: spin, 3: energy}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsystemSet {
    mask: u8,
}

impl SubsystemSet {
    pub fn new(members: &[u8]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidSubsystemSet("empty subsystem set".into()));
        }
        let mut mask = 0u8;
        for &m in members {
            let sub = Subsystem::from_number(m)?;
            let bit = 1 << (sub.number() - 1);
            if mask & bit != 0 {
                return Err(Error::InvalidSubsystemSet(format!(
                    "duplicate subsystem {m}"
                )));
            }
            mask |= bit;
        }
        Ok(SubsystemSet { mask })
    }

    pub fn single(sub: Subsystem) -> Self {
        SubsystemSet {
            mask: 1 << (sub.number() - 1),
        }
    }

    pub fn full() -> Self {
        SubsystemSet { mask: 0b111 }
    }

    pub fn complement(self) -> Self {
        SubsystemSet {
            mask: !self.mask & 0b111,
        }
    }

    pub fn contains(self, sub: Subsystem) -> bool {
        self.mask & (1 << (sub.number() - 1)) != 0
    }

    /// Members in ascending subsystem order.
    pub fn members(self) -> impl Iterator<Item = Subsystem> {
        let mask = self.mask;
        Subsystem::ALL
            .into_iter()
            .filter(move |s| mask & (1 << (s.number() - 1)) != 0)
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    /// All 7 nonempty subsets.
    pub fn all_nonempty() -> impl Iterator<Item = SubsystemSet> {
        (1u8..8).map(|mask| SubsystemSet { mask })
    }
}

impl fmt::Display for SubsystemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nums: Vec<String> = self.members().map(|s| s.number().to_string()).collect();
        write!(f, "{{{}}}", nums.join(","))
    }
}

/// Complex amplitude vector over the 12-dimensional composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    /// Builds a state from 12 amplitudes, enforcing unit norm.
    pub fn new(amps: CVector) -> Result<Self> {
        if amps.len() != DIM {
            return Err(Error::DimensionMismatch {
                expected: DIM,
                actual: amps.len(),
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm_sq));
        }
        // absorb rounding noise so downstream invariants hold to NORM_TOL
        let amps = amps / c(norm_sq.sqrt());
        Ok(PureState { amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq < 1e-30 {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(PureState {
            amps: amps / c(norm_sq.sqrt()),
        })
    }

    pub fn basis(label: BasisLabel) -> Self {
        let mut amps = CVector::zeros(DIM);
        amps[label.index()] = c(1.0);
        PureState { amps }
    }

    pub fn from_sparse(entries: &[(BasisLabel, Complex64)]) -> Result<Self> {
        let mut amps = CVector::zeros(DIM);
        for &(label, amp) in entries {
            amps[label.index()] = amp;
        }
        PureState::new(amps)
    }

    pub fn amplitude(&self, label: BasisLabel) -> Complex64 {
        self.amps[label.index()]
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amps * self.amps.adjoint();
        DensityMatrix { m }
    }
}

/// Hermitian, unit-trace, positive semidefinite 12×12 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != DIM || m.ncols() != DIM {
            return Err(Error::DimensionMismatch {
                expected: DIM,
                actual: m.nrows().max(m.ncols()),
            });
        }
        let rho = DensityMatrix { m };
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix that is valid by construction (e.g. a convex mixture of
    /// outer products). Debug builds still validate.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        let rho = DensityMatrix { m };
        debug_assert!(rho.validate().is_ok());
        rho
    }

    pub fn validate(&self) -> Result<()> {
        let mut herm = 0.0f64;
        for i in 0..DIM {
            for j in i..DIM {
                let d = (self.m[(i, j)] - self.m[(j, i)].conj()).norm();
                herm = herm.max(d);
            }
        }
        if herm > HERMITICITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let trace = self.m.trace();
        if (trace.re - 1.0).abs() > HERMITICITY_TOL || trace.im.abs() > HERMITICITY_TOL {
            return Err(Error::BadTrace(trace.re));
        }
        let eig = self.m.clone().symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.to_density()
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: CMatrix::identity(DIM, DIM) * c(1.0 / DIM as f64),
        }
    }

    /// Convex mixture Σ wᵢ ρᵢ; weights are normalized.
    pub fn mixture(terms: &[(f64, DensityMatrix)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("empty mixture".into()));
        }
        let total: f64 = terms.iter().map(|(w, _)| w).sum();
        if total <= 0.0 || terms.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidParameter(
                "mixture weights must be nonnegative with positive sum".into(),
            ));
        }
        let mut m = CMatrix::zeros(DIM, DIM);
        for (w, rho) in terms {
            m += &rho.m * c(w / total);
        }
        Ok(DensityMatrix::new_unchecked(m))
    }

    /// ⟨bra|ρ|ket⟩.
    pub fn element(&self, bra: BasisLabel, ket: BasisLabel) -> Complex64 {
        self.m[(bra.index(), ket.index())]
    }

    /// Diagonal entry ⟨label|ρ|label⟩.
    pub fn population(&self, label: BasisLabel) -> f64 {
        self.m[(label.index(), label.index())].re
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }
}

/// Tensor product of matrices over the factor spaces, in (path, spin, energy)
/// order. Dimensions must be (2, 2, 3).
pub fn kron3(path: &CMatrix, spin: &CMatrix, energy: &CMatrix) -> Result<CMatrix> {
    check_square(path, PATH_DIM)?;
    check_square(spin, SPIN_DIM)?;
    check_square(energy, ENERGY_DIM)?;
    Ok(path.kronecker(spin).kronecker(energy))
}

/// Tensor product of factor vectors, consistent with [`BasisLabel::index`].
pub fn kron3_vec(path: &CVector, spin: &CVector, energy: &CVector) -> Result<CVector> {
    check_len(path, PATH_DIM)?;
    check_len(spin, SPIN_DIM)?;
    check_len(energy, ENERGY_DIM)?;
    let ps = path.kronecker(spin);
    Ok(ps.kronecker(energy))
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

fn check_len(v: &CVector, dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Closed-form two-copy expectation
/// `⟨xy|Π_subs ρ⊗ρ Π_subs|xy⟩ = ⟨x'|ρ|x'⟩·⟨y'|ρ|y'⟩`,
/// where x', y' are x, y with the components in `subs` exchanged.
///
/// This is the production path for every witness √-term; the dense
/// [`TwoCopyOracle`] exists to cross-check it.
pub fn swapped_pair_population(
    rho: &DensityMatrix,
    x: BasisLabel,
    y: BasisLabel,
    subs: SubsystemSet,
) -> f64 {
    let (xs, ys) = x.swapped(y, subs);
    rho.population(xs) * rho.population(ys)
}

/// Index of the two-copy basis state |xy⟩ after applying Π_subs.
fn permuted_pair_index(pair_index: usize, subs: SubsystemSet) -> usize {
    let x = BasisLabel::from_index(pair_index / DIM).expect("pair index in range");
    let y = BasisLabel::from_index(pair_index % DIM).expect("pair index in range");
    let (xs, ys) = x.swapped(y, subs);
    xs.index() * DIM + ys.index()
}

/// Explicit 144×144 permutation matrix Π_subs exchanging the components in
/// `subs` between the two copies. Satisfies Π² = identity.
pub fn permutation_matrix(subs: SubsystemSet) -> CMatrix {
    let mut p = CMatrix::zeros(PAIR_DIM, PAIR_DIM);
    for j in 0..PAIR_DIM {
        p[(permuted_pair_index(j, subs), j)] = c(1.0);
    }
    p
}

/// Dense reference for the two-copy expectations: materializes ρ⊗ρ on the
/// 144-dimensional doubled space and reads diagonal elements of Π (ρ⊗ρ) Π.
pub struct TwoCopyOracle {
    doubled: CMatrix,
}

impl TwoCopyOracle {
    pub fn new(rho: &DensityMatrix) -> Self {
        TwoCopyOracle {
            doubled: rho.matrix().kronecker(rho.matrix()),
        }
    }

    /// `⟨xy|Π_subs (ρ⊗ρ) Π_subs|xy⟩`. Since Π is an involutory permutation,
    /// the sandwiched diagonal entry at |xy⟩ is the ρ⊗ρ diagonal entry at the
    /// permuted index.
    pub fn population(&self, x: BasisLabel, y: BasisLabel, subs: SubsystemSet) -> f64 {
        let idx = permuted_pair_index(x.index() * DIM + y.index(), subs);
        self.doubled[(idx, idx)].re
    }
}

/// One-shot convenience wrapper around [`TwoCopyOracle`].
pub fn two_copy_oracle(
    rho: &DensityMatrix,
    x: BasisLabel,
    y: BasisLabel,
    subs: SubsystemSet,
) -> f64 {
    TwoCopyOracle::new(rho).population(x, y, subs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{self, GHZParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn label(s: &str) -> BasisLabel {
        s.parse().unwrap()
    }

    fn ideal_ghz() -> DensityMatrix {
        states::make_ghz(&GHZParams::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2).unwrap()).to_density()
    }

    #[test]
    fn label_index_examples() {
        assert_eq!(label("000").index(), 0);
        assert_eq!(label("101").index(), 7);
        assert_eq!(label("011").index(), 4);
    }

    #[test]
    fn label_index_bijective() {
        for i in 0..DIM {
            let l = BasisLabel::from_index(i).unwrap();
            assert_eq!(l.index(), i);
        }
        assert!(BasisLabel::from_index(12).is_err());
        assert!(BasisLabel::new(2, 0, 0).is_err());
        assert!(BasisLabel::new(0, 0, 3).is_err());
    }

    #[test]
    fn matrix_element_examples() {
        let rho = ideal_ghz();
        // cross term of the d = e = 1/√2 GHZ state carries magnitude 1/2
        assert!((rho.element(label("010"), label("101")).norm() - 0.5).abs() < 1e-12);
        for i in 0..DIM {
            let l = BasisLabel::from_index(i).unwrap();
            let d = rho.element(l, l);
            assert!(d.im.abs() < 1e-15 && d.re >= -1e-15);
        }
        let mixed = DensityMatrix::maximally_mixed();
        assert!((mixed.element(label("000"), label("000")).re - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn swapped_pair_population_examples() {
        let rho = ideal_ghz();
        let s1 = SubsystemSet::new(&[1]).unwrap();
        assert_eq!(
            swapped_pair_population(&rho, label("010"), label("101"), s1),
            0.0
        );
        // equal labels: swap is the identity
        let p = rho.population(label("010"));
        assert!(
            (swapped_pair_population(&rho, label("010"), label("010"), s1) - p * p).abs() < 1e-15
        );
        let mixed = DensityMatrix::maximally_mixed();
        for subs in SubsystemSet::all_nonempty() {
            assert!(
                (swapped_pair_population(&mixed, label("011"), label("110"), subs) - 1.0 / 144.0)
                    .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn oracle_matches_closed_form_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let rho = states::random_density_matrix(&mut rng);
            let oracle = TwoCopyOracle::new(&rho);
            for subs in SubsystemSet::all_nonempty() {
                for _ in 0..20 {
                    let x = BasisLabel::from_index(rand::Rng::gen_range(&mut rng, 0..DIM)).unwrap();
                    let y = BasisLabel::from_index(rand::Rng::gen_range(&mut rng, 0..DIM)).unwrap();
                    let a = oracle.population(x, y, subs);
                    let b = swapped_pair_population(&rho, x, y, subs);
                    assert!((a - b).abs() < 1e-10, "oracle {a} vs closed form {b}");
                }
            }
        }
    }

    #[test]
    fn oracle_full_swap_on_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = states::sample_ksep(3, &mut rng).unwrap();
        let x = label("011");
        let y = label("110");
        let v = two_copy_oracle(&rho, x, y, SubsystemSet::full());
        assert!((v - rho.population(y) * rho.population(x)).abs() < 1e-12);
    }

    #[test]
    fn oracle_ghz_spin_swap_vanishes() {
        let rho = ideal_ghz();
        let s2 = SubsystemSet::new(&[2]).unwrap();
        assert!(two_copy_oracle(&rho, label("010"), label("101"), s2).abs() < 1e-15);
    }

    #[test]
    fn permutation_matrices_are_involutions() {
        for subs in SubsystemSet::all_nonempty() {
            let p = permutation_matrix(subs);
            for e in p.iter() {
                assert!(e.im == 0.0 && (e.re == 0.0 || e.re == 1.0));
            }
            for col in 0..PAIR_DIM {
                assert_eq!(p.column(col).iter().filter(|e| e.re == 1.0).count(), 1);
            }
            let sq = &p * &p;
            assert_eq!(sq, CMatrix::identity(PAIR_DIM, PAIR_DIM));
        }
    }

    // ties the fast diagonal gather to the fully explicit matrix sandwich
    #[test]
    fn oracle_gather_matches_explicit_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let rho = states::random_density_matrix(&mut rng);
            let doubled = rho.matrix().kronecker(rho.matrix());
            let oracle = TwoCopyOracle::new(&rho);
            for subs in SubsystemSet::all_nonempty() {
                let p = permutation_matrix(subs);
                let sandwiched = &p * &doubled * &p;
                for i in 0..DIM {
                    for j in 0..DIM {
                        let x = BasisLabel::from_index(i).unwrap();
                        let y = BasisLabel::from_index(j).unwrap();
                        let lhs = sandwiched[(i * DIM + j, i * DIM + j)].re;
                        assert!((lhs - oracle.population(x, y, subs)).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_examples() {
        let path = CVector::from_vec(vec![c(0.0), c(1.0)]);
        let spin = CVector::from_vec(vec![c(1.0), c(0.0)]);
        let energy = CVector::from_vec(vec![c(0.0), c(1.0), c(0.0)]);
        let v = kron3_vec(&path, &spin, &energy).unwrap();
        for i in 0..DIM {
            let expect = if i == 7 { 1.0 } else { 0.0 };
            assert_eq!(v[i].re, expect);
        }

        let id = kron3(
            &CMatrix::identity(2, 2),
            &CMatrix::identity(2, 2),
            &CMatrix::identity(3, 3),
        )
        .unwrap();
        assert_eq!(id, CMatrix::identity(DIM, DIM));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVector::from_vec(vec![c(s), c(s)]);
        let up = CVector::from_vec(vec![c(0.0), c(1.0)]);
        let e0 = CVector::from_vec(vec![c(1.0), c(0.0), c(0.0)]);
        let v = kron3_vec(&plus, &up, &e0).unwrap();
        assert!((v[3].re - s).abs() < 1e-15 && (v[9].re - s).abs() < 1e-15);
        assert_eq!(v.iter().filter(|a| a.norm() > 1e-12).count(), 2);

        let bad = CVector::from_vec(vec![c(1.0)]);
        assert!(kron3_vec(&bad, &up, &e0).is_err());
    }

    #[test]
    fn ket_string_round_trip() {
        for i in 0..DIM {
            let l = BasisLabel::from_index(i).unwrap();
            let parsed: BasisLabel = l.to_string().parse().unwrap();
            assert_eq!(parsed, l);
        }
        assert!("030".parse::<BasisLabel>().is_err());
        assert!("01".parse::<BasisLabel>().is_err());
    }

    #[test]
    fn density_matrix_validation_rejects_bad_inputs() {
        let mut m = CMatrix::identity(DIM, DIM) * c(1.0 / 12.0);
        m[(0, 1)] = Complex64::new(0.0, 0.5);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian(_))));

        let m = CMatrix::identity(DIM, DIM);
        assert!(matches!(DensityMatrix::new(m), Err(Error::BadTrace(_))));

        let mut m = CMatrix::zeros(DIM, DIM);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive(_))));
    }
}
