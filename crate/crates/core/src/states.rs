//! Target-state constructors, separable-state samplers for property testing,
//! and the path dephasing channel.
//!
//! The W-like state is `a|101⟩ + i·b|011⟩ + c|002⟩` and the GHZ-like state is
//! `i·d|101⟩ + e|010⟩`; the `e^{iπ/2}` spin-flip phase is carried as the
//! imaginary unit on the flipped components. All witness quantities used here
//! are phase-magnitude based, so the convention only matters for beamline
//! cross-checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::{
    BasisLabel, CMatrix, CVector, DensityMatrix, PureState, Subsystem, SubsystemSet, DIM,
};

const AMP_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Real amplitudes (a, b, c) of the W-like state, a² + b² + c² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WParams {
    a: f64,
    b: f64,
    c: f64,
}

impl WParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a < 0.0 || b < 0.0 || c < 0.0 {
            return Err(Error::InvalidParameter(
                "W amplitudes must be nonnegative".into(),
            ));
        }
        let norm = a * a + b * b + c * c;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(WParams { a, b, c })
    }

    /// a = b = c = 1/√3.
    pub fn symmetric() -> Self {
        let v = 1.0 / 3.0f64.sqrt();
        WParams { a: v, b: v, c: v }
    }

    /// a = 1/√2, b = c = 1/2.
    pub fn asymmetric() -> Self {
        WParams {
            a: std::f64::consts::FRAC_1_SQRT_2,
            b: 0.5,
            c: 0.5,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Real amplitudes (d, e) of the GHZ-like state, d² + e² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GHZParams {
    d: f64,
    e: f64,
}

impl GHZParams {
    pub fn new(d: f64, e: f64) -> Result<Self> {
        if d < 0.0 || e < 0.0 {
            return Err(Error::InvalidParameter(
                "GHZ amplitudes must be nonnegative".into(),
            ));
        }
        let norm = d * d + e * e;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(GHZParams { d, e })
    }

    /// d = e = 1/√2.
    pub fn balanced() -> Self {
        let v = std::f64::consts::FRAC_1_SQRT_2;
        GHZParams { d: v, e: v }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn e(&self) -> f64 {
        self.e
    }
}

/// Path dephasing strength p ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingStrength(f64);

impl DephasingStrength {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dephasing strength {p} not in [0, 1]"
            )));
        }
        Ok(DephasingStrength(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn w_labels() -> [BasisLabel; 3] {
    [
        BasisLabel::new(1, 0, 1).unwrap(),
        BasisLabel::new(0, 1, 1).unwrap(),
        BasisLabel::new(0, 0, 2).unwrap(),
    ]
}

/// `a|101⟩ + i·b|011⟩ + c|002⟩`.
pub fn make_w(params: &WParams) -> PureState {
    let [w1, w2, w3] = w_labels();
    PureState::from_sparse(&[
        (w1, c(params.a)),
        (w2, Complex64::new(0.0, params.b)),
        (w3, c(params.c)),
    ])
    .expect("normalized by WParams")
}

/// `i·d|101⟩ + e|010⟩`.
pub fn make_ghz(params: &GHZParams) -> PureState {
    PureState::from_sparse(&[
        (BasisLabel::new(1, 0, 1).unwrap(), Complex64::new(0.0, params.d)),
        (BasisLabel::new(0, 1, 0).unwrap(), c(params.e)),
    ])
    .expect("normalized by GHZParams")
}

/// Haar-like random unit vector: normalized complex Gaussian amplitudes.
pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .collect();
        let norm_sq: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq > 1e-12 {
            let norm = norm_sq.sqrt();
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Builds a pure state as a tensor product of factors over the parts of a
/// partition. Parts must disjointly cover {1,2,3}; within a part the factor is
/// indexed in ascending subsystem order, last subsystem fastest.
pub fn product_pure(parts: &[(SubsystemSet, Vec<Complex64>)]) -> Result<PureState> {
    let mut covered = 0u8;
    for (set, factor) in parts {
        let dim: usize = set.members().map(|s| s.dim()).product();
        if factor.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: factor.len(),
            });
        }
        for s in set.members() {
            let bit = 1 << (s.number() - 1);
            if covered & bit != 0 {
                return Err(Error::InvalidSubsystemSet(format!(
                    "subsystem {} appears in two parts",
                    s.number()
                )));
            }
            covered |= bit;
        }
    }
    if covered != 0b111 {
        return Err(Error::InvalidSubsystemSet(
            "partition does not cover {1,2,3}".into(),
        ));
    }

    let mut amps = CVector::zeros(DIM);
    for i in 0..DIM {
        let label = BasisLabel::from_index(i)?;
        let mut amp = c(1.0);
        for (set, factor) in parts {
            let mut idx = 0usize;
            for s in set.members() {
                idx = idx * s.dim() + label.component(s) as usize;
            }
            amp *= factor[idx];
        }
        amps[i] = amp;
    }
    PureState::new(amps)
}

/// A pure state that is a product across the bipartition {single | rest}.
pub fn random_bipartite_product<R: Rng>(single: Subsystem, rng: &mut R) -> PureState {
    let set = SubsystemSet::single(single);
    let rest = set.complement();
    let rest_dim: usize = rest.members().map(|s| s.dim()).product();
    let parts = vec![
        (set, random_unit_vector(single.dim(), rng)),
        (rest, random_unit_vector(rest_dim, rng)),
    ];
    product_pure(&parts).expect("valid bipartition")
}

/// A pure state that is a product across all three subsystems.
pub fn random_full_product<R: Rng>(rng: &mut R) -> PureState {
    let parts: Vec<(SubsystemSet, Vec<Complex64>)> = Subsystem::ALL
        .into_iter()
        .map(|s| (SubsystemSet::single(s), random_unit_vector(s.dim(), rng)))
        .collect();
    product_pure(&parts).expect("valid partition")
}

fn dirichlet_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Convex mixture of 2–6 pure states, each a product across one bipartition.
/// With `partition: None` the bipartition is drawn independently per term,
/// exercising decompositions whose partitions differ term by term.
pub fn sample_biseparable<R: Rng>(partition: Option<Subsystem>, rng: &mut R) -> DensityMatrix {
    let n = rng.gen_range(2..=6);
    let weights = dirichlet_weights(n, rng);
    let terms: Vec<(f64, DensityMatrix)> = weights
        .into_iter()
        .map(|w| {
            let single = partition.unwrap_or_else(|| {
                Subsystem::ALL[rng.gen_range(0..3)]
            });
            (w, random_bipartite_product(single, rng).to_density())
        })
        .collect();
    DensityMatrix::mixture(&terms).expect("valid mixture")
}

/// Mixture of pure states each factoring into k parts: k = 2 is biseparable,
/// k = 3 fully product.
pub fn sample_ksep<R: Rng>(k: usize, rng: &mut R) -> Result<DensityMatrix> {
    match k {
        2 => Ok(sample_biseparable(None, rng)),
        3 => {
            let n = rng.gen_range(2..=6);
            let weights = dirichlet_weights(n, rng);
            let terms: Vec<(f64, DensityMatrix)> = weights
                .into_iter()
                .map(|w| (w, random_full_product(rng).to_density()))
                .collect();
            DensityMatrix::mixture(&terms)
        }
        _ => Err(Error::InvalidSeparabilityOrder(k)),
    }
}

/// Full-rank random density matrix from the Ginibre ensemble, ρ = GG†/tr GG†.
pub fn random_density_matrix<R: Rng>(rng: &mut R) -> DensityMatrix {
    let g = DMatrix::from_fn(DIM, DIM, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m: CMatrix = &g * g.adjoint();
    let trace = m.trace().re;
    DensityMatrix::new_unchecked(m / c(trace))
}

/// Path dephasing channel `ρ → (1−p)ρ + p(D₀ρD₀ + D₁ρD₁)` with D_q the
/// projector onto path value q: entries between different path values scale by
/// (1−p), all others are unchanged.
pub fn path_dephase(rho: &DensityMatrix, strength: DephasingStrength) -> DensityMatrix {
    let p = strength.value();
    let mut m = rho.matrix().clone();
    for i in 0..DIM {
        for j in 0..DIM {
            let li = BasisLabel::from_index(i).unwrap();
            let lj = BasisLabel::from_index(j).unwrap();
            if li.path() != lj.path() {
                m[(i, j)] *= c(1.0 - p);
            }
        }
    }
    DensityMatrix::new_unchecked(m)
}

/// Overlap ⟨target|ρ|target⟩ ∈ [0, 1].
pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> f64 {
    let v = target.amplitudes();
    let f = (v.adjoint() * rho.matrix() * v)[(0, 0)];
    debug_assert!(f.im.abs() < AMP_TOL * 100.0);
    f.re.clamp(0.0, 1.0)
}
