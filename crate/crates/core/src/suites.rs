//! Randomized non-positivity suites: each witness must stay non-positive on
//! every state of the class it is built to exclude.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::{sample_biseparable, sample_ksep};
use crate::tensor::Subsystem;
use crate::witnesses::{phi_dictionary, witness_ghz, witness_ksep, witness_w, ProductState};

/// Values up to this far above zero still count as non-positive; the sqrt
/// terms amplify float noise near vanishing populations.
pub const NONPOSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub samples: usize,
    pub max_value: f64,
    pub violations: usize,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, value: f64) {
        self.max_value = self.max_value.max(value);
        if value > NONPOSITIVITY_TOL {
            self.violations += 1;
        }
    }

    fn empty(samples: usize) -> Self {
        SuiteOutcome {
            samples,
            max_value: f64::NEG_INFINITY,
            violations: 0,
        }
    }
}

fn partitions_cycle(i: usize) -> Option<Subsystem> {
    match i % 4 {
        0 => Some(Subsystem::Path),
        1 => Some(Subsystem::Spin),
        2 => Some(Subsystem::Energy),
        _ => None,
    }
}

/// GHZ witness over biseparable mixtures, cycling through the three fixed
/// bipartitions and the mixed-partition sampler.
pub fn ghz_suite(samples: usize, seed: u64) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = SuiteOutcome::empty(samples);
    for i in 0..samples {
        let rho = sample_biseparable(partitions_cycle(i), &mut rng);
        outcome.record(witness_ghz(&rho));
    }
    outcome
}

/// Scaled W witness over biseparable mixtures.
pub fn w_suite(samples: usize, seed: u64) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = SuiteOutcome::empty(samples);
    for i in 0..samples {
        let rho = sample_biseparable(partitions_cycle(i), &mut rng);
        outcome.record(witness_w(&rho, true));
    }
    outcome
}

/// k-separability witness over k-separable mixtures, maximized over the
/// fixed dictionary of basis-state pairs for each sample.
pub fn ksep_suite(k: usize, samples: usize, seed: u64) -> Result<SuiteOutcome> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidSeparabilityOrder(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dictionary: Vec<(ProductState, ProductState)> = phi_dictionary()
        .into_iter()
        .map(|(a, b)| (ProductState::from_label(a), ProductState::from_label(b)))
        .collect();
    let mut outcome = SuiteOutcome::empty(samples);
    for _ in 0..samples {
        let rho = sample_ksep(k, &mut rng)?;
        let mut best = f64::NEG_INFINITY;
        for (phi1, phi2) in &dictionary {
            best = best.max(witness_ksep(&rho, k, phi1, phi2)?);
        }
        outcome.record(best);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_suite_nonpositive() {
        let outcome = ghz_suite(200, 7);
        assert_eq!(outcome.samples, 200);
        assert!(outcome.passed(), "max value {}", outcome.max_value);
    }

    #[test]
    fn w_suite_nonpositive() {
        let outcome = w_suite(200, 11);
        assert!(outcome.passed(), "max value {}", outcome.max_value);
    }

    #[test]
    fn ksep_suites_nonpositive() {
        for k in [2, 3] {
            let outcome = ksep_suite(k, 100, 13).unwrap();
            assert!(outcome.passed(), "k={k}, max value {}", outcome.max_value);
        }
        assert!(ksep_suite(4, 10, 1).is_err());
    }

    #[test]
    fn suites_are_deterministic() {
        let a = ghz_suite(50, 42);
        let b = ghz_suite(50, 42);
        assert_eq!(a.max_value, b.max_value);
    }
}
