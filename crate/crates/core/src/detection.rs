//! From internal conversion efficiency to detected counts, and the
//! pump-toggle search for pump-induced background.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::poisson_draw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainElement {
    pub name: String,
    pub transmission: f64,
}

impl ChainElement {
    pub fn new(name: impl Into<String>, transmission: f64) -> Result<Self> {
        let e = Self {
            name: name.into(),
            transmission,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.transmission > 0.0 && self.transmission <= 1.0) {
            return Err(Error::domain(format!(
                "transmission of `{}` must lie in (0, 1], got {}",
                self.name, self.transmission
            )));
        }
        Ok(())
    }
}

/// Three 90 % bandpass filters, the uncoated sapphire exit window and the
/// dichroic mirrors (aggregate).
pub fn default_chain() -> Vec<ChainElement> {
    let e = |n: &str, t| ChainElement {
        name: n.to_string(),
        transmission: t,
    };
    vec![
        e("bandpass_1", 0.90),
        e("bandpass_2", 0.90),
        e("bandpass_3", 0.90),
        e("exit_window", 0.854),
        e("dichroics", 0.915),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub quantum_efficiency: f64,
    /// Mean dark count rate, counts/s.
    pub dark_rate: f64,
    /// Peak fractional excursion of the dark rate.
    pub drift_fraction: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            quantum_efficiency: 0.27,
            dark_rate: 3.5,
            drift_fraction: 0.03,
        }
    }
}

impl DetectorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return Err(Error::domain("quantum efficiency must lie in (0, 1]"));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::domain("dark rate must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.drift_fraction) {
            return Err(Error::domain("drift fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

pub fn chain_transmission(elements: &[ChainElement]) -> Result<f64> {
    if elements.is_empty() {
        return Err(Error::domain("optical chain is empty"));
    }
    elements.iter().try_fold(1.0, |acc, e| {
        e.validate()?;
        Ok(acc * e.transmission)
    })
}

/// Probability that a probe photon is converted and registered.
pub fn detection_probability(
    internal_eta: f64,
    chain: &[ChainElement],
    detector: &DetectorSpec,
) -> Result<f64> {
    if !(internal_eta >= 0.0 && internal_eta.is_finite()) {
        return Err(Error::domain("internal efficiency must be non-negative"));
    }
    detector.validate()?;
    Ok(internal_eta * chain_transmission(chain)? * detector.quantum_efficiency)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    On,
    Off,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::On => "on",
            Phase::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToggleRecord {
    pub cycle: usize,
    pub phase: Phase,
    pub counts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToggleResult {
    /// Mean rates with pumps on and off, counts/s.
    pub rate_on: f64,
    pub rate_off: f64,
    pub difference: f64,
    pub difference_sigma: f64,
    pub significance: f64,
    #[serde(skip)]
    pub records: Vec<ToggleRecord>,
}

/// Alternates `cycle_seconds` with pumps on and `cycle_seconds` off for
/// `n_cycles` cycles. The dark rate takes one random-walk step per cycle
/// (σ = drift/10) and is reflected back inside ±drift. The significance is
/// the mean paired on−off rate difference over its standard error.
pub fn simulate_toggle_experiment(
    detector: &DetectorSpec,
    extra_rate: f64,
    n_cycles: usize,
    cycle_seconds: f64,
    seed: u64,
) -> Result<ToggleResult> {
    detector.validate()?;
    if !(cycle_seconds > 0.0 && cycle_seconds.is_finite()) {
        return Err(Error::domain("cycle duration must be positive"));
    }
    if n_cycles < 2 {
        return Err(Error::domain("toggle experiment needs at least 2 cycles"));
    }
    if !(extra_rate >= 0.0 && extra_rate.is_finite()) {
        return Err(Error::domain("extra rate must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = detector.drift_fraction;
    let step = Normal::new(0.0, d / 10.0).map_err(|e| Error::domain(e.to_string()))?;
    let mut excursion = 0.0f64;
    let mut records = Vec::with_capacity(2 * n_cycles);
    let mut diffs = Vec::with_capacity(n_cycles);
    let (mut on_total, mut off_total) = (0.0, 0.0);
    for cycle in 0..n_cycles {
        if d > 0.0 {
            excursion += step.sample(&mut rng);
            while excursion.abs() > d {
                excursion = excursion.signum() * 2.0 * d - excursion;
            }
        }
        let dark = detector.dark_rate * (1.0 + excursion);
        let on = poisson_draw(&mut rng, (dark + extra_rate) * cycle_seconds);
        let off = poisson_draw(&mut rng, dark * cycle_seconds);
        records.push(ToggleRecord {
            cycle,
            phase: Phase::On,
            counts: on,
        });
        records.push(ToggleRecord {
            cycle,
            phase: Phase::Off,
            counts: off,
        });
        on_total += on;
        off_total += off;
        diffs.push((on - off) / cycle_seconds);
    }
    let n = n_cycles as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sem = (var / n).sqrt();
    let significance = if sem > 0.0 { mean / sem } else { 0.0 };
    Ok(ToggleResult {
        rate_on: on_total / (n * cycle_seconds),
        rate_off: off_total / (n * cycle_seconds),
        difference: mean,
        difference_sigma: sem,
        significance,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn filters() -> Vec<ChainElement> {
        (0..3)
            .map(|i| ChainElement::new(format!("f{i}"), 0.9).unwrap())
            .collect()
    }

    #[test]
    fn transmissions() {
        assert!((chain_transmission(&filters()).unwrap() - 0.729).abs() < 1e-12);
        assert!((chain_transmission(&default_chain()).unwrap() - 0.57).abs() < 0.01);
        assert_eq!(
            chain_transmission(&[ChainElement::new("x", 1.0).unwrap()]).unwrap(),
            1.0
        );
        assert!(chain_transmission(&[]).is_err());
        assert!(ChainElement::new("bad", 0.0).is_err());
        assert!(ChainElement::new("bad", 1.2).is_err());
    }

    #[test]
    fn probabilities() {
        let det = DetectorSpec::default();
        let p = detection_probability(1e-9, &default_chain(), &det).unwrap();
        assert!((p - 1.54e-10).abs() < 0.01e-10, "{p}");
        assert_eq!(
            detection_probability(0.0, &default_chain(), &det).unwrap(),
            0.0
        );
        let perfect = DetectorSpec {
            quantum_efficiency: 1.0,
            ..det
        };
        let unity = [ChainElement::new("none", 1.0).unwrap()];
        assert_eq!(detection_probability(3e-9, &unity, &perfect).unwrap(), 3e-9);
    }

    #[test]
    fn toggle_null_and_signal() {
        let det = DetectorSpec::default();
        let mut quiet = 0;
        let mut loud = 0;
        for seed in 0..50 {
            let null = simulate_toggle_experiment(&det, 0.0, 100, 10.0, seed).unwrap();
            if null.significance.abs() < 2.0 {
                quiet += 1;
            }
            let sig = simulate_toggle_experiment(&det, 1.0, 100, 10.0, seed).unwrap();
            if sig.significance > 5.0 {
                loud += 1;
            }
        }
        assert!(quiet >= 45, "{quiet}");
        assert!(loud >= 45, "{loud}");
    }

    #[test]
    fn toggle_records_and_rates() {
        let r = simulate_toggle_experiment(&DetectorSpec::default(), 0.5, 20, 5.0, 3).unwrap();
        assert_eq!(r.records.len(), 40);
        let on: f64 = r
            .records
            .iter()
            .filter(|x| x.phase == Phase::On)
            .map(|x| x.counts)
            .sum();
        assert!((r.rate_on - on / 100.0).abs() < 1e-12);
        assert!((r.difference - (r.rate_on - r.rate_off)).abs() < 1e-12);
        assert!(simulate_toggle_experiment(&DetectorSpec::default(), 0.1, 10, 0.0, 0).is_err());
    }

    #[test]
    fn drift_stays_bounded() {
        // With no Poisson scatter to speak of, the off rate tracks the dark rate.
        let det = DetectorSpec {
            dark_rate: 1e6,
            drift_fraction: 0.03,
            ..Default::default()
        };
        let r = simulate_toggle_experiment(&det, 0.0, 2000, 1.0, 11).unwrap();
        for rec in r.records.iter().filter(|x| x.phase == Phase::Off) {
            assert!((rec.counts / 1e6 - 1.0).abs() < 0.035);
        }
    }

    #[test]
    fn significance_grows_as_sqrt_time_without_drift() {
        let det = DetectorSpec {
            drift_fraction: 0.0,
            ..Default::default()
        };
        let mean_sig = |cycles: usize| {
            (0..20)
                .map(|s| {
                    simulate_toggle_experiment(&det, 0.5, cycles, 10.0, s)
                        .unwrap()
                        .significance
                })
                .sum::<f64>()
                / 20.0
        };
        let base = mean_sig(10);
        for (k, cycles) in [(10.0f64, 100), (100.0, 1000), (1000.0, 10000)] {
            let ratio = mean_sig(cycles) / base / k.sqrt();
            assert!((ratio - 1.0).abs() < 0.3, "{cycles}: {ratio}");
        }
    }

    proptest! {
        #[test]
        fn chain_is_order_independent_and_multiplicative(ts in proptest::collection::vec(0.01f64..1.0, 1..8), split in 0usize..8) {
            let chain: Vec<ChainElement> = ts.iter().map(|&t| ChainElement::new("e", t).unwrap()).collect();
            let mut rev = chain.clone();
            rev.reverse();
            let a = chain_transmission(&chain).unwrap();
            prop_assert!((a - chain_transmission(&rev).unwrap()).abs() < 1e-14);
            let k = split.min(chain.len() - 1).max(1).min(chain.len());
            if k < chain.len() {
                let prod = chain_transmission(&chain[..k]).unwrap() * chain_transmission(&chain[k..]).unwrap();
                prop_assert!((a - prod).abs() < 1e-14);
            }
        }

        #[test]
        fn probability_is_linear(eta in 0.0f64..1e-6, k in 0.0f64..10.0) {
            let det = DetectorSpec::default();
            let c = default_chain();
            let a = detection_probability(eta, &c, &det).unwrap();
            let b = detection_probability(k * eta, &c, &det).unwrap();
            prop_assert!((b - k * a).abs() <= 1e-12 * b.abs().max(1e-30));
        }
    }
}
