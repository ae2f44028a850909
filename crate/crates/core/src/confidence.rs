//! Confidence scores for pseudo-label gating.
//!
//! `delta` is the entropy-based global confidence `1 - H/log C`.
//! `delta_prime` is the top-1/top-2 log-ratio divided by `log C`, clamped to
//! `[0, 1]`. Natural log throughout; both scores are ratios of logs, so the
//! base cancels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{argmax, Probabilities};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceScores {
    pub delta: f64,
    pub delta_prime: f64,
    pub conf_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau: f64,
    pub tau_prime: f64,
}

impl Thresholds {
    pub fn new(tau: f64, tau_prime: f64) -> Result<Self> {
        let t = Self { tau, tau_prime };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau", self.tau), ("tau_prime", self.tau_prime)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            tau: 0.5,
            tau_prime: 0.5,
        }
    }
}

/// Shannon entropy in nats; `0 log 0` is taken as 0.
pub fn entropy(probs: &Probabilities) -> f64 {
    -probs
        .values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub fn global_confidence(probs: &Probabilities) -> f64 {
    let c = probs.len();
    debug_assert!(c >= 2);
    (1.0 - entropy(probs) / (c as f64).ln()).clamp(0.0, 1.0)
}

pub fn local_confidence(probs: &Probabilities) -> f64 {
    let c = probs.len();
    debug_assert!(c >= 2);
    let top = argmax(&probs.values);
    let l_max = probs.values[top];
    let l_second = probs
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != top)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    if l_second <= 0.0 {
        return 1.0;
    }
    ((l_max / l_second).ln() / (c as f64).ln()).clamp(0.0, 1.0)
}

pub fn scores(probs: &Probabilities) -> ConfidenceScores {
    ConfidenceScores {
        delta: global_confidence(probs),
        delta_prime: local_confidence(probs),
        conf_max: probs.values[argmax(&probs.values)],
    }
}

/// Both criteria must hold strictly.
pub fn accept(scores: &ConfidenceScores, thresholds: &Thresholds) -> bool {
    scores.delta > thresholds.tau && scores.delta_prime > thresholds.tau_prime
}

/// Squared Pearson correlations between the three confidence metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub delta_vs_conf_max: f64,
    pub delta_prime_vs_conf_max: f64,
    pub delta_prime_vs_delta: f64,
}

pub fn pearson_r2(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateStat("constant series".into()));
    }
    Ok((sxy * sxy / (sxx * syy)).min(1.0))
}

pub fn correlation_table(scores: &[ConfidenceScores]) -> Result<CorrelationTable> {
    if scores.len() < 3 {
        return Err(Error::DegenerateStat(format!("need at least 3 records, got {}", scores.len())));
    }
    let delta: Vec<f64> = scores.iter().map(|s| s.delta).collect();
    let delta_prime: Vec<f64> = scores.iter().map(|s| s.delta_prime).collect();
    let conf_max: Vec<f64> = scores.iter().map(|s| s.conf_max).collect();
    let named = |what: &str, r: Result<f64>| {
        r.map_err(|e| match e {
            Error::DegenerateStat(m) => Error::DegenerateStat(format!("{what}: {m}")),
            other => other,
        })
    };
    Ok(CorrelationTable {
        delta_vs_conf_max: named("delta vs conf_max", pearson_r2(&delta, &conf_max))?,
        delta_prime_vs_conf_max: named("delta_prime vs conf_max", pearson_r2(&delta_prime, &conf_max))?,
        delta_prime_vs_delta: named("delta_prime vs delta", pearson_r2(&delta_prime, &delta))?,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::metric::softmax;

    fn p(v: &[f64]) -> Probabilities {
        Probabilities { values: v.to_vec() }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&p(&[1.0, 0.0, 0.0, 0.0, 0.0])), 0.0);
        assert!((entropy(&p(&[0.2; 5])) - 5f64.ln()).abs() < 1e-15);
        assert!((entropy(&p(&[0.5, 0.5, 0.0, 0.0, 0.0])) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn global_examples() {
        assert_eq!(global_confidence(&p(&[0.2; 5])), 0.0);
        assert_eq!(global_confidence(&p(&[1.0, 0.0, 0.0, 0.0, 0.0])), 1.0);
    }

    #[test]
    fn local_examples() {
        assert_eq!(local_confidence(&p(&[0.5, 0.5])), 0.0);
        assert_eq!(local_confidence(&p(&[0.0, 1.0, 0.0])), 1.0);
        let v = local_confidence(&p(&[0.6, 0.2, 0.1, 0.05, 0.05]));
        assert!((v - 3f64.ln() / 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn accept_rule() {
        let t = Thresholds::default();
        let s = |d, dp| ConfidenceScores {
            delta: d,
            delta_prime: dp,
            conf_max: 0.9,
        };
        assert!(accept(&s(0.9, 0.9), &t));
        assert!(!accept(&s(0.9, 0.3), &t));
        assert!(!accept(&s(0.5, 0.9), &t));
        assert!(!accept(&s(1.0, 1.0), &Thresholds::new(1.0, 1.0).unwrap()));
    }

    #[test]
    fn thresholds_range() {
        assert!(Thresholds::new(1.1, 0.5).is_err());
        assert!(Thresholds::new(0.5, -0.1).is_err());
    }

    #[test]
    fn correlation_cases() {
        let s: Vec<ConfidenceScores> = (1..=5)
            .map(|i| ConfidenceScores {
                delta: i as f64 * 0.1,
                delta_prime: i as f64 * 0.2,
                conf_max: i as f64 * 0.15,
            })
            .collect();
        let t = correlation_table(&s).unwrap();
        for r in [t.delta_vs_conf_max, t.delta_prime_vs_conf_max, t.delta_prime_vs_delta] {
            assert!((r - 1.0).abs() < 1e-12);
        }
        let flat: Vec<ConfidenceScores> = s
            .iter()
            .map(|x| ConfidenceScores { delta: 1.0, ..*x })
            .collect();
        assert!(matches!(correlation_table(&flat), Err(Error::DegenerateStat(_))));
        assert!(correlation_table(&s[..2]).is_err());
    }

    fn logits_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-20.0f64..20.0, n)
    }

    proptest! {
        #[test]
        fn scores_permutation_invariant(v in logits_strategy(5), rot in 0usize..5) {
            let probs = softmax(&v);
            let mut rotated = probs.values.clone();
            rotated.rotate_left(rot);
            let a = scores(&probs);
            let b = scores(&p(&rotated));
            prop_assert!((a.delta - b.delta).abs() < 1e-12);
            prop_assert!((a.delta_prime - b.delta_prime).abs() < 1e-12);
        }

        #[test]
        fn scores_in_range(v in logits_strategy(5)) {
            let s = scores(&softmax(&v));
            prop_assert!((0.0..=1.0).contains(&s.delta));
            prop_assert!((0.0..=1.0).contains(&s.delta_prime));
            prop_assert!(s.conf_max > 0.0 && s.conf_max <= 1.0);
        }

        #[test]
        fn two_class_closed_form(p2 in 1e-6f64..0.5) {
            let got = local_confidence(&p(&[1.0 - p2, p2]));
            let want = (((1.0 - p2) / p2).ln() / 2f64.ln()).min(1.0);
            prop_assert!((got - want).abs() < 1e-12);
        }

        #[test]
        fn accept_monotone_in_thresholds(
            d in 0.0f64..=1.0, dp in 0.0f64..=1.0,
            t in 0.0f64..=1.0, tp in 0.0f64..=1.0,
            bump in 0.0f64..=1.0, bump_p in 0.0f64..=1.0,
        ) {
            let s = ConfidenceScores { delta: d, delta_prime: dp, conf_max: 0.5 };
            let lo = Thresholds { tau: t, tau_prime: tp };
            let hi = Thresholds { tau: (t + bump).min(1.0), tau_prime: (tp + bump_p).min(1.0) };
            prop_assert!(!accept(&s, &hi) || accept(&s, &lo));
        }
    }
}
