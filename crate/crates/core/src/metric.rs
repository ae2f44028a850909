//! Prototype arithmetic and the scoring chain query → logits → probabilities → class.
//!
//! Logits are oriented "higher is closer" for both metrics: the Euclidean
//! logit is the negated squared distance, the cosine logit is the raw cosine.
//! Neither is scaled by a temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    pub class_local: usize,
    pub vector: Vec<f64>,
    pub support_count: usize,
    pub aux_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Logits {
    pub values: Vec<f64>,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probabilities {
    pub values: Vec<f64>,
}

impl Probabilities {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Compensated (Neumaier) running sum of vectors.
#[derive(Debug, Clone)]
pub struct VectorSum {
    sum: Vec<f64>,
    comp: Vec<f64>,
    count: usize,
}

impl VectorSum {
    pub fn new(dimension: usize) -> Self {
        Self {
            sum: vec![0.0; dimension],
            comp: vec![0.0; dimension],
            count: 0,
        }
    }

    pub fn add(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.sum.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sum.len(),
                actual: v.len(),
            });
        }
        for ((s, c), &x) in self.sum.iter_mut().zip(self.comp.iter_mut()).zip(v) {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as f64;
        Some(self.sum.iter().zip(&self.comp).map(|(s, c)| (s + c) / n).collect())
    }
}

pub fn mean_vector(vectors: &[&[f64]]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or(Error::EmptySet("mean of no vectors"))?;
    let mut acc = VectorSum::new(first.len());
    for v in vectors {
        acc.add(v)?;
    }
    Ok(acc.mean().expect("non-empty"))
}

pub fn prototype_from_support(class_local: usize, support: &[&[f64]]) -> Result<Prototype> {
    if support.is_empty() {
        return Err(Error::EmptySet("support set"));
    }
    Ok(Prototype {
        class_local,
        vector: mean_vector(support)?,
        support_count: support.len(),
        aux_count: 0,
    })
}

/// Mean over support and auxiliary samples together.
pub fn prototype_augmented(class_local: usize, support: &[&[f64]], aux: &[&[f64]]) -> Result<Prototype> {
    let first = support
        .first()
        .or_else(|| aux.first())
        .ok_or(Error::EmptySet("support and auxiliary sets"))?;
    let mut acc = VectorSum::new(first.len());
    for v in support.iter().chain(aux) {
        acc.add(v)?;
    }
    Ok(Prototype {
        class_local,
        vector: acc.mean().expect("non-empty"),
        support_count: support.len(),
        aux_count: aux.len(),
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn logits(query: &[f64], prototypes: &[Prototype], metric: Metric) -> Result<Logits> {
    let mut values = Vec::with_capacity(prototypes.len());
    let query_norm = match metric {
        Metric::Cosine => {
            let n = norm(query);
            if n == 0.0 {
                return Err(Error::DegenerateVector);
            }
            n
        }
        Metric::Euclidean => 0.0,
    };
    for p in prototypes {
        if p.vector.len() != query.len() {
            return Err(Error::DimensionMismatch {
                expected: query.len(),
                actual: p.vector.len(),
            });
        }
        let v = match metric {
            Metric::Euclidean => -squared_distance(query, &p.vector),
            Metric::Cosine => {
                let pn = norm(&p.vector);
                if pn == 0.0 {
                    return Err(Error::DegenerateVector);
                }
                let dot: f64 = query.iter().zip(&p.vector).map(|(a, b)| a * b).sum();
                dot / (query_norm * pn)
            }
        };
        values.push(v);
    }
    Ok(Logits { values, metric })
}

pub fn softmax(values: &[f64]) -> Probabilities {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Probabilities {
        values: exps.into_iter().map(|e| e / total).collect(),
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Predicted local class (0-based).
pub fn predict(probs: &Probabilities) -> usize {
    argmax(&probs.values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nll {
    Finite(f64),
    /// Some query assigned probability 0 to its true class.
    Infinite { query: usize },
}

pub fn nll(probs: &[Probabilities], true_local: &[usize]) -> Result<Nll> {
    if probs.len() != true_local.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            actual: true_local.len(),
        });
    }
    let mut total = 0.0;
    for (i, (p, &y)) in probs.iter().zip(true_local).enumerate() {
        let py = *p.values.get(y).ok_or_else(|| Error::InvalidValue(format!("class index {y} out of range")))?;
        if py <= 0.0 {
            return Ok(Nll::Infinite { query: i });
        }
        total -= py.ln();
    }
    Ok(Nll::Finite(total))
}
