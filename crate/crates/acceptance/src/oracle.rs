//! Reference implementations in 256-bit binary floating point.
//!
//! These share no code with `ipec-core`: every quantity is recomputed from
//! the f64 inputs at high precision and rounded to f64 only at the end.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Oracle {
    cc: Consts,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle {
    pub fn new() -> Self {
        Self {
            cc: Consts::new().expect("astro-float constants"),
        }
    }

    fn big(x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }

    fn f64_of(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        let text = x.format(Radix::Dec, RM, &mut self.cc).expect("format");
        text.parse().expect("decimal text")
    }

    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(PREC, RM, &mut self.cc)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(PREC, RM, &mut self.cc)
    }

    fn sum(xs: impl IntoIterator<Item = BigFloat>) -> BigFloat {
        xs.into_iter()
            .fold(Self::big(0.0), |acc, x| acc.add(&x, PREC, RM))
    }

    fn softmax_big(&mut self, logits: &[f64]) -> Vec<BigFloat> {
        let exps: Vec<BigFloat> = logits.iter().map(|&v| self.exp(&Self::big(v))).collect();
        let total = Self::sum(exps.iter().cloned());
        exps.iter().map(|e| e.div(&total, PREC, RM)).collect()
    }

    /// `exp(v_c) / Σ exp(v_j)` without any shift.
    pub fn softmax(&mut self, logits: &[f64]) -> Vec<f64> {
        let probs = self.softmax_big(logits);
        probs.iter().map(|p| self.f64_of(p)).collect()
    }

    fn entropy_big(&mut self, probs: &[f64]) -> BigFloat {
        let mut terms = Vec::new();
        for &p in probs.iter().filter(|&&p| p > 0.0) {
            let b = Self::big(p);
            let l = self.ln(&b);
            terms.push(b.mul(&l, PREC, RM));
        }
        Self::sum(terms).neg()
    }

    pub fn entropy(&mut self, probs: &[f64]) -> f64 {
        let h = self.entropy_big(probs);
        self.f64_of(&h)
    }

    fn ln_count(&mut self, c: usize) -> BigFloat {
        self.ln(&Self::big(c as f64))
    }

    pub fn global_confidence(&mut self, probs: &[f64]) -> f64 {
        let h = self.entropy_big(probs);
        let lc = self.ln_count(probs.len());
        let d = Self::big(1.0).sub(&h.div(&lc, PREC, RM), PREC, RM);
        self.f64_of(&d).clamp(0.0, 1.0)
    }

    pub fn local_confidence(&mut self, probs: &[f64]) -> f64 {
        let mut order: Vec<usize> = (0..probs.len()).collect();
        // stable sort keeps the lowest index first among ties
        order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).expect("finite"));
        let (top, second) = (probs[order[0]], probs[order[1]]);
        if second <= 0.0 {
            return 1.0;
        }
        let ratio = Self::big(top).div(&Self::big(second), PREC, RM);
        let lr = self.ln(&ratio);
        let lc = self.ln_count(probs.len());
        let v = lr.div(&lc, PREC, RM);
        self.f64_of(&v).clamp(0.0, 1.0)
    }

    pub fn neg_squared_distance(&mut self, a: &[f64], b: &[f64]) -> f64 {
        let d = Self::sum(a.iter().zip(b).map(|(&x, &y)| {
            let diff = Self::big(x).sub(&Self::big(y), PREC, RM);
            diff.mul(&diff, PREC, RM)
        }));
        self.f64_of(&d.neg())
    }

    pub fn cosine(&mut self, a: &[f64], b: &[f64]) -> f64 {
        let dot = Self::sum(a.iter().zip(b).map(|(&x, &y)| Self::big(x).mul(&Self::big(y), PREC, RM)));
        let na = Self::sum(a.iter().map(|&x| Self::big(x).mul(&Self::big(x), PREC, RM))).sqrt(PREC, RM);
        let nb = Self::sum(b.iter().map(|&x| Self::big(x).mul(&Self::big(x), PREC, RM))).sqrt(PREC, RM);
        let v = dot.div(&na.mul(&nb, PREC, RM), PREC, RM);
        self.f64_of(&v)
    }

    pub fn mean(&mut self, vectors: &[Vec<f64>]) -> Vec<f64> {
        let n = Self::big(vectors.len() as f64);
        let d = vectors[0].len();
        (0..d)
            .map(|j| {
                let s = Self::sum(vectors.iter().map(|v| Self::big(v[j])));
                let m = s.div(&n, PREC, RM);
                self.f64_of(&m)
            })
            .collect()
    }

    /// Squared Pearson correlation.
    pub fn r2(&mut self, xs: &[f64], ys: &[f64]) -> f64 {
        let n = Self::big(xs.len() as f64);
        let mx = Self::sum(xs.iter().map(|&x| Self::big(x))).div(&n, PREC, RM);
        let my = Self::sum(ys.iter().map(|&y| Self::big(y))).div(&n, PREC, RM);
        let dx: Vec<BigFloat> = xs.iter().map(|&x| Self::big(x).sub(&mx, PREC, RM)).collect();
        let dy: Vec<BigFloat> = ys.iter().map(|&y| Self::big(y).sub(&my, PREC, RM)).collect();
        let sxy = Self::sum(dx.iter().zip(&dy).map(|(a, b)| a.mul(b, PREC, RM)));
        let sxx = Self::sum(dx.iter().map(|a| a.mul(a, PREC, RM)));
        let syy = Self::sum(dy.iter().map(|b| b.mul(b, PREC, RM)));
        let num = sxy.mul(&sxy, PREC, RM);
        let den = sxx.mul(&syy, PREC, RM);
        if den.is_zero() {
            return f64::NAN;
        }
        let v = num.div(&den, PREC, RM);
        self.f64_of(&v)
    }
}
