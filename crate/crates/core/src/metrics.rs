//! Accuracy, weighted/macro F1, comment-level span scoring and the paired
//! t-test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::span::SpanLabeledSeq;

/// Per-class confusion counts.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    /// class → (true positives, false positives, false negatives, gold support)
    pub per_class: BTreeMap<String, (usize, usize, usize, usize)>,
    pub total: usize,
    pub correct: usize,
}

impl ConfusionCounts {
    pub fn from_pairs<S: AsRef<str>>(gold: &[S], pred: &[S]) -> Result<Self> {
        if gold.len() != pred.len() {
            return Err(Error::LengthMismatch(format!(
                "{} gold vs {} pred",
                gold.len(),
                pred.len()
            )));
        }
        if gold.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut counts = ConfusionCounts {
            total: gold.len(),
            ..ConfusionCounts::default()
        };
        for (g, p) in gold.iter().zip(pred) {
            let g = g.as_ref();
            let p = p.as_ref();
            let entry = counts.per_class.entry(g.to_string()).or_default();
            entry.3 += 1;
            if g == p {
                entry.0 += 1;
                counts.correct += 1;
            } else {
                entry.2 += 1;
                counts.per_class.entry(p.to_string()).or_default().1 += 1;
            }
        }
        Ok(counts)
    }
}

/// Accuracy plus per-class, macro and support-weighted F1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EvalReport<F: Scalar> {
    pub accuracy: F,
    pub weighted_f1: F,
    pub macro_f1: F,
    pub per_class_f1: BTreeMap<String, F>,
    pub n: usize,
}

/// F1 = 2PR/(P+R), 0 when the denominator is 0. Macro F1 averages over the
/// gold class set unweighted; weighted F1 uses gold supports as weights.
pub fn classification_report<F: Scalar, S: AsRef<str>>(
    gold: &[S],
    pred: &[S],
) -> Result<EvalReport<F>> {
    let counts = ConfusionCounts::from_pairs(gold, pred)?;
    report_from_counts(&counts)
}

pub fn report_from_counts<F: Scalar>(counts: &ConfusionCounts) -> Result<EvalReport<F>> {
    let mut per_class_f1 = BTreeMap::new();
    let mut macro_sum = F::zero();
    let mut weighted_sum = F::zero();
    let mut gold_classes = 0usize;
    for (class, &(tp, fp, fne, support)) in &counts.per_class {
        let f1 = f1_from_counts::<F>(tp, fp, fne);
        per_class_f1.insert(class.clone(), f1);
        if support > 0 {
            gold_classes += 1;
            macro_sum += f1;
            weighted_sum += f1 * F::cast_usize(support);
        }
    }
    if gold_classes == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(EvalReport {
        accuracy: F::cast_usize(counts.correct) / F::cast_usize(counts.total),
        macro_f1: macro_sum / F::cast_usize(gold_classes),
        weighted_f1: weighted_sum / F::cast_usize(counts.total),
        per_class_f1,
        n: counts.total,
    })
}

fn f1_from_counts<F: Scalar>(tp: usize, fp: usize, fne: usize) -> F {
    let denom = 2 * tp + fp + fne;
    if denom == 0 {
        F::zero()
    } else {
        F::cast_usize(2 * tp) / F::cast_usize(denom)
    }
}

/// Comment-level span scoring: per-comment tag sequences are flattened and the
/// concatenation of all comments' position-wise tags is scored as a 3-class
/// classification problem over {B-T, I-T, O}.
pub fn span_report<F: Scalar>(
    gold: &[SpanLabeledSeq],
    pred: &[SpanLabeledSeq],
) -> Result<EvalReport<F>> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch(format!(
            "{} gold comments vs {} pred comments",
            gold.len(),
            pred.len()
        )));
    }
    let mut gold_tags = Vec::new();
    let mut pred_tags = Vec::new();
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.labels.len() != p.labels.len() {
            return Err(Error::LengthMismatch(format!(
                "comment {i}: {} gold tags vs {} pred tags",
                g.labels.len(),
                p.labels.len()
            )));
        }
        gold_tags.extend(g.labels.iter().map(|t| t.as_str()));
        pred_tags.extend(p.labels.iter().map(|t| t.as_str()));
    }
    classification_report(&gold_tags, &pred_tags)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PairedTestResult<F: Scalar> {
    pub t_statistic: F,
    pub degrees_of_freedom: usize,
    pub p_value: F,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significant_at: Option<F>,
}

/// Two-sided paired Student's t-test on the per-pair differences a - b.
/// The p-value comes from the regularized incomplete beta via the identity
/// P(|T| > t) = I_x(df/2, 1/2) with x = df/(df + t^2).
pub fn paired_t_test<F: Scalar>(
    scores_a: &[F],
    scores_b: &[F],
    alpha: Option<F>,
) -> Result<PairedTestResult<F>> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::LengthMismatch(format!(
            "{} vs {} scores",
            scores_a.len(),
            scores_b.len()
        )));
    }
    let n = scores_a.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let diffs: Vec<F> = scores_a.iter().zip(scores_b).map(|(&a, &b)| a - b).collect();
    let nf = F::cast_usize(n);
    let mean = diffs.iter().copied().sum::<F>() / nf;
    let var = diffs
        .iter()
        .map(|&d| (d - mean) * (d - mean))
        .sum::<F>()
        / F::cast_usize(n - 1);
    if var <= F::zero() {
        return Err(Error::ZeroVariance);
    }
    let t = mean / (var / nf).sqrt();
    let df = nf - F::one();
    let x = df / (df + t * t);
    let p = regularized_incomplete_beta(df / F::cast(2.0), F::cast(0.5), x);
    Ok(PairedTestResult {
        t_statistic: t,
        degrees_of_freedom: n - 1,
        p_value: p,
        significant_at: alpha.filter(|&a| p < a),
    })
}

/// Regularized incomplete beta I_x(a, b) by the Lentz continued fraction,
/// converged to machine precision (well below the 1e-10 requirement for f64).
pub fn regularized_incomplete_beta<F: Scalar>(a: F, b: F, x: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    if x >= F::one() {
        return F::one();
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * x.ln()
        + b * (F::one() - x).ln();
    let front = ln_front.exp();
    // use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) for fast convergence
    if x < (a + F::one()) / (a + b + F::cast(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        F::one() - front * beta_cf(b, a, F::one() - x) / b
    }
}

fn beta_cf<F: Scalar>(a: F, b: F, x: F) -> F {
    let eps = F::epsilon();
    let fpmin = F::min_positive_value() / eps;
    let one = F::one();
    let two = F::cast(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < fpmin {
        d = fpmin;
    }
    d = one / d;
    let mut h = d;
    for m in 1..300 {
        let mf = F::cast_usize(m);
        let m2 = two * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = one + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = one + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() < eps {
            break;
        }
    }
    h
}

/// Lanczos approximation of ln Γ(x), g = 7, n = 9.
fn ln_gamma<F: Scalar>(x: F) -> F {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let half = F::cast(0.5);
    if x < half {
        // reflection
        let pi = F::cast(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let mut acc = F::cast(COEFFS[0]);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += F::cast(c) / (x + F::cast_usize(i));
    }
    let t = x + F::cast(7.5);
    let sqrt_two_pi = F::cast((2.0 * std::f64::consts::PI).sqrt());
    sqrt_two_pi.ln() + (x + half) * t.ln() - t + acc.ln()
}
