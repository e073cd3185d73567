//! Multi-label evaluation metrics and genetic-search progress metrics.

use crate::error::{Error, Result};
use crate::types::{Classifier, Dataset, Rule};

/// Evaluation summary over a prediction set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub exact_match: f64,
    pub hamming_loss: f64,
    /// Per-instance accuracy terms, retained for audit.
    pub accuracy_terms: Vec<f64>,
}

impl EvaluationReport {
    pub fn compute(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<Self> {
        Ok(EvaluationReport {
            accuracy_terms: accuracy_terms(preds, truths)?,
            accuracy: ml_accuracy(preds, truths)?,
            exact_match: exact_match(preds, truths)?,
            hamming_loss: hamming_loss(preds, truths)?,
        })
    }
}

fn check_lengths(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<()> {
    if preds.len() != truths.len() {
        return Err(Error::Params(format!(
            "prediction count {} != truth count {}",
            preds.len(),
            truths.len()
        )));
    }
    for (i, (p, t)) in preds.iter().zip(truths).enumerate() {
        if p.len() != t.len() {
            return Err(Error::Params(format!(
                "instance {i}: prediction has {} labels, truth has {}",
                p.len(),
                t.len()
            )));
        }
    }
    Ok(())
}

fn accuracy_terms(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<Vec<f64>> {
    check_lengths(preds, truths)?;
    Ok(preds
        .iter()
        .zip(truths)
        .map(|(p, t)| {
            let inter = p.iter().zip(t).filter(|(a, b)| **a && **b).count();
            let union = p.iter().zip(t).filter(|(a, b)| **a || **b).count();
            // empty/empty: the prediction is exactly right
            if union == 0 {
                1.0
            } else {
                inter as f64 / union as f64
            }
        })
        .collect())
}

/// Mean Jaccard similarity between predicted and actual label sets.
pub fn ml_accuracy(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<f64> {
    let terms = accuracy_terms(preds, truths)?;
    if terms.is_empty() {
        return Ok(0.0);
    }
    Ok(terms.iter().sum::<f64>() / terms.len() as f64)
}

/// Fraction of instances whose label set is predicted exactly.
pub fn exact_match(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<f64> {
    check_lengths(preds, truths)?;
    if preds.is_empty() {
        return Ok(0.0);
    }
    let correct = preds.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Mean fraction of labels in the symmetric difference.
pub fn hamming_loss(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<f64> {
    check_lengths(preds, truths)?;
    if preds.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = preds
        .iter()
        .zip(truths)
        .map(|(p, t)| {
            let diff = p.iter().zip(t).filter(|(a, b)| a != b).count();
            diff as f64 / p.len() as f64
        })
        .sum();
    Ok(sum / preds.len() as f64)
}

/// Mean number of active labels per instance.
pub fn label_cardinality(dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Params("label cardinality of an empty dataset".into()));
    }
    let active: usize =
        dataset.instances.iter().map(|i| i.labels.iter().filter(|&&b| b).count()).sum();
    Ok(active as f64 / dataset.len() as f64)
}

/// Fraction of a shortest-complete-solution ruleset present in the
/// population, maximized over the alternative rulesets.
pub fn percent_scs(population: &[Classifier], scs_alternatives: &[Vec<Rule>]) -> f64 {
    scs_alternatives
        .iter()
        .map(|alt| {
            if alt.is_empty() {
                return 0.0;
            }
            let found = alt
                .iter()
                .filter(|rule| population.iter().any(|cl| &cl.rule == *rule))
                .count();
            found as f64 / alt.len() as f64
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn accuracy_examples() {
        let acc = ml_accuracy(&[bits("0110")], &[bits("1100")]).unwrap();
        assert!((acc - 1.0 / 3.0).abs() < 1e-12);
        let acc = ml_accuracy(&[bits("1010"), bits("0001")], &[bits("1010"), bits("0001")])
            .unwrap();
        assert_eq!(acc, 1.0);
        let acc = ml_accuracy(&[bits("0000")], &[bits("0000")]).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn exact_match_examples() {
        let em = exact_match(&[bits("1010"), bits("0000")], &[bits("1010"), bits("0001")])
            .unwrap();
        assert_eq!(em, 0.5);
        assert_eq!(exact_match(&[bits("11")], &[bits("11")]).unwrap(), 1.0);
        assert_eq!(exact_match(&[bits("10")], &[bits("11")]).unwrap(), 0.0);
    }

    #[test]
    fn hamming_examples() {
        let hl = hamming_loss(&[bits("1010")], &[bits("1001")]).unwrap();
        assert_eq!(hl, 0.5);
        assert_eq!(hamming_loss(&[bits("1010")], &[bits("1010")]).unwrap(), 0.0);
        assert_eq!(hamming_loss(&[bits("1010")], &[bits("0101")]).unwrap(), 1.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(ml_accuracy(&[bits("10")], &[bits("100")]).is_err());
        assert!(exact_match(&[bits("10")], &[]).is_err());
    }
}
