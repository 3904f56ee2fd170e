//! Correlation and loss metrics.

use serde::Serialize;

use crate::error::{check_len, Error, Result};

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    check_len(a.len(), b.len())?;
    if a.len() < 2 {
        return Err(Error::validation("correlation needs at least two points"));
    }
    Ok(())
}

/// Sample Pearson correlation. Constant input is an error, not NaN.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn rank(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    pearson(&rank(a), &rank(b))
}

pub fn mse_loss(y: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_len(y.len(), y_pred.len())?;
    if y.is_empty() {
        return Err(Error::validation("MSE of empty sequences"));
    }
    Ok(y.iter().zip(y_pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

/// Mean and sample standard deviation (`n - 1` denominator; zero for a
/// single value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub pearson_mean: f64,
    pub pearson_std: f64,
    pub spearman_mean: f64,
    pub spearman_std: f64,
    /// Cases included in the means.
    pub n_cases: usize,
    /// Cases excluded because they did not converge.
    pub n_failed: usize,
}

/// Aggregates per-case `(pearson, spearman)` pairs over converged cases.
pub fn summarize(per_case: &[(f64, f64)], converged: &[bool]) -> Result<MetricSummary> {
    check_len(per_case.len(), converged.len())?;
    let kept: Vec<(f64, f64)> = per_case
        .iter()
        .zip(converged)
        .filter_map(|(m, &ok)| ok.then_some(*m))
        .collect();
    let pearsons: Vec<f64> = kept.iter().map(|m| m.0).collect();
    let spearmans: Vec<f64> = kept.iter().map(|m| m.1).collect();
    let (pearson_mean, pearson_std) = mean_std(&pearsons).ok_or(Error::EmptySummary)?;
    let (spearman_mean, spearman_std) = mean_std(&spearmans).ok_or(Error::EmptySummary)?;
    Ok(MetricSummary {
        pearson_mean,
        pearson_std,
        spearman_mean,
        spearman_std,
        n_cases: kept.len(),
        n_failed: per_case.len() - kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let a = [1.0, 2.0, 3.0, 5.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pearson(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        // Centered: a = (-1, 0, 1), b = (-7, -1, 8) / 3, so r = 5 / sqrt(2 * 38 / 3).
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
        assert!((r - 5.0 / (76.0f64 / 3.0).sqrt()).abs() < 1e-12, "{r}");
        assert!((r - 0.9934).abs() < 1e-4, "{r}");
    }

    #[test]
    fn constant_input_is_undefined() {
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::UndefinedCorrelation)
        ));
        assert!(matches!(
            spearman(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation)
        ));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_examples() {
        let a = [0.1, 0.5, 1.2, 3.0];
        let b: Vec<f64> = a.iter().map(|v: &f64| v.exp()).collect();
        assert!((spearman(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let r = spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert!((r + 0.5).abs() < 1e-12);
    }

    #[test]
    fn average_ranks_for_ties() {
        assert_eq!(rank(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank(&[3.0, 1.0, 2.0, 1.0]), vec![4.0, 1.5, 3.0, 1.5]);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(mse_loss(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5);
        assert!(mse_loss(&[], &[]).is_err());
    }

    #[test]
    fn summaries() {
        let s = summarize(&[(0.5, 0.4), (0.5, 0.4)], &[true, true]).unwrap();
        assert_eq!((s.pearson_std, s.spearman_std), (0.0, 0.0));
        let s = summarize(&[(0.7, 0.6)], &[true]).unwrap();
        assert_eq!((s.pearson_mean, s.pearson_std, s.n_cases), (0.7, 0.0, 1));
        let s = summarize(&[(0.2, 0.1), (0.9, 0.8)], &[false, true]).unwrap();
        assert_eq!((s.n_cases, s.n_failed, s.pearson_mean), (1, 1, 0.9));
        assert!(matches!(summarize(&[(0.1, 0.1)], &[false]), Err(Error::EmptySummary)));
    }
}
