//! Small least-squares helpers shared by the decay-fitting pipelines.

use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "fit needs matching lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::NonPositive("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        ((sxy * sxy) / (sxx * syy)).min(1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    ExponentialInT,
    PowerLawInT,
}

/// A fitted decay law: `value ~ C exp(-rate t)` or `value ~ C (1+t)^{-rate}`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub rate: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub kind: DecayKind,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_line() {
        let x: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&t| 2.5 - 0.7 * t).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope + 0.7).abs() < 1e-12);
        assert!((fit.intercept - 2.5).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn planted_power_law_slope() {
        // log(value) vs log(1+t) for value = (1+t)^{-0.5}
        let t: Vec<f64> = (0..200).map(|k| 1.0 + k as f64 * 5.0).collect();
        let x: Vec<f64> = t.iter().map(|&t| (1.0 + t).ln()).collect();
        let y: Vec<f64> = t.iter().map(|&t| (1.0 + t).powf(-0.5).ln()).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-3);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(linear_fit(&[1.0, 2.0], &[2.0]).is_err());
    }
}
