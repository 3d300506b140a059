use crate::error::{Error, Result};

/// Population moments of a sample. Skewness and excess kurtosis are `None`
/// when the sample variance is zero (third/fourth standardized moments are
/// undefined there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSummary {
    pub mean: f64,
    /// Population variance (divide by N).
    pub variance: f64,
    /// g1 = m3 / m2^1.5
    pub skewness: Option<f64>,
    /// g2 = m4 / m2^2 - 3
    pub excess_kurtosis: Option<f64>,
}

/// Population mean/variance/skewness/excess-kurtosis of `samples`.
pub fn describe(samples: &[f64]) -> Result<StatsSummary> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "describe requires at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Ok(StatsSummary {
        mean,
        variance: m2,
        skewness,
        excess_kurtosis,
    })
}
