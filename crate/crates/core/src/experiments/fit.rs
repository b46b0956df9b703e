use serde::Serialize;

use crate::error::{Error, Result};

/// Log-log fit of an error table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderFit {
    pub resolutions: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log₂ e` against `log₂ r`.
    pub slope: f64,
    /// Slopes between consecutive points.
    pub pair_slopes: Vec<f64>,
    /// Some error sits at rounding level, so the slope carries no information.
    pub degenerate: bool,
}

impl OrderFit {
    /// Slope if the fit is meaningful.
    pub fn order(&self) -> Option<f64> {
        (!self.degenerate).then_some(self.slope)
    }

    pub fn min_pair_slope(&self) -> f64 {
        self.pair_slopes.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Rounding floor below which an error counts as zero, relative to `scale`.
pub fn degeneracy_threshold(scale: f64) -> f64 {
    1e2 * f64::EPSILON * scale
}

/// Fits `error ≈ C · resolution^p`. `scale` is the size of the solution,
/// used only for the degeneracy test.
pub fn fit_order(resolutions: &[f64], errors: &[f64], scale: f64) -> Result<OrderFit> {
    if resolutions.len() != errors.len() {
        return Err(Error::Config(format!(
            "{} resolutions but {} errors",
            resolutions.len(),
            errors.len()
        )));
    }
    if resolutions.len() < 3 {
        return Err(Error::Config("order fit needs at least 3 points".into()));
    }
    if let Some(r) = resolutions.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Domain(format!("resolution must be positive, got {r}")));
    }
    if let Some(e) = errors.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return Err(Error::Domain(format!("error must be nonnegative, got {e}")));
    }
    let floor = degeneracy_threshold(scale);
    let degenerate = errors.iter().any(|&e| e < floor);
    if errors.iter().any(|&e| e == 0.0) {
        if degenerate {
            return Ok(OrderFit {
                resolutions: resolutions.to_vec(),
                errors: errors.to_vec(),
                slope: f64::NAN,
                pair_slopes: vec![f64::NAN; errors.len() - 1],
                degenerate,
            });
        }
        return Err(Error::Domain("zero error in order fit".into()));
    }
    let xs: Vec<f64> = resolutions.iter().map(|r| r.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("resolutions are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let pair_slopes = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    Ok(OrderFit {
        resolutions: resolutions.to_vec(),
        errors: errors.to_vec(),
        slope: sxy / sxx,
        pair_slopes,
        degenerate,
    })
}
