use super::HarnessError;
use crate::imagedata::DepthMap;

/// Error statistics in millimeters over pixels valid in both maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorStats {
    pub mae: f64,
    pub rmse: f64,
    pub pixels: usize,
}

/// MAE and RMSE of `est` against `gt`. Only ground-truth-valid pixels are
/// read from the estimate.
pub fn error_stats(est: &DepthMap, gt: &DepthMap) -> Result<ErrorStats, HarnessError> {
    if (est.width(), est.height()) != (gt.width(), gt.height()) {
        return Err(HarnessError::Parameter(format!(
            "estimate is {}x{} but ground truth is {}x{}",
            est.width(),
            est.height(),
            gt.width(),
            gt.height()
        )));
    }
    let mut abs = 0.0;
    let mut sq = 0.0;
    let mut pixels = 0usize;
    for (i, &g) in gt.depths().iter().enumerate() {
        if !gt.validity()[i] || !est.validity()[i] {
            continue;
        }
        let e = est.depths()[i] - g;
        abs += e.abs();
        sq += e * e;
        pixels += 1;
    }
    if pixels == 0 {
        return Err(HarnessError::Parameter(
            "no pixel is valid in both estimate and ground truth".into(),
        ));
    }
    let n = pixels as f64;
    Ok(ErrorStats {
        mae: abs / n,
        rmse: (sq / n).sqrt(),
        pixels,
    })
}

pub fn mae(est: &DepthMap, gt: &DepthMap) -> Result<f64, HarnessError> {
    error_stats(est, gt).map(|s| s.mae)
}

pub fn rmse(est: &DepthMap, gt: &DepthMap) -> Result<f64, HarnessError> {
    error_stats(est, gt).map(|s| s.rmse)
}
