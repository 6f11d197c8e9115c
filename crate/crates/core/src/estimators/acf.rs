use super::EstimatorError;

/// Lags used for the exponential fit. Lags below `first` are skipped, and
/// the fit stops at `last` or at the first lag whose correlation falls
/// below the white-noise band `3/√N`, whichever comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitWindow {
    pub first: usize,
    pub last: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow { first: 5, last: 300 }
    }
}

/// `acf(lag) ≈ amplitude · exp(−lag / correlation_time)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub amplitude: f64,
    pub correlation_time: f64,
    pub lags_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsReturnAcf {
    /// `acf[l - 1]` is the correlation at lag `l`.
    pub acf: Vec<f64>,
    pub n_returns: usize,
    pub window: FitWindow,
    pub fit: Option<ExpFit>,
}

impl AbsReturnAcf {
    pub fn at(&self, lag: usize) -> Option<f64> {
        lag.checked_sub(1).and_then(|i| self.acf.get(i)).copied()
    }

    pub fn noise_band(&self) -> f64 {
        3.0 / (self.n_returns as f64).sqrt()
    }
}

/// Sample autocorrelation of `|Δp|` for lags `1..=max_lag`, where `Δp` are
/// consecutive differences of `mids`, plus an exponential fit over `window`.
pub fn acf_abs_returns(
    mids: &[i64],
    max_lag: usize,
    window: FitWindow,
) -> Result<AbsReturnAcf, EstimatorError> {
    if max_lag == 0 {
        return Err(EstimatorError::InvalidArgument("max_lag must be positive".into()));
    }
    if window.first == 0 || window.first > window.last {
        return Err(EstimatorError::InvalidArgument(format!(
            "bad fit window {}..={}",
            window.first, window.last
        )));
    }
    let needed = 10 * max_lag;
    if mids.len() <= needed {
        return Err(EstimatorError::SeriesTooShort { len: mids.len(), needed });
    }
    let x: Vec<f64> = mids.windows(2).map(|w| (w[1] - w[0]).unsigned_abs() as f64).collect();
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let var: f64 = dev.iter().map(|d| d * d).sum();
    if var <= 0.0 {
        return Err(EstimatorError::ZeroVariance);
    }
    let acf: Vec<f64> = (1..=max_lag)
        .map(|lag| dev[..n - lag].iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum::<f64>() / var)
        .collect();
    let mut out = AbsReturnAcf { acf, n_returns: n, window, fit: None };
    out.fit = fit_exponential(&out);
    Ok(out)
}

fn fit_exponential(acf: &AbsReturnAcf) -> Option<ExpFit> {
    let floor = acf.noise_band();
    let last = acf.window.last.min(acf.acf.len());
    let mut pts = Vec::new();
    for lag in acf.window.first..=last {
        let r = acf.at(lag)?;
        if r <= floor {
            break;
        }
        pts.push((lag as f64, r.ln()));
    }
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let correlation_time = if slope < 0.0 { -1.0 / slope } else { f64::INFINITY };
    Some(ExpFit {
        amplitude: (my - slope * mx).exp(),
        correlation_time,
        lags_used: pts.len(),
    })
}
