//! Least-squares helpers shared by the asymptotic fits.

/// Ordinary least squares `y ≈ intercept + slope · x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Some(LineFit { slope, intercept, rms })
}

/// Fits `y ≈ y_inf + c · g(x; p)` by scanning the nonlinear parameter `p`
/// over `grid` and solving the linear part exactly. Returns `(p, y_inf, c, rms)`.
pub fn scan_fit<G>(x: &[f64], y: &[f64], grid: impl Iterator<Item = f64>, g: G) -> Option<(f64, f64, f64, f64)>
where
    G: Fn(f64, f64) -> f64,
{
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for p in grid {
        let basis: Vec<f64> = x.iter().map(|&xi| g(xi, p)).collect();
        if basis.iter().any(|b| !b.is_finite()) {
            continue;
        }
        let Some(line) = fit_line(&basis, y) else { continue };
        if best.is_none_or(|b| line.rms < b.3) {
            best = Some((p, line.intercept, line.slope, line.rms));
        }
    }
    best
}

/// Points `lo · (hi/lo)^(i/(n-1))`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_generator() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 3.0).abs() < 1e-13);
        assert!(f.rms < 1e-13);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[2.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(50.0, 200.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 50.0).abs() < 1e-12 && (g[4] - 200.0).abs() < 1e-9);
        assert!((g[2] - 100.0).abs() < 1e-9);
    }
}
