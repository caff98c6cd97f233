//! Least-squares rate fits, damped-oscillation estimation, cubic resampling
//! and finite-difference weights.

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Values below this magnitude are treated as zero by the fits.
pub const FIT_FLOOR: f64 = 1e-14;
pub const MIN_FIT_POINTS: usize = 8;
pub const MIN_EXTREMA: usize = 4;

fn ser_window<S: Serializer>(w: &(f64, f64), s: S) -> std::result::Result<S::Ok, S::Error> {
    [w.0, w.1].serialize(s)
}

/// Power-law fit `|value| ≈ exp(log_amplitude) · x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub log_amplitude: f64,
    pub rms_residual: f64,
    #[serde(serialize_with = "ser_window")]
    pub window: (f64, f64),
    pub n_points: usize,
    pub oscillatory: bool,
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if window.0 < window.1 && window.0 > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("fit window {window:?} must satisfy 0 < lo < hi")))
    }
}

/// Ordinary least squares `y ≈ c0 + c1 x`; returns `(c0, c1, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    (icpt, slope, (rss / n).sqrt())
}

/// Log–log least squares of `|value|` against `x` inside `window`. With
/// `envelope`, only local maxima of `|value|` enter the regression.
pub fn fit_decay_exponent(samples: &[(f64, f64)], window: (f64, f64), envelope: bool) -> Result<RateFit> {
    check_window(window)?;
    let mut pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(x, v)| *x >= window.0 && *x <= window.1 && x.is_finite() && v.is_finite())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    if pts.iter().all(|(_, v)| v.abs() < FIT_FLOOR) {
        return Err(Error::DegenerateFit(format!(
            "all values in {window:?} are below {FIT_FLOOR:e}"
        )));
    }
    let sign_changes = pts.windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).count();
    let used: Vec<(f64, f64)> = if envelope {
        let peaks: Vec<(f64, f64)> = (1..pts.len() - 1)
            .filter(|&i| {
                let m = pts[i].1.abs();
                m >= pts[i - 1].1.abs() && m >= pts[i + 1].1.abs() && m >= FIT_FLOOR
            })
            .map(|i| pts[i])
            .collect();
        if peaks.len() < MIN_EXTREMA {
            return Err(Error::DegenerateFit(format!(
                "envelope fit needs {MIN_EXTREMA} extrema, found {} (oscillatory: {})",
                peaks.len(),
                sign_changes > 0
            )));
        }
        peaks
    } else {
        pts.into_iter().filter(|(_, v)| v.abs() >= FIT_FLOOR).collect()
    };
    if !envelope && used.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_POINTS,
            got: used.len(),
        });
    }
    let lx: Vec<f64> = used.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = used.iter().map(|(_, v)| v.abs().ln()).collect();
    let (icpt, slope, rms) = linear_fit(&lx, &ly);
    Ok(RateFit {
        exponent: slope,
        log_amplitude: icpt,
        rms_residual: rms,
        window,
        n_points: used.len(),
        oscillatory: envelope && sign_changes > 0,
    })
}

/// Damped oscillation `value ≈ x^ell (A cos(q ln x) + B sin(q ln x))`
/// recovered by order-2 linear prediction on samples uniform in `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationFit {
    /// Decay exponent of the envelope.
    pub ell: f64,
    /// Angular frequency in `ln x`; zero for two real modes.
    pub q: f64,
    /// Second exponent when the two modes are real.
    pub ell_secondary: Option<f64>,
    /// RMS prediction error relative to the RMS of the samples.
    pub rel_residual: f64,
    #[serde(serialize_with = "ser_window")]
    pub window: (f64, f64),
    pub n_points: usize,
}

pub fn fit_damped_oscillation(samples: &[(f64, f64)], window: (f64, f64), n_resample: usize) -> Result<OscillationFit> {
    check_window(window)?;
    let mut pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(x, v)| *x >= window.0 && *x <= window.1 && v.is_finite())
        .map(|(x, v)| (x.ln(), v))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    let uniform = resample_uniform(&pts, n_resample.max(MIN_FIT_POINTS))?;
    let m: Vec<f64> = uniform.iter().map(|p| p.1).collect();
    let h = uniform[1].0 - uniform[0].0;
    let scale = (m.iter().map(|v| v * v).sum::<f64>() / m.len() as f64).sqrt();
    if scale < FIT_FLOOR {
        return Err(Error::DegenerateFit("samples vanish".into()));
    }
    // m[j+2] = c1 m[j+1] + c2 m[j]
    let rows = m.len() - 2;
    let a = DMatrix::from_fn(rows, 2, |j, c| m[j + 1 - c] / scale);
    let rhs = DVector::from_fn(rows, |j, _| m[j + 2] / scale);
    let svd = a.svd(true, true);
    if svd.singular_values.min() <= 1e-13 * svd.singular_values.max() {
        return Err(Error::DegenerateFit("linear prediction system is singular".into()));
    }
    let c = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NumericalFailure(format!("least squares: {e}")))?;
    let (c1, c2) = (c[0], c[1]);
    let pred_err: f64 = (0..m.len() - 2)
        .map(|j| (m[j + 2] - c1 * m[j + 1] - c2 * m[j]).powi(2))
        .sum::<f64>()
        / (m.len() - 2) as f64;
    let disc = c1 * c1 + 4.0 * c2;
    let (ell, q, ell_secondary) = if disc < 0.0 {
        let modulus = (-c2).sqrt();
        let angle = (0.5 * (-disc).sqrt()).atan2(0.5 * c1);
        (modulus.ln() / h, angle / h, None)
    } else {
        let z1 = 0.5 * (c1 + disc.sqrt());
        let z2 = 0.5 * (c1 - disc.sqrt());
        let (big, small) = if z1.abs() >= z2.abs() { (z1, z2) } else { (z2, z1) };
        if big <= 0.0 {
            return Err(Error::DegenerateFit("dominant prediction root is not positive".into()));
        }
        (big.ln() / h, 0.0, (small > 0.0).then(|| small.ln() / h))
    };
    Ok(OscillationFit {
        ell,
        q,
        ell_secondary,
        rel_residual: pred_err.sqrt() / scale,
        window,
        n_points: m.len(),
    })
}

/// True when the abscissae are equally spaced to `1e-9` relative.
pub fn is_uniform(xs: &[f64]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    h > 0.0 && xs.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300) * 1e3)
}

/// `count` equally spaced samples over the range of `pts` (sorted by
/// abscissa), via a natural cubic spline. Uniform input of the same length
/// is returned unchanged.
pub fn resample_uniform(pts: &[(f64, f64)], count: usize) -> Result<Vec<(f64, f64)>> {
    if pts.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: pts.len() });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    if pts.len() == count && is_uniform(&xs) {
        return Ok(pts.to_vec());
    }
    let spline = CubicSpline::new(pts)?;
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let h = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|j| {
            let x = if j + 1 == count { hi } else { lo + j as f64 * h };
            (x, spline.eval(x))
        })
        .collect())
}

/// Natural cubic spline through strictly increasing abscissae.
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(pts: &[(f64, f64)]) -> Result<Self> {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("spline abscissae must be strictly increasing".into()));
        }
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let c = h1 / 6.0;
                let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (d - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        Ok(Self { x, y, m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Finite-difference weights (Fornberg) for derivatives `0..=max_order` at
/// `x0` on the nodes `xs`. Row `k` holds the weights for the `k`-th
/// derivative.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn pure_power_is_exact() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 100.0, 40).into_iter().map(|x| (x, 3.0 * x.powf(-2.5))).collect();
        let f = fit_decay_exponent(&s, (1.0, 100.0), false).unwrap();
        assert!((f.exponent + 2.5).abs() < 1e-12);
        assert_relative_eq!(f.log_amplitude, 3f64.ln(), epsilon = 1e-12);
        assert!(!f.oscillatory);
    }

    #[test]
    fn envelope_of_oscillation() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 1e5, 4000)
            .into_iter()
            .map(|x| (x, x.powf(-1.5) * (1.58 * x.ln()).cos()))
            .collect();
        let f = fit_decay_exponent(&s, (1.0, 1e5), true).unwrap();
        assert!((f.exponent + 1.5).abs() < 0.15, "{}", f.exponent);
        assert!(f.oscillatory);
    }

    #[test]
    fn too_few_extrema() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 10.0, 100)
            .into_iter()
            .map(|x| (x, x.powf(-1.5) * (1.58 * x.ln()).cos()))
            .collect();
        assert_eq!(fit_decay_exponent(&s, (1.0, 10.0), true).unwrap_err().kind(), "DegenerateFit");
    }

    #[test]
    fn fit_errors() {
        let s: Vec<(f64, f64)> = (1..5).map(|i| (i as f64, 1.0)).collect();
        assert_eq!(fit_decay_exponent(&s, (0.5, 10.0), false).unwrap_err().kind(), "InsufficientSamples");
        let z: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 1e-16)).collect();
        assert_eq!(fit_decay_exponent(&z, (0.5, 30.0), false).unwrap_err().kind(), "DegenerateFit");
        assert!(fit_decay_exponent(&z, (3.0, 2.0), false).is_err());
    }

    #[test]
    fn prony_recovers_damped_oscillation() {
        let s: Vec<(f64, f64)> = log_grid(50.0, 500.0, 129)
            .into_iter()
            .map(|x| (x, x.powf(-3.6) * (0.95 * x.ln() + 0.3).cos()))
            .collect();
        let f = fit_damped_oscillation(&s, (50.0, 500.0), 129).unwrap();
        assert_relative_eq!(f.ell, -3.6, epsilon = 1e-8);
        assert_relative_eq!(f.q, 0.95, epsilon = 1e-8);
        let r: Vec<(f64, f64)> = log_grid(50.0, 500.0, 129)
            .into_iter()
            .map(|x| (x, x.powf(-0.9) + 0.5 * x.powf(-2.0)))
            .collect();
        let f = fit_damped_oscillation(&r, (50.0, 500.0), 129).unwrap();
        assert_relative_eq!(f.ell, -0.9, epsilon = 1e-6);
        assert_relative_eq!(f.ell_secondary.unwrap(), -2.0, epsilon = 1e-5);
    }

    #[test]
    fn spline_reproduces_cubic_interior() {
        let pts: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1, (i as f64 * 0.1).sin())).collect();
        let s = CubicSpline::new(&pts).unwrap();
        assert!((s.eval(2.05) - 2.05f64.sin()).abs() < 1e-5);
        assert_eq!(s.eval(0.0), 0.0);
    }

    #[test]
    fn fornberg_central_stencil() {
        let xs: Vec<f64> = (-4..=4).map(f64::from).collect();
        let w = fornberg_weights(0.0, &xs, 4);
        // 9-point central second derivative
        let expected = [-1.0 / 560.0, 8.0 / 315.0, -1.0 / 5.0, 8.0 / 5.0, -205.0 / 72.0];
        for (i, e) in expected.iter().enumerate() {
            assert_relative_eq!(w[2][i], *e, epsilon = 1e-13);
        }
        let f: Vec<f64> = xs.iter().map(|x| (0.1 * x).exp()).collect();
        let d4: f64 = w[4].iter().zip(&f).map(|(a, b)| a * b).sum();
        assert_relative_eq!(d4, 1e-4, max_relative = 1e-6);
    }
}
