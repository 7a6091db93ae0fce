//! Rotating-Dove-prism detection, emulated end to end.
//!
//! A prism rotating at angular velocity `Omega` Doppler-shifts a mode of
//! winding number `m` by `2 m Omega`, so a superposition becomes a comb of
//! sidebands whose amplitudes carry the mode weights. Beating the shifted
//! signal against an unshifted unit-amplitude reference gives the readout
//! intensity
//!
//! ```text
//! I(t) = | 1 + sum_n sqrt(P_n) exp(i 2 n Omega t) |^2 .
//! ```
//!
//! Recovery inverts the quadratic relation between the Fourier lines of
//! `I(t)` and the amplitudes `sqrt(P_n)` by a homotopy-continued Newton
//! solve, so the weights -> signal -> weights loop closes to round-off for
//! leakage-free (integer-period) records.

use std::collections::BTreeMap;

use crate::analytic::WeightVector;
use crate::error::{Error, Result};

/// One rotational-Doppler line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandLine {
    pub n: i64,
    /// Frequency offset `2 n Omega` from the unshifted carrier.
    pub delta_omega: f64,
    pub weight: f64,
}

/// The sideband comb of a weight vector at prism speed `Omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSpectrum {
    omega_prism: f64,
    lines: Vec<SidebandLine>,
}

impl SidebandSpectrum {
    pub fn omega_prism(&self) -> f64 {
        self.omega_prism
    }

    pub fn lines(&self) -> &[SidebandLine] {
        &self.lines
    }

    /// Highest occupied winding number.
    pub fn n_max(&self) -> i64 {
        self.lines.iter().map(|l| l.n).max().unwrap_or(0)
    }
}

/// Maps occupied weights to sideband lines at offsets `2 n Omega`.
pub fn sidebands_from_weights(w: &WeightVector, omega: f64) -> Result<SidebandSpectrum> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "prism angular velocity must be positive, got {omega}"
        )));
    }
    let lines: Vec<SidebandLine> = w
        .weights()
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(&n, &p)| SidebandLine { n, delta_omega: 2.0 * n as f64 * omega, weight: p })
        .collect();
    Ok(SidebandSpectrum { omega_prism: omega, lines })
}

/// A uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }
}

/// Minimum sample rate accepted for a comb reaching winding number `n_max`:
/// twice the highest beat frequency `2 n_max Omega / (2 pi)` in Hz, doubled
/// again as a safety factor.
pub fn required_sample_rate(omega: f64, n_max: i64) -> f64 {
    4.0 * omega * n_max as f64 / std::f64::consts::PI
}

/// Interferogram of the shifted comb against a unit reference.
///
/// Negative winding numbers are legal (offsets just become negative);
/// the Nyquist check uses the largest |n|.
pub fn synthesize_beat_signal(
    s: &SidebandSpectrum,
    duration: f64,
    sample_rate: f64,
) -> Result<TimeSeries> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let n_abs = s.lines.iter().map(|l| l.n.abs()).max().unwrap_or(0);
    let required = required_sample_rate(s.omega_prism, n_abs);
    if sample_rate <= required {
        return Err(Error::NyquistViolation { required, got: sample_rate });
    }
    let count = (duration * sample_rate).round() as usize;
    if count == 0 {
        return Err(Error::InvalidParameter("duration shorter than one sample".into()));
    }
    let dt = 1.0 / sample_rate;
    let amps: Vec<(f64, f64)> =
        s.lines.iter().map(|l| (l.weight.sqrt(), l.delta_omega)).collect();
    let samples: Vec<f64> = (0..count)
        .map(|j| {
            let t = j as f64 * dt;
            let mut re = 1.0;
            let mut im = 0.0;
            for &(a, dw) in &amps {
                re += a * (dw * t).cos();
                im += a * (dw * t).sin();
            }
            re * re + im * im
        })
        .collect();
    Ok(TimeSeries { dt, samples })
}

/// Weights estimated back from a beat record.
#[derive(Debug, Clone)]
pub struct RecoveredWeights {
    pub weights: WeightVector,
    /// Power fraction found in beat harmonics above `n_max`.
    pub unexplained_energy: f64,
    /// Set when `unexplained_energy` exceeds 1e-8: the harmonic range did
    /// not cover the signal.
    pub unexplained_flag: bool,
}

/// Fourier coefficient of the record at harmonic `k` of the fundamental
/// beat `2 Omega` (exact for integer-period records).
fn beat_coefficient(ts: &TimeSeries, omega: f64, k: usize) -> (f64, f64) {
    let m = ts.samples.len() as f64;
    let w = 2.0 * omega * k as f64 * ts.dt;
    let mut re = 0.0;
    let mut im = 0.0;
    for (j, &v) in ts.samples.iter().enumerate() {
        let ph = w * j as f64;
        re += v * ph.cos();
        im -= v * ph.sin();
    }
    (re / m, im / m)
}

/// Solves the dense linear system `a x = b` in place by partial-pivot
/// Gaussian elimination. Sizes here are tiny (<= n_max + 1).
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (pivot, max) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if max < 1e-300 {
            return Err(Error::Numerical("singular Jacobian in sideband recovery".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Ok(x)
}

/// Residual of the sideband system at homotopy parameter `lambda`:
///
/// ```text
/// k = 0:   2 q_0 + lambda sum_n q_n^2            - d_0
/// k >= 1:  q_k  + lambda sum_n q_n q_{n+k}       - d_k
/// ```
fn residual(q: &[f64], d: &[f64], lambda: f64) -> Vec<f64> {
    let n = q.len();
    let mut f = vec![0.0; n];
    f[0] = 2.0 * q[0] + lambda * q.iter().map(|v| v * v).sum::<f64>() - d[0];
    for k in 1..n {
        let cross: f64 = (0..n - k).map(|m| q[m] * q[m + k]).sum();
        f[k] = q[k] + lambda * cross - d[k];
    }
    f
}

fn jacobian(q: &[f64], lambda: f64) -> Vec<Vec<f64>> {
    let n = q.len();
    let mut j = vec![vec![0.0; n]; n];
    for m in 0..n {
        j[0][m] = 2.0 * lambda * q[m];
    }
    j[0][0] += 2.0;
    for k in 1..n {
        for m in 0..n {
            let mut v = 0.0;
            if m + k < n {
                v += q[m + k];
            }
            if m >= k {
                v += q[m - k];
            }
            j[k][m] = lambda * v;
        }
        j[k][k] += 1.0;
    }
    j
}

fn newton_at(q: &mut Vec<f64>, d: &[f64], lambda: f64, scale: f64) -> Result<bool> {
    for _ in 0..60 {
        let f = residual(q, d, lambda);
        let worst = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if worst < 1e-13 * scale.max(1.0) {
            return Ok(true);
        }
        let mut j = jacobian(q, lambda);
        let mut rhs = f;
        let step = solve_dense(&mut j, &mut rhs)?;
        for (qi, si) in q.iter_mut().zip(&step) {
            *qi -= si;
        }
    }
    Ok(false)
}

/// Estimates `P_n` for `n = 0..=n_max` from a beat record.
///
/// The record must span an integer number of fundamental beat periods
/// `pi / Omega`; anything else leaks across lines and is rejected. Line
/// positions are fixed at `2 n Omega` by construction, only magnitudes are
/// estimated.
pub fn recover_weights(ts: &TimeSeries, omega: f64, n_max: usize) -> Result<RecoveredWeights> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "prism angular velocity must be positive, got {omega}"
        )));
    }
    if ts.samples.len() < 4 {
        return Err(Error::InvalidParameter("record too short".into()));
    }
    let periods = ts.duration() * omega / std::f64::consts::PI;
    if (periods - periods.round()).abs() > 1e-6 * periods.max(1.0) || periods.round() < 1.0 {
        return Err(Error::SpectralLeakage { periods });
    }

    // measured line coefficients, taking the real part (the model's lines
    // are real for non-negative amplitudes)
    let mut d = vec![0.0; n_max + 1];
    for (k, dk) in d.iter_mut().enumerate() {
        let (re, _) = beat_coefficient(ts, omega, k);
        *dk = re;
    }
    d[0] -= 1.0; // remove the reference's own DC unit power

    let scale = d.iter().fold(0.0f64, |a, &b| a.max(b.abs()));

    // homotopy from the linear readout (lambda = 0) to the full quadratic
    // model (lambda = 1), with step halving when Newton stalls
    let mut q: Vec<f64> = d.clone();
    q[0] = d[0] / 2.0;
    let mut lambda = 0.0f64;
    let mut step = 0.25f64;
    while lambda < 1.0 {
        let target = (lambda + step).min(1.0);
        let mut trial = q.clone();
        if newton_at(&mut trial, &d, target, scale)? {
            q = trial;
            lambda = target;
            step = (step * 2.0).min(0.25);
        } else {
            step /= 2.0;
            if step < 1e-4 {
                return Err(Error::Numerical(
                    "sideband recovery homotopy failed to reach lambda = 1".into(),
                ));
            }
        }
    }

    // energy above the modeled band (flags an n_max chosen too small)
    let nyquist_k = (std::f64::consts::PI / (2.0 * omega * ts.dt)).floor() as usize;
    let extra_hi = (2 * n_max + 8).min(nyquist_k.saturating_sub(1));
    let mut band_power = 0.0;
    let mut extra_power = 0.0;
    for k in 1..=extra_hi {
        let (re, im) = beat_coefficient(ts, omega, k);
        let p = re * re + im * im;
        if k <= n_max {
            band_power += p;
        } else {
            extra_power += p;
        }
    }
    let unexplained = if band_power + extra_power > 0.0 {
        extra_power / (band_power + extra_power)
    } else {
        0.0
    };

    let raw: Vec<f64> = q.iter().map(|&v| if v > 0.0 { v * v } else { 0.0 }).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroSpectrum);
    }
    let weights: BTreeMap<i64, f64> = raw
        .iter()
        .enumerate()
        .map(|(n, &p)| (n as i64, p / total))
        .collect();
    Ok(RecoveredWeights {
        weights: WeightVector::new(weights)?,
        unexplained_energy: unexplained,
        unexplained_flag: unexplained > 1e-8,
    })
}
