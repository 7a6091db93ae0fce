//! Inverse design of vortex pancakes.
//!
//! For two vortices the weight algebra closes in analytic form:
//!
//! * equal populations `P_0 = P_1 = P_2 = 1/3` require
//!   `rho1^2 rho2^2 = w0^4 / 2` together with an angle condition
//!   `cos(phi1 - phi2) = (w0^2 - rho1^2 - rho2^2) / (2 rho1 rho2)`;
//! * `P_0 = 0` follows from a centered vortex, `rho2 = w0 sqrt((1-P2)/P2)`;
//! * `P_1 = 0` from an antipodal equal-radius pair,
//!   `rho = w0 ((1-P2)/(2 P2))^{1/4}`;
//! * `P_2 -> 0` only asymptotically, by exiling one vortex far outside the
//!   host, `rho1 = w0 sqrt((1-P1)/(2 P1))`.
//!
//! Arbitrary `N` falls to a seeded multistart Nelder-Mead search over the
//! Cartesian vortex coordinates, minimizing the squared weight error.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{n2_closed_form, pancake_weights, WeightVector};
use crate::error::{Error, Result};
use crate::model::{elementary_symmetric_all, fact, VortexPancake, TWO_PI};

/// A prescribed weight distribution over `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignTarget {
    n: usize,
    tolerance: f64,
    weights: BTreeMap<i64, f64>,
}

impl DesignTarget {
    /// Validates that the weights are a distribution supported on `[0, N]`.
    pub fn new(n: usize, tolerance: f64, weights: BTreeMap<i64, f64>) -> Result<Self> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        let mut sum = 0.0;
        for (&idx, &p) in &weights {
            if idx < 0 || idx > n as i64 {
                return Err(Error::InvalidParameter(format!(
                    "target weight at n = {idx} outside the reachable range [0, {n}]"
                )));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "target weight P_{idx} = {p} must be non-negative"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "target weights sum to {sum}, expected 1 within 1e-9"
            )));
        }
        Ok(Self { n, tolerance, weights })
    }

    /// Uniform target `P_n = 1/(N+1)` over `n = 0..=N`.
    pub fn uniform(n: usize, tolerance: f64) -> Self {
        let p = 1.0 / (n as f64 + 1.0);
        let weights = (0..=n as i64).map(|i| (i, p)).collect();
        Self { n, tolerance, weights }
    }

    pub fn vortex_count(&self) -> usize {
        self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn weights(&self) -> &BTreeMap<i64, f64> {
        &self.weights
    }

    fn p(&self, n: i64) -> f64 {
        self.weights.get(&n).copied().unwrap_or(0.0)
    }
}

/// Outcome of the numerical inverse search.
#[derive(Debug, Clone)]
pub struct DesignResult {
    pub pancake: VortexPancake,
    pub achieved: WeightVector,
    /// Largest absolute weight error against the target.
    pub residual: f64,
    pub iterations: usize,
    pub starts: usize,
    pub converged: bool,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Closed forms for N = 2
// ---------------------------------------------------------------------------

/// The two candidate angle offsets `phi1 - phi2` for equal populations at a
/// given `rho1`: the directly derived branch `acos(x)` and the
/// sign-flipped branch `pi - acos(x)`, with
/// `x = (w0^2 - rho1^2 - rho2^2)/(2 rho1 rho2)`.
///
/// Only one of the two can equalize `C_1` with `C_2`; callers verify which.
pub fn equal_population_angle_branches(w0: f64, rho1: f64) -> Result<(f64, f64)> {
    if !(w0 > 0.0) || !(rho1 > 0.0) {
        return Err(Error::Infeasible(format!(
            "need positive w0 and rho1, got w0 = {w0}, rho1 = {rho1}"
        )));
    }
    let rho2 = w0 * w0 / (std::f64::consts::SQRT_2 * rho1);
    let x = (w0 * w0 - rho1 * rho1 - rho2 * rho2) / (2.0 * rho1 * rho2);
    if x.abs() > 1.0 {
        return Err(Error::Infeasible(format!(
            "angle condition violated: |cos(dphi)| = {} > 1 at rho1 = {rho1}",
            x.abs()
        )));
    }
    let direct = x.acos();
    let printed = std::f64::consts::PI - x.acos();
    Ok((direct, printed))
}

/// Two-vortex pancake with equal populations `P_0 = P_1 = P_2 = 1/3`.
///
/// The free parameter `rho1` slides along the hyperbola
/// `rho1^2 rho2^2 = w0^4/2`; both candidate angle branches are evaluated
/// through the closed-form spectrum and the one that actually equalizes
/// the three populations is returned.
pub fn design_equal_populations_n2(w0: f64, rho1: f64) -> Result<VortexPancake> {
    let (direct, printed) = equal_population_angle_branches(w0, rho1)?;
    let rho2 = w0 * w0 / (std::f64::consts::SQRT_2 * rho1);
    let mut best: Option<(f64, VortexPancake)> = None;
    for dphi in [direct, printed] {
        let p = VortexPancake::new(
            Complex64::new(1.0, 0.0),
            w0,
            vec![(rho1, dphi), (rho2, 0.0)],
        )?;
        let (c0, c1, c2) = n2_closed_form(&p)?;
        let mean = (c0 + c1 + c2) / 3.0;
        let dev = (c0 - mean).abs().max((c1 - mean).abs()).max((c2 - mean).abs()) / mean;
        if best.as_ref().map_or(true, |(d, _)| dev < *d) {
            best = Some((dev, p));
        }
    }
    let (dev, pancake) = best.expect("two candidates were evaluated");
    if dev > 1e-9 {
        return Err(Error::Infeasible(format!(
            "neither angle branch equalizes the populations (residual {dev:.3e})"
        )));
    }
    Ok(pancake)
}

/// `P_0 = 0` design: one vortex on axis, the other at
/// `rho2 = w0 sqrt((1 - P2)/P2)`, realizing `(P_1, P_2) = (1 - P2, P2)`.
pub fn design_suppress_p0(w0: f64, p2: f64) -> Result<VortexPancake> {
    check_unit_interval("P_2", p2)?;
    check_waist(w0)?;
    let rho2 = w0 * ((1.0 - p2) / p2).sqrt();
    VortexPancake::new(Complex64::new(1.0, 0.0), w0, vec![(0.0, 0.0), (rho2, 0.0)])
}

/// `P_1 = 0` design: antipodal vortices of equal radius
/// `w0 ((1 - P2)/(2 P2))^{1/4}`, realizing `(P_0, P_2) = (1 - P2, P2)`.
pub fn design_suppress_p1(w0: f64, p2: f64) -> Result<VortexPancake> {
    check_unit_interval("P_2", p2)?;
    check_waist(w0)?;
    let rho = w0 * ((1.0 - p2) / (2.0 * p2)).powf(0.25);
    VortexPancake::new(
        Complex64::new(1.0, 0.0),
        w0,
        vec![(rho, std::f64::consts::PI), (rho, 0.0)],
    )
}

/// An asymptotic `P_2 -> 0` design together with its guaranteed bound.
#[derive(Debug, Clone)]
pub struct SuppressP2Design {
    pub pancake: VortexPancake,
    pub achieved: WeightVector,
    /// `P_2 <= (w0 / rho2_cut)^2`, independent of the target split.
    pub p2_bound: f64,
}

/// `P_2 -> 0` design: the far vortex sits at `rho2_cut`, the near one at
/// `rho1 = w0 sqrt((1 - P1)/(2 P1))`; the quarter-turn angle offset kills
/// the cross term so the split is accurate to `O((w0/rho2_cut)^2)`.
pub fn design_suppress_p2(w0: f64, p1: f64, rho2_cut: f64) -> Result<SuppressP2Design> {
    check_unit_interval("P_1", p1)?;
    check_waist(w0)?;
    if !(rho2_cut >= 10.0 * w0) {
        return Err(Error::Infeasible(format!(
            "rho2_cut = {rho2_cut} below the asymptotic guard 10 w0 = {}",
            10.0 * w0
        )));
    }
    let rho1 = w0 * ((1.0 - p1) / (2.0 * p1)).sqrt();
    let pancake = VortexPancake::new(
        Complex64::new(1.0, 0.0),
        w0,
        vec![(rho1, std::f64::consts::FRAC_PI_2), (rho2_cut, 0.0)],
    )?;
    let achieved = pancake_weights(&pancake)?;
    Ok(SuppressP2Design { pancake, achieved, p2_bound: (w0 / rho2_cut).powi(2) })
}

fn check_unit_interval(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1], got {p}")));
    }
    Ok(())
}

fn check_waist(w0: f64) -> Result<()> {
    if !(w0 > 0.0) || !w0.is_finite() {
        return Err(Error::InvalidParameter(format!("waist must be positive, got {w0}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// General N: multistart Nelder-Mead over Cartesian vortex coordinates
// ---------------------------------------------------------------------------

/// Squared weight error of vortex positions `(x_l, y_l)` against the target.
///
/// Works on ratios only, so the host amplitude never enters.
fn objective(coords: &[f64], w0: f64, target: &DesignTarget) -> f64 {
    let n = coords.len() / 2;
    let roots: Vec<Complex64> = (0..n)
        .map(|l| Complex64::new(coords[2 * l], coords[2 * l + 1]))
        .collect();
    let b = elementary_symmetric_all(&roots);
    let w2h = w0 * w0 / 2.0;
    let mut c = vec![0.0; n + 1];
    let mut total = 0.0;
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = fact(k as u64) * w2h.powi(k as i32 + 1) * b[n - k].norm_sqr();
        total += *ck;
    }
    if !(total > 0.0) || !total.is_finite() {
        return f64::INFINITY;
    }
    let mut err = 0.0;
    for (k, ck) in c.iter().enumerate() {
        let d = ck / total - target.p(k as i64);
        err += d * d;
    }
    err
}

struct SimplexOutcome {
    best: Vec<f64>,
    f_best: f64,
    iterations: usize,
}

/// One Nelder-Mead descent with standard reflection/expansion/contraction
/// coefficients and full shrinks.
fn nelder_mead<F>(f: &F, start: &[f64], scale: f64, max_iter: usize) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for j in 0..dim {
        let mut v = start.to_vec();
        v[j] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        // order: best first
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = values[worst] - values[best];
        if spread.abs() < 1e-18 && values[best].is_finite() {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &i in &order[..dim] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let lerp = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let reflected = lerp(1.0);
        let f_reflected = f(&reflected);
        if f_reflected < values[best] {
            let expanded = lerp(2.0);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = if f_reflected < values[worst] { lerp(0.5) } else { lerp(-0.5) };
            let f_contracted = f(&contracted);
            if f_contracted < values[worst].min(f_reflected) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink towards the best vertex
                let anchor = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    for (v, &a) in simplex[i].iter_mut().zip(&anchor) {
                        *v = a + 0.5 * (*v - a);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let (ibest, &f_best) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    SimplexOutcome { best: simplex[ibest].clone(), f_best, iterations }
}

/// Canonical gauge: sort vortices by radius (then azimuth) and rotate the
/// whole configuration so the first off-axis vortex sits at `phi = 0`.
fn gauge_fixed(coords: &[f64], w0: f64) -> Result<VortexPancake> {
    let n = coords.len() / 2;
    let mut polar: Vec<(f64, f64)> = (0..n)
        .map(|l| {
            let (x, y) = (coords[2 * l], coords[2 * l + 1]);
            (x.hypot(y), y.atan2(x).rem_euclid(TWO_PI))
        })
        .collect();
    let alpha = polar
        .iter()
        .find(|(rho, _)| *rho > 1e-12)
        .map(|&(_, phi)| phi)
        .unwrap_or(0.0);
    for (_, phi) in &mut polar {
        *phi = (*phi - alpha).rem_euclid(TWO_PI);
    }
    polar.sort_by(|a, b| a.partial_cmp(b).unwrap());
    VortexPancake::new(Complex64::new(1.0, 0.0), w0, polar)
}

/// Searches vortex positions whose weights match `target`.
///
/// Each start draws its initial configuration from its own seeded stream
/// (so adding starts never changes earlier ones), runs a simplex descent
/// plus one polishing restart, and the best objective wins with ties broken
/// by start index. Non-convergence is reported in the result, not an error.
pub fn design_general(
    target: &DesignTarget,
    starts: usize,
    seed: u64,
    max_iter: usize,
) -> Result<DesignResult> {
    if starts == 0 {
        return Err(Error::InvalidParameter("at least one start is required".into()));
    }
    if target.vortex_count() == 0 {
        return Err(Error::InvalidParameter(
            "design needs at least one vortex; N = 0 fixes P_0 = 1".into(),
        ));
    }
    let w0 = 1.0;
    let n = target.vortex_count();
    let dim = 2 * n;
    let f = |coords: &[f64]| objective(coords, w0, target);

    let outcomes: Vec<SimplexOutcome> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut start = vec![0.0; dim];
            for l in 0..n {
                // uniform in the disk of radius 2 w0
                let r = 2.0 * w0 * rng.gen::<f64>().sqrt();
                let th = TWO_PI * rng.gen::<f64>();
                start[2 * l] = r * th.cos();
                start[2 * l + 1] = r * th.sin();
            }
            let coarse = nelder_mead(&f, &start, 0.3 * w0, max_iter);
            let polish = nelder_mead(&f, &coarse.best, 0.02 * w0, max_iter);
            SimplexOutcome {
                best: polish.best,
                f_best: polish.f_best,
                iterations: coarse.iterations + polish.iterations,
            }
        })
        .collect();

    let winner = outcomes
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            a.f_best.partial_cmp(&b.f_best).unwrap().then(ia.cmp(ib))
        })
        .map(|(_, o)| o)
        .expect("at least one start ran");

    let pancake = gauge_fixed(&winner.best, w0)?;
    let achieved = pancake_weights(&pancake)?;
    let residual = (0..=n as i64)
        .map(|k| (achieved.p(k) - target.p(k)).abs())
        .fold(0.0, f64::max);
    Ok(DesignResult {
        pancake,
        achieved,
        residual,
        iterations: winner.iterations,
        starts,
        converged: residual <= target.tolerance(),
        seed,
    })
}

// ---------------------------------------------------------------------------
// Parameter scans
// ---------------------------------------------------------------------------

/// Which vortex coordinate a scan sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParameter {
    Rho,
    Phi,
}

impl std::str::FromStr for ScanParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(Self::Rho),
            "phi" => Ok(Self::Phi),
            other => Err(Error::InvalidParameter(format!(
                "scannable parameters are 'rho' and 'phi', got '{other}'"
            ))),
        }
    }
}

/// Weights versus one swept vortex coordinate.
#[derive(Debug, Clone)]
pub struct ScanTable {
    pub parameter: ScanParameter,
    pub vortex_index: usize,
    /// Mode indices `0..=N`, the columns of `weights`.
    pub modes: Vec<i64>,
    /// `(swept value, [P_n per mode])` per step.
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl ScanTable {
    /// Column of `P_n` over the scan.
    pub fn mode_column(&self, n: i64) -> Vec<f64> {
        let idx = self.modes.iter().position(|&m| m == n).expect("mode in range");
        self.rows.iter().map(|(_, ws)| ws[idx]).collect()
    }
}

/// Sweeps `rho` or `phi` of one vortex, recomputing the closed-form weights
/// at every step.
pub fn scan_parameter(
    pancake: &VortexPancake,
    vortex_index: usize,
    parameter: ScanParameter,
    range: (f64, f64),
    steps: usize,
) -> Result<ScanTable> {
    let n = pancake.vortex_count();
    if vortex_index >= n {
        return Err(Error::IndexOutOfRange { index: vortex_index, limit: n });
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    let (lo, hi) = range;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter("scan range must be finite".into()));
    }
    if parameter == ScanParameter::Rho && (lo < 0.0 || hi < 0.0) {
        return Err(Error::InvalidParameter("radial scan range must be non-negative".into()));
    }
    let modes: Vec<i64> = (0..=n as i64).collect();
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let value = lo + (hi - lo) * i as f64 / (steps as f64 - 1.0);
        let mut vortices: Vec<(f64, f64)> =
            pancake.vortices().iter().map(|v| (v.rho, v.phi)).collect();
        match parameter {
            ScanParameter::Rho => vortices[vortex_index].0 = value,
            ScanParameter::Phi => vortices[vortex_index].1 = value,
        }
        let p = VortexPancake::new(pancake.a0(), pancake.w0(), vortices)?;
        let w = pancake_weights(&p)?;
        rows.push((value, modes.iter().map(|&m| w.p(m)).collect()));
    }
    Ok(ScanTable { parameter, vortex_index, modes, rows })
}
