//! Spiral-harmonic analysis of sampled fields.
//!
//! A field `u` is decomposed about a chosen origin as
//! `u = (2 pi)^{-1/2} sum_n a_n(rho) exp(i n phi)`; the power per winding
//! number is `C_n = int |a_n(rho)|^2 rho d rho`. Rings of constant radius
//! are sampled by grid interpolation, the angular projection is a plain
//! DFT over the ring, and the radial integral is a trapezoid over uniform
//! radii. Wave-front dislocations are located by the phase winding around
//! each grid plaquette.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{weights_from_cn, OamSpectrum, Provenance};
use crate::error::{Error, Result};
use crate::model::{Interp, SampledField, TWO_PI};

/// Default harmonic range for generic fields.
pub const DEFAULT_N_MAX: usize = 32;

/// Default radial sample count; sized so the trapezoid error of the
/// radial integral sits below ~1e-7 relative on default grids.
pub const DEFAULT_N_RADII: usize = 8192;

/// Plaquettes dimmer than this fraction of the field maximum are not
/// searched for dislocations (phase there is numerical noise).
const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Sampling controls for [`azimuthal_decompose`].
#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Decompose harmonics `n` in `[-n_max, n_max]`.
    pub n_max: usize,
    /// Number of uniformly spaced radii in `[0, max radius]`.
    pub n_radii: usize,
    /// Samples per ring; 0 selects `max(256, 8 n_max)`.
    pub ring_samples: usize,
    pub interp: Interp,
    /// Optional cap on the radial range; the grid border caps it anyway.
    pub max_radius: Option<f64>,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            n_radii: DEFAULT_N_RADII,
            ring_samples: 0,
            interp: Interp::default(),
            max_radius: None,
        }
    }
}

impl DecomposeOptions {
    pub fn with_n_max(n_max: usize) -> Self {
        Self { n_max, ..Self::default() }
    }

    fn rings(&self) -> usize {
        if self.ring_samples == 0 {
            256.max(8 * self.n_max)
        } else {
            self.ring_samples
        }
    }
}

/// `a_n(rho)` on a grid of harmonics times radii.
#[derive(Debug, Clone)]
pub struct AzimuthalProfileTable {
    n_max: usize,
    radii: Vec<f64>,
    /// Row-major `(2 n_max + 1) x radii.len()`, harmonic `-n_max` first.
    coeffs: Vec<Complex64>,
    truncated: bool,
}

impl AzimuthalProfileTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// True when the requested radial range had to be truncated to keep
    /// every ring inside the grid.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// `a_n(rho_j)`; panics when `|n| > n_max` or `j` is out of range.
    pub fn a(&self, n: i64, j: usize) -> Complex64 {
        let row = (n + self.n_max as i64) as usize;
        self.coeffs[row * self.radii.len() + j]
    }

    /// Trapezoid integral `int |a_n|^2 rho d rho` for one harmonic.
    fn c_n(&self, n: i64) -> f64 {
        let radii = &self.radii;
        if radii.len() < 2 {
            return 0.0;
        }
        let drho = radii[1] - radii[0];
        let mut acc = 0.0;
        for (j, &rho) in radii.iter().enumerate() {
            let w = if j == 0 || j == radii.len() - 1 { 0.5 } else { 1.0 };
            acc += w * self.a(n, j).norm_sqr() * rho;
        }
        acc * drho
    }
}

fn require_inside(field: &SampledField, x: f64, y: f64) -> Result<()> {
    if !field.contains(x, y) {
        return Err(Error::OriginOutsideGrid { x, y });
    }
    Ok(())
}

/// Distance from `(x, y)` to the nearest grid border, minus the
/// interpolation stencil margin.
fn usable_radius(field: &SampledField, x: f64, y: f64, interp: Interp) -> f64 {
    let (ox, oy) = field.origin();
    let ex = field.half_extent_x() - (x - ox).abs();
    let ey = field.half_extent_y() - (y - oy).abs();
    let margin = match interp {
        Interp::Bilinear => 1.0,
        Interp::Cubic => 2.0,
    };
    (ex.min(ey) - margin * field.dx().max(field.dy())).max(0.0)
}

/// Projects the field onto spiral harmonics about `origin`.
///
/// Each radius is sampled on a uniform angular ring by grid interpolation
/// and the Fourier coefficients are extracted per ring. Rings never leave
/// the grid: the radial range is truncated at the border and the table
/// records that truncation.
pub fn azimuthal_decompose(
    field: &SampledField,
    origin: (f64, f64),
    opts: &DecomposeOptions,
) -> Result<AzimuthalProfileTable> {
    if opts.n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if opts.n_radii < 16 {
        return Err(Error::InvalidParameter(format!(
            "n_radii must be at least 16, got {}",
            opts.n_radii
        )));
    }
    let (x0, y0) = origin;
    require_inside(field, x0, y0)?;

    let nominal = field.half_extent_x().min(field.half_extent_y());
    let fit = usable_radius(field, x0, y0, opts.interp);
    let requested = opts.max_radius.unwrap_or(nominal).min(nominal);
    let rho_max = requested.min(fit);
    let truncated = rho_max + 1e-12 < requested;
    if rho_max <= 0.0 {
        return Err(Error::OriginOutsideGrid { x: x0, y: y0 });
    }

    let n_max = opts.n_max;
    let n_radii = opts.n_radii;
    let k = opts.rings();
    let drho = rho_max / (n_radii as f64 - 1.0);

    // one angular table shared by every ring
    let dirs: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let th = TWO_PI * i as f64 / k as f64;
            (th.cos(), th.sin())
        })
        .collect();
    // e^{-i theta_k}
    let steps: Vec<Complex64> = dirs.iter().map(|&(c, s)| Complex64::new(c, -s)).collect();

    let rows = 2 * n_max + 1;
    let radii: Vec<f64> = (0..n_radii).map(|j| j as f64 * drho).collect();
    let scale = TWO_PI.sqrt() / k as f64;

    let per_radius: Vec<Vec<Complex64>> = radii
        .par_iter()
        .map(|&rho| {
            let mut acc = vec![Complex64::new(0.0, 0.0); rows];
            for (i, &(c, s)) in dirs.iter().enumerate() {
                let v = field
                    .interpolate(x0 + rho * c, y0 + rho * s, opts.interp)
                    .unwrap_or_else(|| Complex64::new(0.0, 0.0));
                // iterate e^{-i n theta} for n = 0..n_max and its conjugate
                acc[n_max] += v;
                let step = steps[i];
                let mut cur = v;
                for n in 1..=n_max {
                    cur *= step;
                    acc[n_max + n] += cur;
                }
                let conj_step = step.conj();
                let mut cur = v;
                for n in 1..=n_max {
                    cur *= conj_step;
                    acc[n_max - n] += cur;
                }
            }
            for a in &mut acc {
                *a *= scale;
            }
            acc
        })
        .collect();

    let mut coeffs = vec![Complex64::new(0.0, 0.0); rows * n_radii];
    for (j, ring) in per_radius.iter().enumerate() {
        for (row, &a) in ring.iter().enumerate() {
            coeffs[row * n_radii + j] = a;
        }
    }

    Ok(AzimuthalProfileTable { n_max, radii, coeffs, truncated })
}

/// Numeric spectrum `C_n = int |a_n|^2 rho d rho` about `origin`.
pub fn spectrum_from_field_with(
    field: &SampledField,
    origin: (f64, f64),
    opts: &DecomposeOptions,
) -> Result<OamSpectrum> {
    let table = azimuthal_decompose(field, origin, opts)?;
    let entries = (-(opts.n_max as i64)..=opts.n_max as i64)
        .map(|n| (n, table.c_n(n)))
        .collect();
    OamSpectrum::new(entries, Provenance::Numeric)
}

/// Numeric spectrum with default sampling resolution.
pub fn spectrum_from_field(
    field: &SampledField,
    origin: (f64, f64),
    n_max: usize,
) -> Result<OamSpectrum> {
    spectrum_from_field_with(field, origin, &DecomposeOptions::with_n_max(n_max))
}

/// Total power and mean OAM per photon (in hbar) about `origin`.
///
/// The power is the plain discrete integral `sum |u|^2 dx dy`; the mean is
/// `sum n C_n / sum C_n` from the spiral-harmonic decomposition.
pub fn energy_and_oam(field: &SampledField, origin: (f64, f64)) -> Result<(f64, f64)> {
    let power = field.power();
    if power == 0.0 {
        return Err(Error::InvalidParameter("zero field has no OAM content".into()));
    }
    let spectrum = spectrum_from_field(field, origin, DEFAULT_N_MAX)?;
    let weights = weights_from_cn(&spectrum)?;
    Ok((power, weights.mean_oam()))
}

/// One detected screw dislocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dislocation {
    pub x: f64,
    pub y: f64,
    pub charge: i64,
}

/// Dislocations found on a grid, with the detection cell size.
#[derive(Debug, Clone, PartialEq)]
pub struct DislocationSet {
    pub dislocations: Vec<Dislocation>,
    pub cell_size: f64,
}

impl DislocationSet {
    pub fn len(&self) -> usize {
        self.dislocations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dislocations.is_empty()
    }

    /// Sum of detected charges.
    pub fn net_charge(&self) -> i64 {
        self.dislocations.iter().map(|d| d.charge).sum()
    }
}

fn wrap_phase(d: f64) -> f64 {
    let r = d.rem_euclid(TWO_PI);
    if r > std::f64::consts::PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Finds wave-front dislocations by the phase winding around every 2x2
/// plaquette; windings of `2 pi k` report a charge-`k` dislocation at the
/// plaquette center. Adjacent detections within one cell are merged, so a
/// multi-charge core shows up as a single entry with its net charge.
///
/// Every grid edge is wrapped once in a canonical orientation and reused by
/// both neighboring plaquettes, so interior contributions telescope exactly
/// and the summed charge over any region equals the winding of its boundary
/// even when a phase step lands on the branch cut.
pub fn locate_dislocations(field: &SampledField) -> DislocationSet {
    let (nx, ny) = (field.nx(), field.ny());
    let floor = AMPLITUDE_FLOOR * field.max_abs();
    let phases: Vec<f64> = field.values().iter().map(|v| v.arg()).collect();
    // canonical edge differences: h along +x, v along +y
    let h_edge = |ix: usize, iy: usize| wrap_phase(phases[iy * nx + ix + 1] - phases[iy * nx + ix]);
    let v_edge = |ix: usize, iy: usize| wrap_phase(phases[(iy + 1) * nx + ix] - phases[iy * nx + ix]);
    let mut raw: Vec<(usize, usize, i64)> = Vec::new();
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let amax = field
                .get(ix, iy)
                .norm()
                .max(field.get(ix + 1, iy).norm())
                .max(field.get(ix + 1, iy + 1).norm())
                .max(field.get(ix, iy + 1).norm());
            if amax <= floor {
                continue;
            }
            let winding =
                h_edge(ix, iy) + v_edge(ix + 1, iy) - h_edge(ix, iy + 1) - v_edge(ix, iy);
            let k = (winding / TWO_PI).round() as i64;
            if k != 0 {
                raw.push((ix, iy, k));
            }
        }
    }

    // merge plaquette detections that touch within one cell
    let mut used = vec![false; raw.len()];
    let mut merged = Vec::new();
    for i in 0..raw.len() {
        if used[i] {
            continue;
        }
        let mut stack = vec![i];
        used[i] = true;
        let mut members = Vec::new();
        while let Some(j) = stack.pop() {
            members.push(raw[j]);
            for (l, &(lx, ly, _)) in raw.iter().enumerate() {
                if !used[l] && lx.abs_diff(raw[j].0) <= 1 && ly.abs_diff(raw[j].1) <= 1 {
                    used[l] = true;
                    stack.push(l);
                }
            }
        }
        let charge: i64 = members.iter().map(|&(_, _, c)| c).sum();
        if charge == 0 {
            continue;
        }
        let cx = members
            .iter()
            .map(|&(ix, _, _)| field.x_at(ix) + field.dx() / 2.0)
            .sum::<f64>()
            / members.len() as f64;
        let cy = members
            .iter()
            .map(|&(_, iy, _)| field.y_at(iy) + field.dy() / 2.0)
            .sum::<f64>()
            / members.len() as f64;
        merged.push(Dislocation { x: cx, y: cy, charge });
    }
    merged.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());

    DislocationSet { dislocations: merged, cell_size: field.dx().max(field.dy()) }
}

/// Total phase winding (in units of 2 pi) along a circle of `radius` about
/// the grid center.
///
/// Errors when the circle leaves the grid or the interpolated amplitude
/// anywhere on it drops below `1e-12` of the field maximum.
pub fn net_topological_charge(field: &SampledField, radius: f64) -> Result<i64> {
    let (ox, oy) = field.origin();
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    if radius > usable_radius(field, ox, oy, Interp::Cubic) {
        return Err(Error::InvalidParameter(format!(
            "circle of radius {radius} does not fit inside the grid"
        )));
    }
    const SAMPLES: usize = 4096;
    let floor = AMPLITUDE_FLOOR * field.max_abs();
    let mut phases = Vec::with_capacity(SAMPLES);
    for i in 0..SAMPLES {
        let th = TWO_PI * i as f64 / SAMPLES as f64;
        let v = field
            .interpolate(ox + radius * th.cos(), oy + radius * th.sin(), Interp::Cubic)
            .ok_or(Error::AmplitudeBelowThreshold)?;
        if v.norm() <= floor {
            return Err(Error::AmplitudeBelowThreshold);
        }
        phases.push(v.arg());
    }
    let mut winding = 0.0;
    for i in 0..SAMPLES {
        winding += wrap_phase(phases[(i + 1) % SAMPLES] - phases[i]);
    }
    Ok((winding / TWO_PI).round() as i64)
}
