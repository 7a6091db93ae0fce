//! Field sources and their sampled-grid representation.
//!
//! Three analytic source families are modeled at the waist plane `z = 0`:
//!
//! * [`LgModeP0`] — unit-power Laguerre-Gaussian modes with radial index 0,
//!   `u_m(rho, phi) = sqrt(2 / (pi |m|!)) (1/w0) (sqrt(2) rho / w0)^|m|
//!   exp(-rho^2/w0^2) exp(i m phi)`.
//! * [`VortexPancake`] — a Gaussian host carrying `N` nested single-charge
//!   screw dislocations, `A0 prod_l [rho e^{i phi} - rho_l e^{i phi_l}]
//!   exp(-rho^2/w0^2)`.
//! * [`NecklaceSpec`] — the coherent sum of two displaced LG pearls.
//!
//! [`rasterize`] samples any source onto a uniform Cartesian grid
//! ([`SampledField`]) and refuses grids that truncate the beam.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Fraction of total power a grid may clip before [`rasterize`] refuses it.
pub const CLIP_LIMIT: f64 = 1e-6;

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn factorial(n: u64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Natural log of `n!`, exact products below 21!, log-sum above.
pub(crate) fn ln_fact(n: u64) -> f64 {
    if n <= 20 {
        factorial(n).ln()
    } else {
        ln_factorial(n)
    }
}

/// `n!` as f64; switches to exp(log-sum) once the direct product would
/// lose integer exactness anyway.
pub(crate) fn fact(n: u64) -> f64 {
    if n <= 20 {
        factorial(n)
    } else {
        ln_factorial(n).exp()
    }
}

// ---------------------------------------------------------------------------
// Sources
// ---------------------------------------------------------------------------

/// A unit-power Laguerre-Gaussian mode with radial index 0 at its waist.
///
/// `m` is the winding number (topological charge); the squared modulus
/// integrates to 1 over the transverse plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgModeP0 {
    m: i64,
    w0: f64,
}

impl LgModeP0 {
    pub fn new(m: i64, w0: f64) -> Result<Self> {
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::InvalidParameter(format!("waist must be positive, got {w0}")));
        }
        Ok(Self { m, w0 })
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    /// Peak-normalization prefactor `sqrt(2/(pi |m|!)) / w0`.
    fn norm(&self) -> f64 {
        let am = self.m.unsigned_abs();
        (2.0 / PI).sqrt() / self.w0 * (-0.5 * ln_fact(am)).exp()
    }

    /// Complex amplitude at polar point `(rho, phi)` in the waist plane.
    ///
    /// The phase winds `m` times around the axis; for `m != 0` the amplitude
    /// vanishes on the axis.
    pub fn eval(&self, rho: f64, phi: f64) -> Complex64 {
        let am = self.m.unsigned_abs() as i32;
        let radial = if am == 0 {
            (-rho * rho / (self.w0 * self.w0)).exp()
        } else if rho == 0.0 {
            0.0
        } else {
            let s = std::f64::consts::SQRT_2 * rho / self.w0;
            // log-space keeps large-|m| modes finite
            if am <= 60 {
                s.powi(am) * (-rho * rho / (self.w0 * self.w0)).exp()
            } else {
                (am as f64 * s.ln() - rho * rho / (self.w0 * self.w0)).exp()
            }
        };
        Complex64::from_polar(self.norm() * radial, self.m as f64 * phi)
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        self.eval(x.hypot(y), y.atan2(x))
    }
}

/// Radial/azimuthal position of one single-charge vortex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vortex {
    pub rho: f64,
    pub phi: f64,
}

impl Vortex {
    /// Position as the complex root `rho * exp(i phi)`.
    pub fn root(&self) -> Complex64 {
        Complex64::from_polar(self.rho, self.phi)
    }
}

/// A Gaussian host beam of waist `w0` with `N` nested single-charge vortices.
///
/// Coincident vortices are legal and encode a higher-charge dislocation.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexPancake {
    a0: Complex64,
    w0: f64,
    vortices: Vec<Vortex>,
}

impl VortexPancake {
    /// Builds a pancake; azimuths are normalized into `[0, 2 pi)`.
    pub fn new(a0: Complex64, w0: f64, vortices: Vec<(f64, f64)>) -> Result<Self> {
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::InvalidParameter(format!("waist must be positive, got {w0}")));
        }
        let mut vs = Vec::with_capacity(vortices.len());
        for (rho, phi) in vortices {
            if !(rho >= 0.0) || !rho.is_finite() || !phi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "vortex position must be finite with rho >= 0, got ({rho}, {phi})"
                )));
            }
            vs.push(Vortex { rho, phi: phi.rem_euclid(TWO_PI) });
        }
        Ok(Self { a0, w0, vortices: vs })
    }

    /// Gaussian beam without dislocations.
    pub fn gaussian(a0: Complex64, w0: f64) -> Result<Self> {
        Self::new(a0, w0, Vec::new())
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn vortices(&self) -> &[Vortex] {
        &self.vortices
    }

    /// Number of nested dislocations `N`.
    pub fn vortex_count(&self) -> usize {
        self.vortices.len()
    }

    /// Vortex positions as complex roots `rho_l exp(i phi_l)`.
    pub fn roots(&self) -> Vec<Complex64> {
        self.vortices.iter().map(Vortex::root).collect()
    }

    /// Largest vortex radius, 0 for a plain Gaussian.
    pub fn max_vortex_radius(&self) -> f64 {
        self.vortices.iter().map(|v| v.rho).fold(0.0, f64::max)
    }

    /// Complex amplitude at `(rho, phi)`: the product of first-order zeros
    /// times the Gaussian envelope. Exactly zero at every vortex position.
    pub fn eval(&self, rho: f64, phi: f64) -> Complex64 {
        let z = Complex64::from_polar(rho, phi);
        let mut acc = self.a0;
        for v in &self.vortices {
            acc *= z - v.root();
        }
        acc * (-rho * rho / (self.w0 * self.w0)).exp()
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        let z = Complex64::new(x, y);
        let mut acc = self.a0;
        for v in &self.vortices {
            acc *= z - v.root();
        }
        acc * (-(x * x + y * y) / (self.w0 * self.w0)).exp()
    }

    /// Returns a copy rotated rigidly by `alpha`: every `phi_l += alpha`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let vs = self
            .vortices
            .iter()
            .map(|v| Vortex { rho: v.rho, phi: (v.phi + alpha).rem_euclid(TWO_PI) })
            .collect();
        Self { a0: self.a0, w0: self.w0, vortices: vs }
    }
}

/// Two displaced LG pearls: `ampA u_m(x + d/2, y) + ampB u_m(x - d/2, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecklaceSpec {
    m: i64,
    w0: f64,
    d: f64,
    amp_a: Complex64,
    amp_b: Complex64,
}

impl NecklaceSpec {
    pub fn new(m: i64, w0: f64, d: f64, amp_a: Complex64, amp_b: Complex64) -> Result<Self> {
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::InvalidParameter(format!("waist must be positive, got {w0}")));
        }
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pearl separation must be non-negative, got {d}"
            )));
        }
        Ok(Self { m, w0, d, amp_a, amp_b })
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn amp_a(&self) -> Complex64 {
        self.amp_a
    }

    pub fn amp_b(&self) -> Complex64 {
        self.amp_b
    }

    fn pearl(&self) -> LgModeP0 {
        LgModeP0 { m: self.m, w0: self.w0 }
    }

    /// Coherent sum of the two pearls at Cartesian `(x, y)`.
    pub fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        let pearl = self.pearl();
        self.amp_a * pearl.eval_xy(x + self.d / 2.0, y)
            + self.amp_b * pearl.eval_xy(x - self.d / 2.0, y)
    }
}

// ---------------------------------------------------------------------------
// Elementary symmetric polynomials
// ---------------------------------------------------------------------------

/// All elementary symmetric polynomials `e_0..e_N` of the given roots,
/// built by one incremental expansion pass per root.
pub fn elementary_symmetric_all(roots: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); roots.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (i, &r) in roots.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] = e[k] + r * e[k - 1];
        }
    }
    e
}

/// The `k`-th elementary symmetric polynomial of `roots`.
///
/// `e_0 = 1` by the empty-product convention; errors when `k > len(roots)`.
pub fn elementary_symmetric(roots: &[Complex64], k: usize) -> Result<Complex64> {
    if k > roots.len() {
        return Err(Error::IndexOutOfRange { index: k, limit: roots.len() });
    }
    Ok(elementary_symmetric_all(roots)[k])
}

// ---------------------------------------------------------------------------
// Sampled fields
// ---------------------------------------------------------------------------

/// Interpolation kernel used when sampling a grid off its nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interp {
    Bilinear,
    /// 4x4-point Lagrange interpolation; default because its O(h^4) error
    /// keeps ring-sampled spectra accurate to ~1e-9 where bilinear stalls
    /// near 1e-4.
    #[default]
    Cubic,
}

/// Uniform Cartesian sampling request: `nx x ny` cell-centered samples
/// spanning `[-half_extent, half_extent]` in each direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub half_extent: f64,
}

impl GridSpec {
    pub fn square(n: usize, half_extent: f64) -> Self {
        Self { nx: n, ny: n, half_extent }
    }

    /// 512 x 512 grid sized by the source's own extent policy.
    pub fn default_for(source: &dyn FieldSource) -> Self {
        Self::square(512, source.default_half_extent())
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.half_extent > 0.0) || !self.half_extent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid half extent must be positive, got {}",
                self.half_extent
            )));
        }
        Ok(())
    }
}

/// Complex amplitude on a uniform Cartesian grid with physical spacing.
///
/// Values are row-major with the row index running along `y`:
/// `values[iy * nx + ix]`. Sample `(ix, iy)` sits at
/// `(ox + (ix - (nx-1)/2) dx, oy + (iy - (ny-1)/2) dy)`, so the grid is
/// symmetric about its center and carries no sample exactly on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    ox: f64,
    oy: f64,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn from_values(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        ox: f64,
        oy: f64,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid must be at least 2x2, got {nx}x{ny}"
            )));
        }
        if !(dx > 0.0) || !(dy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got ({dx}, {dy})"
            )));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidParameter(format!(
                "value count {} does not match {nx}x{ny} grid",
                values.len()
            )));
        }
        Ok(Self { nx, ny, dx, dy, ox, oy, values })
    }

    /// Samples `f(x, y)` at every cell center, rows computed in parallel.
    pub fn from_fn<F>(grid: &GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        grid.validate()?;
        let (nx, ny) = (grid.nx, grid.ny);
        let dx = 2.0 * grid.half_extent / nx as f64;
        let dy = 2.0 * grid.half_extent / ny as f64;
        let cx = (nx as f64 - 1.0) / 2.0;
        let cy = (ny as f64 - 1.0) / 2.0;
        let mut values = vec![Complex64::new(0.0, 0.0); nx * ny];
        values
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(iy, row)| {
                let y = (iy as f64 - cy) * dy;
                for (ix, v) in row.iter_mut().enumerate() {
                    let x = (ix as f64 - cx) * dx;
                    *v = f(x, y);
                }
            });
        Self::from_values(nx, ny, dx, dy, 0.0, 0.0, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    /// Physical coordinate of the grid center.
    pub fn origin(&self) -> (f64, f64) {
        (self.ox, self.oy)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        self.ox + (ix as f64 - (self.nx as f64 - 1.0) / 2.0) * self.dx
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        self.oy + (iy as f64 - (self.ny as f64 - 1.0) / 2.0) * self.dy
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.nx + ix]
    }

    /// Half width of the sampled region along x (distance from center to edge).
    pub fn half_extent_x(&self) -> f64 {
        self.nx as f64 * self.dx / 2.0
    }

    pub fn half_extent_y(&self) -> f64 {
        self.ny as f64 * self.dy / 2.0
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.ox).abs() <= self.half_extent_x() && (y - self.oy).abs() <= self.half_extent_y()
    }

    /// Total discrete power `sum |u|^2 dx dy`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx * self.dy
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Fraction of total power carried by the outermost one-cell border ring.
    pub fn border_power_fraction(&self) -> f64 {
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut border = 0.0;
        for ix in 0..self.nx {
            border += self.get(ix, 0).norm_sqr() + self.get(ix, self.ny - 1).norm_sqr();
        }
        for iy in 1..self.ny - 1 {
            border += self.get(0, iy).norm_sqr() + self.get(self.nx - 1, iy).norm_sqr();
        }
        border / total
    }

    fn frac_index(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.ox) / self.dx + (self.nx as f64 - 1.0) / 2.0;
        let fy = (y - self.oy) / self.dy + (self.ny as f64 - 1.0) / 2.0;
        (fx, fy)
    }

    /// Interpolated amplitude at physical `(x, y)`; `None` outside the grid.
    ///
    /// Stencils are clamped at the border, so accuracy degrades in the
    /// outermost cells where the field is expected to be negligible anyway.
    pub fn interpolate(&self, x: f64, y: f64, interp: Interp) -> Option<Complex64> {
        if !self.contains(x, y) {
            return None;
        }
        let (fx, fy) = self.frac_index(x, y);
        match interp {
            Interp::Bilinear => Some(self.bilinear(fx, fy)),
            Interp::Cubic => Some(self.cubic(fx, fy)),
        }
    }

    fn bilinear(&self, fx: f64, fy: f64) -> Complex64 {
        let i0 = (fx.floor() as isize).clamp(0, self.nx as isize - 2) as usize;
        let j0 = (fy.floor() as isize).clamp(0, self.ny as isize - 2) as usize;
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.get(i0, j0);
        let v10 = self.get(i0 + 1, j0);
        let v01 = self.get(i0, j0 + 1);
        let v11 = self.get(i0 + 1, j0 + 1);
        v00 * ((1.0 - tx) * (1.0 - ty))
            + v10 * (tx * (1.0 - ty))
            + v01 * ((1.0 - tx) * ty)
            + v11 * (tx * ty)
    }

    fn cubic(&self, fx: f64, fy: f64) -> Complex64 {
        // 4-point Lagrange weights on equispaced nodes at t in [-1, 0, 1, 2]
        fn weights(t: f64) -> [f64; 4] {
            let t1 = t + 1.0;
            let t2 = t - 1.0;
            let t3 = t - 2.0;
            [
                -t * t2 * t3 / 6.0,
                t1 * t2 * t3 / 2.0,
                -t1 * t * t3 / 2.0,
                t1 * t * t2 / 6.0,
            ]
        }
        let i0 = ((fx.floor() as isize) - 1).clamp(0, self.nx as isize - 4) as usize;
        let j0 = ((fy.floor() as isize) - 1).clamp(0, self.ny as isize - 4) as usize;
        let wx = weights(fx - (i0 + 1) as f64);
        let wy = weights(fy - (j0 + 1) as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for (jj, &wyj) in wy.iter().enumerate() {
            let row = (j0 + jj) * self.nx + i0;
            let mut rowacc = Complex64::new(0.0, 0.0);
            for (ii, &wxi) in wx.iter().enumerate() {
                rowacc += self.values[row + ii] * wxi;
            }
            acc += rowacc * wyj;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

/// Anything that can be evaluated as a complex amplitude on the plane.
pub trait FieldSource: Sync {
    fn eval_xy(&self, x: f64, y: f64) -> Complex64;

    /// Half extent that keeps the clipped power below [`CLIP_LIMIT`].
    fn default_half_extent(&self) -> f64;
}

impl FieldSource for LgModeP0 {
    fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        LgModeP0::eval_xy(self, x, y)
    }

    fn default_half_extent(&self) -> f64 {
        // intensity ring peaks at w0 sqrt(|m|/2); keep a 4 w0 Gaussian margin
        self.w0 * (4.0 + (self.m.unsigned_abs() as f64 / 2.0).sqrt())
    }
}

impl FieldSource for VortexPancake {
    fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        VortexPancake::eval_xy(self, x, y)
    }

    fn default_half_extent(&self) -> f64 {
        (4.0 * self.w0).max(self.max_vortex_radius() + 4.0 * self.w0)
    }
}

impl FieldSource for NecklaceSpec {
    fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        NecklaceSpec::eval_xy(self, x, y)
    }

    fn default_half_extent(&self) -> f64 {
        self.d / 2.0 + self.w0 * (4.0 + (self.m.unsigned_abs() as f64 / 2.0).sqrt())
    }
}

/// Power of `source` in the annulus `r_in <= rho <= r_out`, by midpoint
/// quadrature in polar coordinates. Used to estimate clipped tails.
fn annulus_power(source: &dyn FieldSource, r_in: f64, r_out: f64) -> f64 {
    const NR: usize = 192;
    const NTH: usize = 256;
    let dr = (r_out - r_in) / NR as f64;
    let dth = TWO_PI / NTH as f64;
    let mut acc = 0.0;
    for i in 0..NR {
        let r = r_in + (i as f64 + 0.5) * dr;
        let mut ring = 0.0;
        for j in 0..NTH {
            let th = (j as f64 + 0.5) * dth;
            ring += source.eval_xy(r * th.cos(), r * th.sin()).norm_sqr();
        }
        acc += ring * r;
    }
    acc * dr * dth
}

/// Samples `source` at the cell centers of `grid`.
///
/// Refuses grids whose extent clips more than [`CLIP_LIMIT`] of the total
/// power; the clipped fraction is estimated from a polar integral of the
/// tail just outside the inscribed circle.
pub fn rasterize(source: &dyn FieldSource, grid: &GridSpec) -> Result<SampledField> {
    grid.validate()?;
    let field = SampledField::from_fn(grid, |x, y| source.eval_xy(x, y))?;
    let p_in = field.power();
    let r_edge = grid.half_extent;
    let p_tail = annulus_power(source, r_edge, 2.0 * r_edge);
    let total = p_in + p_tail;
    if total > 0.0 {
        let fraction = p_tail / total;
        if fraction > CLIP_LIMIT {
            return Err(Error::GridClipped { fraction, limit: CLIP_LIMIT });
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_apex_is_real_peak() {
        let g = LgModeP0::new(0, 1.0).unwrap();
        let v = g.eval(0.0, 0.0);
        assert!(v.re > 0.0);
        assert_eq!(v.im, 0.0);
        // peak value sqrt(2/pi)/w0
        assert!((v.re - (2.0 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn charge_one_mode_vanishes_on_axis() {
        let m1 = LgModeP0::new(1, 1.0).unwrap();
        assert_eq!(m1.eval(0.0, 0.3).norm(), 0.0);
    }

    #[test]
    fn lg_phase_winds_m_times() {
        let m3 = LgModeP0::new(3, 1.0).unwrap();
        let a = m3.eval(0.7, 0.2);
        let b = m3.eval(0.7, 0.2 + 0.1);
        let dphase = (b * a.conj()).arg();
        assert!((dphase - 0.3).abs() < 1e-12);
    }

    #[test]
    fn negative_m_conjugates_phase() {
        let p = LgModeP0::new(2, 1.3).unwrap();
        let n = LgModeP0::new(-2, 1.3).unwrap();
        let vp = p.eval(0.9, 0.4);
        let vn = n.eval(0.9, 0.4);
        assert!((vp - vn.conj()).norm() < 1e-15);
    }

    #[test]
    fn lg_unit_power_by_radial_quadrature() {
        // angular integral is 2 pi exactly; fine trapezoid in rho
        for m in [0i64, 1, 2, 5, 9] {
            let mode = LgModeP0::new(m, 0.8).unwrap();
            let rmax = 8.0 * 0.8;
            let n = 200_000;
            let dr = rmax / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let r = i as f64 * dr;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * mode.eval(r, 0.0).norm_sqr() * r;
            }
            let power = acc * dr * TWO_PI;
            assert!((power - 1.0).abs() < 1e-9, "m={m} power={power}");
        }
    }

    #[test]
    fn empty_pancake_is_pure_gaussian() {
        let p = VortexPancake::gaussian(c(2.0, -1.0), 1.5).unwrap();
        let v = p.eval(0.7, 1.1);
        let expect = c(2.0, -1.0) * (-0.49f64 / 2.25).exp();
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn pancake_vanishes_at_each_vortex() {
        let p = VortexPancake::new(c(1.0, 0.5), 1.0, vec![(0.4, 1.0), (1.2, 4.0)]).unwrap();
        for v in p.vortices() {
            assert_eq!(p.eval(v.rho, v.phi).norm(), 0.0);
        }
    }

    #[test]
    fn single_centered_vortex_matches_closed_form() {
        let p = VortexPancake::new(c(1.0, 0.0), 1.0, vec![(0.0, 0.0)]).unwrap();
        let (rho, phi) = (0.8, 2.1);
        let expect = Complex64::from_polar(rho, phi) * (-rho * rho as f64).exp();
        assert!((p.eval(rho, phi) - expect).norm() < 1e-15);
    }

    #[test]
    fn pancake_phi_normalized_into_two_pi() {
        let p = VortexPancake::new(c(1.0, 0.0), 1.0, vec![(0.5, -1.0), (0.5, 7.0)]).unwrap();
        for v in p.vortices() {
            assert!((0.0..TWO_PI).contains(&v.phi));
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(LgModeP0::new(1, 0.0).is_err());
        assert!(VortexPancake::new(c(1.0, 0.0), -1.0, vec![]).is_err());
        assert!(VortexPancake::new(c(1.0, 0.0), 1.0, vec![(-0.1, 0.0)]).is_err());
        assert!(NecklaceSpec::new(1, 1.0, -0.5, c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn coincident_pearls_reduce_to_single_mode() {
        let neck = NecklaceSpec::new(1, 1.0, 0.0, c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        let lg = LgModeP0::new(1, 1.0).unwrap();
        for &(x, y) in &[(0.3, -0.2), (1.0, 0.7), (-0.4, 0.9)] {
            assert!((neck.eval_xy(x, y) - lg.eval_xy(x, y)).norm() < 1e-15);
        }
    }

    #[test]
    fn necklace_vanishes_at_midpoint_for_equal_amplitudes() {
        for d in [0.5, 1.0, 2.0] {
            let neck = NecklaceSpec::new(1, 1.0, d, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
            assert!(neck.eval_xy(0.0, 0.0).norm() < 1e-16);
        }
    }

    proptest! {
        #[test]
        fn necklace_odd_parity(x in -3.0f64..3.0, y in -3.0f64..3.0, d in 0.0f64..4.0) {
            let neck = NecklaceSpec::new(1, 1.0, d, c(0.7, 0.2), c(0.7, 0.2)).unwrap();
            let a = neck.eval_xy(x, y);
            let b = neck.eval_xy(-x, -y);
            prop_assert!((a + b).norm() <= 1e-12 * (a.norm() + b.norm()).max(1e-300));
        }
    }

    // independent brute-force oracle: sum over all k-subsets
    fn esp_brute(roots: &[Complex64], k: usize) -> Complex64 {
        fn rec(roots: &[Complex64], k: usize, start: usize, acc: Complex64, out: &mut Complex64) {
            if k == 0 {
                *out += acc;
                return;
            }
            for i in start..roots.len() {
                rec(roots, k - 1, i + 1, acc * roots[i], out);
            }
        }
        let mut out = Complex64::new(0.0, 0.0);
        rec(roots, k, 0, Complex64::new(1.0, 0.0), &mut out);
        out
    }

    #[test]
    fn elementary_symmetric_two_roots() {
        let z1 = c(1.0, 2.0);
        let z2 = c(-0.5, 0.3);
        assert!((elementary_symmetric(&[z1, z2], 1).unwrap() - (z1 + z2)).norm() < 1e-15);
        assert!((elementary_symmetric(&[z1, z2], 2).unwrap() - z1 * z2).norm() < 1e-15);
    }

    #[test]
    fn elementary_symmetric_conventions() {
        let roots = [c(1.0, 0.0), c(0.0, 1.0)];
        assert_eq!(elementary_symmetric(&roots, 0).unwrap(), c(1.0, 0.0));
        assert!((elementary_symmetric(&roots, 2).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!(elementary_symmetric(&roots, 3).is_err());
    }

    proptest! {
        #[test]
        fn elementary_symmetric_matches_subset_enumeration(
            parts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 0..=6)
        ) {
            let roots: Vec<Complex64> = parts.iter().map(|&(re, im)| c(re, im)).collect();
            let all = elementary_symmetric_all(&roots);
            for k in 0..=roots.len() {
                let brute = esp_brute(&roots, k);
                let scale = brute.norm().max(1.0);
                prop_assert!((all[k] - brute).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn gaussian_power_on_default_grid() {
        let g = VortexPancake::gaussian(c(1.3, 0.0), 1.0).unwrap();
        let field = rasterize(&g, &GridSpec::square(256, 8.0)).unwrap();
        let expect = 1.3f64 * 1.3 * PI * 0.5;
        assert!((field.power() - expect).abs() / expect < 1e-6);
    }

    #[test]
    fn rasterize_power_converges_under_refinement() {
        let p = VortexPancake::new(c(1.0, 0.0), 1.0, vec![(0.6, 0.5), (1.1, 2.0)]).unwrap();
        let grid = GridSpec::default_for(&p);
        let p1 = rasterize(&p, &grid).unwrap().power();
        let fine = GridSpec::square(1024, grid.half_extent);
        let p2 = rasterize(&p, &fine).unwrap().power();
        assert!((p2 - p1).abs() / p2 < 1e-8);
    }

    #[test]
    fn rasterize_refuses_clipping_grid() {
        let p = VortexPancake::new(c(1.0, 0.0), 1.0, vec![(3.0, 0.0)]).unwrap();
        let err = rasterize(&p, &GridSpec::square(128, 2.0)).unwrap_err();
        assert!(matches!(err, Error::GridClipped { .. }));
    }

    #[test]
    fn rasterized_zeros_near_specified_vortices() {
        let p = VortexPancake::new(c(1.0, 0.0), 1.0, vec![(0.8, 0.0), (0.8, PI)]).unwrap();
        let field = rasterize(&p, &GridSpec::default_for(&p)).unwrap();
        for v in p.vortices() {
            let (vx, vy) = (v.rho * v.phi.cos(), v.rho * v.phi.sin());
            // local |u| minimum within a few cells of the specified position
            let ix0 = ((vx - field.x_at(0)) / field.dx()).round() as isize;
            let iy0 = ((vy - field.y_at(0)) / field.dy()).round() as isize;
            let mut best = f64::MAX;
            let mut best_xy = (0.0, 0.0);
            for iy in iy0 - 4..=iy0 + 4 {
                for ix in ix0 - 4..=ix0 + 4 {
                    let (ix, iy) = (ix as usize, iy as usize);
                    let a = field.get(ix, iy).norm();
                    if a < best {
                        best = a;
                        best_xy = (field.x_at(ix), field.y_at(iy));
                    }
                }
            }
            let dist = ((best_xy.0 - vx).powi(2) + (best_xy.1 - vy).powi(2)).sqrt();
            assert!(dist <= field.dx().hypot(field.dy()), "dist {dist}");
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_field() {
        let g = VortexPancake::new(c(1.0, 0.4), 1.0, vec![(0.5, 1.2)]).unwrap();
        let field = rasterize(&g, &GridSpec::square(512, 5.0)).unwrap();
        let max = field.max_abs();
        for &(x, y) in &[(0.31, -0.77), (1.234, 0.456), (-2.1, 1.9)] {
            let exact = g.eval_xy(x, y);
            let bil = field.interpolate(x, y, Interp::Bilinear).unwrap();
            let cub = field.interpolate(x, y, Interp::Cubic).unwrap();
            assert!((bil - exact).norm() / max < 1e-3);
            assert!((cub - exact).norm() / max < 1e-7);
        }
        assert!(field.interpolate(10.0, 0.0, Interp::Cubic).is_none());
    }

    #[test]
    fn grid_is_point_symmetric() {
        let g = VortexPancake::gaussian(c(1.0, 0.0), 1.0).unwrap();
        let field = rasterize(&g, &GridSpec::square(64, 4.0)).unwrap();
        assert!((field.x_at(0) + field.x_at(63)).abs() < 1e-15);
        assert!((field.y_at(10) + field.y_at(53)).abs() < 1e-15);
    }
}
