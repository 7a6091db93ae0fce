//! Free-space paraxial propagation.
//!
//! Two routes to the same physics: a spectral transfer function
//! `exp(-i z k_perp^2 / (2 k0))` applied in the spatial-frequency domain of
//! a sampled field, and the closed-form z-dependence of the LG expansion of
//! a vortex pancake (waist growth, wave-front curvature, per-order Gouy
//! phase). Spiral-harmonic weights are invariant along z under both; the
//! two routes cross-validate each other pointwise.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::analytic::pancake_lg_coefficients;
use crate::error::{Error, Result};
use crate::model::{
    fact, ln_fact, rasterize, FieldSource, GridSpec, SampledField, VortexPancake, CLIP_LIMIT,
    TWO_PI,
};

/// Wavelength and propagation distance for a free-space step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSpec {
    pub wavelength: f64,
    pub z: f64,
}

impl PropagationSpec {
    pub fn new(wavelength: f64, z: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if !z.is_finite() {
            return Err(Error::InvalidParameter(format!("z must be finite, got {z}")));
        }
        Ok(Self { wavelength, z })
    }

    /// Free-space wavenumber `2 pi / wavelength`.
    pub fn k0(&self) -> f64 {
        TWO_PI / self.wavelength
    }

    /// Rayleigh range `pi w0^2 / wavelength` of a reference waist.
    pub fn rayleigh_range(&self, w0: f64) -> f64 {
        std::f64::consts::PI * w0 * w0 / self.wavelength
    }
}

fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            out[ix * ny + iy] = data[iy * nx + ix];
        }
    }
    out
}

fn fft2(data: &mut Vec<Complex64>, nx: usize, ny: usize, forward: bool) {
    let mut planner = FftPlanner::new();
    let fft_x = if forward { planner.plan_fft_forward(nx) } else { planner.plan_fft_inverse(nx) };
    for row in data.chunks_mut(nx) {
        fft_x.process(row);
    }
    let mut t = transpose(data, nx, ny);
    let fft_y = if forward { planner.plan_fft_forward(ny) } else { planner.plan_fft_inverse(ny) };
    for col in t.chunks_mut(ny) {
        fft_y.process(col);
    }
    *data = transpose(&t, ny, nx);
}

/// Angular frequencies of an `n`-point DFT with sample spacing `d`.
fn k_vector(n: usize, d: f64) -> Vec<f64> {
    let dk = TWO_PI / (n as f64 * d);
    (0..n)
        .map(|i| {
            let idx = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            idx * dk
        })
        .collect()
}

/// Propagates a sampled field a distance `z` with the paraxial spectral
/// transfer function. Total power is conserved exactly (the multiplier has
/// unit modulus).
///
/// Refuses fields already clipped at the border of their grid and
/// distances at which the transfer-function phase becomes under-sampled
/// over the occupied bandwidth of the field.
pub fn fresnel_propagate(field: &SampledField, spec: &PropagationSpec) -> Result<SampledField> {
    let border = field.border_power_fraction();
    if border > CLIP_LIMIT {
        return Err(Error::GridClipped { fraction: border, limit: CLIP_LIMIT });
    }
    let (nx, ny) = (field.nx(), field.ny());
    let kx = k_vector(nx, field.dx());
    let ky = k_vector(ny, field.dy());
    let k0 = spec.k0();

    let mut data = field.values().to_vec();
    fft2(&mut data, nx, ny, true);

    // occupied bandwidth: largest |k| bin holding more than 1e-12 of the
    // spectral peak
    let peak = data.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let mut k_eff: f64 = 0.0;
    if peak > 0.0 {
        let floor = 1e-12 * peak;
        for iy in 0..ny {
            for ix in 0..nx {
                if data[iy * nx + ix].norm_sqr() > floor {
                    k_eff = k_eff.max(kx[ix].hypot(ky[iy]));
                }
            }
        }
    }
    let dk = (TWO_PI / (nx as f64 * field.dx())).max(TWO_PI / (ny as f64 * field.dy()));
    let phase_step = (spec.z.abs() * k_eff * dk / k0).abs();
    if phase_step > std::f64::consts::PI {
        return Err(Error::AliasingGuard { phase_step });
    }

    for iy in 0..ny {
        for ix in 0..nx {
            let k2 = kx[ix] * kx[ix] + ky[iy] * ky[iy];
            let phase = -spec.z * k2 / (2.0 * k0);
            data[iy * nx + ix] *= Complex64::from_polar(1.0, phase);
        }
    }

    fft2(&mut data, nx, ny, false);
    let scale = 1.0 / (nx * ny) as f64;
    for v in &mut data {
        *v *= scale;
    }
    let (ox, oy) = field.origin();
    SampledField::from_values(nx, ny, field.dx(), field.dy(), ox, oy, data)
}

/// A vortex pancake carried to plane `z` through its LG expansion.
///
/// Every mode of order `l` evolves with the common waist `w(z)`, the common
/// curvature phase `exp(i k0 rho^2 / (2 R(z)))` and its own Gouy factor
/// `exp(-i (l+1) atan(z/z_R))`; the expansion coefficients themselves do
/// not change.
#[derive(Debug, Clone)]
pub struct PropagatedPancake {
    /// `coef_l sqrt(2 / (pi l!))`, ready for a Horner sum over
    /// `zeta = (sqrt(2) rho / w(z)) exp(i (phi - gouy))`.
    scaled_coeffs: Vec<Complex64>,
    w0: f64,
    wz: f64,
    gouy: f64,
    /// `k0 / (2 R(z))`; zero at the waist.
    curvature: f64,
    max_vortex_radius: f64,
}

impl PropagatedPancake {
    pub fn new(pancake: &VortexPancake, spec: &PropagationSpec) -> Self {
        let w0 = pancake.w0();
        let zr = spec.rayleigh_range(w0);
        let zeta = spec.z / zr;
        let wz = w0 * (1.0 + zeta * zeta).sqrt();
        let gouy = zeta.atan();
        let curvature = if spec.z == 0.0 {
            0.0
        } else {
            let r = spec.z * (1.0 + 1.0 / (zeta * zeta));
            spec.k0() / (2.0 * r)
        };
        let scaled_coeffs = pancake_lg_coefficients(pancake)
            .into_iter()
            .enumerate()
            .map(|(l, c)| {
                let norm = if l <= 20 {
                    (2.0 / (std::f64::consts::PI * fact(l as u64))).sqrt()
                } else {
                    ((2.0 / std::f64::consts::PI).ln() - ln_fact(l as u64)).exp().sqrt()
                };
                c * norm
            })
            .collect();
        Self { scaled_coeffs, w0, wz, gouy, curvature, max_vortex_radius: pancake.max_vortex_radius() }
    }

    /// Waist at the evaluation plane.
    pub fn wz(&self) -> f64 {
        self.wz
    }
}

impl FieldSource for PropagatedPancake {
    fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        let rho2 = x * x + y * y;
        let s = std::f64::consts::SQRT_2 / self.wz;
        // zeta = (sqrt(2)/w(z)) (x + i y) e^{-i gouy}
        let zeta = Complex64::new(x, y) * Complex64::from_polar(s, -self.gouy);
        let mut sum = Complex64::new(0.0, 0.0);
        for &c in self.scaled_coeffs.iter().rev() {
            sum = sum * zeta + c;
        }
        let envelope =
            Complex64::from_polar((-rho2 / (self.wz * self.wz)).exp(), self.curvature * rho2);
        let prefactor = Complex64::from_polar(1.0 / self.wz, -self.gouy);
        sum * envelope * prefactor
    }

    fn default_half_extent(&self) -> f64 {
        let growth = self.wz / self.w0;
        (self.max_vortex_radius * growth + 4.0 * self.wz).max(4.0 * self.wz)
    }
}

/// Evaluates the pancake's LG expansion at plane `z` on `grid`.
pub fn propagate_pancake_analytic(
    pancake: &VortexPancake,
    spec: &PropagationSpec,
    grid: &GridSpec,
) -> Result<SampledField> {
    rasterize(&PropagatedPancake::new(pancake, spec), grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian_field(n: usize, half: f64) -> SampledField {
        let g = VortexPancake::gaussian(c64(1.0, 0.0), 1.0).unwrap();
        rasterize(&g, &GridSpec::square(n, half)).unwrap()
    }

    #[test]
    fn zero_distance_is_identity_up_to_fft_roundoff() {
        let field = gaussian_field(256, 6.0);
        let spec = PropagationSpec::new(0.1, 0.0).unwrap();
        let out = fresnel_propagate(&field, &spec).unwrap();
        let max = field.max_abs();
        let worst = field
            .values()
            .iter()
            .zip(out.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst / max < 1e-12, "worst {worst:.3e}");
    }

    #[test]
    fn gaussian_expands_to_sqrt2_at_rayleigh_range() {
        let field = gaussian_field(512, 8.0);
        let spec = PropagationSpec::new(0.1, 0.0).unwrap();
        let zr = spec.rayleigh_range(1.0);
        let out =
            fresnel_propagate(&field, &PropagationSpec::new(0.1, zr).unwrap()).unwrap();
        // 1/e^2 intensity radius from the second moment: w = sqrt(2 <rho^2>)
        let mut num = 0.0;
        let mut den = 0.0;
        for iy in 0..out.ny() {
            for ix in 0..out.nx() {
                let i = out.get(ix, iy).norm_sqr();
                let r2 = out.x_at(ix).powi(2) + out.y_at(iy).powi(2);
                num += i * r2;
                den += i;
            }
        }
        let w = (2.0 * num / den).sqrt();
        let expect = std::f64::consts::SQRT_2;
        assert!((w - expect).abs() / expect < 0.01, "w = {w}");
    }

    #[test]
    fn power_is_conserved() {
        let p = VortexPancake::new(c64(1.0, 0.3), 1.0, vec![(0.8, 0.5), (0.4, 2.5)]).unwrap();
        let field = rasterize(&p, &GridSpec::square(512, 7.0)).unwrap();
        let spec = PropagationSpec::new(0.1, spec_zr() * 0.5).unwrap();
        let out = fresnel_propagate(&field, &spec).unwrap();
        let rel = (out.power() - field.power()).abs() / field.power();
        assert!(rel < 1e-9, "power drift {rel:.3e}");
    }

    fn spec_zr() -> f64 {
        PropagationSpec::new(0.1, 0.0).unwrap().rayleigh_range(1.0)
    }

    #[test]
    fn analytic_form_reduces_to_pancake_at_waist() {
        let p = VortexPancake::new(c64(0.7, -0.2), 1.0, vec![(0.9, 1.0), (0.5, 4.0)]).unwrap();
        let grid = GridSpec::square(256, 5.9);
        let spec = PropagationSpec::new(0.1, 0.0).unwrap();
        let direct = rasterize(&p, &grid).unwrap();
        let expanded = propagate_pancake_analytic(&p, &spec, &grid).unwrap();
        let max = direct.max_abs();
        let worst = direct
            .values()
            .iter()
            .zip(expanded.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst / max < 1e-9, "worst {:.3e}", worst / max);
    }

    #[test]
    fn fft_and_analytic_routes_agree_off_waist() {
        let p = VortexPancake::new(c64(1.0, 0.0), 1.0, vec![(0.8, 0.3), (1.2, 2.2)]).unwrap();
        let grid = GridSpec::square(512, 8.0);
        let z = 0.5 * spec_zr();
        let spec = PropagationSpec::new(0.1, z).unwrap();
        let by_fft = fresnel_propagate(&rasterize(&p, &grid).unwrap(), &spec).unwrap();
        let by_modes = propagate_pancake_analytic(&p, &spec, &grid).unwrap();
        let max = by_fft.max_abs();
        let mut worst = 0.0f64;
        for (a, b) in by_fft.values().iter().zip(by_modes.values()) {
            if a.norm() > 1e-3 * max {
                worst = worst.max((a - b).norm() / a.norm());
            }
        }
        assert!(worst < 1e-4, "worst pointwise {worst:.3e}");
    }

    #[test]
    fn aliasing_guard_triggers_at_extreme_distance() {
        let field = gaussian_field(128, 5.0);
        let spec = PropagationSpec::new(0.1, 1e6).unwrap();
        assert!(matches!(
            fresnel_propagate(&field, &spec),
            Err(Error::AliasingGuard { .. })
        ));
    }

    #[test]
    fn clipped_input_is_rejected() {
        let g = VortexPancake::gaussian(c64(1.0, 0.0), 1.0).unwrap();
        // legal rasterization, then crop the metadata claim by building a
        // field whose grid barely covers the beam
        let field = SampledField::from_fn(&GridSpec::square(64, 1.5), |x, y| g.eval_xy(x, y))
            .unwrap();
        let spec = PropagationSpec::new(0.1, 1.0).unwrap();
        assert!(matches!(fresnel_propagate(&field, &spec), Err(Error::GridClipped { .. })));
    }

    #[test]
    fn invalid_spec_is_rejected() {
        assert!(PropagationSpec::new(0.0, 1.0).is_err());
        assert!(PropagationSpec::new(-1.0, 1.0).is_err());
        assert!(PropagationSpec::new(1.0, f64::NAN).is_err());
    }
}
