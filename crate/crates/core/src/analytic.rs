//! Closed-form spiral-harmonic spectra of vortex pancakes.
//!
//! A pancake with `N` nested vortices expands over the `p = 0`
//! Laguerre-Gaussian basis with exactly `N + 1` terms,
//!
//! ```text
//! u_N = A0 sqrt(pi) sum_{l=0}^{N} (-1)^{N-l} (w0/sqrt(2))^{l+1} sqrt(l!) B_{N-l} u_l
//! ```
//!
//! where `B_k` is the k-th elementary symmetric polynomial of the vortex
//! roots `rho_l exp(i phi_l)`. The power per winding number follows as
//!
//! ```text
//! C_n = |A0|^2 pi n! (w0^2/2)^{n+1} |B_{N-n}|^2,   0 <= n <= N,
//! ```
//!
//! and the photon occupation weights are `P_n = C_n / sum C_l`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{elementary_symmetric_all, fact, ln_fact, VortexPancake};

/// How a spectrum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Closed-form evaluation from a pancake description.
    Analytic,
    /// Ring decomposition and radial quadrature of a sampled field.
    Numeric,
}

/// Power spectrum over winding numbers: `n -> C_n`, all entries >= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OamSpectrum {
    entries: BTreeMap<i64, f64>,
    provenance: Provenance,
}

impl OamSpectrum {
    /// Builds a spectrum, rejecting negative entries and all-zero content.
    pub fn new(entries: BTreeMap<i64, f64>, provenance: Provenance) -> Result<Self> {
        let mut any_positive = false;
        for (&n, &c) in &entries {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "spectral entry C_{n} = {c} must be finite and non-negative"
                )));
            }
            if c > 0.0 {
                any_positive = true;
            }
        }
        if !any_positive {
            return Err(Error::AllZeroSpectrum);
        }
        Ok(Self { entries, provenance })
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn entries(&self) -> &BTreeMap<i64, f64> {
        &self.entries
    }

    /// `C_n`, treating absent indices as zero.
    pub fn c(&self, n: i64) -> f64 {
        self.entries.get(&n).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.values().fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Normalized occupation weights `P_n` with the mean angular momentum per
/// photon (in units of hbar).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: BTreeMap<i64, f64>,
    mean_oam: f64,
}

impl WeightVector {
    /// Builds from raw weights; they must sum to 1 within 1e-12.
    pub fn new(weights: BTreeMap<i64, f64>) -> Result<Self> {
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {sum}, expected 1 within 1e-12"
            )));
        }
        for (&n, &p) in &weights {
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "weight P_{n} = {p} outside [0, 1]"
                )));
            }
        }
        let mean_oam = weights.iter().map(|(&n, &p)| n as f64 * p).sum();
        Ok(Self { weights, mean_oam })
    }

    pub fn weights(&self) -> &BTreeMap<i64, f64> {
        &self.weights
    }

    /// `P_n`, zero for unoccupied indices.
    pub fn p(&self, n: i64) -> f64 {
        self.weights.get(&n).copied().unwrap_or(0.0)
    }

    /// Mean orbital angular momentum per photon, `sum n P_n`, in hbar.
    pub fn mean_oam(&self) -> f64 {
        self.mean_oam
    }

    pub fn min_occupied(&self) -> Option<i64> {
        self.weights.iter().find(|(_, &p)| p > 0.0).map(|(&n, _)| n)
    }

    pub fn max_occupied(&self) -> Option<i64> {
        self.weights.iter().rev().find(|(_, &p)| p > 0.0).map(|(&n, _)| n)
    }

    /// Largest absolute weight difference against `other` over the union of
    /// occupied indices.
    pub fn linf_distance(&self, other: &WeightVector) -> f64 {
        let mut keys: Vec<i64> = self.weights.keys().copied().collect();
        keys.extend(other.weights.keys().copied());
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|n| (self.p(n) - other.p(n)).abs())
            .fold(0.0, f64::max)
    }
}

/// Coefficients of the pancake over unit-power LG modes `u_0 .. u_N`.
///
/// Index `l` holds `A0 sqrt(pi) (-1)^{N-l} (w0/sqrt(2))^{l+1} sqrt(l!) B_{N-l}`.
pub fn pancake_lg_coefficients(p: &VortexPancake) -> Vec<Complex64> {
    let n = p.vortex_count();
    let b = elementary_symmetric_all(&p.roots());
    let w = p.w0() / std::f64::consts::SQRT_2;
    let pref = p.a0() * std::f64::consts::PI.sqrt();
    (0..=n)
        .map(|l| {
            let sign = if (n - l) % 2 == 0 { 1.0 } else { -1.0 };
            let scale = if l <= 20 {
                w.powi(l as i32 + 1) * fact(l as u64).sqrt()
            } else {
                ((l as f64 + 1.0) * w.ln() + 0.5 * ln_fact(l as u64)).exp()
            };
            pref * b[n - l] * (sign * scale)
        })
        .collect()
}

/// Closed-form spectrum of a pancake: `C_n` for `n = 0..=N`.
pub fn pancake_cn(p: &VortexPancake) -> OamSpectrum {
    let n = p.vortex_count();
    let b = elementary_symmetric_all(&p.roots());
    let a2 = p.a0().norm_sqr();
    let w2h = p.w0() * p.w0() / 2.0;
    let entries: BTreeMap<i64, f64> = (0..=n)
        .map(|k| {
            let c = if k <= 20 && n <= 20 {
                a2 * std::f64::consts::PI * fact(k as u64) * w2h.powi(k as i32 + 1)
                    * b[n - k].norm_sqr()
            } else {
                // log-space evaluation avoids overflow of n! (w0^2/2)^{n+1}
                let bn = b[n - k].norm();
                if bn == 0.0 || a2 == 0.0 {
                    0.0
                } else {
                    (a2.ln()
                        + std::f64::consts::PI.ln()
                        + ln_fact(k as u64)
                        + (k as f64 + 1.0) * w2h.ln()
                        + 2.0 * bn.ln())
                    .exp()
                }
            };
            (k as i64, c)
        })
        .collect();
    // a zero-amplitude pancake yields the all-zero spectrum; represent it
    // as-is and let weights_from_cn report the degenerate case
    OamSpectrum::new(entries.clone(), Provenance::Analytic)
        .unwrap_or(OamSpectrum { entries, provenance: Provenance::Analytic })
}

/// The three spectral entries of a two-vortex pancake:
///
/// ```text
/// C_0 = 1/2 w0^2 pi rho1^2 rho2^2 |A0|^2
/// C_1 = 1/4 w0^4 pi |A0|^2 [rho1^2 + rho2^2 + 2 rho1 rho2 cos(phi1 - phi2)]
/// C_2 = 1/4 w0^6 pi |A0|^2
/// ```
pub fn n2_closed_form(p: &VortexPancake) -> Result<(f64, f64, f64)> {
    if p.vortex_count() != 2 {
        return Err(Error::WrongVortexCount { expected: 2, got: p.vortex_count() });
    }
    let pi = std::f64::consts::PI;
    let a2 = p.a0().norm_sqr();
    let w0 = p.w0();
    let v = p.vortices();
    let (r1, f1) = (v[0].rho, v[0].phi);
    let (r2, f2) = (v[1].rho, v[1].phi);
    let c0 = 0.5 * w0.powi(2) * pi * r1 * r1 * r2 * r2 * a2;
    let c1 = 0.25 * w0.powi(4) * pi * a2 * (r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * (f1 - f2).cos());
    let c2 = 0.25 * w0.powi(6) * pi * a2;
    Ok((c0, c1, c2))
}

/// Normalizes a spectrum into occupation weights and the mean OAM per photon.
pub fn weights_from_cn(s: &OamSpectrum) -> Result<WeightVector> {
    let total = s.total();
    if !(total > 0.0) {
        return Err(Error::AllZeroSpectrum);
    }
    let weights: BTreeMap<i64, f64> = s.entries().iter().map(|(&n, &c)| (n, c / total)).collect();
    WeightVector::new(weights)
}

/// Convenience: occupation weights of a pancake straight from the closed form.
pub fn pancake_weights(p: &VortexPancake) -> Result<WeightVector> {
    weights_from_cn(&pancake_cn(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pancake(a0: Complex64, w0: f64, vortices: Vec<(f64, f64)>) -> VortexPancake {
        VortexPancake::new(a0, w0, vortices).unwrap()
    }

    #[test]
    fn gaussian_has_single_coefficient() {
        let p = pancake(c64(1.0, 0.0), 1.0, vec![]);
        let coef = pancake_lg_coefficients(&p);
        assert_eq!(coef.len(), 1);
        let expect = PI.sqrt() / std::f64::consts::SQRT_2;
        assert!((coef[0] - c64(expect, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn double_centered_vortex_occupies_only_top_mode() {
        let p = pancake(c64(1.0, 0.0), 1.0, vec![(0.0, 0.0), (0.0, 1.0)]);
        let coef = pancake_lg_coefficients(&p);
        assert_eq!(coef[0].norm(), 0.0);
        assert_eq!(coef[1].norm(), 0.0);
        assert!(coef[2].norm() > 0.0);
        let s = pancake_cn(&p);
        assert_eq!(s.c(0), 0.0);
        assert_eq!(s.c(1), 0.0);
        let w = weights_from_cn(&s).unwrap();
        assert!((w.p(2) - 1.0).abs() < 1e-15);
        assert!((w.mean_oam() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn centered_single_vortex_is_pure_unit_charge() {
        let p = pancake(c64(0.3, 0.7), 1.0, vec![(0.0, 0.0)]);
        let s = pancake_cn(&p);
        let a2 = p.a0().norm_sqr();
        assert_eq!(s.c(0), 0.0);
        assert!((s.c(1) - a2 * PI * 0.25).abs() < 1e-15);
        let w = weights_from_cn(&s).unwrap();
        assert!((w.p(1) - 1.0).abs() < 1e-15);
        assert!((w.mean_oam() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_hbar_at_rho_w0_over_sqrt2() {
        let p = pancake(c64(1.0, 0.0), 1.0, vec![(0.5f64.sqrt(), 0.0)]);
        let w = pancake_weights(&p).unwrap();
        assert!((w.p(0) - 0.5).abs() < 1e-12);
        assert!((w.p(1) - 0.5).abs() < 1e-12);
        assert!((w.mean_oam() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn n2_closed_form_requires_two_vortices() {
        let p = pancake(c64(1.0, 0.0), 1.0, vec![(0.5, 0.0)]);
        assert!(matches!(n2_closed_form(&p), Err(Error::WrongVortexCount { .. })));
    }

    #[test]
    fn antipodal_equal_radii_cancel_c1() {
        let p = pancake(c64(1.0, 0.0), 1.0, vec![(0.7, 0.3), (0.7, 0.3 + PI)]);
        let (_, c1, _) = n2_closed_form(&p).unwrap();
        assert!(c1.abs() < 1e-15);
    }

    #[test]
    fn centered_vortex_kills_c0() {
        let p = pancake(c64(1.0, 0.0), 1.0, vec![(0.0, 0.0), (1.3, 0.4)]);
        let (c0, _, _) = n2_closed_form(&p).unwrap();
        assert_eq!(c0, 0.0);
    }

    proptest! {
        #[test]
        fn n2_closed_form_matches_general_formula(
            r1 in 0.0f64..2.5, r2 in 0.0f64..2.5,
            f1 in 0.0f64..TAU, f2 in 0.0f64..TAU,
            w0 in 0.3f64..2.0,
            are in -2.0f64..2.0, aim in -2.0f64..2.0,
        ) {
            prop_assume!(are.abs() + aim.abs() > 1e-3);
            let p = pancake(c64(are, aim), w0, vec![(r1, f1), (r2, f2)]);
            let s = pancake_cn(&p);
            let (c0, c1, c2) = n2_closed_form(&p).unwrap();
            let scale = s.max_entry();
            prop_assert!((s.c(0) - c0).abs() <= 1e-12 * scale);
            prop_assert!((s.c(1) - c1).abs() <= 1e-12 * scale);
            prop_assert!((s.c(2) - c2).abs() <= 1e-12 * scale);
        }

        #[test]
        fn weights_invariant_under_amplitude_scaling(
            scale_re in -3.0f64..3.0, scale_im in -3.0f64..3.0,
            r1 in 0.1f64..2.0, f1 in 0.0f64..TAU,
        ) {
            prop_assume!(scale_re.abs() + scale_im.abs() > 1e-3);
            let base = pancake(c64(1.0, 0.0), 1.0, vec![(r1, f1), (0.9, 1.0)]);
            let scaled = pancake(c64(scale_re, scale_im), 1.0, vec![(r1, f1), (0.9, 1.0)]);
            let wa = pancake_weights(&base).unwrap();
            let wb = pancake_weights(&scaled).unwrap();
            prop_assert!(wa.linf_distance(&wb) < 1e-12);
            prop_assert!((wa.mean_oam() - wb.mean_oam()).abs() < 1e-12);
        }

        #[test]
        fn spectrum_invariant_under_rigid_rotation(
            alpha in 0.0f64..TAU,
            r1 in 0.0f64..2.0, r2 in 0.0f64..2.0, r3 in 0.0f64..2.0,
            f1 in 0.0f64..TAU, f2 in 0.0f64..TAU, f3 in 0.0f64..TAU,
        ) {
            let p = pancake(c64(1.0, 0.2), 1.0, vec![(r1, f1), (r2, f2), (r3, f3)]);
            let sa = pancake_cn(&p);
            let sb = pancake_cn(&p.rotated(alpha));
            for n in 0..=3i64 {
                let scale = sa.max_entry();
                prop_assert!((sa.c(n) - sb.c(n)).abs() <= 1e-12 * scale);
            }
        }
    }

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn weights_from_single_mode() {
        let mut entries = BTreeMap::new();
        entries.insert(1i64, 5.0);
        let s = OamSpectrum::new(entries, Provenance::Analytic).unwrap();
        let w = weights_from_cn(&s).unwrap();
        assert_eq!(w.p(1), 1.0);
        assert_eq!(w.mean_oam(), 1.0);
    }

    #[test]
    fn equal_triplet_means_one_hbar() {
        let mut entries = BTreeMap::new();
        for n in 0..3i64 {
            entries.insert(n, 2.0);
        }
        let s = OamSpectrum::new(entries, Provenance::Analytic).unwrap();
        let w = weights_from_cn(&s).unwrap();
        for n in 0..3i64 {
            assert!((w.p(n) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((w.mean_oam() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_zero_spectrum_is_rejected() {
        let mut entries = BTreeMap::new();
        entries.insert(0i64, 0.0);
        assert!(matches!(
            OamSpectrum::new(entries, Provenance::Analytic),
            Err(Error::AllZeroSpectrum)
        ));
    }

    #[test]
    fn support_is_bounded_by_vortex_count() {
        let p = pancake(c64(1.0, 0.0), 1.0, vec![(0.5, 0.1), (1.0, 2.0), (1.5, 4.0)]);
        let s = pancake_cn(&p);
        assert_eq!(s.entries().keys().copied().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn large_vortex_count_stays_finite() {
        let vortices: Vec<(f64, f64)> = (0..30).map(|i| (0.5 + 0.02 * i as f64, 0.2 * i as f64)).collect();
        let p = pancake(c64(1.0, 0.0), 1.0, vortices);
        let s = pancake_cn(&p);
        assert!(s.total().is_finite());
        let w = weights_from_cn(&s).unwrap();
        let sum: f64 = w.weights().values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
