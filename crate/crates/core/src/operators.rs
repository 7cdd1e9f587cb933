//! Expansion algebra for the harmonic kernel `G(y; z, Γ) = Γ / (z − y)`.
//!
//! A multipole expansion about `z0` represents
//! `a_0 log(y − z0) + Σ_{j=1..p} a_j / (y − z0)^j`, a local expansion
//! `Σ_{j=0..p} b_j (y − z0)^j`. Both evaluate to the potential itself, so
//! particle-to-multipole carries a negative sign:
//!
//! ```text
//! a_j = −Σ Γ_i (z_i − z0)^(j−1)        (P2M, j ≥ 1, a_0 = 0)
//! b_k = +Σ Γ_i / (z_i − z0)^(k+1)      (P2L)
//! ```
//!
//! The shifts work on scaled coefficients (`a_j / r^j`, `b_j r^j`), which
//! reduces every translation to additions on a Pascal triangle. `a_0` is
//! carried through every shift; the complex log uses the principal branch,
//! which is only branch-consistent across shifts when `a_0 = 0`.
//!
//! The slice-level kernels accumulate (`+=`) into their output so that a
//! target box can sum its incoming translations in a fixed order.

use num_complex::Complex64;

use crate::error::{FmmError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftVariant {
    #[default]
    Scaled,
    Unscaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleExpansion {
    pub center: Complex64,
    /// `a_0..=a_p`
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalExpansion {
    pub center: Complex64,
    /// `b_0..=b_p`
    pub coeffs: Vec<Complex64>,
}

impl MultipoleExpansion {
    pub fn zero(center: Complex64, p: usize) -> Self {
        Self {
            center,
            coeffs: vec![ZERO; p + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Particle-to-multipole.
    pub fn from_sources(positions: &[Complex64], strengths: &[f64], center: Complex64, p: usize) -> Self {
        assert!(p >= 1);
        let mut out = Self::zero(center, p);
        p2m_accumulate(positions, strengths, center, &mut out.coeffs);
        out
    }

    pub fn translate(&self, new_center: Complex64, variant: ShiftVariant) -> Self {
        let mut out = Self::zero(new_center, self.order());
        let mut scratch = Vec::new();
        m2m_accumulate(&self.coeffs, self.center - new_center, &mut out.coeffs, variant, &mut scratch);
        out
    }

    /// Multipole-to-local about `target_center`.
    pub fn to_local(&self, target_center: Complex64) -> Result<LocalExpansion> {
        let mut out = LocalExpansion::zero(target_center, self.order());
        let mut scratch = Vec::new();
        m2l_accumulate(&self.coeffs, target_center - self.center, &mut out.coeffs, &mut scratch)?;
        Ok(out)
    }

    pub fn evaluate(&self, y: Complex64) -> Result<Complex64> {
        m2p(&self.coeffs, self.center, y)
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            center: self.center,
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }
}

impl LocalExpansion {
    pub fn zero(center: Complex64, p: usize) -> Self {
        Self {
            center,
            coeffs: vec![ZERO; p + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Particle-to-local. Fails when a source sits exactly on the center.
    pub fn from_sources(positions: &[Complex64], strengths: &[f64], center: Complex64, p: usize) -> Result<Self> {
        assert!(p >= 1);
        let mut out = Self::zero(center, p);
        p2l_accumulate(positions, strengths, center, &mut out.coeffs)?;
        Ok(out)
    }

    pub fn translate(&self, new_center: Complex64) -> Self {
        let mut out = Self::zero(new_center, self.order());
        let mut scratch = Vec::new();
        l2l_accumulate(&self.coeffs, self.center - new_center, &mut out.coeffs, &mut scratch);
        out
    }

    pub fn evaluate(&self, y: Complex64) -> Complex64 {
        l2p(&self.coeffs, self.center, y)
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            center: self.center,
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }
}

/// `[1, x, x^2, ..., x^p]`
fn powers_into(x: Complex64, p: usize, out: &mut Vec<Complex64>) {
    out.clear();
    out.reserve(p + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=p {
        out.push(acc);
        acc *= x;
    }
}

/// True when `|r|^p` leaves the normal floating-point range, so the scaled
/// shifts would lose the coefficients to underflow or overflow.
fn scaling_breaks_down(r: Complex64, p: usize) -> bool {
    let m = r.norm();
    if m == 0.0 {
        return true;
    }
    let e = p as f64 * m.log2();
    // also catches a NaN exponent
    e.is_nan() || e.abs() >= 1000.0
}

pub(crate) fn p2m_accumulate(positions: &[Complex64], strengths: &[f64], center: Complex64, out: &mut [Complex64]) {
    let p = out.len() - 1;
    for (&z, &g) in positions.iter().zip(strengths) {
        let w = z - center;
        let mut term = Complex64::new(-g, 0.0);
        for a in &mut out[1..=p] {
            *a += term;
            term *= w;
        }
    }
}

pub(crate) fn p2l_accumulate(
    positions: &[Complex64],
    strengths: &[f64],
    center: Complex64,
    out: &mut [Complex64],
) -> Result<()> {
    for (&z, &g) in positions.iter().zip(strengths) {
        let u = z - center;
        if u == ZERO {
            return Err(FmmError::Singular("particle-to-local shift"));
        }
        let inv = u.inv();
        let mut term = inv * g;
        for b in out.iter_mut() {
            *b += term;
            term *= inv;
        }
    }
    Ok(())
}

/// Multipole-to-multipole with `r = z_child − z_parent`, accumulated into `out`.
pub(crate) fn m2m_accumulate(
    child: &[Complex64],
    r: Complex64,
    out: &mut [Complex64],
    variant: ShiftVariant,
    scratch: &mut Vec<Complex64>,
) {
    let p = child.len() - 1;
    debug_assert_eq!(out.len(), p + 1);
    let a0 = child[0];
    out[0] += a0;
    if r == ZERO {
        for (o, c) in out.iter_mut().zip(child).skip(1) {
            *o += c;
        }
        return;
    }

    let variant = if scaling_breaks_down(r, p) {
        ShiftVariant::Unscaled
    } else {
        variant
    };
    let mut a = child.to_vec();
    match variant {
        ShiftVariant::Unscaled => {
            for k in (2..=p).rev() {
                for j in k..=p {
                    a[j] = a[j] + r * a[j - 1];
                }
            }
            powers_into(r, p, scratch);
            for j in 1..=p {
                out[j] += a[j] - scratch[j] * a0 / j as f64;
            }
        }
        ShiftVariant::Scaled => {
            powers_into(r.inv(), p, scratch);
            for j in 1..=p {
                a[j] *= scratch[j];
            }
            for k in (2..=p).rev() {
                for j in k..=p {
                    a[j] = a[j] + a[j - 1];
                }
            }
            powers_into(r, p, scratch);
            for j in 1..=p {
                out[j] += (a[j] - a0 / j as f64) * scratch[j];
            }
        }
    }
}

/// Local-to-local with `r = z_parent − z_child`, accumulated into `out`.
pub(crate) fn l2l_accumulate(parent: &[Complex64], r: Complex64, out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
    let p = parent.len() - 1;
    debug_assert_eq!(out.len(), p + 1);
    if r == ZERO {
        for (o, b) in out.iter_mut().zip(parent) {
            *o += b;
        }
        return;
    }

    let mut b = parent.to_vec();
    if scaling_breaks_down(r, p) {
        for k in 0..=p {
            for j in p - k..p {
                b[j] = b[j] - r * b[j + 1];
            }
        }
        for (o, c) in out.iter_mut().zip(&b) {
            *o += c;
        }
        return;
    }

    powers_into(r, p, scratch);
    for j in 1..=p {
        b[j] *= scratch[j];
    }
    for k in 0..=p {
        for j in p - k..p {
            b[j] = b[j] - b[j + 1];
        }
    }
    powers_into(r.inv(), p, scratch);
    out[0] += b[0];
    for j in 1..=p {
        out[j] += b[j] * scratch[j];
    }
}

/// Multipole-to-local with `r = z_target − z_source`, accumulated into `out`.
///
/// Prescale `b_{j−1} = (−1)^(j+1) a_j / r^j`, one descending Pascal pass
/// (`b_j −= b_{j+1}`), one ascending pass (`b_j −= b_{j−1}`), then the `a_0`
/// corrections and the postscale `b_j /= r^j`.
pub(crate) fn m2l_accumulate(
    source: &[Complex64],
    r: Complex64,
    out: &mut [Complex64],
    scratch: &mut Vec<Complex64>,
) -> Result<()> {
    let p = source.len() - 1;
    debug_assert_eq!(out.len(), p + 1);
    if r == ZERO {
        return Err(FmmError::Singular("multipole-to-local shift"));
    }
    let a0 = source[0];

    powers_into(r.inv(), p, scratch);
    let mut b = vec![ZERO; p + 1];
    for j in 1..=p {
        let t = source[j] * scratch[j];
        b[j - 1] = if j % 2 == 1 { t } else { -t };
    }
    for k in 2..=p {
        for j in p - k..p {
            b[j] = b[j] - b[j + 1];
        }
    }
    for k in (1..=p).rev() {
        for j in k..=p {
            b[j] = b[j] - b[j - 1];
        }
    }

    if a0 != ZERO {
        b[0] += a0 * r.ln();
        for (j, bj) in b.iter_mut().enumerate().skip(1) {
            let c = a0 / j as f64;
            *bj += if j % 2 == 1 { c } else { -c };
        }
    }
    out[0] += b[0];
    for j in 1..=p {
        out[j] += b[j] * scratch[j];
    }
    Ok(())
}

/// Local evaluation by Horner's rule.
#[inline]
pub fn l2p(coeffs: &[Complex64], center: Complex64, y: Complex64) -> Complex64 {
    let w = y - center;
    coeffs.iter().rev().fold(ZERO, |acc, &b| acc * w + b)
}

/// Multipole evaluation. Fails at the expansion center.
#[inline]
pub fn m2p(coeffs: &[Complex64], center: Complex64, y: Complex64) -> Result<Complex64> {
    let w = y - center;
    if w == ZERO {
        return Err(FmmError::Singular("multipole evaluation"));
    }
    Ok(m2p_at(coeffs, w))
}

#[inline]
pub(crate) fn m2p_at(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    let inv = w.inv();
    let tail = coeffs[1..].iter().rev().fold(ZERO, |acc, &a| (acc + a) * inv);
    if coeffs[0] == ZERO {
        tail
    } else {
        tail + coeffs[0] * w.ln()
    }
}

/// `Γ / (z − y)` without the complex-division overflow guard.
#[inline(always)]
pub(crate) fn kernel(d: Complex64, gamma: f64) -> Complex64 {
    let s = gamma / (d.re * d.re + d.im * d.im);
    Complex64::new(d.re * s, -d.im * s)
}

/// Global tree-order indices for detecting self pairs when targets alias sources.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AliasOffsets {
    pub target_begin: usize,
    pub source_begin: usize,
}

/// Direct near-field contribution of one source box to one target box.
///
/// Exactly coincident points contribute nothing; the return value counts
/// those that are not a point paired with itself.
pub(crate) fn p2p_accumulate(
    targets: &[Complex64],
    sources: &[Complex64],
    strengths: &[f64],
    out: &mut [Complex64],
    alias: Option<AliasOffsets>,
) -> usize {
    let mut coincident = 0;
    for (t, (&y, phi)) in targets.iter().zip(out.iter_mut()).enumerate() {
        let mut acc = *phi;
        for (s, (&z, &g)) in sources.iter().zip(strengths).enumerate() {
            let d = z - y;
            if d == ZERO {
                let is_self = alias.is_some_and(|a| a.target_begin + t == a.source_begin + s);
                if !is_self {
                    coincident += 1;
                }
                continue;
            }
            acc += kernel(d, g);
        }
        *phi = acc;
    }
    coincident
}

/// Pairwise-symmetric near field when targets are the sources themselves.
///
/// `box_a` and `box_b` are (positions, strengths, potentials) of two boxes;
/// each pair is computed once and added to both sides.
pub(crate) fn p2p_symmetric_pair(
    a: (&[Complex64], &[f64], &mut [Complex64]),
    b: (&[Complex64], &[f64], &mut [Complex64]),
) -> usize {
    let (za, ga, pa) = a;
    let (zb, gb, pb) = b;
    let mut coincident = 0;
    for i in 0..za.len() {
        for j in 0..zb.len() {
            let d = zb[j] - za[i];
            if d == ZERO {
                coincident += 2;
                continue;
            }
            let inv = kernel(d, 1.0);
            pa[i] += inv * gb[j];
            pb[j] -= inv * ga[i];
        }
    }
    coincident
}

/// Symmetric evaluation within one box (targets alias the sources).
pub(crate) fn p2p_symmetric_self(z: &[Complex64], g: &[f64], phi: &mut [Complex64]) -> usize {
    let mut coincident = 0;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            let d = z[j] - z[i];
            if d == ZERO {
                coincident += 2;
                continue;
            }
            let inv = kernel(d, 1.0);
            phi[i] += inv * g[j];
            phi[j] -= inv * g[i];
        }
    }
    coincident
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn direct(y: Complex64, z: &[Complex64], g: &[f64]) -> Complex64 {
        z.iter().zip(g).map(|(&z, &g)| g / (z - y)).sum()
    }

    fn random_coeffs(rng: &mut ChaCha8Rng, p: usize, with_a0: bool) -> Vec<Complex64> {
        let mut v: Vec<_> = (0..=p).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        if !with_a0 {
            v[0] = ZERO;
        }
        v
    }

    fn binomial(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn sign_convention_single_source() {
        // a_1 = −Γ reproduces Γ / (z − y) under M2P
        let z0 = c(0.2, -0.1);
        let m = MultipoleExpansion::from_sources(&[z0], &[1.0], z0, 5);
        assert_eq!(m.coeffs[1], c(-1.0, 0.0));
        assert!(m.coeffs[2..].iter().all(|&a| a == ZERO));
        let y = c(3.0, 1.0);
        assert!(rel(m.evaluate(y).unwrap(), 1.0 / (z0 - y)) < 1e-15);

        let l = LocalExpansion::from_sources(&[c(5.0, 0.0)], &[1.0], z0, 5).unwrap();
        assert!(rel(l.evaluate(z0), 1.0 / (c(5.0, 0.0) - z0)) < 1e-15);
    }

    #[test]
    fn p2m_zero_strength_and_symmetry() {
        let z0 = c(0.5, 0.5);
        let m = MultipoleExpansion::from_sources(&[c(0.1, 0.2), c(0.9, 0.4)], &[0.0, 0.0], z0, 8);
        assert!(m.coeffs.iter().all(|&a| a == ZERO));

        let x = 0.25;
        let m = MultipoleExpansion::from_sources(&[z0 + x, z0 - x], &[1.0, 1.0], z0, 17);
        assert_eq!(m.coeffs[0], ZERO);
        assert!(m.coeffs[2].norm() < 1e-16);
        let y = z0 + c(3.0, 2.0);
        let rho = x / (y - z0).norm();
        let err = (m.evaluate(y).unwrap() - direct(y, &[z0 + x, z0 - x], &[1.0, 1.0])).norm();
        assert!(err <= 4.0 * rho.powi(17) + 1e-15, "err {err}");
    }

    #[test]
    fn p2l_tail_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z0 = c(0.0, 0.0);
        let src = [c(4.0, 0.0)];
        let l = LocalExpansion::from_sources(&src, &[1.0], z0, 17).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let y = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            worst = worst.max(rel(l.evaluate(y), direct(y, &src, &[1.0])));
        }
        assert!(worst <= 2.0 * 0.25f64.powi(18), "worst {worst}");

        assert!(LocalExpansion::from_sources(&[z0], &[1.0], z0, 4).is_err());
        let zero = LocalExpansion::from_sources(&src, &[0.0], z0, 4).unwrap();
        assert!(zero.coeffs.iter().all(|&b| b == ZERO));
    }

    #[test]
    fn m2m_identity_and_single_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_coeffs(&mut rng, 9, true);
        let m = MultipoleExpansion { center: c(0.3, 0.3), coeffs: a.clone() };
        assert_eq!(m.translate(m.center, ShiftVariant::Unscaled).coeffs, a);

        let p = 12;
        let mut pole = vec![ZERO; p + 1];
        pole[1] = c(1.0, 0.0);
        let r = c(0.3, -0.2);
        let m = MultipoleExpansion { center: r, coeffs: pole };
        let shifted = m.translate(ZERO, ShiftVariant::Scaled);
        for j in 1..=p {
            assert!(rel(shifted.coeffs[j], r.powu(j as u32 - 1)) < 1e-13);
        }
    }

    #[test]
    fn m2m_matches_binomial_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = 17;
        for _ in 0..20 {
            let a = random_coeffs(&mut rng, p, false);
            let r = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let m = MultipoleExpansion { center: r, coeffs: a.clone() };
            for variant in [ShiftVariant::Scaled, ShiftVariant::Unscaled] {
                let out = m.translate(ZERO, variant);
                for mm in 1..=p {
                    let expect: Complex64 = (1..=mm)
                        .map(|k| a[k] * binomial(mm - 1, k - 1) * r.powu((mm - k) as u32))
                        .sum();
                    assert!((out.coeffs[mm] - expect).norm() <= 1e-12 * expect.norm().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn m2m_log_term_matches_field() {
        // a_0 log(y − z_c) re-expanded about z_p
        let p = 30;
        let mut a = vec![ZERO; p + 1];
        a[0] = c(0.7, 0.0);
        a[2] = c(0.1, 0.3);
        let m = MultipoleExpansion { center: c(0.1, 0.1), coeffs: a };
        let shifted = m.translate(ZERO, ShiftVariant::Scaled);
        let y = c(3.0, 2.0);
        assert!(rel(shifted.evaluate(y).unwrap(), m.evaluate(y).unwrap()) < 1e-13);
    }

    #[test]
    fn m2m_scaled_unscaled_agree_across_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &mag in &[1e-6, 1e-3, 0.3, 1.0, 30.0, 1e3] {
            let a = random_coeffs(&mut rng, 17, true);
            let r = c(0.6, 0.8) * mag;
            let m = MultipoleExpansion { center: r, coeffs: a };
            let s = m.translate(ZERO, ShiftVariant::Scaled);
            let u = m.translate(ZERO, ShiftVariant::Unscaled);
            for (x, y) in s.coeffs.iter().zip(&u.coeffs) {
                assert!((x - y).norm() <= 1e-12 * y.norm().max(1e-300), "|r|={mag}");
            }
        }
    }

    #[test]
    fn l2l_is_function_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = 17;
        let b = random_coeffs(&mut rng, p, true);
        let parent = LocalExpansion { center: c(0.5, 0.5), coeffs: b };
        let child = parent.translate(c(0.62, 0.41));
        for _ in 0..20 {
            let y = c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            assert!(rel(child.evaluate(y), parent.evaluate(y)) < 1e-12);
        }

        let mut constant = vec![ZERO; p + 1];
        constant[0] = c(2.0, -1.0);
        let l = LocalExpansion { center: ZERO, coeffs: constant.clone() };
        assert_eq!(l.translate(c(0.3, 0.1)).coeffs, constant);
        assert_eq!(parent.translate(parent.center).coeffs, parent.coeffs);

        let mut linear = vec![ZERO; p + 1];
        linear[1] = c(1.0, 0.0);
        let r = c(0.2, 0.1);
        let l = LocalExpansion { center: r, coeffs: linear };
        let moved = l.translate(ZERO);
        assert!(rel(moved.coeffs[0], -r) < 1e-15);
        assert!(rel(moved.coeffs[1], c(1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn l2l_unscaled_fallback_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = random_coeffs(&mut rng, 10, true);
        let r = c(0.3, 0.2);
        let mut scaled = vec![ZERO; 11];
        let mut plain = b.clone();
        let mut scratch = Vec::new();
        l2l_accumulate(&b, r, &mut scaled, &mut scratch);
        for k in 0..=10 {
            for j in 10 - k..10 {
                plain[j] = plain[j] - r * plain[j + 1];
            }
        }
        for (x, y) in scaled.iter().zip(&plain) {
            assert!((x - y).norm() <= 1e-12 * y.norm().max(1.0));
        }
    }

    #[test]
    fn m2l_single_source_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zs = c(0.1, -0.2);
        let m = MultipoleExpansion::from_sources(&[zs], &[1.0], c(0.0, 0.0), 17);
        let target = c(4.0, 0.0);
        let l = m.to_local(target).unwrap();
        for _ in 0..100 {
            let y = target + c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            assert!(rel(l.evaluate(y), 1.0 / (zs - y)) <= 1e-9);
        }
    }

    #[test]
    fn m2l_random_multipole_matches_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = 20;
        let a = random_coeffs(&mut rng, p, false);
        let m = MultipoleExpansion { center: c(0.1, 0.2), coeffs: a };
        for target in [c(4.0, 0.5), c(-3.0, 2.0), c(0.1, -5.0)] {
            let l = m.to_local(target).unwrap();
            let y = target + c(0.3, -0.2);
            assert!(rel(l.evaluate(y), m.evaluate(y).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn m2l_log_charge_matches_field() {
        let p = 40;
        let mut a = vec![ZERO; p + 1];
        a[0] = c(1.0, 0.0);
        let m = MultipoleExpansion { center: c(0.0, 0.0), coeffs: a };
        // stay away from the negative real axis of (y − z_i)
        let target = c(4.0, 1.0);
        let l = m.to_local(target).unwrap();
        for off in [c(0.2, 0.1), c(-0.3, 0.2), c(0.0, -0.4)] {
            let y = target + off;
            assert!(rel(l.evaluate(y), y.ln()) < 1e-12);
        }
    }

    #[test]
    fn m2l_zero_and_singular() {
        let m = MultipoleExpansion::zero(c(0.0, 0.0), 8);
        assert!(m.to_local(c(3.0, 0.0)).unwrap().coeffs.iter().all(|&b| b == ZERO));
        assert!(m.to_local(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn operators_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = 17;
        for _ in 0..10 {
            let a = random_coeffs(&mut rng, p, false);
            let b = random_coeffs(&mut rng, p, false);
            let alpha = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let center = c(0.1, 0.1);
            let ma = MultipoleExpansion { center, coeffs: a.clone() };
            let mb = MultipoleExpansion { center, coeffs: b.clone() };
            let sum = MultipoleExpansion {
                center,
                coeffs: a.iter().zip(&b).map(|(x, y)| x * alpha + y).collect(),
            };
            let check = |lhs: &[Complex64], x: &[Complex64], y: &[Complex64]| {
                for i in 0..lhs.len() {
                    let expect = x[i] * alpha + y[i];
                    let scale = (x[i] * alpha).norm() + y[i].norm();
                    assert!((lhs[i] - expect).norm() <= 1e-12 * scale.max(1e-300));
                }
            };

            let t = c(3.0, 1.5);
            check(&sum.to_local(t).unwrap().coeffs, &ma.to_local(t).unwrap().coeffs, &mb.to_local(t).unwrap().coeffs);
            let pc = c(0.35, -0.1);
            for v in [ShiftVariant::Scaled, ShiftVariant::Unscaled] {
                check(&sum.translate(pc, v).coeffs, &ma.translate(pc, v).coeffs, &mb.translate(pc, v).coeffs);
            }
            let (la, lb, ls) = (
                LocalExpansion { center, coeffs: a.clone() },
                LocalExpansion { center, coeffs: b.clone() },
                LocalExpansion { center, coeffs: sum.coeffs.clone() },
            );
            check(&ls.translate(pc).coeffs, &la.translate(pc).coeffs, &lb.translate(pc).coeffs);

            let y = c(0.2, 0.3);
            let lhs = ls.evaluate(y);
            let expect = la.evaluate(y) * alpha + lb.evaluate(y);
            assert!((lhs - expect).norm() <= 1e-12 * expect.norm());
            let y = c(2.0, 2.0);
            let lhs = sum.evaluate(y).unwrap();
            let expect = ma.evaluate(y).unwrap() * alpha + mb.evaluate(y).unwrap();
            assert!((lhs - expect).norm() <= 1e-12 * expect.norm());

            // particle operators are linear in the strengths
            let z: Vec<_> = (0..6).map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
            let g1: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g2: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = rng.gen_range(-3.0..3.0);
            let g12: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| s * x + y).collect();
            let m1 = MultipoleExpansion::from_sources(&z, &g1, ZERO, p);
            let m2 = MultipoleExpansion::from_sources(&z, &g2, ZERO, p);
            let m12 = MultipoleExpansion::from_sources(&z, &g12, ZERO, p);
            let alpha_r = c(s, 0.0);
            for i in 0..=p {
                let expect = m1.coeffs[i] * alpha_r + m2.coeffs[i];
                let scale = (m1.coeffs[i] * s).norm() + m2.coeffs[i].norm();
                assert!((m12.coeffs[i] - expect).norm() <= 1e-12 * scale.max(1e-300));
            }
            let far = c(5.0, 0.0);
            let l1 = LocalExpansion::from_sources(&z, &g1, far, p).unwrap();
            let l2 = LocalExpansion::from_sources(&z, &g2, far, p).unwrap();
            let l12 = LocalExpansion::from_sources(&z, &g12, far, p).unwrap();
            for i in 0..=p {
                let expect = l1.coeffs[i] * alpha_r + l2.coeffs[i];
                let scale = (l1.coeffs[i] * s).norm() + l2.coeffs[i].norm();
                assert!((l12.coeffs[i] - expect).norm() <= 1e-12 * scale.max(1e-300));
            }
        }
    }

    #[test]
    fn local_evaluation() {
        let mut b = vec![ZERO; 6];
        b[0] = c(1.5, -2.0);
        assert_eq!(l2p(&b, c(0.3, 0.3), c(9.0, -4.0)), c(1.5, -2.0));
        assert_eq!(l2p(&[c(1.0, 0.0), c(2.0, 0.0)], ZERO, c(3.0, 0.0)), c(7.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let coeffs = random_coeffs(&mut rng, 17, true);
        let w = c(0.4, -0.3);
        let naive: Complex64 = coeffs.iter().enumerate().map(|(j, &b)| b * w.powu(j as u32)).sum();
        assert!(rel(l2p(&coeffs, ZERO, w), naive) < 1e-14);
    }

    #[test]
    fn multipole_evaluation() {
        let mut a = vec![ZERO; 8];
        a[1] = c(1.0, 0.0);
        let y = c(2.0, 1.0);
        assert!(rel(m2p(&a, ZERO, y).unwrap(), 1.0 / y) < 1e-15);
        assert_eq!(m2p(&[ZERO; 8], ZERO, y).unwrap(), ZERO);
        assert!(m2p(&a, y, y).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let center = c(0.5, 0.5);
        let z: Vec<_> = (0..5).map(|_| center + c(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1))).collect();
        let g: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = MultipoleExpansion::from_sources(&z, &g, center, 17);
        let radius = 0.1 * std::f64::consts::SQRT_2;
        let y = center + c(10.0 * radius, 0.0);
        assert!(rel(m.evaluate(y).unwrap(), direct(y, &z, &g)) <= 1e-12);
    }

    #[test]
    fn far_field_error_decays_geometrically() {
        // single source near the source-box center, target box radius 1 at distance d
        for &rho in &[0.25, 0.4] {
            let d = 1.0 / rho;
            let zs = c(0.05, 0.05);
            let target = c(d, 0.0);
            let y = target + c(-0.7, 0.7);
            let mut pts = Vec::new();
            for p in [4usize, 8, 12, 16, 20] {
                let m = MultipoleExpansion::from_sources(&[zs], &[1.0], ZERO, p);
                let l = m.to_local(target).unwrap();
                let err = rel(l.evaluate(y), 1.0 / (zs - y));
                pts.push((p as f64, err.ln()));
            }
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            let expect = rho.ln();
            assert!(slope < 0.0 && (slope - expect).abs() <= 0.5 * expect.abs(), "rho {rho}: slope {slope} vs {expect}");
        }
    }

    #[test]
    fn p2p_self_exclusion() {
        let z = [c(0.0, 0.0), c(1.0, 0.0)];
        let mut phi = [ZERO; 2];
        let alias = AliasOffsets { target_begin: 0, source_begin: 0 };
        let n = p2p_accumulate(&z, &z, &[1.0, 1.0], &mut phi, Some(alias));
        assert_eq!(n, 0);
        assert_eq!(phi, [c(1.0, 0.0), c(-1.0, 0.0)]);

        let mut single = [ZERO];
        p2p_accumulate(&z[..1], &z[..1], &[1.0], &mut single, Some(alias));
        assert_eq!(single[0], ZERO);

        // duplicate position under a different index is skipped and counted
        let dup = [c(0.5, 0.5), c(0.5, 0.5)];
        let mut phi = [ZERO; 2];
        assert_eq!(p2p_accumulate(&dup, &dup, &[1.0, 1.0], &mut phi, Some(alias)), 2);
        assert_eq!(phi, [ZERO; 2]);
    }

    #[test]
    fn p2p_symmetric_matches_asymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let z: Vec<_> = (0..100).map(|_| c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let g: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut asym = vec![ZERO; 100];
        p2p_accumulate(&z, &z, &g, &mut asym, Some(AliasOffsets { target_begin: 0, source_begin: 0 }));

        let mut sym = vec![ZERO; 100];
        let (lo, hi) = sym.split_at_mut(40);
        p2p_symmetric_self(&z[..40], &g[..40], lo);
        p2p_symmetric_self(&z[40..], &g[40..], hi);
        p2p_symmetric_pair((&z[..40], &g[..40], lo), (&z[40..], &g[40..], hi));
        for (a, s) in asym.iter().zip(&sym) {
            assert!(rel(*s, *a) <= 1e-13);
        }
    }
}
