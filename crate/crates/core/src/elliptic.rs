//! Complete elliptic integral of the first kind and the Jacobi elliptic
//! functions `sn`, `cn`, `dn` for real argument.
//!
//! The parameter convention is `m = k²` throughout: `K(m)` and `sn(u | m)`.
//! `K(m)` uses the arithmetic-geometric mean; the Jacobi functions use the
//! descending Landen (Gauss) transformation with a trigonometric base case.
//!
//! Both routines accept the complementary parameter `1 - m` as the primary
//! input when it is known more precisely than `m` (the contour construction
//! works with `m` very close to one).

use std::f64::consts::FRAC_PI_2;

use crate::error::{GcqError, Result};

const MAX_AGM_STEPS: usize = 64;

/// Elliptic parameter `m` in `[0, 1)`, stored together with its complement
/// `1 - m` so that neither has to be recovered by cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParameter {
    m: f64,
    complement: f64,
}

impl EllipticParameter {
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&m) {
            return Err(GcqError::Domain(format!(
                "elliptic parameter m = {m} outside [0, 1)"
            )));
        }
        Ok(EllipticParameter {
            m,
            complement: 1.0 - m,
        })
    }

    /// Builds the parameter from `1 - m`, which must lie in `(0, 1]`.
    pub fn from_complement(complement: f64) -> Result<Self> {
        if !(complement > 0.0 && complement <= 1.0) {
            return Err(GcqError::Domain(format!(
                "complementary elliptic parameter 1 - m = {complement} outside (0, 1]"
            )));
        }
        Ok(EllipticParameter {
            m: 1.0 - complement,
            complement,
        })
    }

    /// Builds `m = k²` from a modulus `k` in `[0, 1)`.
    pub fn from_modulus(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(GcqError::Domain(format!(
                "elliptic modulus k = {k} outside [0, 1)"
            )));
        }
        Self::from_complement((1.0 - k) * (1.0 + k))
    }

    /// Builds the parameter from independently computed `m` and `1 - m`.
    /// Used when both are available without cancellation.
    pub fn from_parts(m: f64, complement: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&m) || !(complement > 0.0 && complement <= 1.0) {
            return Err(GcqError::Domain(format!(
                "elliptic parameter pair ({m}, {complement}) outside [0, 1) x (0, 1]"
            )));
        }
        if (m + complement - 1.0).abs() > 8.0 * f64::EPSILON {
            return Err(GcqError::Domain(format!(
                "m = {m} and 1 - m = {complement} are inconsistent"
            )));
        }
        Ok(EllipticParameter { m, complement })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn complement(&self) -> f64 {
        self.complement
    }

    /// The complementary parameter `m' = 1 - m`. Fails for `m = 0`, whose
    /// complement `1` is outside the domain.
    pub fn complementary(&self) -> Result<Self> {
        if self.m <= 0.0 {
            return Err(GcqError::Domain(
                "complementary parameter of m = 0 is 1, outside [0, 1)".into(),
            ));
        }
        Ok(EllipticParameter {
            m: self.complement,
            complement: self.m,
        })
    }
}

/// `(sn, cn, dn)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Complete elliptic integral of the first kind,
/// `K(m) = ∫₀¹ dx / √((1 - x²)(1 - m x²))`.
///
/// The complementary integral `K'(m)` is `complete_elliptic_k(m.complementary()?)`.
pub fn complete_elliptic_k(m: EllipticParameter) -> f64 {
    if m.m == 0.0 {
        return FRAC_PI_2;
    }
    let mut a = 1.0_f64;
    let mut b = m.complement.sqrt();
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    FRAC_PI_2 / a
}

/// Convenience wrapper taking a raw `m`; fails with a domain error outside `[0, 1)`.
pub fn ellipk(m: f64) -> Result<f64> {
    EllipticParameter::new(m).map(complete_elliptic_k)
}

/// Jacobi elliptic functions `sn(u | m)`, `cn(u | m)`, `dn(u | m)` for real `u`.
pub fn jacobi_sn_cn_dn(u: f64, m: EllipticParameter) -> JacobiTriple {
    if m.m == 0.0 {
        let (sn, cn) = u.sin_cos();
        return JacobiTriple { sn, cn, dn: 1.0 };
    }

    // Descending Landen sequence: a_{n+1} = (a_n + b_n)/2, b_{n+1} = √(a_n b_n),
    // c_{n+1} = (a_n - b_n)/2. The ratios c_n/a_n are kept for the back-substitution.
    let mut ratios = [0.0_f64; MAX_AGM_STEPS];
    let mut a = 1.0_f64;
    let mut b = m.complement.sqrt();
    let mut c = m.m.sqrt();
    let mut steps = 0;
    while c.abs() > f64::EPSILON * a && steps < MAX_AGM_STEPS - 1 {
        ratios[steps] = c / a;
        let next_a = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = next_a;
        steps += 1;
    }
    ratios[steps] = c / a;

    // φ_N = 2^N a_N u, then φ_{n-1} = (φ_n + asin((c_n/a_n) sin φ_n)) / 2.
    let mut phi = (1u64 << steps) as f64 * a * u;
    for n in (1..=steps).rev() {
        phi = 0.5 * (phi + (ratios[n] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = 1 - m sn² = m' + m cn² avoids cancellation when m → 1 and |sn| → 1.
    let dn = (m.complement + m.m * cn * cn).sqrt();
    JacobiTriple { sn, cn, dn }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn param(m: f64) -> EllipticParameter {
        EllipticParameter::new(m).unwrap()
    }

    /// Independent oracle: the θ-form ∫₀^{π/2} dθ/√(1 - m sin²θ) is a smooth
    /// periodic integrand over a half period, so the plain trapezoidal rule
    /// converges geometrically.
    fn k_by_quadrature(m: f64) -> f64 {
        let n = 4000;
        let h = PI / n as f64;
        // integrate over [0, π] and halve (integrand has period π)
        (0..n)
            .map(|i| {
                let s = (i as f64 * h).sin();
                1.0 / (1.0 - m * s * s).sqrt()
            })
            .sum::<f64>()
            * h
            / 2.0
    }

    /// Second, separately written AGM run to convergence in a loop of its own.
    fn k_by_agm(m: f64) -> f64 {
        let (mut a, mut g) = (1.0_f64, (1.0 - m).sqrt());
        for _ in 0..40 {
            let an = (a + g) / 2.0;
            g = (a * g).sqrt();
            a = an;
        }
        PI / (2.0 * a)
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert_eq!(complete_elliptic_k(param(0.0)), PI / 2.0);
    }

    #[test]
    fn k_matches_independent_oracles() {
        for &m in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let k = complete_elliptic_k(param(m));
            let quad = k_by_quadrature(m);
            let agm = k_by_agm(m);
            assert!((k - quad).abs() / quad <= 1e-13, "m={m}: {k} vs {quad}");
            assert!((k - agm).abs() / agm <= 1e-13, "m={m}: {k} vs {agm}");
        }
        // frozen reference for m = 0.5
        let k = complete_elliptic_k(param(0.5));
        assert!((k - 1.854_074_677_301_371_9).abs() < 1e-14);
    }

    #[test]
    fn k_rejects_m_at_or_above_one() {
        assert!(matches!(ellipk(1.0), Err(GcqError::Domain(_))));
        assert!(matches!(ellipk(-0.1), Err(GcqError::Domain(_))));
        assert!(ellipk(f64::NAN).is_err());
    }

    #[test]
    fn k_from_tiny_complement_is_logarithmic() {
        // K(m) ≈ ln(4/√m') for m' → 0.
        let m1 = 1e-12;
        let k = complete_elliptic_k(EllipticParameter::from_complement(m1).unwrap());
        let approx = (4.0 / m1.sqrt()).ln();
        assert!((k - approx).abs() < 1e-9, "{k} vs {approx}");
    }

    #[test]
    fn jacobi_at_origin() {
        for &m in &[0.0, 0.3, 0.99, 1.0 - 1e-10] {
            let p = EllipticParameter::new(m).unwrap();
            let t = jacobi_sn_cn_dn(0.0, p);
            assert_eq!((t.sn, t.cn, t.dn), (0.0, 1.0, 1.0));
        }
    }

    #[test]
    fn jacobi_degenerates_to_trig() {
        for &u in &[-3.0, -0.5, 0.2, 1.0, 2.5, 7.0] {
            let t = jacobi_sn_cn_dn(u, param(0.0));
            assert_eq!(t.sn, u.sin());
            assert_eq!(t.cn, u.cos());
            assert_eq!(t.dn, 1.0);
        }
    }

    #[test]
    fn sn_at_quarter_period_is_one() {
        let p = param(0.3);
        let k = complete_elliptic_k(p);
        let t = jacobi_sn_cn_dn(k, p);
        assert!((t.sn - 1.0).abs() <= 1e-12);
        assert!(t.cn.abs() <= 1e-7);
        assert!((t.dn - (1.0 - 0.3_f64).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn near_one_parameter_matches_tanh_limit() {
        // sn(u | m) → tanh u as m → 1, with an O(m') correction.
        let p = EllipticParameter::from_complement(1e-14).unwrap();
        let t = jacobi_sn_cn_dn(0.7, p);
        assert!((t.sn - 0.7_f64.tanh()).abs() < 1e-12);
        assert!((t.cn - 1.0 / 0.7_f64.cosh()).abs() < 1e-12);
    }

    /// Oracle for sn: pick an amplitude φ, integrate u = F(φ | m) by composite
    /// Simpson, then sn(u) must equal sin φ.
    #[test]
    fn sn_inverts_incomplete_integral() {
        for &m in &[0.2, 0.5, 0.9, 0.999] {
            let p = param(m);
            for &phi in &[0.3, 1.0, 1.4, 2.9, 4.0] {
                let n = 20_000;
                let h = phi / n as f64;
                let f = |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
                let mut u = f(0.0) + f(phi);
                for i in 1..n {
                    u += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
                }
                u *= h / 3.0;
                let t = jacobi_sn_cn_dn(u, p);
                assert!((t.sn - phi.sin()).abs() <= 1e-12, "m={m} phi={phi}");
                assert!((t.cn - phi.cos()).abs() <= 1e-12, "m={m} phi={phi}");
            }
        }
    }

    #[test]
    fn symmetry_under_negation() {
        let p = param(0.64);
        for &u in &[0.1, 0.9, 2.2, 5.0] {
            let a = jacobi_sn_cn_dn(u, p);
            let b = jacobi_sn_cn_dn(-u, p);
            assert_eq!(a.sn, -b.sn);
            assert_eq!(a.cn, b.cn);
            assert_eq!(a.dn, b.dn);
        }
    }

    #[test]
    fn complementary_of_zero_fails() {
        assert!(param(0.0).complementary().is_err());
        let c = param(0.25).complementary().unwrap();
        assert_eq!(c.m(), 0.75);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pythagorean_identities(m in 0.0f64..0.999_999, frac in -1.0f64..1.0) {
                let p = param(m);
                let u = frac * 4.0 * complete_elliptic_k(p);
                let t = jacobi_sn_cn_dn(u, p);
                prop_assert!((t.sn * t.sn + t.cn * t.cn - 1.0).abs() <= 1e-12);
                prop_assert!((t.dn * t.dn + m * t.sn * t.sn - 1.0).abs() <= 1e-12);
            }

            #[test]
            fn period_four_k(m in 0.0f64..0.99, u in -3.0f64..3.0) {
                let p = param(m);
                let k = complete_elliptic_k(p);
                let a = jacobi_sn_cn_dn(u, p);
                let b = jacobi_sn_cn_dn(u + 4.0 * k, p);
                prop_assert!((a.sn - b.sn).abs() <= 1e-10);
                prop_assert!((a.cn - b.cn).abs() <= 1e-10);
            }
        }
    }
}
