//! Self-check suites run by `gcq check`. Each suite is seeded, so a run is
//! reproducible; the result records the worst residual against its tolerance.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::contour::{cauchy_validate, gamma_point_and_derivative, ContourRule};
use crate::divdiff::{inversion_check, leibniz_check, product_identity_residual, PointSet};
use crate::elliptic::{complete_elliptic_k, jacobi_sn_cn_dn, EllipticParameter};
use crate::error::Result;
use crate::gcq::StepperKind;
use crate::mesh::{graded_mesh, TimeMesh};
use crate::symbol::TransferSymbol;

const SEED: u64 = 0x6371_2024;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    fn new(name: &'static str, cases: usize, worst: f64, tolerance: f64) -> Self {
        SuiteResult {
            name,
            passed: worst <= tolerance,
            cases,
            worst,
            tolerance,
        }
    }
}

/// Sorted points in `(lo, hi)` with gaps of at least `gap`.
fn spaced_points(rng: &mut StdRng, count: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    let slack = hi - lo - gap * (count as f64 + 1.0);
    assert!(slack > 0.0, "interval too short for {count} points");
    let mut cuts: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..slack)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.iter()
        .enumerate()
        .map(|(i, c)| lo + gap * (i as f64 + 1.0) + c)
        .collect()
}

/// Pythagorean identities and `sn(K) = 1` on a grid of 1024 `(m, u)` pairs,
/// plus `K(0) = π/2`.
pub fn elliptic_suite() -> SuiteResult {
    let mut worst =
        (complete_elliptic_k(EllipticParameter::new(0.0).expect("m = 0")) - FRAC_PI_2).abs();
    let mut cases = 1;
    for i in 0..32 {
        let complement = 10f64.powf(-12.0 * i as f64 / 31.0);
        let m = EllipticParameter::from_complement(complement).expect("complement in (0, 1]");
        let k = complete_elliptic_k(m);
        let top = jacobi_sn_cn_dn(k, m);
        worst = worst.max((top.sn - 1.0).abs());
        for j in 0..32 {
            let u = -k + 2.0 * k * j as f64 / 31.0;
            let t = jacobi_sn_cn_dn(u, m);
            worst = worst
                .max((t.sn * t.sn + t.cn * t.cn - 1.0).abs())
                .max((t.dn * t.dn + m.m() * t.sn * t.sn - 1.0).abs());
            cases += 1;
        }
    }
    SuiteResult::new("elliptic", cases, worst, 1e-12)
}

/// Cauchy integral of `1/(s - p)` for every pole of graded and uniform
/// meshes, and the node derivative against a central difference.
pub fn cauchy_suite() -> Result<SuiteResult> {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    let meshes: Vec<TimeMesh> = vec![
        TimeMesh::uniform(16, 1.0)?,
        graded_mesh(16, 2.0, 1.0)?,
        graded_mesh(32, 1.5, 1.0)?,
    ];
    for mesh in &meshes {
        for stepper in [
            StepperKind::Trapezoidal,
            StepperKind::Bdf2,
            StepperKind::Bdf1,
        ] {
            let rule = ContourRule::for_mesh(mesh, stepper, None)?;
            for pole in stepper.real_poles(mesh) {
                let v = cauchy_validate(&rule, Complex64::new(pole, 0.0))?;
                worst = worst.max((v - 1.0).norm());
                cases += 1;
            }
        }
    }
    Ok(SuiteResult::new("cauchy", cases, worst, 1e-6))
}

/// `γ'` against a central difference of `γ` along the contours of the
/// Cauchy suite.
pub fn derivative_suite() -> Result<SuiteResult> {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for mesh in [TimeMesh::uniform(16, 1.0)?, graded_mesh(32, 2.0, 1.0)?] {
        for stepper in [
            StepperKind::Trapezoidal,
            StepperKind::Bdf2,
            StepperKind::Bdf1,
        ] {
            let rule = ContourRule::for_mesh(&mesh, stepper, None)?;
            let params = rule.params().expect("elliptic rule");
            let k = params.quarter_period;
            for i in 0..16 {
                let sigma = -k + 2.0 * k * (i as f64 + 0.5) / 16.0;
                let h = 1e-5;
                let (_, d) = gamma_point_and_derivative(sigma, params);
                let (a, _) = gamma_point_and_derivative(sigma + h, params);
                let (b, _) = gamma_point_and_derivative(sigma - h, params);
                let fd = (a - b) / (2.0 * h);
                worst = worst.max((fd - d).norm() / d.norm());
                cases += 1;
            }
        }
    }
    Ok(SuiteResult::new("derivative", cases, worst, 1e-5))
}

/// Leibniz rule for the modified divided difference on 100 random point sets.
pub fn leibniz_suite() -> SuiteResult {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let xs = spaced_points(&mut rng, n, 0.0, 5.0, 0.2);
        let points = PointSet::from_real(&xs).expect("spaced points are distinct");
        let a = rng.gen_range(0.2..2.0);
        worst = worst.max(leibniz_check(
            &points,
            |z| (-a * z).exp(),
            |z| 1.0 / (z + 1.0),
        ));
    }
    SuiteResult::new("leibniz", 100, worst, 1e-10)
}

/// Forward then inverse weighted sums with `K = (s + 1)²/(s + 3)` on 100
/// random point sets. `K` and `1/K` are both polynomially bounded, so the
/// round trip loses no more than the conditioning of the divided differences.
pub fn inversion_suite() -> Result<SuiteResult> {
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let symbol = TransferSymbol::resolve("(s+1)^2/(s+3)", None, None)?;
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=7);
        let xs = spaced_points(&mut rng, n, 0.5, 6.0, 0.3);
        let points = PointSet::from_real(&xs)?;
        let g: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        worst = worst.max(inversion_check(&points, &symbol, &g)?);
    }
    Ok(SuiteResult::new("inversion", 100, worst, 1e-9))
}

/// Product identities behind the Leibniz rule on 50 random point sets.
pub fn product_suite() -> Result<SuiteResult> {
    let mut rng = StdRng::seed_from_u64(SEED + 2);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let n = rng.gen_range(5..=9);
        let xs = spaced_points(&mut rng, n, 0.0, 5.0, 0.2);
        worst = worst.max(product_identity_residual(&PointSet::from_real(&xs)?)?);
    }
    Ok(SuiteResult::new("product", 50, worst, 1e-10))
}

/// Every suite, in a fixed order.
pub fn run_all() -> Result<Vec<SuiteResult>> {
    Ok(vec![
        elliptic_suite(),
        cauchy_suite()?,
        derivative_suite()?,
        leibniz_suite(),
        inversion_suite()?,
        product_suite()?,
    ])
}
