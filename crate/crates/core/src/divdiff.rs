//! Explicit gCQ weights and divided differences.
//!
//! With `x_k = 2/Δ_k` the trapezoidal gCQ weights are
//!
//! ```text
//! w_{n,j} = D_j^n (1/2πi) ∮ K_ρ(s) G_j^n(s) ds        (negatively oriented)
//! G_j^n(s) = Π_{k=j+2}^{n} (x_k + s) / Π_{k=j}^{n} (x_k - s)
//! D_j^n    = 2(1/Δ_j + 1/Δ_{j+1}) for j < n,  D_n^n = 1
//! ```
//!
//! and equivalently `w_{n,j} = (-1)^{n-j} ⟨x_j, ..., x_n⟩ K_ρ` with the
//! modified divided difference
//! `⟨x_m..x_j⟩f = (x_m + x_{m+1}) [x_m..x_j](f · Π_{k=m+2}^{j}(x_k + ·))`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::ContourRule;
use crate::error::{GcqError, Result};
use crate::mesh::TimeMesh;
use crate::sum::pairwise_sum;
use crate::symbol::TransferSymbol;

/// Pairwise distinct complex points `x_0..x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Complex64>,
}

impl PointSet {
    /// Rejects empty sets and points closer than `1e-12` relative.
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(GcqError::DegeneratePoints("empty point set".into()));
        }
        for (i, a) in points.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(GcqError::DegeneratePoints(format!("non-finite point {a}")));
            }
            for b in &points[i + 1..] {
                if (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(f64::MIN_POSITIVE) {
                    return Err(GcqError::DegeneratePoints(format!(
                        "points {a} and {b} coincide"
                    )));
                }
            }
        }
        Ok(PointSet { points })
    }

    pub fn from_real(points: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Consecutive sub-range `x_m..x_j` (inclusive).
    pub fn slice(&self, m: usize, j: usize) -> PointSet {
        PointSet {
            points: self.points[m..=j].to_vec(),
        }
    }
}

/// `[x_0..x_n]` from the point values `f(x_i)`. Points are processed in order
/// of increasing real part.
pub fn divided_difference_of_values(points: &[Complex64], values: &[Complex64]) -> Complex64 {
    debug_assert_eq!(points.len(), values.len());
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .re
            .total_cmp(&points[b].re)
            .then(points[a].im.total_cmp(&points[b].im))
    });
    let x: Vec<Complex64> = order.iter().map(|&i| points[i]).collect();
    let mut v: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            v[i] = (v[i] - v[i + 1]) / (x[i] - x[i + k]);
        }
    }
    v[0]
}

/// `⟨x_0..x_n⟩` from the point values `f(x_i)`. Not symmetric in the points.
///
/// The factors `x_k + z` of the weight are applied one at a time to the full
/// table of `[x_i..x_j]` with `[x_i..x_j](z + c)h = (x_i + c)[x_i..x_j]h +
/// [x_{i+1}..x_j]h`, which avoids forming the large products explicitly.
pub fn modified_divided_difference_of_values(
    points: &[Complex64],
    values: &[Complex64],
) -> Complex64 {
    debug_assert_eq!(points.len(), values.len());
    let n = points.len();
    if n == 1 {
        return values[0];
    }
    // table[i][j - i] = [x_i..x_j] f
    let mut table: Vec<Vec<Complex64>> = values.iter().map(|&v| vec![v]).collect();
    for width in 1..n {
        for i in 0..n - width {
            let d =
                (table[i + 1][width - 1] - table[i][width - 1]) / (points[i + width] - points[i]);
            table[i].push(d);
        }
    }
    for &c in &points[2..] {
        for i in 0..n {
            for w in 0..n - i {
                let next = if w > 0 {
                    table[i + 1][w - 1]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                table[i][w] = (points[i] + c) * table[i][w] + next;
            }
        }
    }
    (points[0] + points[1]) * table[0][n - 1]
}

/// Classical divided difference `[x_0..x_n] f`.
pub fn divided_difference(points: &PointSet, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
    let values: Vec<Complex64> = points.points.iter().map(|&x| f(x)).collect();
    divided_difference_of_values(&points.points, &values)
}

/// Modified divided difference `⟨x_0..x_n⟩ f`.
pub fn modified_divided_difference(
    points: &PointSet,
    f: impl Fn(Complex64) -> Complex64,
) -> Complex64 {
    let values: Vec<Complex64> = points.points.iter().map(|&x| f(x)).collect();
    modified_divided_difference_of_values(&points.points, &values)
}

/// `[x_0..x_n] f = (1/2πi) ∮ f(z) / Π(z - x_k) dz` on a circle around the
/// centroid with radius 1.5 times the spread of the points. Starts with 512
/// trapezoidal nodes and doubles until two values agree to `1e-11`.
pub fn divided_difference_by_contour(
    points: &PointSet,
    f: impl Fn(Complex64) -> Complex64,
) -> Result<Complex64> {
    let x = points.points();
    let centroid = x.iter().sum::<Complex64>() / x.len() as f64;
    let spread = x.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
    let radius = 1.5 * if spread > 0.0 { spread } else { 1.0 };
    let integral = |n: usize| {
        let terms: Vec<Complex64> = (0..n)
            .map(|l| {
                let e = Complex64::from_polar(radius, 2.0 * PI * l as f64 / n as f64);
                let z = centroid + e;
                let nodal: Complex64 = x.iter().map(|&p| z - p).product();
                f(z) / nodal * e / n as f64
            })
            .collect();
        pairwise_sum(&terms)
    };
    let mut n = 512;
    let mut prev = integral(n);
    while n < 1 << 20 {
        n *= 2;
        let next = integral(n);
        if (next - prev).norm() <= 1e-11 * next.norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(GcqError::Validation(
        "contour divided difference did not converge".into(),
    ))
}

/// `x_k = 2/Δ_k` for `k = 1..=N`, stored at index `k - 1`.
fn trapezoidal_points(mesh: &TimeMesh) -> Vec<f64> {
    mesh.steps().iter().map(|d| 2.0 / d).collect()
}

fn d_coefficient(mesh: &TimeMesh, n: usize, j: usize) -> f64 {
    if j == n {
        1.0
    } else {
        2.0 * (1.0 / mesh.step(j) + 1.0 / mesh.step(j + 1))
    }
}

/// Lower-triangular table of trapezoidal gCQ weights `w_{n,j}`, `1 ≤ j ≤ n ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    rows: Vec<Vec<Complex64>>,
    pub label: String,
}

impl WeightTable {
    /// Route A: contour quadrature of `K_ρ G_j^n` on `contour`.
    pub fn assemble(
        symbol: &TransferSymbol,
        rho: i32,
        mesh: &TimeMesh,
        contour: &ContourRule,
    ) -> Result<Self> {
        let x = trapezoidal_points(mesh);
        check_enclosed(&x, contour)?;
        let k = symbol.regularized(rho);
        let kw: Vec<Complex64> = contour
            .nodes()
            .iter()
            .zip(contour.weights())
            .map(|(&z, &w)| k.evaluate(z).map(|v| v * w))
            .collect::<Result<_>>()?;
        let z = contour.nodes();
        let big_n = mesh.len();
        let mut rows = Vec::with_capacity(big_n);
        let mut ratio = vec![Complex64::new(0.0, 0.0); z.len()];
        let mut terms = vec![Complex64::new(0.0, 0.0); z.len()];
        for n in 1..=big_n {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            // ratio = Π_{k=j+2}^{n} (x_k + s)/(x_k - s), grown as j decreases
            ratio.iter_mut().for_each(|r| *r = Complex64::new(1.0, 0.0));
            for j in (1..=n).rev() {
                if j + 2 <= n {
                    let xk = x[j + 1];
                    for (r, &s) in ratio.iter_mut().zip(z) {
                        *r *= (xk + s) / (xk - s);
                    }
                }
                for (l, t) in terms.iter_mut().enumerate() {
                    let s = z[l];
                    let g = if j == n {
                        1.0 / (x[n - 1] - s)
                    } else {
                        ratio[l] / ((x[j - 1] - s) * (x[j] - s))
                    };
                    *t = kw[l] * g;
                }
                row[j - 1] = -d_coefficient(mesh, n, j) * pairwise_sum(&terms);
            }
            rows.push(row);
        }
        Ok(WeightTable {
            rows,
            label: k.label,
        })
    }

    /// `w_{n,j}` for `1 ≤ j ≤ n ≤ N`.
    pub fn get(&self, n: usize, j: usize) -> Complex64 {
        self.rows[n - 1][j - 1]
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `Σ_{j=1}^{n} w_{n,j} g_j` for every `n`, with a leading zero for `t_0`.
    pub fn convolve(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        if g.len() != self.len() + 1 {
            return Err(GcqError::Parameter(format!(
                "expected {} samples, got {}",
                self.len() + 1,
                g.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
        for n in 1..=self.len() {
            let terms: Vec<Complex64> = (1..=n).map(|j| self.get(n, j) * g[j]).collect();
            out[n] = pairwise_sum(&terms);
        }
        Ok(out)
    }
}

fn check_enclosed(x: &[f64], contour: &ContourRule) -> Result<()> {
    match x
        .iter()
        .find(|&&p| !contour.encloses(Complex64::new(p, 0.0)))
    {
        Some(p) => Err(GcqError::Contour(format!(
            "pole {p} is not inside the contour"
        ))),
        None => Ok(()),
    }
}

/// Single weight `w_{n,j}` by route A.
pub fn gcq_weight(
    symbol: &TransferSymbol,
    rho: i32,
    mesh: &TimeMesh,
    n: usize,
    j: usize,
    contour: &ContourRule,
) -> Result<Complex64> {
    check_indices(mesh, n, j)?;
    let x = trapezoidal_points(mesh);
    check_enclosed(&x[j - 1..n], contour)?;
    let k = symbol.regularized(rho);
    let terms = contour
        .nodes()
        .iter()
        .zip(contour.weights())
        .map(|(&s, &w)| {
            let mut g = Complex64::new(1.0, 0.0);
            for &xk in &x[(j + 1).min(n)..n] {
                g *= xk + s;
            }
            for &xk in &x[j - 1..n] {
                g /= xk - s;
            }
            k.evaluate(s).map(|v| w * v * g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(-d_coefficient(mesh, n, j) * pairwise_sum(&terms))
}

/// Route B: `w_{n,j} = (-1)^{n-j} ⟨x_j..x_n⟩ K_ρ`. `Ok(None)` when two of the
/// points `2/Δ_k` coincide (for instance on a uniform mesh).
pub fn gcq_weight_divided_difference(
    symbol: &TransferSymbol,
    rho: i32,
    mesh: &TimeMesh,
    n: usize,
    j: usize,
) -> Result<Option<Complex64>> {
    check_indices(mesh, n, j)?;
    let x = trapezoidal_points(mesh);
    let points = match PointSet::from_real(&x[j - 1..n]) {
        Ok(p) => p,
        Err(GcqError::DegeneratePoints(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let k = symbol.regularized(rho);
    let values = points
        .points()
        .iter()
        .map(|&p| k.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(Some(
        sign * modified_divided_difference_of_values(points.points(), &values),
    ))
}

fn check_indices(mesh: &TimeMesh, n: usize, j: usize) -> Result<()> {
    if !(1 <= j && j <= n && n <= mesh.len()) {
        return Err(GcqError::Parameter(format!(
            "weight index (n, j) = ({n}, {j}) outside 1 <= j <= n <= {}",
            mesh.len()
        )));
    }
    Ok(())
}

/// Relative residual of `⟨x_0..x_n⟩(fg) = Σ_k ⟨x_0..x_k⟩f ⟨x_k..x_n⟩g`,
/// scaled by `max(1, |lhs|)`.
pub fn leibniz_check(
    points: &PointSet,
    f: impl Fn(Complex64) -> Complex64,
    g: impl Fn(Complex64) -> Complex64,
) -> f64 {
    let x = points.points();
    let fv: Vec<Complex64> = x.iter().map(|&p| f(p)).collect();
    let gv: Vec<Complex64> = x.iter().map(|&p| g(p)).collect();
    let fg: Vec<Complex64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
    let n = x.len() - 1;
    let lhs = modified_divided_difference_of_values(x, &fg);
    let rhs: Complex64 = (0..=n)
        .map(|k| {
            modified_divided_difference_of_values(&x[..=k], &fv[..=k])
                * modified_divided_difference_of_values(&x[k..], &gv[k..])
        })
        .sum();
    (lhs - rhs).norm() / lhs.norm().max(1.0)
}

/// Applies `φ_i = Σ_{j≤i} (-1)^{i-j+1} g_j ⟨x_j..x_i⟩K`, then
/// `g̃_i = Σ_{ℓ≤i} (-1)^{i-ℓ+1} φ_ℓ ⟨x_ℓ..x_i⟩K⁻¹`, and returns
/// `max_i |g̃_i - g_i| / max(1, max_i |g_i|)`.
pub fn inversion_check(points: &PointSet, symbol: &TransferSymbol, g: &[Complex64]) -> Result<f64> {
    let x = points.points();
    if g.len() != x.len() {
        return Err(GcqError::Parameter(format!(
            "{} data values for {} points",
            g.len(),
            x.len()
        )));
    }
    let kv = x
        .iter()
        .map(|&p| symbol.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    let inv = symbol.reciprocal();
    let kinv = x
        .iter()
        .map(|&p| inv.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    let apply = |data: &[Complex64], values: &[Complex64]| -> Vec<Complex64> {
        (0..x.len())
            .map(|i| {
                (0..=i)
                    .map(|j| {
                        let sign = if (i - j) % 2 == 0 { -1.0 } else { 1.0 };
                        sign * data[j]
                            * modified_divided_difference_of_values(&x[j..=i], &values[j..=i])
                    })
                    .sum()
            })
            .collect()
    };
    let phi = apply(g, &kv);
    let back = apply(&phi, &kinv);
    let scale = g.iter().map(|v| v.norm()).fold(1.0, f64::max);
    Ok(back
        .iter()
        .zip(g)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale)
}

/// Both product identities behind the Leibniz rule, with
/// `P_m^j(z) = Π_{k=m}^{j}(x_k + z)` and `D_m^j f = [x_m..x_j] f`. Needs at
/// least five points; returns the largest residual over `2 ≤ ℓ ≤ n-2`,
/// scaled by `max(1, |rhs|)`.
pub fn product_identity_residual(points: &PointSet) -> Result<f64> {
    let x = points.points();
    if x.len() < 5 {
        return Err(GcqError::Parameter("need at least five points".into()));
    }
    let n = x.len() - 1;
    let p = |m: usize, j: usize| {
        move |z: Complex64| -> Complex64 {
            if j < m {
                Complex64::new(1.0, 0.0)
            } else {
                x[m..=j].iter().map(|&xk| xk + z).product()
            }
        }
    };
    let d = |m: usize, j: usize, f: &dyn Fn(Complex64) -> Complex64| {
        let values: Vec<Complex64> = x[m..=j].iter().map(|&z| f(z)).collect();
        divided_difference_of_values(&x[m..=j], &values)
    };
    let mut worst = 0.0_f64;
    for l in 2..=n - 2 {
        let mut lhs: Complex64 = (l..=n - 2)
            .map(|k| d(l, k, &p(2, k)) * d(k, k, &p(k + 1, k + 1)) * d(k, n - 1, &p(k + 2, n)))
            .sum();
        lhs += d(l, n - 1, &p(2, n - 1)) * d(n - 1, n - 1, &p(n, n));
        let rhs = d(l, n - 1, &p(2, n));
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        for j in l..=n - 2 {
            let lhs: Complex64 = (l..=j)
                .map(|k| d(l, k, &p(2, k)) * d(k, k, &p(k + 1, k + 1)) * d(k, j, &p(k + 2, n)))
                .sum();
            let rhs = d(l, j, &p(2, n));
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// `Q(f) = Σ_{j=1}^{n-1} ((t_{j+1} - t_{j-1})/2) f((t_{j+1} + t_{j-1})/2)`
/// over the whole mesh. Requires `f(t_0) = f(t_N) = 0` to `1e-12`.
pub fn paired_midpoint_rule(f: impl Fn(f64) -> f64, mesh: &TimeMesh) -> Result<f64> {
    let t = mesh.points();
    let (a, b) = (f(t[0]), f(mesh.horizon()));
    if a.abs() > 1e-12 || b.abs() > 1e-12 {
        return Err(GcqError::Precondition(format!(
            "integrand must vanish at both ends (f(t_0) = {a}, f(t_N) = {b})"
        )));
    }
    let terms: Vec<f64> = (1..mesh.len())
        .map(|j| 0.5 * (t[j + 1] - t[j - 1]) * f(0.5 * (t[j + 1] + t[j - 1])))
        .collect();
    Ok(crate::sum::pairwise_sum_real(&terms))
}

/// `|w_{n,j} - ((t_{j+1} - t_{j-1})/2) κ(t_n - (t_{j-1} + t_{j+1})/2)|` for
/// `1 ≤ j ≤ n - 1`, with `κ` the closed-form kernel of `symbol`.
pub fn weight_midpoint_gap(
    table: &WeightTable,
    symbol: &TransferSymbol,
    mesh: &TimeMesh,
    n: usize,
    j: usize,
) -> Result<f64> {
    if !(1 <= j && j < n && n <= mesh.len() && n <= table.len()) {
        return Err(GcqError::Parameter(format!(
            "midpoint gap needs 1 <= j < n <= N, got (n, j) = ({n}, {j})"
        )));
    }
    let t = mesh.points();
    let tau = t[n] - 0.5 * (t[j - 1] + t[j + 1]);
    let kappa = symbol.kernel(tau).ok_or_else(|| {
        GcqError::Parameter(format!("no closed-form kernel for {}", symbol.label))
    })?;
    let midpoint = 0.5 * (t[j + 1] - t[j - 1]) * kappa;
    Ok((table.get(n, j) - midpoint).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcq::{uniform_cq_weights, StepperKind};
    use crate::mesh::graded_mesh;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn real_points(x: &[f64]) -> PointSet {
        PointSet::from_real(x).unwrap()
    }

    /// Sorted points in `(lo, hi)` with spacing at least `gap`.
    fn spaced_points(rng: &mut StdRng, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
        loop {
            let mut x: Vec<f64> = (0..=n).map(|_| rng.gen_range(lo..hi)).collect();
            x.sort_by(f64::total_cmp);
            if x.windows(2).all(|w| w[1] - w[0] >= gap) {
                return x;
            }
        }
    }

    #[test]
    fn classical_examples() {
        let (a, b) = (1.3, -0.4);
        let v = divided_difference(&real_points(&[a, b]), |z| z * z);
        assert!((v - c(a + b)).norm() < 1e-15);
        let cubic = |z: Complex64| z * z * z - 2.0 * z + 1.0;
        let v = divided_difference(&real_points(&[0.1, 0.5, 0.9, 2.0, 3.5]), cubic);
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn exp_matches_contour_oracle() {
        let p = real_points(&[0.0, 0.1, 0.2]);
        let a = divided_difference(&p, |z| z.exp());
        let b = divided_difference_by_contour(&p, |z| z.exp()).unwrap();
        assert!((a - b).norm() <= 1e-10, "{a} vs {b}");
        // hand value: (e^0.2 - 2e^0.1 + 1) / (2 · 0.01)
        let hand = ((0.2_f64).exp() - 2.0 * (0.1_f64).exp() + 1.0) / 0.02;
        assert!((a.re - hand).abs() < 1e-12);
    }

    #[test]
    fn contour_oracle_agrees_up_to_eight() {
        let mut rng = StdRng::seed_from_u64(11);
        for n in 1..=8 {
            let x = spaced_points(&mut rng, n, 0.0, 4.0, 0.3);
            let p = real_points(&x);
            let f = |z: Complex64| z.sin() / (z + 3.0);
            let a = divided_difference(&p, f);
            let b = divided_difference_by_contour(&p, f).unwrap();
            assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0), "n={n}");
        }
    }

    #[test]
    fn degenerate_points_are_rejected() {
        assert!(matches!(
            PointSet::from_real(&[1.0, 2.0, 1.0]),
            Err(GcqError::DegeneratePoints(_))
        ));
        assert!(PointSet::new(vec![]).is_err());
    }

    #[test]
    fn modified_examples() {
        let f = |z: Complex64| z.exp();
        let a = Complex64::new(0.7, 0.0);
        assert_eq!(
            modified_divided_difference(&PointSet::new(vec![a]).unwrap(), f),
            f(a)
        );
        let two = real_points(&[0.7, 1.9]);
        let expected = c(0.7 + 1.9) * divided_difference(&two, f);
        assert!((modified_divided_difference(&two, f) - expected).norm() < 1e-15);
        let three = real_points(&[0.2, 1.1, 3.0]);
        assert!(modified_divided_difference(&three, |_| c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn modified_of_one_is_kronecker_delta() {
        let mut rng = StdRng::seed_from_u64(2);
        let x = spaced_points(&mut rng, 10, 0.5, 4.0, 0.2);
        let one = vec![c(1.0); x.len()];
        let pts: Vec<Complex64> = x.iter().map(|&v| c(v)).collect();
        for l in 0..=10 {
            let v = modified_divided_difference_of_values(&pts[l..], &one[l..]);
            let expected = if l == 10 { 1.0 } else { 0.0 };
            assert!((v - expected).norm() < 1e-12, "l={l}: {v}");
        }
    }

    #[test]
    fn leibniz_rule() {
        let mut rng = StdRng::seed_from_u64(7);
        assert_eq!(
            leibniz_check(&real_points(&[1.5]), |z| z.exp(), |z| z * z),
            0.0
        );
        for _ in 0..100 {
            let n = rng.gen_range(0..=8);
            let x = spaced_points(&mut rng, n, 0.0, 5.0, 0.2);
            let p = real_points(&x);
            let r = leibniz_check(&p, |z| z.exp(), |z| 1.0 / (z + 10.0));
            assert!(r <= 1e-9, "{x:?}: {r}");
            let co: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = leibniz_check(
                &p,
                |z| co[0] + z * (co[1] + z * (co[2] + z * co[3])),
                |z| co[4] + z * (co[5] + z * (co[6] + z * co[7])),
            );
            assert!(r <= 1e-9, "{x:?}: {r}");
        }
    }

    #[test]
    fn inversion_formula() {
        let k = crate::symbol::parse_symbol("1/(s+1)", -1.0, 1.0).unwrap();
        let mesh = graded_mesh(8, 2.0, 1.0).unwrap();
        let x: Vec<f64> = mesh.steps().iter().map(|d| 2.0 / d).collect();
        let mut rng = StdRng::seed_from_u64(5);
        for n in 0..=7 {
            let p = real_points(&x[..=n]);
            let g: Vec<Complex64> = (0..=n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            assert!(inversion_check(&p, &k, &g).unwrap() <= 1e-9);
            assert_eq!(inversion_check(&p, &k, &vec![c(0.0); n + 1]).unwrap(), 0.0);
        }
        let p = real_points(&[3.0]);
        assert!(inversion_check(&p, &k, &[c(2.5)]).unwrap() < 1e-15);
    }

    #[test]
    fn product_identities() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..50 {
            let n = rng.gen_range(4..=8);
            let x = spaced_points(&mut rng, n, 0.0, 5.0, 0.2);
            assert!(product_identity_residual(&real_points(&x)).unwrap() <= 1e-10);
        }
        assert!(product_identity_residual(&real_points(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn routes_agree_on_distinct_steps() {
        let k = crate::symbol::parse_symbol("exp(-s/8)/(s+1)", -1.0, 1.0).unwrap();
        let mesh = graded_mesh(6, 2.0, 1.0).unwrap();
        let rule = ContourRule::for_mesh(&mesh, StepperKind::Trapezoidal, Some(2048)).unwrap();
        let table = WeightTable::assemble(&k, 0, &mesh, &rule).unwrap();
        for n in 1..=6 {
            for j in 1..=n {
                let a = table.get(n, j);
                let b = gcq_weight_divided_difference(&k, 0, &mesh, n, j)
                    .unwrap()
                    .unwrap();
                assert!(
                    (a - b).norm() <= 1e-8 * b.norm().max(1.0),
                    "({n},{j}): {a} vs {b}"
                );
                let single = gcq_weight(&k, 0, &mesh, n, j, &rule).unwrap();
                assert!((single - a).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn route_b_unavailable_on_uniform_mesh() {
        let mesh = TimeMesh::uniform(4, 1.0).unwrap();
        let k = TransferSymbol::example();
        assert_eq!(
            gcq_weight_divided_difference(&k, 0, &mesh, 3, 1).unwrap(),
            None
        );
        assert!(gcq_weight_divided_difference(&k, 0, &mesh, 3, 3)
            .unwrap()
            .is_some());
        assert!(gcq_weight_divided_difference(&k, 0, &mesh, 2, 3).is_err());
    }

    #[test]
    fn uniform_mesh_reduces_to_classical_weights() {
        let mesh = TimeMesh::uniform(6, 1.0).unwrap();
        let delta = mesh.step(1);
        let k = TransferSymbol::example();
        let rule = ContourRule::for_mesh(&mesh, StepperKind::Trapezoidal, Some(1024)).unwrap();
        let table = WeightTable::assemble(&k, 0, &mesh, &rule).unwrap();
        let p = crate::gcq::default_uniform_parameters(6);
        let omega = uniform_cq_weights(&k, delta, p.count, p.lambda).unwrap();
        let top = omega[..7].iter().map(|w| w.norm()).fold(0.0, f64::max);
        for n in 1..=6 {
            assert!((table.get(n, n) - k.evaluate(c(2.0 / delta)).unwrap()).norm() < 1e-10);
            for j in 1..=n {
                assert!(
                    (table.get(n, j) - omega[n - j]).norm() <= 1e-8 * top,
                    "({n},{j})"
                );
            }
        }
        // time-translation structure
        for n in 2..=6 {
            for j in 2..=n {
                assert!((table.get(n, j) - table.get(n - 1, j - 1)).norm() < 1e-9);
            }
        }
    }

    /// The uniform-mesh reduction for K = 1/s needs a contour that keeps s = 0 outside.
    #[test]
    fn uniform_integrator_weights_on_circle() {
        let mesh = TimeMesh::uniform(6, 1.0).unwrap();
        let delta = mesh.step(1);
        let k = TransferSymbol::power(-1.0);
        let rule = ContourRule::circle(c(2.0 / delta), 1.0 / delta, 512).unwrap();
        let table = WeightTable::assemble(&k, 0, &mesh, &rule).unwrap();
        for n in 1..=6 {
            assert!((table.get(n, n) - delta / 2.0).norm() < 1e-10);
            for j in 1..n {
                assert!((table.get(n, j) - delta).norm() < 1e-8, "({n},{j})");
            }
        }
    }

    #[test]
    fn paired_midpoint_examples() {
        let mesh = TimeMesh::uniform(4, 1.0).unwrap();
        assert_eq!(paired_midpoint_rule(|_| 0.0, &mesh).unwrap(), 0.0);
        let q = paired_midpoint_rule(|t| t * (1.0 - t), &mesh).unwrap();
        assert!((q - 5.0 / 32.0).abs() < 1e-15);
        assert!((q - 1.0 / 6.0).abs() < 0.02);
        assert!(matches!(
            paired_midpoint_rule(|t| t, &mesh),
            Err(GcqError::Precondition(_))
        ));
    }

    #[test]
    fn midpoint_gap() {
        let k = TransferSymbol::shifted(1.0, 5).unwrap();
        assert!((k.kernel(1.0).unwrap() - (-1.0_f64).exp() / 24.0).abs() < 1e-17);
        let mesh = TimeMesh::uniform(8, 1.0).unwrap();
        let rule = ContourRule::for_mesh(&mesh, StepperKind::Trapezoidal, None).unwrap();
        let table = WeightTable::assemble(&k, 0, &mesh, &rule).unwrap();
        let gap = weight_midpoint_gap(&table, &k, &mesh, 5, 2).unwrap();
        assert!(gap < 1e-3);
        assert!(weight_midpoint_gap(&table, &k, &mesh, 5, 5).is_err());
        // zero symbol: both the weight and the midpoint term vanish
        let zero = TransferSymbol::constant(c(0.0));
        let zt = WeightTable::assemble(&zero, 0, &mesh, &rule).unwrap();
        assert_eq!(weight_midpoint_gap(&zt, &zero, &mesh, 5, 2).unwrap(), 0.0);
    }

    #[test]
    fn convolution_matches_forward_solve() {
        use crate::gcq::{forward_solve, SolveOptions};
        let k = TransferSymbol::example();
        for n in [2, 5, 12] {
            let mesh = graded_mesh(n, 2.0, 1.0).unwrap();
            // the table integrates every residue on the contour, so it needs more nodes
            let rule = ContourRule::for_mesh(&mesh, StepperKind::Trapezoidal, Some(1024)).unwrap();
            let table = WeightTable::assemble(&k, 0, &mesh, &rule).unwrap();
            let g: Vec<Complex64> = mesh
                .points()
                .iter()
                .map(|&t| c(t.sqrt() * (1.0 + t)))
                .collect();
            let a = table.convolve(&g).unwrap();
            let b = forward_solve(
                &k,
                0,
                &g,
                &mesh,
                StepperKind::Trapezoidal,
                &rule,
                SolveOptions::default(),
            )
            .unwrap();
            for i in 1..=n {
                assert!(
                    (a[i] - b[i]).norm() <= 1e-8 * a[i].norm().max(1e-300),
                    "N={n} i={i}: {} vs {}",
                    a[i],
                    b[i]
                );
            }
        }
    }
}
