//! Small numeric kernels shared by the analytic modules.
//!
//! Everything here is deliberately plain: a dense partial-pivot linear solve (systems
//! stay small, one row per job class), a golden-section scalar minimizer with a
//! left-leaning plateau rule, a bisection root finder, an adaptive Gauss-Legendre
//! integrator, and linear-interpolation quantiles. No allocation tricks, no SIMD —
//! the cost profile of this crate is dominated by simulation, not by these kernels.

use crate::error::{Error, Result};

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is row-major and square, `b` the right-hand side; both are consumed as
/// scratch. Suitable for the dense, well-conditioned systems this crate produces
/// (dimensions rarely exceed a few thousand). Returns the solution vector.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        // Partial pivot: bring the largest remaining entry of this column to the diagonal.
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
///
/// Terminates when the bracket width drops below `tol` (or after `max_iters`
/// shrink steps) and returns the bracket midpoint with its value. Plateaus are
/// broken toward the smaller argument: ties keep the left sub-bracket.
pub fn golden_section_min<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_iters: usize,
) -> (f64, f64) {
    const R: f64 = 0.381_966_011_250_105_2; // (3 - sqrt 5) / 2
    let (mut a, mut b) = (a, b);
    let mut x1 = a + R * (b - a);
    let mut x2 = b - R * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iters {
        if b - a < tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + R * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - R * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Bisection root finder for a continuous function with a sign change on `[a, b]`.
///
/// Halves the bracket until its width falls below `tol * max(1, |x|)`. The caller
/// must supply endpoints with opposite (or zero) signs; this is checked.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidParameter(format!(
            "bisection bracket [{a}, {b}] has no sign change"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < tol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// 10-point Gauss-Legendre abscissas (positive half) and weights on `[-1, 1]`.
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_21,
    0.433_395_394_129_247_19,
    0.679_409_568_299_024_41,
    0.865_063_366_688_984_51,
    0.973_906_528_517_171_72,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_36,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_59,
    0.066_671_344_308_688_14,
];

fn gauss_legendre_10<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for i in 0..5 {
        acc += GL_W[i] * (f(mid - half * GL_X[i]) + f(mid + half * GL_X[i]));
    }
    half * acc
}

fn adaptive_gl<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    whole: f64,
    depth: usize,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = gauss_legendre_10(f, a, mid);
    let right = gauss_legendre_10(f, mid, b);
    let err = (left + right - whole).abs();
    if err <= tol {
        return Ok(left + right);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { achieved: err, requested: tol });
    }
    Ok(adaptive_gl(f, a, mid, 0.5 * tol, left, depth - 1)?
        + adaptive_gl(f, mid, b, 0.5 * tol, right, depth - 1)?)
}

/// Adaptive Gauss-Legendre integration of `f` over `[a, b]` to absolute tolerance
/// `abs_tol`, by interval bisection with a two-level error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss_legendre_10(&f, a, b);
    adaptive_gl(&f, a, b, abs_tol, whole, 48)
}

/// Linear-interpolation quantile of an ascending-sorted sample, `q` in `[0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    if lo + 1 == sorted.len() {
        return sorted[lo];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Five-number summary (min, Q1, median, Q3, max) with interpolated quartiles.
pub fn five_number_summary(values: &[f64]) -> [f64; 5] {
    let mut sorted = values.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    [
        sorted[0],
        quantile(&sorted, 0.25),
        quantile(&sorted, 0.5),
        quantile(&sorted, 0.75),
        sorted[sorted.len() - 1],
    ]
}

/// Largest relative coordinate gap `max_i |a_i - b_i| / max(|b_i|, floor)`.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1e-300))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_recovers_known_solution() {
        // 3x3 system with solution (1, -2, 3).
        let a = vec![
            vec![2.0, 1.0, -1.0],
            vec![-3.0, -1.0, 2.0],
            vec![-2.0, 1.0, 2.0],
        ];
        let x_true = [1.0, -2.0, 3.0];
        let b: Vec<f64> = a
            .iter()
            .map(|row| row.iter().zip(x_true).map(|(c, x)| c * x).sum())
            .collect();
        let x = solve_dense(a, b).unwrap();
        for (xi, ti) in x.iter().zip(x_true) {
            assert!((xi - ti).abs() < 1e-12, "got {xi}, want {ti}");
        }
    }

    #[test]
    fn dense_solve_rejects_singular() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(solve_dense(a, vec![1.0, 2.0]), Err(Error::SingularSystem)));
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        // Positional accuracy near a smooth minimum is limited to ~sqrt(machine eps)
        // times the scale: below that offset the function values compare equal.
        let (x, fx) = golden_section_min(|x| (x - 2.5) * (x - 2.5) + 1.0, 0.0, 10.0, 1e-10, 200);
        assert!((x - 2.5).abs() < 5e-8);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_breaks_plateau_left() {
        // Flat on [0, 4], rising after: minimizer should land at the low end region.
        let (x, _) = golden_section_min(|x| if x <= 4.0 { 1.0 } else { x - 3.0 }, 0.0, 10.0, 1e-9, 300);
        assert!(x < 1e-6, "plateau should resolve toward the smaller argument, got {x}");
    }

    #[test]
    fn bisection_finds_cubic_root() {
        let x = bisect_root(|x| x * x * x - 8.0, 0.0, 5.0, 1e-13).unwrap();
        assert!((x - 2.0).abs() < 1e-11);
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let i = integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((i - 9.0).abs() < 1e-10);
        let i = integrate(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((i - (1f64.exp() - 1.0)).abs() < 1e-10);
        // A peaked integrand that forces subdivision.
        let i = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let expected = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((i - expected).abs() < 1e-8, "got {i}, want {expected}");
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert!((quantile(&xs, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile(&xs, 0.25) - 1.75).abs() < 1e-15);
        let s = five_number_summary(&[5.0, 1.0, 3.0]);
        assert_eq!(s, [1.0, 2.0, 3.0, 4.0, 5.0]);
    }
}
