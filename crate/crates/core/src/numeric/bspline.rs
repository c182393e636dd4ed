//! Cubic B-spline bases on clamped knot vectors.

use nalgebra::DMatrix;

pub const ORDER: usize = 4;

/// Clamped knot vector for a cubic spline with one basis function per site,
/// built by averaging consecutive sites (de Boor). Sites must be strictly
/// increasing and there must be at least four of them.
pub fn averaged_knots(sites: &[f64]) -> Vec<f64> {
    let nb = sites.len();
    assert!(nb >= ORDER, "need at least {ORDER} sites");
    let mut t = Vec::with_capacity(nb + ORDER);
    t.extend(std::iter::repeat_n(sites[0], ORDER));
    for i in 1..nb - ORDER + 1 {
        t.push((sites[i] + sites[i + 1] + sites[i + 2]) / 3.0);
    }
    t.extend(std::iter::repeat_n(sites[nb - 1], ORDER));
    t
}

/// Number of basis functions carried by a clamped knot vector.
pub fn basis_count(knots: &[f64]) -> usize {
    knots.len() - ORDER
}

fn find_span(knots: &[f64], x: f64) -> usize {
    let nb = basis_count(knots);
    if x >= knots[nb] {
        return nb - 1;
    }
    if x <= knots[ORDER - 1] {
        return ORDER - 1;
    }
    // Largest i with knots[i] <= x < knots[i + 1].
    let mut lo = ORDER - 1;
    let mut hi = nb;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Nonzero basis values at `x`: returns the index of the first nonzero
/// function and its four values (Cox–de Boor recursion).
pub fn eval_nonzero(knots: &[f64], x: f64) -> (usize, [f64; ORDER]) {
    let span = find_span(knots, x);
    let mut n = [0.0; ORDER];
    let mut left = [0.0; ORDER];
    let mut right = [0.0; ORDER];
    n[0] = 1.0;
    for j in 1..ORDER {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    (span + 1 - ORDER, n)
}

/// Dense collocation matrix `B[i, j] = B_j(xs[i])`.
pub fn collocation(knots: &[f64], xs: &[f64]) -> DMatrix<f64> {
    let nb = basis_count(knots);
    let mut b = DMatrix::zeros(xs.len(), nb);
    for (i, &x) in xs.iter().enumerate() {
        let (first, vals) = eval_nonzero(knots, x);
        for (k, v) in vals.iter().enumerate() {
            b[(i, first + k)] = *v;
        }
    }
    b
}

/// Difference operator of order `d` acting on `n` coefficients.
pub fn difference_matrix(n: usize, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    for _ in 0..d {
        let rows = m.nrows();
        if rows < 2 {
            return DMatrix::zeros(0, n);
        }
        m = DMatrix::from_fn(rows - 1, n, |i, j| m[(i + 1, j)] - m[(i, j)]);
    }
    m
}
