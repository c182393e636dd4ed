//! Piecewise-linear lookup on tabulated data.

/// Index `i` such that `xs[i] <= x <= xs[i + 1]`, clamped to the first/last
/// segment. `xs` must be strictly increasing with at least two entries.
pub fn segment_index(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let last = xs.len() - 2;
    match xs.binary_search_by(|probe| probe.total_cmp(&x)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

/// Linear interpolation with linear extrapolation from the end segments.
pub fn lerp_table(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() == 1 {
        return ys[0];
    }
    let i = segment_index(xs, x);
    let (x0, x1) = (xs[i], xs[i + 1]);
    if x == x0 {
        return ys[i];
    }
    if x == x1 {
        return ys[i + 1];
    }
    let t = (x - x0) / (x1 - x0);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Linear interpolation clamped to the end values outside the table.
pub fn lerp_table_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        ys[0]
    } else if x >= xs[xs.len() - 1] {
        ys[ys.len() - 1]
    } else {
        lerp_table(xs, ys, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_at_knots_and_extrapolates() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 3.0];
        assert_eq!(lerp_table(&xs, &ys, 1.0), 2.0);
        assert_eq!(lerp_table(&xs, &ys, 3.0), 3.0);
        assert!((lerp_table(&xs, &ys, 2.0) - 2.5).abs() < 1e-15);
        assert!((lerp_table(&xs, &ys, 5.0) - 4.0).abs() < 1e-15);
        assert!((lerp_table(&xs, &ys, -1.0) + 2.0).abs() < 1e-15);
        assert_eq!(lerp_table_clamped(&xs, &ys, 7.0), 3.0);
    }
}
