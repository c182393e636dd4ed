//! Small numerical building blocks shared by the calibration and solver code.

pub mod bspline;
pub mod interp;
pub mod lm;
pub mod nnls;

/// Golden-section minimisation of a unimodal scalar function on `[lo, hi]`.
///
/// Returns the abscissa of the best point seen. `iters` bounds the number of
/// interior evaluations; 60 shrinks the bracket by ~1e-12.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, iters: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
