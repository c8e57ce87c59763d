//! Composite Simpson quadrature on uniform grids.
//!
//! All time integrals in this crate run over smooth integrands on [0, T],
//! so composite Simpson at a few thousand nodes reaches ~1e-12 relative
//! accuracy; nothing fancier is warranted.

/// Default node count for smearing-function integrals (odd, >= 4097).
pub const DEFAULT_NODES: usize = 4097;

/// Composite Simpson over `[a, b]` sampling `f` on `n` uniform nodes.
/// `n` is rounded up to the next odd value >= 3.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(3) | 1;
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson for complex-valued integrands.
pub fn simpson_c<F: Fn(f64) -> num_complex::Complex<f64>>(
    f: F,
    a: f64,
    b: f64,
    n: usize,
) -> num_complex::Complex<f64> {
    let n = n.max(3) | 1;
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// Cumulative Simpson: returns `F(x_i) = ∫_a^{x_i} f` on the same grid as the
/// samples. Interior pairs of panels use Simpson; the running half-panel uses
/// the three-point (Newton) rule so odd prefixes stay O(h^4).
pub fn cumulative_simpson(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    for i in (2..n).step_by(2) {
        out[i] = out[i - 2] + h / 3.0 * (samples[i - 2] + 4.0 * samples[i - 1] + samples[i]);
    }
    for i in (1..n).step_by(2) {
        // integrate the quadratic through (i-1, i, i+1) over the first half,
        // falling back to the trailing panel at the right edge
        if i + 1 < n {
            out[i] = out[i - 1] + h / 12.0 * (5.0 * samples[i - 1] + 8.0 * samples[i] - samples[i + 1]);
        } else {
            out[i] = out[i - 1] + h / 12.0 * (5.0 * samples[i] + 8.0 * samples[i - 1] - samples[i - 2])
        }
    }
    out
}
