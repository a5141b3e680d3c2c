//! Deterministic synthetic signals on `[0, 1]` used by verification suites
//! and examples: polynomials, chirps whose local frequency grows toward the
//! left edge, and plateau-spike shapes that are flat almost everywhere.

use crate::bspline::FunctionSet;

/// Uniform grid of `points` samples spanning `[lower, upper]`.
pub fn uniform_grid(points: usize, lower: f64, upper: f64) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    (0..points)
        .map(|i| lower + (upper - lower) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Chirp `amplitude * sin(2π / (t + shift))`: the instantaneous frequency
/// scales like `1 / (t + shift)²`, so small shifts wiggle hard near zero.
pub fn chirp(t: f64, shift: f64, amplitude: f64) -> f64 {
    amplitude * (2.0 * std::f64::consts::PI / (t + shift)).sin()
}

/// Narrow bump `exp(-((t - center) / width)²)` on a flat background.
pub fn spike(t: f64, center: f64, width: f64) -> f64 {
    (-((t - center) / width).powi(2)).exp()
}

/// Logistic step between two plateaus.
pub fn plateau_step(t: f64, center: f64, steepness: f64) -> f64 {
    1.0 / (1.0 + (-steepness * (t - center)).exp())
}

fn sample(grid: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.iter().map(|&t| f(t)).collect()
}

/// The ten-signal corpus: four polynomials, three chirps, and three
/// plateau-spike shapes, all sampled on a shared uniform grid over `[0, 1]`.
pub fn corpus(points: usize) -> FunctionSet {
    let grid = uniform_grid(points, 0.0, 1.0);
    let rows = vec![
        sample(&grid, |t| t),
        sample(&grid, |t| t * t),
        sample(&grid, |t| t.powi(3) - 0.5 * t),
        sample(&grid, |t| t.powi(4) - t * t),
        sample(&grid, |t| chirp(t, 0.15, 1.0)),
        sample(&grid, |t| chirp(t, 0.15, 0.8)),
        sample(&grid, |t| chirp(t, 0.2, 1.0)),
        sample(&grid, |t| spike(t, 0.3, 0.05)),
        sample(&grid, |t| spike(t, 0.7, 0.03)),
        sample(&grid, |t| plateau_step(t, 0.5, 40.0)),
    ];
    FunctionSet::new(grid, rows).expect("corpus construction is static")
}

/// Column labels matching [`corpus`] row order.
pub fn corpus_names() -> Vec<String> {
    vec![
        "poly_linear".into(),
        "poly_quadratic".into(),
        "poly_cubic".into(),
        "poly_quartic".into(),
        "chirp_fast".into(),
        "chirp_fast_scaled".into(),
        "chirp_slow".into(),
        "spike_wide".into(),
        "spike_narrow".into(),
        "plateau_step".into(),
    ]
}

/// Six chirp variants with different shifts and amplitudes, the benchmark
/// set for placement comparisons: their local complexity varies by orders
/// of magnitude across the domain.
pub fn chirp_corpus(points: usize) -> FunctionSet {
    let grid = uniform_grid(points, 0.0, 1.0);
    let rows = vec![
        sample(&grid, |t| chirp(t, 0.15, 1.0)),
        sample(&grid, |t| chirp(t, 0.15, 0.75)),
        sample(&grid, |t| chirp(t, 0.18, 1.0)),
        sample(&grid, |t| chirp(t, 0.18, 0.6)),
        sample(&grid, |t| chirp(t, 0.22, 1.0)),
        sample(&grid, |t| chirp(t, 0.22, 0.85)),
    ];
    FunctionSet::new(grid, rows).expect("corpus construction is static")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_has_ten_signals_on_a_shared_grid() {
        let set = corpus(201);
        assert_eq!(set.function_count(), 10);
        assert_eq!(set.grid_len(), 201);
        assert_eq!(corpus_names().len(), 10);
    }

    #[test]
    fn chirp_corpus_is_bounded_by_its_amplitudes() {
        let set = chirp_corpus(301);
        for row in set.rows() {
            assert!(row.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        }
    }
}
