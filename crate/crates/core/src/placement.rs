//! Derivative envelopes and knot construction.
//!
//! The local error of a degree-`p` spline over a knot span of length `h` is
//! bounded by `M * h^(p+1) / p!`, where `M` bounds the `(p+1)`-th derivative
//! on the span. The iterative local placement scan walks the grid left to
//! right and stretches each span as far as that bound allows, so knots end
//! up dense where the functions wiggle and sparse where they are flat. The
//! `(p+1)`-th derivatives are estimated by iterated forward divided
//! differences of the samples, and the envelope takes the pointwise maximum
//! of their magnitudes across the whole function set, so one knot sequence
//! serves every function at the same tolerance.

use serde::{Deserialize, Serialize};

use crate::bspline::{FunctionSet, KnotSequence, SampledFunction};
use crate::error::Error;
use crate::Result;

/// Per-grid-point bound on the magnitude of the `derivative_order`-th
/// derivative across a function set.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeEnvelope {
    grid: Vec<f64>,
    envelope: Vec<f64>,
    derivative_order: usize,
}

impl DerivativeEnvelope {
    pub fn new(grid: Vec<f64>, envelope: Vec<f64>, derivative_order: usize) -> Result<Self> {
        if grid.len() != envelope.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: envelope.len(),
            });
        }
        for w in grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("envelope grid is not strictly increasing".into()));
            }
        }
        if envelope.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::InvalidInput(
                "envelope values must be finite and non-negative".into(),
            ));
        }
        Ok(DerivativeEnvelope {
            grid,
            envelope,
            derivative_order,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.envelope
    }

    pub fn derivative_order(&self) -> usize {
        self.derivative_order
    }

    /// Largest envelope value over grid points inside `[lo, hi]`; falls back
    /// to the bracketing points when no grid point lands in the interval.
    fn max_over(&self, lo: f64, hi: f64) -> f64 {
        let start = self.grid.partition_point(|&t| t < lo);
        let end = self.grid.partition_point(|&t| t <= hi);
        if start < end {
            self.envelope[start..end]
                .iter()
                .fold(0.0f64, |m, &c| m.max(c))
        } else {
            let before = start.saturating_sub(1);
            let after = start.min(self.grid.len() - 1);
            self.envelope[before].max(self.envelope[after])
        }
    }
}

/// Accuracy targets for the input and output representations of a paired
/// regression problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub epsilon_input: f64,
    pub epsilon_output: f64,
}

impl ToleranceConfig {
    pub fn new(epsilon_input: f64, epsilon_output: f64) -> Result<Self> {
        check_epsilon(epsilon_input)?;
        check_epsilon(epsilon_output)?;
        Ok(ToleranceConfig {
            epsilon_input,
            epsilon_output,
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be a positive finite number, got {epsilon}"
        )));
    }
    Ok(())
}

/// Iterated forward divided differences of order `order`.
///
/// Each pass replaces value `j` with `(v[j+1] - v[j]) / (t[j+1] - t[j])`, so
/// non-uniform spacing is handled by construction. The trailing `order`
/// points, where the forward stencil leaves the grid, replicate the last
/// computable value so the output keeps the input length.
pub fn finite_difference(series: &SampledFunction, order: usize) -> Result<SampledFunction> {
    if order == 0 {
        return Err(Error::InvalidConfig("difference order must be positive".into()));
    }
    let j = series.len();
    if j < order + 1 {
        return Err(Error::InsufficientData {
            needed: order + 1,
            got: j,
        });
    }
    let grid = series.grid();
    let mut values = series.values().to_vec();
    for pass in 0..order {
        for i in 0..j - 1 - pass {
            values[i] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
        }
    }
    let last = values[j - order - 1];
    for v in values.iter_mut().skip(j - order) {
        *v = last;
    }
    SampledFunction::new(grid.to_vec(), values)
}

/// Centered moving average with an odd window, for pre-smoothing noisy
/// samples before differencing. The window shrinks symmetrically at the
/// boundaries. Off by default everywhere; differencing uses raw samples
/// unless a caller smooths first.
pub fn moving_average(series: &SampledFunction, window: usize) -> Result<SampledFunction> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "moving-average window must be odd and positive, got {window}"
        )));
    }
    let half = window / 2;
    let values = series.values();
    let j = values.len();
    let smoothed = (0..j)
        .map(|i| {
            let reach = half.min(i).min(j - 1 - i);
            let slice = &values[i - reach..=i + reach];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect();
    SampledFunction::new(series.grid().to_vec(), smoothed)
}

/// Pointwise maximum of `|(degree+1)-th difference|` across the set.
pub fn derivative_envelope(set: &FunctionSet, degree: usize) -> Result<DerivativeEnvelope> {
    let order = degree + 1;
    let mut envelope = vec![0.0f64; set.grid_len()];
    for i in 0..set.function_count() {
        let diff = finite_difference(&set.function(i)?, order)?;
        for (e, &d) in envelope.iter_mut().zip(diff.values()) {
            *e = e.max(d.abs());
        }
    }
    DerivativeEnvelope::new(set.grid().to_vec(), envelope, order)
}

/// Local approximation error bound `M * h^(degree+1) / degree!` for a span
/// of length `h` whose derivative envelope peaks at `M`.
pub fn local_error_bound(span_length: f64, max_envelope: f64, degree: usize) -> f64 {
    max_envelope * span_length.powi(degree as i32 + 1) / factorial(degree)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// One span the placement scan had to force forward: even a single grid
/// step exceeded the tolerance there.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcedSpan {
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
}

/// Result of the placement scan: the knot sequence plus any spans where the
/// bound could not be met at the grid's resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedKnots {
    pub knots: KnotSequence,
    pub forced_spans: Vec<ForcedSpan>,
}

/// Places interior knots by the iterative local scan.
///
/// Starting from the lower boundary, candidates are grid points scanned
/// left to right; the running envelope maximum over the open span feeds the
/// local error bound, and the knot lands on the last candidate whose bound
/// still satisfies `delta <= epsilon` (the bound holds by construction on
/// every emitted span). When even the single-grid-step span violates the
/// tolerance, the scan advances one step anyway and records the span in
/// [`PlacedKnots::forced_spans`] so termination is guaranteed and the
/// violation stays visible. The scan is deterministic; identical inputs
/// produce identical knot sequences.
///
/// ```
/// use freeknot::bspline::FunctionSet;
/// use freeknot::placement::{derivative_envelope, ilp_place_knots};
///
/// // t^2 on a 0.1-spaced grid: second differences are exactly 2, so spans
/// // of 0.2 certify 2 * 0.2^2 / 1! = 0.08 <= 0.09 and spans of 0.3 fail
/// let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
/// let values: Vec<f64> = grid.iter().map(|t| t * t).collect();
/// let set = FunctionSet::new(grid, vec![values])?;
/// let envelope = derivative_envelope(&set, 1)?;
/// let placed = ilp_place_knots(&envelope, 1, 0.09)?;
/// assert_eq!(placed.knots.interior(), &[0.2, 0.4, 0.6, 0.8]);
/// assert!(placed.forced_spans.is_empty());
/// # Ok::<(), freeknot::Error>(())
/// ```
pub fn ilp_place_knots(
    envelope: &DerivativeEnvelope,
    degree: usize,
    epsilon: f64,
) -> Result<PlacedKnots> {
    check_epsilon(epsilon)?;
    if envelope.derivative_order() != degree + 1 {
        return Err(Error::InvalidConfig(format!(
            "envelope holds order-{} derivatives but degree {} needs order {}",
            envelope.derivative_order(),
            degree,
            degree + 1
        )));
    }
    let grid = envelope.grid();
    let c = envelope.values();
    let j = grid.len();
    if j < 2 {
        return Err(Error::InsufficientData { needed: 2, got: j });
    }

    let mut interior = Vec::new();
    let mut forced_spans = Vec::new();
    let mut prev = 0usize;
    loop {
        let mut running_max = c[prev];
        let mut placed = None;
        for q in prev + 1..j {
            running_max = running_max.max(c[q]);
            let delta = local_error_bound(grid[q] - grid[prev], running_max, degree);
            if delta > epsilon {
                if q == prev + 1 {
                    // Even one grid step violates the bound: advance anyway.
                    forced_spans.push(ForcedSpan {
                        lower: grid[prev],
                        upper: grid[q],
                        delta,
                    });
                    placed = Some(q);
                } else {
                    placed = Some(q - 1);
                }
                break;
            }
        }
        match placed {
            // The bound held all the way to the upper boundary.
            None => break,
            Some(idx) if idx == j - 1 => break,
            Some(idx) => {
                interior.push(grid[idx]);
                prev = idx;
            }
        }
    }

    let knots = KnotSequence::new(degree, grid[0], grid[j - 1], interior)?;
    Ok(PlacedKnots {
        knots,
        forced_spans,
    })
}

/// Uniform interior knots: `k` points splitting `[lower, upper]` into
/// `k + 1` equal spans.
pub fn equidistant_knots(
    lower: f64,
    upper: f64,
    degree: usize,
    interior_count: usize,
) -> Result<KnotSequence> {
    let width = (upper - lower) / (interior_count + 1) as f64;
    let interior = (1..=interior_count)
        .map(|i| lower + i as f64 * width)
        .collect();
    KnotSequence::new(degree, lower, upper, interior)
}

/// Bound check for one positive-length knot span.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanCheck {
    pub lower: f64,
    pub upper: f64,
    pub max_envelope: f64,
    pub delta: f64,
    pub passes: bool,
}

/// Per-span bound report; `all_pass` is the conjunction over spans.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub epsilon: f64,
    pub spans: Vec<SpanCheck>,
    pub all_pass: bool,
}

/// Evaluates the local error bound on every positive-length span of the
/// knot sequence against `epsilon`. The envelope must hold derivatives of
/// order `degree + 1`.
pub fn verify_bound(
    knots: &KnotSequence,
    envelope: &DerivativeEnvelope,
    epsilon: f64,
) -> Result<BoundReport> {
    check_epsilon(epsilon)?;
    if envelope.derivative_order() != knots.degree() + 1 {
        return Err(Error::InvalidConfig(format!(
            "envelope holds order-{} derivatives but degree {} needs order {}",
            envelope.derivative_order(),
            knots.degree(),
            knots.degree() + 1
        )));
    }
    let expanded = knots.expanded();
    let mut spans = Vec::new();
    let mut all_pass = true;
    for w in expanded.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let max_envelope = envelope.max_over(w[0], w[1]);
        let delta = local_error_bound(w[1] - w[0], max_envelope, knots.degree());
        let passes = delta <= epsilon;
        all_pass &= passes;
        spans.push(SpanCheck {
            lower: w[0],
            upper: w[1],
            max_envelope,
            delta,
            passes,
        });
    }
    Ok(BoundReport {
        epsilon,
        spans,
        all_pass,
    })
}
