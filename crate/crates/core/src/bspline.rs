//! Open-knot B-spline bases: knot sequences, basis evaluation, design
//! matrices, least-squares coefficient fitting, and spline evaluation.
//!
//! Everything here speaks *degree* `p`; the order of a spline is `p + 1` and
//! appears nowhere else in the API. The basis follows the usual half-open
//! span convention, except that the last span is closed at the upper
//! boundary so splines cover the whole interval `[a, b]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg;
use crate::Result;

/// An open knot sequence: `degree + 1` copies of each boundary value wrap
/// the interior knots, so a spline on it interpolates its end coefficients.
///
/// A sequence with `k` interior knots carries `n = k + degree + 1` basis
/// functions; the expanded vector has `n + degree + 1` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnotSequence", into = "RawKnotSequence")]
pub struct KnotSequence {
    degree: usize,
    lower: f64,
    upper: f64,
    interior: Vec<f64>,
    expanded: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawKnotSequence {
    degree: usize,
    lower: f64,
    upper: f64,
    interior: Vec<f64>,
}

impl TryFrom<RawKnotSequence> for KnotSequence {
    type Error = Error;

    fn try_from(raw: RawKnotSequence) -> Result<Self> {
        KnotSequence::new(raw.degree, raw.lower, raw.upper, raw.interior)
    }
}

impl From<KnotSequence> for RawKnotSequence {
    fn from(k: KnotSequence) -> Self {
        RawKnotSequence {
            degree: k.degree,
            lower: k.lower,
            upper: k.upper,
            interior: k.interior,
        }
    }
}

impl KnotSequence {
    /// Builds a validated open knot sequence.
    ///
    /// Interior knots must be non-decreasing, lie strictly inside
    /// `(lower, upper)`, and repeat at most `degree` times (each repeat
    /// reduces continuity by one; for degree 0 no repeats are allowed).
    pub fn new(degree: usize, lower: f64, upper: f64, interior: Vec<f64>) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(Error::InvalidKnots(format!(
                "domain [{lower}, {upper}] is not a finite non-empty interval"
            )));
        }
        let max_multiplicity = degree.max(1);
        let mut run = 0usize;
        let mut prev = f64::NEG_INFINITY;
        for (i, &knot) in interior.iter().enumerate() {
            if !knot.is_finite() {
                return Err(Error::InvalidKnots(format!(
                    "interior knot {i} is not finite"
                )));
            }
            if knot <= lower || knot >= upper {
                return Err(Error::InvalidKnots(format!(
                    "interior knot {knot} is not strictly inside ({lower}, {upper})"
                )));
            }
            if knot < prev {
                return Err(Error::InvalidKnots(format!(
                    "interior knots decrease at position {i}"
                )));
            }
            run = if knot == prev { run + 1 } else { 1 };
            if run > max_multiplicity {
                return Err(Error::InvalidKnots(format!(
                    "interior knot {knot} repeats more than {max_multiplicity} times"
                )));
            }
            prev = knot;
        }

        let mut expanded = Vec::with_capacity(interior.len() + 2 * (degree + 1));
        expanded.extend(std::iter::repeat_n(lower, degree + 1));
        expanded.extend_from_slice(&interior);
        expanded.extend(std::iter::repeat_n(upper, degree + 1));
        Ok(KnotSequence {
            degree,
            lower,
            upper,
            interior,
            expanded,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    /// The expanded knot vector with boundary multiplicity `degree + 1`.
    pub fn expanded(&self) -> &[f64] {
        &self.expanded
    }

    /// Number of basis functions `n = |interior| + degree + 1`.
    pub fn basis_count(&self) -> usize {
        self.interior.len() + self.degree + 1
    }

    /// Whether `t` lies in the closed domain `[lower, upper]`.
    pub fn contains(&self, t: f64) -> bool {
        t.is_finite() && t >= self.lower && t <= self.upper
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                value: t,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    /// Index `m` of the span with `ξ_m <= t < ξ_{m+1}` in the expanded
    /// vector (`t = upper` maps to the last positive-length span).
    fn span_index(&self, t: f64) -> usize {
        let n = self.basis_count();
        if t >= self.upper {
            return n - 1;
        }
        let idx = self.expanded.partition_point(|&k| k <= t);
        idx.saturating_sub(1).clamp(self.degree, n - 1)
    }

    /// Evaluates one basis function by the two-term recursion on the
    /// expanded knot vector; recursion terms with an empty knot interval
    /// contribute zero.
    pub fn basis_value(&self, index: usize, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let n = self.basis_count();
        if index >= n {
            return Err(Error::BasisIndex { index, count: n });
        }
        Ok(self.recurse(index, self.degree, t))
    }

    fn recurse(&self, q: usize, d: usize, t: f64) -> f64 {
        let k = &self.expanded;
        if d == 0 {
            let closes_at_upper = k[q + 1] == self.upper && k[q] < k[q + 1];
            let inside = (t >= k[q] && t < k[q + 1]) || (closes_at_upper && t == self.upper);
            return if inside { 1.0 } else { 0.0 };
        }
        let mut value = 0.0;
        let left_width = k[q + d] - k[q];
        if left_width > 0.0 {
            value += (t - k[q]) / left_width * self.recurse(q, d - 1, t);
        }
        let right_width = k[q + d + 1] - k[q + 1];
        if right_width > 0.0 {
            value += (k[q + d + 1] - t) / right_width * self.recurse(q + 1, d - 1, t);
        }
        value
    }

    /// All `n` basis values at `t`. At most `degree + 1` entries are
    /// nonzero and the row sums to one.
    ///
    /// ```
    /// use freeknot::bspline::KnotSequence;
    ///
    /// let knots = KnotSequence::new(1, 0.0, 2.0, vec![1.0])?;
    /// assert_eq!(knots.basis_row(0.5)?, vec![0.5, 0.5, 0.0]);
    /// # Ok::<(), freeknot::Error>(())
    /// ```
    pub fn basis_row(&self, t: f64) -> Result<Vec<f64>> {
        self.check_domain(t)?;
        let p = self.degree;
        let span = self.span_index(t);
        let k = &self.expanded;

        // Triangular evaluation of the nonzero block B_{span-p..=span}.
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for d in 1..=p {
            left[d] = t - k[span + 1 - d];
            right[d] = k[span + d] - t;
            let mut saved = 0.0;
            for r in 0..d {
                let denom = right[r + 1] + left[d - r];
                let term = if denom != 0.0 { values[r] / denom } else { 0.0 };
                values[r] = saved + right[r + 1] * term;
                saved = left[d - r] * term;
            }
            values[d] = saved;
        }

        let mut row = vec![0.0; self.basis_count()];
        row[span - p..=span].copy_from_slice(&values);
        Ok(row)
    }
}

/// A single function observed on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if grid.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: grid.len(),
            });
        }
        check_grid(&grid)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("values contain non-finite entries".into()));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `N` functions sharing one observation grid, stored one row per function.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSet {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl FunctionSet {
    pub fn new(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_grid(&grid)?;
        if values.is_empty() {
            return Err(Error::InvalidInput("function set holds no functions".into()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != grid.len() {
                return Err(Error::InvalidInput(format!(
                    "function {i} has {} samples but the grid has {}",
                    row.len(),
                    grid.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "function {i} contains non-finite values"
                )));
            }
        }
        Ok(FunctionSet { grid, values })
    }

    /// Wraps a single function as a one-row set.
    pub fn from_function(f: &SampledFunction) -> Self {
        FunctionSet {
            grid: f.grid().to_vec(),
            values: vec![f.values().to_vec()],
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn function_count(&self) -> usize {
        self.values.len()
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    pub fn function(&self, i: usize) -> Result<SampledFunction> {
        SampledFunction::new(self.grid.clone(), self.values[i].clone())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("grid contains non-finite entries".into()));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput(format!(
                "grid is not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Basis functions evaluated at every grid point: row `j` is the basis row
/// at `t_j`. Rows sum to one and all entries lie in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    entries: DMatrix<f64>,
    grid: Vec<f64>,
    knots: KnotSequence,
}

impl DesignMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn knots(&self) -> &KnotSequence {
        &self.knots
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Evaluates the basis at every grid point. Every point must lie in the
/// knot domain.
pub fn design_matrix(knots: &KnotSequence, grid: &[f64]) -> Result<DesignMatrix> {
    check_grid(grid)?;
    let n = knots.basis_count();
    let mut entries = DMatrix::zeros(grid.len(), n);
    for (j, &t) in grid.iter().enumerate() {
        let row = knots.basis_row(t)?;
        for (q, v) in row.into_iter().enumerate() {
            entries[(j, q)] = v;
        }
    }
    Ok(DesignMatrix {
        entries,
        grid: grid.to_vec(),
        knots: knots.clone(),
    })
}

/// A knot sequence plus one coefficient row per modelled function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSplineModel", into = "RawSplineModel")]
pub struct SplineModel {
    knots: KnotSequence,
    coefficients: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawSplineModel {
    knots: KnotSequence,
    coefficients: Vec<Vec<f64>>,
}

impl TryFrom<RawSplineModel> for SplineModel {
    type Error = Error;

    fn try_from(raw: RawSplineModel) -> Result<Self> {
        SplineModel::new(raw.knots, raw.coefficients)
    }
}

impl From<SplineModel> for RawSplineModel {
    fn from(m: SplineModel) -> Self {
        RawSplineModel {
            knots: m.knots,
            coefficients: m.coefficients,
        }
    }
}

impl SplineModel {
    pub fn new(knots: KnotSequence, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        let n = knots.basis_count();
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("spline model holds no functions".into()));
        }
        for (i, row) in coefficients.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "coefficient row {i} has length {} but the basis has {n} functions",
                    row.len()
                )));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "coefficient row {i} contains non-finite values"
                )));
            }
        }
        Ok(SplineModel {
            knots,
            coefficients,
        })
    }

    pub fn knots(&self) -> &KnotSequence {
        &self.knots
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn function_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn basis_count(&self) -> usize {
        self.knots.basis_count()
    }

    /// Evaluates function `i` at `t`.
    pub fn evaluate(&self, function: usize, t: f64) -> Result<f64> {
        if function >= self.coefficients.len() {
            return Err(Error::InvalidInput(format!(
                "function index {function} out of range for {} functions",
                self.coefficients.len()
            )));
        }
        let row = self.knots.basis_row(t)?;
        let coeffs = &self.coefficients[function];
        Ok(row.iter().zip(coeffs).map(|(b, c)| b * c).sum())
    }

    /// Evaluates function `i` at every point of `grid`.
    pub fn evaluate_on(&self, function: usize, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter().map(|&t| self.evaluate(function, t)).collect()
    }
}

/// Least-squares coefficients for one or more observation rows on a shared
/// design matrix, solved through a QR factorization.
///
/// With `ridge = 0` this is the plain projection onto the spline space and
/// requires at least as many grid points as basis functions; a positive
/// `ridge` adds `ridge * ||β||²` to the objective and keeps degenerate
/// systems solvable. A basis function with no support on the grid is
/// reported as an error rather than silently zeroed: it signals a knot
/// sequence inconsistent with the sampling grid.
pub fn fit_least_squares(
    design: &DesignMatrix,
    observations: &[Vec<f64>],
    ridge: f64,
) -> Result<SplineModel> {
    if observations.is_empty() {
        return Err(Error::InvalidInput("no observation rows".into()));
    }
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "ridge weight must be a non-negative finite number, got {ridge}"
        )));
    }
    let rows = design.nrows();
    let n = design.ncols();
    for (i, obs) in observations.iter().enumerate() {
        if obs.len() != rows {
            return Err(Error::InvalidInput(format!(
                "observation row {i} has {} values but the grid has {rows}",
                obs.len()
            )));
        }
    }
    if ridge == 0.0 {
        for q in 0..n {
            if design.entries.column(q).iter().all(|&v| v == 0.0) {
                return Err(Error::EmptySupport { index: q });
            }
        }
        if rows < n {
            return Err(Error::InsufficientData {
                needed: n,
                got: rows,
            });
        }
    }

    let m = observations.len();
    let extra = if ridge > 0.0 { n } else { 0 };
    let mut a = DMatrix::zeros(rows + extra, n);
    a.view_mut((0, 0), (rows, n)).copy_from(&design.entries);
    let mut b = DMatrix::zeros(rows + extra, m);
    for (i, obs) in observations.iter().enumerate() {
        for (j, &v) in obs.iter().enumerate() {
            b[(j, i)] = v;
        }
    }
    if ridge > 0.0 {
        let s = ridge.sqrt();
        for q in 0..n {
            a[(rows + q, q)] = s;
        }
    }

    let solution = linalg::solve_least_squares(&a, &b)?;
    let coefficients = (0..m)
        .map(|i| solution.column(i).iter().copied().collect())
        .collect();
    SplineModel::new(design.knots.clone(), coefficients)
}

/// Diagonal of the smoothing matrix `φ(φᵀφ)⁻¹φᵀ` of a full-column-rank
/// design. Entries lie in `[0, 1]` and sum to the basis count.
pub fn smoothing_diagonal(design: &DesignMatrix) -> Result<Vec<f64>> {
    linalg::projection_diagonal(&design.entries)
}
