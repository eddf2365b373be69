//! Canonical 1D function representations: step functions with constant tails
//! and uniformly sampled grid functions.
//!
//! A step function is stored as `cuts` (strictly increasing breakpoints) plus
//! one value per cell, cells being the half-open intervals `]cuts[i-1], cuts[i]]`
//! with two unbounded tail cells. Every function on the line is represented
//! with constant tails, so the s-total variation of the function equals the
//! s-total variation of its finite value sequence.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absolute tolerance for identifying two breakpoints (collision round-off).
pub const BREAKPOINT_EPS: f64 = 1e-12;

/// Interval of the extended real line, `lo < hi`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return Err(Error::validation(format!(
                "degenerate interval [{lo}, {hi}]: require lo < hi"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn whole_line() -> Self {
        Interval {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn require_bounded(&self) -> Result<()> {
        if !self.is_bounded() {
            return Err(Error::validation(format!(
                "interval [{}, {}] must be bounded",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Piecewise-constant function on the real line with finitely many jumps.
///
/// `vals[i]` is the value on `]cuts[i-1], cuts[i]]`; `vals[0]` is the left
/// tail on `]-inf, cuts[0]]` and `vals[n]` the right tail on `]cuts[n-1], +inf[`.
/// A constant function has no cuts and a single value. Construction
/// canonicalizes: zero-width cells (breakpoints closer than [`BREAKPOINT_EPS`])
/// are dropped and adjacent equal values are merged, which changes neither the
/// function (a.e.) nor any of its s-total variations.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T> {
    cuts: Vec<T>,
    vals: Vec<T>,
}

impl<T: Scalar> StepFunction<T> {
    pub fn new(cuts: Vec<T>, vals: Vec<T>) -> Result<Self> {
        if vals.len() != cuts.len() + 1 {
            return Err(Error::validation(format!(
                "step function needs {} values for {} breakpoints, got {}",
                cuts.len() + 1,
                cuts.len(),
                vals.len()
            )));
        }
        if cuts.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("breakpoints must be finite"));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("step values must be finite"));
        }
        // ties are tolerated here: zero-width cells are merged away below
        if cuts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::validation("breakpoints must be nondecreasing"));
        }
        let mut f = StepFunction { cuts, vals };
        f.canonicalize();
        Ok(f)
    }

    pub fn constant(c: T) -> Self {
        StepFunction {
            cuts: Vec::new(),
            vals: vec![c],
        }
    }

    /// Merge zero-width cells and adjacent equal values in place.
    fn canonicalize(&mut self) {
        let eps = T::of(BREAKPOINT_EPS);
        // Drop cells narrower than the breakpoint tolerance (keep the earlier cut).
        let mut i = 1;
        while i < self.cuts.len() {
            if self.cuts[i] - self.cuts[i - 1] <= eps {
                self.cuts.remove(i);
                self.vals.remove(i);
            } else {
                i += 1;
            }
        }
        // Merge adjacent equal values.
        let mut i = 0;
        while i + 1 < self.vals.len() {
            if self.vals[i] == self.vals[i + 1] {
                self.vals.remove(i + 1);
                self.cuts.remove(i);
            } else {
                i += 1;
            }
        }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.cuts
    }

    /// Full value sequence, tails included (length = breakpoints + 1).
    pub fn values(&self) -> &[T] {
        &self.vals
    }

    pub fn left_tail(&self) -> T {
        self.vals[0]
    }

    pub fn right_tail(&self) -> T {
        *self.vals.last().unwrap()
    }

    pub fn has_equal_tails(&self) -> bool {
        self.left_tail() == self.right_tail()
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.left_tail() == T::zero() && self.right_tail() == T::zero()
    }

    /// Index of the cell containing `x` (cells are left-open, right-closed).
    fn cell_index(&self, x: T) -> usize {
        self.cuts.partition_point(|c| *c < x)
    }

    /// Pointwise evaluation; at a breakpoint the left cell wins: u(cuts[i]) = vals[i].
    pub fn eval(&self, x: T) -> T {
        self.vals[self.cell_index(x)]
    }

    /// Smallest interval outside of which the function is constant (tail-valued).
    pub fn hull(&self) -> Option<(T, T)> {
        Some((*self.cuts.first()?, *self.cuts.last()?))
    }

    pub fn min_value(&self) -> T {
        self.vals.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.vals.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Exact integral over the bounded interval [a, b].
    pub fn integral_on(&self, a: T, b: T) -> Result<T> {
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::validation("integral bounds must be finite with a <= b"));
        }
        let mut acc = T::zero();
        let mut left = a;
        for (i, &c) in self.cuts.iter().enumerate() {
            if c <= a {
                continue;
            }
            if c >= b {
                break;
            }
            acc = acc + self.vals[i] * (c - left);
            left = c;
        }
        acc = acc + self.vals[self.cell_index(b)] * (b - left);
        Ok(acc)
    }

    /// The function x -> u(lambda * x); exact on the value sequence, so every
    /// s-total variation is preserved.
    pub fn dilate(&self, lambda: T) -> Result<Self> {
        if lambda == T::zero() || !lambda.is_finite() {
            return Err(Error::validation("dilation factor must be finite and nonzero"));
        }
        let mut cuts: Vec<T> = self.cuts.iter().map(|&c| c / lambda).collect();
        let mut vals = self.vals.clone();
        if lambda < T::zero() {
            cuts.reverse();
            vals.reverse();
        }
        StepFunction::new(cuts, vals)
    }

    /// Restriction to `I`: pointwise equal to `u` on `]lo, hi]`, extended by
    /// constants outside (the tilde-extension absorbed into the data model).
    pub fn restrict(&self, interval: Interval<T>) -> Self {
        let lo = interval.lo();
        let hi = interval.hi();
        let mut cuts = Vec::new();
        let mut vals = Vec::new();
        // Value just right of lo becomes the left tail.
        let first_cell = self.cuts.partition_point(|c| *c <= lo);
        vals.push(self.vals[first_cell]);
        for (i, &c) in self.cuts.iter().enumerate() {
            if c > lo && c < hi {
                cuts.push(c);
                vals.push(self.vals[i + 1]);
            }
        }
        // The value right of the last kept cut is u(hi), so it already serves
        // as the constant right tail.
        let mut f = StepFunction { cuts, vals };
        f.canonicalize();
        f
    }

    /// L1 distance over the whole line; finite only when the tails agree.
    pub fn l1_distance(&self, other: &Self) -> Result<T> {
        if self.left_tail() != other.left_tail() || self.right_tail() != other.right_tail() {
            return Err(Error::validation(
                "L1 distance requires matching tail values",
            ));
        }
        let mut grid: Vec<T> = self.cuts.iter().chain(other.cuts.iter()).copied().collect();
        if grid.is_empty() {
            return Ok(T::zero());
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(self.l1_on_grid(other, &grid))
    }

    /// Exact L1 distance restricted to a bounded window.
    pub fn l1_distance_on(&self, other: &Self, window: Interval<T>) -> Result<T> {
        window.require_bounded()?;
        let mut grid: Vec<T> = vec![window.lo()];
        for &c in self.cuts.iter().chain(other.cuts.iter()) {
            if c > window.lo() && c < window.hi() {
                grid.push(c);
            }
        }
        grid.push(window.hi());
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(self.l1_on_grid(other, &grid))
    }

    fn l1_on_grid(&self, other: &Self, grid: &[T]) -> T {
        let mut acc = T::zero();
        for w in grid.windows(2) {
            let mid = (w[0] + w[1]) / T::of(2.0);
            acc = acc + (self.eval(mid) - other.eval(mid)).abs() * (w[1] - w[0]);
        }
        acc
    }

    /// Closed-form value of `(1/h) * integral of |u(x+h) - u(x)|^p dx`.
    ///
    /// The difference `u(.+h) - u(.)` is a step function vanishing outside a
    /// compact set whenever the tails agree, so the integral reduces to a sum
    /// over overlap bands between original and shifted breakpoints.
    pub fn shift_difference_lp(&self, h: T, p: T) -> Result<T> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::validation("shift h must be positive and finite"));
        }
        if !(p >= T::one()) {
            return Err(Error::validation("exponent p must be >= 1"));
        }
        if !self.has_equal_tails() {
            return Err(Error::validation(
                "shift-difference integral requires equal tails (or compact support)",
            ));
        }
        if self.cuts.is_empty() {
            return Ok(T::zero());
        }
        let mut grid: Vec<T> = Vec::with_capacity(2 * self.cuts.len());
        grid.extend(self.cuts.iter().copied());
        grid.extend(self.cuts.iter().map(|&c| c - h));
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let two = T::of(2.0);
        let mut acc = T::zero();
        for w in grid.windows(2) {
            let width = w[1] - w[0];
            if width <= T::zero() {
                continue;
            }
            let mid = (w[0] + w[1]) / two;
            let d = (self.eval(mid + h) - self.eval(mid)).abs();
            if d > T::zero() {
                acc = acc + d.powf(p) * width;
            }
        }
        Ok(acc / h)
    }
}

/// Uniformly sampled function: sample i sits at `x0 + i * dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    x0: T,
    dx: T,
    samples: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(x0: T, dx: T, samples: Vec<T>) -> Result<Self> {
        if !x0.is_finite() || !dx.is_finite() || !(dx > T::zero()) {
            return Err(Error::validation("grid needs finite x0 and dx > 0"));
        }
        if samples.is_empty() {
            return Err(Error::validation("grid needs at least one sample"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("grid samples must be finite"));
        }
        Ok(GridFunction { x0, dx, samples })
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_at(&self, i: usize) -> T {
        self.x0 + T::from_usize(i).unwrap() * self.dx
    }

    pub fn xs(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.samples.len()).map(move |i| self.x_at(i))
    }

    pub fn max_abs(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Piecewise-linear evaluation, clamped to the end samples outside the grid.
    pub fn eval_linear(&self, x: T) -> T {
        let n = self.samples.len();
        if n == 1 || x <= self.x0 {
            return self.samples[0];
        }
        let last = self.x_at(n - 1);
        if x >= last {
            return self.samples[n - 1];
        }
        let t = (x - self.x0) / self.dx;
        let i = t.floor().to_usize().unwrap().min(n - 2);
        let frac = t - T::from_usize(i).unwrap();
        self.samples[i] + (self.samples[i + 1] - self.samples[i]) * frac
    }

    /// Trapezoid integral over the full sample range.
    pub fn trapezoid_integral(&self) -> T {
        let mut acc = T::zero();
        for w in self.samples.windows(2) {
            acc = acc + (w[0] + w[1]) / T::of(2.0) * self.dx;
        }
        acc
    }
}

/// Composite Simpson average of `f` over `[a, b]` with `n` subintervals (n even).
fn simpson_average<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, n: usize) -> T {
    debug_assert!(n % 2 == 0);
    let h = (b - a) / T::from_usize(n).unwrap();
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { T::of(4.0) } else { T::of(2.0) };
        acc = acc + w * f(a + h * T::from_usize(i).unwrap());
    }
    acc * h / T::of(3.0) / (b - a)
}

const SIMPSON_SUBCELLS: usize = 64;

/// Cell-average step approximation of a closure on cells `]ph, (p+1)h]`
/// covering `window`. Averages use composite Simpson with a fixed 64-subcell
/// rule, so results are deterministic.
pub fn step_approximate<T: Scalar, F: Fn(T) -> T>(
    f: F,
    h: T,
    window: Interval<T>,
) -> Result<StepFunction<T>> {
    let (p_min, p_max) = approximation_cells(h, window)?;
    let mut vals = Vec::new();
    for p in p_min..=p_max {
        let a = h * T::from_i64(p).unwrap();
        let b = h * T::from_i64(p + 1).unwrap();
        vals.push(simpson_average(&f, a, b, SIMPSON_SUBCELLS));
    }
    assemble_cells(h, p_min, vals)
}

/// Same cell layout as [`step_approximate`] but with exact cell averages of a
/// step function (no quadrature error).
pub fn step_approximate_step<T: Scalar>(
    u: &StepFunction<T>,
    h: T,
    window: Interval<T>,
) -> Result<StepFunction<T>> {
    let (p_min, p_max) = approximation_cells(h, window)?;
    let mut vals = Vec::new();
    for p in p_min..=p_max {
        let a = h * T::from_i64(p).unwrap();
        let b = h * T::from_i64(p + 1).unwrap();
        vals.push(u.integral_on(a, b)? / h);
    }
    assemble_cells(h, p_min, vals)
}

fn approximation_cells<T: Scalar>(h: T, window: Interval<T>) -> Result<(i64, i64)> {
    window.require_bounded()?;
    if !(h > T::of(10.0 * BREAKPOINT_EPS)) || !h.is_finite() {
        return Err(Error::validation(
            "cell width h must exceed the breakpoint resolution",
        ));
    }
    let p_min = (window.lo() / h).floor().to_i64().unwrap();
    let p_max = ((window.hi() / h).ceil().to_i64().unwrap() - 1).max(p_min);
    Ok((p_min, p_max))
}

fn assemble_cells<T: Scalar>(h: T, p_min: i64, vals: Vec<T>) -> Result<StepFunction<T>> {
    let n = vals.len();
    let cuts: Vec<T> = (0..=n as i64)
        .map(|k| h * T::from_i64(p_min + k).unwrap())
        .collect();
    // Constant-tail extension: tails repeat the outermost cell averages.
    let mut full = Vec::with_capacity(n + 2);
    full.push(vals[0]);
    full.extend(vals);
    full.push(*full.last().unwrap());
    StepFunction::new(cuts, full)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(cuts: &[f64], vals: &[f64]) -> StepFunction<f64> {
        StepFunction::new(cuts.to_vec(), vals.to_vec()).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(StepFunction::new(vec![1.0, 0.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(StepFunction::new(vec![0.0], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![f64::NAN], vec![1.0, 2.0]).is_err());
        // tied breakpoints are allowed and merged away
        let tied = StepFunction::new(vec![0.0, 0.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(tied.breakpoints(), &[0.0]);
        assert_eq!(tied.values(), &[1.0, 3.0]);
    }

    #[test]
    fn canonicalization_merges_equal_values_and_is_idempotent() {
        let u = step(&[0.0, 1.0, 2.0], &[3.0, 3.0, 5.0, 5.0]);
        assert_eq!(u.breakpoints(), &[1.0]);
        assert_eq!(u.values(), &[3.0, 5.0]);
        let again = StepFunction::new(u.breakpoints().to_vec(), u.values().to_vec()).unwrap();
        assert_eq!(again, u);
    }

    #[test]
    fn zero_width_cells_are_dropped() {
        let u = step(&[0.0, 1e-13], &[1.0, 7.0, 2.0]);
        assert_eq!(u.breakpoints(), &[0.0]);
        assert_eq!(u.values(), &[1.0, 2.0]);
    }

    #[test]
    fn eval_uses_left_closed_right_convention() {
        let u = step(&[0.0, 1.0], &[5.0, 7.0, 9.0]);
        assert_eq!(u.eval(-3.0), 5.0);
        assert_eq!(u.eval(0.0), 5.0); // breakpoint belongs to the left cell
        assert_eq!(u.eval(0.5), 7.0);
        assert_eq!(u.eval(1.0), 7.0);
        assert_eq!(u.eval(1.5), 9.0);
    }

    #[test]
    fn integral_is_exact() {
        let u = step(&[0.0, 1.0], &[0.0, 2.0, 0.0]);
        assert_eq!(u.integral_on(-5.0, 5.0).unwrap(), 2.0);
        assert_eq!(u.integral_on(0.25, 0.75).unwrap(), 1.0);
        assert_eq!(u.integral_on(1.0, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn shift_difference_unit_box() {
        // u = 1 on ]0,1]: two unit-jump overlap bands of width 1, divided by h = 1.
        let u = step(&[0.0, 1.0], &[0.0, 1.0, 0.0]);
        let v = u.shift_difference_lp(1.0, 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn shift_difference_matches_ramp_closed_form() {
        // Fine step approximation of x on [0,1], zero outside. For p = 1 the
        // closed form is I_1(h) = 2 - h when h <= 1 and 1/h otherwise.
        let n = 2000;
        let cuts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mut vals = vec![0.0];
        vals.extend((1..=n).map(|i| i as f64 / n as f64));
        vals.push(0.0);
        let u = StepFunction::new(cuts, vals).unwrap();

        let i1 = u.shift_difference_lp(0.5, 1.0).unwrap();
        assert!((i1 - 1.5).abs() < 2e-3, "I_1(0.5) = {i1}");

        for h in [1.0, 1.7, 3.0] {
            let v = u.shift_difference_lp(h, 1.0).unwrap();
            assert!((v - 1.0 / h).abs() < 2e-3, "h I_1({h}) = {}", v * h);
        }
    }

    #[test]
    fn shift_difference_rejects_unequal_tails() {
        let u = step(&[0.0], &[0.0, 1.0]);
        assert!(u.shift_difference_lp(1.0, 1.0).is_err());
    }

    #[test]
    fn step_approximate_constant() {
        let u = step_approximate(|_x: f64| 3.0, 0.25, Interval::new(-1.0, 1.0).unwrap()).unwrap();
        assert_eq!(u.values(), &[3.0]);
        assert!(u.breakpoints().is_empty());
    }

    #[test]
    fn step_approximate_linear_means() {
        // cells ]0,0.5] and ]0.5,1] with means 0.25, 0.75; constant-tail
        // extension merges the window-edge cuts away
        let u = step_approximate(|x: f64| x, 0.5, Interval::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(u.breakpoints(), &[0.5]);
        assert!((u.eval(0.3) - 0.25).abs() < 1e-12);
        assert!((u.eval(0.8) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn step_approximate_heaviside_cell_average() {
        let f = |x: f64| if x >= 0.3 { 1.0 } else { 0.0 };
        let u = step_approximate(f, 1.0, Interval::new(0.0, 1.0).unwrap()).unwrap();
        // single cell ]0,1]; Simpson on the jump is accurate to ~1e-2
        let v = u.eval(0.5);
        assert!((v - 0.7).abs() < 0.01, "cell average {v}");
    }

    #[test]
    fn step_approximate_refines_in_l1() {
        // Cauchy differences shrink by roughly the resolution ratio for Lipschitz input.
        let w = Interval::new(0.0, 1.0).unwrap();
        let f = |x: f64| (2.5 * x).sin();
        let a = step_approximate(f, 0.1, w).unwrap();
        let b = step_approximate(f, 0.05, w).unwrap();
        let c = step_approximate(f, 0.025, w).unwrap();
        let d_ab = a.l1_distance_on(&b, w).unwrap();
        let d_bc = b.l1_distance_on(&c, w).unwrap();
        assert!(d_bc < d_ab / 1.8, "L1 Cauchy differences {d_ab} vs {d_bc}");
    }

    #[test]
    fn restrict_examples() {
        let c = StepFunction::constant(4.0);
        assert_eq!(c.restrict(Interval::new(-2.0, 7.0).unwrap()), c);

        let two_jump = step(&[0.0, 1.0], &[0.0, 5.0, 1.0]);
        let between = two_jump.restrict(Interval::new(0.2, 0.9).unwrap());
        assert_eq!(between, StepFunction::constant(5.0));

        let r = two_jump.restrict(Interval::new(0.5, 10.0).unwrap());
        assert_eq!(r.breakpoints(), &[1.0]);
        assert_eq!(r.values(), &[5.0, 1.0]);
    }

    #[test]
    fn dilate_preserves_value_sequence() {
        let u = step(&[0.0, 1.0], &[0.0, 5.0, 1.0]);
        let d = u.dilate(2.0).unwrap();
        assert_eq!(d.values(), u.values());
        assert_eq!(d.breakpoints(), &[0.0, 0.5]);
        let neg = u.dilate(-1.0).unwrap();
        assert_eq!(neg.values(), &[1.0, 5.0, 0.0]);
    }

    #[test]
    fn grid_linear_eval() {
        let g = GridFunction::new(0.0, 0.5, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.eval_linear(-1.0), 0.0);
        assert_eq!(g.eval_linear(0.25), 0.5);
        assert_eq!(g.eval_linear(0.5), 1.0);
        assert_eq!(g.eval_linear(0.75), 0.5);
        assert_eq!(g.eval_linear(9.0), 0.0);
    }
}
