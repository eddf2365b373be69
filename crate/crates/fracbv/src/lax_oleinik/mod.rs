//! Lax-Oleinik solver for smooth degenerate convex fluxes.
//!
//! The entropy solution of `u_t + f(u)_x = 0` is `u(t,x) = b((x - y)/t)` where
//! `b` inverts the velocity `a = f'` and `y = y(t,x)` minimizes
//! `G(t,x,y) = U_0(y) + t h((x-y)/t)` with `U_0` the primitive of the data and
//! `h` the primitive of `b`. For step-like data `G` is convex on each cell of
//! the data, so its global minimum is attained either at a cell's stationary
//! point `y = x - t a(v_cell)` or at a breakpoint; the minimizer is found
//! exactly by enumerating those candidates (a dense scan plus golden-section
//! refinement serves as the independent cross-check in the tests).

mod analysis;

pub use analysis::{
    check_oleinik_holder, decay_report, estimate_degeneracy, estimate_q, q_ratio_infimum,
    DecayMode, DecayReport, HolderReport, SmoothingReport,
};

use crate::error::{Error, Result};
use crate::funcs::{GridFunction, Interval, StepFunction};
use crate::scalar::Scalar;

/// Degeneracy ratio grid used when no closed-form constant is available.
const DEFAULT_CONSTANT_GRID: usize = 4097;

/// Parametric velocity law of a convex flux.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityForm<T> {
    /// Burgers: `f = u^2/2`, `a(u) = u`.
    Linear,
    /// Power flux `f = |u|^{1+alpha}/(1+alpha)`, `a(u) = sgn(u)|u|^alpha`.
    SignedPower { alpha: T },
    /// Tabulated strictly increasing velocity with declared degeneracy `p`.
    Table { nodes: Vec<T>, values: Vec<T> },
}

/// Smooth convex flux with velocity `a = f'`, its degeneracy data and the
/// constants entering the smoothing and decay estimates.
#[derive(Debug, Clone)]
pub struct ConvexFluxModel<T> {
    form: VelocityForm<T>,
    k_lo: T,
    k_hi: T,
    /// Degeneracy exponent: smallest p with `inf |a(u)-a(v)|/|u-v|^p > 0` on K.
    p: T,
    /// The infimum above (positive).
    c_deg: T,
    /// Decay exponent q of the inverse-velocity lower bound.
    q_exp: T,
    /// Velocity range endpoints a(k_lo), a(k_hi).
    a_lo: T,
    a_hi: T,
    /// Tabulated h on [a_lo, a_hi] for the Table form (values and exact slopes b).
    h_table: Option<HermiteTable<T>>,
}

impl<T: Scalar> ConvexFluxModel<T> {
    /// Burgers flux on `[-m, m]`: p = 1, C = 1, q = 1.
    pub fn burgers(m: T) -> Result<Self> {
        Self::with_form(VelocityForm::Linear, Interval::new(-m, m)?)
    }

    /// Power flux `f = |u|^{1+alpha}/(1+alpha)` on `[-m, m]`.
    pub fn power(alpha: T, m: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::validation("power flux needs alpha > 0"));
        }
        Self::with_form(VelocityForm::SignedPower { alpha }, Interval::new(-m, m)?)
    }

    /// Tabulated velocity on the node hull with declared degeneracy exponent.
    pub fn table(nodes: Vec<T>, values: Vec<T>, p: T) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::validation("velocity table needs matching nodes/values"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation("velocity nodes must be strictly increasing"));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation(
                "velocity values must be strictly increasing (monotone a)",
            ));
        }
        let range = Interval::new(nodes[0], *nodes.last().unwrap())?;
        let mut model = Self::with_form(VelocityForm::Table { nodes, values }, range)?;
        model.p = p;
        model.c_deg = model.numeric_degeneracy(p)?;
        model.q_exp = model.numeric_q();
        model.h_table = Some(model.build_h_table()?);
        Ok(model)
    }

    fn with_form(form: VelocityForm<T>, k_range: Interval<T>) -> Result<Self> {
        if !k_range.is_bounded() {
            return Err(Error::validation("state range K must be bounded"));
        }
        let (k_lo, k_hi) = (k_range.lo(), k_range.hi());
        let mut model = ConvexFluxModel {
            form,
            k_lo,
            k_hi,
            p: T::one(),
            c_deg: T::one(),
            q_exp: T::one(),
            a_lo: T::zero(),
            a_hi: T::zero(),
            h_table: None,
        };
        model.a_lo = model.velocity_raw(k_lo);
        model.a_hi = model.velocity_raw(k_hi);
        match model.form.clone() {
            VelocityForm::Linear => {
                model.p = T::one();
                model.c_deg = T::one();
                model.q_exp = T::one();
            }
            VelocityForm::SignedPower { alpha } => {
                model.p = alpha.max(T::one());
                model.c_deg = if alpha >= T::one() {
                    if k_lo < T::zero() && k_hi > T::zero() {
                        // symmetric-pair infimum across the degeneracy point
                        T::of(2.0).powf(T::one() - alpha)
                    } else {
                        // one-sided branch: the ratio infimum is 1
                        T::one()
                    }
                } else {
                    model.numeric_degeneracy(model.p)?
                };
                model.q_exp = T::one() / alpha;
            }
            VelocityForm::Table { .. } => unreachable!("table handled in table()"),
        }
        Ok(model)
    }

    fn numeric_degeneracy(&self, p: T) -> Result<T> {
        let k = Interval::new(self.k_lo, self.k_hi)?;
        Ok(analysis::estimate_degeneracy(
            |u| self.velocity_raw(u),
            k,
            p,
            DEFAULT_CONSTANT_GRID,
        )?)
    }

    fn numeric_q(&self) -> T {
        analysis::estimate_q(self, DEFAULT_CONSTANT_GRID).unwrap_or_else(|_| T::one())
    }

    pub fn k_range(&self) -> Interval<T> {
        Interval::new(self.k_lo, self.k_hi).unwrap()
    }

    pub fn degeneracy_exponent(&self) -> T {
        self.p
    }

    /// The smoothing exponent s = 1/p.
    pub fn smoothing_s(&self) -> T {
        T::one() / self.p
    }

    pub fn degeneracy_constant(&self) -> T {
        self.c_deg
    }

    /// D = 1/C, the constant in the smoothing bounds.
    pub fn d_const(&self) -> T {
        T::one() / self.c_deg
    }

    pub fn q_exponent(&self) -> T {
        self.q_exp
    }

    /// c = a(0), the velocity of the zero state.
    pub fn c_zero(&self) -> T {
        self.velocity(T::zero())
    }

    /// `sup_K |a|`, attained at an endpoint since a is monotone.
    pub fn sup_velocity(&self) -> T {
        self.a_lo.abs().max(self.a_hi.abs())
    }

    /// Velocity range `a(K)` as an interval.
    pub fn velocity_range(&self) -> (T, T) {
        (self.a_lo, self.a_hi)
    }

    fn velocity_raw(&self, u: T) -> T {
        match &self.form {
            VelocityForm::Linear => u,
            VelocityForm::SignedPower { alpha } => u.signum() * u.abs().powf(*alpha),
            VelocityForm::Table { nodes, values } => {
                let i = nodes.partition_point(|x| *x < u).clamp(1, nodes.len() - 1);
                let (u0, u1) = (nodes[i - 1], nodes[i]);
                let (a0, a1) = (values[i - 1], values[i]);
                a0 + (a1 - a0) * (u - u0) / (u1 - u0)
            }
        }
    }

    /// a(u), extended outside K by the translated power continuation
    /// `a(k_hi + d) = a(k_hi) + C d^p` (and symmetrically at k_lo), which keeps
    /// the degeneracy constant and makes the inverse globally defined.
    pub fn velocity(&self, u: T) -> T {
        if u > self.k_hi {
            self.a_hi + self.c_deg * (u - self.k_hi).powf(self.p)
        } else if u < self.k_lo {
            self.a_lo - self.c_deg * (self.k_lo - u).powf(self.p)
        } else {
            self.velocity_raw(u)
        }
    }

    /// Flux value f(u), normalized so that f(0) = 0 when 0 is in range.
    pub fn flux(&self, u: T) -> T {
        match &self.form {
            VelocityForm::Linear => u * u / T::of(2.0),
            VelocityForm::SignedPower { alpha } => {
                let e = T::one() + *alpha;
                u.abs().powf(e) / e
            }
            VelocityForm::Table { nodes, values } => {
                // exact primitive of the piecewise-linear velocity
                let anchor = if nodes[0] <= T::zero() && *nodes.last().unwrap() >= T::zero() {
                    T::zero()
                } else {
                    nodes[0]
                };
                let (lo, hi) = if u < anchor { (u, anchor) } else { (anchor, u) };
                let mut acc = T::zero();
                let mut left = lo;
                for (i, &n) in nodes.iter().enumerate() {
                    if n <= lo {
                        continue;
                    }
                    if n >= hi {
                        break;
                    }
                    acc = acc + self.segment_flux(left, n);
                    left = n;
                    let _ = (i, values);
                }
                acc = acc + self.segment_flux(left, hi);
                if u < anchor {
                    -acc
                } else {
                    acc
                }
            }
        }
    }

    /// Trapezoid on one affine piece of a (exact there).
    fn segment_flux(&self, lo: T, hi: T) -> T {
        (self.velocity_raw(lo) + self.velocity_raw(hi)) / T::of(2.0) * (hi - lo)
    }

    /// b(xi): inverse of the extended velocity, nondecreasing on all of R,
    /// with `|a(b(xi)) - xi| <= 1e-12 (1 + |xi|)`.
    pub fn inverse_velocity(&self, xi: T) -> T {
        if xi > self.a_hi {
            return self.k_hi + ((xi - self.a_hi) / self.c_deg).powf(T::one() / self.p);
        }
        if xi < self.a_lo {
            return self.k_lo - ((self.a_lo - xi) / self.c_deg).powf(T::one() / self.p);
        }
        match &self.form {
            VelocityForm::Linear => xi,
            VelocityForm::SignedPower { alpha } => xi.signum() * xi.abs().powf(T::one() / *alpha),
            VelocityForm::Table { .. } => self.bisect_inverse(xi),
        }
    }

    fn bisect_inverse(&self, xi: T) -> T {
        let tol = T::of(1e-15) * (T::one() + xi.abs());
        let mut lo = self.k_lo;
        let mut hi = self.k_hi;
        for _ in 0..200 {
            let mid = (lo + hi) / T::of(2.0);
            let err = self.velocity_raw(mid) - xi;
            if err.abs() <= tol || hi - lo <= T::of(1e-16) * (T::one() + mid.abs()) {
                return mid;
            }
            if err > T::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / T::of(2.0)
    }

    /// h(z) = integral of b from c = a(0) to z; convex, nonnegative, h(c) = 0.
    pub fn h(&self, z: T) -> T {
        let c = self.c_zero();
        if z > self.a_hi {
            let d = z - self.a_hi;
            let inv_p = T::one() / self.p;
            return self.h_inside(self.a_hi)
                + self.k_hi * d
                + (T::one() / self.c_deg).powf(inv_p) * d.powf(T::one() + inv_p)
                    / (T::one() + inv_p);
        }
        if z < self.a_lo {
            let d = self.a_lo - z;
            let inv_p = T::one() / self.p;
            return self.h_inside(self.a_lo) - self.k_lo * d
                + (T::one() / self.c_deg).powf(inv_p) * d.powf(T::one() + inv_p)
                    / (T::one() + inv_p);
        }
        let _ = c;
        self.h_inside(z)
    }

    fn h_inside(&self, z: T) -> T {
        match &self.form {
            VelocityForm::Linear => z * z / T::of(2.0),
            VelocityForm::SignedPower { alpha } => {
                let e = T::one() + T::one() / *alpha;
                z.abs().powf(e) / e
            }
            VelocityForm::Table { .. } => self
                .h_table
                .as_ref()
                .expect("table model carries an h table")
                .eval(z),
        }
    }

    /// Tabulate h on [a_lo, a_hi] by adaptive Simpson on b (1e-10 target) and
    /// evaluate by cubic Hermite with the exact slopes h' = b.
    fn build_h_table(&self) -> Result<HermiteTable<T>> {
        let n = 1024usize;
        let lo = self.a_lo;
        let hi = self.a_hi;
        let step = (hi - lo) / T::from_usize(n).unwrap();
        let mut xs = Vec::with_capacity(n + 1);
        let mut vals = Vec::with_capacity(n + 1);
        let mut slopes = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        for i in 0..=n {
            let x = if i == n {
                hi
            } else {
                lo + step * T::from_usize(i).unwrap()
            };
            if i > 0 {
                let prev = xs[i - 1];
                acc = acc
                    + adaptive_simpson(
                        &|v| self.inverse_velocity(v),
                        prev,
                        x,
                        T::of(1e-10) / T::from_usize(n).unwrap(),
                        24,
                    );
            }
            xs.push(x);
            vals.push(acc);
            slopes.push(self.inverse_velocity(x));
        }
        // anchor h(a(0)) = 0
        let c = self.velocity(T::zero());
        let table = HermiteTable {
            lo,
            step,
            vals,
            slopes,
            offset: T::zero(),
        };
        let at_c = table.eval(c);
        Ok(HermiteTable {
            offset: at_c,
            ..table
        })
    }
}

/// Uniform cubic Hermite table with exact derivative data.
#[derive(Debug, Clone)]
struct HermiteTable<T> {
    lo: T,
    step: T,
    vals: Vec<T>,
    slopes: Vec<T>,
    offset: T,
}

impl<T: Scalar> HermiteTable<T> {
    fn eval(&self, x: T) -> T {
        let n = self.vals.len() - 1;
        let t = ((x - self.lo) / self.step)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(n - 1);
        let x0 = self.lo + self.step * T::from_usize(t).unwrap();
        let u = (x - x0) / self.step;
        let (v0, v1) = (self.vals[t], self.vals[t + 1]);
        let (m0, m1) = (self.slopes[t] * self.step, self.slopes[t + 1] * self.step);
        let u2 = u * u;
        let u3 = u2 * u;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let h00 = two * u3 - three * u2 + T::one();
        let h10 = u3 - two * u2 + u;
        let h01 = -two * u3 + three * u2;
        let h11 = u3 - u2;
        h00 * v0 + h10 * m0 + h01 * v1 + h11 * m1 - self.offset
    }
}

fn adaptive_simpson<T: Scalar>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T, depth: usize) -> T {
    fn simpson<T: Scalar>(f: &dyn Fn(T) -> T, a: T, b: T) -> T {
        let mid = (a + b) / T::of(2.0);
        (f(a) + T::of(4.0) * f(mid) + f(b)) * (b - a) / T::of(6.0)
    }
    fn recurse<T: Scalar>(
        f: &dyn Fn(T) -> T,
        a: T,
        b: T,
        whole: T,
        tol: T,
        depth: usize,
    ) -> T {
        let mid = (a + b) / T::of(2.0);
        let left = simpson(f, a, mid);
        let right = simpson(f, mid, b);
        let err = left + right - whole;
        if depth == 0 || err.abs() <= T::of(15.0) * tol {
            return left + right + err / T::of(15.0);
        }
        recurse(f, a, mid, left, tol / T::of(2.0), depth - 1)
            + recurse(f, mid, b, right, tol / T::of(2.0), depth - 1)
    }
    let whole = simpson(f, a, b);
    recurse(f, a, b, whole, tol, depth)
}

/// Periodic step pattern: cell boundaries `0 = b_0 < ... < b_m = period` with
/// one value per cell, repeated over the whole line.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPattern<T> {
    boundaries: Vec<T>,
    vals: Vec<T>,
    period: T,
    mean: T,
    /// primitive of the pattern at each boundary (cumulative from 0)
    cumint: Vec<T>,
}

impl<T: Scalar> PeriodicPattern<T> {
    pub fn new(boundaries: Vec<T>, vals: Vec<T>) -> Result<Self> {
        if boundaries.len() < 2 || vals.len() + 1 != boundaries.len() {
            return Err(Error::validation(
                "pattern needs m+1 boundaries for m cell values",
            ));
        }
        if boundaries[0] != T::zero() {
            return Err(Error::validation("pattern boundaries must start at 0"));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation("pattern boundaries must increase"));
        }
        let period = *boundaries.last().unwrap();
        let mut cumint = Vec::with_capacity(boundaries.len());
        let mut acc = T::zero();
        cumint.push(acc);
        for (j, w) in boundaries.windows(2).enumerate() {
            acc = acc + vals[j] * (w[1] - w[0]);
            cumint.push(acc);
        }
        let mean = acc / period;
        Ok(PeriodicPattern {
            boundaries,
            vals,
            period,
            mean,
            cumint,
        })
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn values(&self) -> &[T] {
        &self.vals
    }

    /// Split y into (period index k, representative r in ]0, period]).
    fn reduce(&self, y: T) -> (T, T) {
        let k = (y / self.period).ceil() - T::one();
        let r = y - k * self.period;
        (k, r)
    }

    pub fn eval(&self, y: T) -> T {
        let (_, r) = self.reduce(y);
        let j = self
            .boundaries
            .partition_point(|b| *b < r)
            .clamp(1, self.vals.len());
        self.vals[j - 1]
    }

    /// Exact primitive: U0(y) = k * mean * period + cum(r).
    pub fn primitive(&self, y: T) -> T {
        let (k, r) = self.reduce(y);
        let j = self
            .boundaries
            .partition_point(|b| *b < r)
            .clamp(1, self.vals.len());
        let cum = self.cumint[j - 1] + self.vals[j - 1] * (r - self.boundaries[j - 1]);
        k * self.mean * self.period + cum
    }

    /// sup over one period of |U0(y) - mean * y| (periodic part of the primitive).
    pub fn sup_periodic_part(&self) -> T {
        self.boundaries
            .iter()
            .zip(self.cumint.iter())
            .map(|(&b, &c)| (c - self.mean * b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Initial data accepted by the solver.
#[derive(Debug, Clone)]
pub enum InitialData<T> {
    Step(StepFunction<T>),
    Grid(GridFunction<T>),
    Periodic(PeriodicPattern<T>),
}

impl<T: Scalar> InitialData<T> {
    fn value_bounds(&self) -> (T, T) {
        match self {
            InitialData::Step(u) => (u.min_value(), u.max_value()),
            InitialData::Grid(g) => (
                g.samples().iter().copied().fold(T::infinity(), T::min),
                g.samples().iter().copied().fold(T::neg_infinity(), T::max),
            ),
            InitialData::Periodic(p) => (
                p.vals.iter().copied().fold(T::infinity(), T::min),
                p.vals.iter().copied().fold(T::neg_infinity(), T::max),
            ),
        }
    }
}

/// Piecewise-affine primitive of step-like data anchored at U0(anchor) = 0.
#[derive(Debug, Clone)]
struct StepPrimitive<T> {
    cuts: Vec<T>,
    u_at: Vec<T>,
    left_slope: T,
    right_slope: T,
}

impl<T: Scalar> StepPrimitive<T> {
    fn build(u: &StepFunction<T>) -> Self {
        let cuts = u.breakpoints().to_vec();
        let vals = u.values();
        let mut u_at = Vec::with_capacity(cuts.len());
        if cuts.is_empty() {
            return StepPrimitive {
                cuts,
                u_at,
                left_slope: vals[0],
                right_slope: vals[0],
            };
        }
        let mut acc = T::zero();
        u_at.push(acc);
        for i in 1..cuts.len() {
            acc = acc + vals[i] * (cuts[i] - cuts[i - 1]);
            u_at.push(acc);
        }
        StepPrimitive {
            cuts,
            u_at,
            left_slope: vals[0],
            right_slope: *vals.last().unwrap(),
        }
    }

    fn eval(&self, y: T) -> T {
        if self.cuts.is_empty() {
            return self.left_slope * y;
        }
        if y <= self.cuts[0] {
            return self.left_slope * (y - self.cuts[0]);
        }
        let n = self.cuts.len();
        if y >= self.cuts[n - 1] {
            return self.u_at[n - 1] + self.right_slope * (y - self.cuts[n - 1]);
        }
        let i = self.cuts.partition_point(|c| *c < y);
        // y lies in ]cuts[i-1], cuts[i]]; the slope there is the cell value,
        // recovered from the stored node values
        let slope = (self.u_at[i] - self.u_at[i - 1]) / (self.cuts[i] - self.cuts[i - 1]);
        self.u_at[i - 1] + slope * (y - self.cuts[i - 1])
    }
}

/// One evaluated space-time point of the variational solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint<T> {
    /// Leftmost global minimizer of G(t, x, .).
    pub y: T,
    /// Velocity argument z = (x - y)/t.
    pub z: T,
    /// Solution value u = b(z).
    pub u: T,
    /// Identity of the winning candidate (used by the exact integrator).
    pub winner: Winner,
}

/// Which candidate attains the Hopf minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    /// Stationary point inside data cell `i` (solution plateau `v_i`).
    Cell(usize),
    /// Data breakpoint `i` (centered rarefaction fan).
    Cut(usize),
    /// Search-window endpoint (should only appear at the paper window edge).
    WindowEnd,
}

/// Lax-Oleinik evaluator bundling a flux model with initial data.
#[derive(Debug, Clone)]
pub struct LaxOleinikSolver<T> {
    model: ConvexFluxModel<T>,
    data: InitialData<T>,
    primitive: Option<StepPrimitive<T>>,
    /// For grid data: the step view whose cells drive candidate enumeration.
    step_view: Option<StepFunction<T>>,
    sup_a: T,
}

impl<T: Scalar> LaxOleinikSolver<T> {
    pub fn new(model: ConvexFluxModel<T>, data: InitialData<T>) -> Result<Self> {
        let (lo, hi) = data.value_bounds();
        if lo < model.k_lo || hi > model.k_hi {
            return Err(Error::validation(format!(
                "initial data range [{lo}, {hi}] exceeds the model range [{}, {}]",
                model.k_lo, model.k_hi
            )));
        }
        let sup_a = model.sup_velocity();
        let (primitive, step_view) = match &data {
            InitialData::Step(u) => (Some(StepPrimitive::build(u)), None),
            InitialData::Grid(g) => {
                // midpoint-cell step view; its exact primitive realizes the
                // trapezoid cumulative sums of the samples
                let mut cuts = Vec::with_capacity(g.len().saturating_sub(1));
                for i in 0..g.len().saturating_sub(1) {
                    cuts.push((g.x_at(i) + g.x_at(i + 1)) / T::of(2.0));
                }
                let view = StepFunction::new(cuts, g.samples().to_vec())?;
                (Some(StepPrimitive::build(&view)), Some(view))
            }
            InitialData::Periodic(_) => (None, None),
        };
        Ok(LaxOleinikSolver {
            model,
            data,
            primitive,
            step_view,
            sup_a,
        })
    }

    pub fn model(&self) -> &ConvexFluxModel<T> {
        &self.model
    }

    pub fn data(&self) -> &InitialData<T> {
        &self.data
    }

    pub fn sup_velocity(&self) -> T {
        self.sup_a
    }

    /// U_0(y), the primitive of the initial data.
    pub fn data_primitive(&self, y: T) -> T {
        match &self.data {
            InitialData::Periodic(p) => p.primitive(y),
            _ => self.primitive.as_ref().unwrap().eval(y),
        }
    }

    /// The Hopf functional G(t, x, y).
    pub fn hopf_g(&self, t: T, x: T, y: T) -> T {
        self.data_primitive(y) + t * self.model.h((x - y) / t)
    }

    fn step_cells(&self) -> (&[T], &[T]) {
        match (&self.data, &self.step_view) {
            (InitialData::Step(u), _) => (u.breakpoints(), u.values()),
            (InitialData::Grid(_), Some(v)) => (v.breakpoints(), v.values()),
            _ => unreachable!("periodic data uses its own candidate walk"),
        }
    }

    /// Minimizer search window. For compactly supported or step data this is
    /// the localization window `|x - y| <= t sup|a|`; for periodic data it is
    /// intersected with the sublevel window of the tilted h plus one period of
    /// slack, which keeps its length sublinear in t.
    fn search_window(&self, t: T, x: T) -> (T, T) {
        let lo = x - t * self.sup_a;
        let hi = x + t * self.sup_a;
        match &self.data {
            InitialData::Periodic(p) => {
                let (z_lo, z_hi) = self.periodic_z_window(t, p);
                let w_lo = (x - t * z_hi - p.period()).max(lo);
                let w_hi = (x - t * z_lo + p.period()).min(hi);
                (w_lo, w_hi)
            }
            _ => (lo, hi),
        }
    }

    /// Sublevel set {z : h(z) - m z <= level} of the tilted h around a(mean).
    fn periodic_z_window(&self, t: T, p: &PeriodicPattern<T>) -> (T, T) {
        let m = p.mean();
        let tilted = |z: T| self.model.h(z) - m * z;
        let z_star = self.model.velocity(m);
        let level = tilted(z_star) + T::of(2.0) * p.sup_periodic_part() / t;
        let mut lo = -self.sup_a;
        let mut hi = self.sup_a;
        if tilted(hi) > level {
            let (mut a, mut b) = (z_star, hi);
            for _ in 0..100 {
                let mid = (a + b) / T::of(2.0);
                if tilted(mid) > level {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            hi = b;
        }
        if tilted(lo) > level {
            let (mut a, mut b) = (lo, z_star);
            for _ in 0..100 {
                let mid = (a + b) / T::of(2.0);
                if tilted(mid) > level {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            lo = a;
        }
        (lo, hi)
    }

    /// Candidate minimizers within [w_lo, w_hi]: window ends, data breakpoints,
    /// and per-cell stationary points `y = x - t a(v)` clamped to their cells.
    fn candidates(&self, t: T, x: T, w_lo: T, w_hi: T, out: &mut Vec<(T, Winner)>) {
        out.clear();
        out.push((w_lo, Winner::WindowEnd));
        out.push((w_hi, Winner::WindowEnd));
        match &self.data {
            InitialData::Periodic(p) => {
                let period = p.period();
                let k_lo = (w_lo / period).floor().to_i64().unwrap();
                let k_hi = (w_hi / period).ceil().to_i64().unwrap();
                let m = p.vals.len();
                for k in k_lo..=k_hi {
                    let base = period * T::from_i64(k).unwrap();
                    for j in 0..m {
                        let cell_lo = base + p.boundaries[j];
                        let cell_hi = base + p.boundaries[j + 1];
                        if cell_hi < w_lo || cell_lo > w_hi {
                            continue;
                        }
                        if cell_lo >= w_lo {
                            out.push((cell_lo, Winner::Cut((k - k_lo) as usize * m + j)));
                        }
                        let v = p.vals[j];
                        let y = (x - t * self.model.velocity(v))
                            .max(cell_lo.max(w_lo))
                            .min(cell_hi.min(w_hi));
                        out.push((y, Winner::Cell((k - k_lo) as usize * m + j)));
                    }
                }
            }
            _ => {
                let (cuts, vals) = self.step_cells();
                for (i, &c) in cuts.iter().enumerate() {
                    if c >= w_lo && c <= w_hi {
                        out.push((c, Winner::Cut(i)));
                    }
                }
                for (i, &v) in vals.iter().enumerate() {
                    let cell_lo = if i == 0 { w_lo } else { cuts[i - 1].max(w_lo) };
                    let cell_hi = if i == vals.len() - 1 {
                        w_hi
                    } else {
                        cuts[i].min(w_hi)
                    };
                    if cell_lo > cell_hi {
                        continue;
                    }
                    let y = (x - t * self.model.velocity(v)).max(cell_lo).min(cell_hi);
                    out.push((y, Winner::Cell(i)));
                }
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }

    /// Solve the Hopf minimization at one point with an optional extra window
    /// restriction (used by the monotone divide-and-conquer evaluation).
    fn solve_point_windowed(&self, t: T, x: T, clamp: Option<(T, T)>) -> HopfPoint<T> {
        let (mut w_lo, mut w_hi) = self.search_window(t, x);
        if let Some((lo, hi)) = clamp {
            w_lo = w_lo.max(lo);
            w_hi = w_hi.min(hi);
            if w_lo > w_hi {
                w_lo = hi;
                w_hi = hi;
            }
        }
        let mut cands = Vec::new();
        self.candidates(t, x, w_lo, w_hi, &mut cands);
        let mut best = T::infinity();
        let mut best_y = w_lo;
        let mut best_winner = Winner::WindowEnd;
        for &(y, winner) in &cands {
            let g = self.hopf_g(t, x, y);
            // strict comparison keeps the leftmost minimizer (candidates sorted)
            if g < best {
                best = g;
                best_y = y;
                best_winner = winner;
            }
        }
        let z = (x - best_y) / t;
        HopfPoint {
            y: best_y,
            z,
            u: self.model.inverse_velocity(z),
            winner: best_winner,
        }
    }

    /// Leftmost global minimizer y(t, x) of G over the localization window.
    pub fn minimize_hopf(&self, t: T, x: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::validation("minimization requires t > 0"));
        }
        Ok(self.solve_point_windowed(t, x, None).y)
    }

    /// Solution value u(t, x).
    pub fn solve_at(&self, t: T, x: T) -> Result<HopfPoint<T>> {
        if !(t > T::zero()) {
            return Err(Error::validation("evaluation requires t > 0"));
        }
        Ok(self.solve_point_windowed(t, x, None))
    }

    /// Evaluate on a uniform grid over `window`. The minimizer map y(t, .) is
    /// nondecreasing, so a divide-and-conquer pass restricts each search window
    /// to the bracket set by the already-solved neighbors (O(n log n) work).
    pub fn evaluate(&self, t: T, window: Interval<T>, n: usize) -> Result<GridFunction<T>> {
        let pts = self.evaluate_points(t, window, n)?;
        let dx = window.length() / T::from_usize(n - 1).unwrap();
        GridFunction::new(window.lo(), dx, pts.into_iter().map(|p| p.u).collect())
    }

    /// Like [`evaluate`](Self::evaluate) but returning the full Hopf data.
    pub fn evaluate_points(
        &self,
        t: T,
        window: Interval<T>,
        n: usize,
    ) -> Result<Vec<HopfPoint<T>>> {
        if !(t > T::zero()) {
            return Err(Error::validation("evaluation requires t > 0"));
        }
        if n < 2 || !window.is_bounded() {
            return Err(Error::validation("need a bounded window and n >= 2"));
        }
        let dx = window.length() / T::from_usize(n - 1).unwrap();
        let xs: Vec<T> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    window.hi()
                } else {
                    window.lo() + dx * T::from_usize(i).unwrap()
                }
            })
            .collect();
        let mut out: Vec<Option<HopfPoint<T>>> = vec![None; n];
        out[0] = Some(self.solve_point_windowed(t, xs[0], None));
        out[n - 1] = Some(self.solve_point_windowed(t, xs[n - 1], None));
        let mut stack = vec![(0usize, n - 1)];
        while let Some((lo, hi)) = stack.pop() {
            if hi - lo < 2 {
                continue;
            }
            let mid = (lo + hi) / 2;
            let y_lo = out[lo].as_ref().unwrap().y;
            let y_hi = out[hi].as_ref().unwrap().y;
            out[mid] = Some(self.solve_point_windowed(t, xs[mid], Some((y_lo, y_hi))));
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
        Ok(out.into_iter().map(|p| p.unwrap()).collect())
    }

    /// Exact integral of u(t, .) over [x1, x2]: winner segments are located by
    /// bisection, plateaus integrate as widths times values and rarefaction
    /// arcs via h (the primitive of b).
    pub fn integrate_solution(&self, t: T, x1: T, x2: T) -> Result<T> {
        if !(t > T::zero()) || !(x2 > x1) {
            return Err(Error::validation("integration needs t > 0 and x2 > x1"));
        }
        let base = 8192usize;
        let dx = (x2 - x1) / T::from_usize(base).unwrap();
        let mut acc = T::zero();
        let mut seg_start = x1;
        let mut seg_point = self.solve_point_windowed(t, x1, None);
        for i in 1..=base {
            let x = if i == base {
                x2
            } else {
                x1 + dx * T::from_usize(i).unwrap()
            };
            let here = self.solve_point_windowed(t, x, None);
            if here.winner != seg_point.winner || i == base {
                let boundary = if here.winner != seg_point.winner {
                    // bisect the winner switch
                    let (mut a, mut b) = (x - dx, x);
                    for _ in 0..60 {
                        let mid = (a + b) / T::of(2.0);
                        let w = self.solve_point_windowed(t, mid, None).winner;
                        if w == seg_point.winner {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    (a + b) / T::of(2.0)
                } else {
                    x
                };
                acc = acc + self.segment_integral(t, seg_start, boundary, &seg_point);
                if here.winner != seg_point.winner && i == base && boundary < x2 {
                    acc = acc + self.segment_integral(t, boundary, x2, &here);
                }
                seg_start = boundary;
                seg_point = here;
            }
        }
        Ok(acc)
    }

    fn segment_integral(&self, t: T, x1: T, x2: T, rep: &HopfPoint<T>) -> T {
        if x2 <= x1 {
            return T::zero();
        }
        match rep.winner {
            Winner::Cell(_) => rep.u * (x2 - x1),
            Winner::Cut(_) | Winner::WindowEnd => {
                // u(x) = b((x - y0)/t) with the fan center y0 fixed on the segment
                let y0 = rep.y;
                let z1 = (x1 - y0) / t;
                let z2 = (x2 - y0) / t;
                t * (self.model.h(z2) - self.model.h(z1))
            }
        }
    }
}
