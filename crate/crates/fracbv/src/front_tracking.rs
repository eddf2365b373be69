//! Wave-front tracking for `u_t + f(u)_x = 0` with piecewise-affine flux and
//! step initial data.
//!
//! Solutions are exactly piecewise constant: discontinuities ("fronts") move
//! at Rankine-Hugoniot speeds, and when fronts collide the Riemann problem of
//! the outermost states is re-solved via the convex (or concave) envelope of
//! the flux. Every state produced lives in the finite set of initial values
//! and flux nodes, which is what makes the event loop terminate.

use crate::error::{Error, Result};
use crate::funcs::{Interval, StepFunction, BREAKPOINT_EPS};
use crate::scalar::Scalar;
use crate::variation::{tvs_step_exact, SExponent};

/// Fronts with jump smaller than this are dropped on creation.
const MIN_FRONT_STRENGTH: f64 = 1e-14;

/// Hard cap on processed interactions before [`Error::EventStorm`].
const MAX_INTERACTIONS: usize = 1_000_000;

/// Continuous piecewise-affine flux interpolating `(u_nodes[k], f_values[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffineFlux<T> {
    u_nodes: Vec<T>,
    f_values: Vec<T>,
}

impl<T: Scalar> PiecewiseAffineFlux<T> {
    pub fn new(u_nodes: Vec<T>, f_values: Vec<T>) -> Result<Self> {
        if u_nodes.len() < 2 {
            return Err(Error::validation("flux needs at least 2 nodes"));
        }
        if u_nodes.len() != f_values.len() {
            return Err(Error::validation("flux node/value length mismatch"));
        }
        if u_nodes.iter().chain(f_values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::validation("flux nodes and values must be finite"));
        }
        if u_nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation("flux nodes must be strictly increasing"));
        }
        Ok(PiecewiseAffineFlux { u_nodes, f_values })
    }

    pub fn u_nodes(&self) -> &[T] {
        &self.u_nodes
    }

    pub fn f_values(&self) -> &[T] {
        &self.f_values
    }

    pub fn range(&self) -> (T, T) {
        (self.u_nodes[0], *self.u_nodes.last().unwrap())
    }

    fn check_in_range(&self, u: T) -> Result<()> {
        let (lo, hi) = self.range();
        // states outside the node range are a hard error, not an extrapolation
        if u < lo || u > hi || !u.is_finite() {
            return Err(Error::validation(format!(
                "state {u} outside flux range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Piecewise-linear interpolation; errors on out-of-range states.
    pub fn eval(&self, u: T) -> Result<T> {
        self.check_in_range(u)?;
        let i = self
            .u_nodes
            .partition_point(|x| *x < u)
            .clamp(1, self.u_nodes.len() - 1);
        let (u0, u1) = (self.u_nodes[i - 1], self.u_nodes[i]);
        let (f0, f1) = (self.f_values[i - 1], self.f_values[i]);
        Ok(f0 + (f1 - f0) * (u - u0) / (u1 - u0))
    }

    /// Chord slope `(f(b) - f(a)) / (b - a)` — the Rankine-Hugoniot speed.
    pub fn chord_speed(&self, a: T, b: T) -> Result<T> {
        Ok((self.eval(b)? - self.eval(a)?) / (b - a))
    }
}

/// Uniform interpolation of a flux closure on `K+1` nodes over `range`.
pub fn polygonalize_flux<T: Scalar, F: Fn(T) -> T>(
    f: F,
    range: Interval<T>,
    k: usize,
) -> Result<PiecewiseAffineFlux<T>> {
    if !range.is_bounded() {
        return Err(Error::validation("polygonalization range must be bounded"));
    }
    if k < 1 {
        return Err(Error::validation("need at least K = 1 affine pieces"));
    }
    let (lo, hi) = (range.lo(), range.hi());
    let step = (hi - lo) / T::from_usize(k).unwrap();
    let nodes: Vec<T> = (0..=k)
        .map(|i| {
            if i == k {
                hi
            } else {
                lo + step * T::from_usize(i).unwrap()
            }
        })
        .collect();
    let values: Vec<T> = nodes.iter().map(|&u| f(u)).collect();
    PiecewiseAffineFlux::new(nodes, values)
}

/// Lower convex envelope (`ul < ur`) or upper concave envelope (`ul > ur`) of
/// the flux graph between the two states. Vertices are returned in traversal
/// order from `ul` to `ur`.
pub fn convex_envelope<T: Scalar>(
    flux: &PiecewiseAffineFlux<T>,
    ul: T,
    ur: T,
) -> Result<Vec<(T, T)>> {
    if ul == ur {
        return Err(Error::validation("envelope requires distinct states"));
    }
    flux.check_in_range(ul)?;
    flux.check_in_range(ur)?;
    let (a, b) = if ul < ur { (ul, ur) } else { (ur, ul) };
    // candidate vertices: endpoints plus interior flux nodes
    let mut pts: Vec<(T, T)> = vec![(a, flux.eval(a)?)];
    for (i, &u) in flux.u_nodes().iter().enumerate() {
        if u > a && u < b {
            pts.push((u, flux.f_values()[i]));
        }
    }
    pts.push((b, flux.eval(b)?));
    let lower = ul < ur;
    // monotone-chain hull over points already sorted by u
    let mut hull: Vec<(T, T)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let q = hull[hull.len() - 1];
            let r = hull[hull.len() - 2];
            let cross = (q.0 - r.0) * (p.1 - r.1) - (q.1 - r.1) * (p.0 - r.0);
            let keep = if lower {
                cross > T::zero()
            } else {
                cross < T::zero()
            };
            if keep {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }
    if !lower {
        hull.reverse();
    }
    Ok(hull)
}

/// A moving discontinuity: position `x_ref` at time `t_ref` of its state,
/// Rankine-Hugoniot speed, and the two adjacent constant states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Front<T> {
    pub x_ref: T,
    pub speed: T,
    pub left_state: T,
    pub right_state: T,
}

impl<T: Scalar> Front<T> {
    pub fn position_at(&self, t_ref: T, t: T) -> T {
        self.x_ref + self.speed * (t - t_ref)
    }

    pub fn strength(&self) -> T {
        (self.right_state - self.left_state).abs()
    }
}

/// Solve the Riemann problem `(ul, ur)` at a point: the envelope chords become
/// fronts with monotone states and strictly increasing speeds. Empty iff
/// `ul == ur`. Positions are set by the caller.
pub fn solve_riemann<T: Scalar>(
    flux: &PiecewiseAffineFlux<T>,
    ul: T,
    ur: T,
) -> Result<Vec<Front<T>>> {
    if ul == ur {
        flux.check_in_range(ul)?;
        return Ok(Vec::new());
    }
    let mut verts = convex_envelope(flux, ul, ur)?;
    // drop vanishing chords (keep outermost states exact)
    let eps = T::of(MIN_FRONT_STRENGTH);
    let mut i = 1;
    while i + 1 < verts.len() {
        if (verts[i].0 - verts[i - 1].0).abs() < eps {
            verts.remove(i);
        } else {
            i += 1;
        }
    }
    if verts.len() >= 2 {
        let n = verts.len();
        if (verts[n - 1].0 - verts[n - 2].0).abs() < eps && n > 2 {
            verts.remove(n - 2);
        }
    }
    let fronts = verts
        .windows(2)
        .map(|w| {
            let (u0, f0) = w[0];
            let (u1, f1) = w[1];
            Front {
                x_ref: T::zero(),
                speed: (f1 - f0) / (u1 - u0),
                left_state: u0,
                right_state: u1,
            }
        })
        .collect();
    Ok(fronts)
}

/// Colliding cluster discovered by [`FrontTrackingState::next_interaction`].
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionEvent<T> {
    pub t_star: T,
    pub x_star: T,
    /// Contiguous indices of the fronts meeting at `(t_star, x_star)`.
    pub front_indices: std::ops::Range<usize>,
}

/// Per-interaction record used for TV^s certification and the events CSV.
#[derive(Debug, Clone)]
pub struct EventRecord<T> {
    pub t_star: T,
    pub x_star: T,
    pub fronts_before: usize,
    pub fronts_after: usize,
    /// `TV^s` of the profile just before/after the interaction, one entry per
    /// exponent in the requested grid.
    pub tvs_before: Vec<T>,
    pub tvs_after: Vec<T>,
}

/// Time-stamped ordered set of fronts with constant states between them.
#[derive(Debug, Clone)]
pub struct FrontTrackingState<T> {
    flux: PiecewiseAffineFlux<T>,
    t_ref: T,
    fronts: Vec<Front<T>>,
    /// State at x = -inf (kept explicitly so a front-free state stays well defined).
    far_left: T,
}

impl<T: Scalar> FrontTrackingState<T> {
    /// Initial state at t = 0 from step data: one Riemann fan per jump.
    pub fn from_step(flux: &PiecewiseAffineFlux<T>, u0: &StepFunction<T>) -> Result<Self> {
        let mut fronts = Vec::new();
        let vals = u0.values();
        for (i, &x) in u0.breakpoints().iter().enumerate() {
            let mut fan = solve_riemann(flux, vals[i], vals[i + 1])?;
            for f in &mut fan {
                f.x_ref = x;
            }
            fronts.extend(fan);
        }
        let state = FrontTrackingState {
            flux: flux.clone(),
            t_ref: T::zero(),
            fronts,
            far_left: vals[0],
        };
        state.debug_check();
        Ok(state)
    }

    pub fn t_ref(&self) -> T {
        self.t_ref
    }

    pub fn fronts(&self) -> &[Front<T>] {
        &self.fronts
    }

    pub fn flux(&self) -> &PiecewiseAffineFlux<T> {
        &self.flux
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            for w in self.fronts.windows(2) {
                debug_assert!(
                    w[0].right_state == w[1].left_state,
                    "adjacent fronts must share the intermediate state"
                );
                debug_assert!(w[0].x_ref <= w[1].x_ref, "front positions out of order");
            }
            if let Some(first) = self.fronts.first() {
                debug_assert!(first.left_state == self.far_left);
            }
        }
    }

    /// Earliest collision among adjacent fronts, or `None` when all speeds are
    /// ordered. Simultaneous clusters are returned leftmost first; later
    /// clusters reappear as zero-delay events after the re-solve.
    pub fn next_interaction(&self) -> Option<InteractionEvent<T>> {
        let eps = T::of(BREAKPOINT_EPS);
        let mut best_dt: Option<T> = None;
        let mut best_i = 0usize;
        for i in 0..self.fronts.len().saturating_sub(1) {
            let l = &self.fronts[i];
            let r = &self.fronts[i + 1];
            if l.speed <= r.speed {
                continue;
            }
            let dt = ((r.x_ref - l.x_ref) / (l.speed - r.speed)).max(T::zero());
            if best_dt.map_or(true, |b| dt < b - eps) {
                best_dt = Some(dt);
                best_i = i;
            }
        }
        let dt = best_dt?;
        let t_star = self.t_ref + dt;
        let x_star = self.fronts[best_i].position_at(self.t_ref, t_star);
        // widen to the full contiguous cluster arriving at x_star
        let mut lo = best_i;
        let mut hi = best_i + 1;
        while lo > 0 {
            let f = &self.fronts[lo - 1];
            if (f.position_at(self.t_ref, t_star) - x_star).abs() <= eps {
                lo -= 1;
            } else {
                break;
            }
        }
        while hi + 1 < self.fronts.len() {
            let f = &self.fronts[hi + 1];
            if (f.position_at(self.t_ref, t_star) - x_star).abs() <= eps {
                hi += 1;
            } else {
                break;
            }
        }
        Some(InteractionEvent {
            t_star,
            x_star,
            front_indices: lo..hi + 1,
        })
    }

    fn advance_positions(&mut self, t: T) {
        for f in &mut self.fronts {
            f.x_ref = f.position_at(self.t_ref, t);
        }
        self.t_ref = t;
    }

    /// Replace the colliding cluster by the Riemann solution of its outermost states.
    fn resolve_event(&mut self, ev: &InteractionEvent<T>) -> Result<()> {
        self.advance_positions(ev.t_star);
        let range = ev.front_indices.clone();
        let ul = self.fronts[range.start].left_state;
        let ur = self.fronts[range.end - 1].right_state;
        let mut fan = solve_riemann(&self.flux, ul, ur)?;
        for f in &mut fan {
            f.x_ref = ev.x_star;
        }
        self.fronts.splice(range, fan);
        self.debug_check();
        Ok(())
    }

    /// Advance to `t_target`, processing every interaction on the way.
    pub fn evolve(&mut self, t_target: T) -> Result<()> {
        self.evolve_logged(t_target, &[])?;
        Ok(())
    }

    /// Like [`evolve`](Self::evolve), recording a per-interaction TV^s log for
    /// the given exponents.
    pub fn evolve_logged(
        &mut self,
        t_target: T,
        s_grid: &[SExponent<T>],
    ) -> Result<Vec<EventRecord<T>>> {
        if t_target < self.t_ref {
            return Err(Error::validation(format!(
                "cannot evolve backwards: target {t_target} < t_ref {}",
                self.t_ref
            )));
        }
        let mut log = Vec::new();
        let mut count = 0usize;
        while let Some(ev) = self.next_interaction() {
            if ev.t_star > t_target {
                break;
            }
            count += 1;
            if count > MAX_INTERACTIONS {
                return Err(Error::EventStorm {
                    count,
                    t_reached: self.t_ref.to_f64_lossy(),
                });
            }
            let fronts_before = self.fronts.len();
            let tvs_before: Vec<T> = if s_grid.is_empty() {
                Vec::new()
            } else {
                let profile = self.profile_unrestricted(ev.t_star)?;
                s_grid
                    .iter()
                    .map(|&s| tvs_step_exact(&profile, s).tvs)
                    .collect()
            };
            self.resolve_event(&ev)?;
            let record_tvs_after: Vec<T> = if s_grid.is_empty() {
                Vec::new()
            } else {
                let profile = self.profile_unrestricted(ev.t_star)?;
                s_grid
                    .iter()
                    .map(|&s| tvs_step_exact(&profile, s).tvs)
                    .collect()
            };
            log.push(EventRecord {
                t_star: ev.t_star,
                x_star: ev.x_star,
                fronts_before,
                fronts_after: self.fronts.len(),
                tvs_before,
                tvs_after: record_tvs_after,
            });
        }
        self.advance_positions(t_target);
        Ok(log)
    }

    /// Piecewise-constant profile at time `t` (no window restriction).
    fn profile_unrestricted(&self, t: T) -> Result<StepFunction<T>> {
        let mut cuts: Vec<T> = Vec::with_capacity(self.fronts.len());
        let mut vals: Vec<T> = Vec::with_capacity(self.fronts.len() + 1);
        vals.push(self.far_left);
        for f in &self.fronts {
            let x = f.position_at(self.t_ref, t);
            // coincident fan origins produce zero-width cells; they are merged
            // by the step-function constructor
            cuts.push(match cuts.last() {
                Some(&prev) if x < prev => prev,
                _ => x,
            });
            vals.push(f.right_state);
        }
        StepFunction::new(cuts, vals)
    }

    /// Sample the exact solution at time `t`, restricted to `window`.
    ///
    /// `t` must lie in the past-free span `[t_ref, next interaction]`; call
    /// [`evolve`](Self::evolve) first for later times.
    pub fn sample_solution(&self, t: T, window: Interval<T>) -> Result<StepFunction<T>> {
        let eps = T::of(BREAKPOINT_EPS);
        if t < self.t_ref - eps {
            return Err(Error::validation(format!(
                "sample time {t} is in the past (t_ref = {})",
                self.t_ref
            )));
        }
        if let Some(ev) = self.next_interaction() {
            if t > ev.t_star + eps {
                return Err(Error::validation(format!(
                    "sample time {t} is past the next interaction at {}; evolve first",
                    ev.t_star
                )));
            }
        }
        Ok(self.profile_unrestricted(t)?.restrict(window))
    }
}
