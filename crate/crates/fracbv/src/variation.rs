//! Exact fractional total variation of step functions.
//!
//! `TV^s u` is the supremum over subdivisions of `sum |u(x_i) - u(x_{i-1})|^{1/s}`.
//! For a step function any subdivision induces a subsequence of the value
//! sequence (tails included), and conversely any subsequence is realized by
//! picking one sample point per chosen cell, so the supremum is a maximum over
//! value subsequences. That maximum is computed exactly by an O(n^2) dynamic
//! program; refinement heuristics are wrong here because inserting points can
//! strictly decrease the sum when s < 1.

use crate::error::{Error, Result};
use crate::funcs::{GridFunction, StepFunction};
use crate::scalar::Scalar;

/// Fractional-variation exponent `s` in (0, 1]; stores `p = 1/s` exactly and
/// derives `s`, which avoids round-tripping through the reciprocal twice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SExponent<T> {
    p: T,
}

impl<T: Scalar> SExponent<T> {
    pub fn from_s(s: T) -> Result<Self> {
        if !s.is_finite() || !(s > T::zero()) || s > T::one() {
            return Err(Error::validation(format!("s must lie in (0, 1], got {s}")));
        }
        Ok(SExponent { p: T::one() / s })
    }

    pub fn from_p(p: T) -> Result<Self> {
        if !p.is_finite() || !(p >= T::one()) {
            return Err(Error::validation(format!("p must be >= 1, got {p}")));
        }
        Ok(SExponent { p })
    }

    pub fn s(&self) -> T {
        T::one() / self.p
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// `|d|^{1/s}` with the zero increment short-circuited.
    pub fn pow_increment(&self, d: T) -> T {
        let a = d.abs();
        if a == T::zero() {
            T::zero()
        } else {
            a.powf(self.p)
        }
    }

    /// Positive-part increment `max(0, d)^{1/s}`.
    pub fn pow_increment_plus(&self, d: T) -> T {
        if d > T::zero() {
            d.powf(self.p)
        } else {
            T::zero()
        }
    }
}

/// Finite subdivision: at least two strictly increasing points.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdivision<T> {
    points: Vec<T>,
}

impl<T: Scalar> Subdivision<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::validation("subdivision needs at least 2 points"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("subdivision points must be finite"));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation(
                "subdivision points must be strictly increasing",
            ));
        }
        Ok(Subdivision { points })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Result of an exact (or certified lower-bound) variation computation.
#[derive(Debug, Clone)]
pub struct VariationReport<T> {
    /// The s-total variation value.
    pub tvs: T,
    /// A subdivision attaining `tvs` under [`tvs_on_subdivision`].
    pub witness: Subdivision<T>,
    /// `tvs^s`, the BV^s seminorm.
    pub seminorm: T,
}

/// `sum |u(x_i) - u(x_{i-1})|^{1/s}` over the subdivision points.
pub fn tvs_on_subdivision<T: Scalar>(
    u: &StepFunction<T>,
    sigma: &Subdivision<T>,
    s: SExponent<T>,
) -> T {
    let mut acc = T::zero();
    let mut prev = u.eval(sigma.points()[0]);
    for &x in &sigma.points()[1..] {
        let v = u.eval(x);
        acc = acc + s.pow_increment(v - prev);
        prev = v;
    }
    acc
}

/// Extremal points of `sigma` with respect to `u`: endpoints plus interior
/// points that are local extrema along the sigma-sequence.
pub fn extremal_points<T: Scalar>(u: &StepFunction<T>, sigma: &Subdivision<T>) -> Subdivision<T> {
    let pts = sigma.points();
    let n = pts.len();
    let mut kept = Vec::with_capacity(n);
    kept.push(pts[0]);
    for i in 1..n - 1 {
        let prev = u.eval(pts[i - 1]);
        let here = u.eval(pts[i]);
        let next = u.eval(pts[i + 1]);
        if here >= prev.max(next) || here <= prev.min(next) {
            kept.push(pts[i]);
        }
    }
    kept.push(pts[n - 1]);
    Subdivision::new(kept).expect("endpoints are strictly increasing")
}

/// Maximum of `sum w(v_i, v_j)^p` over subsequences of `values`, with parent
/// tracking for witness reconstruction. `positive_only` restricts to
/// positive-part increments.
fn dp_max_over_subsequences<T: Scalar>(
    values: &[T],
    s: SExponent<T>,
    positive_only: bool,
) -> (T, Vec<usize>) {
    let n = values.len();
    debug_assert!(n >= 1);
    let mut best: Vec<T> = vec![T::zero(); n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut global_best = T::zero();
    let mut global_end = 0usize;
    for i in 1..n {
        for j in 0..i {
            let inc = if positive_only {
                s.pow_increment_plus(values[i] - values[j])
            } else {
                s.pow_increment(values[i] - values[j])
            };
            let cand = best[j] + inc;
            // strict improvement keeps ties at the earliest predecessor
            if cand > best[i] {
                best[i] = cand;
                parent[i] = Some(j);
            }
        }
        if best[i] > global_best {
            global_best = best[i];
            global_end = i;
        }
    }
    let mut chain = vec![global_end];
    while let Some(j) = parent[*chain.last().unwrap()] {
        chain.push(j);
    }
    chain.reverse();
    (global_best, chain)
}

/// Map chosen cell indices of a step function to concrete sample points:
/// interior cells to midpoints, tail cells to one unit beyond the hull.
fn witness_points<T: Scalar>(u: &StepFunction<T>, chain: &[usize]) -> Subdivision<T> {
    let cuts = u.breakpoints();
    let n_cells = u.values().len();
    let sample = |cell: usize| -> T {
        if cuts.is_empty() {
            // constant function: synthesize points around the origin
            return if cell == 0 { -T::one() } else { T::one() };
        }
        if cell == 0 {
            cuts[0] - T::one()
        } else if cell == n_cells - 1 {
            cuts[cuts.len() - 1] + T::one()
        } else {
            (cuts[cell - 1] + cuts[cell]) / T::of(2.0)
        }
    };
    let mut pts: Vec<T> = chain.iter().map(|&c| sample(c)).collect();
    if pts.len() == 1 {
        // a single chosen cell carries value 0; pad to a legal subdivision
        let x = pts[0];
        pts = vec![x, x + T::one()];
    }
    Subdivision::new(pts).expect("cell midpoints are strictly increasing")
}

/// Exact s-total variation of a step function over the whole line, with an
/// attaining witness subdivision.
pub fn tvs_step_exact<T: Scalar>(u: &StepFunction<T>, s: SExponent<T>) -> VariationReport<T> {
    let (tvs, chain) = dp_max_over_subsequences(u.values(), s, false);
    let witness = witness_points(u, &chain);
    VariationReport {
        tvs,
        witness,
        seminorm: tvs.powf(s.s()),
    }
}

/// One-sided variant: only positive increments contribute. Zero for
/// nonincreasing data and equal to [`tvs_step_exact`] for nondecreasing data.
pub fn tvs_plus_step<T: Scalar>(u: &StepFunction<T>, s: SExponent<T>) -> T {
    dp_max_over_subsequences(u.values(), s, true).0
}

/// DP over grid samples. The samples form a subdivision of any function
/// interpolating them, so the value is a certified lower bound for the true
/// s-total variation of the underlying function.
pub fn tvs_grid_lower_bound<T: Scalar>(g: &GridFunction<T>, s: SExponent<T>) -> VariationReport<T> {
    let (tvs, chain) = dp_max_over_subsequences(g.samples(), s, false);
    let pts: Vec<T> = chain.iter().map(|&i| g.x_at(i)).collect();
    let witness = if pts.len() == 1 {
        Subdivision::new(vec![pts[0], pts[0] + g.dx()]).unwrap()
    } else {
        Subdivision::new(pts).expect("grid points are strictly increasing")
    };
    VariationReport {
        tvs,
        witness,
        seminorm: tvs.powf(s.s()),
    }
}

/// Positive-part DP over grid samples (lower bound for the one-sided variation).
pub fn tvs_plus_grid_lower_bound<T: Scalar>(g: &GridFunction<T>, s: SExponent<T>) -> T {
    dp_max_over_subsequences(g.samples(), s, true).0
}

/// Default shift grid `h = 2^-k`, k = 0..=20, for [`lip_functional`].
pub fn default_shift_grid<T: Scalar>() -> Vec<T> {
    (0..=20).map(|k| T::of(2f64.powi(-k))).collect()
}

/// `max_h (1/h) int |u(x+h)-u(x)|^{1/s} dx` over an explicit grid of shifts;
/// always bounded by the s-total variation.
pub fn lip_functional<T: Scalar>(
    u: &StepFunction<T>,
    s: SExponent<T>,
    h_grid: &[T],
) -> Result<T> {
    if h_grid.is_empty() {
        return Err(Error::validation("shift grid must be nonempty"));
    }
    let mut best = T::zero();
    for &h in h_grid {
        best = best.max(u.shift_difference_lp(h, s.p())?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::StepFunction;

    fn step(cuts: &[f64], vals: &[f64]) -> StepFunction<f64> {
        StepFunction::new(cuts.to_vec(), vals.to_vec()).unwrap()
    }

    fn s(v: f64) -> SExponent<f64> {
        SExponent::from_s(v).unwrap()
    }

    /// Exhaustive oracle: maximum over all 2^n subsequences.
    pub(crate) fn brute_force_tvs(values: &[f64], se: SExponent<f64>, plus: bool) -> f64 {
        let n = values.len();
        assert!(n <= 20);
        let mut best = 0.0f64;
        for mask in 0u32..(1 << n) {
            let mut prev: Option<f64> = None;
            let mut acc = 0.0;
            for (i, &v) in values.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    if let Some(p) = prev {
                        acc += if plus {
                            se.pow_increment_plus(v - p)
                        } else {
                            se.pow_increment(v - p)
                        };
                    }
                    prev = Some(v);
                }
            }
            best = best.max(acc);
        }
        best
    }

    #[test]
    fn refining_a_ramp_kills_the_sum() {
        // u sampled exactly at k/n: n * (1/n)^(1/s) -> 0 for s < 1.
        let se = s(0.5);
        for n in [10usize, 100] {
            let cuts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let mut vals = vec![0.0];
            vals.extend((1..=n).map(|k| k as f64 / n as f64));
            vals.push(1.0);
            let u = StepFunction::new(cuts.clone(), vals).unwrap();
            let sigma = Subdivision::new(cuts).unwrap();
            let got = tvs_on_subdivision(&u, &sigma, se);
            let expect = n as f64 * (1.0 / n as f64).powi(2);
            assert!((got - expect).abs() < 1e-12, "n={n}: {got} vs {expect}");
        }
    }

    #[test]
    fn two_jump_subdivisions() {
        // increasing two-jump function: jumps a then b
        let (a, b) = (1.0, 1.0);
        let u = step(&[0.0, 1.0], &[0.0, a, a + b]);
        let se = s(0.5);
        let coarse = Subdivision::new(vec![-1.0, 2.0]).unwrap();
        let fine = Subdivision::new(vec![-1.0, 0.5, 2.0]).unwrap();
        assert_eq!(tvs_on_subdivision(&u, &coarse, se), 4.0);
        assert_eq!(tvs_on_subdivision(&u, &fine, se), 2.0);
        assert_eq!(tvs_step_exact(&u, se).tvs, 4.0);
    }

    #[test]
    fn constant_has_zero_variation() {
        let u = StepFunction::constant(3.0);
        let sigma = Subdivision::new(vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(tvs_on_subdivision(&u, &sigma, s(0.7)), 0.0);
        let rep = tvs_step_exact(&u, s(0.7));
        assert_eq!(rep.tvs, 0.0);
        assert_eq!(tvs_on_subdivision(&u, &rep.witness, s(0.7)), 0.0);
    }

    #[test]
    fn extremal_points_monotone_and_zigzag() {
        // values 1,2,3,4 along sigma -> only endpoints kept
        let u = step(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0, 4.0]);
        let sigma = Subdivision::new(vec![-0.5, 0.5, 1.5, 2.5]).unwrap();
        let ext = extremal_points(&u, &sigma);
        assert_eq!(ext.points(), &[-0.5, 2.5]);

        // values 0, a, a-eps, b: every interior point is a local extremum
        let w = step(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.99, 2.0]);
        let ext = extremal_points(&w, &sigma);
        assert_eq!(ext.points(), sigma.points());

        let two = Subdivision::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(extremal_points(&u, &two).points(), two.points());
    }

    #[test]
    fn monotone_steps_reach_the_total_jump() {
        let se = s(0.5);
        let u = step(&[0.0, 1.0, 2.0, 3.0], &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let rep = tvs_step_exact(&u, se);
        assert!((rep.tvs - 1.0).abs() < 1e-15);
        assert!((rep.seminorm - 1.0).abs() < 1e-15);
        assert_eq!(tvs_on_subdivision(&u, &rep.witness, se), rep.tvs);
    }

    #[test]
    fn skipping_a_dip_beats_keeping_it() {
        // values 0, 1, 0.99, 2 at s = 1/2: b^2 = 4 > 1 + 0.0001 + 1.0201
        let u = step(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.99, 2.0]);
        let rep = tvs_step_exact(&u, s(0.5));
        assert!((rep.tvs - 4.0).abs() < 1e-12, "tvs = {}", rep.tvs);
    }

    #[test]
    fn alternating_diminishing_oscillations_sum_their_amplitudes() {
        // amplitudes 1, 0.8, 0.6, 0.4: alternating with monotone oscillation
        let amps = [1.0, 0.8, 0.6, 0.4];
        let mut vals = vec![0.0];
        let mut sign = 1.0;
        for &a in &amps {
            let last = *vals.last().unwrap();
            vals.push(last + sign * a);
            sign = -sign;
        }
        let cuts: Vec<f64> = (0..amps.len()).map(|i| i as f64).collect();
        let u = StepFunction::new(cuts, vals).unwrap();
        for sv in [0.3, 0.5, 0.8, 1.0] {
            let se = s(sv);
            let expect: f64 = amps.iter().map(|a| a.powf(se.p())).sum();
            let got = tvs_step_exact(&u, se).tvs;
            assert!(
                (got - expect).abs() <= 1e-12 * expect,
                "s={sv}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn dp_matches_brute_force_on_random_values() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.gen_range(1..=10);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let cuts: Vec<f64> = (0..n - 1).map(|i| i as f64).collect();
            let u = StepFunction::new(cuts, values.clone()).unwrap();
            for sv in [0.25, 0.5, 1.0] {
                let se = s(sv);
                // canonicalization may merge values; oracle runs on the canonical sequence
                let oracle = brute_force_tvs(u.values(), se, false);
                let rep = tvs_step_exact(&u, se);
                assert!(
                    (rep.tvs - oracle).abs() <= 1e-12 * (1.0 + oracle),
                    "s={sv}: dp {} vs oracle {}",
                    rep.tvs,
                    oracle
                );
                assert!(
                    (tvs_on_subdivision(&u, &rep.witness, se) - rep.tvs).abs()
                        <= 1e-12 * (1.0 + rep.tvs)
                );
                let oracle_plus = brute_force_tvs(u.values(), se, true);
                let plus = tvs_plus_step(&u, se);
                assert!((plus - oracle_plus).abs() <= 1e-12 * (1.0 + oracle_plus));
            }
        }
    }

    #[test]
    fn plus_variant_edge_cases() {
        let dec = step(&[0.0, 1.0], &[3.0, 2.0, 1.0]);
        assert_eq!(tvs_plus_step(&dec, s(0.5)), 0.0);
        let inc = step(&[0.0, 1.0], &[1.0, 2.0, 3.0]);
        assert_eq!(tvs_plus_step(&inc, s(0.5)), tvs_step_exact(&inc, s(0.5)).tvs);
    }

    #[test]
    fn grid_lower_bound_examples() {
        let flat = GridFunction::new(0.0, 1.0, vec![2.0; 5]).unwrap();
        assert_eq!(tvs_grid_lower_bound(&flat, s(0.5)).tvs, 0.0);

        let mono = GridFunction::new(0.0, 1.0, vec![0.0, 0.3, 0.7, 1.0]).unwrap();
        assert!((tvs_grid_lower_bound(&mono, s(0.5)).tvs - 1.0).abs() < 1e-15);

        // adding a local-extremum sample can only increase the DP value
        let g = GridFunction::new(0.0, 1.0, vec![0.0, 1.0, 0.2, 0.8]).unwrap();
        let sub = GridFunction::new(0.0, 1.0, vec![0.0, 1.0, 0.8]).unwrap();
        assert!(tvs_grid_lower_bound(&g, s(0.5)).tvs >= tvs_grid_lower_bound(&sub, s(0.5)).tvs);
    }

    #[test]
    fn lip_functional_examples() {
        let se = s(0.5);
        // A single unit jump has lip = TV^s; with the equal-tail requirement the
        // jump is realized as a wide box (the down-jump sits far away), whose two
        // unit jumps each contribute a width-h band: lip = 2 = TV^{1/2}.
        let box_fn = step(&[0.0, 100.0], &[0.0, 1.0, 0.0]);
        let grid = default_shift_grid::<f64>();
        let lip = lip_functional(&box_fn, se, &grid).unwrap();
        let tvs = tvs_step_exact(&box_fn, se).tvs;
        assert!((lip - 2.0).abs() < 1e-12, "lip = {lip}");
        assert_eq!(tvs, 2.0);

        let jump = step(&[0.0], &[0.0, 1.0]);
        assert!(jump.shift_difference_lp(0.5, 2.0).is_err());

        let c = StepFunction::constant(5.0);
        assert_eq!(lip_functional(&c, se, &grid).unwrap(), 0.0);
    }

    #[test]
    fn lip_bounded_by_tvs_on_randoms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let grid = default_shift_grid::<f64>();
        for _ in 0..40 {
            let n = rng.gen_range(2..=8);
            let mut vals = vec![0.0];
            for _ in 0..n {
                vals.push(rng.gen_range(-1.0..1.0));
            }
            vals.push(0.0);
            let cuts: Vec<f64> = (0..=n).map(|i| i as f64 * 0.5).collect();
            let u = StepFunction::new(cuts, vals).unwrap();
            for sv in [0.5, 0.75, 1.0] {
                let se = s(sv);
                let lip = lip_functional(&u, se, &grid).unwrap();
                let tvs = tvs_step_exact(&u, se).tvs;
                assert!(
                    lip <= tvs * (1.0 + 1e-9) + 1e-12,
                    "s={sv}: lip {lip} > tvs {tvs}"
                );
            }
        }
    }
}
