//! The three-map triangle IFS in normalized barycentric coordinates.
//!
//! A point is a triple `(x, y, z)` with `x + y + z = 1`; the `i`-th entry is
//! the weight of vertex `p_i`, so `f_i` acts as `t ↦ λt + (1-λ)e_i`. All
//! closed forms below are stated in this frame. Any Cartesian triangle maps
//! to it affinely, which preserves addresses.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::address::is_single_chain;
use crate::error::{Error, Result};
use crate::geometry::Membership;
use crate::ifs::IfsSystem;
use crate::scalar::{parse_rational, Scalar};

/// Positive root of `t³ + t = 1`.
pub fn lambda0() -> f64 {
    let f = |t: f64| t * t * t + t - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        t -= f(t) / (3.0 * t * t + 1.0);
    }
    t
}

/// `(√5 - 1)/2`.
pub fn golden_ratio() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

pub fn inv_sqrt2() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricTriple<S = f64> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> BarycentricTriple<S> {
    /// Requires a unit sum (1e-12 on floats) and non-negative entries.
    pub fn new(x: S, y: S, z: S) -> Result<Self> {
        let t = Self { x, y, z };
        let slack = if S::EXACT { S::zero() } else { S::from_f64(1e-12).unwrap_or_else(S::zero) };
        let sum = t.x.clone() + t.y.clone() + t.z.clone();
        if (sum - S::one()).abs() > slack {
            return Err(Error::InvalidInput("barycentric coordinates must sum to 1".into()));
        }
        if t.as_array().iter().any(|c| *c < -slack.clone()) {
            return Err(Error::InvalidInput("barycentric coordinates must be non-negative".into()));
        }
        Ok(t)
    }

    pub fn as_array(&self) -> [S; 3] {
        [self.x.clone(), self.y.clone(), self.z.clone()]
    }

    pub fn sum(&self) -> S {
        self.x.clone() + self.y.clone() + self.z.clone()
    }

    /// Cartesian point `x·v_0 + y·v_1 + z·v_2`.
    pub fn to_cartesian(&self, vertices: &[Vec<S>]) -> Vec<S> {
        let w = self.as_array();
        (0..vertices[0].len())
            .map(|c| {
                (0..3).fold(S::zero(), |acc, i| acc + w[i].clone() * vertices[i][c].clone())
            })
            .collect()
    }

    /// Barycentric weights of a planar point with respect to `vertices`.
    pub fn from_cartesian(p: &[S], vertices: &[Vec<S>]) -> Result<Self> {
        let (a, b, c) = (&vertices[0], &vertices[1], &vertices[2]);
        let det = (b[0].clone() - a[0].clone()) * (c[1].clone() - a[1].clone())
            - (c[0].clone() - a[0].clone()) * (b[1].clone() - a[1].clone());
        if det.is_zero() {
            return Err(Error::DegenerateAffineHull { affine: 1, ambient: 2 });
        }
        let px = p[0].clone() - a[0].clone();
        let py = p[1].clone() - a[1].clone();
        let y = (px.clone() * (c[1].clone() - a[1].clone()) - (c[0].clone() - a[0].clone()) * py.clone())
            / det.clone();
        let z = ((b[0].clone() - a[0].clone()) * py - px * (b[1].clone() - a[1].clone())) / det;
        let x = S::one() - y.clone() - z.clone();
        Ok(Self { x, y, z })
    }
}

/// Vertices `(0,0), (1,0), (0,1)`: a rational stand-in for the equilateral frame.
pub fn reference_vertices<S: Scalar>() -> Vec<Vec<S>> {
    vec![vec![S::zero(), S::zero()], vec![S::one(), S::zero()], vec![S::zero(), S::one()]]
}

pub fn triangle_ifs<S: Scalar>(lambda: S) -> Result<IfsSystem<S>> {
    IfsSystem::new(lambda, reference_vertices())
}

/// `(λ², λ, 1)/(1+λ+λ²)`, a period-3 point of the inverse shift.
pub fn pi_point<S: Scalar>(lambda: &S) -> BarycentricTriple<S> {
    let l2 = lambda.clone() * lambda.clone();
    let den = S::one() + lambda.clone() + l2.clone();
    BarycentricTriple { x: l2 / den.clone(), y: lambda.clone() / den.clone(), z: S::one() / den }
}

/// `(1, λ, λ²)/(1+λ+λ²)`, the companion 3-cycle.
pub fn pi_prime_point<S: Scalar>(lambda: &S) -> BarycentricTriple<S> {
    let p = pi_point(lambda);
    BarycentricTriple { x: p.z, y: p.y, z: p.x }
}

/// Bounds `(a, b, c)` of the open triangle `{x<a, y<b, z<c}` that is `Γ_0`.
pub fn gamma0_bounds(lambda: f64) -> (f64, f64, f64) {
    ((1.0 - lambda) / lambda, 1.0 - lambda, 1.0 - lambda)
}

/// `{x<a, y<b, z<c}` on the plane `x+y+z=1` has interior iff `a+b+c > 1`.
pub fn gamma_nonempty(lambda: f64) -> bool {
    let (a, b, c) = gamma0_bounds(lambda);
    a + b + c > 1.0
}

/// Membership in `Γ_i` (the `Γ_0` inequalities with coordinates rotated).
pub fn in_gamma(lambda: f64, i: usize, t: &BarycentricTriple) -> bool {
    let c = t.as_array();
    let (a, b, _) = gamma0_bounds(lambda);
    c[i] < a && c[(i + 1) % 3] < b && c[(i + 2) % 3] < b
}

/// `Δ_i = Δ ∖ ⋃_{j≠i} f_j(Δ)`: both other coordinates below `1-λ`.
pub fn in_delta(lambda: f64, i: usize, t: &BarycentricTriple) -> bool {
    let c = t.as_array();
    (0..3).filter(|&j| j != i).all(|j| c[j] < 1.0 - lambda)
}

/// `Ω_i = f_i(Δ) ∖ ⋃_{j≠i} f_j(Δ)`.
pub fn in_omega_region(lambda: f64, i: usize, t: &BarycentricTriple) -> bool {
    let c = t.as_array();
    c[i] >= 1.0 - lambda && in_delta(lambda, i, t)
}

/// Top-left corner of `f_0^{-1}(Γ_0)`.
pub fn m_point(lambda: f64) -> BarycentricTriple {
    let r = (1.0 - lambda) / lambda;
    BarycentricTriple { x: r * r, y: r, z: (-1.0 + lambda + lambda * lambda) / (lambda * lambda) }
}

/// `f_0^{-1}(Γ_0)` clears `Δ_1`: the corner's `z` exceeds `1-λ`.
pub fn m_separation_holds(lambda: f64) -> bool {
    m_point(lambda).z > 1.0 - lambda
}

/// One digit triple `(a_n, b_n, c_n)`: exactly one entry is 1.
pub type DigitTriple = [u8; 3];

fn unit_triple(i: usize) -> DigitTriple {
    let mut t = [0u8; 3];
    t[i] = 1;
    t
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForcingOutcome {
    /// Every step had exactly one feasible digit and the state repeated.
    UniqueByCycle { period: usize, prefix_len: usize },
    /// Two or more digits were feasible at `step`.
    ForcedPrefixThenBranch { step: usize },
    /// No digit was feasible at `step`; the target is not in the attractor.
    DeadEnd { step: usize },
    /// `max_steps` forced digits without a repeat.
    Exhausted { steps: usize },
}

/// Remainders `(X, Y, Z)` in prefix-sum units, i.e. coordinates over `1-λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingState {
    pub remainders: [BigRational; 3],
    pub step: usize,
    pub history: Vec<DigitTriple>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingResult {
    pub outcome: ForcingOutcome,
    pub final_state: ForcingState,
}

/// Solves `Σ a_n λ^n = X, Σ b_n λ^n = Y, Σ c_n λ^n = Z` digit by digit with
/// `a_n + b_n + c_n = 1`, keeping a digit only when all three shifted
/// remainders stay in `[0, 1/(1-λ)]`.
pub fn digit_forcing(
    lambda: &BigRational,
    target: &BarycentricTriple<BigRational>,
    max_steps: usize,
) -> Result<ForcingResult> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if !(lambda > &zero && lambda < &one) {
        return Err(Error::LambdaOutOfRange(lambda.to_f64_lossy()));
    }
    let scale = &one / (&one - lambda);
    let window = scale.clone();
    let mut state = ForcingState {
        remainders: target.as_array().map(|c| c * &scale),
        step: 0,
        history: Vec::new(),
    };
    let mut seen: HashMap<[BigRational; 3], usize> = HashMap::new();
    seen.insert(state.remainders.clone(), 0);
    while state.step < max_steps {
        let feasible: Vec<(usize, [BigRational; 3])> = (0..3)
            .filter_map(|i| {
                let next: [BigRational; 3] = std::array::from_fn(|c| {
                    let digit = if c == i { one.clone() } else { zero.clone() };
                    (&state.remainders[c] - digit) / lambda
                });
                next.iter().all(|r| *r >= zero && *r <= window).then_some((i, next))
            })
            .collect();
        match feasible.len() {
            0 => {
                let step = state.step;
                return Ok(ForcingResult { outcome: ForcingOutcome::DeadEnd { step }, final_state: state });
            }
            1 => {
                let (i, next) = feasible.into_iter().next().expect("one");
                state.remainders = next;
                state.history.push(unit_triple(i));
                state.step += 1;
                if let Some(&start) = seen.get(&state.remainders) {
                    let outcome =
                        ForcingOutcome::UniqueByCycle { period: state.step - start, prefix_len: start };
                    return Ok(ForcingResult { outcome, final_state: state });
                }
                seen.insert(state.remainders.clone(), state.step);
            }
            _ => {
                let step = state.step;
                return Ok(ForcingResult {
                    outcome: ForcingOutcome::ForcedPrefixThenBranch { step },
                    final_state: state,
                });
            }
        }
    }
    let steps = state.step;
    Ok(ForcingResult { outcome: ForcingOutcome::Exhausted { steps }, final_state: state })
}

/// [`digit_forcing`] from decimal or fraction text such as `"3/5"`.
pub fn digit_forcing_text(lambda: &str, target: [&str; 3], max_steps: usize) -> Result<ForcingResult> {
    let lambda = parse_rational(lambda)?;
    let [x, y, z] = target.map(parse_rational);
    let t = BarycentricTriple::new(x?, y?, z?)?;
    digit_forcing(&lambda, &t, max_steps)
}

/// Grid points of `⋃ Γ_i` whose prefix tree is a single chain to `depth`.
/// Exploratory only: used to eyeball how few candidates survive.
pub fn gamma_uniqueness_scan(lambda: f64, resolution: usize, depth: usize) -> Result<Vec<BarycentricTriple>> {
    let sys = triangle_ifs(lambda)?;
    let vertices = reference_vertices::<f64>();
    let mut out = Vec::new();
    for a in 0..=resolution {
        for b in 0..=resolution - a {
            let x = a as f64 / resolution as f64;
            let y = b as f64 / resolution as f64;
            let t = BarycentricTriple { x, y, z: 1.0 - x - y };
            if !(0..3).any(|i| in_gamma(lambda, i, &t)) {
                continue;
            }
            let p = t.to_cartesian(&vertices);
            if sys.omega().contains_unchecked(&p, &Membership::Closed) && is_single_chain(&sys, &p, depth) {
                out.push(t);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn constants() {
        let l0 = lambda0();
        assert!((l0 - 0.68233).abs() < 5e-6);
        assert!((l0 * l0 * l0 + l0 - 1.0).abs() < 1e-12);
        assert!(2.0 / 3.0 < l0 && l0 < inv_sqrt2());
        let g = golden_ratio();
        assert!((g - 0.6180339887498949).abs() < 1e-15);
        assert!((g * g + g - 1.0).abs() < 1e-15);
        assert!(g < l0);
    }

    #[test]
    fn pi_point_values() {
        let p = pi_point(&0.6f64);
        assert!((p.x - 0.183673469).abs() < 1e-9);
        assert!((p.y - 0.306122449).abs() < 1e-9);
        assert!((p.z - 0.510204082).abs() < 1e-9);
        let l0 = lambda0();
        let p = pi_point(&l0);
        assert!((p.x - l0.powi(4)).abs() < 1e-12);
        assert!((p.y - l0.powi(3)).abs() < 1e-12);
        assert!((p.z - l0.powi(2)).abs() < 1e-12);
        let pp = pi_prime_point(&0.6f64);
        assert_eq!((pp.x, pp.z), (p_of(0.6).z, p_of(0.6).x));
    }

    fn p_of(l: f64) -> BarycentricTriple {
        pi_point(&l)
    }

    #[test]
    fn gamma_examples() {
        assert!(gamma_nonempty(0.69));
        assert!(!gamma_nonempty(0.72));
        assert!(!gamma_nonempty(inv_sqrt2()));
    }

    #[test]
    fn m_point_examples() {
        let m = m_point(0.69);
        assert!((m.x - 0.201848).abs() < 1e-6);
        assert!((m.y - 0.449275).abs() < 1e-6);
        assert!((m.z - 0.348877).abs() < 1e-6);
        assert!((m.x + m.y + m.z - 1.0).abs() < 1e-12);
        assert!(m_separation_holds(0.69));
        assert!(!m_separation_holds(0.66));
    }

    #[test]
    fn forcing_pi_point_three_fifths() {
        let l = q(3, 5);
        let r = digit_forcing(&l, &pi_point(&l), 100).unwrap();
        assert_eq!(r.outcome, ForcingOutcome::UniqueByCycle { period: 3, prefix_len: 0 });
        assert_eq!(r.final_state.history, vec![[0, 0, 1], [0, 1, 0], [1, 0, 0]]);
        // T³π = π exactly
        let start = pi_point(&l).as_array().map(|c| c / (q(1, 1) - &l));
        assert_eq!(r.final_state.remainders, start);
    }

    #[test]
    fn forcing_vertex_and_large_lambda() {
        let l = q(7, 10);
        let v = BarycentricTriple::new(q(1, 1), q(0, 1), q(0, 1)).unwrap();
        let r = digit_forcing(&l, &v, 10).unwrap();
        assert_eq!(r.outcome, ForcingOutcome::UniqueByCycle { period: 1, prefix_len: 0 });
        assert_eq!(r.final_state.history, vec![[1, 0, 0]]);
        let r = digit_forcing(&l, &pi_point(&l), 20).unwrap();
        assert!(matches!(r.outcome, ForcingOutcome::ForcedPrefixThenBranch { step } if step <= 20));
    }

    #[test]
    fn forcing_dead_end_in_a_hole() {
        // centroid of the λ=1/2 gasket lies in the removed middle triangle
        let l = q(1, 2);
        let c = BarycentricTriple::new(q(1, 3), q(1, 3), q(1, 3)).unwrap();
        let r = digit_forcing(&l, &c, 10).unwrap();
        assert_eq!(r.outcome, ForcingOutcome::DeadEnd { step: 0 });
    }

    #[test]
    fn forcing_rejects_bad_text() {
        assert!(matches!(
            digit_forcing_text("pi", ["1", "0", "0"], 5),
            Err(Error::IrrationalInput(_))
        ));
        assert!(digit_forcing_text("3/5", ["1/2", "1/2", "1/2"], 5).is_err());
    }

    #[test]
    fn cartesian_round_trip() {
        let v = reference_vertices::<f64>();
        let t = BarycentricTriple::new(0.2, 0.3, 0.5).unwrap();
        let p = t.to_cartesian(&v);
        assert_eq!(p, vec![0.3, 0.5]);
        let back = BarycentricTriple::from_cartesian(&p, &v).unwrap();
        assert!((back.x - 0.2).abs() < 1e-15 && (back.y - 0.3).abs() < 1e-15);
    }

    #[test]
    fn exclusive_regions_differ_only_with_holes() {
        let centre = BarycentricTriple::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        // λ=0.6: the centre is in no image, so it is in every Δ_i but no Ω_i
        assert!((0..3).all(|i| in_delta(0.6, i, &centre)));
        assert!((0..3).all(|i| !in_omega_region(0.6, i, &centre)));
        for k in 0..=40 {
            for j in 0..=40 - k {
                let t = BarycentricTriple { x: k as f64 / 40.0, y: j as f64 / 40.0, z: 1.0 - (k + j) as f64 / 40.0 };
                for i in 0..3 {
                    assert_eq!(in_delta(0.7, i, &t), in_omega_region(0.7, i, &t));
                }
            }
        }
    }
}
