//! Convex polytopes held by their generators, with membership queries.
//!
//! Membership never builds a hull in dimension three or more: it solves a
//! small feasibility program over convex-combination weights instead. In
//! dimensions one and two an H-representation is derived once and reused.

mod feasibility;
mod hull;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use feasibility::convex_combination_feasible;
pub use hull::{convex_hull_2d, shoelace};

use crate::error::{Error, Result};
use crate::ifs::{AddressPrefix, IfsSystem};
use crate::scalar::{dot, norm_sq, Scalar};

/// How a membership query treats the boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership<S> {
    /// Point lies in the closed polytope, up to the polytope's tolerance.
    Closed,
    /// The ball of the given radius around the point lies inside.
    InteriorMargin(S),
}

/// `normal · x <= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace<S> {
    pub normal: Vec<S>,
    pub offset: S,
    norm_sq: S,
}

impl<S: Scalar> Halfspace<S> {
    pub fn new(normal: Vec<S>, offset: S) -> Self {
        let norm_sq = norm_sq(&normal);
        Self { normal, offset, norm_sq }
    }

    /// `offset - normal · x`, the unnormalized slack.
    pub fn slack(&self, x: &[S]) -> S {
        self.offset.clone() - dot(&self.normal, x)
    }

    /// Slack of at least `-tol` in Euclidean units.
    fn admits(&self, x: &[S], tol: &S) -> bool {
        let s = self.slack(x);
        if s >= S::zero() {
            return true;
        }
        if tol.is_zero() {
            return false;
        }
        s.clone() * s <= tol.clone() * tol.clone() * self.norm_sq.clone()
    }

    /// Euclidean distance to the boundary hyperplane is at least `tau`.
    fn clears(&self, x: &[S], tau: &S) -> bool {
        let s = self.slack(x);
        if s < S::zero() {
            return false;
        }
        if tau.is_zero() {
            // zero radius means the open interior
            return s > S::zero();
        }
        s.clone() * s >= tau.clone() * tau.clone() * self.norm_sq.clone()
    }
}

#[derive(Debug, Clone)]
pub struct Polytope<S = f64> {
    generators: Vec<Vec<S>>,
    halfspaces: Option<Vec<Halfspace<S>>>,
    dim: usize,
    tolerance: S,
}

impl<S: Scalar> Polytope<S> {
    /// Builds the polytope spanned by `generators`; H-form is derived for d <= 2.
    pub fn new(generators: Vec<Vec<S>>) -> Result<Self> {
        let dim = generators
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("polytope needs at least one generator".into()))?;
        if dim == 0 {
            return Err(Error::InvalidInput("zero-dimensional coordinates".into()));
        }
        for g in &generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.len() });
            }
        }
        let halfspaces = match dim {
            1 => {
                let lo = min_by_partial(generators.iter().map(|g| &g[0]));
                let hi = max_by_partial(generators.iter().map(|g| &g[0]));
                Some(vec![
                    Halfspace::new(vec![-S::one()], -lo.clone()),
                    Halfspace::new(vec![S::one()], hi.clone()),
                ])
            }
            2 => {
                let hull = convex_hull_2d(&generators);
                if hull.len() < 3 {
                    None
                } else {
                    let n = hull.len();
                    let hs = (0..n)
                        .map(|i| {
                            let a = &hull[i];
                            let b = &hull[(i + 1) % n];
                            let normal = vec![
                                b[1].clone() - a[1].clone(),
                                a[0].clone() - b[0].clone(),
                            ];
                            let offset = dot(&normal, a);
                            Halfspace::new(normal, offset)
                        })
                        .collect();
                    Some(hs)
                }
            }
            _ => None,
        };
        Ok(Self { generators, halfspaces, dim, tolerance: S::default_tolerance() })
    }

    pub fn with_tolerance(mut self, tol: S) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn generators(&self) -> &[Vec<S>] {
        &self.generators
    }

    pub fn halfspaces(&self) -> Option<&[Halfspace<S>]> {
        self.halfspaces.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tolerance(&self) -> &S {
        &self.tolerance
    }

    pub fn contains(&self, x: &[S], mode: &Membership<S>) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.contains_unchecked(x, mode))
    }

    /// Membership without the dimension check; callers guarantee `x.len() == dim`.
    pub(crate) fn contains_unchecked(&self, x: &[S], mode: &Membership<S>) -> bool {
        match (&self.halfspaces, mode) {
            (Some(hs), Membership::Closed) => hs.iter().all(|h| h.admits(x, &self.tolerance)),
            (Some(hs), Membership::InteriorMargin(tau)) => hs.iter().all(|h| h.clears(x, tau)),
            (None, Membership::Closed) => {
                convex_combination_feasible(&self.generators, x, &self.tolerance)
            }
            (None, Membership::InteriorMargin(tau)) => {
                // The cross-polytope with half-diagonal tau*d contains the tau-ball.
                let reach = tau.clone() * S::from_usize_exact(self.dim);
                let mut probe = x.to_vec();
                for i in 0..self.dim {
                    for sign in [true, false] {
                        probe[i] = if sign {
                            x[i].clone() + reach.clone()
                        } else {
                            x[i].clone() - reach.clone()
                        };
                        if !convex_combination_feasible(&self.generators, &probe, &self.tolerance) {
                            return false;
                        }
                    }
                    probe[i] = x[i].clone();
                }
                true
            }
        }
    }

    /// Axis-aligned bounding box as (lower corner, upper corner).
    pub fn bounding_box(&self) -> (Vec<S>, Vec<S>) {
        let lo = (0..self.dim)
            .map(|i| min_by_partial(self.generators.iter().map(|g| &g[i])).clone())
            .collect();
        let hi = (0..self.dim)
            .map(|i| max_by_partial(self.generators.iter().map(|g| &g[i])).clone())
            .collect();
        (lo, hi)
    }

    /// Largest pairwise generator distance.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                let d2: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(p, q)| (p.to_f64_lossy() - q.to_f64_lossy()).powi(2))
                    .sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    }

    /// Lebesgue measure: exact for d <= 2, Monte Carlo (fixed seed) above.
    pub fn volume(&self) -> Volume {
        match self.dim {
            1 => {
                let (lo, hi) = self.bounding_box();
                Volume::exact((hi[0].clone() - lo[0].clone()).to_f64_lossy())
            }
            2 => {
                let hull = convex_hull_2d(&self.generators);
                Volume::exact(shoelace(&hull).abs().to_f64_lossy())
            }
            _ => self.volume_monte_carlo(200_000, 0),
        }
    }

    /// Bounding-box rejection estimate of the volume with its standard error.
    pub fn volume_monte_carlo(&self, samples: usize, seed: u64) -> Volume {
        let (lo, hi) = self.bounding_box();
        let lo: Vec<f64> = lo.iter().map(Scalar::to_f64_lossy).collect();
        let hi: Vec<f64> = hi.iter().map(Scalar::to_f64_lossy).collect();
        let float_gens: Vec<Vec<f64>> = self
            .generators
            .iter()
            .map(|g| g.iter().map(Scalar::to_f64_lossy).collect())
            .collect();
        let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0usize;
        let mut x = vec![0.0; self.dim];
        for _ in 0..samples {
            for i in 0..self.dim {
                x[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
            }
            if convex_combination_feasible(&float_gens, &x, &1e-12) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        Volume {
            value: p * box_vol,
            stderr: (p * (1.0 - p) / samples as f64).sqrt() * box_vol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Volume {
    pub value: f64,
    /// Zero when the value is computed in closed form.
    pub stderr: f64,
}

impl Volume {
    fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }
}

/// The image `f_w(Ω)`: generators `f_w(p_0), …, f_w(p_{m-1})`.
pub fn image_polytope<S: Scalar>(sys: &IfsSystem<S>, w: &AddressPrefix) -> Result<Polytope<S>> {
    let gens = sys
        .points()
        .iter()
        .map(|p| sys.project_prefix(w, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Polytope::new(gens)?.with_tolerance(sys.omega().tolerance().clone()))
}

fn min_by_partial<'a, S: Scalar>(it: impl Iterator<Item = &'a S>) -> &'a S {
    it.reduce(|a, b| if b < a { b } else { a }).expect("non-empty")
}

fn max_by_partial<'a, S: Scalar>(it: impl Iterator<Item = &'a S>) -> &'a S {
    it.reduce(|a, b| if b > a { b } else { a }).expect("non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn unit_interval() -> Polytope<f64> {
        Polytope::new(vec![vec![0.0], vec![1.0]]).unwrap()
    }

    fn unit_triangle() -> Polytope<f64> {
        Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn interval_membership() {
        let p = unit_interval();
        assert!(p.contains(&[0.5], &Membership::Closed).unwrap());
        assert!(!p.contains(&[0.0], &Membership::InteriorMargin(0.01)).unwrap());
        assert!(p.contains(&[0.0], &Membership::Closed).unwrap());
        assert!(p.contains(&[-1e-10], &Membership::Closed).unwrap());
        assert!(!p.contains(&[-1e-8], &Membership::Closed).unwrap());
    }

    #[test]
    fn triangle_membership() {
        let t = unit_triangle();
        assert!(t.contains(&[0.25, 0.25], &Membership::Closed).unwrap());
        assert!(t.contains(&[0.25, 0.25], &Membership::InteriorMargin(0.1)).unwrap());
        // distance to the hypotenuse is 0.5/sqrt(2) ≈ 0.3536
        assert!(!t.contains(&[0.25, 0.25], &Membership::InteriorMargin(0.36)).unwrap());
        assert!(!t.contains(&[0.6, 0.6], &Membership::Closed).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = unit_triangle();
        assert_eq!(
            t.contains(&[0.1], &Membership::Closed),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn volumes() {
        assert_eq!(unit_interval().volume().value, 1.0);
        assert!((unit_triangle().volume().value - 0.5).abs() < 1e-15);
        let tet = Polytope::new(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let v = tet.volume_monte_carlo(40_000, 7);
        assert!((v.value - 1.0 / 6.0).abs() < 4.0 * v.stderr + 1e-3);
        assert!(v.stderr > 0.0);
    }

    #[test]
    fn exact_boundary_is_closed_not_interior() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let t = Polytope::new(vec![
            vec![q(0, 1), q(0, 1)],
            vec![q(1, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1)],
        ])
        .unwrap();
        let edge = [q(1, 3), q(2, 3)];
        assert!(t.contains(&edge, &Membership::Closed).unwrap());
        assert!(!t.contains(&edge, &Membership::InteriorMargin(q(0, 1))).unwrap());
        assert!(!t.contains(&[q(1, 3), q(2, 3) + q(1, 1_000_000)], &Membership::Closed).unwrap());
    }

    #[test]
    fn three_d_interior_margin_uses_feasibility() {
        let mut g = Vec::new();
        for i in 0..8u32 {
            g.push((0..3).map(|b| f64::from((i >> b) & 1)).collect::<Vec<f64>>());
        }
        let cube = Polytope::new(g).unwrap();
        assert!(cube.halfspaces().is_none());
        assert!(cube.contains(&[0.5, 0.5, 0.5], &Membership::InteriorMargin(0.1)).unwrap());
        assert!(!cube.contains(&[0.05, 0.5, 0.5], &Membership::InteriorMargin(0.1)).unwrap());
    }
}
