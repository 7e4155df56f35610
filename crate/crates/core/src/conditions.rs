//! Checkable sufficient conditions: OSC failure, no holes, the overlap
//! witness with its forcing block, and the `W_n` covering.

use crate::address::{NoHolesCertificate, NoHolesReason, DEFAULT_NODE_BUDGET};
use crate::deleted_digits::DigitSet;
use crate::error::{Error, Result};
use crate::geometry::{image_polytope, Membership};
use crate::ifs::{AddressPrefix, IfsSystem};
use crate::montecarlo::{uniform_samples, Estimate};
use crate::scalar::Scalar;

/// Cap on the block length searched for by [`vertex_overlap_witness`].
pub const MAX_ELL: usize = 64;

/// Threshold test with the threshold it was compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdCheck {
    pub holds: bool,
    pub threshold: f64,
}

/// `λ > m^{-1/d}` rules out the open set condition by volume counting.
pub fn osc_failure_sufficient<S: Scalar>(sys: &IfsSystem<S>) -> ThresholdCheck {
    let threshold = (sys.m() as f64).powf(-1.0 / sys.d() as f64);
    ThresholdCheck { holds: sys.lambda().to_f64_lossy() > threshold, threshold }
}

/// `λ >= d/(d+1)` guarantees the attractor is all of `Ω`.
pub fn no_holes_sufficient<S: Scalar>(sys: &IfsSystem<S>) -> ThresholdCheck {
    let d = sys.d();
    // compared in the system's own arithmetic so 2/3 is exact on the rational path
    let holds = sys.lambda().clone() * S::from_usize_exact(d + 1) >= S::from_usize_exact(d);
    ThresholdCheck { holds, threshold: d as f64 / (d + 1) as f64 }
}

/// A certificate for [`crate::address::FeasibilityMode::ExactNoHoles`] when `λ >= d/(d+1)`.
pub fn certify_no_holes<S: Scalar>(sys: &IfsSystem<S>) -> Option<NoHolesCertificate> {
    no_holes_sufficient(sys)
        .holds
        .then(|| NoHolesCertificate::issue(sys, NoHolesReason::DimensionThreshold))
}

/// Whether some prefix of length `n` keeps its remainder in `Ω`.
fn covered_at_depth(sys: &IfsSystem<f64>, x: &[f64], n: usize) -> bool {
    if n == 0 {
        return sys.omega().contains_unchecked(x, &Membership::Closed);
    }
    (0..sys.m()).any(|j| {
        let r = sys.inverse_unchecked(j, x);
        sys.omega().contains_unchecked(&r, &Membership::Closed) && covered_at_depth(sys, &r, n - 1)
    })
}

/// Fraction of uniform points of `Ω` outside `⋃_{|w|=n} f_w(Ω)`.
pub fn covering_deficiency(sys: &IfsSystem<f64>, n: usize, samples: usize, seed: u64) -> Estimate {
    let points = uniform_samples(sys.omega(), samples, seed);
    let outside = points.iter().filter(|x| !covered_at_depth(sys, x, n)).count();
    Estimate::from_counts(outside, samples)
}

/// A vertex `f_k(p_j)` lying in `f_i(Ω)`, together with the least `ℓ` for
/// which the block `k·j^{ℓ-1}` maps `Ω` into `f_i(Ω) ∩ f_k(Ω)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapWitness {
    pub i: usize,
    pub k: usize,
    pub j: usize,
    pub ell: usize,
    /// The vertex is interior to `f_i(Ω)` in the full-dimensional sense; when
    /// false it sits on `∂Ω` and only the block containment was verified.
    pub strictly_interior: bool,
}

impl OverlapWitness {
    /// `k` followed by `ℓ-1` copies of `j`.
    pub fn block(&self) -> AddressPrefix {
        let mut digits = vec![self.k];
        digits.extend(std::iter::repeat_n(self.j, self.ell - 1));
        AddressPrefix(digits)
    }

    pub fn family(&self, m: usize) -> BlockFamily {
        BlockFamily::new(self.block(), m)
    }
}

/// All length-`ℓ` words as block maps `F_0, …, F_{L-1}` with `F_0` the forcing block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFamily {
    pub ell: usize,
    pub block0: AddressPrefix,
    /// `m^ℓ`.
    pub count: u128,
}

impl BlockFamily {
    pub fn new(block0: AddressPrefix, m: usize) -> Self {
        let ell = block0.len();
        let count = (m as u128).checked_pow(ell as u32).unwrap_or(u128::MAX);
        Self { ell, block0, count }
    }

    /// Contraction ratio of each block map, `λ^ℓ`.
    pub fn ratio(&self, lambda: f64) -> f64 {
        lambda.powi(self.ell as i32)
    }
}

fn all_in_image<S: Scalar>(
    sys: &IfsSystem<S>,
    target: usize,
    pts: &[Vec<S>],
) -> bool {
    pts.iter().all(|v| {
        let back = sys.inverse_unchecked(target, v);
        sys.omega().contains_unchecked(&back, &Membership::Closed)
    })
}

/// Scans all `(i, k, j)` with `i ≠ k` and returns the witness with the
/// smallest `ℓ` (ties broken by scan order).
///
/// A triple whose vertex is strictly interior but needs more than
/// [`MAX_ELL`] steps is reported as [`Error::NoEllFound`]. On the float path
/// `ℓ` is further capped where `λ^ℓ·diam(Ω)` approaches the tolerance.
pub fn vertex_overlap_witness<S: Scalar>(sys: &IfsSystem<S>) -> Result<Option<OverlapWitness>> {
    let m = sys.m();
    let interior = Membership::InteriorMargin(
        S::from_f64(if S::EXACT { 0.0 } else { 1e-9 }).unwrap_or_else(S::zero),
    );
    // on the float path, blocks smaller than the tolerance would pass trivially
    let resolvable = if S::EXACT {
        MAX_ELL
    } else {
        let lambda = sys.lambda().to_f64_lossy();
        let floor = 1e3 * sys.omega().tolerance().to_f64_lossy() / sys.diameter();
        ((floor.ln() / lambda.ln()).floor() as usize).clamp(2, MAX_ELL)
    };
    let mut best: Option<OverlapWitness> = None;
    for i in 0..m {
        for k in 0..m {
            if i == k {
                continue;
            }
            for j in 0..m {
                let vertex = sys.map_unchecked(k, &sys.points()[j]);
                let back = sys.inverse_unchecked(i, &vertex);
                if !sys.omega().contains_unchecked(&back, &Membership::Closed) {
                    continue;
                }
                let strictly_interior = sys.omega().contains_unchecked(&back, &interior);
                let cap = best.as_ref().map_or(resolvable, |b| b.ell - 1);
                let mut found = None;
                for ell in 2..=cap {
                    let mut w = vec![k];
                    w.extend(std::iter::repeat_n(j, ell - 1));
                    let img = image_polytope(sys, &AddressPrefix(w))?;
                    if all_in_image(sys, i, img.generators()) {
                        found = Some(ell);
                        break;
                    }
                }
                match found {
                    Some(ell) => {
                        best = Some(OverlapWitness { i, k, j, ell, strictly_interior });
                    }
                    None if strictly_interior && best.is_none() => {
                        return Err(Error::NoEllFound(MAX_ELL));
                    }
                    None => {}
                }
            }
        }
    }
    Ok(best)
}

/// Least `k <= max_n` with `x ∈ W_k`, i.e. some feasible run of `k-1` blocks
/// followed by the forcing block. `None` if there is none up to `max_n`.
///
/// Requires the no-holes certificate: block feasibility is then exactly
/// membership of the running remainder in `Ω`.
pub fn wn_first_level(
    sys: &IfsSystem<f64>,
    fam: &BlockFamily,
    x: &[f64],
    max_n: usize,
    cert: &NoHolesCertificate,
    node_budget: usize,
) -> Result<Option<usize>> {
    let mode = crate::address::FeasibilityMode::ExactNoHoles(cert.clone());
    crate::address::feasible_children(sys, x, &mode)?;
    let in_forcing_block = |r: &[f64]| {
        let mut back = r.to_vec();
        for &d in fam.block0.digits() {
            back = sys.inverse_unchecked(d, &back);
            if !sys.omega().contains_unchecked(&back, &Membership::Closed) {
                return false;
            }
        }
        true
    };
    let mut frontier: Vec<Vec<f64>> = vec![x.to_vec()];
    let mut total = 1usize;
    for level in 1..=max_n {
        if frontier.iter().any(|r| in_forcing_block(r)) {
            return Ok(Some(level));
        }
        if level == max_n {
            break;
        }
        for _ in 0..fam.ell {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for r in &frontier {
                for j in 0..sys.m() {
                    let c = sys.inverse_unchecked(j, r);
                    if sys.omega().contains_unchecked(&c, &Membership::Closed) {
                        next.push(c);
                    }
                }
            }
            total += next.len();
            if total > node_budget {
                return Err(Error::BudgetExceeded(node_budget));
            }
            frontier = next;
        }
    }
    Ok(None)
}

/// `x ∈ W_n`. `W_0` is empty.
pub fn wn_membership(
    sys: &IfsSystem<f64>,
    fam: &BlockFamily,
    x: &[f64],
    n: usize,
    cert: &NoHolesCertificate,
) -> Result<bool> {
    Ok(wn_first_level(sys, fam, x, n, cert, DEFAULT_NODE_BUDGET * 8)?.is_some())
}

/// Estimated relative measure of `Ω ∖ W_n` for every `n` in `0..=max_n`,
/// computed on one shared sample so the sequence is non-increasing.
pub fn wn_coverage_series(
    sys: &IfsSystem<f64>,
    fam: &BlockFamily,
    max_n: usize,
    samples: usize,
    seed: u64,
    cert: &NoHolesCertificate,
) -> Result<Vec<Estimate>> {
    use rayon::prelude::*;
    let points = uniform_samples(sys.omega(), samples, seed);
    let levels = points
        .par_iter()
        .map(|x| wn_first_level(sys, fam, x, max_n, cert, DEFAULT_NODE_BUDGET * 8))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=max_n)
        .map(|n| {
            let outside = levels.iter().filter(|l| !matches!(l, Some(k) if *k <= n)).count();
            Estimate::from_counts(outside, samples)
        })
        .collect())
}

pub fn wn_coverage_estimate(
    sys: &IfsSystem<f64>,
    fam: &BlockFamily,
    n: usize,
    samples: usize,
    seed: u64,
    cert: &NoHolesCertificate,
) -> Result<Estimate> {
    Ok(*wn_coverage_series(sys, fam, n, samples, seed, cert)?
        .last()
        .expect("series includes n"))
}

/// Pedicini's gap condition and the two sides it compares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PediciniCheck {
    pub holds: bool,
    /// Largest gap between consecutive digits.
    pub max_gap: f64,
    /// `λ(a_m - a_1)/(1-λ)`.
    pub bound: f64,
}

pub fn pedicini_holds(digits: &DigitSet, lambda: f64) -> PediciniCheck {
    let a = digits.digits();
    let max_gap = a.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let bound = lambda * (a[a.len() - 1] - a[0]) / (1.0 - lambda);
    PediciniCheck { holds: max_gap < bound, max_gap, bound }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(l: f64) -> IfsSystem<f64> {
        IfsSystem::new(l, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn osc_thresholds() {
        let c = osc_failure_sufficient(&tri(0.5));
        assert!((c.threshold - 0.57735026919).abs() < 1e-10);
        assert!(!c.holds);
        assert!(osc_failure_sufficient(&tri(0.6)).holds);
        let unit = IfsSystem::new(0.6, vec![vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(osc_failure_sufficient(&unit).threshold, 0.5);
    }

    #[test]
    fn no_holes_thresholds() {
        assert!((no_holes_sufficient(&tri(0.7)).threshold - 2.0 / 3.0).abs() < 1e-15);
        assert!(!no_holes_sufficient(&tri(0.66)).holds);
        let unit = IfsSystem::new(0.5, vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(no_holes_sufficient(&unit).holds);
        assert_eq!(no_holes_sufficient(&unit).threshold, 0.5);
        let tet = IfsSystem::new(
            0.76,
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(no_holes_sufficient(&tet).holds);
        assert_eq!(no_holes_sufficient(&tet).threshold, 0.75);
    }

    #[test]
    fn witness_in_one_dimension() {
        let unit = IfsSystem::new(0.6, vec![vec![0.0], vec![1.0]]).unwrap();
        let w = vertex_overlap_witness(&unit).unwrap().unwrap();
        assert_eq!((w.i, w.k, w.j, w.ell), (0, 1, 0, 4));
        assert!(w.strictly_interior);
        assert_eq!(w.block(), AddressPrefix(vec![1, 0, 0, 0]));
        assert_eq!(w.family(2).count, 16);
    }

    #[test]
    fn witness_for_triangles() {
        assert_eq!(vertex_overlap_witness(&tri(0.5)).unwrap(), None);
        let w = vertex_overlap_witness(&tri(0.7)).unwrap().unwrap();
        assert_eq!(w.ell, 3);
        assert!(!w.strictly_interior);
        // re-verify both invariants
        let sys = tri(0.7);
        let vertex = sys.apply_map(w.k, &sys.points()[w.j]).unwrap();
        assert!(image_polytope(&sys, &vec![w.i].into()).unwrap().contains(&vertex, &Membership::Closed).unwrap());
        let img = image_polytope(&sys, &w.block()).unwrap();
        let fi = image_polytope(&sys, &vec![w.i].into()).unwrap();
        let fk = image_polytope(&sys, &vec![w.k].into()).unwrap();
        for v in img.generators() {
            assert!(fi.contains(v, &Membership::Closed).unwrap());
            assert!(fk.contains(v, &Membership::Closed).unwrap());
        }
    }

    #[test]
    fn pedicini_examples() {
        let a = DigitSet::new(vec![0.0, 1.0]).unwrap();
        let c = pedicini_holds(&a, 0.6);
        assert!(c.holds);
        assert_eq!(c.max_gap, 1.0);
        assert!((c.bound - 1.5).abs() < 1e-12);
        let a = DigitSet::new(vec![0.0, 1.0, 3.0]).unwrap();
        let c = pedicini_holds(&a, 0.45);
        assert!(c.holds);
        assert!((c.bound - 2.454545454545).abs() < 1e-9);
        let c = pedicini_holds(&a, 0.35);
        assert!(!c.holds);
        assert!((c.bound - 1.615384615384).abs() < 1e-9);
    }

    #[test]
    fn covering_examples() {
        assert_eq!(covering_deficiency(&tri(0.7), 5, 2000, 1).fraction, 0.0);
        let e = covering_deficiency(&tri(0.5), 6, 20_000, 2);
        let expected = 1.0 - 0.75f64.powi(6);
        assert!((e.fraction - expected).abs() < 4.0 * e.stderr, "{e:?}");
        let cantor = IfsSystem::new(0.45, vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(covering_deficiency(&cantor, 8, 2000, 3).fraction > 0.0);
    }

    #[test]
    fn wn_basic_cases() {
        let sys = tri(0.7);
        let cert = certify_no_holes(&sys).unwrap();
        let w = vertex_overlap_witness(&sys).unwrap().unwrap();
        let fam = w.family(3);
        let inside = sys.project_prefix(&fam.block0, &[0.2, 0.2]).unwrap();
        assert!(wn_membership(&sys, &fam, &inside, 1, &cert).unwrap());
        assert!(!wn_membership(&sys, &fam, &inside, 0, &cert).unwrap());
        // vertex p_2 only has the constant address 222…
        assert!(!wn_membership(&sys, &fam, &[0.0, 1.0], 6, &cert).unwrap());
        assert_eq!(
            wn_membership(&sys, &fam, &[2.0, 2.0], 3, &cert),
            Err(Error::PointOutsideOmega)
        );
    }
}
