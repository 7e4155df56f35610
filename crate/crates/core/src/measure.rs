//! Natural-measure sampling and mesh-cube box counting.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;

use crate::address::{classify_point, FeasibilityMode, SearchOptions, is_single_chain};
use crate::error::{Error, Result};
use crate::geometry::Membership;
use crate::ifs::{validate_probs, AddressPrefix, IfsSystem};
use crate::montecarlo::{sample_ordered, Estimate};

/// Address depth after which the truncation error `λ^n·diam(Ω)` drops below 1e-9.
pub fn default_truncation(lambda: f64) -> usize {
    ((1e-9f64).ln() / lambda.ln()).ceil().max(1.0) as usize
}

/// Draws addresses from a Bernoulli measure and projects them to the attractor.
#[derive(Debug, Clone)]
pub struct MeasureSampler {
    sys: IfsSystem<f64>,
    cumulative: Vec<f64>,
    probs: Vec<f64>,
    seed: u64,
    trunc: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSample {
    pub point: Vec<f64>,
    pub address: AddressPrefix,
}

impl MeasureSampler {
    pub fn new(sys: IfsSystem<f64>, probs: Vec<f64>, seed: u64, trunc: Option<usize>) -> Result<Self> {
        validate_probs(&probs, sys.m())?;
        let trunc = trunc.unwrap_or_else(|| default_truncation(*sys.lambda()));
        if trunc == 0 {
            return Err(Error::InvalidInput("truncation depth must be at least 1".into()));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { sys, cumulative, probs, seed, trunc })
    }

    pub fn uniform(sys: IfsSystem<f64>, seed: u64) -> Result<Self> {
        let m = sys.m();
        Self::new(sys, vec![1.0 / m as f64; m], seed, None)
    }

    pub fn system(&self) -> &IfsSystem<f64> {
        &self.sys
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Upper bound on the distance between a sample and its exact projection.
    pub fn truncation_error(&self) -> f64 {
        self.sys.lambda().powi(self.trunc as i32) * self.sys.diameter()
    }

    fn draw_digit(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        let last = self.cumulative.len() - 1;
        // skip zero-probability digits even when u lands on a boundary
        (0..=last)
            .find(|&j| self.probs[j] > 0.0 && u < self.cumulative[j])
            .unwrap_or_else(|| (0..=last).rev().find(|&j| self.probs[j] > 0.0).unwrap_or(last))
    }

    /// `n` i.i.d. draws, projected from the centroid of `Ω`.
    pub fn sample(&self, n: usize) -> Vec<MeasureSample> {
        let start = self.sys.centroid();
        sample_ordered(n, self.seed, |rng| {
            let digits: Vec<usize> = (0..self.trunc).map(|_| self.draw_digit(rng)).collect();
            let address = AddressPrefix(digits);
            let point = self.sys.project_prefix(&address, &start).expect("valid digits");
            MeasureSample { point, address }
        })
    }
}

pub fn sample_natural_measure(sampler: &MeasureSampler, n: usize) -> Vec<MeasureSample> {
    sampler.sample(n)
}

/// Fraction of `μ`-samples whose prefix tree bifurcates within `depth`.
pub fn mu_bifurcation_fraction(
    sampler: &MeasureSampler,
    n: usize,
    depth: usize,
    mode: &FeasibilityMode,
) -> Result<Estimate> {
    if !mode.no_holes() {
        return Err(Error::InvalidInput("a no-holes certificate is required".into()));
    }
    let sys = sampler.system();
    let opts = SearchOptions::default();
    let samples = sampler.sample(n);
    let hits = samples
        .par_iter()
        .map(|s| {
            // truncation can leave a sample a hair outside Ω
            let p = nudge_inside(sys, &s.point);
            classify_point(sys, &p, depth, mode, &opts).map(|r| r.first_bifurcation.is_some())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(Estimate::from_counts(hits.iter().filter(|&&b| b).count(), n))
}

fn nudge_inside(sys: &IfsSystem<f64>, p: &[f64]) -> Vec<f64> {
    if sys.omega().contains_unchecked(p, &Membership::Closed) {
        return p.to_vec();
    }
    let c = sys.centroid();
    let mut q = p.to_vec();
    for _ in 0..60 {
        q = q.iter().zip(&c).map(|(a, b)| a + 1e-9 * (b - a)).collect();
        if sys.omega().contains_unchecked(&q, &Membership::Closed) {
            break;
        }
    }
    q
}

/// Occupied `ε`-mesh cubes: cell of `x` is `floor(x_i/ε)` per axis.
#[derive(Debug, Clone)]
pub struct MeshGrid {
    pub epsilon: f64,
    pub occupied: HashSet<Vec<i64>>,
}

impl MeshGrid {
    pub fn new(points: &[Vec<f64>], epsilon: f64) -> Self {
        let occupied = points
            .par_iter()
            .fold(HashSet::new, |mut set, p| {
                set.insert(cell_of(p, epsilon));
                set
            })
            .reduce(HashSet::new, |mut a, b| {
                a.extend(b);
                a
            });
        Self { epsilon, occupied }
    }

    pub fn count(&self) -> usize {
        self.occupied.len()
    }
}

pub fn cell_of(p: &[f64], epsilon: f64) -> Vec<i64> {
    p.iter().map(|c| (c / epsilon).floor() as i64).collect()
}

/// `N_ε`: number of `ε`-mesh cubes containing at least one point.
pub fn mesh_count(points: &[Vec<f64>], epsilon: f64) -> Result<usize> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    Ok(MeshGrid::new(points, epsilon).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDimension {
    /// Least-squares slope of `log N_ε` against `log(1/ε)`.
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub fit_residual: f64,
    pub table: Vec<(f64, usize)>,
}

/// Fits the box-counting slope over the supplied scales. No scale selection.
pub fn box_dim_estimate(points: &[Vec<f64>], eps_list: &[f64]) -> Result<BoxDimension> {
    if eps_list.len() < 3 || eps_list.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::TooFewScales(eps_list.len()));
    }
    let table = eps_list
        .iter()
        .map(|&e| Ok((e, mesh_count(points, e)?)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = table.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = table.iter().map(|(_, n)| (*n.max(&1) as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let fit_residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(BoxDimension { slope, fit_residual, table })
}

/// `ε = 2^{-k}` for `k` in `from..=to`.
pub fn dyadic_scales(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// Search depth whose cylinders `λ^n` are no larger than `epsilon`.
///
/// A point at distance `δ` from the set of uniqueness leaves it after about
/// `log δ / log λ` steps, so this depth resolves that set at scale `epsilon`.
pub fn matched_depth(lambda: f64, epsilon: f64) -> usize {
    (epsilon.ln() / lambda.ln()).ceil().max(1.0) as usize
}

/// Cell-centre grid points of `Ω` (`resolution` cells per axis of the
/// bounding box) whose prefix tree is one chain down to `depth`.
///
/// This over-approximates the set of uniqueness and shrinks as `depth`
/// grows; see [`matched_depth`] for pairing depth with a box size.
pub fn uniqueness_grid(
    sys: &IfsSystem<f64>,
    resolution: usize,
    depth: usize,
    mode: &FeasibilityMode,
) -> Result<Vec<Vec<f64>>> {
    if resolution < 8 {
        return Err(Error::InvalidInput("resolution must be at least 8".into()));
    }
    let _ = mode;
    let d = sys.d();
    let (lo, hi) = sys.omega().bounding_box();
    let total = resolution
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidInput("grid too large".into()))?;
    let kept: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .filter_map(|mut idx| {
            let mut p = vec![0.0; d];
            for c in 0..d {
                let k = idx % resolution;
                idx /= resolution;
                p[c] = lo[c] + (hi[c] - lo[c]) * (k as f64 + 0.5) / resolution as f64;
            }
            (sys.omega().contains_unchecked(&p, &Membership::Closed) && is_single_chain(sys, &p, depth))
                .then_some(p)
        })
        .collect();
    Ok(kept)
}
