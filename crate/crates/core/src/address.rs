//! Address enumeration through the multivalued inverse map.
//!
//! A prefix `(i_1, …, i_n)` is kept while its remainder
//! `f_{i_n}^{-1} ∘ … ∘ f_{i_1}^{-1}(x)` stays in `Ω`. Because the attractor
//! sits inside `Ω`, this over-approximates the true prefixes of `x`, so a
//! single surviving chain bounds the address count from above. When the
//! attractor is known to fill `Ω` the test is exact and two surviving
//! children certify two addresses.

use std::collections::HashMap;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Membership;
use crate::ifs::{AddressPrefix, IfsSystem};
use crate::scalar::Scalar;

/// Default cap on the number of tree nodes a single query may create.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Interior margin both children of a float-path bifurcation must clear.
pub const DEFAULT_CERTIFY_MARGIN: f64 = 1e-9;

const PARALLEL_FRONTIER: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoHolesReason {
    /// `λ >= d/(d+1)`.
    DimensionThreshold,
    /// Largest digit gap below `λ(a_m - a_1)/(1-λ)`.
    Pedicini,
}

/// Evidence that the attractor equals `Ω`. Only the condition checks in
/// this crate can issue one.
#[derive(Debug, Clone, PartialEq)]
pub struct NoHolesCertificate {
    lambda: f64,
    m: usize,
    d: usize,
    reason: NoHolesReason,
}

impl NoHolesCertificate {
    pub(crate) fn issue<S: Scalar>(sys: &IfsSystem<S>, reason: NoHolesReason) -> Self {
        Self { lambda: sys.lambda().to_f64_lossy(), m: sys.m(), d: sys.d(), reason }
    }

    pub fn reason(&self) -> NoHolesReason {
        self.reason
    }

    fn matches<S: Scalar>(&self, sys: &IfsSystem<S>) -> bool {
        self.lambda == sys.lambda().to_f64_lossy() && self.m == sys.m() && self.d == sys.d()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityMode {
    /// Keep a digit when its remainder lies in `Ω`; a superset of true digits.
    RelaxedOmega,
    /// Same test, known to be exact because the attractor has no holes.
    ExactNoHoles(NoHolesCertificate),
}

impl FeasibilityMode {
    pub fn no_holes(&self) -> bool {
        matches!(self, FeasibilityMode::ExactNoHoles(_))
    }

    fn validate<S: Scalar>(&self, sys: &IfsSystem<S>, x: &[S]) -> Result<()> {
        if x.len() != sys.d() {
            return Err(Error::DimensionMismatch { expected: sys.d(), got: x.len() });
        }
        if let FeasibilityMode::ExactNoHoles(cert) = self {
            if !cert.matches(sys) {
                return Err(Error::CertificateMismatch);
            }
            if !sys.omega().contains_unchecked(x, &Membership::Closed) {
                return Err(Error::PointOutsideOmega);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub node_budget: usize,
    pub certify_margin: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { node_budget: DEFAULT_NODE_BUDGET, certify_margin: DEFAULT_CERTIFY_MARGIN }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixNode<S = f64> {
    pub prefix: AddressPrefix,
    pub remainder: Vec<S>,
    pub depth: usize,
}

impl<S: Scalar> PrefixNode<S> {
    pub fn root(x: &[S]) -> Self {
        Self { prefix: AddressPrefix::empty(), remainder: x.to_vec(), depth: 0 }
    }
}

/// Digits `i` whose remainder `f_i^{-1}(x)` lies in the closed `Ω`.
pub fn feasible_children<S: Scalar>(
    sys: &IfsSystem<S>,
    x: &[S],
    mode: &FeasibilityMode,
) -> Result<Vec<usize>> {
    mode.validate(sys, x)?;
    Ok(children_of(sys, x).into_iter().map(|(d, _)| d).collect())
}

fn children_of<S: Scalar>(sys: &IfsSystem<S>, x: &[S]) -> Vec<(usize, Vec<S>)> {
    (0..sys.m())
        .filter_map(|j| {
            let r = sys.inverse_unchecked(j, x);
            sys.omega().contains_unchecked(&r, &Membership::Closed).then_some((j, r))
        })
        .collect()
}

fn expand<S: Scalar>(sys: &IfsSystem<S>, node: &PrefixNode<S>) -> Vec<PrefixNode<S>> {
    children_of(sys, &node.remainder)
        .into_iter()
        .map(|(d, r)| PrefixNode { prefix: node.prefix.child(d), remainder: r, depth: node.depth + 1 })
        .collect()
}

/// Children of every frontier node, grouped per parent in frontier order.
fn expand_level<S: Scalar>(sys: &IfsSystem<S>, frontier: &[PrefixNode<S>]) -> Vec<Vec<PrefixNode<S>>> {
    if frontier.len() >= PARALLEL_FRONTIER {
        frontier.par_iter().map(|n| expand(sys, n)).collect()
    } else {
        frontier.iter().map(|n| expand(sys, n)).collect()
    }
}

/// All feasible prefixes, level by level.
#[derive(Debug, Clone)]
pub struct PrefixTree<S = f64> {
    pub levels: Vec<Vec<PrefixNode<S>>>,
}

impl<S> PrefixTree<S> {
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn total_nodes(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

/// Breadth-first tree of feasible prefixes down to `depth`. Prefixes with
/// equal remainders are kept apart: they are different addresses.
pub fn enumerate_prefixes<S: Scalar>(
    sys: &IfsSystem<S>,
    x: &[S],
    depth: usize,
    mode: &FeasibilityMode,
    node_budget: usize,
) -> Result<PrefixTree<S>> {
    mode.validate(sys, x)?;
    let mut levels = vec![vec![PrefixNode::root(x)]];
    let mut total = 1usize;
    for _ in 0..depth {
        let next: Vec<PrefixNode<S>> =
            expand_level(sys, levels.last().expect("root level")).into_iter().flatten().collect();
        total += next.len();
        if total > node_budget {
            return Err(Error::BudgetExceeded(node_budget));
        }
        let done = next.is_empty();
        levels.push(next);
        if done {
            break;
        }
    }
    Ok(PrefixTree { levels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    UniqueCertified,
    MultipleCertified,
    MultipleLikely,
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::UniqueCertified => "UniqueCertified",
            Verdict::MultipleCertified => "MultipleCertified",
            Verdict::MultipleLikely => "MultipleLikely",
            Verdict::Unknown => "Unknown",
        }
    }
}

/// The single chain revisits a remainder exactly, so the address is
/// `prefix · cycle^∞` and nothing else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCertificate {
    pub prefix: AddressPrefix,
    pub cycle: AddressPrefix,
}

impl CycleCertificate {
    pub fn period(&self) -> usize {
        self.cycle.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub explored_depth: usize,
    pub first_bifurcation: Option<usize>,
    /// Number of feasible prefixes at each depth, starting with the root.
    pub prefix_counts: Vec<usize>,
    pub certificate: Option<CycleCertificate>,
    /// Depth at which every prefix died: the point is not in the attractor.
    pub dead_end: Option<usize>,
}

/// Classifies `x` from its prefix tree down to `depth`.
///
/// * `UniqueCertified`: one feasible child at every step and an exact
///   remainder repeat (exact path only).
/// * `MultipleCertified`: no-holes mode and some node has two children whose
///   remainders lie in `Ω` (float path: with the interior margin).
/// * `MultipleLikely`: a bifurcation whose branches both reach the horizon.
/// * `Unknown`: anything else, including a chain that never repeats.
pub fn classify_point<S: Scalar>(
    sys: &IfsSystem<S>,
    x: &[S],
    depth: usize,
    mode: &FeasibilityMode,
    opts: &SearchOptions,
) -> Result<ClassificationReport> {
    mode.validate(sys, x)?;
    let mut report = ClassificationReport {
        verdict: Verdict::Unknown,
        explored_depth: 0,
        first_bifurcation: None,
        prefix_counts: vec![1],
        certificate: None,
        dead_end: None,
    };
    if !sys.omega().contains_unchecked(x, &Membership::Closed) {
        report.prefix_counts = vec![0];
        report.dead_end = Some(0);
        return Ok(report);
    }
    let margin = if S::EXACT {
        Membership::Closed
    } else {
        Membership::InteriorMargin(S::from_f64(opts.certify_margin).unwrap_or_else(S::zero))
    };
    let mut seen: HashMap<Vec<BigRational>, usize> = HashMap::new();
    if S::EXACT {
        seen.insert(exact_key(x), 0);
    }
    let mut frontier = vec![PrefixNode::root(x)];
    let mut total = 1usize;
    for level in 0..depth {
        let groups = expand_level(sys, &frontier);
        if frontier.len() == 1 && report.first_bifurcation.is_none() && groups[0].len() >= 2 {
            report.first_bifurcation = Some(level);
        }
        let certified = mode.no_holes()
            && groups.iter().any(|kids| {
                kids.iter()
                    .filter(|k| sys.omega().contains_unchecked(&k.remainder, &margin))
                    .take(2)
                    .count()
                    == 2
            });
        frontier = groups.into_iter().flatten().collect();
        total += frontier.len();
        report.prefix_counts.push(frontier.len());
        report.explored_depth = level + 1;
        if certified {
            report.verdict = Verdict::MultipleCertified;
            return Ok(report);
        }
        if frontier.is_empty() {
            report.dead_end = Some(level + 1);
            return Ok(report);
        }
        if total > opts.node_budget {
            return Err(Error::BudgetExceeded(opts.node_budget));
        }
        if S::EXACT && frontier.len() == 1 && report.first_bifurcation.is_none() {
            let node = &frontier[0];
            let key = exact_key(&node.remainder);
            if let Some(&start) = seen.get(&key) {
                let digits = node.prefix.digits();
                report.verdict = Verdict::UniqueCertified;
                report.certificate = Some(CycleCertificate {
                    prefix: digits[..start].to_vec().into(),
                    cycle: digits[start..].to_vec().into(),
                });
                return Ok(report);
            }
            seen.insert(key, level + 1);
        }
    }
    if report.first_bifurcation.is_some() && frontier.len() >= 2 {
        report.verdict = Verdict::MultipleLikely;
    }
    Ok(report)
}

fn exact_key<S: Scalar>(v: &[S]) -> Vec<BigRational> {
    v.iter().map(|c| c.exact_key().expect("exact scalar")).collect()
}

/// Least `n` such that two different digits can follow a common prefix of
/// length `n`; `None` when the chain never splits within `depth`.
pub fn first_bifurcation<S: Scalar>(
    sys: &IfsSystem<S>,
    x: &[S],
    depth: usize,
    mode: &FeasibilityMode,
) -> Result<Option<usize>> {
    mode.validate(sys, x)?;
    if !sys.omega().contains_unchecked(x, &Membership::Closed) {
        return Ok(None);
    }
    let mut current = x.to_vec();
    for level in 0..depth {
        let mut kids = children_of(sys, &current);
        match kids.len() {
            0 => return Ok(None),
            1 => current = kids.pop().expect("one child").1,
            _ => return Ok(Some(level)),
        }
    }
    Ok(None)
}

/// Whether the prefix tree of `x` has exactly one node at every depth up to `depth`.
pub fn is_single_chain<S: Scalar>(sys: &IfsSystem<S>, x: &[S], depth: usize) -> bool {
    if !sys.omega().contains_unchecked(x, &Membership::Closed) {
        return false;
    }
    let mut current = x.to_vec();
    for _ in 0..depth {
        let mut kids = children_of(sys, &current);
        if kids.len() != 1 {
            return false;
        }
        current = kids.pop().expect("one child").1;
    }
    true
}
