//! Expansions `x = Σ ε_n λ^n` with digits drawn from a finite real set,
//! handled as the IFS `f_j(x) = λ(x + a_j)`.

use num_rational::BigRational;

use crate::address::{
    classify_point, first_bifurcation, ClassificationReport, FeasibilityMode, NoHolesCertificate,
    NoHolesReason, SearchOptions,
};
use crate::conditions::pedicini_holds;
use crate::error::{Error, Result};
use crate::ifs::IfsSystem;
use crate::scalar::{rational_from_f64, Scalar};

/// Komornik–Loreti constant for the digit set {0, 1}, as cited (6 digits).
pub const KOMORNIK_LORETI: f64 = 0.559525;

/// Digits `a_1 < … < a_m`, `m >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitSet(Vec<f64>);

impl DigitSet {
    pub fn new(digits: Vec<f64>) -> Result<Self> {
        if digits.len() < 2 {
            return Err(Error::TooFewPoints(digits.len()));
        }
        if digits.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidInput("digits must be finite".into()));
        }
        if digits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedDigits);
        }
        Ok(Self(digits))
    }

    /// Parses `"0,1,3"`.
    pub fn parse(text: &str) -> Result<Self> {
        let digits = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad digit {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(digits)
    }

    pub fn digits(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `[λa_1/(1-λ), λa_m/(1-λ)]`, the hull of all expansions.
pub fn attractor_interval(digits: &DigitSet, lambda: f64) -> (f64, f64) {
    let a = digits.digits();
    let s = lambda / (1.0 - lambda);
    (s * a[0], s * a[a.len() - 1])
}

/// The equivalent one-ratio IFS: anchor `p_j = λa_j/(1-λ)`.
pub fn as_ifs(digits: &DigitSet, lambda: f64) -> Result<IfsSystem<f64>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let s = lambda / (1.0 - lambda);
    IfsSystem::new(lambda, digits.digits().iter().map(|a| vec![s * a]).collect())
}

/// Exact counterpart of [`as_ifs`] for rational digits and ratio.
pub fn as_exact_ifs(digits: &[BigRational], lambda: &BigRational) -> Result<IfsSystem<BigRational>> {
    if digits.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedDigits);
    }
    let one = BigRational::from_integer(1.into());
    if !(lambda > &BigRational::from_integer(0.into()) && lambda < &one) {
        return Err(Error::LambdaOutOfRange(lambda.to_f64_lossy()));
    }
    let s = lambda / (one - lambda);
    IfsSystem::new(lambda.clone(), digits.iter().map(|a| vec![&s * a]).collect())
}

/// No-holes certificate backed by Pedicini's condition.
pub fn certify_pedicini<S: Scalar>(
    digits: &DigitSet,
    sys: &IfsSystem<S>,
) -> Option<NoHolesCertificate> {
    pedicini_holds(digits, sys.lambda().to_f64_lossy())
        .holds
        .then(|| NoHolesCertificate::issue(sys, NoHolesReason::Pedicini))
}

/// Classifies the expansions of `x` on the exact path.
///
/// The float inputs are taken at their exact binary values, so certificates
/// speak about the IFS those floats denote. When Pedicini's condition holds
/// the search runs in no-holes mode.
pub fn count_expansions(
    digits: &DigitSet,
    lambda: f64,
    x: f64,
    depth: usize,
    opts: &SearchOptions,
) -> Result<ClassificationReport> {
    let (lo, hi) = attractor_interval(digits, lambda);
    if !(x >= lo && x <= hi) {
        return Err(Error::PointOutsideOmega);
    }
    let q_lambda = rational_from_f64(lambda)?;
    let q_digits = digits.digits().iter().map(|&a| rational_from_f64(a)).collect::<Result<Vec<_>>>()?;
    let sys = as_exact_ifs(&q_digits, &q_lambda)?;
    let mode = match certify_pedicini(digits, &sys) {
        Some(cert) => FeasibilityMode::ExactNoHoles(cert),
        None => FeasibilityMode::RelaxedOmega,
    };
    // the float interval check above can differ from the exact hull in the last ulp
    let qx = rational_from_f64(x)?;
    let qx = clamp_into(&sys, qx);
    classify_point(&sys, &[qx], depth, &mode, opts)
}

fn clamp_into(sys: &IfsSystem<BigRational>, x: BigRational) -> BigRational {
    let (lo, hi) = sys.omega().bounding_box();
    if x < lo[0] {
        lo[0].clone()
    } else if x > hi[0] {
        hi[0].clone()
    } else {
        x
    }
}

/// Index `j` such that `f_j(Ω)` and `f_{j+1}(Ω)` overlap in an interval of
/// positive length, if any.
pub fn overlapping_adjacent_pair(digits: &DigitSet, lambda: f64) -> Option<usize> {
    let (lo, hi) = attractor_interval(digits, lambda);
    digits.digits().windows(2).position(|w| hi - lo > w[1] - w[0])
}

/// Smallest λ of an ascending grid from which on every interior grid point
/// bifurcates within `depth`. An empirical stand-in for the threshold whose
/// existence is known but has no formula.
pub fn estimate_full_branching_lambda(
    digits: &DigitSet,
    lambdas: &[f64],
    points: usize,
    depth: usize,
) -> Result<Option<f64>> {
    let mut answer = None;
    for &lambda in lambdas.iter().rev() {
        let sys = as_ifs(digits, lambda)?;
        let (lo, hi) = attractor_interval(digits, lambda);
        let mut all = true;
        for k in 1..=points {
            let x = lo + (hi - lo) * k as f64 / (points + 1) as f64;
            if first_bifurcation(&sys, &[x], depth, &FeasibilityMode::RelaxedOmega)?.is_none() {
                all = false;
                break;
            }
        }
        if !all {
            break;
        }
        answer = Some(lambda);
    }
    Ok(answer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::Verdict;
    use crate::ifs::AddressPrefix;

    #[test]
    fn digit_set_validation() {
        assert_eq!(DigitSet::new(vec![0.0, 1.0, 1.0]).unwrap_err(), Error::UnsortedDigits);
        assert_eq!(DigitSet::new(vec![3.0, 1.0]).unwrap_err(), Error::UnsortedDigits);
        assert_eq!(DigitSet::new(vec![0.0]).unwrap_err(), Error::TooFewPoints(1));
        assert_eq!(DigitSet::parse("0, 1,3").unwrap().digits(), &[0.0, 1.0, 3.0]);
        assert!(DigitSet::parse("0,x").is_err());
    }

    #[test]
    fn interval_examples() {
        let (lo, hi) = attractor_interval(&DigitSet::new(vec![0.0, 1.0]).unwrap(), 0.6);
        assert_eq!(lo, 0.0);
        assert!((hi - 1.5).abs() < 1e-12);
        let (_, hi) = attractor_interval(&DigitSet::new(vec![0.0, 1.0, 3.0]).unwrap(), 0.45);
        assert!((hi - 2.454545454545).abs() < 1e-9);
        let (lo, hi) = attractor_interval(&DigitSet::new(vec![-1.0, 1.0]).unwrap(), 0.5);
        assert_eq!((lo, hi), (-1.0, 1.0));
    }

    #[test]
    fn ifs_anchors_and_partial_sums() {
        let sys = as_ifs(&DigitSet::new(vec![0.0, 1.0]).unwrap(), 0.6).unwrap();
        assert!((sys.points()[1][0] - 1.5).abs() < 1e-12);
        let sys = as_ifs(&DigitSet::new(vec![0.0, 1.0, 3.0]).unwrap(), 0.45).unwrap();
        // ε = (1, 3) → 0.45·1 + 0.45²·3
        let v = sys.project_prefix(&AddressPrefix(vec![1, 2]), &[0.0]).unwrap()[0];
        assert!((v - 1.0575).abs() < 1e-12);
    }

    #[test]
    fn counting_examples() {
        let opts = SearchOptions::default();
        let a = DigitSet::new(vec![0.0, 1.0]).unwrap();
        let rep = count_expansions(&a, 0.63, 0.8, 50, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::MultipleCertified);

        let rep = count_expansions(&a, 0.63, 0.0, 50, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::UniqueCertified);
        assert_eq!(rep.certificate.unwrap().cycle, AddressPrefix(vec![0]));

        let b = DigitSet::new(vec![0.0, 1.0, 3.0]).unwrap();
        let rep = count_expansions(&b, 0.45, 1.2, 60, &opts).unwrap();
        assert!(rep.first_bifurcation.is_some());
        assert_eq!(count_expansions(&b, 0.45, 3.0, 10, &opts).unwrap_err(), Error::PointOutsideOmega);
    }

    #[test]
    fn pedicini_gives_an_overlap() {
        let b = DigitSet::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert!(overlapping_adjacent_pair(&b, 0.45).is_some());
        let c = DigitSet::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(overlapping_adjacent_pair(&c, 0.45), None);
    }

    #[test]
    fn full_branching_scan_lands_near_golden_ratio() {
        let a = DigitSet::new(vec![0.0, 1.0]).unwrap();
        let grid: Vec<f64> = (50..=80).map(|k| k as f64 / 100.0).collect();
        let est = estimate_full_branching_lambda(&a, &grid, 199, 60).unwrap().unwrap();
        assert!((0.6..=0.7).contains(&est), "{est}");
    }
}
