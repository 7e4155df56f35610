//! The similitude family `f_j(x) = λx + (1-λ)p_j` sharing one ratio.

use std::fmt;

use num_rational::BigRational;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::scalar::{parse_rational, Scalar};

/// A finite address prefix `(i_1, …, i_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct AddressPrefix(pub Vec<usize>);

impl AddressPrefix {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Rejects digits that are not below `m`.
    pub fn checked(digits: Vec<usize>, m: usize) -> Result<Self> {
        if let Some(&digit) = digits.iter().find(|&&d| d >= m) {
            return Err(Error::DigitOutOfRange { digit, m });
        }
        Ok(Self(digits))
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by `digit`.
    pub fn child(&self, digit: usize) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(digit);
        Self(v)
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &AddressPrefix) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }
}

impl From<Vec<usize>> for AddressPrefix {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for AddressPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            if *d < 10 {
                write!(f, "{d}")?;
            } else {
                write!(f, "[{d}]")?;
            }
        }
        Ok(())
    }
}

/// One ratio, `m` anchor points in `R^d`, and their convex hull `Ω`.
#[derive(Debug, Clone)]
pub struct IfsSystem<S = f64> {
    lambda: S,
    points: Vec<Vec<S>>,
    /// `(1-λ)p_j`, the translation part of `f_j`.
    shifts: Vec<Vec<S>>,
    omega: Polytope<S>,
}

impl<S: Scalar> IfsSystem<S> {
    pub fn new(lambda: S, points: Vec<Vec<S>>) -> Result<Self> {
        if !(lambda > S::zero() && lambda < S::one()) {
            return Err(Error::LambdaOutOfRange(lambda.to_f64_lossy()));
        }
        if points.len() < 2 {
            return Err(Error::TooFewPoints(points.len()));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::InvalidInput("points must have at least one coordinate".into()));
        }
        for p in &points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoints(i, j));
                }
            }
        }
        let affine = affine_rank(&points);
        if affine != d {
            return Err(Error::DegenerateAffineHull { affine, ambient: d });
        }
        let one_minus = S::one() - lambda.clone();
        let shifts = points
            .iter()
            .map(|p| p.iter().map(|c| one_minus.clone() * c.clone()).collect())
            .collect();
        let omega = Polytope::new(points.clone())?;
        Ok(Self { lambda, points, shifts, omega })
    }

    /// Replaces the closed-membership tolerance used for `Ω` and its images.
    pub fn with_tolerance(mut self, tol: S) -> Self {
        self.omega = self.omega.with_tolerance(tol);
        self
    }

    pub fn lambda(&self) -> &S {
        &self.lambda
    }

    pub fn points(&self) -> &[Vec<S>] {
        &self.points
    }

    pub fn omega(&self) -> &Polytope<S> {
        &self.omega
    }

    /// Number of maps.
    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Ambient dimension.
    pub fn d(&self) -> usize {
        self.points[0].len()
    }

    pub fn diameter(&self) -> f64 {
        self.omega.diameter()
    }

    pub fn centroid(&self) -> Vec<S> {
        let m = S::from_usize_exact(self.m());
        (0..self.d())
            .map(|i| {
                self.points.iter().fold(S::zero(), |acc, p| acc + p[i].clone()) / m.clone()
            })
            .collect()
    }

    fn check_digit(&self, j: usize) -> Result<()> {
        if j >= self.m() {
            return Err(Error::DigitOutOfRange { digit: j, m: self.m() });
        }
        Ok(())
    }

    fn check_point(&self, x: &[S]) -> Result<()> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: x.len() });
        }
        Ok(())
    }

    pub fn apply_map(&self, j: usize, x: &[S]) -> Result<Vec<S>> {
        self.check_digit(j)?;
        self.check_point(x)?;
        Ok(self.map_unchecked(j, x))
    }

    pub fn apply_inverse(&self, j: usize, x: &[S]) -> Result<Vec<S>> {
        self.check_digit(j)?;
        self.check_point(x)?;
        Ok(self.inverse_unchecked(j, x))
    }

    pub(crate) fn map_unchecked(&self, j: usize, x: &[S]) -> Vec<S> {
        x.iter()
            .zip(&self.shifts[j])
            .map(|(c, s)| self.lambda.clone() * c.clone() + s.clone())
            .collect()
    }

    pub(crate) fn inverse_unchecked(&self, j: usize, x: &[S]) -> Vec<S> {
        x.iter()
            .zip(&self.shifts[j])
            .map(|(c, s)| (c.clone() - s.clone()) / self.lambda.clone())
            .collect()
    }

    /// `f_{i_1} ∘ … ∘ f_{i_n}(x0)`, innermost digit applied first.
    pub fn project_prefix(&self, w: &AddressPrefix, x0: &[S]) -> Result<Vec<S>> {
        self.check_point(x0)?;
        for &j in w.digits() {
            self.check_digit(j)?;
        }
        let mut x = x0.to_vec();
        for &j in w.digits().iter().rev() {
            x = self.map_unchecked(j, &x);
        }
        Ok(x)
    }
}

impl IfsSystem<f64> {
    /// Float copy of an exact system.
    pub fn from_exact(exact: &IfsSystem<BigRational>) -> Result<Self> {
        let lambda = exact.lambda().to_f64_lossy();
        let points = exact
            .points()
            .iter()
            .map(|p| p.iter().map(Scalar::to_f64_lossy).collect())
            .collect();
        IfsSystem::new(lambda, points)
    }
}

/// Rank of `{p_j - p_0}` by Gaussian elimination with partial pivoting.
fn affine_rank<S: Scalar>(points: &[Vec<S>]) -> usize {
    let d = points[0].len();
    let mut rows: Vec<Vec<S>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a.clone() - b.clone()).collect())
        .collect();
    let scale = rows
        .iter()
        .flatten()
        .map(|v| v.abs().to_f64_lossy())
        .fold(0.0f64, f64::max);
    let eps: S = if S::EXACT {
        S::zero()
    } else {
        S::from_f64(1e-12 * scale.max(1.0)).unwrap_or_else(S::zero)
    };
    let mut rank = 0;
    for col in 0..d {
        let pivot = (rank..rows.len())
            .max_by(|&a, &b| rows[a][col].abs().partial_cmp(&rows[b][col].abs()).unwrap())
            .filter(|&r| rows[r][col].abs() > eps);
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            let f = rows[r][col].clone() / rows[rank][col].clone();
            for c in col..d {
                let v = rows[rank][c].clone() * f.clone();
                rows[r][c] = rows[r][c].clone() - v;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// A number as written in an IFS file, kept verbatim so the exact path can
/// read `0.55` as `11/20` rather than its binary approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberText(pub String);

impl NumberText {
    pub fn to_f64(&self) -> Result<f64> {
        match self.0.trim().parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => Ok(parse_rational(&self.0)?.to_f64_lossy()),
        }
    }

    pub fn to_rational(&self) -> Result<BigRational> {
        parse_rational(&self.0)
    }
}

/// Parsed contents of an IFS definition file:
/// `{"lambda": 0.7, "points": [[0,0],[1,0],[0,1]], "probs": [..]?}`.
///
/// Numbers may also be given as strings such as `"3/5"`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsFile {
    pub lambda: NumberText,
    pub points: Vec<Vec<NumberText>>,
    pub probs: Option<Vec<f64>>,
}

fn number_text(v: &Value, what: &str) -> Result<NumberText> {
    match v {
        Value::Number(n) => Ok(NumberText(n.to_string())),
        Value::String(s) => {
            parse_rational(s)?;
            Ok(NumberText(s.clone()))
        }
        _ => Err(Error::InvalidInput(format!("{what} must be a number"))),
    }
}

impl IfsFile {
    pub fn parse(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("IFS file is not valid JSON: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::InvalidInput("IFS file must be a JSON object".into()))?;
        let lambda = number_text(
            obj.get("lambda").ok_or_else(|| Error::InvalidInput("missing \"lambda\"".into()))?,
            "lambda",
        )?;
        let points = obj
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("missing \"points\" array".into()))?
            .iter()
            .map(|p| {
                p.as_array()
                    .ok_or_else(|| Error::InvalidInput("each point must be an array".into()))?
                    .iter()
                    .map(|c| number_text(c, "coordinate"))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let probs = match obj.get("probs") {
            None | Some(Value::Null) => None,
            Some(v) => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| Error::BadProbabilityVector("\"probs\" must be an array".into()))?;
                let probs = arr
                    .iter()
                    .map(|p| number_text(p, "probability")?.to_f64())
                    .collect::<Result<Vec<_>>>()?;
                validate_probs(&probs, points.len())?;
                Some(probs)
            }
        };
        Ok(Self { lambda, points, probs })
    }

    pub fn to_float(&self) -> Result<IfsSystem<f64>> {
        let lambda = self.lambda.to_f64()?;
        let points = self
            .points
            .iter()
            .map(|p| p.iter().map(NumberText::to_f64).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        IfsSystem::new(lambda, points)
    }

    pub fn to_exact(&self) -> Result<IfsSystem<BigRational>> {
        let lambda = self.lambda.to_rational()?;
        let points = self
            .points
            .iter()
            .map(|p| p.iter().map(NumberText::to_rational).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        IfsSystem::new(lambda, points)
    }
}

/// Entries non-negative, summing to 1 within 1e-9, one per map.
pub fn validate_probs(probs: &[f64], m: usize) -> Result<()> {
    if probs.len() != m {
        return Err(Error::BadProbabilityVector(format!(
            "expected {m} entries, got {}",
            probs.len()
        )));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::BadProbabilityVector("entries must be non-negative".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadProbabilityVector(format!("entries sum to {sum}, not 1")));
    }
    Ok(())
}
