//! Planar convex hull (monotone chain) over any [`Scalar`].

use std::cmp::Ordering;

use crate::scalar::Scalar;

fn cross<S: Scalar>(o: &[S], a: &[S], b: &[S]) -> S {
    (a[0].clone() - o[0].clone()) * (b[1].clone() - o[1].clone())
        - (a[1].clone() - o[1].clone()) * (b[0].clone() - o[0].clone())
}

fn lex<S: Scalar>(a: &[S], b: &[S]) -> Ordering {
    a[0].partial_cmp(&b[0])
        .unwrap_or(Ordering::Equal)
        .then(a[1].partial_cmp(&b[1]).unwrap_or(Ordering::Equal))
}

/// Counter-clockwise hull vertices with collinear points dropped.
pub fn convex_hull_2d<S: Scalar>(points: &[Vec<S>]) -> Vec<Vec<S>> {
    let mut pts: Vec<Vec<S>> = points.to_vec();
    pts.sort_by(|a, b| lex(a, b));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<S>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= S::zero() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<S>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= S::zero() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Signed shoelace area of a polygon given in order.
pub fn shoelace<S: Scalar>(poly: &[Vec<S>]) -> S {
    let n = poly.len();
    if n < 3 {
        return S::zero();
    }
    let mut twice = S::zero();
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        twice = twice + a[0].clone() * b[1].clone() - b[0].clone() * a[1].clone();
    }
    twice / S::from_usize_exact(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 4);
        assert!((shoelace(&hull) - 1.0).abs() < 1e-15);
    }
}
