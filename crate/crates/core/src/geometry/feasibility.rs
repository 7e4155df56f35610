//! Phase-one simplex deciding whether a point is a convex combination of
//! generators. Bland's rule keeps it terminating on degenerate pivots.

use crate::scalar::Scalar;

/// Returns true iff `x = Σ w_i g_i`, `Σ w_i = 1`, `w ≥ 0` is feasible, up to `eps`.
pub fn convex_combination_feasible<S: Scalar>(generators: &[Vec<S>], x: &[S], eps: &S) -> bool {
    let m = generators.len();
    let d = x.len();
    let rows = d + 1;
    // columns: m weights, `rows` artificials, rhs
    let cols = m + rows + 1;
    let rhs = cols - 1;
    let mut t: Vec<Vec<S>> = vec![vec![S::zero(); cols]; rows];
    for r in 0..rows {
        for (j, g) in generators.iter().enumerate() {
            t[r][j] = if r < d { g[r].clone() } else { S::one() };
        }
        t[r][rhs] = if r < d { x[r].clone() } else { S::one() };
        if t[r][rhs] < S::zero() {
            for c in 0..m {
                t[r][c] = -t[r][c].clone();
            }
            t[r][rhs] = -t[r][rhs].clone();
        }
        t[r][m + r] = S::one();
    }
    let mut basis: Vec<usize> = (0..rows).map(|r| m + r).collect();

    // reduced cost row of the phase-one objective (sum of artificials)
    let mut cost: Vec<S> = vec![S::zero(); cols];
    for row in &t {
        for c in 0..cols {
            if c < m || c == rhs {
                cost[c] = cost[c].clone() + row[c].clone();
            }
        }
    }

    let max_iter = 50 * (cols + rows);
    for _ in 0..max_iter {
        let entering = (0..m + rows).find(|&c| !basis.contains(&c) && cost[c] > *eps);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, S)> = None;
        for r in 0..rows {
            if t[r][e] > *eps {
                let ratio = t[r][rhs].clone() / t[r][e].clone();
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // unbounded cannot happen for a phase-one program
        let Some((l, _)) = leave else { break };
        let pivot = t[l][e].clone();
        for c in 0..cols {
            t[l][c] = t[l][c].clone() / pivot.clone();
        }
        for r in 0..rows {
            if r != l && !t[r][e].is_zero() {
                let f = t[r][e].clone();
                for c in 0..cols {
                    let v = t[l][c].clone() * f.clone();
                    t[r][c] = t[r][c].clone() - v;
                }
            }
        }
        let f = cost[e].clone();
        for c in 0..cols {
            cost[c] = cost[c].clone() - t[l][c].clone() * f.clone();
        }
        basis[l] = e;
    }
    // remaining infeasibility equals the objective value
    cost[rhs] <= *eps
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn tetrahedron_membership_exact() {
        let g: Vec<Vec<BigRational>> = vec![
            vec![q(0, 1), q(0, 1), q(0, 1)],
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1)],
        ];
        let eps = q(0, 1);
        assert!(convex_combination_feasible(&g, &[q(1, 4), q(1, 4), q(1, 4)], &eps));
        assert!(convex_combination_feasible(&g, &[q(1, 3), q(1, 3), q(1, 3)], &eps));
        assert!(!convex_combination_feasible(&g, &[q(1, 3), q(1, 3), q(1, 3) + q(1, 1000)], &eps));
        assert!(!convex_combination_feasible(&g, &[q(-1, 1000), q(0, 1), q(0, 1)], &eps));
    }

    #[test]
    fn cube_membership_float() {
        let mut g = Vec::new();
        for i in 0..8u32 {
            g.push((0..3).map(|b| f64::from((i >> b) & 1)).collect::<Vec<f64>>());
        }
        assert!(convex_combination_feasible(&g, &[0.5, 0.2, 0.9], &1e-9));
        assert!(convex_combination_feasible(&g, &[1.0, 1.0, 1.0], &1e-9));
        assert!(!convex_combination_feasible(&g, &[0.5, 1.01, 0.5], &1e-9));
    }
}
