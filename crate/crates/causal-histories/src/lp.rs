//! Exact linear programming over arbitrary-precision rationals: a dense
//! two-phase simplex with Bland's rule, used for the contextuality
//! fractions and feasibility checks. Variables are implicitly
//! nonnegative; all comparisons are exact, so no tolerances appear
//! anywhere and cycling is ruled out by the pivot rule alone.

use num::{BigRational, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub op: RelOp,
    pub rhs: BigRational,
}

impl Constraint {
    pub fn le(coeffs: Vec<BigRational>, rhs: BigRational) -> Self {
        Constraint { coeffs, op: RelOp::Le, rhs }
    }

    pub fn eq(coeffs: Vec<BigRational>, rhs: BigRational) -> Self {
        Constraint { coeffs, op: RelOp::Eq, rhs }
    }

    pub fn ge(coeffs: Vec<BigRational>, rhs: BigRational) -> Self {
        Constraint { coeffs, op: RelOp::Ge, rhs }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("no nonnegative point satisfies the constraints")]
    Infeasible,
    #[error("objective is unbounded above")]
    Unbounded,
    #[error("constraint has {got} coefficients, expected {want}")]
    Shape { got: usize, want: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub x: Vec<BigRational>,
    pub objective: BigRational,
}

/// Maximize `objective · x` subject to the constraints and `x ≥ 0`.
pub fn maximize(
    objective: &[BigRational],
    constraints: &[Constraint],
) -> Result<LpSolution, LpError> {
    let n = objective.len();
    for c in constraints {
        if c.coeffs.len() != n {
            return Err(LpError::Shape { got: c.coeffs.len(), want: n });
        }
    }

    // Rows with negative right-hand sides are flipped so every row
    // starts with rhs ≥ 0.
    let mut rows: Vec<Constraint> = constraints.to_vec();
    for c in &mut rows {
        if c.rhs.is_negative() {
            c.rhs = -c.rhs.clone();
            for a in &mut c.coeffs {
                *a = -a.clone();
            }
            c.op = match c.op {
                RelOp::Le => RelOp::Ge,
                RelOp::Ge => RelOp::Le,
                RelOp::Eq => RelOp::Eq,
            };
        }
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|c| c.op == RelOp::Le).count();
    let surplus_count = rows.iter().filter(|c| c.op == RelOp::Ge).count();
    let artificial_count = rows.iter().filter(|c| c.op != RelOp::Le).count();

    let slack_offset = n;
    let surplus_offset = slack_offset + slack_count;
    let artificial_offset = surplus_offset + surplus_count;
    let cols = artificial_offset + artificial_count;

    // Column layout: decision | slack | surplus | artificial | rhs. The
    // objective row sits last and holds the reduced costs; entering
    // candidates are the columns with a positive entry there, and the
    // rhs cell carries the negated objective value.
    let mut t = vec![vec![BigRational::zero(); cols + 1]; m + 1];
    let mut basis = vec![0usize; m];
    let mut slack_at = slack_offset;
    let mut surplus_at = surplus_offset;
    let mut artificial_at = artificial_offset;
    for (r, c) in rows.iter().enumerate() {
        t[r][..n].clone_from_slice(&c.coeffs);
        t[r][cols] = c.rhs.clone();
        match c.op {
            RelOp::Le => {
                t[r][slack_at] = BigRational::one_();
                basis[r] = slack_at;
                slack_at += 1;
            }
            RelOp::Ge => {
                t[r][surplus_at] = -BigRational::one_();
                surplus_at += 1;
                t[r][artificial_at] = BigRational::one_();
                basis[r] = artificial_at;
                artificial_at += 1;
            }
            RelOp::Eq => {
                t[r][artificial_at] = BigRational::one_();
                basis[r] = artificial_at;
                artificial_at += 1;
            }
        }
    }

    if artificial_count > 0 {
        // Phase one: maximize minus the artificial sum. Canonicalizing
        // against the artificial basics turns the objective row into
        // the sum of their rows with zeroed artificial columns.
        for r in 0..m {
            if basis[r] >= artificial_offset {
                for col in 0..=cols {
                    let v = t[r][col].clone();
                    t[m][col] += v;
                }
            }
        }
        for col in artificial_offset..cols {
            t[m][col] = BigRational::zero();
        }
        iterate(&mut t, &mut basis, cols)?;
        if !t[m][cols].is_zero() {
            return Err(LpError::Infeasible);
        }
        // Pivot leftover artificial basics out on any live column;
        // rows with none are redundant and stay put at value zero.
        for r in 0..m {
            if basis[r] < artificial_offset {
                continue;
            }
            if let Some(col) = (0..artificial_offset).find(|&c| !t[r][c].is_zero()) {
                pivot(&mut t, &mut basis, r, col);
            }
        }
    }

    // Phase two: the real objective over the feasible basis, with
    // artificial columns frozen out.
    for col in 0..=cols {
        t[m][col] = if col < n { objective[col].clone() } else { BigRational::zero() };
    }
    for r in 0..m {
        let b = basis[r];
        if !t[m][b].is_zero() {
            let f = t[m][b].clone();
            for col in 0..=cols {
                let v = &f * &t[r][col];
                t[m][col] -= v;
            }
        }
    }
    iterate(&mut t, &mut basis, artificial_offset)?;

    let mut x = vec![BigRational::zero(); n];
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = t[r][cols].clone();
        }
    }
    let objective = -t[m][cols].clone();
    Ok(LpSolution { x, objective })
}

/// A nonnegative point satisfying the constraints, if one exists.
pub fn feasible_point(constraints: &[Constraint]) -> Result<Vec<BigRational>, LpError> {
    let n = constraints.iter().map(|c| c.coeffs.len()).max().unwrap_or(0);
    let objective = vec![BigRational::zero(); n];
    maximize(&objective, constraints).map(|s| s.x)
}

trait One_ {
    fn one_() -> Self;
}

impl One_ for BigRational {
    fn one_() -> Self {
        use num::One;
        BigRational::one()
    }
}

/// Bland's rule on both choices: the entering column is the lowest
/// index with a positive reduced cost, the leaving row breaks ratio
/// ties by the lowest basic index. Exhausting positive columns is
/// optimality; a positive column without a positive pivot entry is
/// unboundedness.
fn iterate(
    t: &mut [Vec<BigRational>],
    basis: &mut [usize],
    enterable: usize,
) -> Result<(), LpError> {
    let m = basis.len();
    let cols = t[0].len() - 1;
    loop {
        let Some(entering) = (0..enterable).find(|&c| t[m][c].is_positive()) else {
            return Ok(());
        };
        let mut leaving: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for r in 0..m {
            if !t[r][entering].is_positive() {
                continue;
            }
            let ratio = &t[r][cols] / &t[r][entering];
            let better = match &best {
                None => true,
                Some(b) => ratio < *b || (ratio == *b && basis[r] < basis[leaving.unwrap()]),
            };
            if better {
                best = Some(ratio);
                leaving = Some(r);
            }
        }
        let Some(leaving) = leaving else {
            return Err(LpError::Unbounded);
        };
        pivot(t, basis, leaving, entering);
    }
}

fn pivot(t: &mut [Vec<BigRational>], basis: &mut [usize], leaving: usize, entering: usize) {
    let m = basis.len();
    let cols = t[0].len() - 1;
    let p = t[leaving][entering].clone();
    for col in 0..=cols {
        t[leaving][col] /= &p;
    }
    for r in 0..=m {
        if r == leaving || t[r][entering].is_zero() {
            continue;
        }
        let f = t[r][entering].clone();
        for col in 0..=cols {
            let v = &f * &t[leaving][col];
            t[r][col] -= v;
        }
    }
    basis[leaving] = entering;
}

#[cfg(test)]
mod tests {
    use num::BigInt;

    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn rats(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&n| rat(n, 1)).collect()
    }

    #[test]
    fn two_variable_vertex_optimum() {
        // max x+y subject to x+2y ≤ 4, 3x+y ≤ 6.
        let sol = maximize(
            &rats(&[1, 1]),
            &[
                Constraint::le(rats(&[1, 2]), rat(4, 1)),
                Constraint::le(rats(&[3, 1]), rat(6, 1)),
            ],
        )
        .unwrap();
        assert_eq!(sol.objective, rat(14, 5));
        assert_eq!(sol.x, vec![rat(8, 5), rat(6, 5)]);
    }

    #[test]
    fn cycling_prone_instance_terminates_at_the_optimum() {
        // A classic degenerate instance that cycles under largest-
        // coefficient pivoting; Bland's rule must reach 1/20.
        let objective = vec![rat(3, 4), rat(-150, 1), rat(1, 50), rat(-6, 1)];
        let cons = [
            Constraint::le(
                vec![rat(1, 4), rat(-60, 1), rat(-1, 25), rat(9, 1)],
                rat(0, 1),
            ),
            Constraint::le(
                vec![rat(1, 2), rat(-90, 1), rat(-1, 50), rat(3, 1)],
                rat(0, 1),
            ),
            Constraint::le(rats(&[0, 0, 1, 0]), rat(1, 1)),
        ];
        let sol = maximize(&objective, &cons).unwrap();
        assert_eq!(sol.objective, rat(1, 20));
        assert_eq!(sol.x[0], rat(1, 25));
        assert_eq!(sol.x[2], rat(1, 1));
    }

    #[test]
    fn equality_rows_solve_exactly() {
        // max y subject to x+y = 1, y−x = 0.
        let sol = maximize(
            &rats(&[0, 1]),
            &[
                Constraint::eq(rats(&[1, 1]), rat(1, 1)),
                Constraint::eq(rats(&[-1, 1]), rat(0, 1)),
            ],
        )
        .unwrap();
        assert_eq!(sol.x, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(sol.objective, rat(1, 2));
    }

    #[test]
    fn conflicting_bounds_are_infeasible() {
        let err = maximize(
            &rats(&[1]),
            &[
                Constraint::ge(rats(&[1]), rat(2, 1)),
                Constraint::le(rats(&[1]), rat(1, 1)),
            ],
        )
        .unwrap_err();
        assert_eq!(err, LpError::Infeasible);
    }

    #[test]
    fn open_directions_are_unbounded() {
        let err = maximize(
            &rats(&[1, 0]),
            &[Constraint::le(rats(&[-1, 1]), rat(1, 1))],
        )
        .unwrap_err();
        assert_eq!(err, LpError::Unbounded);
    }

    #[test]
    fn probability_simplex_feasibility() {
        let one = Constraint::eq(rats(&[1, 1, 1]), rat(1, 1));
        let x = feasible_point(&[one.clone()]).unwrap();
        let total: BigRational = x.iter().sum();
        assert_eq!(total, rat(1, 1));
        assert!(x.iter().all(|v| !v.is_negative()));

        let err = feasible_point(&[one, Constraint::ge(rats(&[1, 0, 0]), rat(2, 1))]).unwrap_err();
        assert_eq!(err, LpError::Infeasible);
    }

    #[test]
    fn zero_objective_returns_any_feasible_point() {
        let sol = maximize(
            &rats(&[0, 0]),
            &[Constraint::le(rats(&[1, 1]), rat(3, 1))],
        )
        .unwrap();
        assert_eq!(sol.objective, rat(0, 1));
        assert!(sol.x.iter().all(|v| !v.is_negative()));
    }

    #[test]
    fn redundant_equalities_are_dropped_not_fatal() {
        // The second equality repeats the first; phase one leaves its
        // artificial basic at zero on a redundant row.
        let sol = maximize(
            &rats(&[1, 1]),
            &[
                Constraint::eq(rats(&[1, 1]), rat(1, 1)),
                Constraint::eq(rats(&[2, 2]), rat(2, 1)),
            ],
        )
        .unwrap();
        assert_eq!(sol.objective, rat(1, 1));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let err = maximize(&rats(&[1, 1]), &[Constraint::le(rats(&[1]), rat(1, 1))]).unwrap_err();
        assert_eq!(err, LpError::Shape { got: 1, want: 2 });
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // max −x−y written with a negative rhs: −x−y ≥ −2 bounds the
        // loss at 2; optimum sits at the origin.
        let sol = maximize(
            &rats(&[-1, -1]),
            &[Constraint::ge(rats(&[-1, -1]), rat(-2, 1))],
        )
        .unwrap();
        assert_eq!(sol.objective, rat(0, 1));
    }
}
