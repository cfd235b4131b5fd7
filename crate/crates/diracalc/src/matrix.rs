//! Matrices over the polynomial ring and fraction-free elimination.
//!
//! The workhorse is Montante/Bareiss Gauss–Jordan: every intermediate entry
//! is a minor of the input matrix, so the divisions in the update rule are
//! exact in the polynomial ring and no rational-function arithmetic (hence
//! no multivariate gcd) is ever needed. "Generic" rank and kernel refer to
//! the matrix viewed over the fraction field ℚ(i)(x1..xn), i.e. to its
//! values off a proper algebraic subset.

use crate::error::Result;
use crate::poly::{poly_gcd, rational_content, Polynomial};
use crate::probe::ProbePoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    vars: usize,
    rows: usize,
    cols: usize,
    data: Vec<Vec<Polynomial>>,
}

/// Result of fraction-free Gauss–Jordan: `pivots[k] = (row, col)` in column
/// order; in `mat`, every non-pivot entry of a pivot column is zero and all
/// pivot entries equal the final pivot `denom`.
pub struct Echelon {
    pub mat: PolyMatrix,
    pub pivots: Vec<(usize, usize)>,
    pub denom: Polynomial,
}

impl PolyMatrix {
    pub fn new(vars: usize, rows: usize, cols: usize) -> Self {
        PolyMatrix {
            vars,
            rows,
            cols,
            data: vec![vec![Polynomial::zero(vars); cols]; rows],
        }
    }

    pub fn from_rows(vars: usize, rows: Vec<Vec<Polynomial>>) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            for e in r {
                assert_eq!(e.var_count(), vars, "entry arity");
            }
        }
        PolyMatrix {
            vars,
            rows: rows.len(),
            cols,
            data: rows,
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Polynomial {
        &self.data[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Polynomial) {
        assert_eq!(p.var_count(), self.vars);
        self.data[r][c] = p;
    }

    pub fn row(&self, r: usize) -> &[Polynomial] {
        &self.data[r]
    }

    pub fn rows_vec(&self) -> &[Vec<Polynomial>] {
        &self.data
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut t = PolyMatrix::new(self.vars, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c][r] = self.data[r][c].clone();
            }
        }
        t
    }

    pub fn eval(&self, point: &ProbePoint) -> Result<Vec<Vec<Scalar>>> {
        self.data
            .iter()
            .map(|row| row.iter().map(|p| p.eval(point)).collect())
            .collect()
    }

    /// Fraction-free Gauss–Jordan. Pivot choice is deterministic: leftmost
    /// column, then the unused row whose entry has the smallest
    /// (degree, term-count) — keeps intermediate entries small.
    pub fn echelon(&self) -> Echelon {
        let mut a = self.data.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut used = vec![false; self.rows];
        let mut prev = Polynomial::one(self.vars);
        for c in 0..self.cols {
            let r = (0..self.rows)
                .filter(|&r| !used[r] && !a[r][c].is_zero())
                .min_by_key(|&r| (a[r][c].degree(), a[r][c].terms().count()));
            let r = match r {
                Some(r) => r,
                None => continue,
            };
            used[r] = true;
            let p = a[r][c].clone();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let head = a[i][c].clone();
                for j in 0..self.cols {
                    let t = p
                        .mul(&a[i][j])
                        .unwrap()
                        .sub(&head.mul(&a[r][j]).unwrap())
                        .unwrap();
                    a[i][j] = t.exact_div(&prev);
                }
            }
            pivots.push((r, c));
            prev = p;
        }
        Echelon {
            mat: PolyMatrix {
                vars: self.vars,
                rows: self.rows,
                cols: self.cols,
                data: a,
            },
            pivots,
            denom: prev,
        }
    }

    /// Rank over the rational-function field.
    pub fn generic_rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Basis of the right kernel over the rational-function field, with
    /// polynomial entries, in canonical form (see [`normalize_vector`]).
    /// One vector per free column, in column order.
    pub fn generic_kernel(&self) -> Vec<Vec<Polynomial>> {
        let ech = self.echelon();
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; self.cols];
        for &(r, c) in &ech.pivots {
            pivot_of_col[c] = Some(r);
        }
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if pivot_of_col[f].is_some() {
                continue;
            }
            let mut v = vec![Polynomial::zero(self.vars); self.cols];
            v[f] = ech.denom.clone();
            for &(r, c) in &ech.pivots {
                v[c] = ech.mat.data[r][f].neg();
            }
            normalize_vector(&mut v);
            basis.push(v);
        }
        basis
    }

    /// Indices of a generically independent subset of rows: the first rows
    /// (in order) that successively increase the rank.
    pub fn generic_independent_rows(&self) -> Vec<usize> {
        let t = self.transpose();
        let mut pivots: Vec<usize> = t.echelon().pivots.iter().map(|&(_, c)| c).collect();
        pivots.sort_unstable();
        pivots
    }

    /// Rank of the evaluated matrix at a specific point, by scalar
    /// elimination (no symbolic step).
    pub fn rank_at(&self, point: &ProbePoint) -> Result<usize> {
        Ok(scalar_rank(self.eval(point)?))
    }
}

/// Rank of a scalar matrix by ordinary Gaussian elimination.
pub fn scalar_rank(mut a: Vec<Vec<Scalar>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = a[rank][c].inv().expect("nonzero pivot");
        for j in 0..cols {
            a[rank][j] = &a[rank][j] * &inv;
        }
        for r in 0..rows {
            if r != rank && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..cols {
                    let t = &a[rank][j] * &f;
                    a[r][j] = &a[r][j] - &t;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Canonical form of a polynomial vector: the polynomial gcd of the entries
/// divided out, then the integer content (gcd of numerators over lcm of
/// denominators of every rational component), then the graded-lex leading
/// coefficient of the first nonzero entry made sign-positive (real part
/// positive, or zero real part and positive imaginary part).
pub fn normalize_vector(v: &mut [Polynomial]) {
    let g = v
        .iter()
        .fold(Polynomial::zero(v.first().map_or(0, |p| p.var_count())), |g, p| poly_gcd(&g, p));
    if !g.is_zero() && !g.is_constant() {
        for p in v.iter_mut() {
            if !p.is_zero() {
                *p = p.exact_div(&g);
            }
        }
    }
    let content = rational_content(v.iter().flat_map(|p| p.rational_components()));
    if content.is_zero() {
        return;
    }
    let inv = Scalar::from_rational(content.recip());
    for p in v.iter_mut() {
        *p = p.scale(&inv);
    }
    let lead_positive = v
        .iter()
        .find(|p| !p.is_zero())
        .map(|p| p.leading().unwrap().1.is_sign_positive())
        .unwrap_or(true);
    if !lead_positive {
        for p in v.iter_mut() {
            *p = p.neg();
        }
    }
}

use num_traits::Zero;
