//! Nilpotent-radical lattices of `SO^0(d,1)(Z)` and its principal
//! congruence subgroups, in the coordinates `v` of the root-space vectors
//! `X(v)`. The explicit quadratic exponential, the level-`q` lattices, the
//! sandwich inclusions against `2 Z^{d-1}`, and the nilpotent index feeding
//! the sequence conditions.

use num::rational::Ratio;
use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

type Q = Ratio<i128>;

fn q(n: i128) -> Q {
    Ratio::from_integer(n)
}

/// A vector of the nilpotent algebra in `v`-coordinates (`length d - 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotentVector {
    pub d: u32,
    pub v: Vec<Q>,
}

impl NilpotentVector {
    pub fn new(d: u32, v: Vec<Q>) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(Error::domain("d must be odd and >= 3"));
        }
        if v.len() != (d - 1) as usize {
            return Err(Error::domain(format!("v must have length {}", d - 1)));
        }
        Ok(NilpotentVector { d, v })
    }

    pub fn from_ints(d: u32, v: &[i128]) -> Result<Self> {
        NilpotentVector::new(d, v.iter().map(|&x| q(x)).collect())
    }
}

/// The algebra element `X(v)` itself, as a `(d+1) x (d+1)` matrix.
pub fn nilpotent_matrix(nv: &NilpotentVector) -> Vec<Vec<Q>> {
    let m = (nv.d - 1) as usize;
    let size = m + 2;
    let mut mat = vec![vec![Q::zero(); size]; size];
    for i in 0..m {
        mat[0][2 + i] = nv.v[i];
        mat[1][2 + i] = nv.v[i];
        mat[2 + i][0] = nv.v[i];
        mat[2 + i][1] = -nv.v[i];
    }
    mat
}

/// `exp(X(v)) = 1 + X(v) + X(v)^2/2` as an explicit `(d+1) x (d+1)`
/// rational matrix.
pub fn nilpotent_exp(nv: &NilpotentVector) -> Vec<Vec<Q>> {
    let m = (nv.d - 1) as usize;
    let half_norm: Q = nv.v.iter().map(|x| x * x).sum::<Q>() / q(2);
    let size = m + 2;
    let mut mat = vec![vec![Q::zero(); size]; size];
    mat[0][0] = Q::one() + half_norm;
    mat[0][1] = -half_norm;
    mat[1][0] = half_norm;
    mat[1][1] = Q::one() - half_norm;
    for i in 0..m {
        mat[0][2 + i] = nv.v[i];
        mat[1][2 + i] = nv.v[i];
        mat[2 + i][0] = nv.v[i];
        mat[2 + i][1] = -nv.v[i];
        mat[2 + i][2 + i] = Q::one();
    }
    mat
}

/// The invariant quadratic form preserved by `exp(X(v))`:
/// `diag(-1, 1, 1, ..., 1)` of signature `(d, 1)`.
pub fn invariant_form(d: u32) -> Vec<Vec<Q>> {
    let size = (d + 1) as usize;
    let mut mat = vec![vec![Q::zero(); size]; size];
    mat[0][0] = -Q::one();
    for i in 1..size {
        mat[i][i] = Q::one();
    }
    mat
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let mut out = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                let t = a[i][k] * b[k][j];
                out[i][j] += t;
            }
        }
    }
    out
}

pub fn mat_transpose(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let mut out = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            out[j][i] = a[i][j];
        }
    }
    out
}

/// Rational determinant by Gaussian elimination.
pub fn mat_det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero());
        let Some(p) = pivot else {
            return Q::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det *= m[col][col];
        let inv = Q::one() / m[col][col];
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col] * inv;
            for c in col..n {
                let t = factor * m[col][c];
                m[r][c] -= t;
            }
        }
    }
    det
}

/// The lattice `log(Gamma(q) cap N)` in `v`-coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct SOLattice {
    pub d: u32,
    pub q: u32,
    /// rows generate the lattice; row-style HNF, positive diagonal
    pub generator_matrix: Vec<Vec<i128>>,
    pub index_over_level1: u128,
}

const ENUM_D_MAX: u32 = 9; // d - 1 <= 8
const ENUM_Q_MAX: u32 = 16;

/// Membership criterion straight from the matrix exponential: `exp(X(v))`
/// is integral and congruent to the identity modulo `q`.
pub fn exp_in_level(d: u32, v: &[i128], q_level: u32) -> Result<bool> {
    let nv = NilpotentVector::from_ints(d, v)?;
    let mat = nilpotent_exp(&nv);
    let ql = q(q_level as i128);
    for (i, row) in mat.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let target = if i == j { Q::one() } else { Q::zero() };
            let diff = entry - target;
            if !diff.denom().is_one() {
                return Ok(false); // not even an integral matrix
            }
            if !(diff / ql).denom().is_one() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Integer row-style HNF (upper triangular, positive diagonal, entries
/// above each pivot reduced). Rows must span a full-rank lattice.
fn hnf_rows_full(rows: &[Vec<i128>], m: usize) -> Vec<Vec<i128>> {
    let mut mat: Vec<Vec<i128>> = rows.to_vec();
    let mut pivot_row = 0usize;
    for col in 0..m {
        // gcd-reduce all rows at this column into one pivot row
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..mat.len() {
                if mat[r][col] != 0 {
                    best = match best {
                        None => Some(r),
                        Some(b) if mat[r][col].abs() < mat[b][col].abs() => Some(r),
                        keep => keep,
                    };
                }
            }
            let Some(b) = best else { break };
            mat.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..mat.len() {
                if mat[r][col] != 0 {
                    let f = mat[r][col] / mat[pivot_row][col];
                    for c in 0..m {
                        mat[r][c] -= f * mat[pivot_row][c];
                    }
                    if mat[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if pivot_row < mat.len() && mat[pivot_row][col] != 0 {
            if mat[pivot_row][col] < 0 {
                for c in 0..m {
                    mat[pivot_row][c] = -mat[pivot_row][c];
                }
            }
            pivot_row += 1;
        }
    }
    mat.truncate(pivot_row);
    assert_eq!(mat.len(), m, "rows must span a full-rank lattice");
    // reduce entries above the diagonal
    for i in (0..m).rev() {
        for r in 0..i {
            let f = mat[r][i].div_euclid(mat[i][i]);
            if f != 0 {
                for c in 0..m {
                    mat[r][c] -= f * mat[i][c];
                }
            }
        }
    }
    mat
}

fn int_det(rows: &[Vec<i128>]) -> i128 {
    let m: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| q(x)).collect())
        .collect();
    let d = mat_det(&m);
    assert!(d.denom().is_one());
    *d.numer()
}

/// Generators of `{v in Z^{d-1} : exp(X(v)) in Gamma(q)}`: the vectors
/// `q w` with `q ||w||^2` even. For even `q` that is `q Z^{d-1}`; for odd
/// `q` it is `q` times the even-coordinate-sum sublattice.
pub fn level_lattice(d: u32, q_level: u32) -> Result<SOLattice> {
    if d < 3 || d % 2 == 0 || d > ENUM_D_MAX {
        return Err(Error::budget(format!(
            "d = {d} outside the enumeration window (odd, 3..={ENUM_D_MAX})"
        )));
    }
    if q_level == 0 || q_level > ENUM_Q_MAX {
        return Err(Error::budget(format!(
            "q = {q_level} outside the enumeration window (1..={ENUM_Q_MAX})"
        )));
    }
    let m = (d - 1) as usize;
    let ql = q_level as i128;
    let mut rows: Vec<Vec<i128>> = Vec::new();
    if q_level % 2 == 0 {
        for i in 0..m {
            let mut r = vec![0i128; m];
            r[i] = ql;
            rows.push(r);
        }
    } else {
        // q * D_m: 2q e_1 and q (e_i - e_{i+1})
        let mut first = vec![0i128; m];
        first[0] = 2 * ql;
        rows.push(first);
        for i in 0..m - 1 {
            let mut r = vec![0i128; m];
            r[i] = ql;
            r[i + 1] = -ql;
            rows.push(r);
        }
    }
    // every generator must pass the direct matrix criterion
    for r in &rows {
        debug_assert!(exp_in_level(d, r, q_level)?);
    }
    let generator_matrix = hnf_rows_full(&rows, m);
    let det_q = int_det(&generator_matrix).abs();
    let det_1 = 2i128; // level-1 lattice has covolume 2 in every dimension
    debug_assert_eq!(det_q % det_1, 0);
    Ok(SOLattice {
        d,
        q: q_level,
        generator_matrix,
        index_over_level1: (det_q / det_1) as u128,
    })
}

impl SOLattice {
    /// Does the lattice contain the integer vector `t`?
    pub fn contains(&self, t: &[i128]) -> bool {
        // forward substitution against the upper-triangular HNF basis:
        // row i is the only one with a nonzero entry in column i among
        // rows >= i, so solve coefficients in column order
        let m = self.generator_matrix.len();
        let mut rem: Vec<i128> = t.to_vec();
        for i in 0..m {
            let pivot = self.generator_matrix[i][i];
            if rem[i] % pivot != 0 {
                return false;
            }
            let f = rem[i] / pivot;
            for c in 0..m {
                rem[c] -= f * self.generator_matrix[i][c];
            }
        }
        rem.iter().all(|&x| x == 0)
    }
}

/// Verification record for the sandwich
/// `q Lambda+ <= log(Gamma(q) cap N) <= (q/4) Lambda+`, `Lambda+ = 2 Z^{d-1}`.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn cuspun2_check(d: u32, q_level: u32) -> Result<SandwichCheck> {
    let lat = level_lattice(d, q_level)?;
    let m = (d - 1) as usize;
    let ql = q_level as i128;
    // lower: 2q e_i must lie in the lattice
    let mut lower_ok = true;
    for i in 0..m {
        let mut t = vec![0i128; m];
        t[i] = 2 * ql;
        if !lat.contains(&t) {
            lower_ok = false;
        }
    }
    // upper: each basis vector w satisfies 2w/q integral
    let upper_ok = lat
        .generator_matrix
        .iter()
        .all(|row| row.iter().all(|&x| (2 * x) % ql == 0));
    Ok(SandwichCheck { lower_ok, upper_ok })
}

/// `[log(Gamma_0 cap N) : log(Gamma(q) cap N)]`, the determinant ratio.
pub fn nilpotent_index(d: u32, q_level: u32) -> Result<u128> {
    Ok(level_lattice(d, q_level)?.index_over_level1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_zero_is_identity() {
        let nv = NilpotentVector::from_ints(3, &[0, 0]).unwrap();
        let mat = nilpotent_exp(&nv);
        for (i, row) in mat.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert_eq!(*e, if i == j { Q::one() } else { Q::zero() });
            }
        }
    }

    #[test]
    fn exp_formula_blocks() {
        // d=3, v=(1,1): corner blocks built from ||v||^2/2 = 1
        let nv = NilpotentVector::from_ints(3, &[1, 1]).unwrap();
        let mat = nilpotent_exp(&nv);
        assert_eq!(mat[0][0], q(2));
        assert_eq!(mat[0][1], q(-1));
        assert_eq!(mat[1][0], q(1));
        assert_eq!(mat[1][1], q(0));
        assert_eq!(mat[2][0], q(1));
        assert_eq!(mat[2][1], q(-1));
    }

    #[test]
    fn exp_preserves_form_and_det() {
        for v in [[1i128, 2], [0, 3], [-2, 5], [7, -1]] {
            let nv = NilpotentVector::from_ints(3, &v).unwrap();
            let g = nilpotent_exp(&nv);
            assert_eq!(mat_det(&g), Q::one());
            let f = invariant_form(3);
            let gt = mat_transpose(&g);
            assert_eq!(mat_mul(&mat_mul(&gt, &f), &g), f);
        }
    }

    #[test]
    fn exp_is_additive() {
        for (v, w) in [([1i128, 2], [3i128, -1]), ([0, 5], [2, 2]), ([-3, 1], [1, 1])] {
            let ev = nilpotent_exp(&NilpotentVector::from_ints(3, &v).unwrap());
            let ew = nilpotent_exp(&NilpotentVector::from_ints(3, &w).unwrap());
            let sum: Vec<i128> = v.iter().zip(w.iter()).map(|(a, b)| a + b).collect();
            let es = nilpotent_exp(&NilpotentVector::from_ints(3, &sum).unwrap());
            assert_eq!(mat_mul(&ev, &ew), es);
        }
    }

    #[test]
    fn level_one_is_even_sum_lattice() {
        let lat = level_lattice(3, 1).unwrap();
        assert_eq!(int_det(&lat.generator_matrix).abs(), 2);
        assert_eq!(lat.index_over_level1, 1);
        assert!(lat.contains(&[1, 1]));
        assert!(!lat.contains(&[1, 0]));
    }

    #[test]
    fn level_lattice_examples() {
        let l2 = level_lattice(3, 2).unwrap();
        assert_eq!(l2.index_over_level1, 2);
        assert!(l2.contains(&[2, 0]) && l2.contains(&[0, 2]));
        assert!(!l2.contains(&[1, 1]));
        let l3 = level_lattice(3, 3).unwrap();
        assert_eq!(l3.index_over_level1, 9);
        assert!(l3.contains(&[3, 3]));
        assert!(!l3.contains(&[3, 0]));
    }

    #[test]
    fn closed_form_matches_matrix_oracle_on_boxes() {
        for d in [3u32, 5] {
            for q_level in 1..=4u32 {
                let lat = level_lattice(d, q_level).unwrap();
                let m = (d - 1) as usize;
                let side = (2 * q_level) as i128;
                let mut idx = vec![-side; m];
                loop {
                    let v: Vec<i128> = idx.clone();
                    let brute = exp_in_level(d, &v, q_level).unwrap();
                    assert_eq!(
                        lat.contains(&v),
                        brute,
                        "d={d} q={q_level} v={v:?}"
                    );
                    // advance the counter
                    let mut pos = 0;
                    loop {
                        if pos == m {
                            break;
                        }
                        idx[pos] += 1;
                        if idx[pos] <= side {
                            break;
                        }
                        idx[pos] = -side;
                        pos += 1;
                    }
                    if pos == m {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn sandwich_examples() {
        for (d, q_level) in [(3u32, 2u32), (5, 3), (3, 1), (5, 1), (3, 4), (5, 6)] {
            let s = cuspun2_check(d, q_level).unwrap();
            assert!(s.lower_ok && s.upper_ok, "d={d} q={q_level}");
        }
    }

    #[test]
    fn index_monotone_under_divisibility() {
        for d in [3u32, 5] {
            for q_level in [1u32, 2, 3, 4, 6] {
                for mult in [2u32, 3] {
                    let big = q_level * mult;
                    if big > 16 {
                        continue;
                    }
                    let small_idx = nilpotent_index(d, q_level).unwrap();
                    let big_idx = nilpotent_index(d, big).unwrap();
                    assert!(big_idx > small_idx, "d={d} {q_level}|{big}");
                }
            }
        }
    }

    #[test]
    fn lambda_plus_translation_at_d3() {
        // 2 (n cap Mat(Z)) equals {X(v) : v in 2 Z^2}: the matrix X(v) is
        // integral exactly when v is, because its entries are the v_i
        for num in -6i128..=6 {
            for den in [1i128, 2, 3] {
                let v = vec![Ratio::new(num, den), Ratio::new(1, 1)];
                let nv = NilpotentVector::new(3, v.clone()).unwrap();
                let x = nilpotent_matrix(&nv);
                let integral = x
                    .iter()
                    .all(|row| row.iter().all(|e| e.denom().is_one()));
                assert_eq!(integral, v.iter().all(|e| e.denom().is_one()));
            }
        }
    }

    #[test]
    fn window_errors() {
        assert!(matches!(level_lattice(11, 2), Err(Error::Budget(_))));
        assert!(matches!(level_lattice(3, 40), Err(Error::Budget(_))));
        assert!(NilpotentVector::from_ints(4, &[1, 1, 1]).is_err());
    }
}
