//! Exact rational linear algebra used by the Lie-algebra computations:
//! reduced row echelon form, rank, null spaces, 4×4 inverses, and the
//! signature of a symmetric matrix by congruence diagonalization.

use num::{BigRational, Signed, Zero};

pub(crate) type Vec4 = [BigRational; 4];
pub(crate) type Mat4 = [[BigRational; 4]; 4];

pub(crate) fn zero_vec4() -> Vec4 {
    std::array::from_fn(|_| BigRational::zero())
}

pub(crate) fn zero_mat4() -> Mat4 {
    std::array::from_fn(|_| zero_vec4())
}

pub(crate) fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut r = zero_mat4();
    for i in 0..4 {
        for j in 0..4 {
            let mut s = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                s += &a[i][k] * &bk[j];
            }
            r[i][j] = s;
        }
    }
    r
}

pub(crate) fn mat4_is_zero(a: &Mat4) -> bool {
    a.iter().all(|row| row.iter().all(|x| x.is_zero()))
}

/// In-place reduced row echelon form; returns the pivot columns.
pub(crate) fn rref(rows: &mut Vec<Vec<BigRational>>) -> Vec<usize> {
    let nrows = rows.len();
    if nrows == 0 {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let sub = &f * &rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    pivots
}

pub(crate) fn rank(rows: Vec<Vec<BigRational>>) -> usize {
    let mut rows = rows;
    rref(&mut rows).len()
}

/// Basis of the solution space of `m · x = 0` (m is rows × ncols).
pub(crate) fn nullspace(m: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let mut rows = m;
    let pivots = rref(&mut rows);
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); ncols];
        v[free] = BigRational::from_integer(1.into());
        for (prow, pcol) in pivots.iter().enumerate() {
            v[*pcol] = -rows[prow][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Span of the given vectors as a canonical (rref) basis.
pub(crate) fn span_basis(vectors: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    let mut rows = vectors;
    rref(&mut rows);
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    rows
}

pub(crate) fn mat4_inverse(m: &Mat4) -> Option<Mat4> {
    let mut aug: Vec<Vec<BigRational>> = (0..4)
        .map(|i| {
            let mut row = Vec::with_capacity(8);
            row.extend(m[i].iter().cloned());
            for j in 0..4 {
                row.push(if i == j {
                    BigRational::from_integer(1.into())
                } else {
                    BigRational::zero()
                });
            }
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots != [0, 1, 2, 3] {
        return None;
    }
    let mut inv = zero_mat4();
    for (i, row) in aug.iter().enumerate() {
        for j in 0..4 {
            inv[i][j] = row[4 + j].clone();
        }
    }
    Some(inv)
}

/// Signature (positives, negatives) of a symmetric rational matrix,
/// computed by exact congruence diagonalization.
pub(crate) fn symmetric_signature(m: &Mat4) -> (usize, usize) {
    let mut a: Vec<Vec<BigRational>> = m.iter().map(|r| r.to_vec()).collect();
    let n = 4;
    let mut pos = 0;
    let mut neg = 0;
    let mut handled = vec![false; n];
    for _ in 0..n {
        // Prefer a nonzero diagonal pivot among unhandled indices.
        let pivot = (0..n).find(|&i| !handled[i] && !a[i][i].is_zero());
        let i = match pivot {
            Some(i) => i,
            None => {
                // Look for an off-diagonal nonzero pair among unhandled
                // indices and fold it onto the diagonal: adding row j to
                // row i (and column j to column i) makes
                // a[i][i] = 2·a[i][j] ≠ 0.
                let mut found = None;
                'outer: for i in 0..n {
                    if handled[i] {
                        continue;
                    }
                    for j in 0..n {
                        if i != j && !handled[j] && !a[i][j].is_zero() {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                let Some((i, j)) = found else {
                    break; // remaining block is zero
                };
                for k in 0..n {
                    let add = a[j][k].clone();
                    a[i][k] += add;
                }
                for row in a.iter_mut() {
                    let add = row[j].clone();
                    row[i] += add;
                }
                i
            }
        };
        let d = a[i][i].clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        // Congruence step with the basis change v_j ↦ v_j − f_j·v_i where
        // f_j = a[j][i]/d. By symmetry the updated entries are
        // a[j][k] − f_j·f_k·d, and row/column i keep only the diagonal d.
        let factors: Vec<BigRational> = (0..n).map(|j| &a[j][i] / &d).collect();
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i {
                    continue;
                }
                let sub = &factors[j] * &factors[k] * &d;
                a[j][k] -= sub;
            }
            a[j][i] = BigRational::zero();
            a[i][j] = BigRational::zero();
        }
        handled[i] = true;
    }
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn identity_mat4() -> Mat4 {
        let mut m = zero_mat4();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = r(1);
        }
        m
    }

    #[test]
    fn rref_finds_rank_and_nullspace() {
        let m = vec![
            vec![r(1), r(2), r(3), r(4)],
            vec![r(2), r(4), r(6), r(8)],
            vec![r(0), r(1), r(0), r(1)],
        ];
        assert_eq!(rank(m.clone()), 2);
        let ns = nullspace(m, 4);
        assert_eq!(ns.len(), 2);
    }

    #[test]
    fn inverse_round_trips() {
        let m: Mat4 = [
            [r(1), r(2), r(0), r(0)],
            [r(0), r(1), r(0), r(3)],
            [r(5), r(0), r(1), r(0)],
            [r(0), r(0), r(0), r(2)],
        ];
        let inv = mat4_inverse(&m).unwrap();
        assert_eq!(mat4_mul(&m, &inv), identity_mat4());
        assert_eq!(mat4_mul(&inv, &m), identity_mat4());
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let mut m = zero_mat4();
        m[0][0] = r(1);
        assert!(mat4_inverse(&m).is_none());
    }

    #[test]
    fn signature_of_diagonal_matrix() {
        let mut m = zero_mat4();
        m[0][0] = rq(5, 3);
        m[1][1] = r(-2);
        m[2][2] = r(-7);
        assert_eq!(symmetric_signature(&m), (1, 2));
    }

    #[test]
    fn signature_of_hyperbolic_plane() {
        // Off-diagonal only: x·y has signature (1, 1).
        let mut m = zero_mat4();
        m[0][1] = r(1);
        m[1][0] = r(1);
        assert_eq!(symmetric_signature(&m), (1, 1));
    }
}
