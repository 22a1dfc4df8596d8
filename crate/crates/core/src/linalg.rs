//! Dense exact linear algebra over the rationals. Matrices are row-major `Vec<Vec<Rat>>`.

use num_traits::{One, Signed, Zero};

use crate::rat::Rat;

pub type Mat = Vec<Vec<Rat>>;

pub fn from_i64(rows: &[Vec<i64>]) -> Mat {
    rows.iter()
        .map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect())
        .collect()
}

pub fn transpose(m: &[Vec<Rat>], ncols: usize) -> Mat {
    (0..ncols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| crate::rat::dot(row, v)).collect()
}

pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>], bcols: usize) -> Mat {
    a.iter()
        .map(|row| {
            (0..bcols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(Rat::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &[Vec<Rat>], ncols: usize) -> (Mat, Vec<usize>) {
    let mut a: Mat = m.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == a.len() {
            break;
        }
        let Some(p) = (row..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[row].clone();
        for (i, r) in a.iter_mut().enumerate() {
            if i != row && !r[col].is_zero() {
                let f = r[col].clone();
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

pub fn rank(m: &[Vec<Rat>], ncols: usize) -> usize {
    rref(m, ncols).1.len()
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(m: &[Vec<Rat>], ncols: usize) -> Mat {
    let (r, pivots) = rref(m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); ncols];
            v[f] = Rat::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `a x = b`, or `None` if inconsistent.
pub fn solve_any(a: &[Vec<Rat>], b: &[Rat], ncols: usize) -> Option<Vec<Rat>> {
    let aug: Mat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, ncols + 1);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[i][ncols].clone();
    }
    Some(x)
}

/// Unique solution of a square system, `None` if singular.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    if rank(a, n) < n {
        return None;
    }
    solve_any(a, b, n)
}

pub fn det(a: &[Vec<Rat>]) -> Rat {
    let n = a.len();
    let mut m: Mat = a.to_vec();
    let mut d = Rat::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Rat::zero();
        };
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        d *= &m[col][col];
        let pivot_row = m[col].clone();
        for r in m.iter_mut().skip(col + 1) {
            if !r[col].is_zero() {
                let f = &r[col] / &pivot_row[col];
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    d
}

/// Symmetric positive definiteness: every pivot of the unpivoted elimination is positive.
pub fn is_positive_definite(q: &[Vec<Rat>]) -> bool {
    let n = q.len();
    let mut m: Mat = q.to_vec();
    for col in 0..n {
        if !m[col][col].is_positive() {
            return false;
        }
        let pivot_row = m[col].clone();
        for r in m.iter_mut().skip(col + 1) {
            if !r[col].is_zero() {
                let f = &r[col] / &pivot_row[col];
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    true
}

/// `vᵀ q v` for a symmetric form `q`.
pub fn quad(q: &[Vec<Rat>], v: &[Rat]) -> Rat {
    crate::rat::dot(v, &mat_vec(q, v))
}

pub fn bilinear(q: &[Vec<Rat>], u: &[Rat], v: &[Rat]) -> Rat {
    crate::rat::dot(u, &mat_vec(q, v))
}

/// Orthogonal projector onto the row space spanned by `basis` (rows, independent).
pub fn projector(basis: &[Vec<Rat>], n: usize) -> Mat {
    if basis.is_empty() {
        return vec![vec![Rat::zero(); n]; n];
    }
    let bt = transpose(basis, n);
    let gram = mat_mul(basis, &bt, basis.len());
    let k = basis.len();
    // P = Bᵀ (B Bᵀ)⁻¹ B
    let mut inv_cols: Mat = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![Rat::zero(); k];
        e[j] = Rat::one();
        inv_cols.push(solve(&gram, &e).expect("independent basis"));
    }
    let inv = transpose(&inv_cols, k);
    let left = mat_mul(&bt, &inv, k);
    mat_mul(&left, basis, n)
}

/// Exact minimum of `λᵀ q λ` over the standard simplex `{λ ≥ 0, Σλ = 1}`.
///
/// The minimum is attained on some face whose stationarity system
/// `[q_T  -1; 1ᵀ 0] (λ_T, θ) = (0, 1)` is nonsingular with `λ_T > 0`, so enumerating faces
/// and keeping those solutions is exhaustive.
pub fn simplex_min(q: &[Vec<Rat>]) -> Rat {
    let m = q.len();
    assert!(m > 0 && m < 24, "simplex_min on {m} coordinates");
    let mut best: Option<Rat> = None;
    for mask in 1u32..(1 << m) {
        let t: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let s = t.len();
        let mut sys: Mat = Vec::with_capacity(s + 1);
        for &i in &t {
            let mut row: Vec<Rat> = t.iter().map(|&j| q[i][j].clone()).collect();
            row.push(-Rat::one());
            sys.push(row);
        }
        let mut last = vec![Rat::one(); s];
        last.push(Rat::zero());
        sys.push(last);
        let mut rhs = vec![Rat::zero(); s];
        rhs.push(Rat::one());
        let Some(sol) = solve(&sys, &rhs) else { continue };
        if sol[..s].iter().any(|x| !x.is_positive()) {
            continue;
        }
        let theta = sol[s].clone();
        if best.as_ref().is_none_or(|b| theta < *b) {
            best = Some(theta);
        }
    }
    best.expect("vertices always yield a candidate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ri, rvec};

    #[test]
    fn rank_and_nullspace() {
        let m = from_i64(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(rank(&m, 3), 2);
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        assert!(mat_vec(&m, &ns[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn solve_and_det() {
        let a = from_i64(&[vec![2, 1], vec![1, 3]]);
        assert_eq!(det(&a), ri(5));
        let x = solve(&a, &rvec(&[1, 2])).unwrap();
        assert_eq!(x, vec![rat(1, 5), rat(3, 5)]);
        let s = from_i64(&[vec![1, 2], vec![2, 4]]);
        assert!(solve(&s, &rvec(&[1, 1])).is_none());
        assert!(solve_any(&s, &rvec(&[1, 2]), 2).is_some());
    }

    #[test]
    fn definiteness() {
        assert!(is_positive_definite(&from_i64(&[vec![2, 1], vec![1, 2]])));
        assert!(!is_positive_definite(&from_i64(&[vec![1, 1], vec![1, 1]])));
        assert!(!is_positive_definite(&from_i64(&[vec![0, 1], vec![1, 0]])));
    }

    #[test]
    fn simplex_minimum() {
        // x² + y² on the simplex: min 1/2 at (1/2, 1/2)
        assert_eq!(simplex_min(&from_i64(&[vec![1, 0], vec![0, 1]])), rat(1, 2));
        // xy: zero at the vertices
        assert_eq!(simplex_min(&from_i64(&[vec![0, 1], vec![1, 0]])), ri(0));
        // (x - y)²: zero at the barycenter
        assert_eq!(simplex_min(&from_i64(&[vec![1, -1], vec![-1, 1]])), ri(0));
        // indefinite
        assert_eq!(simplex_min(&from_i64(&[vec![1, -3], vec![-3, 1]])), ri(-1));
    }

    #[test]
    fn projector_fixes_span() {
        let b = from_i64(&[vec![1, 1, 0]]);
        let p = projector(&b, 3);
        assert_eq!(mat_vec(&p, &rvec(&[2, 2, 0])), rvec(&[2, 2, 0]));
        assert_eq!(mat_vec(&p, &rvec(&[1, -1, 5])), rvec(&[0, 0, 0]));
    }
}
