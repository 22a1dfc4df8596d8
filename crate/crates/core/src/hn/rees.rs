//! Rees modules of descending filtrations `𝐐ⁿ = E₀ ⊋ E₁ ⊋ … ⊋ E_p ⊋ 0` on rational vector
//! spaces, described by weight-space dimension tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::rat::{ri, Rat};

/// A strictly descending filtration of `𝐐ⁿ`, stored as row bases in echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    n: usize,
    /// `E₀ = 𝐐ⁿ, E₁, …, E_p`.
    spaces: Vec<Mat>,
}

fn basis(rows: &[Vec<Rat>], n: usize) -> Mat {
    let (r, pivots) = linalg::rref(rows, n);
    r.into_iter().take(pivots.len()).collect()
}

fn sum_dim(parts: &[&Mat], n: usize) -> usize {
    let rows: Mat = parts.iter().flat_map(|m| m.iter().cloned()).collect();
    if rows.is_empty() {
        0
    } else {
        linalg::rank(&rows, n)
    }
}

impl Filtration {
    /// `subspaces` lists spanning rows of `E₁ ⊋ … ⊋ E_p`; `E₀` is all of `𝐐ⁿ`.
    pub fn new(n: usize, subspaces: &[Mat]) -> Result<Self> {
        let identity: Mat = (0..n)
            .map(|i| (0..n).map(|j| ri(i64::from(i == j))).collect())
            .collect();
        let mut spaces = vec![identity];
        for s in subspaces {
            if s.iter().any(|row| row.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: s.iter().map(Vec::len).find(|&l| l != n).unwrap_or(0) });
            }
            let b = basis(s, n);
            let prev = spaces.last().expect("E0");
            if b.is_empty() || b.len() >= prev.len() || sum_dim(&[prev, &b], n) != prev.len() {
                return Err(Error::NotNested);
            }
            spaces.push(b);
        }
        Ok(Filtration { n, spaces })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number `p` of proper subspaces.
    pub fn len(&self) -> usize {
        self.spaces.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `dim E_j`, zero for `j > p`.
    pub fn dim(&self, j: usize) -> usize {
        self.spaces.get(j).map_or(0, Vec::len)
    }

    /// Basis of `Σ_{j ∈ js} E_j`.
    fn span_of(&self, js: impl Iterator<Item = usize>) -> Mat {
        let rows: Mat = js.flat_map(|j| self.spaces[j].iter().cloned()).collect();
        if rows.is_empty() {
            rows
        } else {
            basis(&rows, self.n)
        }
    }

    /// Dimension filtration after deleting `E_k` (`1 ≤ k ≤ p`).
    fn shortened_dims(&self, k: usize) -> Vec<usize> {
        (0..=self.len()).filter(|&j| j != k).map(|j| self.dim(j)).collect()
    }
}

/// One row of a dimension table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightDim {
    pub weight: Vec<i64>,
    pub dim: usize,
}

/// Summary of the singly graded Rees module `Ẽ = Σ_j 𝐐[t]·t^{-w_j} ⊗ E_j`, whose weight-`w`
/// space is `E_j` for the least `j` with `w_j ≥ w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReesReport {
    pub weight_dims: Vec<WeightDim>,
    pub gr_dims: Vec<WeightDim>,
    /// Kernel dimensions of `t : Ẽ_{w+1} → Ẽ_w` over the window.
    pub kernel_dims: Vec<usize>,
    pub injective: bool,
    pub colimit_dim: usize,
    pub colimit_ok: bool,
    pub gr_ok: bool,
}

fn check_increasing(weights: &[i64]) -> Result<()> {
    if weights.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::WeightsNotIncreasing);
    }
    Ok(())
}

/// Kernel dimension of the inclusion of `small` into `𝐐ⁿ` after checking it lands in `big`.
fn inclusion_kernel(small: &Mat, big: &Mat, n: usize) -> Option<usize> {
    if sum_dim(&[big, small], n) != big.len() {
        return None;
    }
    if small.is_empty() {
        return Some(0);
    }
    let cols = linalg::transpose(small, n);
    Some(linalg::nullspace(&cols, small.len()).len())
}

/// The singly graded Rees module for integer weights `w₀ < … < w_p`.
pub fn rees_module(f: &Filtration, weights: &[i64]) -> Result<ReesReport> {
    if weights.len() != f.len() + 1 {
        return Err(Error::DimensionMismatch { expected: f.len() + 1, got: weights.len() });
    }
    check_increasing(weights)?;
    let n = f.n();
    let space_at = |w: i64| f.span_of((0..weights.len()).filter(|&j| weights[j] >= w));
    let lo = weights[0] - 1;
    let hi = weights[weights.len() - 1] + 1;
    let mut weight_dims = Vec::new();
    let mut gr_dims = Vec::new();
    let mut kernel_dims = Vec::new();
    let mut injective = true;
    let mut gr_ok = true;
    for w in lo..=hi {
        let here = space_at(w);
        let next = space_at(w + 1);
        weight_dims.push(WeightDim { weight: vec![w], dim: here.len() });
        match inclusion_kernel(&next, &here, n) {
            Some(k) => {
                injective &= k == 0;
                kernel_dims.push(k);
            }
            None => {
                injective = false;
                kernel_dims.push(next.len());
            }
        }
        let gr = here.len().saturating_sub(next.len());
        let expected = match weights.iter().position(|&x| x == w) {
            Some(j) => f.dim(j) - f.dim(j + 1),
            None => 0,
        };
        gr_ok &= gr == expected;
        if gr > 0 {
            gr_dims.push(WeightDim { weight: vec![w], dim: gr });
        }
    }
    let colimit_dim = space_at(lo).len();
    Ok(ReesReport {
        weight_dims,
        gr_dims,
        kernel_dims,
        injective,
        colimit_dim,
        colimit_ok: colimit_dim == n,
        gr_ok,
    })
}

/// Summary of the `p`-multigraded module `Ẽ = Σ_j 𝐐[t₁,…,t_p]·(t₁⋯t_j)⁻¹ ⊗ E_j` over the
/// window `{−2, …, 1}^p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiReesReport {
    pub p: usize,
    pub dims: Vec<WeightDim>,
    /// Every weight space equals `E_{max{j : m_j = −1}}` (zero if some `m_j < −1`).
    pub closed_form_ok: bool,
    pub injective: bool,
    pub colimit_ok: bool,
    /// Fiber at the origin: nonzero exactly in degrees `(−1^j, 0^{p−j})` with `dim E_j/E_{j+1}`.
    pub fiber_ok: bool,
    /// For each direction `k`, `Ẽ/t_kẼ` agrees degreewise with the Rees module of the
    /// filtration with `E_k` deleted, split between `t_k`-degrees `−1` and `0`.
    pub gr_ok: Vec<bool>,
}

pub const MAX_MULTI: usize = 3;

fn multi_index(m: &[i64]) -> Option<usize> {
    if m.iter().any(|&x| x < -1) {
        return None;
    }
    Some(m.iter().rposition(|&x| x == -1).map_or(0, |i| i + 1))
}

fn window(p: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..p {
        out = out
            .into_iter()
            .flat_map(|m| (-2..=1).map(move |x| {
                let mut m = m.clone();
                m.push(x);
                m
            }))
            .collect();
    }
    out
}

/// The multigraded Rees module with one variable per subspace (`p ≤ 3`).
pub fn rees_multigraded(f: &Filtration) -> Result<MultiReesReport> {
    let p = f.len();
    if p > MAX_MULTI {
        return Err(Error::TooLarge(format!("{p} directions, limit {MAX_MULTI}")));
    }
    let n = f.n();
    // generators (t₁⋯t_j)⁻¹ ⊗ E_j reach degree m iff m ≥ (−1^j, 0^{p−j})
    let at = |m: &[i64]| {
        f.span_of((0..=p).filter(|&j| m.iter().enumerate().all(|(i, &x)| x >= if i < j { -1 } else { 0 })))
    };
    let shift = |m: &[i64], k: usize, by: i64| {
        let mut m = m.to_vec();
        m[k] += by;
        m
    };
    let mut dims = Vec::new();
    let mut closed_form_ok = true;
    let mut injective = true;
    let mut fiber_ok = true;
    let mut gr_ok = vec![true; p];
    for m in window(p) {
        let here = at(&m);
        dims.push(WeightDim { weight: m.clone(), dim: here.len() });
        closed_form_ok &= here.len() == multi_index(&m).map_or(0, |j| f.dim(j));
        let lower: Vec<Mat> = (0..p).map(|k| at(&shift(&m, k, -1))).collect();
        for low in &lower {
            injective &= inclusion_kernel(low, &here, n) == Some(0);
        }
        let refs: Vec<&Mat> = lower.iter().collect();
        let fiber = here.len().saturating_sub(sum_dim(&refs, n));
        let expected = match multi_index(&m) {
            Some(j) if m.iter().all(|&x| x <= 0) && m[..j].iter().all(|&x| x == -1) => f.dim(j) - f.dim(j + 1),
            _ => 0,
        };
        fiber_ok &= fiber == expected;
        for k in 0..p {
            let gr = |m: &[i64]| at(m).len().saturating_sub(at(&shift(m, k, -1)).len());
            if m[k] != -1 && m[k] != 0 {
                gr_ok[k] &= gr(&m) == 0;
                continue;
            }
            if m[k] != -1 {
                continue;
            }
            let total = gr(&m) + gr(&shift(&m, k, 1));
            let rest: Vec<i64> = m.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
            let short = f.shortened_dims(k + 1);
            let expected = multi_index(&rest).map_or(0, |j| short.get(j).copied().unwrap_or(0));
            gr_ok[k] &= total == expected;
        }
    }
    let colimit_ok = at(&vec![1; p]).len() == n;
    Ok(MultiReesReport { p, dims, closed_form_ok, injective, colimit_ok, fiber_ok, gr_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_i64;

    fn wd(w: i64, dim: usize) -> WeightDim {
        WeightDim { weight: vec![w], dim }
    }

    #[test]
    fn plane_with_a_line() {
        let f = Filtration::new(2, &[from_i64(&[vec![1, 0]])]).unwrap();
        let r = rees_module(&f, &[0, 1]).unwrap();
        assert_eq!(r.weight_dims, vec![wd(-1, 2), wd(0, 2), wd(1, 1), wd(2, 0)]);
        assert_eq!(r.gr_dims, vec![wd(0, 1), wd(1, 1)]);
        assert!(r.injective && r.colimit_ok && r.gr_ok);
        assert_eq!(r.colimit_dim, 2);
    }

    #[test]
    fn trivial_filtration() {
        let f = Filtration::new(3, &[]).unwrap();
        let r = rees_module(&f, &[0]).unwrap();
        assert_eq!(r.gr_dims, vec![wd(0, 3)]);
        assert!(r.injective && r.colimit_ok && r.gr_ok);
        let m = rees_multigraded(&f).unwrap();
        assert!(m.closed_form_ok && m.injective && m.colimit_ok && m.fiber_ok);
    }

    #[test]
    fn bifiltration() {
        let f = Filtration::new(3, &[from_i64(&[vec![1, 0, 0], vec![0, 1, 0]]), from_i64(&[vec![2, 0, 0]])]).unwrap();
        let m = rees_multigraded(&f).unwrap();
        assert!(m.closed_form_ok && m.injective && m.colimit_ok && m.fiber_ok);
        assert_eq!(m.gr_ok, vec![true, true]);
        let d = |w: [i64; 2]| m.dims.iter().find(|x| x.weight == w).unwrap().dim;
        assert_eq!(d([0, 0]), 3);
        assert_eq!(d([-1, 0]), 2);
        assert_eq!(d([-1, -1]), 1);
        assert_eq!(d([0, -1]), 1);
        assert_eq!(d([-2, 0]), 0);
    }

    #[test]
    fn errors() {
        let line = from_i64(&[vec![1, 0]]);
        assert_eq!(Filtration::new(2, &[line.clone(), line.clone()]), Err(Error::NotNested));
        assert_eq!(Filtration::new(2, &[from_i64(&[vec![1, 0], vec![0, 1]])]), Err(Error::NotNested));
        assert_eq!(Filtration::new(2, &[from_i64(&[vec![1, 0]]), from_i64(&[vec![0, 1]])]), Err(Error::NotNested));
        let f = Filtration::new(2, &[line]).unwrap();
        assert_eq!(rees_module(&f, &[1, 1]), Err(Error::WeightsNotIncreasing));
        assert!(rees_module(&f, &[0]).is_err());
    }
}
