//! Spherical buildings of `SL_n(𝐅_q)`: flag complexes of proper nonzero subspaces of
//! `𝐅_qⁿ` for a prime `q`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default bound on `qⁿ`.
pub const MAX_FIELD_POINTS: u64 = 1 << 16;
/// Default bound on the number of simplices stored by [`building_complex`].
pub const MAX_SIMPLICES: usize = 1 << 21;

/// A subspace of `𝐅_qⁿ` in reduced row-echelon form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subspace {
    pub q: u32,
    pub n: usize,
    pub rows: Vec<Vec<u32>>,
}

fn inv_mod(a: u32, q: u32) -> u32 {
    // q is prime, so a^(q-2) is the inverse
    let (mut base, mut exp, mut acc) = (a as u64 % q as u64, q as u64 - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q as u64;
        }
        base = base * base % q as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Row-reduces over `𝐅_q` and drops zero rows.
pub fn rref_mod(rows: &[Vec<u32>], q: u32) -> Vec<Vec<u32>> {
    let mut a: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|x| x % q).collect()).collect();
    let ncols = a.first().map_or(0, Vec::len);
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..a.len()).find(|&i| a[i][col] != 0) else { continue };
        a.swap(row, p);
        let inv = inv_mod(a[row][col], q);
        for x in a[row].iter_mut() {
            *x = *x * inv % q;
        }
        let pivot = a[row].clone();
        for (i, r) in a.iter_mut().enumerate() {
            if i != row && r[col] != 0 {
                let f = r[col];
                for (x, p) in r.iter_mut().zip(&pivot) {
                    *x = (*x + q - f * p % q) % q;
                }
            }
        }
        row += 1;
        if row == a.len() {
            break;
        }
    }
    a.truncate(row);
    a
}

impl Subspace {
    /// Canonical form of the span of `rows`.
    pub fn span(q: u32, n: usize, rows: &[Vec<u32>]) -> Self {
        Subspace { q, n, rows: rref_mod(rows, q) }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn contains_vec(&self, v: &[u32]) -> bool {
        let mut rows = self.rows.clone();
        rows.push(v.to_vec());
        rref_mod(&rows, self.q).len() == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.dim() <= other.dim() && self.rows.iter().all(|r| other.contains_vec(r))
    }

    pub fn label(&self) -> String {
        let sep = if self.q > 10 { "," } else { "" };
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(sep))
            .collect();
        format!("[{}]", rows.join(" "))
    }
}

fn is_prime(q: u32) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

fn check_field(n: usize, q: u32, max_points: u64) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::Invalid(format!("field order {q} is not prime")));
    }
    let points = (q as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if points > max_points {
        return Err(Error::TooLarge(format!("q^n = {q}^{n} exceeds {max_points}")));
    }
    Ok(())
}

/// `[n choose k]_q`.
pub fn gaussian_binomial(n: usize, k: usize, q: u32) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// Number of complete flags `Π_{k=1}^{n} (q^k − 1)/(q − 1)`.
pub fn complete_flag_count(n: usize, q: u32) -> u128 {
    (1..=n).map(|k| gaussian_binomial(k, 1, q)).product()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All `k`-dimensional subspaces of `𝐅_qⁿ` in echelon form, one pivot pattern at a time.
pub fn enumerate_subspaces(n: usize, q: u32, k: usize) -> Result<Vec<Subspace>> {
    enumerate_subspaces_bounded(n, q, k, MAX_FIELD_POINTS)
}

pub fn enumerate_subspaces_bounded(n: usize, q: u32, k: usize, max_points: u64) -> Result<Vec<Subspace>> {
    check_field(n, q, max_points)?;
    if k == 0 || k >= n {
        return Err(Error::Invalid(format!("subspace dimension {k} outside 1..{}", n.saturating_sub(1))));
    }
    let mut out: Vec<Subspace> = combinations(n, k)
        .par_iter()
        .flat_map_iter(|pivots| {
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(i, &p)| (p + 1..n).filter(|c| !pivots.contains(c)).map(move |c| (i, c)))
                .collect();
            let total = (q as u64).pow(free.len() as u32);
            (0..total).map(move |mut code| {
                let mut rows = vec![vec![0u32; n]; k];
                for (i, &p) in pivots.iter().enumerate() {
                    rows[i][p] = 1;
                }
                for &(i, c) in &free {
                    rows[i][c] = (code % q as u64) as u32;
                    code /= q as u64;
                }
                Subspace { q, n, rows }
            })
        })
        .collect();
    out.sort();
    Ok(out)
}

/// The flag complex: simplices are chains of proper nonzero subspaces under strict inclusion.
#[derive(Debug, Clone, Serialize)]
pub struct FlagComplex {
    pub n: usize,
    pub q: u32,
    pub vertices: Vec<Subspace>,
    /// Vertex index lists in increasing dimension, sorted by size then lexicographically.
    pub simplices: Vec<Vec<usize>>,
}

impl FlagComplex {
    pub fn f_vector(&self) -> Vec<usize> {
        let top = self.simplices.iter().map(Vec::len).max().unwrap_or(0);
        let mut f = vec![0; top];
        for s in &self.simplices {
            f[s.len() - 1] += 1;
        }
        f
    }

    pub fn maximal_simplices(&self) -> Vec<&Vec<usize>> {
        let set: BTreeSet<&Vec<usize>> = self.simplices.iter().collect();
        let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in &set {
            for i in 0..s.len() {
                let mut f = (*s).clone();
                f.remove(i);
                faces.insert(f);
            }
        }
        self.simplices.iter().filter(|s| !faces.contains(*s)).collect()
    }

    /// 1-skeleton as an undirected DOT graph, vertices labelled by echelon rows.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph building {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{}\", dim={}];", v.label(), v.dim());
        }
        for s in self.simplices.iter().filter(|s| s.len() == 2) {
            let _ = writeln!(out, "  v{} -- v{};", s[0], s[1]);
        }
        out.push_str("}\n");
        out
    }

    /// OFF listing of the maximal simplices; vertex coordinates are `(dim, index, 0)`.
    pub fn to_off(&self) -> String {
        let faces = self.maximal_simplices();
        let mut out = format!("OFF\n{} {} 0\n", self.vertices.len(), faces.len());
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{} {i} 0", v.dim());
        }
        for f in faces {
            let idx: Vec<String> = f.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{} {}", f.len(), idx.join(" "));
        }
        out
    }
}

pub fn building_complex(n: usize, q: u32) -> Result<FlagComplex> {
    building_complex_bounded(n, q, MAX_FIELD_POINTS, MAX_SIMPLICES)
}

pub fn building_complex_bounded(n: usize, q: u32, max_points: u64, max_simplices: usize) -> Result<FlagComplex> {
    if n < 2 {
        return Err(Error::Invalid(format!("building of SL_{n} needs n ≥ 2")));
    }
    check_field(n, q, max_points)?;
    let mut vertices = Vec::new();
    for k in 1..n {
        vertices.extend(enumerate_subspaces_bounded(n, q, k, max_points)?);
    }
    let m = vertices.len();
    let up: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|a| {
            (0..m)
                .filter(|&b| vertices[a].dim() < vertices[b].dim() && vertices[a].is_subspace_of(&vertices[b]))
                .collect()
        })
        .collect();
    let mut simplices: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..m).rev().map(|v| vec![v]).collect();
    while let Some(s) = stack.pop() {
        if simplices.len() >= max_simplices {
            return Err(Error::TooLarge(format!("more than {max_simplices} simplices")));
        }
        for &b in up[*s.last().expect("nonempty")].iter().rev() {
            let mut t = s.clone();
            t.push(b);
            stack.push(t);
        }
        simplices.push(s);
    }
    simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(FlagComplex { n, q, vertices, simplices })
}

/// Complete flags found by extending partial flags one vector at a time, without the
/// vertex enumeration.
pub fn enumerate_complete_flags(n: usize, q: u32) -> Result<usize> {
    check_field(n, q, 1 << 12)?;
    let vectors: Vec<Vec<u32>> = (0..(q as u64).pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let x = (c % q as u64) as u32;
                    c /= q as u64;
                    x
                })
                .collect()
        })
        .collect();
    let mut level: BTreeSet<Vec<Subspace>> = BTreeSet::new();
    level.insert(vec![Subspace::span(q, n, &[])]);
    for _ in 1..n {
        let mut next = BTreeSet::new();
        for flag in &level {
            let last = flag.last().expect("nonempty");
            for v in vectors.iter().filter(|v| !last.contains_vec(v)) {
                let mut rows = last.rows.clone();
                rows.push(v.clone());
                let mut f = flag.clone();
                f.push(Subspace::span(q, n, &rows));
                next.insert(f);
            }
        }
        level = next;
    }
    Ok(level.len())
}

/// Structural statistics of a flag complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildingStats {
    pub n: usize,
    pub q: u32,
    pub f_vector: Vec<usize>,
    pub euler_characteristic: i64,
    pub dimension: i64,
    pub pure: bool,
    /// Vertices per subspace dimension `1..n−1`.
    pub color_classes: Vec<usize>,
    pub color_classes_match: bool,
    pub chambers: usize,
    pub chamber_formula: u128,
    /// Present when the independent flag enumeration is small enough to run.
    pub chambers_enumerated: Option<usize>,
    /// Every panel (codimension-one face of a chamber) lies in exactly `q + 1` chambers;
    /// vacuous for `n < 3`.
    pub thick: bool,
}

pub fn building_stats(c: &FlagComplex) -> BuildingStats {
    let f = c.f_vector();
    let euler: i64 = f.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
    let maximal = c.maximal_simplices();
    let pure = maximal.iter().all(|s| s.len() == c.n - 1);
    let color_classes: Vec<usize> = (1..c.n).map(|k| c.vertices.iter().filter(|v| v.dim() == k).count()).collect();
    let color_classes_match = color_classes
        .iter()
        .enumerate()
        .all(|(i, &x)| x as u128 == gaussian_binomial(c.n, i + 1, c.q));
    let chambers = c.simplices.iter().filter(|s| s.len() == c.n - 1).count();
    let mut panels: HashMap<Vec<usize>, usize> = HashMap::new();
    if c.n >= 3 {
        for s in c.simplices.iter().filter(|s| s.len() == c.n - 1) {
            for i in 0..s.len() {
                let mut p = s.clone();
                p.remove(i);
                *panels.entry(p).or_default() += 1;
            }
        }
    }
    let thick = panels.values().all(|&k| k == c.q as usize + 1);
    let chambers_enumerated = (c.q as u64).checked_pow(c.n as u32).filter(|&p| p <= 1 << 10).and_then(|_| enumerate_complete_flags(c.n, c.q).ok());
    BuildingStats {
        n: c.n,
        q: c.q,
        dimension: f.len() as i64 - 1,
        f_vector: f,
        euler_characteristic: euler,
        pure,
        color_classes,
        color_classes_match,
        chambers,
        chamber_formula: complete_flag_count(c.n, c.q),
        chambers_enumerated,
        thick,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subspace_counts() {
        assert_eq!(enumerate_subspaces(2, 3, 1).unwrap().len(), 4);
        assert_eq!(enumerate_subspaces(3, 2, 1).unwrap().len(), 7);
        assert_eq!(enumerate_subspaces(3, 2, 2).unwrap().len(), 7);
        assert_eq!(enumerate_subspaces(4, 2, 2).unwrap().len(), 35);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert!(matches!(enumerate_subspaces(20, 2, 1), Err(Error::TooLarge(_))));
        assert!(enumerate_subspaces(3, 4, 1).is_err());
    }

    #[test]
    fn canonical_forms() {
        for s in enumerate_subspaces(3, 3, 2).unwrap() {
            assert_eq!(Subspace::span(3, 3, &s.rows), s);
        }
        let a = Subspace::span(2, 3, &[vec![1, 1, 0], vec![0, 1, 1]]);
        let b = Subspace::span(2, 3, &[vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(a, b);
    }

    #[test]
    fn small_buildings() {
        let c = building_complex(2, 3).unwrap();
        assert_eq!(c.f_vector(), vec![4]);
        let st = building_stats(&c);
        assert_eq!(st.euler_characteristic, 4);
        assert!(st.pure);
        assert_eq!(building_complex(2, 2).unwrap().f_vector(), vec![3]);

        let c = building_complex(3, 2).unwrap();
        assert_eq!(c.f_vector(), vec![14, 21]);
        let st = building_stats(&c);
        assert_eq!(st.euler_characteristic, -7);
        assert!(st.pure && st.thick && st.color_classes_match);
        assert_eq!(st.dimension, 1);
        assert_eq!(st.chambers, 21);
        assert_eq!(st.chamber_formula, 21);
        assert_eq!(st.chambers_enumerated, Some(21));
    }

    #[test]
    fn rank_three_building() {
        let c = building_complex(4, 2).unwrap();
        let st = building_stats(&c);
        assert_eq!(st.f_vector, vec![15 + 35 + 15, 15 * 7 + 35 * 3 + 15 * 7, 315]);
        assert!(st.pure && st.thick);
        assert_eq!(st.chambers_enumerated, Some(315));
    }

    #[test]
    fn exports() {
        let c = building_complex(2, 2).unwrap();
        let dot = c.to_dot();
        assert!(dot.starts_with("graph building {"));
        assert_eq!(dot.matches("label=").count(), 3);
        let off = c.to_off();
        assert!(off.starts_with("OFF\n3 3 0\n"));
    }
}
