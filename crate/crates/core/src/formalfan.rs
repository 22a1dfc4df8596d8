//! Formal fans presented by finite cone collections, their realizations and pullbacks,
//! toric degeneration fans, and torus-action models on affine space.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cones::{is_classical_fan, morphism_check, ConeMorphism, RationalCone};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rat::{self, Rat};

/// Finite presentation `R_*({K_α})`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormalFan {
    dim: usize,
    pieces: Vec<RationalCone>,
    classical: bool,
}

impl FormalFan {
    /// Certifies the classical flag by checking the pieces.
    pub fn new(dim: usize, pieces: Vec<RationalCone>) -> Result<Self> {
        for p in &pieces {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        let classical = is_classical_fan(&pieces);
        Ok(FormalFan { dim, pieces, classical })
    }

    /// The representable fan `h_[n]`: the nonnegative orthant.
    pub fn representable(n: usize) -> Self {
        FormalFan::new(n, vec![RationalCone::orthant(n)]).expect("single piece")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[RationalCone] {
        &self.pieces
    }

    pub fn is_classical(&self) -> bool {
        self.classical
    }

    /// Decides `M ∈ F_n` for an `N × n` integer matrix.
    pub fn fan_cones(&self, n: usize, m: &[Vec<i64>]) -> Result<bool> {
        if m.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.len() });
        }
        if let Some(bad) = m.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        let cols: Vec<Vec<Rat>> = (0..n).map(|j| m.iter().map(|r| rat::ri(r[j])).collect()).collect();
        if cols.iter().any(|c| rat::is_zero_vec(c)) || linalg::rank(&linalg::from_i64(m), n) < n {
            return Ok(false);
        }
        Ok(self
            .pieces
            .iter()
            .any(|k| cols.iter().all(|c| k.contains(c).unwrap_or(false))))
    }

    pub fn realization_contains(&self, x: &[Rat]) -> bool {
        self.pieces.iter().any(|k| k.contains(x).unwrap_or(false))
    }

    /// Pullback along `φ : [k] → [N]`: pieces `φ⁻¹(K_α) ∩ ℝ^k_{≥0}`, zero pieces dropped.
    pub fn restrict(&self, phi: &ConeMorphism) -> Result<FormalFan> {
        if phi.target_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: phi.target_dim() });
        }
        let k = phi.source_dim();
        let mut pieces = Vec::new();
        for piece in &self.pieces {
            let p = pullback(piece, phi.rows(), k, true)?;
            if !p.is_zero() && !pieces.contains(&p) {
                pieces.push(p);
            }
        }
        FormalFan::new(k, pieces)
    }

    /// Extensional equality on membership of every piece generator and the given probes.
    pub fn same_realization(&self, other: &FormalFan, probes: &[Vec<Rat>]) -> bool {
        let gens_in = |a: &FormalFan, b: &FormalFan| {
            a.pieces.iter().all(|p| {
                p.generators().iter().all(|g| b.realization_contains(&g.to_rat()))
            })
        };
        self.dim == other.dim
            && gens_in(self, other)
            && gens_in(other, self)
            && probes.iter().all(|x| self.realization_contains(x) == other.realization_contains(x))
    }
}

/// `{y : M y ∈ K}` (intersected with the orthant when `orthant`), for `M` of size `N × k`.
fn pullback(cone: &RationalCone, m: &[Vec<i64>], k: usize, orthant: bool) -> Result<RationalCone> {
    let h = cone.hrep();
    let pull = |f: &Vec<i64>| -> Vec<Rat> {
        (0..k).map(|j| rat::ri(f.iter().zip(m).map(|(a, r)| a * r[j]).sum())).collect()
    };
    let mut ineqs: Vec<Vec<Rat>> = h.inequalities.iter().map(pull).collect();
    if orthant {
        for j in 0..k {
            let mut e = vec![Rat::zero(); k];
            e[j] = rat::ri(1);
            ineqs.push(e);
        }
    }
    let eqs: Vec<Vec<Rat>> = h.equalities.iter().map(pull).collect();
    RationalCone::from_halfspaces(k, &ineqs, &eqs)
}

/// Pieces `π⁻¹(σ_i)` for a fan `Σ ⊂ ℝ^{N'}` and `π` given as an `N' × N` integer matrix.
pub fn toric_degeneration_fan(sigma: &[RationalCone], pi: &[Vec<i64>]) -> Result<FormalFan> {
    let n_target = pi.len();
    let n = pi.first().map_or(0, Vec::len);
    if pi.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("ragged projection matrix".into()));
    }
    if linalg::rank(&linalg::from_i64(pi), n) < n_target {
        return Err(Error::NotSurjective);
    }
    let mut pieces = Vec::new();
    for s in sigma {
        if s.dim() != n_target {
            return Err(Error::DimensionMismatch { expected: n_target, got: s.dim() });
        }
        let p = pullback(s, pi, n, false)?;
        if !pieces.contains(&p) {
            pieces.push(p);
        }
    }
    FormalFan::new(n, pieces)
}

/// `r2 = λ r1` for some positive rational `λ`.
pub fn proj_points_equal(r1: &[Rat], r2: &[Rat]) -> Result<bool> {
    if rat::is_zero_vec(r1) || rat::is_zero_vec(r2) {
        return Err(Error::ZeroVector);
    }
    if r1.len() != r2.len() {
        return Err(Error::DimensionMismatch { expected: r1.len(), got: r2.len() });
    }
    Ok(rat::primitive_int(r1) == rat::primitive_int(r2))
}

/// Subset of coordinate indices `{0, …, n-1}`, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Support(pub u32);

impl Support {
    pub const EMPTY: Support = Support(0);

    pub fn full(n: usize) -> Support {
        Support(((1u64 << n) - 1) as u32)
    }

    /// From 0-based indices.
    pub fn from_indices(idx: &[usize]) -> Support {
        Support(idx.iter().fold(0u32, |m, &i| m | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Support) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// 1-based labels, as used in files and on the command line.
    pub fn labels(self) -> Vec<usize> {
        self.indices().map(|i| i + 1).collect()
    }

    pub fn from_labels(labels: &[usize]) -> Result<Support> {
        let mut m = 0u32;
        for &l in labels {
            if l == 0 || l > 32 {
                return Err(Error::Invalid(format!("support label {l} out of range")));
            }
            m |= 1 << (l - 1);
        }
        Ok(Support(m))
    }

    /// All subsets of `self`, including `∅` and `self`.
    pub fn subsets(self) -> impl Iterator<Item = Support> {
        let full = self.0;
        let mut cur = Some(full);
        std::iter::from_fn(move || {
            let s = cur?;
            cur = if s == 0 { None } else { Some((s - 1) & full) };
            Some(Support(s))
        })
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for Support {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.labels())
    }
}

impl<'de> Deserialize<'de> for Support {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Support::from_labels(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExcludedJson {
    Keyword(String),
    List(Vec<Support>),
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    weights: Vec<Vec<i64>>,
    #[serde(default = "none_keyword")]
    excluded_supports: ExcludedJson,
}

fn none_keyword() -> ExcludedJson {
    ExcludedJson::Keyword("none".into())
}

/// Torus `𝐆_m^k` acting on `𝐀ⁿ` with weight rows `A_i`, restricted to points whose
/// coordinate support is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct DegenerationModel {
    weights: Vec<Vec<i64>>,
    rank: usize,
    excluded: Vec<Support>,
}

impl TryFrom<ModelJson> for DegenerationModel {
    type Error = Error;
    fn try_from(m: ModelJson) -> Result<Self> {
        let excluded = match m.excluded_supports {
            ExcludedJson::Keyword(k) if k == "none" => Vec::new(),
            ExcludedJson::Keyword(k) if k == "punctured" => vec![Support::EMPTY],
            ExcludedJson::Keyword(k) => {
                return Err(Error::Parse(format!("unknown excluded_supports keyword {k:?}")))
            }
            ExcludedJson::List(l) => l,
        };
        DegenerationModel::new(m.weights, excluded)
    }
}

impl From<DegenerationModel> for ModelJson {
    fn from(m: DegenerationModel) -> Self {
        let excluded_supports = if m.excluded.is_empty() {
            none_keyword()
        } else {
            ExcludedJson::List(m.excluded)
        };
        ModelJson { weights: m.weights, excluded_supports }
    }
}

pub const MAX_COORDS: usize = 16;

impl DegenerationModel {
    pub fn new(weights: Vec<Vec<i64>>, mut excluded: Vec<Support>) -> Result<Self> {
        let rank = weights.first().map_or(0, Vec::len);
        if weights.is_empty() || rank == 0 {
            return Err(Error::Invalid("weight matrix must be nonempty".into()));
        }
        if let Some(r) = weights.iter().find(|r| r.len() != rank) {
            return Err(Error::DimensionMismatch { expected: rank, got: r.len() });
        }
        if weights.len() > MAX_COORDS {
            return Err(Error::TooLarge(format!("{} coordinates (limit {MAX_COORDS})", weights.len())));
        }
        let full = Support::full(weights.len());
        if let Some(s) = excluded.iter().find(|s| !s.is_subset(full)) {
            return Err(Error::Invalid(format!("excluded support {s} mentions unknown coordinates")));
        }
        excluded.sort();
        excluded.dedup();
        Ok(DegenerationModel { weights, rank, excluded })
    }

    /// Every support allowed.
    pub fn affine(weights: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(weights, Vec::new())
    }

    /// `𝐀ⁿ ∖ {0}`: the empty support is excluded.
    pub fn punctured(weights: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(weights, vec![Support::EMPTY])
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn k(&self) -> usize {
        self.rank
    }

    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn is_allowed(&self, s: Support) -> bool {
        s.is_subset(Support::full(self.n())) && !self.excluded.contains(&s)
    }

    pub fn allowed_supports(&self) -> Vec<Support> {
        let mut v: Vec<Support> = Support::full(self.n()).subsets().filter(|s| self.is_allowed(*s)).collect();
        v.sort();
        v
    }

    pub fn pairing(&self, i: usize, lambda: &[Rat]) -> Rat {
        rat::dot_int(&self.weights[i], lambda)
    }

    /// `{i ∈ S : A_i·λ = 0}`, the support of `lim λ(t)·p`.
    pub fn limit_support(&self, s: Support, lambda: &[Rat]) -> Support {
        Support::from_indices(&s.indices().filter(|&i| self.pairing(i, lambda).is_zero()).collect::<Vec<_>>())
    }

    /// Whether `lim_{t→0} λ(t)·p` exists for points of support `S`.
    pub fn limit_exists(&self, s: Support, lambda: &[Rat]) -> bool {
        s.indices().all(|i| !self.pairing(i, lambda).is_negative())
    }
}

/// `{λ : A_i·λ ≥ 0 for i ∈ S}`.
pub fn admissible_cone(d: &DegenerationModel, s: Support) -> Result<RationalCone> {
    admissible_face(d, s, Support::EMPTY)
}

/// Face of the admissible cone where additionally `A_i·λ = 0` for `i ∈ tight`.
pub fn admissible_face(d: &DegenerationModel, s: Support, tight: Support) -> Result<RationalCone> {
    let ineqs: Vec<Vec<Rat>> = s
        .indices()
        .filter(|i| !tight.contains(*i))
        .map(|i| rat::rvec(&d.weights[i]))
        .collect();
    let eqs: Vec<Vec<Rat>> = tight.indices().map(|i| rat::rvec(&d.weights[i])).collect();
    RationalCone::from_halfspaces(d.k(), &ineqs, &eqs)
}

/// `fan_cones` for `h_[n]`: nonnegative injective matrices.
pub fn representable_accepts(m: &[Vec<i64>], n: usize) -> bool {
    morphism_check(m, n, m.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rvec;

    fn cone(gens: &[&[i64]]) -> RationalCone {
        let g: Vec<Vec<i64>> = gens.iter().map(|x| x.to_vec()).collect();
        RationalCone::new(g[0].len(), &g).unwrap()
    }

    #[test]
    fn fan_cones_examples() {
        let f = FormalFan::representable(2);
        assert!(f.fan_cones(2, &[vec![1, 0], vec![0, 1]]).unwrap());
        assert!(!f.fan_cones(2, &[vec![1, 0], vec![0, -1]]).unwrap());
        let g = FormalFan::new(2, vec![cone(&[&[1, 0], &[0, 1]]), cone(&[&[-1, 0], &[0, -1]])]).unwrap();
        assert!(!g.fan_cones(2, &[vec![1, -1], vec![1, -1]]).unwrap());
        assert!(g.fan_cones(1, &[vec![-1], vec![-2]]).unwrap());
        assert!(matches!(f.fan_cones(1, &[vec![1]]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn realization_examples() {
        let f = FormalFan::representable(2);
        assert!(f.realization_contains(&rvec(&[1, 2])));
        assert!(!f.realization_contains(&rvec(&[-1, 0])));
        let p1 = toric_degeneration_fan(&[cone(&[&[1]]), cone(&[&[-1]])], &[vec![1]]).unwrap();
        assert!(p1.realization_contains(&rvec(&[-5])));
        assert!(p1.is_classical());
    }

    #[test]
    fn restrict_examples() {
        let f = FormalFan::representable(2);
        let phi = ConeMorphism::new(vec![vec![2, 0], vec![0, 3]], 2).unwrap();
        let r = f.restrict(&phi).unwrap();
        assert!(r.same_realization(&FormalFan::representable(2), &[rvec(&[1, -1])]));

        let g = FormalFan::new(2, vec![cone(&[&[1, 0], &[1, 2]])]).unwrap();
        let col = ConeMorphism::new(vec![vec![1], vec![1]], 1).unwrap();
        assert!(g.restrict(&col).unwrap().same_realization(&FormalFan::representable(1), &[]));

        let h = FormalFan::new(2, vec![cone(&[&[1, 0]])]).unwrap();
        let col = ConeMorphism::new(vec![vec![0], vec![1]], 1).unwrap();
        assert!(h.restrict(&col).unwrap().pieces().is_empty());
    }

    #[test]
    fn toric_examples() {
        let id = vec![vec![1, 0], vec![0, 1]];
        let f = toric_degeneration_fan(&[RationalCone::orthant(2)], &id).unwrap();
        assert!(f.same_realization(&FormalFan::representable(2), &[rvec(&[-1, 1])]));
        let half = toric_degeneration_fan(&[cone(&[&[1]])], &[vec![1, 1]]).unwrap();
        assert!(half.realization_contains(&rvec(&[3, -3])));
        assert!(half.realization_contains(&rvec(&[-1, 2])));
        assert!(!half.realization_contains(&rvec(&[-1, 0])));
        assert_eq!(
            toric_degeneration_fan(&[cone(&[&[1]])], &[vec![1, 1], vec![2, 2]]).unwrap_err(),
            Error::NotSurjective
        );
    }

    #[test]
    fn admissible_examples() {
        let d = DegenerationModel::affine(vec![vec![1], vec![-1]]).unwrap();
        assert!(admissible_cone(&d, Support::full(2)).unwrap().is_zero());
        let all = admissible_cone(&d, Support::EMPTY).unwrap();
        assert!(all.contains(&rvec(&[-7])).unwrap() && all.contains(&rvec(&[7])).unwrap());
        let e = DegenerationModel::affine(vec![vec![1], vec![1]]).unwrap();
        assert_eq!(admissible_cone(&e, Support::full(2)).unwrap(), RationalCone::orthant(1));
    }

    #[test]
    fn projective_equality() {
        assert!(proj_points_equal(&rvec(&[2, 4]), &rvec(&[1, 2])).unwrap());
        assert!(!proj_points_equal(&rvec(&[1, 2]), &rvec(&[-1, -2])).unwrap());
        assert!(!proj_points_equal(&rvec(&[1, 0]), &rvec(&[1, 1])).unwrap());
        assert_eq!(proj_points_equal(&rvec(&[0, 0]), &rvec(&[1, 1])), Err(Error::ZeroVector));
    }

    #[test]
    fn supports_and_model_json() {
        let s = Support::from_labels(&[1, 3]).unwrap();
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(s.subsets().count(), 4);
        let m: DegenerationModel =
            serde_json::from_str(r#"{"weights":[[-1],[0],[1]],"excluded_supports":[[]]}"#).unwrap();
        assert!(!m.is_allowed(Support::EMPTY));
        assert_eq!(m.allowed_supports().len(), 7);
        let p: DegenerationModel =
            serde_json::from_str(r#"{"weights":[[1]],"excluded_supports":"punctured"}"#).unwrap();
        assert_eq!(p, DegenerationModel::punctured(vec![vec![1]]).unwrap());
        let n: DegenerationModel = serde_json::from_str(r#"{"weights":[[1],[2]],"excluded_supports":"none"}"#).unwrap();
        assert_eq!(n.allowed_supports().len(), 4);
    }
}
