//! Exact rational polyhedral cones: rays, halfspace descriptions via double description,
//! intersections, faces, placing triangulations and fans.

use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::rat::{self, dot, dot_int, Rat};

/// Primitive nonzero integer vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Ray(Vec<i64>);

impl Ray {
    pub fn new(v: &[i64]) -> Result<Ray> {
        canonicalize_ray(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_rat(&self) -> Vec<Rat> {
        rat::rvec(&self.0)
    }

    /// Primitive ray pointing along a nonzero rational vector.
    pub fn from_rat(v: &[Rat]) -> Result<Ray> {
        Ok(Ray(rat::primitive_i64(v)?))
    }
}

impl<'de> Deserialize<'de> for Ray {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        canonicalize_ray(&v).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for Ray {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn canonicalize_ray(v: &[i64]) -> Result<Ray> {
    let g = v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    Ok(Ray(v.iter().map(|x| x / g).collect()))
}

/// Halfspace description: `e·x = 0` for every equality, `h·x ≥ 0` for every inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HRep {
    pub equalities: Vec<Vec<i64>>,
    pub inequalities: Vec<Vec<i64>>,
}

impl HRep {
    fn contains(&self, x: &[Rat]) -> bool {
        self.equalities.iter().all(|e| dot_int(e, x).is_zero())
            && self.inequalities.iter().all(|h| !dot_int(h, x).is_negative())
    }

    fn tight(&self, x: &[Rat]) -> Vec<bool> {
        self.inequalities.iter().map(|h| dot_int(h, x).is_zero()).collect()
    }
}

/// Double description: extreme rays and a lineality basis of `{x : a·x ≥ 0 for all a}`.
pub(crate) fn double_description(dim: usize, ineqs: &[Vec<Rat>]) -> (Mat, Mat) {
    let mut lin: Mat = (0..dim)
        .map(|i| {
            let mut e = vec![Rat::zero(); dim];
            e[i] = Rat::from_integer(1.into());
            e
        })
        .collect();
    let mut rays: Mat = Vec::new();
    for (step, a) in ineqs.iter().enumerate() {
        if let Some(idx) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lin.remove(idx);
            if dot(a, &l0).is_negative() {
                l0.iter_mut().for_each(|x| *x = -x.clone());
            }
            let s0 = dot(a, &l0);
            for v in lin.iter_mut().chain(rays.iter_mut()) {
                let f = dot(a, v) / &s0;
                if !f.is_zero() {
                    for (x, y) in v.iter_mut().zip(&l0) {
                        *x -= &f * y;
                    }
                }
            }
            rays.push(l0);
            continue;
        }
        let vals: Vec<Rat> = rays.iter().map(|r| dot(a, r)).collect();
        let zero_sets: Vec<Vec<bool>> = rays
            .iter()
            .map(|r| ineqs[..step].iter().map(|b| dot(b, r).is_zero()).collect())
            .collect();
        let mut next: Mat = rays
            .iter()
            .zip(&vals)
            .filter(|(_, v)| !v.is_negative())
            .map(|(r, _)| r.clone())
            .collect();
        for (p, vp) in vals.iter().enumerate().filter(|(_, v)| v.is_positive()) {
            for (n, vn) in vals.iter().enumerate().filter(|(_, v)| v.is_negative()) {
                let common: Vec<bool> = zero_sets[p]
                    .iter()
                    .zip(&zero_sets[n])
                    .map(|(x, y)| *x && *y)
                    .collect();
                let blocked = (0..rays.len()).any(|o| {
                    o != p
                        && o != n
                        && common.iter().zip(&zero_sets[o]).all(|(c, z)| !*c || *z)
                });
                if blocked {
                    continue;
                }
                let r: Vec<Rat> = rays[n]
                    .iter()
                    .zip(&rays[p])
                    .map(|(xn, xp)| vp * xn - vn * xp)
                    .collect();
                next.push(r);
            }
        }
        rays = next;
        for r in rays.iter_mut() {
            normalize(r);
        }
    }
    for l in lin.iter_mut() {
        normalize(l);
    }
    (rays, lin)
}

fn normalize(v: &mut [Rat]) {
    if let Some(p) = rat::primitive_int(v) {
        for (x, y) in v.iter_mut().zip(p) {
            *x = Rat::from_integer(y);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ConeJson {
    dim: usize,
    generators: Vec<Vec<i64>>,
}

/// Cone spanned by nonnegative combinations of its generators. Generators are primitive
/// and deduplicated; the halfspace description is computed on first use.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "ConeJson", into = "ConeJson")]
pub struct RationalCone {
    dim: usize,
    gens: Vec<Ray>,
    hrep: OnceLock<HRep>,
}

impl Clone for RationalCone {
    fn clone(&self) -> Self {
        let hrep = OnceLock::new();
        if let Some(h) = self.hrep.get() {
            let _ = hrep.set(h.clone());
        }
        RationalCone { dim: self.dim, gens: self.gens.clone(), hrep }
    }
}

impl TryFrom<ConeJson> for RationalCone {
    type Error = Error;
    fn try_from(c: ConeJson) -> Result<Self> {
        RationalCone::new(c.dim, &c.generators)
    }
}

impl From<RationalCone> for ConeJson {
    fn from(c: RationalCone) -> Self {
        ConeJson { dim: c.dim, generators: c.gens.iter().map(|r| r.0.clone()).collect() }
    }
}

impl PartialEq for RationalCone {
    /// Extensional equality.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.contains_cone(other) && other.contains_cone(self)
    }
}

impl RationalCone {
    pub fn new(dim: usize, gens: &[Vec<i64>]) -> Result<Self> {
        let mut rays: Vec<Ray> = Vec::with_capacity(gens.len());
        for g in gens {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.len() });
            }
            let r = canonicalize_ray(g)?;
            if !rays.contains(&r) {
                rays.push(r);
            }
        }
        Ok(RationalCone { dim, gens: rays, hrep: OnceLock::new() })
    }

    pub fn from_rays(dim: usize, rays: Vec<Ray>) -> Result<Self> {
        let gens: Vec<Vec<i64>> = rays.into_iter().map(|r| r.0).collect();
        Self::new(dim, &gens)
    }

    pub fn zero(dim: usize) -> Self {
        RationalCone { dim, gens: Vec::new(), hrep: OnceLock::new() }
    }

    /// The nonnegative orthant of `ℝⁿ`.
    pub fn orthant(n: usize) -> Self {
        let gens: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::new(n, &gens).expect("standard basis")
    }

    /// Cone given by halfspaces `h·x ≥ 0` and equalities `e·x = 0`.
    pub fn from_halfspaces(dim: usize, inequalities: &[Vec<Rat>], equalities: &[Vec<Rat>]) -> Result<Self> {
        for h in inequalities.iter().chain(equalities) {
            if h.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h.len() });
            }
        }
        let mut all: Mat = inequalities.to_vec();
        for e in equalities {
            all.push(e.clone());
            all.push(e.iter().map(|x| -x.clone()).collect());
        }
        let (rays, lin) = double_description(dim, &all);
        let mut gens: Vec<Vec<i64>> = Vec::new();
        for r in rays {
            gens.push(rat::primitive_i64(&r)?);
        }
        for l in lin {
            let p = rat::primitive_i64(&l)?;
            gens.push(p.iter().map(|x| -x).collect());
            gens.push(p);
        }
        gens.sort();
        Self::new(dim, &gens)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Ray] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    fn gen_mat(&self) -> Mat {
        self.gens.iter().map(Ray::to_rat).collect()
    }

    /// Dimension of the linear span.
    pub fn span_dim(&self) -> usize {
        linalg::rank(&self.gen_mat(), self.dim)
    }

    pub fn is_simplicial(&self) -> bool {
        self.span_dim() == self.gens.len()
    }

    pub fn hrep(&self) -> &HRep {
        self.hrep.get_or_init(|| self.compute_hrep())
    }

    fn compute_hrep(&self) -> HRep {
        let gens = self.gen_mat();
        let (normals, lin) = double_description(self.dim, &gens);
        let basis = independent_rows(&gens, self.dim);
        let proj = linalg::projector(&basis, self.dim);
        let mut inequalities: Vec<Vec<i64>> = normals
            .iter()
            .filter_map(|h| rat::primitive_i64(&linalg::mat_vec(&proj, h)).ok())
            .collect();
        inequalities.sort();
        inequalities.dedup();
        let equalities = lin
            .iter()
            .map(|e| rat::primitive_i64(e).expect("nonzero basis vector"))
            .collect();
        HRep { equalities, inequalities }
    }

    pub fn contains(&self, x: &[Rat]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.hrep().contains(x))
    }

    pub fn contains_int(&self, x: &[i64]) -> Result<bool> {
        self.contains(&rat::rvec(x))
    }

    /// A functional certifying `x ∉ C`: an equality with nonzero value or a violated facet.
    pub fn separating_functional(&self, x: &[Rat]) -> Option<Vec<i64>> {
        let h = self.hrep();
        for e in &h.equalities {
            let v = dot_int(e, x);
            if v.is_positive() {
                return Some(e.iter().map(|c| -c).collect());
            }
            if v.is_negative() {
                return Some(e.clone());
            }
        }
        h.inequalities.iter().find(|f| dot_int(f, x).is_negative()).cloned()
    }

    pub fn contains_cone(&self, other: &RationalCone) -> bool {
        other.gens.iter().all(|g| self.hrep().contains(&g.to_rat()))
    }

    /// Contains no line.
    pub fn is_pointed(&self) -> bool {
        let h = self.hrep();
        let rows: Vec<Vec<i64>> = h.equalities.iter().chain(&h.inequalities).cloned().collect();
        linalg::rank(&linalg::from_i64(&rows), self.dim) == self.dim
    }

    /// Smallest face containing `x` (assumed to lie in the cone).
    pub fn face_containing(&self, x: &[Rat]) -> RationalCone {
        let tight = self.hrep().tight(x);
        let gens: Vec<Ray> = self
            .gens
            .iter()
            .filter(|g| {
                let t = self.hrep().tight(&g.to_rat());
                tight.iter().zip(&t).all(|(a, b)| !*a || *b)
            })
            .cloned()
            .collect();
        RationalCone { dim: self.dim, gens, hrep: OnceLock::new() }
    }

    pub fn interior_point(&self) -> Vec<Rat> {
        let mut p = vec![Rat::zero(); self.dim];
        for g in &self.gens {
            for (x, c) in p.iter_mut().zip(g.coords()) {
                *x += Rat::from_integer((*c).into());
            }
        }
        p
    }

    /// `face` is a face of `self`.
    pub fn has_face(&self, face: &RationalCone) -> bool {
        if !self.contains_cone(face) {
            return false;
        }
        let minimal = self.face_containing(&face.interior_point());
        face.contains_cone(&minimal)
    }

    pub fn intersect(&self, other: &RationalCone) -> Result<RationalCone> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let (a, b) = (self.hrep(), other.hrep());
        let ineqs: Mat = a
            .inequalities
            .iter()
            .chain(&b.inequalities)
            .map(|h| rat::rvec(h))
            .collect();
        let eqs: Mat = a.equalities.iter().chain(&b.equalities).map(|h| rat::rvec(h)).collect();
        RationalCone::from_halfspaces(self.dim, &ineqs, &eqs)
    }

    /// Pointed cones covering `self`: the cone itself if pointed, otherwise its nonzero
    /// intersections with the closed coordinate orthants.
    pub fn pointed_cover(&self) -> Result<Vec<RationalCone>> {
        if self.is_pointed() {
            return Ok(vec![self.clone()]);
        }
        let n = self.dim;
        let mut out: Vec<RationalCone> = Vec::new();
        for signs in 0u32..(1 << n) {
            let gens: Vec<Vec<i64>> = (0..n)
                .map(|i| {
                    let mut e = vec![0; n];
                    e[i] = if signs >> i & 1 == 1 { -1 } else { 1 };
                    e
                })
                .collect();
            let piece = self.intersect(&RationalCone::new(n, &gens)?)?;
            if !piece.is_zero() && !out.contains(&piece) {
                out.push(piece);
            }
        }
        Ok(out)
    }

    /// Placing triangulation in generator order; generators already covered are inserted
    /// by stellar subdivision so that every generator becomes a ray of some piece.
    pub fn simplicial_subdivision(&self) -> Result<Vec<RationalCone>> {
        if !self.is_pointed() {
            return Err(Error::NotStrictlyConvex);
        }
        if self.gens.is_empty() || self.is_simplicial() {
            return Ok(vec![self.clone()]);
        }
        let pts = self.gen_mat();
        let mut simplices: Vec<Vec<usize>> = vec![vec![0]];
        let mut basis: Mat = vec![pts[0].clone()];
        for i in 1..pts.len() {
            let mut extended = basis.clone();
            extended.push(pts[i].clone());
            if linalg::rank(&extended, self.dim) > basis.len() {
                basis = extended;
                for s in simplices.iter_mut() {
                    s.push(i);
                }
                continue;
            }
            let coords: Vec<Option<Vec<Rat>>> =
                simplices.iter().map(|s| simplex_coords(&pts, s, &pts[i], self.dim)).collect();
            if coords.iter().any(Option::is_some) {
                let mut next = Vec::new();
                for (s, c) in simplices.iter().zip(coords) {
                    match c {
                        None => next.push(s.clone()),
                        Some(c) => {
                            for (k, _) in c.iter().enumerate().filter(|(_, x)| x.is_positive()) {
                                let mut t = s.clone();
                                t[k] = i;
                                next.push(t);
                            }
                        }
                    }
                }
                simplices = next;
            } else {
                let mut added = Vec::new();
                for s in &simplices {
                    for drop in 0..s.len() {
                        let facet: Vec<usize> =
                            s.iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, &v)| v).collect();
                        let shared = simplices
                            .iter()
                            .filter(|t| facet.iter().all(|v| t.contains(v)))
                            .count();
                        if shared != 1 {
                            continue;
                        }
                        let h = facet_normal(&basis, &pts, &facet, self.dim);
                        let sign = dot(&h, &pts[s[drop]]);
                        let side = dot(&h, &pts[i]);
                        if (sign.is_positive() && side.is_negative()) || (sign.is_negative() && side.is_positive()) {
                            let mut t = facet.clone();
                            t.push(i);
                            added.push(t);
                        }
                    }
                }
                simplices.extend(added);
            }
        }
        let mut pieces: Vec<Vec<usize>> = simplices
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        pieces.sort();
        pieces
            .into_iter()
            .map(|s| RationalCone::from_rays(self.dim, s.iter().map(|&k| self.gens[k].clone()).collect()))
            .collect()
    }
}

fn independent_rows(rows: &[Vec<Rat>], dim: usize) -> Mat {
    let mut basis: Mat = Vec::new();
    for r in rows {
        let mut t = basis.clone();
        t.push(r.clone());
        if linalg::rank(&t, dim) > basis.len() {
            basis = t;
        }
    }
    basis
}

/// Coordinates of `x` in the simplex basis when they are all nonnegative.
fn simplex_coords(pts: &[Vec<Rat>], s: &[usize], x: &[Rat], dim: usize) -> Option<Vec<Rat>> {
    let cols: Mat = s.iter().map(|&k| pts[k].clone()).collect();
    let a = linalg::transpose(&cols, dim);
    let c = linalg::solve_any(&a, x, s.len())?;
    if c.iter().any(Signed::is_negative) {
        None
    } else {
        Some(c)
    }
}

/// Normal inside span(basis) vanishing on the facet's points.
fn facet_normal(basis: &[Vec<Rat>], pts: &[Vec<Rat>], facet: &[usize], dim: usize) -> Vec<Rat> {
    let m: Mat = facet
        .iter()
        .map(|&u| basis.iter().map(|b| dot(b, &pts[u])).collect())
        .collect();
    let ns = linalg::nullspace(&m, basis.len());
    let alpha = &ns[0];
    let mut h = vec![Rat::zero(); dim];
    for (a, b) in alpha.iter().zip(basis) {
        for (x, y) in h.iter_mut().zip(b) {
            *x += a * y;
        }
    }
    h
}

/// Facet functionals with each equality reported as a pair of opposite functionals.
pub fn cone_facets(c: &RationalCone) -> Vec<Vec<i64>> {
    let h = c.hrep();
    let mut out = Vec::new();
    for e in &h.equalities {
        out.push(e.clone());
        out.push(e.iter().map(|x| -x).collect());
    }
    out.extend(h.inequalities.iter().cloned());
    out
}

pub fn cone_contains(c: &RationalCone, x: &[Rat]) -> Result<bool> {
    c.contains(x)
}

pub fn intersect(a: &RationalCone, b: &RationalCone) -> Result<RationalCone> {
    a.intersect(b)
}

pub fn simplicial_subdivision(c: &RationalCone) -> Result<Vec<RationalCone>> {
    c.simplicial_subdivision()
}

/// Every pairwise intersection is a face of both cones.
pub fn is_classical_fan(cones: &[RationalCone]) -> bool {
    for (i, a) in cones.iter().enumerate() {
        for b in &cones[i + 1..] {
            let Ok(m) = a.intersect(b) else { return false };
            if !a.has_face(&m) || !b.has_face(&m) {
                return false;
            }
        }
    }
    true
}

/// `m` is `n × k`: nonnegative entries and rank `k`.
pub fn morphism_check(m: &[Vec<i64>], k: usize, n: usize) -> bool {
    if m.len() != n || m.iter().any(|r| r.len() != k) {
        return false;
    }
    if m.iter().flatten().any(|&x| x < 0) {
        return false;
    }
    linalg::rank(&linalg::from_i64(m), k) == k
}

/// Morphism of integral simplicial cones `[k] → [n]`; columns are images of basis vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeMorphism {
    rows: Vec<Vec<i64>>,
    k: usize,
}

impl ConeMorphism {
    pub fn new(rows: Vec<Vec<i64>>, k: usize) -> Result<Self> {
        let n = rows.len();
        if !morphism_check(&rows, k, n) {
            return Err(Error::Invalid("matrix is not a morphism of simplicial cones".into()));
        }
        Ok(ConeMorphism { rows, k })
    }

    /// Matrix with the given columns, no sign or rank requirement.
    pub fn from_columns_unchecked(cols: &[Vec<i64>]) -> Self {
        let n = cols.first().map_or(0, Vec::len);
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        ConeMorphism { rows, k: cols.len() }
    }

    pub fn source_dim(&self) -> usize {
        self.k
    }

    pub fn target_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.rows.iter().map(|r| dot_int(r, x)).collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ConeMorphism) -> ConeMorphism {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..inner.k)
                    .map(|j| r.iter().zip(&inner.rows).map(|(a, ir)| a * ir[j]).sum())
                    .collect()
            })
            .collect();
        ConeMorphism { rows, k: inner.k }
    }
}

#[derive(Serialize, Deserialize)]
struct FanJson {
    dim: usize,
    cones: Vec<RationalCone>,
}

/// Finite collection of cones in a common ambient space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FanJson", into = "FanJson")]
pub struct Fan {
    dim: usize,
    cones: Vec<RationalCone>,
}

impl TryFrom<FanJson> for Fan {
    type Error = Error;
    fn try_from(f: FanJson) -> Result<Self> {
        Fan::new(f.dim, f.cones)
    }
}

impl From<Fan> for FanJson {
    fn from(f: Fan) -> Self {
        FanJson { dim: f.dim, cones: f.cones }
    }
}

impl Fan {
    /// Drops extensional duplicates.
    pub fn new(dim: usize, cones: Vec<RationalCone>) -> Result<Self> {
        let mut out: Vec<RationalCone> = Vec::new();
        for c in cones {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.dim() });
            }
            if !out.contains(&c) {
                out.push(c);
            }
        }
        Ok(Fan { dim, cones: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cones(&self) -> &[RationalCone] {
        &self.cones
    }

    pub fn locate(&self, x: &[Rat]) -> Option<usize> {
        self.cones.iter().position(|c| c.contains(x).unwrap_or(false))
    }

    pub fn is_classical(&self) -> bool {
        is_classical_fan(&self.cones)
    }
}
