//! Numerical invariants on fans: the piecewise-linear `l̂`, the piecewise-quadratic `b̂`,
//! exact values of `μ = l̂/√b̂`, and the tautological-coefficient calculus for test
//! configurations.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cones::{ConeMorphism, Fan, RationalCone};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::rat::{self, dot, Rat, RatJson};

/// A linear functional on each cone of a fan, agreeing on overlaps.
#[derive(Debug, Clone)]
pub struct PLClass {
    fan: Fan,
    per_cone: Vec<Vec<Rat>>,
}

/// A symmetric bilinear form on each cone of a fan, agreeing on overlaps.
#[derive(Debug, Clone)]
pub struct PQClass {
    fan: Fan,
    per_cone: Vec<Mat>,
}

fn check_count(fan: &Fan, got: usize) -> Result<()> {
    if fan.cones().len() != got {
        return Err(Error::DimensionMismatch { expected: fan.cones().len(), got });
    }
    Ok(())
}

fn check_len(n: usize, v: &[Rat]) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(())
}

fn gens_of(c: &RationalCone) -> Mat {
    c.generators().iter().map(|g| g.to_rat()).collect()
}

impl PLClass {
    pub fn new(fan: Fan, per_cone: Vec<Vec<Rat>>) -> Result<Self> {
        check_count(&fan, per_cone.len())?;
        for f in &per_cone {
            check_len(fan.dim(), f)?;
        }
        let cones = fan.cones();
        for i in 0..cones.len() {
            for j in i + 1..cones.len() {
                let shared = cones[i].intersect(&cones[j])?;
                for g in gens_of(&shared) {
                    if dot(&per_cone[i], &g) != dot(&per_cone[j], &g) {
                        return Err(Error::IncompatibleClass(i, j));
                    }
                }
            }
        }
        Ok(PLClass { fan, per_cone })
    }

    /// The same functional on every cone.
    pub fn global(fan: Fan, f: Vec<Rat>) -> Result<Self> {
        let per_cone = vec![f; fan.cones().len()];
        Self::new(fan, per_cone)
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn per_cone(&self) -> &[Vec<Rat>] {
        &self.per_cone
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Rat> {
        check_len(self.fan.dim(), x)?;
        let i = self.fan.locate(x).ok_or(Error::OutsideSupport)?;
        Ok(dot(&self.per_cone[i], x))
    }
}

impl PQClass {
    pub fn new(fan: Fan, per_cone: Vec<Mat>) -> Result<Self> {
        check_count(&fan, per_cone.len())?;
        let n = fan.dim();
        for q in &per_cone {
            if q.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: q.len() });
            }
            for (i, row) in q.iter().enumerate() {
                check_len(n, row)?;
                if (0..n).any(|j| row[j] != q[j][i]) {
                    return Err(Error::Invalid("quadratic form is not symmetric".into()));
                }
            }
        }
        let cones = fan.cones();
        for i in 0..cones.len() {
            for j in i + 1..cones.len() {
                let g = gens_of(&cones[i].intersect(&cones[j])?);
                for (a, u) in g.iter().enumerate() {
                    for v in &g[a..] {
                        if linalg::bilinear(&per_cone[i], u, v) != linalg::bilinear(&per_cone[j], u, v) {
                            return Err(Error::IncompatibleClass(i, j));
                        }
                    }
                }
            }
        }
        Ok(PQClass { fan, per_cone })
    }

    pub fn global(fan: Fan, q: Mat) -> Result<Self> {
        let per_cone = vec![q; fan.cones().len()];
        Self::new(fan, per_cone)
    }

    pub fn identity(fan: Fan) -> Result<Self> {
        let n = fan.dim();
        let q = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        Self::global(fan, q)
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn per_cone(&self) -> &[Mat] {
        &self.per_cone
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Rat> {
        check_len(self.fan.dim(), x)?;
        let i = self.fan.locate(x).ok_or(Error::OutsideSupport)?;
        Ok(linalg::quad(&self.per_cone[i], x))
    }

    /// Minimum of `b̂` over the probability simplex of each pointed piece, as a sign test.
    fn cone_minima(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        for (c, q) in self.fan.cones().iter().zip(&self.per_cone) {
            let Ok(pieces) = c.pointed_cover() else { continue };
            for p in pieces.iter().filter(|p| !p.is_zero()) {
                out.push(linalg::simplex_min(&gram(q, &gens_of(p))));
            }
        }
        out
    }
}

/// `V q Vᵀ` for generator rows `V`.
pub(crate) fn gram(q: &[Vec<Rat>], v: &[Vec<Rat>]) -> Mat {
    v.iter()
        .map(|u| v.iter().map(|w| linalg::bilinear(q, u, w)).collect())
        .collect()
}

pub fn eval_pl(l: &PLClass, x: &[Rat]) -> Result<Rat> {
    l.eval(x)
}

pub fn eval_pq(b: &PQClass, x: &[Rat]) -> Result<Rat> {
    b.eval(x)
}

/// `b̂(x) > 0` for every nonzero `x` in the support, decided exactly by minimizing the
/// form over the generator simplex of every pointed piece.
pub fn is_positive_definite(b: &PQClass) -> bool {
    b.cone_minima().iter().all(Signed::is_positive)
}

pub fn is_positive_semidefinite(b: &PQClass) -> bool {
    b.cone_minima().iter().all(|m| !m.is_negative())
}

/// Exact value `L/√B`; `B = 0` is read as `±∞` according to the sign of `L`.
///
/// Serializes as `{"L": "p/q", "B": "p/q", "approx": float}`; `approx` is ignored on input.
#[derive(Debug, Clone, Deserialize)]
pub struct MuValue {
    #[serde(rename = "L", with = "rat::serde_rat")]
    l: Rat,
    #[serde(rename = "B", with = "rat::serde_rat")]
    b: Rat,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum Band {
    NegInf,
    Finite,
    PosInf,
}

impl MuValue {
    pub fn new(l: Rat, b: Rat) -> Result<Self> {
        if b.is_negative() {
            return Err(Error::Invalid(format!("negative denominator square {b}")));
        }
        Ok(MuValue { l, b })
    }

    pub fn zero() -> Self {
        MuValue { l: Rat::zero(), b: Rat::one() }
    }

    pub fn l(&self) -> &Rat {
        &self.l
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn sign(&self) -> i8 {
        rat::sign(&self.l)
    }

    pub fn is_infinite(&self) -> bool {
        self.b.is_zero() && !self.l.is_zero()
    }

    fn band(&self) -> Band {
        match (self.b.is_zero(), self.sign()) {
            (true, 1) => Band::PosInf,
            (true, -1) => Band::NegInf,
            _ => Band::Finite,
        }
    }

    /// `μ²` with the sign of `μ`, for finite values.
    pub fn signed_square(&self) -> Option<Rat> {
        if self.b.is_zero() {
            return if self.l.is_zero() { Some(Rat::zero()) } else { None };
        }
        let sq = &self.l * &self.l / &self.b;
        Some(if self.l.is_negative() { -sq } else { sq })
    }

    pub fn float_view(&self) -> f64 {
        match self.band() {
            Band::PosInf => f64::INFINITY,
            Band::NegInf => f64::NEG_INFINITY,
            Band::Finite if self.l.is_zero() => 0.0,
            Band::Finite => rat::to_f64(&self.l) / rat::to_f64(&self.b).sqrt(),
        }
    }
}

impl Serialize for MuValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MuValue", 3)?;
        st.serialize_field("L", &rat::fmt_rat(&self.l))?;
        st.serialize_field("B", &rat::fmt_rat(&self.b))?;
        match self.band() {
            Band::Finite => st.serialize_field("approx", &self.float_view())?,
            Band::PosInf => st.serialize_field("approx", "+inf")?,
            Band::NegInf => st.serialize_field("approx", "-inf")?,
        }
        st.end()
    }
}

impl Ord for MuValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let band = self.band().cmp(&other.band());
        if band != Ordering::Equal || self.band() != Band::Finite {
            return band;
        }
        let (s1, s2) = (self.sign(), other.sign());
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        let lhs = &self.l * &self.l * &other.b;
        let rhs = &other.l * &other.l * &self.b;
        match s1 {
            1 => lhs.cmp(&rhs),
            -1 => rhs.cmp(&lhs),
            _ => Ordering::Equal,
        }
    }
}

impl PartialOrd for MuValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for MuValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MuValue {}

impl fmt::Display for MuValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.band() {
            Band::PosInf => write!(f, "+inf"),
            Band::NegInf => write!(f, "-inf"),
            Band::Finite => write!(f, "{}/sqrt({})", self.l, self.b),
        }
    }
}

pub fn compare_mu(a: &MuValue, b: &MuValue) -> Ordering {
    a.cmp(b)
}

/// The pair `(l, b)` sharing one fan.
#[derive(Debug, Clone)]
pub struct NumericalInvariant {
    l: PLClass,
    b: PQClass,
}

impl NumericalInvariant {
    pub fn new(l: PLClass, b: PQClass) -> Result<Self> {
        if l.fan.dim() != b.fan.dim() || l.fan.cones() != b.fan.cones() {
            return Err(Error::Invalid("l and b live on different fans".into()));
        }
        if !is_positive_semidefinite(&b) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(NumericalInvariant { l, b })
    }

    pub fn l(&self) -> &PLClass {
        &self.l
    }

    pub fn b(&self) -> &PQClass {
        &self.b
    }

    pub fn fan(&self) -> &Fan {
        &self.l.fan
    }

    pub fn dim(&self) -> usize {
        self.l.fan.dim()
    }

    /// Index of a cone containing `x` together with its linear and quadratic data.
    pub fn piece_at(&self, x: &[Rat]) -> Option<(usize, &[Rat], &Mat)> {
        let i = self.fan().locate(x)?;
        Some((i, &self.l.per_cone[i], &self.b.per_cone[i]))
    }
}

pub fn mu(inv: &NumericalInvariant, x: &[Rat]) -> Result<MuValue> {
    check_len(inv.dim(), x)?;
    if rat::is_zero_vec(x) {
        return Err(Error::ZeroVector);
    }
    MuValue::new(inv.l.eval(x)?, inv.b.eval(x)?)
}

/// Concavity of `l̂` across every wall: `l̂(x) + l̂(y) ≤ l̂(x + y)`.
///
/// For a wall `F` of `C` with inner normal `h`, a neighbouring cone `C'` containing `F` and
/// a generator `g'` of `C'` with `h·g' < 0`, the inequality holds near `F` iff the
/// functional of `C` dominates that of `C'` at `g'`.
pub fn is_convex_pl(l: &PLClass) -> Result<bool> {
    let cones = l.fan.cones();
    let maximal: Vec<usize> = (0..cones.len())
        .filter(|&i| {
            !(0..cones.len()).any(|j| j != i && cones[j].contains_cone(&cones[i]) && cones[j] != cones[i])
        })
        .collect();
    let all_gens: Vec<Vec<i64>> = maximal
        .iter()
        .flat_map(|&i| cones[i].generators().iter().map(|g| g.coords().to_vec()))
        .collect();
    if all_gens.is_empty() {
        return Ok(true);
    }
    let hull = RationalCone::new(l.fan.dim(), &all_gens)?;
    let hull_dim = hull.span_dim();
    if maximal.iter().any(|&i| cones[i].span_dim() != hull_dim) {
        return Err(Error::NonConvexSupport);
    }
    let mut convex = true;
    for &i in &maximal {
        let c = &cones[i];
        for h in &c.hrep().inequalities {
            let wall: Vec<Vec<Rat>> = gens_of(c)
                .into_iter()
                .filter(|g| rat::dot_int(h, g).is_zero())
                .collect();
            let on_boundary = hull
                .hrep()
                .inequalities
                .iter()
                .any(|f| wall.iter().all(|g| rat::dot_int(f, g).is_zero()));
            if on_boundary {
                continue;
            }
            let across = maximal.iter().filter(|&&j| j != i).find_map(|&j| {
                let other = &cones[j];
                if !wall.iter().all(|g| other.contains(g).unwrap_or(false)) {
                    return None;
                }
                gens_of(other)
                    .into_iter()
                    .find(|g| rat::dot_int(h, g).is_negative())
                    .map(|g| (j, g))
            });
            let Some((j, g)) = across else {
                return Err(Error::NonConvexSupport);
            };
            if dot(&l.per_cone[i], &g) < dot(&l.per_cone[j], &g) {
                convex = false;
            }
        }
    }
    Ok(convex)
}

/// Angle between the two boundary rays of `γ` in the metric defined by `b`.
pub fn spherical_length(b: &PQClass, gamma: &ConeMorphism) -> Result<f64> {
    if gamma.source_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: gamma.source_dim() });
    }
    check_len(b.fan.dim(), &vec![Rat::zero(); gamma.target_dim()])?;
    let u = rat::rvec(&gamma.column(0));
    let v = rat::rvec(&gamma.column(1));
    let w: Vec<Rat> = u.iter().zip(&v).map(|(a, c)| a + c).collect();
    let (bu, bv, bw) = (b.eval(&u)?, b.eval(&v)?, b.eval(&w)?);
    if !bu.is_positive() || !bv.is_positive() {
        return Err(Error::NotPositiveDefinite);
    }
    let num = bw - &bu - &bv;
    let sq = &num * &num / (Rat::from_integer(4.into()) * bu * bv);
    let cos = if sq >= Rat::one() { 1.0 } else { rat::to_f64(&sq).sqrt() };
    let cos = if num.is_negative() { -cos } else { cos };
    Ok(cos.clamp(-1.0, 1.0).acos())
}

#[derive(Deserialize, Serialize)]
struct ClassJson {
    fan: Fan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear: Option<Vec<Vec<RatJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quadratic: Option<Vec<Vec<Vec<RatJson>>>>,
}

fn mat_from_json(m: Vec<Vec<RatJson>>) -> Mat {
    m.into_iter().map(rat::from_json_vec).collect()
}

fn mat_to_json(m: &Mat) -> Vec<Vec<RatJson>> {
    m.iter().map(|r| rat::to_json_vec(r)).collect()
}

impl NumericalInvariant {
    /// Reads `{"fan": .., "linear": [..], "quadratic": [..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ClassJson = serde_json::from_str(text)?;
        let linear = raw.linear.ok_or_else(|| Error::Parse("missing \"linear\"".into()))?;
        let quadratic = raw.quadratic.ok_or_else(|| Error::Parse("missing \"quadratic\"".into()))?;
        let l = PLClass::new(raw.fan.clone(), linear.into_iter().map(rat::from_json_vec).collect())?;
        let b = PQClass::new(raw.fan, quadratic.into_iter().map(mat_from_json).collect())?;
        Self::new(l, b)
    }

    pub fn to_json(&self) -> String {
        let raw = ClassJson {
            fan: self.l.fan.clone(),
            linear: Some(self.l.per_cone.iter().map(|f| rat::to_json_vec(f)).collect()),
            quadratic: Some(self.b.per_cone.iter().map(mat_to_json).collect()),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }
}

impl PLClass {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ClassJson = serde_json::from_str(text)?;
        let linear = raw.linear.ok_or_else(|| Error::Parse("missing \"linear\"".into()))?;
        PLClass::new(raw.fan, linear.into_iter().map(rat::from_json_vec).collect())
    }
}

impl PQClass {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ClassJson = serde_json::from_str(text)?;
        let quadratic = raw.quadratic.ok_or_else(|| Error::Parse("missing \"quadratic\"".into()))?;
        PQClass::new(raw.fan, quadratic.into_iter().map(mat_from_json).collect())
    }
}

/// One row of weight data of a test configuration in degree `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FutakiSample {
    pub n: Rat,
    pub dim: Rat,
    pub wsum: Rat,
    pub wsqsum: Rat,
}

/// Leading coefficients of `ch₀`, `ch₁` and `2ch₂` in factorial normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TautCoeffs {
    pub r: usize,
    pub a0: Rat,
    pub a1: Rat,
    pub d0: Rat,
    pub d1: Rat,
    pub q0: Rat,
    pub q1: Rat,
}

/// Monomial coefficients of the interpolating polynomial through distinct nodes.
fn interpolate(points: &[(Rat, Rat)]) -> Vec<Rat> {
    let k = points.len();
    let mut coef: Vec<Rat> = points.iter().map(|p| p.1.clone()).collect();
    for j in 1..k {
        for i in (j..k).rev() {
            coef[i] = (&coef[i] - &coef[i - 1]) / (&points[i].0 - &points[i - j].0);
        }
    }
    // Horner expansion of the Newton form.
    let mut poly = vec![Rat::zero(); k];
    for i in (0..k).rev() {
        let mut next = vec![Rat::zero(); k];
        for (d, c) in poly.iter().enumerate() {
            if d + 1 < k {
                next[d + 1] += c;
            }
            next[d] -= c * &points[i].0;
        }
        next[0] += &coef[i];
        poly = next;
    }
    poly
}

fn degree(p: &[Rat]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn factorial(n: usize) -> Rat {
    (1..=n).fold(Rat::one(), |acc, k| acc * Rat::from_integer(k.into()))
}

fn coeff(p: &[Rat], d: usize) -> Rat {
    p.get(d).cloned().unwrap_or_else(Rat::zero)
}

pub fn futaki_fit(samples: &[FutakiSample], r: usize) -> Result<TautCoeffs> {
    let mut distinct: Vec<&FutakiSample> = Vec::new();
    for s in samples {
        match distinct.iter().find(|t| t.n == s.n) {
            Some(t) if *t != s => {
                return Err(Error::Invalid(format!("conflicting samples at n = {}", s.n)))
            }
            Some(_) => {}
            None => distinct.push(s),
        }
    }
    if distinct.len() < r + 3 {
        return Err(Error::TooFewSamples { needed: r + 3, got: distinct.len() });
    }
    let fit = |field: fn(&FutakiSample) -> &Rat, bound: usize| -> Result<Vec<Rat>> {
        let pts: Vec<(Rat, Rat)> = distinct.iter().map(|s| (s.n.clone(), field(s).clone())).collect();
        let p = interpolate(&pts);
        match degree(&p) {
            Some(d) if d > bound => Err(Error::DegreeOverflow { degree: d, bound }),
            _ => Ok(p),
        }
    };
    let dim = fit(|s| &s.dim, r)?;
    let wsum = fit(|s| &s.wsum, r + 1)?;
    let wsq = fit(|s| &s.wsqsum, r + 2)?;
    let a0 = factorial(r) * coeff(&dim, r);
    if !a0.is_positive() {
        return Err(Error::Invalid("leading coefficient of dim(n) is not positive".into()));
    }
    let a1 = if r == 0 { Rat::zero() } else { factorial(r - 1) * coeff(&dim, r - 1) };
    Ok(TautCoeffs {
        r,
        a0,
        a1,
        d0: factorial(r + 1) * coeff(&wsum, r + 1),
        d1: factorial(r) * coeff(&wsum, r),
        q0: factorial(r + 2) * coeff(&wsq, r + 2),
        q1: factorial(r + 1) * coeff(&wsq, r + 1),
    })
}

/// `(l, b) = (a₁d₀ − a₀d₁, a₀²q₀ − a₀d₀²)`.
pub fn futaki_classes(c: &TautCoeffs) -> (Rat, Rat) {
    let l = &c.a1 * &c.d0 - &c.a0 * &c.d1;
    let b = &c.a0 * &c.a0 * &c.q0 - &c.a0 * &c.d0 * &c.d0;
    (l, b)
}

/// Effect of tensoring the polarization with a line bundle of degree `m` on the base.
pub fn twist(c: &TautCoeffs, m: &Rat) -> TautCoeffs {
    let two = Rat::from_integer(2.into());
    TautCoeffs {
        r: c.r,
        a0: c.a0.clone(),
        a1: c.a1.clone(),
        d0: &c.d0 + m * &c.a0,
        d1: &c.d1 + m * &c.a1,
        q0: &c.q0 + &two * m * &c.d0 + m * m * &c.a0,
        q1: &c.q1 + &two * m * &c.d1 + m * m * &c.a1,
    }
}

/// `−d̃₁/√q̃₀` after the twist making `d̃₀ = 0`, exactly.
///
/// A trivial configuration (`q̃₀ = 0` and `d̃₁ = 0`) has value zero.
pub fn normalized_futaki_value(c: &TautCoeffs) -> Result<MuValue> {
    let m = -(&c.d0 / &c.a0);
    let t = twist(c, &m);
    if t.q0.is_negative() || (t.q0.is_zero() && !t.d1.is_zero()) {
        return Err(Error::DegenerateB);
    }
    if t.q0.is_zero() {
        return Ok(MuValue::zero());
    }
    MuValue::new(-t.d1, t.q0)
}

pub fn normalized_futaki(c: &TautCoeffs) -> Result<f64> {
    Ok(normalized_futaki_value(c)?.float_view())
}

/// Reads rows `n,dim,wsum,wsqsum`; blank lines, `#` comments and a header row are skipped.
pub fn parse_futaki_csv(text: &str) -> Result<Vec<FutakiSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if line == 0 && record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("n")) {
            continue;
        }
        if record.len() != 4 {
            return Err(Error::Parse(format!("row {}: expected 4 fields", line + 1)));
        }
        let f = |i: usize| rat::parse_rat(&record[i]);
        out.push(FutakiSample { n: f(0)?, dim: f(1)?, wsum: f(2)?, wsqsum: f(3)? });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ri, rvec};

    fn fan(dim: usize, cones: &[&[&[i64]]]) -> Fan {
        let cs = cones
            .iter()
            .map(|gs| {
                let g: Vec<Vec<i64>> = gs.iter().map(|x| x.to_vec()).collect();
                RationalCone::new(dim, &g).unwrap()
            })
            .collect();
        Fan::new(dim, cs).unwrap()
    }

    fn quadrant() -> Fan {
        fan(2, &[&[&[1, 0], &[0, 1]]])
    }

    fn line_fan() -> Fan {
        fan(1, &[&[&[1]], &[&[-1]]])
    }

    fn p1_coeffs() -> TautCoeffs {
        TautCoeffs { r: 1, a0: ri(1), a1: ri(1), d0: ri(1), d1: rat(1, 2), q0: ri(2), q1: ri(1) }
    }

    #[test]
    fn evaluation_examples() {
        let l = PLClass::global(quadrant(), rvec(&[1, 2])).unwrap();
        assert_eq!(eval_pl(&l, &rvec(&[1, 2])).unwrap(), ri(5));
        let b = PQClass::identity(quadrant()).unwrap();
        assert_eq!(eval_pq(&b, &rvec(&[1, 2])).unwrap(), ri(5));
        let abs = PLClass::new(line_fan(), vec![rvec(&[1]), rvec(&[-1])]).unwrap();
        assert_eq!(eval_pl(&abs, &rvec(&[-3])).unwrap(), ri(3));
        assert_eq!(eval_pl(&l, &rvec(&[-1, 0])), Err(Error::OutsideSupport));
    }

    #[test]
    fn incompatible_classes_rejected() {
        let two = fan(2, &[&[&[1, 0], &[1, 1]], &[&[1, 1], &[0, 1]]]);
        // disagree on the shared ray (1,1)
        let err = PLClass::new(two.clone(), vec![rvec(&[1, 0]), rvec(&[0, 2])]).unwrap_err();
        assert_eq!(err, Error::IncompatibleClass(0, 1));
        assert!(PLClass::new(two.clone(), vec![rvec(&[1, 0]), rvec(&[0, 1])]).is_ok());
        let q1 = linalg::from_i64(&[vec![1, 0], vec![0, 1]]);
        let q2 = linalg::from_i64(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(PQClass::new(two, vec![q1, q2]).unwrap_err(), Error::IncompatibleClass(0, 1));
    }

    #[test]
    fn mu_examples() {
        let l = PLClass::global(quadrant(), rvec(&[1, 2])).unwrap();
        let b = PQClass::identity(quadrant()).unwrap();
        let inv = NumericalInvariant::new(l, b.clone()).unwrap();
        let m = mu(&inv, &rvec(&[1, 2])).unwrap();
        assert_eq!((m.l(), m.b()), (&ri(5), &ri(5)));
        assert_eq!(mu(&inv, &rvec(&[2, 4])).unwrap(), m);
        assert!((m.float_view() - 5f64.sqrt()).abs() < 1e-12);
        let zero = NumericalInvariant::new(PLClass::global(quadrant(), rvec(&[0, 0])).unwrap(), b).unwrap();
        assert_eq!(mu(&zero, &rvec(&[3, 1])).unwrap().sign(), 0);
    }

    #[test]
    fn mu_infinite_where_b_vanishes() {
        let q = linalg::from_i64(&[vec![1, -1], vec![-1, 1]]);
        let inv = NumericalInvariant::new(
            PLClass::global(quadrant(), rvec(&[1, 0])).unwrap(),
            PQClass::global(quadrant(), q).unwrap(),
        )
        .unwrap();
        let top = mu(&inv, &rvec(&[1, 1])).unwrap();
        assert!(top.is_infinite());
        assert!(top > mu(&inv, &rvec(&[1, 0])).unwrap());
    }

    #[test]
    fn compare_examples() {
        let v = |l: i64, b: i64| MuValue::new(ri(l), ri(b)).unwrap();
        assert_eq!(compare_mu(&v(5, 5), &v(1, 1)), Ordering::Greater);
        assert_eq!(compare_mu(&v(2, 4), &v(1, 1)), Ordering::Equal);
        assert_eq!(compare_mu(&v(-1, 1), &v(0, 7)), Ordering::Less);
        assert_eq!(compare_mu(&v(-2, 1), &v(-1, 1)), Ordering::Less);
        assert_eq!(compare_mu(&v(-1, 0), &v(-100, 1)), Ordering::Less);
    }

    #[test]
    fn definiteness_examples() {
        let q = |m: &[Vec<i64>]| PQClass::global(quadrant(), linalg::from_i64(m)).unwrap();
        assert!(is_positive_definite(&PQClass::identity(quadrant()).unwrap()));
        assert!(is_positive_definite(&PQClass::identity(fan(2, &[&[&[1, 0], &[-1, 0], &[0, 1]]])).unwrap()));
        assert!(!is_positive_definite(&q(&[vec![1, -1], vec![-1, 1]])));
        let xy = linalg::from_i64(&[vec![0, 1], vec![1, 0]]);
        assert!(!is_positive_definite(&PQClass::global(quadrant(), xy).unwrap()));
        // indefinite on the plane, positive on the cone
        assert!(is_positive_definite(&q(&[vec![1, 2], vec![2, 1]])));
    }

    #[test]
    fn convexity_of_pl_classes() {
        let abs = PLClass::new(line_fan(), vec![rvec(&[1]), rvec(&[-1])]).unwrap();
        let neg_abs = PLClass::new(line_fan(), vec![rvec(&[-1]), rvec(&[1])]).unwrap();
        assert!(!is_convex_pl(&abs).unwrap());
        assert!(is_convex_pl(&neg_abs).unwrap());
        assert!(is_convex_pl(&PLClass::global(quadrant(), rvec(&[3, -1])).unwrap()).unwrap());
        let two = fan(2, &[&[&[1, 0], &[1, 1]], &[&[1, 1], &[0, 1]]]);
        // min(x, y) is concave, max(x, y) is not
        let min = PLClass::new(two.clone(), vec![rvec(&[0, 1]), rvec(&[1, 0])]).unwrap();
        let max = PLClass::new(two, vec![rvec(&[1, 0]), rvec(&[0, 1])]).unwrap();
        assert!(is_convex_pl(&min).unwrap());
        assert!(!is_convex_pl(&max).unwrap());
        let gap = fan(2, &[&[&[1, 0], &[1, 1]], &[&[0, 1], &[-1, 1]]]);
        let l = PLClass::new(gap, vec![rvec(&[1, 0]), rvec(&[1, 0])]).unwrap();
        assert_eq!(is_convex_pl(&l), Err(Error::NonConvexSupport));
    }

    #[test]
    fn spherical_lengths() {
        let b = PQClass::identity(quadrant()).unwrap();
        let g = |c: &[Vec<i64>]| ConeMorphism::from_columns_unchecked(c);
        let quarter = spherical_length(&b, &g(&[vec![1, 0], vec![0, 1]])).unwrap();
        assert!((quarter - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(spherical_length(&b, &g(&[vec![1, 0], vec![2, 0]])).unwrap(), 0.0);
        let eighth = spherical_length(&b, &g(&[vec![1, 0], vec![1, 1]])).unwrap();
        assert!((eighth - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    fn p1_samples() -> Vec<FutakiSample> {
        (1..=5)
            .map(|n| FutakiSample {
                n: ri(n),
                dim: ri(n + 1),
                wsum: rat(n * (n + 1), 2),
                wsqsum: rat(n * (n + 1) * (2 * n + 1), 6),
            })
            .collect()
    }

    #[test]
    fn futaki_fit_p1() {
        let c = futaki_fit(&p1_samples(), 1).unwrap();
        assert_eq!(c, p1_coeffs());
        assert_eq!(futaki_classes(&c), (rat(1, 2), ri(1)));
    }

    #[test]
    fn futaki_fit_product_and_errors() {
        let flat: Vec<FutakiSample> = (1..=4)
            .map(|n| FutakiSample { n: ri(n), dim: ri(n + 1), wsum: ri(0), wsqsum: ri(0) })
            .collect();
        let c = futaki_fit(&flat, 1).unwrap();
        assert!([&c.d0, &c.d1, &c.q0, &c.q1].iter().all(|x| x.is_zero()));
        assert_eq!(futaki_classes(&c), (ri(0), ri(0)));
        assert_eq!(normalized_futaki(&c).unwrap(), 0.0);
        assert_eq!(
            futaki_fit(&p1_samples()[..3], 1).unwrap_err(),
            Error::TooFewSamples { needed: 4, got: 3 }
        );
        let mut cubic = p1_samples();
        for s in cubic.iter_mut() {
            s.dim = &s.n * &s.n * &s.n;
        }
        assert_eq!(futaki_fit(&cubic, 1).unwrap_err(), Error::DegreeOverflow { degree: 3, bound: 1 });
    }

    #[test]
    fn futaki_fit_rescaled_degree() {
        // dim(2n) = 2n + 1: a0 doubles
        let samples: Vec<FutakiSample> = p1_samples()
            .into_iter()
            .map(|s| {
                let n2 = ri(2) * &s.n;
                FutakiSample {
                    dim: &n2 + ri(1),
                    wsum: &n2 * (&n2 + ri(1)) / ri(2),
                    wsqsum: &n2 * (&n2 + ri(1)) * (ri(2) * &n2 + ri(1)) / ri(6),
                    n: s.n,
                }
            })
            .collect();
        let c = futaki_fit(&samples, 1).unwrap();
        assert_eq!(c.a0, ri(2));
        assert_eq!(c.d0, ri(4));
        assert_eq!(c.q0, ri(16));
    }

    #[test]
    fn twists() {
        let c = p1_coeffs();
        let t = twist(&c, &ri(1));
        assert_eq!((&t.d0, &t.d1, &t.q0), (&ri(2), &rat(3, 2), &ri(5)));
        assert_eq!(futaki_classes(&t), futaki_classes(&c));
        assert_eq!(twist(&c, &ri(0)), c);
        assert_eq!(twist(&twist(&c, &rat(1, 3)), &ri(-2)), twist(&c, &rat(-5, 3)));
    }

    #[test]
    fn normalized_p1() {
        let v = normalized_futaki_value(&p1_coeffs()).unwrap();
        assert_eq!(v, MuValue::new(rat(1, 2), ri(1)).unwrap());
        assert!((normalized_futaki(&p1_coeffs()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn csv_parsing() {
        let rows = parse_futaki_csv("n,dim,wsum,wsqsum\n1,2,1,1\n# note\n2, 3, 3, 5\n\n3,4,6,14/1\n").unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].wsqsum, ri(5));
        assert!(parse_futaki_csv("1,2,3\n").is_err());
    }

    #[test]
    fn class_json_round_trip() {
        let text = r#"{"fan": {"dim": 1, "cones": [{"dim": 1, "generators": [[1]]},
            {"dim": 1, "generators": [[-1]]}]}, "linear": [["1"], [-1]],
            "quadratic": [[["1/2"]], [[1]]]}"#;
        let inv = NumericalInvariant::from_json(text).unwrap();
        assert_eq!(mu(&inv, &rvec(&[2])).unwrap(), MuValue::new(ri(2), ri(2)).unwrap());
        assert!(matches!(NumericalInvariant::from_json(&text.replace("1/2", "x")), Err(Error::Parse(_))));
        let back = NumericalInvariant::from_json(&inv.to_json()).unwrap();
        assert_eq!(mu(&back, &rvec(&[-2])).unwrap(), mu(&inv, &rvec(&[-2])).unwrap());
    }
}
