//! Finite modular subobject lattices with an additive central charge: phases, torsion,
//! semistability, the greedy HN filtration and its brute-force oracle.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rdw::{cmp_slope, pava_blocks, pava_max, Piece};
use crate::error::{Error, Result};
use crate::invariants::MuValue;
use crate::rat::{self, Rat, RatJson};

/// A complex rational `re + i·im`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Charge {
    pub re: Rat,
    pub im: Rat,
}

impl Charge {
    pub fn new(re: Rat, im: Rat) -> Self {
        Charge { re, im }
    }

    pub fn zero() -> Self {
        Charge::new(Rat::zero(), Rat::zero())
    }

    pub fn add(&self, o: &Charge) -> Charge {
        Charge::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Charge) -> Charge {
        Charge::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Lies in `ℍ ∪ 𝐑_{≤0}`.
    pub fn in_range(&self) -> bool {
        self.im.is_positive() || (self.im.is_zero() && !self.re.is_positive())
    }

    /// The class `(r, d) = (Im Z, −Re Z)`.
    pub fn piece(&self) -> Piece {
        Piece::new(self.im.clone(), -self.re.clone())
    }
}

impl std::fmt::Display for Charge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}{}i", self.re, if self.im.is_negative() { "" } else { "+" }, self.im)
    }
}

/// Exact phase: `Slope(ν)` with `ν = −re/im` increases with `φ ∈ (0, 1)`; `Top` is `φ = 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhaseKey {
    Slope(Rat),
    Top,
}

pub fn phase(z: &Charge) -> Result<PhaseKey> {
    if !z.in_range() {
        return Err(Error::OutOfRange);
    }
    if z.im.is_zero() {
        Ok(PhaseKey::Top)
    } else {
        Ok(PhaseKey::Slope(-&z.re / &z.im))
    }
}

/// A finite poset of named subobjects with charges and (when they exist) join/meet tables.
#[derive(Debug, Clone)]
pub struct SubobjectLattice {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
    z: Vec<Charge>,
    join: Vec<Vec<Option<usize>>>,
    meet: Vec<Vec<Option<usize>>>,
    bottom: Option<usize>,
    top: Option<usize>,
}

impl SubobjectLattice {
    /// Builds the reflexive-transitive closure of `relations` (pairs `a ≤ b`).
    pub fn new(names: Vec<String>, relations: &[(usize, usize)], z: Vec<Charge>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::NotValid("empty lattice".into()));
        }
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(d) = names.iter().find(|s| !seen.insert(s.as_str())) {
            return Err(Error::Parse(format!("duplicate element {d}")));
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in relations {
            if a >= n || b >= n {
                return Err(Error::Parse(format!("relation ({a}, {b}) outside {n} elements")));
            }
            leq[a][b] = true;
        }
        #[allow(clippy::needless_range_loop)]
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        let bound = |upper: bool| -> Option<usize> {
            (0..n).find(|&a| (0..n).all(|b| if upper { leq[b][a] } else { leq[a][b] }))
        };
        let (bottom, top) = (bound(false), bound(true));
        let least = |cands: Vec<usize>, upper: bool| -> Option<usize> {
            cands.iter().copied().find(|&c| {
                cands.iter().all(|&o| if upper { leq[c][o] } else { leq[o][c] })
            })
        };
        let mut join = vec![vec![None; n]; n];
        let mut meet = vec![vec![None; n]; n];
        for a in 0..n {
            for b in 0..n {
                let ups: Vec<usize> = (0..n).filter(|&c| leq[a][c] && leq[b][c]).collect();
                let downs: Vec<usize> = (0..n).filter(|&c| leq[c][a] && leq[c][b]).collect();
                join[a][b] = least(ups, true);
                meet[a][b] = least(downs, false);
            }
        }
        Ok(SubobjectLattice { names, leq, z, join, meet, bottom, top })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn charge(&self, a: usize) -> &Charge {
        &self.z[a]
    }

    /// Join, for lattices where it exists.
    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.join[a][b]
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.meet[a][b]
    }

    pub fn bottom(&self) -> Option<usize> {
        self.bottom
    }

    pub fn top(&self) -> Option<usize> {
        self.top
    }

    fn ends(&self) -> (usize, usize) {
        (self.bottom.expect("validated"), self.top.expect("validated"))
    }

    fn covers(&self, a: usize) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&b| b != a && self.leq[a][b])
            .filter(|&b| !(0..n).any(|c| c != a && c != b && self.leq[a][c] && self.leq[c][b]))
            .collect()
    }

    /// The interval `[a, b]` with charges measured from `a`.
    pub fn interval(&self, a: usize, b: usize) -> Result<SubobjectLattice> {
        let idx: Vec<usize> = (0..self.len()).filter(|&c| self.leq[a][c] && self.leq[c][b]).collect();
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut rel = Vec::new();
        for &x in &idx {
            for &y in &idx {
                if self.leq[x][y] {
                    rel.push((pos[&x], pos[&y]));
                }
            }
        }
        SubobjectLattice::new(
            idx.iter().map(|&c| self.names[c].clone()).collect(),
            &rel,
            idx.iter().map(|&c| self.z[c].sub(&self.z[a])).collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: LatticeJson = serde_json::from_str(text)?;
        let pos = |s: &str| -> Result<usize> {
            raw.elements
                .iter()
                .position(|e| e == s)
                .ok_or_else(|| Error::Parse(format!("unknown element {s}")))
        };
        let rel = raw
            .leq
            .iter()
            .map(|[a, b]| Ok((pos(a)?, pos(b)?)))
            .collect::<Result<Vec<_>>>()?;
        for k in raw.z.keys() {
            pos(k)?;
        }
        let mut z = Vec::with_capacity(raw.elements.len());
        let probe = SubobjectLattice::new(raw.elements.clone(), &rel, vec![Charge::zero(); raw.elements.len()])?;
        for (i, e) in raw.elements.iter().enumerate() {
            match raw.z.get(e) {
                Some([re, im]) => z.push(Charge::new(re.0.clone(), im.0.clone())),
                None if probe.bottom == Some(i) => z.push(Charge::zero()),
                None => return Err(Error::Parse(format!("missing charge for {e}"))),
            }
        }
        SubobjectLattice::new(raw.elements, &rel, z)
    }

    /// Covering relations and explicit charges of every element but the bottom.
    pub fn to_json(&self) -> String {
        let mut leq = Vec::new();
        for a in 0..self.len() {
            for b in self.covers(a) {
                leq.push([self.names[a].clone(), self.names[b].clone()]);
            }
        }
        let z = (0..self.len())
            .filter(|&i| Some(i) != self.bottom)
            .map(|i| (self.names[i].clone(), [RatJson(self.z[i].re.clone()), RatJson(self.z[i].im.clone())]))
            .collect();
        let raw = LatticeJson { elements: self.names.clone(), leq, z };
        serde_json::to_string(&raw).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    elements: Vec<String>,
    leq: Vec<[String; 2]>,
    #[serde(rename = "Z", default)]
    z: BTreeMap<String, [RatJson; 2]>,
}

/// Outcome of [`validate_lattice`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Checks the poset, lattice, modularity, charge additivity and interval-range axioms,
/// collecting every violation. Nonzero intervals of charge zero are also reported.
pub fn validate_lattice(l: &SubobjectLattice) -> Validation {
    let n = l.len();
    let nm = |i: usize| l.names[i].as_str();
    let mut v = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if l.leq[a][b] && l.leq[b][a] {
                v.push(format!("not antisymmetric: {} and {}", nm(a), nm(b)));
            }
        }
    }
    if l.bottom.is_none() {
        v.push("no least element".into());
    }
    if l.top.is_none() {
        v.push("no greatest element".into());
    }
    let mut lattice = true;
    for a in 0..n {
        for b in a + 1..n {
            if l.join[a][b].is_none() {
                v.push(format!("no join of {} and {}", nm(a), nm(b)));
                lattice = false;
            }
            if l.meet[a][b].is_none() {
                v.push(format!("no meet of {} and {}", nm(a), nm(b)));
                lattice = false;
            }
        }
    }
    if lattice && v.is_empty() {
        let j = |a: usize, b: usize| l.join[a][b].expect("lattice");
        let m = |a: usize, b: usize| l.meet[a][b].expect("lattice");
        for a in 0..n {
            for c in 0..n {
                if !l.leq[a][c] {
                    continue;
                }
                for b in 0..n {
                    if j(a, m(b, c)) != m(j(a, b), c) {
                        v.push(format!("not modular at ({}, {}, {})", nm(a), nm(b), nm(c)));
                    }
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if l.z[j(a, b)].add(&l.z[m(a, b)]) != l.z[a].add(&l.z[b]) {
                    v.push(format!("charge not additive on {} and {}", nm(a), nm(b)));
                }
            }
        }
    }
    if let Some(z0) = l.bottom {
        if !l.z[z0].is_zero() {
            v.push(format!("charge of {} is {}, not 0", nm(z0), l.z[z0]));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a == b || !l.leq[a][b] || l.leq[b][a] {
                continue;
            }
            let d = l.z[b].sub(&l.z[a]);
            if !d.in_range() {
                v.push(format!("interval [{}, {}] has charge {} outside the upper half plane", nm(a), nm(b), d));
            } else if d.is_zero() {
                v.push(format!("interval [{}, {}] is nonzero with charge 0", nm(a), nm(b)));
            }
        }
    }
    Validation { valid: v.is_empty(), violations: v }
}

fn require_valid(l: &SubobjectLattice) -> Result<()> {
    let val = validate_lattice(l);
    match val.violations.into_iter().next() {
        Some(first) => Err(Error::NotValid(first)),
        None => Ok(()),
    }
}

/// The largest element of charge in `𝐑_{≤0}`.
pub fn max_torsion(l: &SubobjectLattice) -> Result<usize> {
    require_valid(l)?;
    let (bottom, _) = l.ends();
    let tors: Vec<usize> = (0..l.len()).filter(|&a| l.z[a].im.is_zero()).collect();
    let mut t = bottom;
    for &a in &tors {
        let j = l.join[t][a].expect("lattice");
        if !l.z[j].im.is_zero() {
            return Err(Error::NotATorsionTheory(t, a));
        }
        t = j;
    }
    Ok(t)
}

/// No proper nonzero subobject has larger phase than the whole object.
pub fn is_semistable(l: &SubobjectLattice) -> Result<bool> {
    require_valid(l)?;
    let (bottom, top) = l.ends();
    let whole = phase(&l.z[top])?;
    for a in 0..l.len() {
        if a != bottom && a != top && phase(&l.z[a])? > whole {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A weighted chain maximizing `μ`.
#[derive(Debug, Clone, Serialize)]
pub struct HnResult {
    /// Element names from `0` up to `E`.
    pub chain: Vec<String>,
    #[serde(skip)]
    pub chain_idx: Vec<usize>,
    /// Graded pieces `gr_j`, phase increasing in `j` (`gr_1` is the top quotient).
    pub pieces: Vec<Piece>,
    #[serde(with = "rat::serde_rat_vec")]
    pub weights: Vec<Rat>,
    pub mu: MuValue,
    pub semistable: bool,
    pub unique: bool,
}

impl HnResult {
    fn from_chain(l: &SubobjectLattice, chain: Vec<usize>, unique: bool) -> Result<Self> {
        let pieces = chain_pieces(l, &chain);
        let w = pava_max(&pieces)?;
        Ok(HnResult {
            chain: chain.iter().map(|&c| l.names[c].clone()).collect(),
            semistable: chain.len() == 2,
            chain_idx: chain,
            pieces,
            weights: w.weights,
            mu: w.mu,
            unique,
        })
    }
}

/// Quotients of an ascending chain listed from the top down.
fn chain_pieces(l: &SubobjectLattice, chain: &[usize]) -> Vec<Piece> {
    chain.windows(2).rev().map(|w| l.z[w[1]].sub(&l.z[w[0]]).piece()).collect()
}

/// Greedy HN filtration: from the current step, the join of all elements of maximal
/// phase above it is the next step.
pub fn hn_filtration(l: &SubobjectLattice) -> Result<HnResult> {
    require_valid(l)?;
    let (bottom, top) = l.ends();
    let mut chain = vec![bottom];
    let mut a = bottom;
    while a != top {
        let above: Vec<usize> = (0..l.len()).filter(|&b| b != a && l.leq[a][b]).collect();
        let keys: Vec<PhaseKey> = above.iter().map(|&b| phase(&l.z[b].sub(&l.z[a]))).collect::<Result<_>>()?;
        let best = keys.iter().max().expect("a is below the top").clone();
        let mut j = a;
        for (&b, k) in above.iter().zip(&keys) {
            if *k == best {
                j = l.join[j][b].expect("lattice");
            }
        }
        if phase(&l.z[j].sub(&l.z[a]))? != best {
            return Err(Error::AmbiguousMaxDestabilizer(a));
        }
        chain.push(j);
        a = j;
    }
    HnResult::from_chain(l, chain, true)
}

fn maximal_chains(l: &SubobjectLattice, from: usize, to: usize) -> Vec<Vec<usize>> {
    let covers: Vec<Vec<usize>> = (0..l.len()).map(|a| l.covers(a)).collect();
    let mut out = Vec::new();
    let mut stack = vec![vec![from]];
    while let Some(path) = stack.pop() {
        let last = *path.last().expect("nonempty");
        if last == to {
            out.push(path);
            continue;
        }
        for &c in &covers[last] {
            let mut next = path.clone();
            next.push(c);
            stack.push(next);
        }
    }
    out.sort();
    out
}

/// Coarsening of an ascending chain to the boundaries of its violator-pooled blocks.
fn coarsen(l: &SubobjectLattice, chain: &[usize]) -> Vec<usize> {
    let p = chain.len() - 1;
    let blocks = pava_blocks(&chain_pieces(l, chain));
    // piece j (0-based, top-down) is chain[p - j - 1] .. chain[p - j]
    let mut out: Vec<usize> = blocks.iter().map(|b| chain[p - b.1]).collect();
    out.push(chain[p]);
    out.sort_by_key(|&c| chain.iter().position(|&x| x == c));
    out
}

/// Exhaustive maximum of `μ` over every maximal chain with pooled optimal weights.
pub fn brute_force_max(l: &SubobjectLattice, max_size: usize) -> Result<HnResult> {
    require_valid(l)?;
    if l.len() > max_size {
        return Err(Error::TooLarge(format!("{} elements, limit {max_size}", l.len())));
    }
    let (bottom, top) = l.ends();
    let t = max_torsion(l)?;
    if t == top {
        return HnResult::from_chain(l, vec![bottom, top], true);
    }
    if t != bottom {
        let rest = brute_force_max(&l.interval(t, top)?, max_size)?;
        let mut chain = vec![bottom];
        chain.extend(rest.chain.iter().map(|s| l.index(s).expect("same names")));
        return HnResult::from_chain(l, chain, rest.unique);
    }
    let scored: Vec<(MuValue, Vec<usize>)> = maximal_chains(l, bottom, top)
        .par_iter()
        .map(|c| Ok((pava_max(&chain_pieces(l, c))?.mu, coarsen(l, c))))
        .collect::<Result<_>>()?;
    let best = scored.iter().map(|s| &s.0).max().expect("some chain").clone();
    let mut winners: Vec<&Vec<usize>> = scored.iter().filter(|s| s.0 == best).map(|s| &s.1).collect();
    winners.sort();
    winners.dedup();
    HnResult::from_chain(l, winners[0].clone(), winners.len() == 1)
}

/// Membership in `Pol({z_j}) = {Σ λ_j z_j + c : λ_j ∈ [0,1], c ≥ 0}`.
pub fn in_pol(pieces: &[Piece], z: &Charge) -> bool {
    let (x, y) = (&z.im, -&z.re);
    let total_r: Rat = pieces.iter().map(|p| &p.r).sum();
    if x.is_negative() || *x > total_r {
        return false;
    }
    let mut sorted = pieces.to_vec();
    sorted.sort_by(|a, b| cmp_slope(b, a));
    let mut h = Rat::zero();
    let mut left = x.clone();
    for p in &sorted {
        if p.r.is_zero() {
            if p.d.is_positive() {
                h += &p.d;
            }
            continue;
        }
        if left.is_zero() {
            break;
        }
        let take = if p.r <= left { Rat::from_integer(1.into()) } else { &left / &p.r };
        h += &take * &p.d;
        left -= &take * &p.r;
    }
    y <= h
}

/// Containment of every charge in the polygon of the HN pieces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Containment {
    pub contained: bool,
    pub witness: Option<String>,
}

pub fn check_containment(l: &SubobjectLattice, hn: &HnResult) -> Containment {
    for a in 0..l.len() {
        if !in_pol(&hn.pieces, &l.z[a]) {
            return Containment { contained: false, witness: Some(l.names[a].clone()) };
        }
    }
    Containment { contained: true, witness: None }
}
