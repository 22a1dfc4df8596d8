//! Rank-degree-weight sequences: the exact `μ` formula, the deletion step, optimal weights,
//! pool-adjacent-violators and HN polygons.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::MuValue;
use crate::rat::{self, Rat};

/// One graded piece `(r, d, w)` with `Z(gr) = −d + i·r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RdwEntry {
    #[serde(with = "rat::serde_rat")]
    pub r: Rat,
    #[serde(with = "rat::serde_rat")]
    pub d: Rat,
    #[serde(with = "rat::serde_rat")]
    pub w: Rat,
}

impl RdwEntry {
    pub fn new(r: Rat, d: Rat, w: Rat) -> Self {
        RdwEntry { r, d, w }
    }
}

/// A class `(r, d)` of a graded piece.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(with = "rat::serde_rat")]
    pub r: Rat,
    #[serde(with = "rat::serde_rat")]
    pub d: Rat,
}

impl Piece {
    pub fn new(r: Rat, d: Rat) -> Self {
        Piece { r, d }
    }

    fn add(&self, o: &Piece) -> Piece {
        Piece { r: &self.r + &o.r, d: &self.d + &o.d }
    }
}

/// Orders two pieces by phase: `d₁r₂` against `d₂r₁`, pieces of rank zero being steepest.
pub fn cmp_slope(a: &Piece, b: &Piece) -> Ordering {
    match (a.r.is_zero(), b.r.is_zero()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => (&a.d * &b.r).cmp(&(&b.d * &a.r)),
    }
}

fn check_weights(alpha: &[RdwEntry]) -> Result<()> {
    if alpha.windows(2).any(|w| w[0].w >= w[1].w) {
        return Err(Error::WeightsNotIncreasing);
    }
    Ok(())
}

/// `L = Σ w_j(R d_j − D r_j)`, `B = Σ w_j² r_j` for the total class `(R, D)`.
pub fn mu_rdw(alpha: &[RdwEntry], total: (&Rat, &Rat)) -> Result<MuValue> {
    check_weights(alpha)?;
    let (big_r, big_d) = total;
    let sr: Rat = alpha.iter().map(|e| &e.r).sum();
    let sd: Rat = alpha.iter().map(|e| &e.d).sum();
    if &sr != big_r || &sd != big_d {
        return Err(Error::InconsistentTotal);
    }
    Ok(mu_unchecked(alpha))
}

/// `μ` of a sequence against its own total, without the weight-order check.
pub(crate) fn mu_unchecked(alpha: &[RdwEntry]) -> MuValue {
    let big_r: Rat = alpha.iter().map(|e| &e.r).sum();
    let big_d: Rat = alpha.iter().map(|e| &e.d).sum();
    let l: Rat = alpha.iter().map(|e| &e.w * (&big_r * &e.d - &big_d * &e.r)).sum();
    let b: Rat = alpha.iter().map(|e| &e.w * &e.w * &e.r).sum();
    MuValue::new(l, b).expect("ranks are nonnegative")
}

/// Result of merging entries `k` and `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deletion {
    pub alpha: Vec<RdwEntry>,
    /// `(w_{k+1} − w_k)(d_k r_{k+1} − r_k d_{k+1})/(r_k + r_{k+1})`; the numerator of
    /// [`mu_rdw`] changes by `R` times this amount.
    pub delta_l: Rat,
    pub delta_b: Rat,
}

/// Deletes the `(k+1)`-st entry (1-based `k`), giving entry `k` the rank-averaged weight.
pub fn delete_step(alpha: &[RdwEntry], k: usize) -> Result<Deletion> {
    if k == 0 || k >= alpha.len() {
        return Err(Error::Invalid(format!("deletion index {k} outside 1..{}", alpha.len())));
    }
    let (a, b) = (&alpha[k - 1], &alpha[k]);
    let s = &a.r + &b.r;
    if !s.is_positive() {
        return Err(Error::ZeroRankPair(k, k + 1));
    }
    let w = (&a.w * &a.r + &b.w * &b.r) / &s;
    let delta_l = (&b.w - &a.w) / &s * (&a.d * &b.r - &a.r * &b.d);
    let gap = &a.w - &b.w;
    let delta_b = -(&a.r * &b.r) / &s * &gap * &gap;
    let mut out = alpha[..k - 1].to_vec();
    out.push(RdwEntry::new(s, &a.d + &b.d, w));
    out.extend_from_slice(&alpha[k + 1..]);
    Ok(Deletion { alpha: out, delta_l, delta_b })
}

/// Weights together with the `μ` they attain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weighted {
    pub weights: Vec<Rat>,
    pub mu: MuValue,
}

/// Centered weights `w_j = ν_j − ν̄` and `μ = R·√(Σ ν_j² r_j − ν̄² R)`, encoded as
/// `(L, B) = (R·B, Σ w_j² r_j)`.
pub fn optimal_weights(pieces: &[Piece]) -> Result<Weighted> {
    if pieces.is_empty() {
        return Err(Error::Invalid("no pieces".into()));
    }
    if let Some(p) = pieces.iter().find(|p| !p.r.is_positive()) {
        return Err(Error::Invalid(format!("piece of rank {}", p.r)));
    }
    if pieces.windows(2).any(|w| cmp_slope(&w[0], &w[1]) != Ordering::Less) {
        return Err(Error::NotConvex);
    }
    Ok(centered(pieces))
}

fn centered(pieces: &[Piece]) -> Weighted {
    let big_r: Rat = pieces.iter().map(|p| &p.r).sum();
    let big_d: Rat = pieces.iter().map(|p| &p.d).sum();
    let nu_bar = &big_d / &big_r;
    let weights: Vec<Rat> = pieces.iter().map(|p| &p.d / &p.r - &nu_bar).collect();
    let b: Rat = pieces.iter().zip(&weights).map(|(p, w)| w * w * &p.r).sum();
    let mu = MuValue::new(&big_r * &b, b).expect("nonnegative");
    Weighted { weights, mu }
}

/// Blocks of consecutive pieces after pooling adjacent violators: `(start, end, class)`
/// with strictly increasing phase from block to block.
pub fn pava_blocks(pieces: &[Piece]) -> Vec<(usize, usize, Piece)> {
    let mut blocks: Vec<(usize, usize, Piece)> = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        let mut cur = (i, i + 1, p.clone());
        while let Some(last) = blocks.last() {
            if cmp_slope(&last.2, &cur.2) == Ordering::Less {
                break;
            }
            let last = blocks.pop().expect("nonempty");
            cur = (last.0, cur.1, last.2.add(&cur.2));
        }
        blocks.push(cur);
    }
    blocks
}

/// Maximum of `μ` over strictly increasing weights on pieces in the given order.
///
/// Pieces of rank zero are allowed; if the last block has rank zero and positive degree
/// while the total rank is positive, the supremum is `+∞` and the reported weight of that
/// block is one more than the weight below it.
pub fn pava_max(pieces: &[Piece]) -> Result<Weighted> {
    if pieces.is_empty() {
        return Err(Error::Invalid("no pieces".into()));
    }
    if let Some(p) = pieces.iter().find(|p| p.r.is_negative()) {
        return Err(Error::Invalid(format!("piece of rank {}", p.r)));
    }
    let blocks = pava_blocks(pieces);
    let total_r: Rat = pieces.iter().map(|p| &p.r).sum();
    let top_torsion = blocks.last().is_some_and(|b| b.2.r.is_zero());
    let (finite, mu) = if total_r.is_zero() {
        (vec![Rat::zero(); blocks.len()], MuValue::zero())
    } else if top_torsion {
        let classes: Vec<Piece> = blocks[..blocks.len() - 1].iter().map(|b| b.2.clone()).collect();
        let mut w = if classes.is_empty() { Vec::new() } else { centered(&classes).weights };
        let top = w.last().map_or(Rat::one(), |x| x + Rat::one());
        w.push(top);
        (w, MuValue::new(Rat::one(), Rat::zero()).expect("valid"))
    } else {
        let classes: Vec<Piece> = blocks.iter().map(|b| b.2.clone()).collect();
        let c = centered(&classes);
        (c.weights, c.mu)
    };
    let mut weights = vec![Rat::zero(); pieces.len()];
    for (b, w) in blocks.iter().zip(finite) {
        for x in &mut weights[b.0..b.1] {
            *x = w.clone();
        }
    }
    Ok(Weighted { weights, mu })
}

/// Concave boundary of `Pol({z_j})`: pieces merged by equal slope and sorted by decreasing slope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygon {
    blocks: Vec<Piece>,
}

/// Polygon of pieces of positive rank.
pub fn pol(pieces: &[Piece]) -> Result<Polygon> {
    if pieces.is_empty() {
        return Err(Error::Invalid("no pieces".into()));
    }
    if let Some(p) = pieces.iter().find(|p| !p.r.is_positive()) {
        return Err(Error::Invalid(format!("piece of rank {}", p.r)));
    }
    let mut sorted = pieces.to_vec();
    sorted.sort_by(|a, b| cmp_slope(b, a));
    let mut blocks: Vec<Piece> = Vec::new();
    for p in sorted {
        match blocks.last_mut() {
            Some(last) if cmp_slope(last, &p) == Ordering::Equal => *last = last.add(&p),
            _ => blocks.push(p),
        }
    }
    Ok(Polygon { blocks })
}

impl Polygon {
    pub fn blocks(&self) -> &[Piece] {
        &self.blocks
    }

    pub fn total(&self) -> Piece {
        self.blocks.iter().fold(Piece::new(Rat::zero(), Rat::zero()), |a, b| a.add(b))
    }

    /// Breakpoints `(x, h(x))` from `(0, 0)` to `(R, D)`.
    pub fn breakpoints(&self) -> Vec<(Rat, Rat)> {
        let mut pts = vec![(Rat::zero(), Rat::zero())];
        let (mut x, mut y) = (Rat::zero(), Rat::zero());
        for b in &self.blocks {
            x += &b.r;
            y += &b.d;
            pts.push((x.clone(), y.clone()));
        }
        pts
    }

    /// `h(x)` for `x ∈ [0, R]`.
    pub fn h(&self, x: &Rat) -> Result<Rat> {
        let total = self.total();
        if x.is_negative() || *x > total.r {
            return Err(Error::OutOfRange);
        }
        let (mut left, mut y) = (Rat::zero(), Rat::zero());
        for b in &self.blocks {
            if *x <= &left + &b.r {
                return Ok(y + (x - &left) * &b.d / &b.r);
            }
            left += &b.r;
            y += &b.d;
        }
        Ok(y)
    }

    /// `∫₀ᴿ h′(x)² dx = Σ d²/r` over blocks.
    pub fn integral_h_prime_sq(&self) -> Rat {
        self.blocks.iter().map(|b| &b.d * &b.d / &b.r).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,h(x)\n");
        for (x, y) in self.breakpoints() {
            out.push_str(&format!("{},{}\n", rat::fmt_rat(&x), rat::fmt_rat(&y)));
        }
        out
    }
}

/// `h₁ ≤ h₂` on `[0, R]`, checked at the union of breakpoints.
pub fn polygon_leq(p1: &Polygon, p2: &Polygon) -> Result<bool> {
    if p1.total() != p2.total() {
        return Err(Error::EndpointMismatch);
    }
    let mut xs: Vec<Rat> = p1.breakpoints().into_iter().chain(p2.breakpoints()).map(|(x, _)| x).collect();
    xs.sort();
    xs.dedup();
    for x in xs {
        if p1.h(&x)? > p2.h(&x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Deserialize)]
struct RdwRow {
    r: String,
    d: String,
    w: String,
}

/// Reads `r,d,w` rows (header required) into a sequence.
pub fn parse_rdw_csv(text: &str) -> Result<Vec<RdwEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<RdwRow>() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        out.push(RdwEntry::new(rat::parse_rat(&row.r)?, rat::parse_rat(&row.d)?, rat::parse_rat(&row.w)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ri};

    fn e(r: i64, d: i64, w: Rat) -> RdwEntry {
        RdwEntry::new(ri(r), ri(d), w)
    }

    fn pc(r: i64, d: i64) -> Piece {
        Piece::new(ri(r), ri(d))
    }

    #[test]
    fn mu_formula() {
        let a = [e(1, 0, ri(0)), e(1, 1, ri(1))];
        let m = mu_rdw(&a, (&ri(2), &ri(1))).unwrap();
        assert_eq!((m.l().clone(), m.b().clone()), (ri(1), ri(1)));
        let a = [e(1, 0, ri(-1)), e(1, 2, ri(1))];
        let m = mu_rdw(&a, (&ri(2), &ri(2))).unwrap();
        assert_eq!((m.l().clone(), m.b().clone()), (ri(4), ri(2)));
        assert_eq!(mu_rdw(&a, (&ri(2), &ri(3))), Err(Error::InconsistentTotal));
        let bad = [e(1, 0, ri(1)), e(1, 2, ri(1))];
        assert_eq!(mu_rdw(&bad, (&ri(2), &ri(2))), Err(Error::WeightsNotIncreasing));
    }

    #[test]
    fn shift_leaves_numerator() {
        let a = [e(2, -1, rat(-1, 3)), e(1, 4, ri(2)), e(3, 0, ri(5))];
        let shifted: Vec<RdwEntry> = a.iter().map(|x| RdwEntry::new(x.r.clone(), x.d.clone(), &x.w + rat(7, 2))).collect();
        assert_eq!(mu_unchecked(&a).l(), mu_unchecked(&shifted).l());
    }

    #[test]
    fn deletion_examples() {
        let del = delete_step(&[e(1, 1, ri(0)), e(1, 1, ri(1))], 1).unwrap();
        assert_eq!(del.alpha, vec![e(2, 2, rat(1, 2))]);
        assert_eq!(del.delta_l, ri(0));
        assert_eq!(del.delta_b, rat(-1, 2));
        let a = [e(1, 0, ri(0)), e(1, 2, ri(1))];
        let del = delete_step(&a, 1).unwrap();
        assert_eq!(del.delta_l, ri(-1));
        // the numerator of mu_rdw moves by R times the reported amount
        let before = mu_unchecked(&a);
        let after = mu_unchecked(&del.alpha);
        assert_eq!(after.l() - before.l(), ri(2) * &del.delta_l);
        assert_eq!(after.b() - before.b(), del.delta_b);
        let zero = [e(0, 1, ri(0)), e(0, 1, ri(1))];
        assert_eq!(delete_step(&zero, 1), Err(Error::ZeroRankPair(1, 2)));
    }

    #[test]
    fn optimal_examples() {
        let w = optimal_weights(&[pc(1, 0), pc(1, 2)]).unwrap();
        assert_eq!(w.weights, vec![ri(-1), ri(1)]);
        assert_eq!((w.mu.l().clone(), w.mu.b().clone()), (ri(4), ri(2)));
        let w = optimal_weights(&[pc(3, 1)]).unwrap();
        assert_eq!(w.weights, vec![ri(0)]);
        assert_eq!(w.mu, MuValue::zero());
        let w = optimal_weights(&[pc(1, 0), pc(1, 1), pc(1, 2)]).unwrap();
        assert_eq!(w.weights, vec![ri(-1), ri(0), ri(1)]);
        assert_eq!((w.mu.l().clone(), w.mu.b().clone()), (ri(6), ri(2)));
        assert_eq!(w.mu.signed_square(), Some(ri(18)));
        assert_eq!(optimal_weights(&[pc(1, 2), pc(1, 0)]), Err(Error::NotConvex));
    }

    #[test]
    fn pava_examples() {
        let w = pava_max(&[pc(1, 2), pc(1, 0)]).unwrap();
        assert_eq!(w.weights, vec![ri(0), ri(0)]);
        assert_eq!(w.mu, MuValue::zero());
        let w = pava_max(&[pc(1, 0), pc(1, 3), pc(1, 1)]).unwrap();
        // blocks (1,0) and (2,4): ν̄ = 4/3, weights −4/3 and 2/3
        assert_eq!(w.weights, vec![rat(-4, 3), rat(2, 3), rat(2, 3)]);
        assert_eq!(w.mu.signed_square(), Some(ri(24)));
        let w = pava_max(&[pc(1, 0), Piece::new(ri(0), ri(1))]).unwrap();
        assert!(w.mu.is_infinite());
        assert_eq!(w.weights, vec![ri(0), ri(1)]);
    }

    #[test]
    fn polygons() {
        let p = pol(&[pc(1, 0), pc(1, 2)]).unwrap();
        assert_eq!(p.breakpoints(), vec![(ri(0), ri(0)), (ri(1), ri(2)), (ri(2), ri(2))]);
        assert_eq!(p.integral_h_prime_sq(), ri(4));
        assert_eq!(p.to_csv(), "x,h(x)\n0,0\n1,2\n2,2\n");
        let line = pol(&[pc(2, 2)]).unwrap();
        assert_eq!(line.integral_h_prime_sq(), ri(2));
        assert!(polygon_leq(&line, &p).unwrap());
        assert!(!polygon_leq(&p, &line).unwrap());
        assert!(polygon_leq(&p, &p).unwrap());
        assert_eq!(polygon_leq(&line, &pol(&[pc(2, 3)]).unwrap()), Err(Error::EndpointMismatch));
        assert_eq!(p.h(&rat(1, 2)).unwrap(), ri(1));
    }

    #[test]
    fn rdw_csv() {
        let a = parse_rdw_csv("r,d,w\n1,0,-1\n1,2,1/1\n").unwrap();
        assert_eq!(a, vec![e(1, 0, ri(-1)), e(1, 2, ri(1))]);
        assert!(parse_rdw_csv("r,d,w\n1,x,0\n").is_err());
    }
}
