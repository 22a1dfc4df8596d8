//! Exact maximization of `μ = l̂/√b̂` over the support of a formal fan, and the
//! convexity check along rational segments.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{ConeMorphism, RationalCone, Ray};
use crate::error::{Error, Result};
use crate::formalfan::FormalFan;
use crate::invariants::{gram, MuValue, NumericalInvariant};
use crate::linalg::{self, Mat};
use crate::rat::{self, dot, Rat};

pub use crate::invariants::compare_mu;

/// Outcome of maximizing on a single cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeMax {
    Unstable { ray: Ray, value: MuValue },
    SemistableNonPositive,
}

/// Maximizes `l(x)/√(xᵀbx)` on a simplicial cone by enumerating the faces `T` of the
/// generator simplex and solving `Q_T λ = c_T` with `Q = VᵀbV`, `c = Vᵀl`.
///
/// A maximizer with positive value lies in the relative interior of some face, where
/// stationarity forces `λ ∝ Q_T⁻¹c_T` and `μ² = c_Tᵀλ`.
pub fn maximize_on_simplicial_cone(l: &[Rat], b: &Mat, c: &RationalCone) -> Result<ConeMax> {
    if l.len() != c.dim() || b.len() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), got: l.len() });
    }
    if !c.is_simplicial() {
        return Err(Error::NotSimplicial);
    }
    if c.is_zero() {
        return Ok(ConeMax::SemistableNonPositive);
    }
    let v: Mat = c.generators().iter().map(Ray::to_rat).collect();
    let q = gram(b, &v);
    if !linalg::is_positive_definite(&q) {
        return Err(Error::NotPositiveDefinite);
    }
    let cv: Vec<Rat> = v.iter().map(|g| dot(g, l)).collect();
    let m = v.len();
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    for mask in 1u32..(1 << m) {
        let t: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let qt: Mat = t.iter().map(|&i| t.iter().map(|&j| q[i][j].clone()).collect()).collect();
        let ct: Vec<Rat> = t.iter().map(|&i| cv[i].clone()).collect();
        if rat::is_zero_vec(&ct) {
            continue;
        }
        let Some(lambda) = linalg::solve(&qt, &ct) else { continue };
        if !lambda.iter().all(Signed::is_positive) {
            continue;
        }
        let val = dot(&ct, &lambda);
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            let mut x = vec![Rat::zero(); c.dim()];
            for (&i, li) in t.iter().zip(&lambda) {
                for (xk, vk) in x.iter_mut().zip(&v[i]) {
                    *xk += li * vk;
                }
            }
            best = Some((val, x));
        }
    }
    let Some((_, x)) = best else {
        return Ok(ConeMax::SemistableNonPositive);
    };
    let ray = Ray::from_rat(&x)?;
    let r = ray.to_rat();
    let value = MuValue::new(dot(l, &r), linalg::quad(b, &r))?;
    Ok(ConeMax::Unstable { ray, value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Unstable,
    SemistableNonPositive,
}

/// Maximum of `μ` over a formal fan with every maximizing ray.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DestabResult {
    pub status: Status,
    pub value: Option<MuValue>,
    pub argmax_rays: Vec<Ray>,
    pub cone_indices: Vec<usize>,
    pub unique: bool,
}

impl DestabResult {
    pub fn semistable() -> Self {
        DestabResult {
            status: Status::SemistableNonPositive,
            value: None,
            argmax_rays: Vec::new(),
            cone_indices: Vec::new(),
            unique: false,
        }
    }
}

struct Task {
    piece: usize,
    cone: RationalCone,
    data: usize,
}

fn covered(inv: &NumericalInvariant, c: &RationalCone) -> bool {
    let mut probes: Vec<Vec<Rat>> = c.generators().iter().map(Ray::to_rat).collect();
    probes.push(c.interior_point());
    probes.iter().all(|p| inv.fan().locate(p).is_some())
}

/// Splits every piece into pointed cones on which `l` and `b` are given by a single cone
/// of the invariant's fan.
fn tasks(inv: &NumericalInvariant, f: &FormalFan) -> Result<Vec<Task>> {
    if f.dim() != inv.dim() {
        return Err(Error::DimensionMismatch { expected: inv.dim(), got: f.dim() });
    }
    let mut out = Vec::new();
    for (pi, piece) in f.pieces().iter().enumerate() {
        for p in piece.pointed_cover()? {
            if p.is_zero() {
                continue;
            }
            if !covered(inv, &p) {
                return Err(Error::OutsideSupport);
            }
            for (ci, cone) in inv.fan().cones().iter().enumerate() {
                let part = if cone.contains_cone(&p) { p.clone() } else { p.intersect(cone)? };
                if !part.is_zero() {
                    out.push(Task { piece: pi, cone: part, data: ci });
                }
            }
        }
    }
    Ok(out)
}

/// Subdivides each piece simplicially, solves every simplex and merges exactly; ties
/// are reported, not broken.
pub fn maximize_on_fan(inv: &NumericalInvariant, f: &FormalFan) -> Result<DestabResult> {
    let tasks = tasks(inv, f)?;
    let solved: Vec<Result<Vec<(usize, Ray, MuValue)>>> = tasks
        .par_iter()
        .map(|t| {
            let l = &inv.l().per_cone()[t.data];
            let b = &inv.b().per_cone()[t.data];
            let mut found = Vec::new();
            for s in t.cone.simplicial_subdivision()? {
                if let ConeMax::Unstable { ray, value } = maximize_on_simplicial_cone(l, b, &s)? {
                    found.push((t.piece, ray, value));
                }
            }
            Ok(found)
        })
        .collect();
    let mut candidates = Vec::new();
    for s in solved {
        candidates.extend(s?);
    }
    Ok(merge(candidates))
}

fn merge(candidates: Vec<(usize, Ray, MuValue)>) -> DestabResult {
    let Some(best) = candidates.iter().map(|c| &c.2).max().cloned() else {
        return DestabResult::semistable();
    };
    if best.sign() <= 0 {
        return DestabResult::semistable();
    }
    let mut rays: Vec<Ray> = Vec::new();
    let mut cones: Vec<usize> = Vec::new();
    for (pi, ray, v) in candidates {
        if v.cmp(&best) == Ordering::Equal {
            if !rays.contains(&ray) {
                rays.push(ray);
            }
            if !cones.contains(&pi) {
                cones.push(pi);
            }
        }
    }
    rays.sort();
    cones.sort_unstable();
    DestabResult {
        status: Status::Unstable,
        value: Some(best),
        unique: rays.len() == 1,
        argmax_rays: rays,
        cone_indices: cones,
    }
}

/// Sign of `μ(x) + μ(y)` for values with positive denominators.
fn sum_sign(x: &MuValue, y: &MuValue) -> Ordering {
    let neg_y = MuValue::new(-y.l().clone(), y.b().clone()).expect("nonnegative denominator");
    x.cmp(&neg_y)
}

/// Samples pairs of rational points on the segment spanned by `γ`'s columns and checks
/// the midpoint inequality `μ(m) ≥ (μ(x) + μ(y))/2` at their geodesic midpoint `m`, plus
/// non-constancy of `μ` on the segment.
///
/// With unit vectors `x̂, ŷ` the midpoint is `x̂ + ŷ`, so `μ(m) = (μ(x) + μ(y))/|x̂ + ŷ|` and
/// the inequality reduces to `|x̂ + ŷ| ≤ 2` when `μ(x) + μ(y) ≥ 0`; it fails strictly
/// when the sum is negative and the points differ.
pub fn convexity_check(
    inv: &NumericalInvariant,
    gamma: &ConeMorphism,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    if gamma.source_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: gamma.source_dim() });
    }
    let u = rat::rvec(&gamma.column(0));
    let v = rat::rvec(&gamma.column(1));
    if u.len() != inv.dim() {
        return Err(Error::DimensionMismatch { expected: inv.dim(), got: u.len() });
    }
    let mid: Vec<Rat> = u.iter().zip(&v).map(|(a, c)| a + c).collect();
    let (_, f, q) = inv.piece_at(&mid).ok_or(Error::OutsideSupport)?;
    let (f, q) = (f.to_vec(), q.clone());
    for p in [&u, &v] {
        if inv.fan().locate(p).is_none() {
            return Err(Error::OutsideSupport);
        }
    }
    let g = gram(&q, &[u.clone(), v.clone()]);
    if !linalg::simplex_min(&g).is_positive() {
        return Err(Error::OutsideU);
    }
    let at = |t: &Rat| -> Vec<Rat> {
        u.iter().zip(&v).map(|(a, c)| (Rat::one() - t) * a + t * c).collect()
    };
    let value = |x: &[Rat]| {
        MuValue::new(dot(&f, x), linalg::quad(&q, x)).expect("form is positive on the segment")
    };
    let (mu_u, mu_v, mu_m) = (value(&u), value(&v), value(&mid));
    if mu_u == mu_v && mu_v == mu_m {
        return Ok(false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const DEN: i64 = 1 << 20;
    for _ in 0..samples {
        let mut a = rng.gen_range(0..=DEN);
        let mut c = rng.gen_range(0..=DEN);
        if a == c {
            c = if c == DEN { 0 } else { c + 1 };
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
        }
        let (x, y) = (at(&rat::rat(a, DEN)), at(&rat::rat(c, DEN)));
        if rat::is_zero_vec(&x) || rat::is_zero_vec(&y) {
            continue;
        }
        if sum_sign(&value(&x), &value(&y)) == Ordering::Less
            && !crate::formalfan::proj_points_equal(&x, &y)?
        {
            return Ok(false);
        }
    }
    Ok(true)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::Fan;
    use crate::invariants::{PLClass, PQClass};
    use crate::rat::{ri, rvec};

    fn quadrant() -> RationalCone {
        RationalCone::orthant(2)
    }

    fn identity(n: usize) -> Mat {
        (0..n).map(|i| (0..n).map(|j| ri((i == j) as i64)).collect()).collect()
    }

    fn inv_on(fan: Fan, f: &[i64]) -> NumericalInvariant {
        let b = PQClass::identity(fan.clone()).unwrap();
        NumericalInvariant::new(PLClass::global(fan, rvec(f)).unwrap(), b).unwrap()
    }

    fn plane_inv(f: &[i64]) -> NumericalInvariant {
        let plane = RationalCone::new(2, &[vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]]).unwrap();
        inv_on(Fan::new(2, vec![plane]).unwrap(), f)
    }

    fn unstable(r: ConeMax) -> (Vec<i64>, MuValue) {
        match r {
            ConeMax::Unstable { ray, value } => (ray.coords().to_vec(), value),
            ConeMax::SemistableNonPositive => panic!("expected a destabilizer"),
        }
    }

    #[test]
    fn simplicial_examples() {
        let (ray, v) = unstable(maximize_on_simplicial_cone(&rvec(&[1, 2]), &identity(2), &quadrant()).unwrap());
        assert_eq!(ray, vec![1, 2]);
        assert_eq!(v, MuValue::new(ri(5), ri(5)).unwrap());
        let (ray, v) = unstable(maximize_on_simplicial_cone(&rvec(&[1, -1]), &identity(2), &quadrant()).unwrap());
        assert_eq!(ray, vec![1, 0]);
        assert_eq!(v, MuValue::new(ri(1), ri(1)).unwrap());
        assert_eq!(
            maximize_on_simplicial_cone(&rvec(&[-1, -1]), &identity(2), &quadrant()).unwrap(),
            ConeMax::SemistableNonPositive
        );
    }

    #[test]
    fn simplicial_errors() {
        let square = RationalCone::new(3, &[vec![1, 0, 1], vec![0, 1, 1], vec![-1, 0, 1], vec![0, -1, 1]]).unwrap();
        assert_eq!(
            maximize_on_simplicial_cone(&rvec(&[0, 0, 1]), &identity(3), &square),
            Err(Error::NotSimplicial)
        );
        let degenerate = linalg::from_i64(&[vec![1, 1], vec![1, 1]]);
        let c = RationalCone::new(2, &[vec![1, 0], vec![-1, 1]]).unwrap();
        assert_eq!(
            maximize_on_simplicial_cone(&rvec(&[1, 0]), &degenerate, &c),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn fan_examples() {
        let half = RationalCone::new(2, &[vec![1, -1], vec![-1, 1], vec![1, 1]]).unwrap();
        let ff = FormalFan::new(2, vec![half]).unwrap();
        let r = maximize_on_fan(&plane_inv(&[1, 1]), &ff).unwrap();
        assert_eq!(r.status, Status::Unstable);
        assert_eq!(r.argmax_rays, vec![Ray::new(&[1, 1]).unwrap()]);
        assert_eq!(r.value.unwrap().signed_square(), Some(ri(2)));
        assert!(r.unique);

        let rays = FormalFan::new(
            2,
            vec![RationalCone::new(2, &[vec![1, 0]]).unwrap(), RationalCone::new(2, &[vec![0, 1]]).unwrap()],
        )
        .unwrap();
        let r = maximize_on_fan(&plane_inv(&[1, 1]), &rays).unwrap();
        assert_eq!(r.argmax_rays.len(), 2);
        assert_eq!(r.value.unwrap(), MuValue::new(ri(1), ri(1)).unwrap());
        assert_eq!(r.cone_indices, vec![0, 1]);
        assert!(!r.unique);

        let quad = FormalFan::new(2, vec![quadrant()]).unwrap();
        assert_eq!(maximize_on_fan(&plane_inv(&[0, 0]), &quad).unwrap(), DestabResult::semistable());
    }

    #[test]
    fn piecewise_data_is_respected() {
        // l = |x| on the line, b = x²: both rays destabilize with μ = 1
        let line = Fan::new(
            1,
            vec![RationalCone::new(1, &[vec![1]]).unwrap(), RationalCone::new(1, &[vec![-1]]).unwrap()],
        )
        .unwrap();
        let l = PLClass::new(line.clone(), vec![rvec(&[1]), rvec(&[-1])]).unwrap();
        let inv = NumericalInvariant::new(l, PQClass::identity(line).unwrap()).unwrap();
        let whole = FormalFan::new(1, vec![RationalCone::new(1, &[vec![1], vec![-1]]).unwrap()]).unwrap();
        let r = maximize_on_fan(&inv, &whole).unwrap();
        assert_eq!(r.argmax_rays.len(), 2);
        assert!(!r.unique);
        let outside = FormalFan::new(2, vec![quadrant()]).unwrap();
        assert!(matches!(maximize_on_fan(&inv, &outside), Err(Error::DimensionMismatch { .. })));
        let short = inv_on(Fan::new(2, vec![quadrant()]).unwrap(), &[1, 1]);
        let half = FormalFan::new(2, vec![RationalCone::new(2, &[vec![1, 0], vec![-1, 1]]).unwrap()]).unwrap();
        assert_eq!(maximize_on_fan(&short, &half), Err(Error::OutsideSupport));
    }

    #[test]
    fn convexity_along_segments() {
        let inv = |f: &[i64]| inv_on(Fan::new(2, vec![quadrant()]).unwrap(), f);
        let g = ConeMorphism::from_columns_unchecked(&[vec![1, 0], vec![0, 1]]);
        assert!(convexity_check(&inv(&[1, 2]), &g, 50, 7).unwrap());
        assert!(convexity_check(&inv(&[1, 1]), &g, 50, 7).unwrap());
        assert!(!convexity_check(&inv(&[0, 0]), &g, 50, 7).unwrap());
        // negative on the whole segment: the midpoint inequality reverses
        assert!(!convexity_check(&inv(&[-1, -1]), &g, 50, 7).unwrap());
    }

}
