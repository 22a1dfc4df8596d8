//! Stratifications of torus models on `𝐀ⁿ` by optimal destabilizers: per-support
//! maximization of `μ`, grouping into strata, the specialization-closedness check and
//! weak/strict uniqueness.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cones::Ray;
use crate::error::Result;
use crate::formalfan::{admissible_face, DegenerationModel, FormalFan, Support};
use crate::invariants::{MuValue, NumericalInvariant};
use crate::kempf::{maximize_on_fan, DestabResult, Status};

fn maximize_on(inv: &NumericalInvariant, d: &DegenerationModel, s: Support, tight: Support) -> Result<DestabResult> {
    let cone = admissible_face(d, s, tight)?;
    if cone.is_zero() {
        return Ok(DestabResult::semistable());
    }
    maximize_on_fan(inv, &FormalFan::new(d.k(), vec![cone])?)
}

/// Keeps the argmax rays whose limit point stays in the model space.
fn allowed_part(d: &DegenerationModel, s: Support, r: DestabResult) -> DestabResult {
    let rays: Vec<Ray> = r
        .argmax_rays
        .iter()
        .filter(|ray| d.is_allowed(d.limit_support(s, &ray.to_rat())))
        .cloned()
        .collect();
    if rays.is_empty() {
        return DestabResult::semistable();
    }
    DestabResult { unique: rays.len() == 1, argmax_rays: rays, ..r }
}

/// Maximum of `μ` over one-parameter subgroups whose limit exists in the model.
///
/// When the unconstrained maximizer flows to an excluded support, every face of the
/// admissible cone fixing an allowed limit support is maximized separately and only
/// maxima attained at allowed limits compete.
pub fn best_destabilizer(d: &DegenerationModel, s: Support, inv: &NumericalInvariant) -> Result<DestabResult> {
    let whole = maximize_on(inv, d, s, Support::EMPTY)?;
    if whole.status == Status::SemistableNonPositive {
        return Ok(whole);
    }
    let kept = allowed_part(d, s, whole.clone());
    if kept.argmax_rays.len() == whole.argmax_rays.len() {
        return Ok(kept);
    }
    let mut best: Option<DestabResult> = (kept.status == Status::Unstable).then_some(kept);
    for tight in s.subsets().filter(|t| !t.is_empty() && d.is_allowed(*t)) {
        let r = allowed_part(d, s, maximize_on(inv, d, s, tight)?);
        if r.status != Status::Unstable {
            continue;
        }
        best = Some(match best {
            None => r,
            Some(b) => merge_results(b, r),
        });
    }
    Ok(best.unwrap_or_else(DestabResult::semistable))
}

fn merge_results(a: DestabResult, b: DestabResult) -> DestabResult {
    let (va, vb) = (a.value.clone().expect("unstable"), b.value.clone().expect("unstable"));
    match va.cmp(&vb) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            let mut rays = a.argmax_rays;
            for r in b.argmax_rays {
                if !rays.contains(&r) {
                    rays.push(r);
                }
            }
            rays.sort();
            DestabResult { unique: rays.len() == 1, argmax_rays: rays, ..a }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub mu: MuValue,
    pub ray: Ray,
    #[serde(rename = "limit")]
    pub limit_support: Support,
    pub members: Vec<Support>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaStratification {
    pub strata: Vec<Stratum>,
    pub semistable: Vec<Support>,
    /// Unstable supports with more than one optimal ray.
    pub nonunique: Vec<Support>,
}

/// Groups the unstable supports by `(μ, ray, limit support)`, in decreasing `μ`.
pub fn build_stratification(d: &DegenerationModel, inv: &NumericalInvariant) -> Result<ThetaStratification> {
    let supports = d.allowed_supports();
    let results: Vec<Result<DestabResult>> = supports.par_iter().map(|&s| best_destabilizer(d, s, inv)).collect();
    let mut strata: Vec<Stratum> = Vec::new();
    let mut semistable = Vec::new();
    let mut nonunique = Vec::new();
    for (&s, r) in supports.iter().zip(results) {
        let r = r?;
        let Some(mu) = r.value.clone().filter(|_| r.status == Status::Unstable) else {
            semistable.push(s);
            continue;
        };
        if !r.unique {
            nonunique.push(s);
        }
        let ray = r.argmax_rays[0].clone();
        let limit = d.limit_support(s, &ray.to_rat());
        match strata.iter_mut().find(|t| t.mu == mu && t.ray == ray && t.limit_support == limit) {
            Some(t) => t.members.push(s),
            None => strata.push(Stratum { mu, ray, limit_support: limit, members: vec![s] }),
        }
    }
    strata.sort_by(|a, b| {
        b.mu.cmp(&a.mu)
            .then_with(|| a.ray.cmp(&b.ray))
            .then_with(|| a.limit_support.cmp(&b.limit_support))
    });
    Ok(ThetaStratification { strata, semistable, nonunique })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Closedness {
    pub closed: bool,
    /// `(S, S′)` with `S` unstable at some level, `S′ ⊆ S` allowed and not at that level.
    pub witness: Option<(Support, Support)>,
}

/// Every union of strata with `μ ≥ c` is closed under passing to allowed subsets.
pub fn check_closedness(d: &DegenerationModel, strat: &ThetaStratification) -> Closedness {
    let mut upper: BTreeSet<Support> = BTreeSet::new();
    let mut i = 0;
    while i < strat.strata.len() {
        let level = &strat.strata[i].mu;
        while i < strat.strata.len() && strat.strata[i].mu == *level {
            upper.extend(strat.strata[i].members.iter().copied());
            i += 1;
        }
        for &s in &upper {
            let mut subs: Vec<Support> = s.subsets().collect();
            subs.sort();
            if let Some(&sub) = subs.iter().find(|t| d.is_allowed(**t) && !upper.contains(t)) {
                return Closedness { closed: false, witness: Some((s, sub)) };
            }
        }
    }
    Closedness { closed: true, witness: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Uniqueness {
    Strict,
    Weak,
}

/// Strict iff every unstable support has a single optimal ray; offenders otherwise.
pub fn check_uniqueness(strat: &ThetaStratification) -> (Uniqueness, Vec<Support>) {
    if strat.nonunique.is_empty() {
        (Uniqueness::Strict, Vec::new())
    } else {
        (Uniqueness::Weak, strat.nonunique.clone())
    }
}

/// Full report in the stratification output schema.
#[derive(Debug, Clone, Serialize)]
pub struct StratReport {
    pub strata: Vec<Stratum>,
    pub semistable: Vec<Support>,
    pub closed: bool,
    pub witness: Option<(Support, Support)>,
    pub uniqueness: Uniqueness,
    pub nonunique: Vec<Support>,
}

pub fn report(d: &DegenerationModel, strat: &ThetaStratification) -> StratReport {
    let c = check_closedness(d, strat);
    let (u, offenders) = check_uniqueness(strat);
    StratReport {
        strata: strat.strata.clone(),
        semistable: strat.semistable.clone(),
        closed: c.closed,
        witness: c.witness,
        uniqueness: u,
        nonunique: offenders,
    }
}

/// DOT digraph: one node per stratum plus the semistable block, edges from each
/// `μ`-level to the next lower one, and dashed edges for closure violations.
pub fn export_hasse(d: &DegenerationModel, strat: &ThetaStratification) -> String {
    let mut out = String::from("digraph strata {\n  rankdir=TB;\n");
    let fmt_members = |m: &[Support]| m.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    for (i, s) in strat.strata.iter().enumerate() {
        let sq = s.mu.signed_square().map_or_else(|| s.mu.to_string(), |q| q.to_string());
        let _ = writeln!(
            out,
            "  s{i} [label=\"mu^2={sq} ray {} limit {}\\n{}\"];",
            s.ray,
            s.limit_support,
            fmt_members(&s.members)
        );
    }
    let _ = writeln!(out, "  ss [label=\"semistable\\n{}\"];", fmt_members(&strat.semistable));
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for (i, s) in strat.strata.iter().enumerate() {
        match levels.last_mut() {
            Some(l) if strat.strata[l[0]].mu == s.mu => l.push(i),
            _ => levels.push(vec![i]),
        }
    }
    for w in levels.windows(2) {
        for a in &w[0] {
            for b in &w[1] {
                let _ = writeln!(out, "  s{a} -> s{b};");
            }
        }
    }
    if let Some(last) = levels.last() {
        for a in last {
            let _ = writeln!(out, "  s{a} -> ss;");
        }
    }
    if let Some((s, sub)) = check_closedness(d, strat).witness {
        let node_of = |x: Support| {
            strat
                .strata
                .iter()
                .position(|t| t.members.contains(&x))
                .map_or_else(|| "ss".to_string(), |i| format!("s{i}"))
        };
        let _ = writeln!(
            out,
            "  {} -> {} [style=dashed, color=red, label=\"closure violation {s} > {sub}\"];",
            node_of(s),
            node_of(sub)
        );
    }
    out.push_str("}\n");
    out
}
