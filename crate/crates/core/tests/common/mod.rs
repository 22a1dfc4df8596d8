//! Random instance generators shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use destab_core::hn::{Charge, SubobjectLattice};
use destab_core::linalg::Mat;
use destab_core::rat::{rat, ri, Rat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A nonzero charge in the upper half plane or on the negative real axis.
pub fn random_charge(g: &mut ChaCha8Rng, torsion_odds: f64) -> Charge {
    if g.gen_bool(torsion_odds) {
        Charge::new(ri(-g.gen_range(1..4)), ri(0))
    } else {
        Charge::new(ri(g.gen_range(-4..5)), ri(g.gen_range(1..4)))
    }
}

/// Lattice of down-sets of a random poset on `k` points with additive charges.
pub fn ideal_lattice(g: &mut ChaCha8Rng, k: usize, torsion_odds: f64) -> SubobjectLattice {
    // relation i < j only for i < j as integers keeps it acyclic
    let mut below = vec![vec![false; k]; k];
    for j in 0..k {
        for i in 0..j {
            below[i][j] = g.gen_bool(0.35);
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                if below[i][m] && below[m][j] {
                    below[i][j] = true;
                }
            }
        }
    }
    let zs: Vec<Charge> = (0..k).map(|_| random_charge(g, torsion_odds)).collect();
    let ideals: Vec<u32> = (0u32..1 << k)
        .filter(|&m| (0..k).all(|j| m >> j & 1 == 0 || (0..k).all(|i| !below[i][j] || m >> i & 1 == 1)))
        .collect();
    let names = ideals.iter().map(|&m| if m == 0 { "0".into() } else { format!("I{m}") }).collect();
    let mut rel = Vec::new();
    for (a, &x) in ideals.iter().enumerate() {
        for (b, &y) in ideals.iter().enumerate() {
            if x & y == x {
                rel.push((a, b));
            }
        }
    }
    let z = ideals
        .iter()
        .map(|&m| (0..k).filter(|i| m >> i & 1 == 1).fold(Charge::zero(), |acc, i| acc.add(&zs[i])))
        .collect();
    SubobjectLattice::new(names, &rel, z).unwrap()
}

/// `M₃ × C_len`: three copies of one class glued into a diamond, times a chain.
pub fn diamond_times_chain(g: &mut ChaCha8Rng, len: usize) -> SubobjectLattice {
    let z = random_charge(g, 0.0);
    let steps: Vec<Charge> = (0..len).map(|_| random_charge(g, 0.1)).collect();
    // diamond: 0, a, b, c, top
    let dz = [Charge::zero(), z.clone(), z.clone(), z.clone(), z.add(&z)];
    let dleq = |x: usize, y: usize| x == y || x == 0 || y == 4;
    let mut chain_z = vec![Charge::zero()];
    for s in &steps {
        let last = chain_z.last().unwrap().clone();
        chain_z.push(last.add(s));
    }
    let mut names = Vec::new();
    let mut z_all = Vec::new();
    for d in 0..5 {
        for c in 0..=len {
            names.push(if d == 0 && c == 0 { "0".to_string() } else { format!("d{d}c{c}") });
            z_all.push(dz[d].add(&chain_z[c]));
        }
    }
    let idx = |d: usize, c: usize| d * (len + 1) + c;
    let mut rel = Vec::new();
    for d1 in 0..5 {
        for c1 in 0..=len {
            for d2 in 0..5 {
                for c2 in c1..=len {
                    if dleq(d1, d2) {
                        rel.push((idx(d1, c1), idx(d2, c2)));
                    }
                }
            }
        }
    }
    SubobjectLattice::new(names, &rel, z_all).unwrap()
}

/// A random valid lattice with at most `max` elements.
pub fn random_lattice(g: &mut ChaCha8Rng, max: usize) -> SubobjectLattice {
    loop {
        let l = match g.gen_range(0..10) {
            0 => {
                let len = g.gen_range(0..2);
                diamond_times_chain(g, len)
            }
            _ => {
                let k = g.gen_range(1..5);
                ideal_lattice(g, k, 0.15)
            }
        };
        if l.len() <= max {
            return l;
        }
    }
}

pub fn small_rat(g: &mut ChaCha8Rng, num: i64, den: i64) -> Rat {
    rat(g.gen_range(-num..=num), g.gen_range(1..=den))
}

/// `MᵀM + I` for a random integer `M`.
pub fn random_pd(g: &mut ChaCha8Rng, n: usize) -> Mat {
    let m: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| g.gen_range(-2..3)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| ri((0..n).map(|k| m[k][i] * m[k][j]).sum::<i64>() + i64::from(i == j))).collect())
        .collect()
}

/// A random invertible `n × n` integer matrix (unimodular times a diagonal).
pub fn random_invertible(g: &mut ChaCha8Rng, n: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { g.gen_range(1..3) } else { 0 }).collect()).collect();
    for _ in 0..3 * n {
        let (a, b) = (g.gen_range(0..n), g.gen_range(0..n));
        if a != b {
            let f = g.gen_range(-2..3);
            for c in 0..n {
                m[a][c] += f * m[b][c];
            }
        }
    }
    m
}
