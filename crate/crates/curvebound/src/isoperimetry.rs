//! Edge and vertex Cheeger constants by exhaustive enumeration, family
//! closed-form optimizers, and the higher-order partition variant.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{generate, FamilySpec, Graph};
use crate::rational::{binomial, rat_usize, Rational};

/// Which boundary the ratio counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Crossing edges over d|A| (maximum degree on irregular graphs).
    Edge,
    /// Inside vertices with an outside neighbor, over |A|.
    InnerVertex,
    /// Outside vertices with an inside neighbor, over |A|.
    OuterVertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BruteForce,
    ClosedFormFamily,
}

/// An isoperimetric optimum together with the set(s) achieving it.
#[derive(Debug, Clone)]
pub struct IsoperimetryResult {
    pub kind: BoundaryKind,
    /// Partition order n for the higher constant; 2 for the plain ones.
    pub order: usize,
    pub value: Rational,
    pub witness: Vec<BTreeSet<u32>>,
    pub method: Method,
}

/// Subset guard: enumerations run only when 2^|V| (or the partition count)
/// stays at or below this. `CURVEBOUND_MAX_BRUTE` overrides the default of
/// 2^24.
pub fn subset_guard() -> u64 {
    static GUARD: OnceLock<u64> = OnceLock::new();
    *GUARD.get_or_init(|| {
        std::env::var("CURVEBOUND_MAX_BRUTE")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(1 << 24)
    })
}

fn boundary_count(kind: BoundaryKind, nbr: &[u64], mask: u64, n: usize) -> u64 {
    let mut count = 0u64;
    match kind {
        BoundaryKind::Edge => {
            for v in 0..n {
                if mask >> v & 1 == 1 {
                    count += (nbr[v] & !mask).count_ones() as u64;
                }
            }
        }
        BoundaryKind::InnerVertex => {
            for v in 0..n {
                if mask >> v & 1 == 1 && nbr[v] & !mask != 0 {
                    count += 1;
                }
            }
        }
        BoundaryKind::OuterVertex => {
            for v in 0..n {
                if mask >> v & 1 == 0 && nbr[v] & mask != 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

fn mask_to_set(mask: u64) -> BTreeSet<u32> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// Lexicographic order on the sorted vertex lists two masks encode.
fn lex_mask_cmp(a: u64, b: u64) -> std::cmp::Ordering {
    let (mut a, mut b) = (a, b);
    while a != 0 && b != 0 {
        let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
        match x.cmp(&y) {
            std::cmp::Ordering::Equal => {
                a &= a - 1;
                b &= b - 1;
            }
            other => return other,
        }
    }
    a.count_ones().cmp(&b.count_ones())
}

/// Exact Cheeger constant over all sets with `0 < |A| <= |V|/2`.
/// Ties break toward smaller sets, then lexicographically least.
pub fn cheeger_brute(g: &Graph, kind: BoundaryKind) -> Result<IsoperimetryResult> {
    let n = g.vertex_count();
    if n > 63 || (1u64 << n) > subset_guard() {
        return Err(Error::TooLarge(format!(
            "2^{n} subsets exceeds the guard {}",
            subset_guard()
        )));
    }
    let nbr: Vec<u64> = (0..n as u32)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect();
    let denom_degree = match kind {
        BoundaryKind::Edge => g.max_degree() as u64,
        _ => 1,
    };
    let half = n / 2;

    // Deterministic parallel reduction: the comparator is a total order, so
    // the minimum is schedule-independent.
    let best = (1u64..1 << n)
        .into_par_iter()
        .filter(|mask| (mask.count_ones() as usize) <= half)
        .map(|mask| {
            let b = boundary_count(kind, &nbr, mask, n);
            (b, mask.count_ones() as u64, mask)
        })
        .min_by(|x, y| cmp_candidates(*x, *y))
        .expect("at least one candidate set");

    let (b, size, mask) = best;
    let value = rat_usize(b as usize) / rat_usize((denom_degree * size) as usize);
    Ok(IsoperimetryResult {
        kind,
        order: 2,
        value,
        witness: vec![mask_to_set(mask)],
        method: Method::BruteForce,
    })
}

/// Order candidates by ratio, then set size, then lexicographic witness.
fn cmp_candidates(x: (u64, u64, u64), y: (u64, u64, u64)) -> std::cmp::Ordering {
    // b1/s1 <=> b2/s2 as cross products
    (x.0 * y.1)
        .cmp(&(y.0 * x.1))
        .then(x.1.cmp(&y.1))
        .then_with(|| lex_mask_cmp(x.2, y.2))
}

/// Closed-form outer-vertex optimizer for the named families.
///
/// Hypercube: the vertices above the middle slice, whose outer boundary is
/// the slice itself. One-dimensional torus: a half cycle. Higher tori: the
/// ball of the largest sphere, with the radius stepped down if the ball
/// overshoots half the graph.
pub fn cheeger_family(spec: &FamilySpec) -> Result<IsoperimetryResult> {
    match spec {
        FamilySpec::Hypercube(d) => {
            let d = *d as u64;
            let mid = d / 2;
            let sigma_size = binomial(d, mid);
            let a_size: num_bigint::BigInt = (mid + 1..=d).map(|k| binomial(d, k)).sum();
            let value = Rational::new(sigma_size, a_size);
            let witness = if d <= 20 {
                let above: BTreeSet<u32> = (0..1u32 << d)
                    .filter(|v| u64::from(v.count_ones()) > mid)
                    .collect();
                vec![above]
            } else {
                Vec::new()
            };
            Ok(IsoperimetryResult {
                kind: BoundaryKind::OuterVertex,
                order: 2,
                value,
                witness,
                method: Method::ClosedFormFamily,
            })
        }
        FamilySpec::Cycle(n) | FamilySpec::Torus { n, d: 1 } => {
            let half = n / 2;
            let witness: BTreeSet<u32> = (0..half as u32).collect();
            Ok(IsoperimetryResult {
                kind: BoundaryKind::OuterVertex,
                order: 2,
                value: rat_usize(2.min(*n - half)) / rat_usize(half),
                witness: vec![witness],
                method: Method::ClosedFormFamily,
            })
        }
        FamilySpec::Torus { n, d } => {
            let g = generate(spec)?;
            let dist = g.distances_from(0);
            let mut r = (n * *d as usize).div_ceil(4) as i64 - 1;
            let ball_size = |r: i64| {
                dist.iter()
                    .filter(|&&x| (x as i64) <= r)
                    .count()
            };
            while r > 0 && 2 * ball_size(r) > g.vertex_count() {
                r -= 1;
            }
            let ball: BTreeSet<u32> = (0..g.vertex_count() as u32)
                .filter(|&v| (dist[v as usize] as i64) <= r)
                .collect();
            let sphere = dist
                .iter()
                .filter(|&&x| x as i64 == r + 1)
                .count();
            let value = rat_usize(sphere) / rat_usize(ball.len());
            Ok(IsoperimetryResult {
                kind: BoundaryKind::OuterVertex,
                order: 2,
                value,
                witness: vec![ball],
                method: Method::ClosedFormFamily,
            })
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// Exact higher-order constant: minimize the worst outer-boundary ratio
/// over partitions of V into exactly `order` non-empty cells.
pub fn higher_cheeger_brute(g: &Graph, order: usize) -> Result<IsoperimetryResult> {
    let n = g.vertex_count();
    if order < 1 || order > n {
        return Err(Error::ParameterOutOfRange(format!(
            "partition order {order} for {n} vertices"
        )));
    }
    let count = stirling2(n, order)
        .filter(|&c| c <= subset_guard() as u128)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "S({n},{order}) partitions exceed the guard {}",
                subset_guard()
            ))
        })?;
    let _ = count;

    let nbr: Vec<u64> = (0..n as u32)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect();

    // Restricted-growth strings canonicalize partitions by least-element
    // ordering, so nothing is enumerated twice. Ratios are compared as
    // integer cross products to keep the hot loop allocation-free.
    let mut assignment = vec![0usize; n];
    let mut masks = vec![0u64; order];
    let mut best: Option<((u64, u64), Vec<usize>)> = None;
    enumerate_partitions(&mut assignment, 1, 1, order, n, &mut |labels| {
        for m in masks.iter_mut() {
            *m = 0;
        }
        for (v, &c) in labels.iter().enumerate() {
            masks[c] |= 1 << v;
        }
        let mut worst = (0u64, 1u64);
        for &m in masks.iter() {
            let b = boundary_count(BoundaryKind::OuterVertex, &nbr, m, n);
            let s = m.count_ones() as u64;
            if b * worst.1 > worst.0 * s {
                worst = (b, s);
            }
        }
        let improves = match &best {
            Some((v, _)) => worst.0 * v.1 < v.0 * worst.1,
            None => true,
        };
        if improves {
            best = Some((worst, labels.to_vec()));
        }
    });

    let ((b, s), labels) = best.expect("partitions exist");
    let value = rat_usize(b as usize) / rat_usize(s as usize);
    let mut witness = vec![BTreeSet::new(); order];
    for (v, &c) in labels.iter().enumerate() {
        witness[c].insert(v as u32);
    }
    Ok(IsoperimetryResult {
        kind: BoundaryKind::OuterVertex,
        order,
        value,
        witness,
        method: Method::BruteForce,
    })
}

fn enumerate_partitions(
    assignment: &mut Vec<usize>,
    pos: usize,
    used: usize,
    target: usize,
    n: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if pos == n {
        if used == target {
            visit(assignment);
        }
        return;
    }
    // prune: remaining slots must be able to open the missing blocks
    if used + (n - pos) < target {
        return;
    }
    let cap = (used + 1).min(target);
    for c in 0..cap {
        assignment[pos] = c;
        let next_used = if c == used { used + 1 } else { used };
        enumerate_partitions(assignment, pos + 1, next_used, target, n, visit);
    }
}

fn stirling2(n: usize, k: usize) -> Option<u128> {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _ in 1..=n {
        let mut next = vec![0u128; k + 1];
        for j in 1..=k {
            let a = row[j].checked_mul(j as u128)?;
            next[j] = a.checked_add(row[j - 1])?;
        }
        next[0] = 0;
        row = next;
    }
    Some(row[k])
}

/// Monotonicity of the higher constant in the partition order: expected
/// empty for n = 3..=n_max (clamped at the vertex count).
pub fn verify_h_monotonicity(g: &Graph, n_max: usize) -> Result<Vec<String>> {
    let n_max = n_max.min(g.vertex_count());
    if n_max < 3 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut prev = higher_cheeger_brute(g, 2)?.value;
    for order in 3..=n_max {
        let cur = higher_cheeger_brute(g, order)?.value;
        if prev > cur {
            out.push(format!(
                "h_out({}) = {} exceeds h_out({order}) = {cur}",
                order - 1,
                prev
            ));
        }
        prev = cur;
    }
    Ok(out)
}
