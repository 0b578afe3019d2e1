//! Ollivier curvature of vertex pairs, global lower bounds over the edge
//! set, and the curvature-derived volume-growth machinery.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{cartesian_power, Graph};
use crate::rational::{rat_int, rat_one, rat_zero, Rational};
use crate::shells::NuSpec;
use crate::transport::{lazy_walk_measure, w1};

/// Per-edge curvature sweep with the global lower bound.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub laziness: Rational,
    pub per_edge: BTreeMap<(u32, u32), Rational>,
    /// Minimum over all edges.
    pub global: Rational,
    /// Minimum over edges not flagged as boundary-contaminated; `None` when
    /// every edge is contaminated.
    pub global_interior: Option<Rational>,
    /// Edges within distance 2 of a degree-one vertex. Curvature there is
    /// an artifact of family truncation, not of the infinite object.
    pub contaminated: BTreeSet<(u32, u32)>,
}

/// Ollivier curvature of a vertex pair: one minus the transport cost between
/// the lazy walk measures, per unit distance.
pub fn kappa(g: &Graph, x: u32, y: u32, laziness: &Rational) -> Result<Rational> {
    if x == y {
        return Err(Error::SameVertex);
    }
    let mu = lazy_walk_measure(g, x, laziness);
    let nu = lazy_walk_measure(g, y, laziness);
    let cost = w1(g, &mu, &nu)?.cost;
    let dist = rat_int(g.dist(x, y) as i64);
    Ok(rat_one() - cost / dist)
}

/// Edges whose endpoint neighborhoods reach a degree-one vertex within
/// distance 2.
fn contaminated_edges(g: &Graph) -> BTreeSet<(u32, u32)> {
    let leaves = g.leaves();
    if leaves.is_empty() {
        return BTreeSet::new();
    }
    let leaf_dist = g.bfs_distances(&leaves).expect("leaves non-empty").dist;
    g.edges()
        .filter(|&(x, y)| leaf_dist[x as usize] <= 2 || leaf_dist[y as usize] <= 2)
        .collect()
}

/// Scan every edge in parallel; the edge minimum is a global lower bound
/// for all pairs.
pub fn global_lower_bound(g: &Graph, laziness: &Rational) -> CurvatureReport {
    let edges: Vec<(u32, u32)> = g.edges().collect();
    let kappas: Vec<Rational> = edges
        .par_iter()
        .map(|&(x, y)| kappa(g, x, y, laziness).expect("distinct endpoints"))
        .collect();
    let per_edge: BTreeMap<(u32, u32), Rational> =
        edges.iter().copied().zip(kappas).collect();
    let contaminated = contaminated_edges(g);
    let global = per_edge
        .values()
        .min()
        .cloned()
        .unwrap_or_else(rat_one);
    let global_interior = per_edge
        .iter()
        .filter(|(e, _)| !contaminated.contains(e))
        .map(|(_, k)| k)
        .min()
        .cloned();
    CurvatureReport {
        laziness: laziness.clone(),
        per_edge,
        global,
        global_interior,
        contaminated,
    }
}

/// A sampled pair whose curvature drops below the edge minimum.
#[derive(Debug, Clone)]
pub struct MinimizationViolation {
    pub pair: (u32, u32),
    pub kappa: Rational,
    pub edge_minimum: Rational,
}

/// Check that no sampled pair undercuts the edge minimum. Expected empty:
/// neighbors minimize curvature.
pub fn check_neighbor_minimization(
    g: &Graph,
    samples: &[(u32, u32)],
    laziness: &Rational,
) -> Result<Vec<MinimizationViolation>> {
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let k = global_lower_bound(g, laziness).global;
    let mut violations = Vec::new();
    for &(x, y) in samples {
        let kv = kappa(g, x, y, laziness)?;
        if kv < k {
            violations.push(MinimizationViolation {
                pair: (x, y),
                kappa: kv,
                edge_minimum: k.clone(),
            });
        }
    }
    Ok(violations)
}

#[derive(Debug, Clone)]
pub struct TensorizationCheck {
    pub k_base: Rational,
    pub k_power: Rational,
    pub holds: bool,
}

const POWER_VERTEX_GUARD: usize = 10_000;

/// Compare the edge-curvature minimum of `G^r` against `k/r`.
pub fn check_tensorization(g: &Graph, r: u32, laziness: &Rational) -> Result<TensorizationCheck> {
    let k_base = global_lower_bound(g, laziness).global;
    if r == 1 {
        return Ok(TensorizationCheck {
            k_base: k_base.clone(),
            k_power: k_base,
            holds: true,
        });
    }
    let power = cartesian_power(g, r, POWER_VERTEX_GUARD)?;
    let k_power = global_lower_bound(&power, laziness).global;
    let holds = k_power >= &k_base / rat_int(r as i64);
    Ok(TensorizationCheck {
        k_base,
        k_power,
        holds,
    })
}

/// Shell-size bound at radius `r` under maximum degree `D` and curvature
/// lower bound `k`, clamped below at zero.
pub fn paeng_shell_bound(max_degree: u32, k: &Rational, r: u32) -> Rational {
    let mut acc = rat_one();
    let half_k = k / rat_int(2);
    for m in 0..r {
        let factor = rat_one() - &half_k * rat_int(m as i64);
        if factor <= rat_zero() {
            return rat_zero();
        }
        acc *= factor;
    }
    for _ in 0..r {
        acc *= rat_int(max_degree as i64);
    }
    acc
}

/// Growth envelope implied by a curvature lower bound on a d-regular graph:
/// nu(0) = 1, nu(1) = d, then a constant ratio per step.
pub fn nu_from_curvature(d: u32, k: &Rational, bipartite: bool) -> NuSpec {
    NuSpec::Curvature {
        degree: d,
        curvature: k.clone(),
        bipartite,
    }
}

/// Growth ratio `nu(i+1)/nu(i)` (for i >= 1) of the curvature envelope.
pub fn curvature_growth_ratio(d: u32, k: &Rational, bipartite: bool) -> Rational {
    let d_rat = rat_int(d as i64);
    if bipartite {
        // d(1-k)/2
        &d_rat * (rat_one() - k) / rat_int(2)
    } else {
        // (d+1-2dk)/2
        (&d_rat + rat_one() - rat_int(2) * &d_rat * k) / rat_int(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, FamilySpec};
    use crate::rational::rat;

    fn half() -> Rational {
        rat(1, 2)
    }

    #[test]
    fn kappa_examples() {
        let k2 = generate(&FamilySpec::Complete(2)).unwrap();
        assert_eq!(kappa(&k2, 0, 1, &half()).unwrap(), rat_one());

        let q2 = generate(&FamilySpec::Hypercube(2)).unwrap();
        assert_eq!(kappa(&q2, 0, 1, &half()).unwrap(), rat(1, 2));

        let t = generate(&FamilySpec::parse("tree:3,5").unwrap()).unwrap();
        assert_eq!(kappa(&t, 0, 1, &half()).unwrap(), rat(-1, 3));

        assert!(matches!(kappa(&k2, 0, 0, &half()), Err(Error::SameVertex)));
    }

    #[test]
    fn global_bound_cycle_is_flat() {
        let g = generate(&FamilySpec::Cycle(6)).unwrap();
        let report = global_lower_bound(&g, &half());
        assert_eq!(report.global, rat_zero());
        assert!(report.per_edge.values().all(|k| *k == rat_zero()));
        assert!(report.contaminated.is_empty());
    }

    #[test]
    fn global_bound_complete_is_positive() {
        let g = generate(&FamilySpec::Complete(4)).unwrap();
        let report = global_lower_bound(&g, &half());
        assert_eq!(report.global, rat(2, 3));
    }

    #[test]
    fn truncated_tree_interior_bound() {
        let g = generate(&FamilySpec::parse("tree:3,5").unwrap()).unwrap();
        let report = global_lower_bound(&g, &half());
        assert_eq!(report.global_interior, Some(rat(-1, 3)));
        // leaf edges curve positively, so the unrestricted minimum agrees
        assert_eq!(report.global, rat(-1, 3));
        // every uncontaminated edge sits exactly at the interior value
        for (edge, k) in &report.per_edge {
            if !report.contaminated.contains(edge) {
                assert_eq!(*k, rat(-1, 3), "edge {edge:?}");
            }
        }
    }

    #[test]
    fn neighbor_minimization_exhaustive_q3() {
        let g = generate(&FamilySpec::Hypercube(3)).unwrap();
        let mut pairs = Vec::new();
        for x in 0..8u32 {
            for y in (x + 1)..8u32 {
                if !g.has_edge(x, y) {
                    pairs.push((x, y));
                }
            }
        }
        let violations = check_neighbor_minimization(&g, &pairs, &half()).unwrap();
        assert!(violations.is_empty());
        assert!(check_neighbor_minimization(&g, &[], &half())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn tensorization_of_k2() {
        let k2 = generate(&FamilySpec::Complete(2)).unwrap();
        let c2 = check_tensorization(&k2, 2, &half()).unwrap();
        assert_eq!((c2.k_base, c2.k_power, c2.holds), (rat_one(), rat(1, 2), true));
        let c3 = check_tensorization(&k2, 3, &half()).unwrap();
        assert_eq!((c3.k_base, c3.k_power, c3.holds), (rat_one(), rat(1, 3), true));
        let c1 = check_tensorization(&k2, 1, &half()).unwrap();
        assert_eq!(c1.k_base, c1.k_power);
        assert!(c1.holds);
    }

    #[test]
    fn tensorization_guard() {
        let g = generate(&FamilySpec::Cycle(30)).unwrap();
        assert!(matches!(
            check_tensorization(&g, 3, &half()),
            Err(Error::PowerTooLarge(30, 3))
        ));
    }

    #[test]
    fn paeng_examples() {
        assert_eq!(paeng_shell_bound(3, &rat_zero(), 2), rat_int(9));
        assert_eq!(paeng_shell_bound(5, &rat_int(2), 2), rat_zero());
        assert_eq!(paeng_shell_bound(4, &rat(1, 2), 3), rat_int(24));
        assert_eq!(paeng_shell_bound(7, &rat(1, 3), 0), rat_one());
    }

    #[test]
    fn curvature_envelope_ratios() {
        // bipartite tree ratio d(1-k)/2
        assert_eq!(curvature_growth_ratio(3, &rat(-1, 3), true), rat_int(2));
        // general ratio (d+1-2dk)/2
        assert_eq!(curvature_growth_ratio(3, &rat(-1, 3), false), rat_int(3));
        // ratio collapses to zero at k = (d+1)/(2d)
        let d = 5;
        let k = rat(6, 10);
        assert_eq!(curvature_growth_ratio(d, &k, false), rat_zero());
    }

    #[test]
    fn positive_curvature_caps_the_diameter() {
        // shells vanish beyond 2/k once the bound is positive
        for spec in ["complete:4", "cycle:3", "cycle:5", "hypercube:2", "hypercube:3", "hypercube:4"] {
            let g = generate(&FamilySpec::parse(spec).unwrap()).unwrap();
            let k = global_lower_bound(&g, &half()).global;
            assert!(k > rat_zero(), "{spec}");
            let cap = (rat_int(2) / &k).ceil();
            let diam = (0..g.vertex_count() as u32)
                .map(|v| *g.bfs_distances(&[v]).unwrap().dist.iter().max().unwrap())
                .max()
                .unwrap();
            assert!(
                rat_int(diam as i64) <= cap,
                "{spec}: diameter {diam} exceeds 2/k = {cap}"
            );
        }
    }

    #[test]
    fn kappa_stays_within_the_transport_window() {
        // with laziness 1/2 the measures sit within distance-2 balls of the
        // endpoints, so edge costs stay at most 3 and kappa in [-2, 1]
        for spec in ["tree:3,4", "cycle:7", "hypercube:3", "complete:5"] {
            let g = generate(&FamilySpec::parse(spec).unwrap()).unwrap();
            for (k_edge, k) in global_lower_bound(&g, &half()).per_edge {
                assert!(k <= rat_one() && k >= rat_int(-2), "{spec} {k_edge:?}: {k}");
            }
        }
    }

    #[test]
    fn curvature_envelope_matches_tree_shells() {
        let spec = nu_from_curvature(3, &rat(-1, 3), true);
        assert_eq!(spec.value(0), rat_one());
        assert_eq!(spec.value(1), rat_int(3));
        assert_eq!(spec.value(2), rat_int(6));
        assert_eq!(spec.value(3), rat_int(12));
        // exact shell counts of tree:3 from the root
        let g = generate(&FamilySpec::parse("tree:3,5").unwrap()).unwrap();
        let dist = g.bfs_distances(&[0]).unwrap().dist;
        for i in 1..=3u32 {
            let count = dist.iter().filter(|&&d| d == i).count();
            assert_eq!(rat_int(count as i64), spec.value(i as u64));
        }
    }
}
