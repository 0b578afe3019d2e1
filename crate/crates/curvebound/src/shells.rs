//! Signed distance from a cut set, shell profiles, and growth/decay
//! envelopes for the normalized shell sizes.

use std::collections::BTreeSet;

use num_traits::{Pow, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::{rat_int, rat_one, rat_usize, rat_zero, Rational};

/// How to orient the two sides of a separating cut set.
#[derive(Debug, Clone)]
pub enum SideChoice {
    /// Positive side is the one with fewer vertices; ties go to the side
    /// containing the smallest vertex id.
    Auto,
    /// Positive side consists of the components containing this vertex.
    ComponentOf(u32),
    /// Positive side is exactly this set (must be a union of components).
    Set(BTreeSet<u32>),
}

/// A cut set with its signed-distance shells.
#[derive(Debug, Clone)]
pub struct ShellProfile {
    pub sigma: BTreeSet<u32>,
    pub v_plus: BTreeSet<u32>,
    pub v_minus: BTreeSet<u32>,
    /// Signed distance per vertex: zero on the cut, positive into `v_plus`.
    pub signed_dist: Vec<i64>,
    /// Cardinality of every occupied shell, keyed by signed distance.
    pub shell_sizes: std::collections::BTreeMap<i64, usize>,
    /// Largest occupied positive index (0 when `v_plus` is empty).
    pub plus_extent: i64,
    /// Smallest occupied negative index (0 when `v_minus` is empty).
    pub minus_extent: i64,
}

impl ShellProfile {
    pub fn shell_size(&self, k: i64) -> usize {
        self.shell_sizes.get(&k).copied().unwrap_or(0)
    }

    /// Swap the roles of the two sides.
    pub fn flipped(&self) -> ShellProfile {
        ShellProfile {
            sigma: self.sigma.clone(),
            v_plus: self.v_minus.clone(),
            v_minus: self.v_plus.clone(),
            signed_dist: self.signed_dist.iter().map(|d| -d).collect(),
            shell_sizes: self.shell_sizes.iter().map(|(&k, &c)| (-k, c)).collect(),
            plus_extent: -self.minus_extent,
            minus_extent: -self.plus_extent,
        }
    }

    /// True when no shell outgrows the cut itself. Certifies the constant
    /// envelope `nu = 1`.
    pub fn cut_dominates_shells(&self) -> bool {
        self.shell_sizes.values().all(|&c| c <= self.sigma.len())
    }
}

/// Build the shell profile of a separating cut set.
///
/// The cut must be non-empty, and after removing it no component may touch
/// both chosen sides. One side may be empty.
pub fn shell_profile(g: &Graph, sigma: &BTreeSet<u32>, side: &SideChoice) -> Result<ShellProfile> {
    if sigma.is_empty() {
        return Err(Error::EmptySigma);
    }
    let n = g.vertex_count();
    for &v in sigma {
        if v as usize >= n {
            return Err(Error::VertexOutOfRange(v, n));
        }
    }

    // Components of V \ Sigma.
    let mut comp = vec![usize::MAX; n];
    let mut comp_count = 0usize;
    for start in 0..n as u32 {
        if sigma.contains(&start) || comp[start as usize] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start as usize] = comp_count;
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if !sigma.contains(&w) && comp[w as usize] == usize::MAX {
                    comp[w as usize] = comp_count;
                    stack.push(w);
                }
            }
        }
        comp_count += 1;
    }

    let mut comp_members: Vec<Vec<u32>> = vec![Vec::new(); comp_count];
    for v in 0..n as u32 {
        if comp[v as usize] != usize::MAX {
            comp_members[comp[v as usize]].push(v);
        }
    }

    let plus_comps: BTreeSet<usize> = match side {
        SideChoice::ComponentOf(v) => {
            if *v as usize >= n {
                return Err(Error::VertexOutOfRange(*v, n));
            }
            if comp[*v as usize] == usize::MAX {
                BTreeSet::new()
            } else {
                BTreeSet::from([comp[*v as usize]])
            }
        }
        SideChoice::Set(set) => {
            let mut comps = BTreeSet::new();
            for &v in set {
                if sigma.contains(&v) {
                    continue;
                }
                if v as usize >= n {
                    return Err(Error::VertexOutOfRange(v, n));
                }
                comps.insert(comp[v as usize]);
            }
            // the set must cover the components it touches
            for &c in &comps {
                if let Some(&w) = comp_members[c].iter().find(|w| !set.contains(w)) {
                    let inside = comp_members[c].iter().find(|w| set.contains(w)).unwrap();
                    return Err(Error::NonSeparating(*inside, w));
                }
            }
            comps
        }
        SideChoice::Auto => {
            // Greedy: smaller half positive. Components sorted by (size,
            // least vertex) for determinism; first component goes positive.
            let mut order: Vec<usize> = (0..comp_count).collect();
            order.sort_by_key(|&c| (comp_members[c].len(), comp_members[c][0]));
            let mut plus = BTreeSet::new();
            if let Some(&first) = order.first() {
                plus.insert(first);
            }
            plus
        }
    };

    let mut v_plus = BTreeSet::new();
    let mut v_minus = BTreeSet::new();
    for v in 0..n as u32 {
        let c = comp[v as usize];
        if c == usize::MAX {
            continue;
        }
        if plus_comps.contains(&c) {
            v_plus.insert(v);
        } else {
            v_minus.insert(v);
        }
    }

    // Adjacent opposite sides would make the signed distance ill-defined.
    for &v in &v_plus {
        for &w in g.neighbors(v) {
            if v_minus.contains(&w) {
                return Err(Error::NonSeparating(v, w));
            }
        }
    }

    let sources: Vec<u32> = sigma.iter().copied().collect();
    let dist = g.bfs_distances(&sources)?.dist;
    let mut signed_dist = vec![0i64; n];
    let mut shell_sizes = std::collections::BTreeMap::new();
    let mut plus_extent = 0i64;
    let mut minus_extent = 0i64;
    for v in 0..n {
        let d = dist[v] as i64;
        let s = if v_plus.contains(&(v as u32)) {
            d
        } else if v_minus.contains(&(v as u32)) {
            -d
        } else {
            0
        };
        signed_dist[v] = s;
        *shell_sizes.entry(s).or_insert(0) += 1;
        plus_extent = plus_extent.max(s);
        minus_extent = minus_extent.min(s);
    }

    Ok(ShellProfile {
        sigma: sigma.clone(),
        v_plus,
        v_minus,
        signed_dist,
        shell_sizes,
        plus_extent,
        minus_extent,
    })
}

/// Recipe for a growth sequence nu(k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NuSpec {
    /// nu(i) = c.
    Constant(Rational),
    /// nu(i) = c^i.
    Exponential { c: Rational },
    /// nu(0) = 1, nu(i) = d c^(i-1).
    DegreeExponential { d: u32, c: Rational },
    /// nu(i) = 1 + i^b.
    Polynomial { b: u32 },
    /// nu(0) = 1, nu(1) = d, then a fixed ratio from the curvature bound.
    Curvature {
        degree: u32,
        curvature: Rational,
        bipartite: bool,
    },
}

impl NuSpec {
    pub fn value(&self, i: u64) -> Rational {
        match self {
            NuSpec::Constant(c) => c.clone(),
            NuSpec::Exponential { c } => c.pow(i as i32),
            NuSpec::DegreeExponential { d, c } => {
                if i == 0 {
                    rat_one()
                } else {
                    rat_int(*d as i64) * c.pow(i as i32 - 1)
                }
            }
            NuSpec::Polynomial { b } => rat_one() + rat_int(i as i64).pow(*b as i32),
            NuSpec::Curvature {
                degree,
                curvature,
                bipartite,
            } => {
                if i == 0 {
                    rat_one()
                } else {
                    let ratio =
                        crate::curvature::curvature_growth_ratio(*degree, curvature, *bipartite);
                    rat_int(*degree as i64) * ratio.pow(i as i32 - 1)
                }
            }
        }
    }
}

/// Where an envelope's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeProvenance {
    Curvature,
    Constant,
    Empirical,
    Explicit,
}

/// Growth sequence nu and decay sequence mu bracketing normalized shell
/// sizes, truncated where the decay side stays positive.
#[derive(Debug, Clone)]
pub struct GrowthEnvelope {
    nu: Vec<Rational>,
    mu: Vec<Rational>,
    /// Usable positive range: mu(k) > 0 for 1 <= k <= t_plus.
    pub t_plus: i64,
    /// Usable negative range (non-positive index).
    pub t_minus: i64,
    /// Occupied positive extent of the underlying profile (t_plus for
    /// synthetic envelopes).
    pub plus_extent: i64,
    pub minus_extent: i64,
    /// Largest k with h_out * sum(nu(0..=k)) strictly below one, when mu
    /// came from a cut ratio.
    pub t: Option<i64>,
    pub h_out: Option<Rational>,
    pub provenance: EnvelopeProvenance,
}

impl GrowthEnvelope {
    pub fn nu(&self, k: i64) -> &Rational {
        &self.nu[k.unsigned_abs() as usize]
    }

    pub fn mu(&self, k: i64) -> &Rational {
        &self.mu[k.unsigned_abs() as usize]
    }

    pub fn nu_len(&self) -> usize {
        self.nu.len()
    }

    /// nu(k) + nu(k-1), the inverse-growth weight.
    pub fn zeta(&self, k: i64) -> Rational {
        let k = k.unsigned_abs() as usize;
        assert!(k >= 1);
        &self.nu[k] + &self.nu[k - 1]
    }

    /// Common usable one-sided range min(T+, |T-|); 0 when one side is
    /// absent.
    pub fn t_symmetric(&self) -> i64 {
        self.t_plus.min(-self.t_minus)
    }

    /// Tightest envelope of a profile: per |k|, nu takes the larger and mu
    /// the smaller normalized shell size over the sides present.
    pub fn empirical(profile: &ShellProfile) -> GrowthEnvelope {
        let sigma = rat_usize(profile.sigma.len());
        let has_plus = !profile.v_plus.is_empty();
        let has_minus = !profile.v_minus.is_empty();
        let extent = profile.plus_extent.max(-profile.minus_extent);
        let mut nu = Vec::with_capacity(extent as usize + 1);
        let mut mu = Vec::with_capacity(extent as usize + 1);
        nu.push(rat_one());
        mu.push(rat_one());
        for k in 1..=extent {
            let plus = rat_usize(profile.shell_size(k)) / &sigma;
            let minus = rat_usize(profile.shell_size(-k)) / &sigma;
            let (hi, lo) = match (has_plus, has_minus) {
                (true, true) => (plus.clone().max(minus.clone()), plus.min(minus)),
                (true, false) => (plus.clone(), plus),
                (false, true) => (minus.clone(), minus),
                (false, false) => unreachable!("extent > 0 needs a side"),
            };
            nu.push(hi);
            mu.push(lo);
        }
        let first_zero = (1..=extent)
            .find(|&k| mu[k as usize].is_zero())
            .unwrap_or(extent + 1);
        let t_plus = if has_plus {
            profile.plus_extent.min(first_zero - 1)
        } else {
            0
        };
        let t_minus = if has_minus {
            -((-profile.minus_extent).min(first_zero - 1))
        } else {
            0
        };
        GrowthEnvelope {
            nu,
            mu,
            t_plus,
            t_minus,
            plus_extent: profile.plus_extent,
            minus_extent: profile.minus_extent,
            t: None,
            h_out: None,
            provenance: EnvelopeProvenance::Empirical,
        }
    }

    fn with_nu(&self, nu: Vec<Rational>, provenance: EnvelopeProvenance) -> GrowthEnvelope {
        let len = nu.len().min(self.mu.len());
        let cap = len as i64 - 1;
        GrowthEnvelope {
            nu: nu[..len].to_vec(),
            mu: self.mu[..len].to_vec(),
            t_plus: self.t_plus.min(cap),
            t_minus: self.t_minus.max(-cap),
            plus_extent: self.plus_extent,
            minus_extent: self.minus_extent,
            t: None,
            h_out: None,
            provenance,
        }
    }

    /// Keep the decay side, replace growth by the constant one. The caller
    /// certifies `cut_dominates_shells` first.
    pub fn with_constant_nu(&self) -> GrowthEnvelope {
        self.with_nu(
            vec![rat_one(); self.nu.len()],
            EnvelopeProvenance::Constant,
        )
    }

    /// Keep the decay side, replace growth by a recipe's values.
    pub fn with_nu_recipe(&self, spec: &NuSpec, provenance: EnvelopeProvenance) -> GrowthEnvelope {
        let nu = (0..self.nu.len()).map(|k| spec.value(k as u64)).collect();
        self.with_nu(nu, provenance)
    }

    /// Keep the decay side, replace growth by an explicit table. A shorter
    /// table shrinks the usable range.
    pub fn with_nu_table(&self, table: &[Rational], provenance: EnvelopeProvenance) -> GrowthEnvelope {
        self.with_nu(table.to_vec(), provenance)
    }

    /// Replace the decay side by `mu(k) = 1 - h_out * sum(nu(0..=k))`,
    /// truncating at the largest k where that stays strictly positive.
    pub fn mu_from_hout(&self, h_out: &Rational) -> Result<GrowthEnvelope> {
        let limit = self.nu.len() as i64 - 1;
        let (nu, mu, t) = fill_mu(|k| self.nu[k as usize].clone(), h_out, Some(limit))?;
        let t_plus = if self.plus_extent > 0 { t.min(self.plus_extent) } else { 0 };
        let t_minus = if self.minus_extent < 0 {
            -(t.min(-self.minus_extent))
        } else {
            0
        };
        Ok(GrowthEnvelope {
            nu,
            mu,
            t_plus,
            t_minus,
            plus_extent: self.plus_extent,
            minus_extent: self.minus_extent,
            t: Some(t),
            h_out: Some(h_out.clone()),
            provenance: self.provenance,
        })
    }

    /// Materialize a recipe against a cut ratio; both sides usable to T.
    pub fn from_spec(spec: &NuSpec, h_out: &Rational) -> Result<GrowthEnvelope> {
        let (nu, mu, t) = fill_mu(|k| spec.value(k as u64), h_out, None)?;
        Ok(GrowthEnvelope {
            nu,
            mu,
            t_plus: t,
            t_minus: -t,
            plus_extent: t,
            minus_extent: -t,
            t: Some(t),
            h_out: Some(h_out.clone()),
            provenance: match spec {
                NuSpec::Constant(_) => EnvelopeProvenance::Constant,
                NuSpec::Curvature { .. } => EnvelopeProvenance::Curvature,
                _ => EnvelopeProvenance::Explicit,
            },
        })
    }

    /// Envelope violations against actual shell sizes. Empty means the
    /// bracket `|Sigma| mu(|k|) <= |Sigma_k| <= |Sigma| nu(|k|)` holds on
    /// the usable range and nu covers every occupied shell it spans.
    pub fn validity_violations(&self, profile: &ShellProfile) -> Vec<String> {
        let sigma = rat_usize(profile.sigma.len());
        let mut out = Vec::new();
        for k in profile.minus_extent..=profile.plus_extent {
            let idx = k.unsigned_abs() as usize;
            if idx >= self.nu.len() {
                continue;
            }
            let size = rat_usize(profile.shell_size(k));
            if size > &sigma * &self.nu[idx] {
                out.push(format!(
                    "shell {k}: size {} exceeds |Sigma| nu = {}",
                    profile.shell_size(k),
                    &sigma * &self.nu[idx]
                ));
            }
            let in_minus_range = k < 0 && k >= self.t_minus;
            let in_plus_range = k >= 0 && k <= self.t_plus;
            if (in_plus_range || in_minus_range) && size < &sigma * &self.mu[idx] {
                out.push(format!(
                    "shell {k}: size {} below |Sigma| mu = {}",
                    profile.shell_size(k),
                    &sigma * &self.mu[idx]
                ));
            }
        }
        out
    }

    /// Plot-ready rows `k,nu,mu`.
    pub fn csv(&self) -> String {
        let mut out = String::from("k,nu,mu\n");
        for k in 0..self.nu.len() {
            out.push_str(&format!("{k},{},{}\n", self.nu[k], self.mu[k]));
        }
        out
    }
}

/// Shared decay fill: stop at the largest k with `1 > h * sum nu(0..=k)`;
/// ties (equality) exclude the index.
fn fill_mu(
    nu_at: impl Fn(i64) -> Rational,
    h_out: &Rational,
    limit: Option<i64>,
) -> Result<(Vec<Rational>, Vec<Rational>, i64)> {
    let mut nu = Vec::new();
    let mut mu = Vec::new();
    let mut partial = rat_zero();
    let mut k = 0i64;
    loop {
        if let Some(l) = limit {
            if k > l {
                break;
            }
        }
        let v = nu_at(k);
        partial += &v;
        let m = rat_one() - h_out * &partial;
        if m <= rat_zero() {
            if k == 0 {
                return Err(Error::NoPositiveRange);
            }
            break;
        }
        nu.push(v);
        mu.push(m);
        k += 1;
        if k > 1_000_000 {
            return Err(Error::TooLarge(
                "decay sequence does not terminate (h_out too small or zero)".into(),
            ));
        }
    }
    let t = nu.len() as i64 - 1;
    if t < 0 {
        return Err(Error::NoPositiveRange);
    }
    Ok((nu, mu, t))
}

/// Violations of the cut-optimality lower bound
/// `|Sigma_k| >= |Sigma| (1 - h_out * sum nu(0..=k))`, checked on both
/// orientations for every k the nu table covers.
pub fn verify_lemma_d_lowerbound(
    profile: &ShellProfile,
    env: &GrowthEnvelope,
    h_out: &Rational,
) -> Vec<String> {
    let sigma = rat_usize(profile.sigma.len());
    let mut out = Vec::new();
    let mut partial = rat_zero();
    let max_k = (env.nu_len() as i64 - 1)
        .max(profile.plus_extent)
        .max(-profile.minus_extent);
    for k in 0..=max_k {
        if k as usize >= env.nu_len() {
            break;
        }
        partial += env.nu(k);
        let bound = &sigma * (rat_one() - h_out * &partial);
        for (label, size) in [
            ("+", profile.shell_size(k)),
            ("-", profile.shell_size(-k)),
        ] {
            if k == 0 && label == "-" {
                continue;
            }
            if rat_usize(size) < bound {
                out.push(format!(
                    "side {label} shell {k}: size {size} below lower bound {bound}"
                ));
            }
        }
    }
    out
}
