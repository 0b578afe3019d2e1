//! Laplacian spectra and every envelope-driven eigenvalue bound.
//!
//! Two independent routes lead to each spectral-gap bound: the Hardy
//! constant B with `lambda_2 <= 1/(2B)`, and the smallest eigenvalues of
//! the comparison matrices built from the same envelope. They are computed
//! by separate code paths and cross-validate each other.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{FamilySpec, Graph};
use crate::linalg;
use crate::rational::{rat_int, rat_one, rat_usize, rat_zero, to_f64, Rational};
use crate::shells::{GrowthEnvelope, ShellProfile};

/// Slack for "bound dominates eigenvalue" comparisons of solver output.
pub const DOMINANCE_SLACK: f64 = 1e-8;
/// Default vertex cap for the dense eigensolver path.
pub const DENSE_GUARD_DEFAULT: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SpectrumMethod {
    DenseJacobi,
    ClosedFormFamily,
}

/// Ascending eigenvalues of the normalized Laplacian.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub method: SpectrumMethod,
    pub tolerance: f64,
}

impl Spectrum {
    /// k-th eigenvalue, 1-indexed as lambda_1 = 0.
    pub fn lambda(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda(2)
    }
}

/// Closed-form normalized Laplacian spectrum for product-built families.
pub fn closed_form_spectrum(spec: &FamilySpec) -> Option<Vec<f64>> {
    fn spectrum_and_degree(spec: &FamilySpec) -> Option<(Vec<f64>, u32)> {
        match spec {
            FamilySpec::Cycle(n) => {
                let n = *n;
                let eig = (0..n)
                    .map(|k| 1.0 - (2.0 * PI * k as f64 / n as f64).cos())
                    .collect();
                Some((eig, 2))
            }
            FamilySpec::Complete(n) => {
                let n = *n;
                let mut eig = vec![0.0];
                eig.extend(std::iter::repeat(n as f64 / (n as f64 - 1.0)).take(n - 1));
                Some((eig, n as u32 - 1))
            }
            FamilySpec::Hypercube(d) => {
                let d = *d;
                let mut eig = Vec::with_capacity(1 << d);
                for k in 0..=d as u64 {
                    let mult = crate::rational::binomial(d as u64, k);
                    let mult: u64 = mult.try_into().ok()?;
                    eig.extend(std::iter::repeat(2.0 * k as f64 / d as f64).take(mult as usize));
                }
                Some((eig, d))
            }
            FamilySpec::Torus { n, d } => {
                let cycle = FamilySpec::Cycle(*n);
                let mut acc = spectrum_and_degree(&cycle)?;
                for _ in 1..*d {
                    acc = combine(acc, spectrum_and_degree(&cycle)?);
                }
                Some(acc)
            }
            FamilySpec::Tree { .. } => None,
            FamilySpec::Product(a, b) => {
                let sa = spectrum_and_degree(a)?;
                let sb = spectrum_and_degree(b)?;
                Some(combine(sa, sb))
            }
        }
    }

    /// Normalized Laplacian eigenvalues of a product are degree-weighted
    /// averages of the factors'.
    fn combine(a: (Vec<f64>, u32), b: (Vec<f64>, u32)) -> (Vec<f64>, u32) {
        let (ea, da) = a;
        let (eb, db) = b;
        let total = (da + db) as f64;
        let mut eig = Vec::with_capacity(ea.len() * eb.len());
        for x in &ea {
            for y in &eb {
                eig.push((da as f64 * x + db as f64 * y) / total);
            }
        }
        (eig, da + db)
    }

    let (mut eig, _) = spectrum_and_degree(spec)?;
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(eig)
}

/// Dense route: cyclic Jacobi on `I - D^(-1/2) A D^(-1/2)`.
pub fn dense_spectrum(g: &Graph) -> Spectrum {
    let n = g.vertex_count();
    let mut m = vec![vec![0.0; n]; n];
    for v in 0..n as u32 {
        m[v as usize][v as usize] = 1.0;
        let dv = g.degree(v) as f64;
        for &w in g.neighbors(v) {
            let dw = g.degree(w) as f64;
            m[v as usize][w as usize] = -1.0 / (dv * dw).sqrt();
        }
    }
    Spectrum {
        eigenvalues: linalg::jacobi_eigenvalues(&m),
        method: SpectrumMethod::DenseJacobi,
        tolerance: linalg::JACOBI_OFF_NORM,
    }
}

/// Full spectrum: closed form for generated product families, dense Jacobi
/// otherwise (guarded).
pub fn laplacian_spectrum(g: &Graph) -> Result<Spectrum> {
    laplacian_spectrum_with_guard(g, DENSE_GUARD_DEFAULT)
}

pub fn laplacian_spectrum_with_guard(g: &Graph, max_dense: usize) -> Result<Spectrum> {
    if let Some(eig) = g.family().and_then(closed_form_spectrum) {
        return Ok(Spectrum {
            eigenvalues: eig,
            method: SpectrumMethod::ClosedFormFamily,
            tolerance: 0.0,
        });
    }
    if g.vertex_count() > max_dense {
        return Err(Error::TooLargeForDense(g.vertex_count(), max_dense));
    }
    Ok(dense_spectrum(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSide {
    Plus,
    Minus,
}

/// Symmetric tridiagonal comparison system for one side of the cut.
#[derive(Debug, Clone)]
pub struct TridiagonalSystem {
    pub side: MatrixSide,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn size(&self) -> usize {
        self.diag.len()
    }
}

/// Entries of one side's system truncated at `t >= 1`:
/// interior diagonal `(2 nu(i) + nu(i-1) + nu(i+1)) / mu(i)`, corner
/// `(nu(t) + nu(t-1)) / mu(t)`, off-diagonal `-(nu(i) + nu(j)) / sqrt(mu(i) mu(j))`.
/// Formed in exact rationals, converted once.
fn side_system(env: &GrowthEnvelope, side: MatrixSide, t: i64) -> TridiagonalSystem {
    let (diag, off_sq) = exact_side_entries(env, t);
    TridiagonalSystem {
        side,
        diag: diag.iter().map(to_f64).collect(),
        off: off_sq.iter().map(|x| -to_f64(x).sqrt()).collect(),
    }
}

/// Comparison matrices for the two sides, absent where a side is unusable.
pub fn build_a_matrices(
    env: &GrowthEnvelope,
) -> Result<(Option<TridiagonalSystem>, Option<TridiagonalSystem>)> {
    let plus = (env.t_plus >= 1).then(|| side_system(env, MatrixSide::Plus, env.t_plus));
    let minus = (env.t_minus <= -1).then(|| side_system(env, MatrixSide::Minus, -env.t_minus));
    if plus.is_none() && minus.is_none() {
        return Err(Error::EmptySide("both"));
    }
    Ok((plus, minus))
}

/// Smallest `count` eigenvalues of a comparison system by Sturm bisection.
pub fn tridiagonal_eigenvalues(sys: &TridiagonalSystem, count: usize) -> Result<Vec<f64>> {
    if count > sys.size() {
        return Err(Error::CountTooLarge(count, sys.size()));
    }
    Ok(linalg::sturm_smallest(&sys.diag, &sys.off, count))
}

/// The Hardy constant
/// `B = sup_n (sum_{k=n}^T mu(k)) (sum_{k=1}^n 1/(nu(k)+nu(k-1)))`,
/// an exact supremum over the finite range `1..=T` with `T = t_plus`.
pub fn hardy_constant_b(env: &GrowthEnvelope) -> Result<Rational> {
    let t = env.t_plus;
    if t < 1 {
        return Err(Error::EmptyRange);
    }
    let mut best = rat_zero();
    let mut inv_sum = rat_zero();
    for n in 1..=t {
        inv_sum += rat_one() / env.zeta(n);
        let mut tail = rat_zero();
        for k in n..=t {
            tail += env.mu(k);
        }
        let candidate = tail * &inv_sum;
        if candidate > best {
            best = candidate;
        }
    }
    Ok(best)
}

/// Optimal Hardy-Rayleigh quotient and its minimizer in shell coordinates.
#[derive(Debug, Clone)]
pub struct HardyRayleigh {
    pub value: f64,
    /// Minimizing shell function f(1..=T), normalized to max entry one.
    pub minimizer: Vec<f64>,
    /// Monotonicity of the exact minimizer, decided in rational arithmetic.
    pub monotone: bool,
}

/// Exact Sturm count for one side's comparison system: the pivots only
/// involve the squares of the off-diagonal entries, which are rational, so
/// the count is exact no matter how badly scaled the envelope is.
fn exact_sturm_count(diag: &[Rational], off_sq: &[Rational], x: &Rational) -> Option<usize> {
    let mut count = 0usize;
    let mut q = &diag[0] - x;
    if q.is_zero() {
        return None;
    }
    if q < rat_zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        q = &diag[i] - x - &off_sq[i - 1] / q;
        if q.is_zero() {
            return None;
        }
        if q < rat_zero() {
            count += 1;
        }
    }
    Some(count)
}

/// Rational entries of one side's system: diagonal values and squared
/// off-diagonal values.
fn exact_side_entries(env: &GrowthEnvelope, t: i64) -> (Vec<Rational>, Vec<Rational>) {
    debug_assert!(t >= 1);
    let m = t as usize;
    let mut diag = Vec::with_capacity(m);
    let mut off_sq = Vec::with_capacity(m.saturating_sub(1));
    for i in 1..=m as i64 {
        let value = if i < m as i64 {
            (rat_int(2) * env.nu(i) + env.nu(i - 1) + env.nu(i + 1)) / env.mu(i)
        } else {
            (env.nu(i) + env.nu(i - 1)) / env.mu(i)
        };
        diag.push(value);
        if i < m as i64 {
            let z = env.nu(i) + env.nu(i + 1);
            off_sq.push(&z * &z / (env.mu(i) * env.mu(i + 1)));
        }
    }
    (diag, off_sq)
}

/// k-th smallest eigenvalue (1-indexed) of one side's system by dyadic
/// bisection with exact counts; returns a bracket of width below 1e-12.
fn exact_kth_eigenvalue(
    diag: &[Rational],
    off_sq: &[Rational],
    k: usize,
) -> (Rational, Rational) {
    // Gershgorin upper bound with |e| <= (1 + e^2)/2, rounded up to a
    // power of two so midpoints stay dyadic.
    let mut hi_bound = rat_zero();
    let n = diag.len();
    for i in 0..n {
        let mut row = diag[i].clone();
        if i > 0 {
            row += (rat_one() + &off_sq[i - 1]) / rat_int(2);
        }
        if i < n - 1 {
            row += (rat_one() + &off_sq[i]) / rat_int(2);
        }
        if row > hi_bound {
            hi_bound = row;
        }
    }
    let mut hi = rat_one();
    while hi < hi_bound {
        hi *= rat_int(2);
    }
    let mut lo = rat_zero();
    // Narrow to absolute width 2^-44 and relative width 2^-80. The
    // absolute part pins the eigenvalue well inside 1e-12; the relative
    // part makes the lower end a usable inverse-iteration shift even when
    // the minimizer's increments are geometrically small (down to c^-T).
    let width_target = Rational::new(1.into(), num_bigint::BigInt::from(2).pow(44));
    let rel = Rational::new(1.into(), num_bigint::BigInt::from(2).pow(80));
    let mut nudge = Rational::new(1.into(), num_bigint::BigInt::from(2).pow(200));
    let mut iterations = 0;
    while {
        let width = &hi - &lo;
        iterations += 1;
        iterations < 600 && (width > width_target || width > &hi * &rel)
    } {
        let mut mid = (&lo + &hi) / rat_int(2);
        let count = loop {
            match exact_sturm_count(diag, off_sq, &mid) {
                Some(c) => break c,
                None => {
                    // midpoint hit an exact pivot zero; nudge it
                    mid += &nudge;
                    nudge *= rat_int(2);
                }
            }
        };
        if count <= k - 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Exact minimizer recovery: one inverse-iteration solve of the
/// generalized pencil at a shift strictly below the smallest eigenvalue,
/// in the original shell coordinates (no square roots).
///
/// The pencil is `K f = 2R M f` with tridiagonal stiffness
/// `K(i,i) = zeta(i) + zeta(i+1)` (corner `zeta(T)`),
/// `K(i,i+1) = -zeta(i+1)`, and `M = diag(mu)`.
fn exact_minimizer(env: &GrowthEnvelope, t: i64, shift: &Rational) -> Vec<Rational> {
    let m = t as usize;
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for i in 1..=t {
        let k_ii = if i < t {
            env.zeta(i) + env.zeta(i + 1)
        } else {
            env.zeta(i)
        };
        diag.push(k_ii - shift * env.mu(i));
        if i < t {
            off.push(-env.zeta(i + 1));
        }
    }
    // Forward elimination; below the smallest eigenvalue the pencil is
    // positive definite, so pivots stay positive.
    let mut rhs = vec![rat_one(); m];
    for i in 0..m - 1 {
        let factor = &off[i] / &diag[i];
        let adj = &factor * &off[i];
        diag[i + 1] -= adj;
        let carry = &factor * &rhs[i];
        rhs[i + 1] -= carry;
    }
    let mut f = vec![rat_zero(); m];
    for i in (0..m).rev() {
        let mut acc = rhs[i].clone();
        if i + 1 < m {
            acc -= &off[i] * &f[i + 1];
        }
        f[i] = acc / &diag[i];
    }
    f
}

/// R as half the least eigenvalue of the plus-side comparison system,
/// located by exact-arithmetic Sturm bisection; the minimizer comes from an
/// exact inverse-iteration solve at the lower end of the final bracket.
pub fn hardy_rayleigh_r(env: &GrowthEnvelope) -> Result<HardyRayleigh> {
    let t = env.t_plus;
    if t < 1 {
        return Err(Error::EmptyRange);
    }
    let (diag, off_sq) = exact_side_entries(env, t);
    let (lo, hi) = exact_kth_eigenvalue(&diag, &off_sq, 1);
    let rho = to_f64(&((&lo + &hi) / rat_int(2)));

    let mut f = exact_minimizer(env, t, &lo);
    // normalize to max |entry| one, largest entry positive
    let max_abs = f
        .iter()
        .map(|x| x.abs())
        .max()
        .expect("non-empty minimizer");
    if !max_abs.is_zero() {
        let flip = f.iter().max_by(|a, b| a.abs().cmp(&b.abs())).unwrap() < &rat_zero();
        for x in &mut f {
            *x /= &max_abs;
            if flip {
                *x = -x.clone();
            }
        }
    }
    let monotone = f.windows(2).all(|w| w[1] >= w[0]);
    Ok(HardyRayleigh {
        value: rho / 2.0,
        minimizer: f.iter().map(to_f64).collect(),
        monotone,
    })
}

/// Both spectral-gap bounds next to the true eigenvalue.
#[derive(Debug, Clone)]
pub struct Lambda2Bounds {
    /// `1/(2B)`; absent when the decay range is empty or the envelope is
    /// one-sided.
    pub hardy_bound: Option<f64>,
    pub b_constant: Option<Rational>,
    /// `max(rho_1(A+), rho_1(A-)) / 2`; absent when neither side is usable.
    pub matrix_bound: Option<f64>,
    pub one_sided: bool,
    pub true_lambda2: f64,
    pub hardy_dominates: Option<bool>,
    pub matrix_dominates: Option<bool>,
}

/// Evaluate both lambda_2 routes against a known spectrum.
pub fn bound_lambda2(spectrum: &Spectrum, env: &GrowthEnvelope) -> Lambda2Bounds {
    let lambda2 = spectrum.lambda2();
    let one_sided = env.t_plus < 1 || env.t_minus > -1;

    let (hardy_bound, b_constant) = if one_sided || env.h_out.is_none() {
        (None, None)
    } else {
        match hardy_constant_b(env) {
            Ok(b) if !b.is_zero() => {
                let bound = to_f64(&(rat_one() / (rat_int(2) * &b)));
                (Some(bound), Some(b))
            }
            _ => (None, None),
        }
    };

    let matrix_bound = match build_a_matrices(env) {
        Ok((plus, minus)) => {
            let rho = |sys: &TridiagonalSystem| linalg::sturm_smallest(&sys.diag, &sys.off, 1)[0];
            let candidates: Vec<f64> = plus
                .iter()
                .chain(minus.iter())
                .map(rho)
                .collect();
            if one_sided {
                // recorded, but not a valid two-sided certificate
                None
            } else {
                candidates
                    .iter()
                    .copied()
                    .reduce(f64::max)
                    .map(|worst| worst / 2.0)
            }
        }
        Err(_) => None,
    };

    Lambda2Bounds {
        hardy_dominates: hardy_bound.map(|b| b >= lambda2 - DOMINANCE_SLACK),
        matrix_dominates: matrix_bound.map(|b| b >= lambda2 - DOMINANCE_SLACK),
        hardy_bound,
        b_constant,
        matrix_bound,
        one_sided,
        true_lambda2: lambda2,
    }
}

/// Higher-eigenvalue bound `lambda_{k+l} <= max(rho_k(A+), rho_l(A-)) / 2`,
/// minimized over admissible truncations of each side.
pub fn bound_higher(env: &GrowthEnvelope, k: usize, l: usize) -> Result<f64> {
    let t_plus = env.t_plus;
    let t_minus_abs = -env.t_minus;
    if k < 1 || l < 1 || (k as i64) > t_plus || (l as i64) > t_minus_abs {
        return Err(Error::IndexOutOfRange(k, l, env.t_plus, env.t_minus));
    }
    let best_side = |side: MatrixSide, index: usize, max_t: i64| -> f64 {
        (index as i64..=max_t)
            .map(|t| {
                let sys = side_system(env, side, t);
                linalg::sturm_smallest(&sys.diag, &sys.off, index)[index - 1]
            })
            .fold(f64::INFINITY, f64::min)
    };
    let plus = best_side(MatrixSide::Plus, k, t_plus);
    let minus = best_side(MatrixSide::Minus, l, t_minus_abs);
    Ok(plus.max(minus) / 2.0)
}

/// Level-set route to the spectral gap.
#[derive(Debug, Clone)]
pub struct BuserLevelBound {
    pub alpha: Rational,
    pub t: i64,
    /// `2 (t+1) |Sigma| / (t^2 |V|)`, exact.
    pub bound: Rational,
}

/// Explicit test-function bound from a cut whose shells it dominates:
/// requires `alpha = |Sigma|/|V| < 1/4` and `|Sigma| >= |Sigma_k|` for all k.
pub fn buser_constant_route(g: &Graph, profile: &ShellProfile) -> Result<BuserLevelBound> {
    let sigma = profile.sigma.len();
    let n = g.vertex_count();
    let alpha = rat_usize(sigma) / rat_usize(n);
    if alpha >= crate::rational::rat(1, 4) {
        return Err(Error::AlphaTooLarge(alpha.to_string()));
    }
    for (&k, &size) in &profile.shell_sizes {
        if size > sigma {
            return Err(Error::DominanceHypothesisFails(k, size, sigma));
        }
    }
    let t = (n / (4 * sigma)) as i64;
    debug_assert!(t >= 1);
    let bound = rat_int(2) * rat_int(t + 1) * rat_usize(sigma) / (rat_int(t * t) * rat_usize(n));
    Ok(BuserLevelBound { alpha, t, bound })
}

/// Constant-envelope bound on higher eigenvalues via the higher-order cut
/// constant.
#[derive(Debug, Clone)]
pub struct HigherBuserBound {
    pub bound: f64,
    pub best_t: i64,
    /// Asymptotic comparison value `k^2 h^2 27 pi^2 / 16`; reported, never
    /// asserted.
    pub reference: f64,
}

/// Minimize `2 (1 - cos(ceil(k/2) pi / (t+1))) / (1 - h (t+1))` over integer
/// truncations `ceil(k/2) <= t <= t_min` with positive denominator.
pub fn higher_buser_bound(h_out_n: &Rational, k: usize, t_min: i64) -> Result<HigherBuserBound> {
    let half_k = k.div_ceil(2) as i64;
    let h = to_f64(h_out_n);
    let mut best: Option<(f64, i64)> = None;
    for t in half_k..=t_min {
        let denom = rat_one() - h_out_n * rat_int(t + 1);
        if denom <= rat_zero() {
            continue;
        }
        let value = 2.0 * (1.0 - (half_k as f64 * PI / (t as f64 + 1.0)).cos()) / to_f64(&denom);
        if best.map_or(true, |(b, _)| value < b) {
            best = Some((value, t));
        }
    }
    let (bound, best_t) = best.ok_or(Error::EmptyRange)?;
    Ok(HigherBuserBound {
        bound,
        best_t,
        reference: (k * k) as f64 * h * h * 27.0 * PI * PI / 16.0,
    })
}

/// One graph's worth of bound evidence.
#[derive(Debug, Clone)]
pub struct SpectralBoundReport {
    pub graph_id: String,
    pub h_out: Option<Rational>,
    pub envelope_t_plus: i64,
    pub envelope_t_minus: i64,
    pub lambda2: Lambda2Bounds,
    /// `(k, l) -> bound on lambda_{k+l}` from the comparison matrices.
    pub rho_bounds: BTreeMap<(usize, usize), f64>,
    pub buser_level: Option<BuserLevelBound>,
    pub true_spectrum: Spectrum,
    pub all_satisfied: bool,
}

/// Assemble the full report: every bound the envelope supports, each
/// compared against the true eigenvalue it dominates.
pub fn assemble_report(
    graph_id: &str,
    g: &Graph,
    profile: &ShellProfile,
    env: &GrowthEnvelope,
    spectrum: Spectrum,
    max_index: usize,
) -> SpectralBoundReport {
    let lambda2 = bound_lambda2(&spectrum, env);
    let mut rho_bounds = BTreeMap::new();
    let mut all = lambda2.hardy_dominates.unwrap_or(true)
        && lambda2.matrix_dominates.unwrap_or(true);
    let n = spectrum.eigenvalues.len();
    for k in 1..=max_index {
        for l in 1..=max_index {
            if k + l > n {
                continue;
            }
            if let Ok(bound) = bound_higher(env, k, l) {
                let ok = bound >= spectrum.lambda(k + l) - DOMINANCE_SLACK;
                all = all && ok;
                rho_bounds.insert((k, l), bound);
            }
        }
    }
    let buser_level = buser_constant_route(g, profile).ok();
    if let Some(b) = &buser_level {
        all = all && to_f64(&b.bound) >= spectrum.lambda2() - DOMINANCE_SLACK;
    }
    SpectralBoundReport {
        graph_id: graph_id.to_string(),
        h_out: env.h_out.clone(),
        envelope_t_plus: env.t_plus,
        envelope_t_minus: env.t_minus,
        lambda2,
        rho_bounds,
        buser_level,
        true_spectrum: spectrum,
        all_satisfied: all,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate;
    use crate::rational::rat;
    use crate::shells::{shell_profile, NuSpec, SideChoice};
    use std::collections::BTreeSet;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cycle_spectrum_closed_form() {
        let g = generate(&FamilySpec::Cycle(6)).unwrap();
        let s = laplacian_spectrum(&g).unwrap();
        assert_eq!(s.method, SpectrumMethod::ClosedFormFamily);
        let expect = [0.0, 0.5, 0.5, 1.5, 1.5, 2.0];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!(close(*a, b, 1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn k2_spectrum() {
        let g = generate(&FamilySpec::Complete(2)).unwrap();
        let s = laplacian_spectrum(&g).unwrap();
        assert!(close(s.eigenvalues[0], 0.0, 1e-12));
        assert!(close(s.eigenvalues[1], 2.0, 1e-12));
    }

    #[test]
    fn hypercube_spectrum_multiplicities() {
        let g = generate(&FamilySpec::Hypercube(3)).unwrap();
        let s = laplacian_spectrum(&g).unwrap();
        let expect = [0.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 2.0];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!(close(*a, b, 1e-12));
        }
    }

    #[test]
    fn dense_matches_closed_form() {
        for spec in ["cycle:7", "hypercube:4", "torus:4,2", "complete:5"] {
            let g = generate(&FamilySpec::parse(spec).unwrap()).unwrap();
            let closed = laplacian_spectrum(&g).unwrap();
            let dense = dense_spectrum(&g);
            for (a, b) in closed.eigenvalues.iter().zip(&dense.eigenvalues) {
                assert!(close(*a, *b, 1e-9), "{spec}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dense_guard() {
        let g = generate(&FamilySpec::parse("tree:3,5").unwrap()).unwrap();
        assert!(matches!(
            laplacian_spectrum_with_guard(&g, 50),
            Err(Error::TooLargeForDense(94, 50))
        ));
    }

    #[test]
    fn a_matrix_entries_by_hand() {
        let env = GrowthEnvelope::from_spec(&NuSpec::Constant(rat_one()), &rat(1, 5)).unwrap();
        let (plus, minus) = build_a_matrices(&env).unwrap();
        let plus = plus.unwrap();
        assert_eq!(plus.size(), 3);
        assert!(close(plus.diag[0], 20.0 / 3.0, 1e-12));
        assert!(close(plus.diag[1], 10.0, 1e-12));
        assert!(close(plus.diag[2], 10.0, 1e-12));
        assert!(close(plus.off[0], -10.0 / 6.0f64.sqrt(), 1e-12));
        assert!(close(plus.off[1], -10.0 / 2.0f64.sqrt(), 1e-12));
        // mirror symmetry
        let minus = minus.unwrap();
        assert_eq!(minus.diag, plus.diag);
        assert_eq!(minus.off, plus.off);
    }

    #[test]
    fn one_by_one_corner_system() {
        let env = GrowthEnvelope::from_spec(&NuSpec::Constant(rat_one()), &rat(1, 3)).unwrap();
        assert_eq!(env.t, Some(1));
        let (plus, _) = build_a_matrices(&env).unwrap();
        let plus = plus.unwrap();
        assert_eq!(plus.size(), 1);
        // (nu(1)+nu(0))/mu(1) = 2/(1/3) = 6
        assert!(close(plus.diag[0], 6.0, 1e-12));
        assert!(matches!(
            tridiagonal_eigenvalues(&plus, 2),
            Err(Error::CountTooLarge(2, 1))
        ));
        // R for the 1x1 problem is zeta(1)/(2 mu(1))
        let r = hardy_rayleigh_r(&env).unwrap();
        assert!(close(r.value, 3.0, 1e-10));
    }

    #[test]
    fn hardy_b_examples() {
        let env = GrowthEnvelope::from_spec(&NuSpec::Constant(rat_one()), &rat(1, 5)).unwrap();
        assert_eq!(hardy_constant_b(&env).unwrap(), rat(3, 5));

        // T = 1: single term (1 - h(nu(0)+nu(1))) / (nu(1)+nu(0))
        let env = GrowthEnvelope::from_spec(&NuSpec::Constant(rat_one()), &rat(1, 3)).unwrap();
        assert_eq!(hardy_constant_b(&env).unwrap(), rat(1, 6));
    }

    #[test]
    fn hardy_b_large_t_trend() {
        // B/T^2 -> 1/27 for the constant envelope
        for t in [30i64, 60] {
            let h = rat_int(1) / rat_int(t + 2);
            let env = GrowthEnvelope::from_spec(&NuSpec::Constant(rat_one()), &h).unwrap();
            assert_eq!(env.t, Some(t));
            let b = hardy_constant_b(&env).unwrap();
            let ratio = to_f64(&b) / (t * t) as f64 * 27.0;
            assert!((ratio - 1.0).abs() < 0.15, "T={t}: 27B/T^2 = {ratio}");
        }
    }

    #[test]
    fn hardy_sandwich_and_monotone_minimizer() {
        let specs: Vec<(NuSpec, Rational)> = vec![
            (NuSpec::Constant(rat_one()), rat(1, 5)),
            (NuSpec::Exponential { c: rat_int(2) }, rat(1, 100)),
            (NuSpec::Polynomial { b: 2 }, rat(1, 300)),
        ];
        for (spec, h) in specs {
            let env = GrowthEnvelope::from_spec(&spec, &h).unwrap();
            let b = to_f64(&hardy_constant_b(&env).unwrap());
            let r = hardy_rayleigh_r(&env).unwrap();
            assert!(
                r.value >= 1.0 / (8.0 * b) - DOMINANCE_SLACK
                    && r.value <= 1.0 / (2.0 * b) + DOMINANCE_SLACK,
                "{spec:?}: R = {} outside [{}, {}]",
                r.value,
                1.0 / (8.0 * b),
                1.0 / (2.0 * b)
            );
            assert!(r.monotone, "{spec:?}");
        }
    }

    #[test]
    fn lambda2_bounds_on_c12() {
        let g = generate(&FamilySpec::Cycle(12)).unwrap();
        let sigma = BTreeSet::from([6u32, 11]);
        let profile = shell_profile(&g, &sigma, &SideChoice::ComponentOf(0)).unwrap();
        let empirical = GrowthEnvelope::empirical(&profile);
        let spectrum = laplacian_spectrum(&g).unwrap();

        // matrix route on the tight empirical envelope
        let bounds = bound_lambda2(&spectrum, &empirical);
        assert_eq!(bounds.matrix_dominates, Some(true));
        assert!(!bounds.one_sided);

        // Hardy route on the cut-ratio envelope
        let filled = empirical.mu_from_hout(&rat(1, 3)).unwrap();
        let bounds = bound_lambda2(&spectrum, &filled);
        assert_eq!(bounds.hardy_dominates, Some(true));
        assert!(close(bounds.hardy_bound.unwrap(), 3.0, 1e-9));
    }

    #[test]
    fn degenerate_decay_range_reports_unavailable() {
        let g = generate(&FamilySpec::Cycle(8)).unwrap();
        let sigma = BTreeSet::from([4u32, 7]);
        let profile = shell_profile(&g, &sigma, &SideChoice::ComponentOf(0)).unwrap();
        let empirical = GrowthEnvelope::empirical(&profile);
        // h_out(C_8) = 1/2 exhausts the decay range immediately
        assert!(matches!(
            empirical.mu_from_hout(&rat(1, 2)),
            Err(Error::NoPositiveRange) | Ok(_)
        ));
        let env = empirical.mu_from_hout(&rat(1, 2));
        if let Ok(env) = env {
            assert!(env.t_plus < 1 || hardy_constant_b(&env).is_err());
        }
    }

    #[test]
    fn higher_bounds_on_q6_slice() {
        let d = 6u32;
        let g = generate(&FamilySpec::Hypercube(d)).unwrap();
        let sigma: BTreeSet<u32> =
            (0..1u32 << d).filter(|v| v.count_ones() == 3).collect();
        let above: BTreeSet<u32> = (0..1u32 << d).filter(|v| v.count_ones() > 3).collect();
        let profile = shell_profile(&g, &sigma, &SideChoice::Set(above)).unwrap();
        let env = GrowthEnvelope::empirical(&profile);
        let spectrum = laplacian_spectrum(&g).unwrap();
        for k in 1..=3usize {
            for l in 1..=3usize {
                let bound = bound_higher(&env, k, l).unwrap();
                assert!(
                    bound >= spectrum.lambda(k + l) - DOMINANCE_SLACK,
                    "(k,l)=({k},{l}): {bound} vs {}",
                    spectrum.lambda(k + l)
                );
            }
        }
        assert!(matches!(
            bound_higher(&env, 4, 1),
            Err(Error::IndexOutOfRange(4, 1, 3, -3))
        ));

        // (1,1) agrees with the gap route up to its truncation optimization
        let gap = bound_lambda2(&spectrum, &env);
        let via_higher = bound_higher(&env, 1, 1).unwrap();
        assert!(via_higher <= gap.matrix_bound.unwrap() + DOMINANCE_SLACK);
        assert!(via_higher >= spectrum.lambda2() - DOMINANCE_SLACK);
    }

    #[test]
    fn full_report_on_a_certified_cycle_cut() {
        let g = generate(&FamilySpec::Cycle(12)).unwrap();
        let sigma = BTreeSet::from([6u32, 11]);
        let profile = shell_profile(&g, &sigma, &SideChoice::ComponentOf(0)).unwrap();
        let env = GrowthEnvelope::empirical(&profile)
            .mu_from_hout(&rat(1, 3))
            .unwrap();
        let spectrum = laplacian_spectrum(&g).unwrap();
        let report = assemble_report("cycle:12", &g, &profile, &env, spectrum, 3);
        assert!(report.all_satisfied, "{report:?}");
        assert_eq!(report.lambda2.hardy_dominates, Some(true));
        assert!(report.rho_bounds.contains_key(&(1, 1)));
        assert!(report.buser_level.is_none()); // alpha = 2/12 but shells tie
        assert_eq!(report.h_out, Some(rat(1, 3)));
    }

    #[test]
    fn buser_level_bound_c16() {
        let g = generate(&FamilySpec::Cycle(16)).unwrap();
        let sigma = BTreeSet::from([0u32, 8]);
        let profile = shell_profile(&g, &sigma, &SideChoice::ComponentOf(1)).unwrap();
        let b = buser_constant_route(&g, &profile).unwrap();
        assert_eq!(b.alpha, rat(1, 8));
        assert_eq!(b.t, 2);
        assert_eq!(b.bound, rat(3, 16));
        let lambda2 = laplacian_spectrum(&g).unwrap().lambda2();
        assert!(to_f64(&b.bound) >= lambda2);
    }

    #[test]
    fn buser_level_guards() {
        let g = generate(&FamilySpec::Cycle(6)).unwrap();
        let sigma = BTreeSet::from([0u32, 3]);
        let profile = shell_profile(&g, &sigma, &SideChoice::ComponentOf(1)).unwrap();
        // alpha = 2/6 >= 1/4
        assert!(matches!(
            buser_constant_route(&g, &profile),
            Err(Error::AlphaTooLarge(_))
        ));

        // a single-vertex cut of C_16 has shells of size 2 > |Sigma|
        let g = generate(&FamilySpec::Cycle(16)).unwrap();
        let sigma = BTreeSet::from([0u32]);
        let profile = shell_profile(&g, &sigma, &SideChoice::Auto).unwrap();
        assert!(matches!(
            buser_constant_route(&g, &profile),
            Err(Error::DominanceHypothesisFails(_, 2, 1))
        ));
    }

    #[test]
    fn higher_buser_scan() {
        let h = rat(1, 10);
        let r = higher_buser_bound(&h, 2, 8).unwrap();
        // the scan includes the closed-form optimizing truncation t+1 = ceil(2/(3h))
        assert_eq!(r.best_t, 6);
        assert!(close(r.bound, 0.6602075, 1e-6));
        assert!(r.reference > 0.0);

        // k = 1 shares the ceil(k/2) = 1 scan
        let r1 = higher_buser_bound(&h, 1, 8).unwrap();
        assert_eq!(r1.best_t, r.best_t);

        // no valid truncation
        assert!(matches!(
            higher_buser_bound(&rat(1, 2), 2, 0),
            Err(Error::EmptyRange)
        ));

        // C_40 realizes h_out(2) = 1/10; the scanned bound sits above its gap
        let g = generate(&FamilySpec::Cycle(40)).unwrap();
        let spectrum = laplacian_spectrum(&g).unwrap();
        assert!(r.bound >= spectrum.lambda2());
        assert!(r.bound >= spectrum.lambda(2));
    }
}
