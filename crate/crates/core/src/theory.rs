//! Closed-form asymptotics for the conditional and unconditional ERGM.
//!
//! Notation: `N = n(n-1)/2`; for a pattern `H_l` with weight `β_l`, `e_l`
//! edges, `v_l` vertices, `s_l` two-stars and `t_l` triangles. The centered
//! counts under `E = Np̃` are
//!
//! ```text
//! Ṽ = V - N(n-2)p̃²
//! Δ̃ = T - p̃V + p̃²(n-2)E - p̃³ n(n-1)(n-2)/6
//! ```
//!
//! The conditional formulas take the conditioned density `p̃ = k/N`; the
//! unconditional ones take the fixed point `p` of `φ`. Parameter names keep
//! the two apart.

use alloc::format;

use crate::model::{small_phi_prime, solve_fixed_point, ErgmParams, SubgraphSpec};
use crate::{math, Error, Result};

/// Residual tolerance used when a function here has to solve `φ(p) = p`.
pub const FIXED_POINT_TOL: f64 = 1e-13;

/// Conditional moments of the two-star and triangle counts given
/// `E = Np̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub p_tilde: f64,
    /// Mean of `V`.
    pub mu_v: f64,
    /// Variance of `V`.
    pub sigma2_v: f64,
    /// Mean of `Ṽ`.
    pub mu_vt: f64,
    /// Mean of `Δ̃`.
    pub mu_tt: f64,
    /// Variance of `Δ̃`.
    pub sigma2_tt: f64,
    /// `1 - 2q̃ Σ_{l≥2} β_l s_l p̃^{e_l-1}`.
    pub denom: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanVariance {
    pub mean: f64,
    pub variance: f64,
}

fn check_density(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {p} must lie in (0, 1)")))
    }
}

/// `Σ_{l≥2} β_l s_l p^{e_l - shift}`.
fn two_star_sum(params: &ErgmParams, p: f64, shift: i32) -> f64 {
    params
        .interaction_terms()
        .iter()
        .map(|t| t.beta * t.graph.two_stars() as f64 * math::powi(p, t.graph.edge_count() as i32 - shift))
        .sum()
}

/// `Σ_{l≥2} β_l t_l p^{e_l - shift}`.
fn triangle_sum(params: &ErgmParams, p: f64, shift: i32) -> f64 {
    params
        .interaction_terms()
        .iter()
        .map(|t| t.beta * t.graph.triangles() as f64 * math::powi(p, t.graph.edge_count() as i32 - shift))
        .sum()
}

/// `1 - 2(1-p) Σ_{l≥2} β_l s_l p^{e_l-1}`.
pub fn two_star_denominator(params: &ErgmParams, p: f64) -> f64 {
    1.0 - 2.0 * (1.0 - p) * two_star_sum(params, p, 1)
}

/// Conditional two-star moments given `E = Np̃`:
///
/// ```text
/// μ_Ṽ  = 2N q̃² Σ β_l s_l p̃^{e_l} / denom
/// μ_V  = N(n-2)p̃² + μ_Ṽ
/// σ²_V = N n p̃² q̃² / denom²
/// ```
///
/// The triangle fields are filled from [`triangle_moments`].
pub fn two_star_moments(params: &ErgmParams, p_tilde: f64) -> Result<MomentSet> {
    check_density("p_tilde", p_tilde)?;
    let n = params.n() as f64;
    let pairs = params.pair_count() as f64;
    let q = 1.0 - p_tilde;
    let denom = two_star_denominator(params, p_tilde);
    if !(denom > 0.0) {
        return Err(Error::DegenerateParameters(format!(
            "two-star denominator {denom} is not positive at p_tilde = {p_tilde}"
        )));
    }
    let mu_vt = 2.0 * pairs * q * q * two_star_sum(params, p_tilde, 0) / denom;
    let tri = triangle_moments(params, p_tilde)?;
    Ok(MomentSet {
        p_tilde,
        mu_v: pairs * (n - 2.0) * p_tilde * p_tilde + mu_vt,
        sigma2_v: pairs * n * p_tilde * p_tilde * q * q / (denom * denom),
        mu_vt,
        mu_tt: tri.mean,
        sigma2_tt: tri.variance,
        denom,
    })
}

/// Conditional moments of `Δ̃`: mean `2N q̃³ Σ β_l t_l p̃^{e_l}` and variance
/// `N n p̃³ q̃³ / 3`, which does not depend on `β`.
pub fn triangle_moments(params: &ErgmParams, p_tilde: f64) -> Result<MeanVariance> {
    check_density("p_tilde", p_tilde)?;
    let n = params.n() as f64;
    let pairs = params.pair_count() as f64;
    let q = 1.0 - p_tilde;
    let q3 = q * q * q;
    Ok(MeanVariance {
        mean: 2.0 * pairs * q3 * triangle_sum(params, p_tilde, 0),
        variance: pairs * n * p_tilde * p_tilde * p_tilde * q3 / 3.0,
    })
}

/// `(n)_k = n(n-1)...(n-k+1)`.
pub fn falling_factorial(n: f64, k: usize) -> f64 {
    (0..k).map(|i| n - i as f64).product()
}

/// Conjectured conditional mean and variance of the number of copies of `h`
/// given `E = Np̃`, with `s`, `t`, `v`, `e` and `Aut` taken from `h`:
///
/// ```text
/// μ_F  = (n)_v / Aut · p̃^e + (n-3)_{v-3} / Aut · (2s p̃^{e-2} μ_Ṽ + 6t p̃^{e-3} μ_Δ̃)
/// σ²_F = ((n-3)_{v-3} / Aut)² · (4s² p̃^{2e-4} σ²_V + 36t² p̃^{2e-6} σ²_Δ̃)
/// ```
///
/// For a single edge the count is fixed by the conditioning, so the
/// correction is dropped and the variance is 0. This is a conjecture;
/// reports built from it must say so.
pub fn general_subgraph_moments(h: &SubgraphSpec, params: &ErgmParams, p_tilde: f64) -> Result<MeanVariance> {
    let m = two_star_moments(params, p_tilde)?;
    let n = params.n() as f64;
    let v = h.vertex_count();
    let e = h.edge_count() as i32;
    let aut = h.automorphisms() as f64;
    let leading = falling_factorial(n, v) / aut * math::powi(p_tilde, e);
    if v < 3 {
        return Ok(MeanVariance { mean: leading, variance: 0.0 });
    }
    let s = h.two_stars() as f64;
    let t = h.triangles() as f64;
    let scale = falling_factorial(n - 3.0, v - 3) / aut;
    let mut shift = 2.0 * s * math::powi(p_tilde, e - 2) * m.mu_vt;
    let mut spread = 4.0 * s * s * math::powi(p_tilde, 2 * e - 4) * m.sigma2_v;
    if t > 0.0 {
        shift += 6.0 * t * math::powi(p_tilde, e - 3) * m.mu_tt;
        spread += 36.0 * t * t * math::powi(p_tilde, 2 * e - 6) * m.sigma2_tt;
    }
    Ok(MeanVariance {
        mean: leading + scale * shift,
        variance: scale * scale * spread,
    })
}

/// The fixed point `p`, or an error when the parameters are not
/// subcritical.
pub fn fixed_point(params: &ErgmParams) -> Result<f64> {
    let report = solve_fixed_point(params, FIXED_POINT_TOL)?;
    report.p.ok_or_else(|| {
        Error::NotSubcritical(format!(
            "classification {} ({} roots, max phi' = {})",
            report.classification, report.root_count_on_grid, report.phi_prime_at_p
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeClt {
    pub p: f64,
    pub phi_prime: f64,
    /// `σ_n² = N p (1-p) / (1 - φ'(p))`.
    pub sigma2: f64,
}

/// Mean density and variance of the edge count in the unconditional model.
pub fn edge_clt_parameters(params: &ErgmParams) -> Result<EdgeClt> {
    let p = fixed_point(params)?;
    edge_clt_at(params, p)
}

/// `σ_n² = N p(1-p) / (1 - Σ β_l e_l (e_l - 1) 2p^{e_l-1}(1-p))` at a given
/// fixed point. The sum equals `φ'(p)`.
pub fn edge_clt_at(params: &ErgmParams, p: f64) -> Result<EdgeClt> {
    check_density("p", p)?;
    let q = 1.0 - p;
    let sum: f64 = params
        .terms()
        .iter()
        .map(|t| {
            let e = t.graph.edge_count() as i32;
            t.beta * (e * (e - 1)) as f64 * 2.0 * math::powi(p, e - 1) * q
        })
        .sum();
    let denom = 1.0 - sum;
    if !(denom > 0.0) {
        return Err(Error::DegenerateParameters(format!("edge variance denominator {denom} is not positive")));
    }
    Ok(EdgeClt {
        p,
        phi_prime: sum,
        sigma2: params.pair_count() as f64 * p * q / denom,
    })
}

/// The `1/n` coefficient in `p̃ = p + c*/n + O(n^{-3/2})`, with its parts.
///
/// With `S_s = Σ_{l≥2} β_l s_l p^{e_l}`, `S_t = Σ β_l t_l p^{e_l}`,
/// `D = 1 - 2q Σ_{l≥2} β_l s_l p^{e_l-1}` and `H∖k` the pattern with edge `k`
/// deleted:
///
/// ```text
/// c* = pq / (1 - φ'(p)) · (pinned + curvature - scaling)
/// pinned    = Σ_l β_l Σ_k [4 s(H_l∖k) p^{e_l-3} q² S_s / D + 12 t(H_l∖k) p^{e_l-4} q³ S_t]
/// curvature = (1-2p)/2 · [8 (Σ_{l≥2} β_l s_l p^{e_l-2})² pq / D + 36 (Σ β_l t_l p^{e_l-2})² q²]
/// scaling   = Σ_{l≥2} β_l e_l p^{e_l-1} (v_l - 2)(v_l + 1)
/// ```
///
/// `pinned` collects the conditional two-star and triangle corrections seen
/// by an edge, `curvature` the second-order term of the logistic response to
/// fluctuations of `∂_eH`, and `scaling` the finite-`n` loss
/// `(n-2)_{v-2} / n^{v-2} ≈ 1 - (v-2)(v+1)/(2n)` in the pinned homomorphism
/// counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CStar {
    pub value: f64,
    pub prefactor: f64,
    pub pinned: f64,
    pub curvature: f64,
    pub scaling: f64,
}

pub fn c_star(params: &ErgmParams, p: f64) -> Result<CStar> {
    check_density("p", p)?;
    let q = 1.0 - p;
    let phi_prime = small_phi_prime(params, p);
    if !(phi_prime < 1.0) {
        return Err(Error::DegenerateParameters(format!("phi'(p) = {phi_prime} is not below 1")));
    }
    let d = two_star_denominator(params, p);
    if !(d > 0.0) {
        return Err(Error::DegenerateParameters(format!("two-star denominator {d} is not positive")));
    }
    let s_s = two_star_sum(params, p, 0);
    let s_t = triangle_sum(params, p, 0);

    let mut pinned = 0.0;
    for term in params.terms() {
        let e = term.graph.edge_count();
        let mut inner = 0.0;
        for k in 0..e {
            let (s, t) = term.graph.counts_without_edge(k);
            if s > 0 {
                inner += 4.0 * s as f64 * math::powi(p, e as i32 - 3) * q * q * s_s / d;
            }
            if t > 0 {
                inner += 12.0 * t as f64 * math::powi(p, e as i32 - 4) * q * q * q * s_t;
            }
        }
        pinned += term.beta * inner;
    }

    let a = two_star_sum(params, p, 2);
    let b = triangle_sum(params, p, 2);
    let curvature = 0.5 * (1.0 - 2.0 * p) * (8.0 * a * a * p * q / d + 36.0 * b * b * q * q);

    let scaling: f64 = params
        .interaction_terms()
        .iter()
        .map(|t| {
            let e = t.graph.edge_count() as i32;
            let v = t.graph.vertex_count() as f64;
            t.beta * e as f64 * math::powi(p, e - 1) * (v - 2.0) * (v + 1.0)
        })
        .sum();

    let prefactor = p * q / (1.0 - phi_prime);
    Ok(CStar {
        value: prefactor * (pinned + curvature - scaling),
        prefactor,
        pinned,
        curvature,
        scaling,
    })
}

/// `P(k - ½ < Z ≤ k + ½)` for `Z ~ N(μ, σ²)`, computed from `erfc` on
/// whichever tail keeps both terms small so that far-tail probabilities
/// keep their relative accuracy.
pub fn discretized_normal_pmf(mu: f64, sigma2: f64, k: i64) -> f64 {
    let sd = math::sqrt(sigma2);
    let lo = (k as f64 - 0.5 - mu) / sd;
    let hi = (k as f64 + 0.5 - mu) / sd;
    if lo > 0.0 {
        math::normal_sf(lo) - math::normal_sf(hi)
    } else {
        math::normal_cdf(hi) - math::normal_cdf(lo)
    }
}
