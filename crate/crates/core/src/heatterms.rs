//! Deterministic analytic ingredients of the parabolic heat-trace term:
//! the Gaussian resolvent identity, the alpha-weighted heat sum, the
//! hyperbolic divisor-sum bounds, and the per-subgroup sequence reports
//! that assemble the condition ratios into convergence tables.

use num::Signed;
use serde::Serialize;

use crate::congruence::{sequence_point, SequencePoint, SubgroupKind, SubgroupSpec};
use crate::error::{Error, Result};
use crate::lattice_zeta::{alpha_for, EpsteinConfig};
use crate::numeric::adaptive_simpson;
use crate::quadfield::{divisors, factor, FieldDescriptor, Ideal, QuadInt};
use crate::weights::{c_sigma, tau_casimir, weyl_dim_m, RankContext, WeightG, WeightM};

/// Both sides of the identity
/// `int_R sigma/(sigma^2 + x^2) e^{-t x^2} dx
///  = sqrt(4 pi t) e^{t sigma^2} int_sigma^inf e^{-t u^2} du`,
/// each by its own adaptive quadrature, and their difference.
#[derive(Debug, Clone, Serialize)]
pub struct LemintCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tol: f64,
}

pub fn lemint_residual(sigma: f64, t: f64, tol: f64) -> Result<LemintCheck> {
    if sigma <= 0.0 || t <= 0.0 {
        return Err(Error::domain("sigma and t must be positive"));
    }
    let budget = 4_000_000usize;
    // left side: symmetric, integrate on [0, L] and double
    let l_cut = (60.0f64 / t).sqrt().max(8.0 * sigma);
    let (half, _) = adaptive_simpson(
        |x| sigma / (sigma * sigma + x * x) * (-t * x * x).exp(),
        0.0,
        l_cut,
        tol * 1e-3,
        budget,
    )?;
    let lhs = 2.0 * half;
    // right side without overflow: sqrt(4 pi t) int_sigma^U e^{-t(u^2 - sigma^2)} du
    let u_cut = (sigma * sigma + 60.0 / t).sqrt();
    let (tail_int, _) = adaptive_simpson(
        |u| (-t * (u * u - sigma * sigma)).exp(),
        sigma,
        u_cut,
        tol * 1e-3,
        budget,
    )?;
    let rhs = (4.0 * std::f64::consts::PI * t).sqrt() * tail_int;
    Ok(LemintCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        tol,
    })
}

/// Input of the parabolic heat term: the alpha constant, the relevant
/// `M`-types with their multiplicities, the twisting weight and the time.
#[derive(Debug, Clone)]
pub struct HeatTermInput {
    pub alpha: f64,
    pub sigma_list: Vec<(WeightM, u32)>,
    pub tau: WeightG,
    pub t: f64,
}

/// `alpha * sum_sigma mult * dim(sigma) * e^{-t (tau(Omega) - c(sigma))}
///  / sqrt(4 pi t)`.
pub fn s_term(input: &HeatTermInput, ctx: &RankContext) -> Result<f64> {
    if input.t <= 0.0 {
        return Err(Error::domain("t must be positive"));
    }
    let t_cas = tau_casimir(ctx, &input.tau);
    let mut sum = 0.0f64;
    for (sigma, mult) in &input.sigma_list {
        let gap = t_cas - c_sigma(ctx, sigma);
        let gap_f = *gap.numer() as f64 / *gap.denom() as f64;
        let dim = weyl_dim_m(ctx, sigma) as f64;
        sum += *mult as f64 * dim * (-input.t * gap_f).exp();
    }
    Ok(input.alpha * sum / (4.0 * std::f64::consts::PI * input.t).sqrt())
}

/// Multiplicities `[nu_p(tau) : sigma]` for the three-dimensional case,
/// assembled from the standard Clebsch-Gordan decompositions. Shipped as
/// preset data for report assembly; degrees are `p = 0..=3`.
pub fn d3_multiplicity_preset(tau: &WeightG) -> Result<Vec<(u32, WeightM, u32)>> {
    let k1 = tau.k(1);
    let k2 = tau.k(2);
    // tau restricted to K = SU(2): spins |k2|, |k2|+1, ..., k1
    let mut tau_spins: Vec<num::rational::Ratio<i64>> = Vec::new();
    let mut j = k2.abs();
    while j <= k1 {
        tau_spins.push(j);
        j += num::rational::Ratio::from_integer(1);
    }
    // Lambda^p of the 3-dimensional coadjoint space: spins per degree
    let p_spins: [&[i64]; 4] = [&[0], &[1], &[1], &[0]];
    let mut out: Vec<(u32, WeightM, u32)> = Vec::new();
    let ctx = RankContext { n: 1, spin: true };
    for (p, spins) in p_spins.iter().enumerate() {
        // counts of each total spin in Lambda^p (x) tau|_K
        let mut totals: Vec<num::rational::Ratio<i64>> = Vec::new();
        for &lp in spins.iter() {
            let lp = num::rational::Ratio::from_integer(lp);
            for &jt in &tau_spins {
                // Clebsch-Gordan: |lp - jt| ..= lp + jt
                let mut jj = (lp - jt).abs();
                while jj <= lp + jt {
                    totals.push(jj);
                    jj += num::rational::Ratio::from_integer(1);
                }
            }
        }
        // weight multiplicities: spin j contributes each character
        // s = -j, -j+1, ..., j once
        let mut chars: Vec<(num::rational::Ratio<i64>, u32)> = Vec::new();
        for &jj in &totals {
            let mut s = -jj;
            while s <= jj {
                match chars.iter_mut().find(|(c, _)| *c == s) {
                    Some((_, m)) => *m += 1,
                    None => chars.push((s, 1)),
                }
                s += num::rational::Ratio::from_integer(1);
            }
        }
        chars.sort_by(|a, b| a.0.cmp(&b.0));
        for (s, m) in chars {
            let sigma = WeightM::new(&ctx, vec![s])?;
            out.push((p as u32, sigma, m));
        }
    }
    Ok(out)
}

/// Inputs of the constant-dependent hyperbolic bound: the level, the heat
/// time, and the two free constants of the final exponential estimate.
#[derive(Debug, Clone)]
pub struct HypBoundInput {
    pub level: Ideal,
    pub t: f64,
    pub c_exponent: f64,
    pub c_prefactor: f64,
}

/// `C N(a)^{3/4} e^{-c/t}`: the constant-dependent form of the hyperbolic
/// estimate, with the free constants supplied by the report.
pub fn esthyp_bound(input: &HypBoundInput) -> Result<f64> {
    if input.t <= 0.0 || input.c_exponent <= 0.0 || input.c_prefactor <= 0.0 {
        return Err(Error::domain("t and both constants must be positive"));
    }
    let na = input.level.norm() as f64;
    Ok(input.c_prefactor * na.powf(0.75) * (-input.c_exponent / input.t).exp())
}

/// The three expressions of the hyperbolic divisor-sum estimate.
#[derive(Debug, Clone, Serialize)]
pub struct HypBound {
    /// `2^{nu(a)} sqrt(N(a)) sum_{b|a} N(b)^{-3/2}`
    pub exact_sum: f64,
    /// `4^{nu(a)} sqrt(N(a))`
    pub four_nu_bound: f64,
    /// `N(a)^{3/4}`
    pub esthyp_form: f64,
    pub ok: bool,
}

pub fn hyp_bound_expression(a: &Ideal) -> Result<HypBound> {
    let nu = factor(a)?.nu();
    let na = a.norm() as f64;
    let mut divisor_sum = 0.0f64;
    for b in divisors(a)? {
        divisor_sum += (b.norm() as f64).powf(-1.5);
    }
    let exact_sum = 2.0f64.powi(nu as i32) * na.sqrt() * divisor_sum;
    let four_nu_bound = 4.0f64.powi(nu as i32) * na.sqrt();
    Ok(HypBound {
        exact_sum,
        four_nu_bound,
        esthyp_form: na.powf(0.75),
        ok: exact_sum <= four_nu_bound,
    })
}

/// One assembled row of a sequence report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub point: SequencePoint,
    /// `exact_sum / index`
    pub hyp_ratio: Option<f64>,
    /// `kappa / index <= 2 d_F / sqrt(N(a))`, the row-wise cusp bound
    pub kappa_bound_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowError {
    pub level_norm: i128,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SequenceOptions {
    pub with_alpha: bool,
    pub metric_scale: f64,
    pub epstein: EpsteinConfig,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            with_alpha: true,
            metric_scale: 1.0,
            epstein: EpsteinConfig::default(),
        }
    }
}

/// Evaluate every subgroup of the family, one row each, sorted by index;
/// failures are reported per row without aborting the table.
pub fn sequence_report(
    family: &[SubgroupSpec],
    options: &SequenceOptions,
) -> Vec<std::result::Result<ReportRow, RowError>> {
    let mut rows: Vec<std::result::Result<ReportRow, RowError>> = family
        .iter()
        .map(|spec| build_row(spec, options))
        .collect();
    rows.sort_by_key(|r| match r {
        Ok(row) => (
            row.point.index.unwrap_or_else(|| {
                row.point.index_interval.map(|(lo, _)| lo).unwrap_or(0)
            }),
            row.point.level_norm,
        ),
        Err(e) => (i128::MAX, e.level_norm),
    });
    rows
}

fn build_row(
    spec: &SubgroupSpec,
    options: &SequenceOptions,
) -> std::result::Result<ReportRow, RowError> {
    let fail = |e: Error| RowError {
        level_norm: spec.level.norm(),
        message: e.to_string(),
    };
    let alpha = if options.with_alpha && spec.kind != SubgroupKind::HeckeIntersected {
        Some(
            alpha_for(spec, options.metric_scale, &options.epstein)
                .map_err(fail)?
                .alpha,
        )
    } else {
        None
    };
    let point = sequence_point(spec, alpha).map_err(fail)?;
    let hyp = hyp_bound_expression(&spec.level).map_err(fail)?;
    let hyp_ratio = point.index.map(|idx| hyp.exact_sum / idx as f64);
    let kappa_bound_ok = point.index.map(|idx| {
        let d_f = spec.field().class_number() as f64;
        point.kappa as f64 / idx as f64 <= 2.0 * d_f / (spec.level.norm() as f64).sqrt() + 1e-12
    });
    Ok(ReportRow {
        point,
        hyp_ratio,
        kappa_bound_ok,
    })
}

/// The principal family `Gamma((q))` for `q = 2..=qmax`.
pub fn principal_family(field: &FieldDescriptor, qmax: u32) -> Result<Vec<SubgroupSpec>> {
    (2..=qmax)
        .map(|q| {
            Ok(SubgroupSpec::principal(Ideal::principal(
                field,
                QuadInt::new(q as i128, 0),
            )?))
        })
        .collect()
}

/// The Hecke family `Gamma_0(p^k)` for `k = 1..=kmax`.
pub fn hecke_power_family(prime: &Ideal, kmax: u32) -> Result<Vec<SubgroupSpec>> {
    let mut out = Vec::new();
    let mut level = prime.clone();
    for _ in 1..=kmax {
        out.push(SubgroupSpec::hecke(level.clone()));
        level = level.mul(prime);
    }
    Ok(out)
}
