//! Highest-weight combinatorics for `G = SO^0(2n+1,1)` / `Spin(2n+1,1)`
//! and its subgroups `K`, `M`: dominance validation, the Weyl-element
//! action, Casimir eigenvalues, and the exact spectral-gap checks behind
//! strong acyclicity. Everything here is exact rational arithmetic.

use num::rational::Ratio;
use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rat = Ratio<i64>;

fn rat(n: i64) -> Rat {
    Ratio::from_integer(n)
}

fn half(n: i64) -> Rat {
    Ratio::new(n, 2)
}

/// Rank data for `d = 2n + 1`. `spin` admits half-integral weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankContext {
    pub n: u32,
    pub spin: bool,
}

impl RankContext {
    pub fn new(d: u32, spin: bool) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(Error::domain(format!("d = {d} must be odd and >= 3")));
        }
        Ok(RankContext { n: (d - 1) / 2, spin })
    }

    pub fn d(&self) -> u32 {
        2 * self.n + 1
    }

    /// `rho_j = n + 1 - j` for `j = 1..=n+1`.
    pub fn rho(&self, j: u32) -> Rat {
        rat(self.n as i64 + 1 - j as i64)
    }
}

fn is_integral(x: Rat) -> bool {
    x.denom().is_one()
}

fn is_half_integral(x: Rat) -> bool {
    *x.denom() == 2
}

fn check_class(coords: &[Rat], spin: bool) -> Result<()> {
    let all_int = coords.iter().all(|&c| is_integral(c));
    let all_half = coords.iter().all(|&c| is_half_integral(c));
    if !all_int && !all_half {
        return Err(Error::domain(
            "coordinates must be all integers or all half-integers",
        ));
    }
    if all_half && !spin {
        return Err(Error::domain(
            "half-integral weights require the spin group",
        ));
    }
    Ok(())
}

/// Dominant highest weight of `G`: `k_1 >= ... >= k_n >= |k_{n+1}|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightG {
    k: Vec<Rat>,
}

impl WeightG {
    pub fn new(ctx: &RankContext, k: Vec<Rat>) -> Result<Self> {
        if k.len() != ctx.n as usize + 1 {
            return Err(Error::domain(format!(
                "weight needs {} coordinates",
                ctx.n + 1
            )));
        }
        check_class(&k, ctx.spin)?;
        for i in 0..k.len() - 1 {
            let lower = if i + 2 == k.len() { k[i + 1].abs() } else { k[i + 1] };
            if k[i] < lower {
                return Err(Error::domain("violates dominance"));
            }
        }
        Ok(WeightG { k })
    }

    pub fn from_ints(ctx: &RankContext, k: &[i64]) -> Result<Self> {
        WeightG::new(ctx, k.iter().map(|&v| rat(v)).collect())
    }

    /// coordinate `k_j`, `j = 1..=n+1`
    pub fn k(&self, j: u32) -> Rat {
        self.k[(j - 1) as usize]
    }

    pub fn coords(&self) -> &[Rat] {
        &self.k
    }
}

/// Dominant highest weight of `M`: coordinates `k_2, ..., k_{n+1}` with
/// `k_2 >= ... >= k_n >= |k_{n+1}|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightM {
    k: Vec<Rat>,
}

impl WeightM {
    pub fn new(ctx: &RankContext, k: Vec<Rat>) -> Result<Self> {
        if k.len() != ctx.n as usize {
            return Err(Error::domain(format!("weight needs {} coordinates", ctx.n)));
        }
        check_class(&k, ctx.spin)?;
        for i in 0..k.len().saturating_sub(1) {
            let lower = if i + 2 == k.len() { k[i + 1].abs() } else { k[i + 1] };
            if k[i] < lower {
                return Err(Error::domain("violates dominance"));
            }
        }
        Ok(WeightM { k })
    }

    pub fn from_ints(ctx: &RankContext, k: &[i64]) -> Result<Self> {
        WeightM::new(ctx, k.iter().map(|&v| rat(v)).collect())
    }

    pub fn zero(ctx: &RankContext) -> Self {
        WeightM {
            k: vec![Rat::zero(); ctx.n as usize],
        }
    }

    /// coordinate `k_j`, `j = 2..=n+1`
    pub fn k(&self, j: u32) -> Rat {
        self.k[(j - 2) as usize]
    }

    pub fn coords(&self) -> &[Rat] {
        &self.k
    }
}

/// The restricted Weyl action: negate the last coordinate.
pub fn w0_action(ctx: &RankContext, sigma: &WeightM) -> WeightM {
    let mut k = sigma.k.clone();
    let last = k.len() - 1;
    k[last] = -k[last];
    let _ = ctx;
    WeightM { k }
}

/// `c(sigma) = sum_{j=2}^{n+1} (k_j + rho_j)^2 - sum_{j=1}^{n+1} rho_j^2`.
pub fn c_sigma(ctx: &RankContext, sigma: &WeightM) -> Rat {
    let mut s = Rat::zero();
    for j in 2..=ctx.n + 1 {
        let t = sigma.k(j) + ctx.rho(j);
        s += t * t;
    }
    for j in 1..=ctx.n + 1 {
        let r = ctx.rho(j);
        s -= r * r;
    }
    s
}

/// Casimir eigenvalue
/// `tau(Omega) = sum_{j=1}^{n+1} (tau_j + rho_j)^2 - sum_j rho_j^2`.
pub fn tau_casimir(ctx: &RankContext, tau: &WeightG) -> Rat {
    let mut s = Rat::zero();
    for j in 1..=ctx.n + 1 {
        let t = tau.k(j) + ctx.rho(j);
        let r = ctx.rho(j);
        s += t * t - r * r;
    }
    s
}

/// Residual of the telescoping Casimir identity used in the gap proof:
/// `sum_{j=2}^{l} (tau_{j-1} + rho_{j-1})^2 - sum_{j=1}^{n+1} rho_j^2`
/// must equal `tau(Omega) - sum_{j=l}^{n+1} (tau_j + rho_j)^2` for every
/// `l`. Returns the exact difference (zero identically).
pub fn eqc2_residual(ctx: &RankContext, tau: &WeightG, l: u32) -> Rat {
    let mut lhs = Rat::zero();
    for j in 2..=l {
        let t = tau.k(j - 1) + ctx.rho(j - 1);
        lhs += t * t;
    }
    for j in 1..=ctx.n + 1 {
        let r = ctx.rho(j);
        lhs -= r * r;
    }
    let mut rhs = tau_casimir(ctx, tau);
    for j in l..=ctx.n + 1 {
        let t = tau.k(j) + ctx.rho(j);
        rhs -= t * t;
    }
    lhs - rhs
}

/// Whether `tau` differs from its Cartan twist: true iff the last
/// coordinate is nonzero (the twist negates it).
pub fn theta_nontrivial(tau: &WeightG) -> bool {
    !tau.k[tau.k.len() - 1].is_zero()
}

/// Weights of `G = SL_2(C)` in the `e`-basis for the representation
/// `Sym^m(rho) (x) Sym^n(conj rho)`: `k_1 = (m+n)/2`, `k_2 = (m-n)/2`.
pub fn sym_power_weight(m: u32, n: u32) -> (RankContext, WeightG) {
    let spin = (m + n) % 2 == 1;
    let ctx = RankContext { n: 1, spin };
    let k1 = half(m as i64 + n as i64);
    let k2 = half(m as i64 - n as i64);
    (
        ctx,
        WeightG::new(&ctx, vec![k1, k2]).expect("symmetric power weights are dominant"),
    )
}

/// All dominant `sigma` in the same integrality class as `tau` with
/// `|k_j(sigma)| <= k_{j-1}(tau) + 1` for `j = 2..=n+1`; a finite superset
/// of everything appearing in the form Laplacians twisted by `tau`.
pub fn interlacing_superset(ctx: &RankContext, tau: &WeightG) -> Vec<WeightM> {
    // tau's coordinates and the bounds tau_{j-1} + 1 lie in one class, so
    // the admissible values step down from the bound by integers
    let mut out = Vec::new();
    let mut current: Vec<Rat> = Vec::with_capacity(ctx.n as usize);
    fn rec(ctx: &RankContext, tau: &WeightG, current: &mut Vec<Rat>, out: &mut Vec<WeightM>) {
        let j = current.len() as u32 + 2; // coordinate being chosen
        if j > ctx.n + 1 {
            out.push(WeightM { k: current.clone() });
            return;
        }
        let bound = tau.k(j - 1) + rat(1);
        let mut v = bound;
        if let Some(&prev) = current.last() {
            if v > prev {
                // step down within the class to the dominance ceiling
                while v > prev {
                    v -= rat(1);
                }
            }
        }
        let last = j == ctx.n + 1;
        while v >= -bound {
            let dominance_ok = if last {
                match current.last() {
                    Some(&prev) => prev >= v.abs(),
                    None => true,
                }
            } else {
                !v.is_negative()
            };
            if dominance_ok {
                current.push(v);
                rec(ctx, tau, current, out);
                current.pop();
            }
            v -= rat(1);
        }
    }
    rec(ctx, tau, &mut current, &mut out);
    out
}

/// Result of the quarter gap check.
#[derive(Debug, Clone)]
pub struct GapCheck {
    pub min_gap: Rat,
    pub attained: WeightM,
    pub ok: bool,
}

/// Minimum of `tau(Omega) - c(sigma)` over the interlacing superset, in
/// exact rationals; `ok` iff the minimum is at least `1/4`.
/// Requires `tau` not fixed by the Cartan twist.
pub fn gap_check(ctx: &RankContext, tau: &WeightG) -> Result<GapCheck> {
    if !theta_nontrivial(tau) {
        return Err(Error::domain("tau is fixed by the Cartan involution"));
    }
    let t_cas = tau_casimir(ctx, tau);
    let mut best: Option<(Rat, WeightM)> = None;
    for sigma in interlacing_superset(ctx, tau) {
        let gap = t_cas - c_sigma(ctx, &sigma);
        match &best {
            None => best = Some((gap, sigma)),
            Some((g, _)) if gap < *g => best = Some((gap, sigma)),
            _ => {}
        }
    }
    let (min_gap, attained) = best.expect("superset contains sigma = 0");
    Ok(GapCheck {
        min_gap,
        attained,
        ok: min_gap >= Ratio::new(1, 4),
    })
}

/// One line of the complementary-series audit.
#[derive(Debug, Clone)]
pub struct ComplementaryEntry {
    pub sigma: WeightM,
    pub l: u32,
    /// `tau(Omega) - c(sigma) - rho_l^2`
    pub margin: Rat,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct ComplementaryCheck {
    pub entries: Vec<ComplementaryEntry>,
    pub ok: bool,
}

/// For every Weyl-fixed `sigma` in the superset, with `l` minimal such
/// that `k_{l+1}(sigma) = 0`, verify
/// `tau(Omega) - c(sigma) - rho_l^2 >= k_{n+1}(tau)^2 >= 1` exactly.
/// Requires `tau` twist-nontrivial with integral coordinates.
pub fn complementary_gap_check(ctx: &RankContext, tau: &WeightG) -> Result<ComplementaryCheck> {
    if !theta_nontrivial(tau) {
        return Err(Error::domain("tau is fixed by the Cartan involution"));
    }
    if !tau.k.iter().all(|&c| is_integral(c)) {
        return Err(Error::domain(
            "complementary check applies to integral weights",
        ));
    }
    let t_cas = tau_casimir(ctx, tau);
    let t_last_sq = {
        let t = tau.k(ctx.n + 1);
        t * t
    };
    let mut entries = Vec::new();
    for sigma in interlacing_superset(ctx, tau) {
        if sigma != w0_action(ctx, &sigma) {
            continue;
        }
        // minimal l in 1..=n with k_{l+1}(sigma) = 0
        let mut l = ctx.n;
        for j in 2..=ctx.n + 1 {
            if sigma.k(j).is_zero() {
                l = j - 1;
                break;
            }
        }
        let rho_l = ctx.rho(l);
        let margin = t_cas - c_sigma(ctx, &sigma) - rho_l * rho_l;
        let ok = margin >= t_last_sq && t_last_sq >= Rat::one();
        entries.push(ComplementaryEntry {
            sigma,
            l,
            margin,
            ok,
        });
    }
    let ok = entries.iter().all(|e| e.ok);
    Ok(ComplementaryCheck { entries, ok })
}

/// Weyl dimension formula for `M` (root system `D_n` on coordinates
/// `2..=n+1`). Always `1` for `n = 1`.
pub fn weyl_dim_m(ctx: &RankContext, sigma: &WeightM) -> u64 {
    if ctx.n <= 1 {
        return 1;
    }
    let mut num = Ratio::<i128>::one();
    for i in 2..=ctx.n + 1 {
        for j in (i + 1)..=ctx.n + 1 {
            let ai = widen(sigma.k(i) + ctx.rho(i));
            let aj = widen(sigma.k(j) + ctx.rho(j));
            let ri = widen(ctx.rho(i));
            let rj = widen(ctx.rho(j));
            num *= (ai * ai - aj * aj) / (ri * ri - rj * rj);
        }
    }
    debug_assert!(num.denom().is_one() && !num.is_negative());
    *num.numer() as u64
}

fn widen(x: Rat) -> Ratio<i128> {
    Ratio::new(*x.numer() as i128, *x.denom() as i128)
}

/// Render an exact rational as a string (`"1"`, `"1/4"`, ...).
pub fn rat_to_string(x: Rat) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
