//! Full-rank lattices in `R^{2n}`: volumes, shortest vectors, ball counts
//! with the explicit counting bound, the analytically continued Epstein
//! zeta function with its residue and constant term, the scaling law,
//! cusp cross-section lattices of congruence and Hecke subgroups, the
//! alpha constant, and cusp-uniformity audits.
//!
//! The continuation is the classical incomplete-theta representation: with
//! `w = n(1+s)`, `V = vol(Lambda)` and `Theta(t) = sum_{x != 0} e^{-pi t |x|^2}`,
//!
//! `pi^{-w} Gamma(w) zeta(s) = -1/w + 1/(V n s)
//!     + int_1^inf ( t^{w-1} Theta(t) + V^{-1} t^{n-w-1} Theta*(t) ) dt`,
//!
//! where `Theta*` is the theta series of the dual lattice. The simple pole
//! at `s = 0` has residue `vol(S^{2n-1})/(2n V)` and the Laurent constant
//! term is extracted symbolically from this formula, never by numerical
//! differentiation.

use std::collections::HashMap;

use num::complex::Complex64;
use serde::Serialize;

use crate::congruence::{cusp_profile, SequencePoint, SubgroupKind, SubgroupSpec};
use crate::error::{Error, Result};
use crate::numeric::{
    adaptive_simpson, adaptive_simpson_complex, digamma_int, factorial, gamma_complex,
    sphere_volume,
};
use crate::quadfield::{FracIdeal, Ideal, QuadInt};

/// A full-rank lattice in `R^{2n}`, rows of `basis` being the generators.
#[derive(Debug, Clone)]
pub struct Lattice {
    basis: Vec<Vec<f64>>,
}

impl Lattice {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let m = basis.len();
        if m == 0 || m % 2 != 0 || m > 6 {
            return Err(Error::domain(
                "rank must be one of 2, 4, 6 (even, full, desk scale)",
            ));
        }
        if basis.iter().any(|r| r.len() != m) {
            return Err(Error::domain("basis must be square"));
        }
        let lat = Lattice { basis };
        if lat.volume() < 1e-12 {
            return Err(Error::domain("basis is singular"));
        }
        Ok(lat)
    }

    pub fn standard(dim: usize) -> Self {
        let mut basis = vec![vec![0.0; dim]; dim];
        for (i, row) in basis.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Lattice { basis }
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `n` with `2n = dim`.
    pub fn half_dim(&self) -> u32 {
        (self.dim() / 2) as u32
    }

    pub fn gram(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        let mut g = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                g[i][j] = dot(&self.basis[i], &self.basis[j]);
            }
        }
        g
    }

    pub fn volume(&self) -> f64 {
        det(&self.basis).abs()
    }

    pub fn scale(&self, mu: f64) -> Lattice {
        Lattice {
            basis: self
                .basis
                .iter()
                .map(|r| r.iter().map(|&x| mu * x).collect())
                .collect(),
        }
    }

    /// `vol^{-1/2n}`-rescaled copy; volume 1 by construction.
    pub fn unimodular_rescale(&self) -> Lattice {
        let mu = self.volume().powf(-1.0 / self.dim() as f64);
        self.scale(mu)
    }

    pub fn dual(&self) -> Lattice {
        let inv = invert(&self.basis);
        let m = self.dim();
        let mut basis = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                basis[i][j] = inv[j][i];
            }
        }
        Lattice { basis }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            d = -d;
        }
        d *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    d
}

fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv = vec![vec![0.0; n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let p = a[col][col];
        for c in 0..n {
            a[col][c] /= p;
            inv[col][c] /= p;
        }
        for r in 0..n {
            if r != col && a[r][col].abs() > 0.0 {
                let f = a[r][col];
                for c in 0..n {
                    a[r][c] -= f * a[col][c];
                    inv[r][c] -= f * inv[col][c];
                }
            }
        }
    }
    inv
}

/// LDL^T decomposition of a Gram matrix.
fn ldl(gram: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = gram.len();
    let mut l = vec![vec![0.0; n]; n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = gram[j][j];
        for k in 0..j {
            dj -= l[j][k] * l[j][k] * d[k];
        }
        d[j] = dj;
        l[j][j] = 1.0;
        for i in j + 1..n {
            let mut v = gram[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k] * d[k];
            }
            l[i][j] = v / dj;
        }
    }
    (l, d)
}

/// Visit the squared norm of every nonzero lattice vector of norm at most
/// `radius`, by recursive descent through the LDL quadratic form.
/// `budget` caps the number of visited points.
pub fn for_each_norm<F: FnMut(f64)>(
    lat: &Lattice,
    radius: f64,
    budget: usize,
    mut visit: F,
) -> Result<()> {
    let m = lat.dim();
    let gram = lat.gram();
    let (l, d) = ldl(&gram);
    if d.iter().any(|&x| x <= 0.0) {
        return Err(Error::domain("Gram matrix is not positive definite"));
    }
    let r2 = radius * radius + 1e-9 * radius.max(1.0) * radius.max(1.0);
    let mut x = vec![0i64; m];
    let mut seen = 0usize;
    // q(x) = sum_i d_i (x_i + sum_{j>i} l[j][i] x_j)^2
    fn rec<F: FnMut(f64)>(
        level: isize,
        m: usize,
        l: &[Vec<f64>],
        d: &[f64],
        x: &mut [i64],
        remaining: f64,
        r2: f64,
        visit: &mut F,
        seen: &mut usize,
        budget: usize,
    ) -> Result<()> {
        if level < 0 {
            if x.iter().any(|&c| c != 0) {
                if *seen >= budget {
                    return Err(Error::budget(format!(
                        "lattice enumeration exceeded {budget} points"
                    )));
                }
                *seen += 1;
                visit(r2 - remaining);
            }
            return Ok(());
        }
        let i = level as usize;
        let mut center = 0.0;
        for j in i + 1..m {
            center += l[j][i] * x[j] as f64;
        }
        let width = (remaining / d[i]).sqrt();
        let lo = (-center - width).ceil() as i64;
        let hi = (-center + width).floor() as i64;
        for xi in lo..=hi {
            let t = xi as f64 + center;
            let used = d[i] * t * t;
            if used <= remaining {
                x[i] = xi;
                rec(level - 1, m, l, d, x, remaining - used, r2, visit, seen, budget)?;
                x[i] = 0;
            }
        }
        Ok(())
    }
    rec(
        m as isize - 1,
        m,
        &l,
        &d,
        &mut x,
        r2,
        r2,
        &mut visit,
        &mut seen,
        budget,
    )
}

/// Squared norms of all nonzero lattice vectors within `radius`, sorted.
pub fn enumerate_norms(lat: &Lattice, radius: f64, budget: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for_each_norm(lat, radius, budget, |r2| out.push(r2))?;
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

/// Shortest nonzero vector length, by exhaustive enumeration inside the
/// provable initial radius given by the shortest basis row.
pub fn lambda1(lat: &Lattice, budget: usize) -> Result<f64> {
    let r0 = lat
        .basis
        .iter()
        .map(|r| dot(r, r).sqrt())
        .min_by(|a, b| a.total_cmp(b))
        .unwrap();
    let norms = enumerate_norms(lat, r0, budget)?;
    let min = norms
        .first()
        .copied()
        .expect("ball of the shortest basis row contains that row");
    Ok(min.max(0.0).sqrt())
}

/// Exact number of lattice points in the closed ball of radius `R`,
/// including the origin.
pub fn ball_count(lat: &Lattice, radius: f64, budget: usize) -> Result<u64> {
    Ok(enumerate_norms(lat, radius, budget)?.len() as u64 + 1)
}

/// The counting bound `(2R/lambda_1 + 1)^{2n}`.
pub fn bhw_bound(radius: f64, lambda_1: f64, dim: usize) -> f64 {
    (2.0 * radius / lambda_1 + 1.0).powi(dim as i32)
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeBasics {
    pub volume: f64,
    pub lambda1: f64,
    pub ball_count: u64,
    pub bhw_bound: f64,
}

pub fn lattice_basics(lat: &Lattice, radius: f64, budget: usize) -> Result<LatticeBasics> {
    let l1 = lambda1(lat, budget)?;
    let count = ball_count(lat, radius, budget)?;
    Ok(LatticeBasics {
        volume: lat.volume(),
        lambda1: l1,
        ball_count: count,
        bhw_bound: bhw_bound(radius, l1, lat.dim()),
    })
}

/// Collapsed table of theta-series terms `sum mult * e^{-pi t r2}`.
struct ThetaTable {
    terms: Vec<(f64, f64)>, // (r2, multiplicity), ascending
    lambda_1: f64,
    dim: usize,
    cutoff_radius: f64,
}

impl ThetaTable {
    fn build(lat: &Lattice, target: f64, budget: usize) -> Result<ThetaTable> {
        let l1 = lambda1(lat, budget)?;
        // e^{-pi R^2} <= e^{-target} at t >= 1
        let radius = (target / std::f64::consts::PI).sqrt().max(2.0 * l1);
        let norms = enumerate_norms(lat, radius, budget)?;
        let mut terms: Vec<(f64, f64)> = Vec::new();
        for r2 in norms {
            match terms.last_mut() {
                Some((v, mult)) if (*v - r2).abs() <= 1e-9 * (1.0 + r2) => *mult += 1.0,
                _ => terms.push((r2, 1.0)),
            }
        }
        Ok(ThetaTable {
            terms,
            lambda_1: l1,
            dim: lat.dim(),
            cutoff_radius: radius,
        })
    }

    /// `sum_{0 < |x| <= R} e^{-pi t |x|^2}`, with early exit once terms
    /// fall below the running tolerance.
    fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(r2, mult) in &self.terms {
            let term = mult * (-std::f64::consts::PI * t * r2).exp();
            acc += term;
            if term < 1e-22 * (1.0 + acc) {
                break;
            }
        }
        acc
    }

    /// Upper bound on the discarded tail `sum_{|x| > R} e^{-pi t |x|^2}`,
    /// by shells of width `lambda_1` and the counting bound.
    fn tail_bound(&self, t: f64) -> f64 {
        let delta = self.lambda_1;
        let mut tail = 0.0;
        for k in 0..400 {
            let r_lo = self.cutoff_radius + k as f64 * delta;
            let r_hi = r_lo + delta;
            let shell = bhw_bound(r_hi, self.lambda_1, self.dim);
            let term = shell * (-std::f64::consts::PI * t * r_lo * r_lo).exp();
            tail += term;
            if term < 1e-30 * (1.0 + tail) {
                break;
            }
        }
        tail
    }
}

/// Tuning knobs for the Epstein evaluations.
#[derive(Debug, Clone, Copy)]
pub struct EpsteinConfig {
    /// theta terms kept while `pi r^2 <= theta_target`
    pub theta_target: f64,
    pub quad_tol: f64,
    pub quad_budget: usize,
    pub enum_budget: usize,
}

impl Default for EpsteinConfig {
    fn default() -> Self {
        EpsteinConfig {
            theta_target: 48.0,
            quad_tol: 1e-13,
            quad_budget: 2_000_000,
            enum_budget: 8_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsteinResult {
    pub s: (f64, f64),
    pub value: (f64, f64),
    pub residue_at_0: f64,
    pub constant_term: f64,
    pub error_estimate: f64,
}

struct ThetaPair {
    primal: ThetaTable,
    dual: ThetaTable,
    volume: f64,
    n: u32,
}

impl ThetaPair {
    fn build(lat: &Lattice, cfg: &EpsteinConfig) -> Result<ThetaPair> {
        Ok(ThetaPair {
            primal: ThetaTable::build(lat, cfg.theta_target, cfg.enum_budget)?,
            dual: ThetaTable::build(&lat.dual(), cfg.theta_target, cfg.enum_budget)?,
            volume: lat.volume(),
            n: lat.half_dim(),
        })
    }

    /// Pick `T` so that the integrand is below `floor` at `T` and decays
    /// at least like `e^{-pi lambda^2 t / 2}` beyond it; returns
    /// `(T, tail_bound)`.
    fn integration_cut(&self, re_w: f64, floor: f64) -> Result<(f64, f64)> {
        let c = re_w.max(self.n as f64 - re_w).max(1.0);
        let lam = self.primal.lambda_1.min(self.dual.lambda_1);
        let decay = std::f64::consts::PI * lam * lam;
        let mut t_cut = (2.0 * (c - 1.0) / decay).max(2.0);
        for _ in 0..200 {
            let integrand = t_cut.powf(c - 1.0)
                * (self.primal.eval(t_cut) + self.dual.eval(t_cut) / self.volume);
            if integrand < floor {
                let tail = 2.0 * integrand / decay;
                return Ok((t_cut, tail));
            }
            t_cut *= 1.5;
        }
        Err(Error::budget(
            "theta integrand does not decay below the floor; non-convergent truncation",
        ))
    }

    /// The truncation error of both tables, propagated through the
    /// integral on `[1, T]` (crudely: times the interval length bound).
    fn truncation_error(&self, re_w: f64, t_cut: f64) -> f64 {
        let c = re_w.max(self.n as f64 - re_w).max(1.0);
        let per_eval = self.primal.tail_bound(1.0) + self.dual.tail_bound(1.0) / self.volume;
        per_eval * t_cut.powf(c - 1.0) * t_cut
    }
}

/// Analytic continuation of
/// `zeta_Lambda(s) = sum_{x != 0} |x|^{-2n(1+s)}` at any `s` away from the
/// poles `0` and `-1`.
pub fn epstein_zeta(lat: &Lattice, s: Complex64, cfg: &EpsteinConfig) -> Result<EpsteinResult> {
    if s.norm() < 1e-12 || (s + 1.0).norm() < 1e-12 {
        return Err(Error::domain("pole: s must avoid 0 and -1"));
    }
    let pair = ThetaPair::build(lat, cfg)?;
    let n = pair.n as f64;
    let v = pair.volume;
    let w = s * n + n;
    let (t_cut, int_tail) = pair.integration_cut(w.re, 1e-19)?;
    let (integral, quad_err) = adaptive_simpson_complex(
        |t| {
            let tc = Complex64::new(t, 0.0);
            tc.powc(w - 1.0) * pair.primal.eval(t)
                + tc.powc(n - w - 1.0) * pair.dual.eval(t) / v
        },
        1.0,
        t_cut,
        cfg.quad_tol,
        cfg.quad_budget,
    )?;
    let bracket = integral - 1.0 / w + 1.0 / (v * n * s);
    let prefactor = Complex64::new(std::f64::consts::PI, 0.0).powc(w) / gamma_complex(w);
    let value = prefactor * bracket;
    let ct = constant_term(lat, cfg)?;
    let err = (quad_err + int_tail + pair.truncation_error(w.re, t_cut)) * prefactor.norm();
    Ok(EpsteinResult {
        s: (s.re, s.im),
        value: (value.re, value.im),
        residue_at_0: ct.residue,
        constant_term: ct.constant_term,
        error_estimate: err,
    })
}

/// Direct lattice sum of `|x|^{-2n(1+s)}`, valid for `Re(s) > 0`; the
/// enumeration radius is grown until the shell tail bound drops under
/// `tol`. Returns the value and the total error bound.
pub fn direct_sum(
    lat: &Lattice,
    s: Complex64,
    tol: f64,
    enum_budget: usize,
) -> Result<(Complex64, f64)> {
    let p = 2.0 * lat.half_dim() as f64 * (1.0 + s.re);
    if p <= lat.dim() as f64 + 0.25 {
        return Err(Error::domain(
            "direct sum needs Re(s) comfortably above the abscissa",
        ));
    }
    let l1 = lambda1(lat, enum_budget)?;
    let dim = lat.dim() as f64;
    let mut radius = (4.0 * l1).max(4.0);
    // integration by parts against the counting bound:
    // sum_{|x| > R} |x|^{-p} <= p (2/l1 + 1/R)^{2n} R^{2n-p} / (p - 2n)
    let tail_at = |r: f64| -> f64 {
        p * (2.0 / l1 + 1.0 / r).powf(dim) * r.powf(dim - p) / (p - dim)
    };
    let mut tail = tail_at(radius);
    while tail > tol {
        radius *= 1.15;
        tail = tail_at(radius);
        if radius > 1e6 {
            return Err(Error::budget(
                "direct sum radius exceeded 1e6 before meeting the tolerance",
            ));
        }
    }
    let exponent = -(s + 1.0) * lat.half_dim() as f64;
    let real_exponent = exponent.im == 0.0;
    // Kahan-compensated streaming sum; terms are visited unordered
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for_each_norm(lat, radius, enum_budget, |r2| {
        let value = if real_exponent {
            Complex64::new(r2.powf(exponent.re), 0.0)
        } else {
            Complex64::new(r2, 0.0).powc(exponent)
        };
        let term = value - comp;
        let next = acc + term;
        comp = (next - acc) - term;
        acc = next;
    })?;
    Ok((acc, tail + 1e-14 * acc.norm()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantTermResult {
    pub constant_term: f64,
    pub residue: f64,
    pub error_estimate: f64,
}

/// Laurent data at `s = 0`, extracted symbolically:
/// `R = pi^n / (Gamma(n) n V)` and
/// `C = (pi^n/Gamma(n)) ( J(0) - 1/n + (ln pi - psi(n))/V )` with
/// `J(0) = int_1^inf ( t^{n-1} Theta(t) + V^{-1} t^{-1} Theta*(t) ) dt`.
pub fn constant_term(lat: &Lattice, cfg: &EpsteinConfig) -> Result<ConstantTermResult> {
    let pair = ThetaPair::build(lat, cfg)?;
    let n = pair.n;
    let nf = n as f64;
    let v = pair.volume;
    let (t_cut, int_tail) = pair.integration_cut(nf, 1e-19)?;
    let (j0, quad_err) = adaptive_simpson(
        |t| t.powf(nf - 1.0) * pair.primal.eval(t) + pair.dual.eval(t) / (v * t),
        1.0,
        t_cut,
        cfg.quad_tol,
        cfg.quad_budget,
    )?;
    let g0 = std::f64::consts::PI.powi(n as i32) / factorial(n - 1);
    let c = g0 * (j0 - 1.0 / nf + (std::f64::consts::PI.ln() - digamma_int(n)) / v);
    let r = g0 / (nf * v);
    debug_assert!((r - sphere_volume(n) / (2.0 * nf * v)).abs() < 1e-12 * r);
    Ok(ConstantTermResult {
        constant_term: c,
        residue: r,
        error_estimate: g0 * (quad_err + int_tail + pair.truncation_error(nf, t_cut)),
    })
}

/// Residue extracted numerically as the symmetrized limit of
/// `s * zeta(s)`; an independent route to compare against the closed form.
pub fn numeric_residue(lat: &Lattice, cfg: &EpsteinConfig) -> Result<f64> {
    let h = 1e-5;
    let plus = epstein_zeta(lat, Complex64::new(h, 0.0), cfg)?;
    let minus = epstein_zeta(lat, Complex64::new(-h, 0.0), cfg)?;
    Ok(0.5 * (h * plus.value.0 + (-h) * minus.value.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

/// Check `C(mu L) = mu^{-2n} ( C(L) - vol(S^{2n-1}) ln(mu) / vol(L) )`,
/// both sides numerically.
pub fn scaling_law(lat: &Lattice, mu: f64, cfg: &EpsteinConfig) -> Result<ScalingCheck> {
    if mu <= 0.0 {
        return Err(Error::domain("scaling factor must be positive"));
    }
    let lhs = constant_term(&lat.scale(mu), cfg)?.constant_term;
    let base = constant_term(lat, cfg)?.constant_term;
    let dim = lat.dim() as f64;
    let rhs = mu.powf(-dim)
        * (base - sphere_volume(lat.half_dim()) * mu.ln() / lat.volume());
    Ok(ScalingCheck {
        lhs,
        rhs,
        diff: (lhs - rhs).abs(),
    })
}

/// A cusp cross-section lattice of a congruence or Hecke subgroup.
#[derive(Debug, Clone)]
pub struct CuspLattice {
    /// the fractional module defining the lattice
    pub module: FracIdeal,
    /// embedded lattice (`tilde`)
    pub tilde: Lattice,
    /// unimodular rescale (`hat`)
    pub hat: Lattice,
    pub tilde_volume: f64,
}

/// Embed a fractional module of an imaginary quadratic field into `R^2`.
/// `metric_scale` is the exposed normalization constant between the
/// invariant metric on the nilpotent algebra and the Euclidean embedding;
/// the default of every caller is `1`.
pub fn embed_module(module: &FracIdeal, metric_scale: f64) -> Result<CuspLattice> {
    let field = module.num.field().clone();
    let [b1, b2] = module.num.basis();
    let den = module.den as f64;
    let s = metric_scale / den;
    let e1 = field.embed(b1);
    let e2 = field.embed(b2);
    let tilde = Lattice::new(vec![vec![e1.0 * s, e1.1 * s], vec![e2.0 * s, e2.1 * s]])?;
    let vol = tilde.volume();
    Ok(CuspLattice {
        module: module.clone(),
        hat: tilde.unimodular_rescale(),
        tilde,
        tilde_volume: vol,
    })
}

/// Find `alpha, beta` with `alpha*delta - beta*gamma = 1` by a bounded
/// search; exists whenever `(gamma, delta)` generate the unit ideal.
pub fn complete_bottom_row(
    field: &crate::quadfield::FieldDescriptor,
    gamma: QuadInt,
    delta: QuadInt,
) -> Option<(QuadInt, QuadInt)> {
    let bound = 24i128;
    for ax in -bound..=bound {
        for ay in -bound..=bound {
            let alpha = QuadInt::new(ax, ay);
            let lhs = field.mul(alpha, delta);
            let target = field.sub(lhs, QuadInt::one());
            // beta = (alpha*delta - 1)/gamma must divide exactly
            if gamma.is_zero() {
                if target.is_zero() {
                    return Some((alpha, QuadInt::zero()));
                }
                continue;
            }
            let ng = field.norm(gamma);
            let num = field.mul(target, field.conj(gamma));
            if num.x % ng == 0 && num.y % ng == 0 {
                return Some((alpha, QuadInt::new(num.x / ng, num.y / ng)));
            }
        }
    }
    None
}

/// The cusp cross-section module of `spec` at the cusp whose bottom-row
/// data is `(gamma, delta)`:
/// `a u^{-2}` for the principal kind and `u^{-2} cap gamma^{-2} a` for the
/// Hecke kind, `u` the module generated by `gamma` and `delta`. The cusp
/// at infinity (`gamma = 0`) degenerates to `u^{-2}`.
pub fn cusp_module(spec: &SubgroupSpec, gamma: QuadInt, delta: QuadInt) -> Result<FracIdeal> {
    let field = spec.field().clone();
    if gamma.is_zero() && delta.is_zero() {
        return Err(Error::domain("bottom row must be a nonzero pair"));
    }
    let u = Ideal::from_generators(&field, &[gamma, delta])?;
    let u_inv_sq = FracIdeal::inverse_of(&u).mul(&FracIdeal::inverse_of(&u));
    let a = &spec.level;
    let hecke_module = |u_inv_sq: &FracIdeal| -> Result<FracIdeal> {
        if gamma.is_zero() {
            // the stabilizer of infinity in the Hecke group contains all
            // integral translations
            Ok(u_inv_sq.clone())
        } else {
            let g2 = Ideal::principal(&field, field.mul(gamma, gamma))?;
            let g_inv_sq_a = FracIdeal::inverse_of(&g2).mul_integral(a);
            u_inv_sq.intersect(&g_inv_sq_a)
        }
    };
    match spec.kind {
        SubgroupKind::Principal => Ok(u_inv_sq.mul_integral(a)),
        SubgroupKind::Hecke => hecke_module(&u_inv_sq),
        SubgroupKind::HeckeIntersected => {
            let c = spec
                .intersect_level
                .as_ref()
                .ok_or_else(|| Error::domain("intersected kind requires intersect_level"))?;
            let from_hecke = hecke_module(&u_inv_sq)?;
            let from_principal = u_inv_sq.mul_integral(c);
            from_hecke.intersect(&from_principal)
        }
    }
}

/// Cusp lattice from bottom-row data.
pub fn cusp_lattice(
    spec: &SubgroupSpec,
    gamma: QuadInt,
    delta: QuadInt,
    metric_scale: f64,
) -> Result<CuspLattice> {
    embed_module(&cusp_module(spec, gamma, delta)?, metric_scale)
}

/// One summand class of the alpha constant.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaTerm {
    pub module_norm: f64,
    pub multiplicity: i128,
    pub hat_constant: f64,
    pub per_cusp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaResult {
    pub alpha: f64,
    pub cusp_count: i128,
    pub terms: Vec<AlphaTerm>,
}

/// `alpha = sum_j C(tilde_j) vol(tilde_j) / vol(S^{2n-1})`, evaluated per
/// class through the scaling identity
/// `C(tilde) vol(tilde) = C(hat) - vol(S^{2n-1}) ln vol(tilde) / (2n)`.
pub fn alpha_const(classes: &[(CuspLattice, i128)], cfg: &EpsteinConfig) -> Result<AlphaResult> {
    if classes.is_empty() {
        return Err(Error::domain("alpha requires a nonempty cusp list"));
    }
    let mut cache: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut alpha = 0.0;
    let mut count = 0i128;
    let mut terms = Vec::new();
    for (cusp, mult) in classes {
        let n = cusp.hat.half_dim();
        let sphere = sphere_volume(n);
        let key: Vec<i64> = cusp
            .hat
            .gram()
            .iter()
            .flatten()
            .map(|&x| (x * 1e9).round() as i64)
            .collect();
        let hat_c = match cache.get(&key) {
            Some(&c) => c,
            None => {
                let c = constant_term(&cusp.hat, cfg)?.constant_term;
                cache.insert(key, c);
                c
            }
        };
        let per_cusp =
            (hat_c - sphere * cusp.tilde_volume.ln() / (2.0 * n as f64)) / sphere;
        alpha += *mult as f64 * per_cusp;
        count += mult;
        terms.push(AlphaTerm {
            module_norm: {
                let (num, d2) = cusp.module.index_in_ring();
                num as f64 / d2 as f64
            },
            multiplicity: *mult,
            hat_constant: hat_c,
            per_cusp,
        });
    }
    Ok(AlphaResult {
        alpha,
        cusp_count: count,
        terms,
    })
}

/// Cusp lattice classes of a subgroup from the closed-form profile.
pub fn cusp_lattices_for(
    spec: &SubgroupSpec,
    metric_scale: f64,
) -> Result<Vec<(CuspLattice, i128)>> {
    let profile = cusp_profile(spec)?;
    profile
        .iter()
        .map(|class| Ok((embed_module(&class.module, metric_scale)?, class.multiplicity)))
        .collect()
}

/// Alpha constant of a subgroup, through its cusp profile.
pub fn alpha_for(spec: &SubgroupSpec, metric_scale: f64, cfg: &EpsteinConfig) -> Result<AlphaResult> {
    alpha_const(&cusp_lattices_for(spec, metric_scale)?, cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityAudit {
    pub min_lambda1_hat: f64,
    pub max_abs_constant_hat: f64,
    pub uniform: bool,
    pub lattice_count: usize,
}

/// Minimum shortest vector and maximum `|C|` over the unimodular-rescaled
/// family; `uniform` when the shortest vector stays above `threshold`
/// (the compactness proxy).
pub fn uniformity_audit(
    family: &[CuspLattice],
    threshold: f64,
    cfg: &EpsteinConfig,
) -> Result<UniformityAudit> {
    if family.is_empty() {
        return Err(Error::domain("uniformity audit requires a nonempty family"));
    }
    let mut min_l1 = f64::INFINITY;
    let mut max_c = 0.0f64;
    let mut cache: HashMap<Vec<i64>, f64> = HashMap::new();
    for cusp in family {
        let l1 = lambda1(&cusp.hat, cfg.enum_budget)?;
        min_l1 = min_l1.min(l1);
        let key: Vec<i64> = cusp
            .hat
            .gram()
            .iter()
            .flatten()
            .map(|&x| (x * 1e9).round() as i64)
            .collect();
        let c = match cache.get(&key) {
            Some(&c) => c,
            None => {
                let c = constant_term(&cusp.hat, cfg)?.constant_term;
                cache.insert(key, c);
                c
            }
        };
        max_c = max_c.max(c.abs());
    }
    Ok(UniformityAudit {
        min_lambda1_hat: min_l1,
        max_abs_constant_hat: max_c,
        uniform: min_l1 >= threshold,
        lattice_count: family.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropalphaAudit {
    /// `max |alpha| / (kappa + nilpotent log sum)`
    pub c1_witness: f64,
    /// `max |alpha| / (kappa ln index)` over rows with index > 1
    pub c2_witness: f64,
    pub ok: bool,
    pub violations: usize,
}

/// Audit the linear bound on `alpha` across a family of sequence points.
pub fn propalpha_audit(points: &[SequencePoint]) -> PropalphaAudit {
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    let mut violations = 0usize;
    let mut seen = 0usize;
    for p in points {
        let Some(alpha) = p.alpha else { continue };
        seen += 1;
        let denom = p.kappa as f64 + p.nilpotent_log_sum.unwrap_or(0.0);
        if denom <= 0.0 {
            if alpha.abs() > 0.0 {
                violations += 1;
            }
            continue;
        }
        c1 = c1.max(alpha.abs() / denom);
        if let Some(idx) = p.index {
            if idx > 1 {
                c2 = c2.max(alpha.abs() / (p.kappa as f64 * (idx as f64).ln()));
            }
        }
    }
    PropalphaAudit {
        c1_witness: c1,
        c2_witness: c2,
        ok: violations == 0 && seen > 0 && c1.is_finite(),
        violations,
    }
}
