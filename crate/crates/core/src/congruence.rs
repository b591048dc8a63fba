//! Closed-form evaluators for congruence-subgroup invariants of Bianchi
//! groups: indices of principal and Hecke subgroups, cusp numbers, the
//! multiplicative functions `kappa` and `c`, and the fixed-point bound.
//! Everything group-theoretic is exact integer arithmetic from the prime
//! factorization; only the half-integer-exponent bounds are real-valued.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::projline::{self, GroupElement};
use crate::quadfield::{
    cusp_class_count, divisors, factor, phi, unit_image_order, FieldDescriptor, FracIdeal,
    Ideal,
};

/// `[Gamma(D) : Gamma(a)] = N(a)^3 prod_{p|a} (1 - 1/N(p)^2)`, exactly.
pub fn index_principal(a: &Ideal) -> Result<i128> {
    let f = factor(a)?;
    let mut idx: i128 = 1;
    for (p, e) in &f.factors {
        let np = p.norm();
        // N(p)^{3e} (1 - N(p)^{-2}) = N(p)^{3e-2} (N(p)^2 - 1)
        idx *= np.pow(3 * *e - 2) * (np * np - 1);
    }
    Ok(idx)
}

/// `[Gamma(D) : Gamma_0(a)] = N(a) prod_{p|a} (1 + 1/N(p))`, exactly;
/// equals `#P^1(O/a)`.
pub fn index_hecke(a: &Ideal) -> Result<i128> {
    projline::p1_size(a)
}

/// Cusp number of the Hecke subgroup, as a divisor sum of residue classes
/// modulo the stabilizer action:
/// `kappa(Gamma_0(a)) = d_F sum_{b|a} phi(b + b^{-1} a) / #im(u^2)`.
///
/// The diagonal of the stabilizer of infinity rescales the cusp parameter
/// by the square of a unit, so the class count per divisor quotients by
/// the image of the squared units (not of the units themselves); this is
/// pinned by exact agreement with the orbit-counting oracle on every
/// enumerable level.
pub fn kappa_hecke(a: &Ideal) -> Result<i128> {
    let d_f = a.field().class_number() as i128;
    let mut sum: i128 = 0;
    for b in divisors(a)? {
        let cofactor = a.exact_quotient(&b)?;
        let g = b.sum(&cofactor);
        sum += cusp_class_count(&g)?;
    }
    Ok(d_f * sum)
}

/// Cusp number of the principal congruence subgroup in a class-number-one
/// field: the index divided by the order of the image of the stabilizer of
/// infinity in `SL_2(O/a)`, which is `N(a)` times the unit image.
pub fn kappa_principal(a: &Ideal) -> Result<i128> {
    if a.field().class_number() != 1 {
        return Err(Error::domain(
            "principal cusp count implemented for class number one only",
        ));
    }
    let idx = index_principal(a)?;
    let stab = a.norm() * unit_image_order(a) as i128;
    debug_assert_eq!(idx % stab, 0);
    Ok(idx / stab)
}

/// The multiplicative function `kappa`:
/// `kappa(p^k) = N(p)^{k/2} + N(p)^{k/2-1}` for even `k`,
/// `2 N(p)^{(k-1)/2}` for odd `k`. Integer valued.
pub fn kappa_mult(a: &Ideal) -> Result<i128> {
    let f = factor(a)?;
    let mut result: i128 = 1;
    for (p, e) in &f.factors {
        let np = p.norm();
        let k = *e;
        result *= if k % 2 == 0 {
            np.pow(k / 2) + np.pow(k / 2 - 1)
        } else {
            2 * np.pow((k - 1) / 2)
        };
    }
    Ok(result)
}

/// Square of the multiplicative fixed-point bound `c(a, b)`, exactly.
///
/// Per prime with `k = v_p(a)`, `r = v_p(b)`:
/// `N(p)^{(k+r)/2}` when `k - r` even positive,
/// `2 N(p)^{(k+r-1)/2}` when `k - r` odd positive,
/// `N(p)^k + N(p)^{k-1}` when `k <= r`.
/// The even case is attained by counting the preimages of a single
/// eigenvector class, the odd case doubles a half-level; both are sharp on
/// the exhaustive sweeps.
pub fn c_bound_squared(a: &Ideal, b: &Ideal) -> Result<i128> {
    if !b.divides(a) {
        return Err(Error::domain("c bound requires b | a"));
    }
    let fa = factor(a)?;
    let fb = factor(b)?;
    let mut sq: i128 = 1;
    for (p, e) in &fa.factors {
        let np = p.norm();
        let k = *e;
        let r = fb
            .factors
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0);
        sq *= if k <= r {
            let v = np.pow(k) + np.pow(k - 1);
            v * v
        } else if (k - r) % 2 == 0 {
            np.pow(k + r)
        } else {
            4 * np.pow(k + r - 1)
        };
    }
    Ok(sq)
}

/// `c(a, b)` as a real number (half-integer exponents occur).
pub fn c_bound(a: &Ideal, b: &Ideal) -> Result<f64> {
    Ok((c_bound_squared(a, b)? as f64).sqrt())
}

/// Square of the coarse bound `2^{nu(a)} sqrt(N(a) N(b))`, exactly.
pub fn coarse_bound_squared(a: &Ideal, b: &Ideal) -> Result<i128> {
    let nu = factor(a)?.nu();
    Ok(4i128.pow(nu) * a.norm() * b.norm())
}

/// Outcome of the fixed-point bound audit for one `(gamma, a)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct PropsCheck {
    pub count: u64,
    /// HNF of the level `b` (largest divisor with `gamma` scalar mod `b`)
    pub level_hnf: [[i128; 2]; 2],
    pub bound: f64,
    pub coarse_bound: f64,
    pub ok: bool,
}

/// Count fixed points, locate the tilde level, and verify
/// `count <= c(a, b) <= 2^{nu(a)} sqrt(N(a) N(b))` with exact integer
/// comparisons of the squares.
pub fn props_check(g: &GroupElement, a: &Ideal, cap: i128) -> Result<PropsCheck> {
    let count = projline::fixed_points(g, a, cap)?;
    let level = projline::gamma_tilde_level(g, a);
    let bound_sq = c_bound_squared(a, &level)?;
    let coarse_sq = coarse_bound_squared(a, &level)?;
    let count_sq = (count as i128) * (count as i128);
    let ok = count_sq <= bound_sq && bound_sq <= coarse_sq;
    let (ha, hb, hd) = level.hnf();
    Ok(PropsCheck {
        count,
        level_hnf: [[ha, hb], [0, hd]],
        bound: (bound_sq as f64).sqrt(),
        coarse_bound: (coarse_sq as f64).sqrt(),
        ok,
    })
}

/// The upper bound `kappa(Gamma_0(a)) <= d_F kappa(a)` and the exact
/// equality variant with `phi` in place of `phi_u`.
#[derive(Debug, Clone, Serialize)]
pub struct KappaHeckeBounds {
    pub kappa: i128,
    pub upper: i128,
    pub phi_variant: i128,
}

pub fn kappa_hecke_upper(a: &Ideal) -> Result<KappaHeckeBounds> {
    let d_f = a.field().class_number() as i128;
    let kappa = kappa_hecke(a)?;
    let upper = d_f * kappa_mult(a)?;
    let mut phi_sum: i128 = 0;
    for b in divisors(a)? {
        let cofactor = a.exact_quotient(&b)?;
        phi_sum += phi(&b.sum(&cofactor))?;
    }
    Ok(KappaHeckeBounds {
        kappa,
        upper,
        phi_variant: d_f * phi_sum,
    })
}

/// Which family a subgroup belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubgroupKind {
    Principal,
    Hecke,
    /// `Gamma_0(a)` intersected with a fixed torsion-free `Gamma'`.
    HeckeIntersected,
}

/// A congruence or Hecke subgroup of a Bianchi group.
#[derive(Debug, Clone)]
pub struct SubgroupSpec {
    pub kind: SubgroupKind,
    pub level: Ideal,
    /// the principal level of `Gamma'` for the intersected kind
    pub intersect_level: Option<Ideal>,
}

impl SubgroupSpec {
    pub fn principal(level: Ideal) -> Self {
        SubgroupSpec {
            kind: SubgroupKind::Principal,
            level,
            intersect_level: None,
        }
    }

    pub fn hecke(level: Ideal) -> Self {
        SubgroupSpec {
            kind: SubgroupKind::Hecke,
            level,
            intersect_level: None,
        }
    }

    pub fn hecke_intersected(level: Ideal, gamma_prime_level: Ideal) -> Result<Self> {
        if gamma_prime_level.field() != level.field() {
            return Err(Error::domain("levels must live in the same field"));
        }
        Ok(SubgroupSpec {
            kind: SubgroupKind::HeckeIntersected,
            level,
            intersect_level: Some(gamma_prime_level),
        })
    }

    pub fn field(&self) -> &FieldDescriptor {
        self.level.field()
    }
}

/// One conjugacy class of cusps: the module whose real embedding is the
/// cusp cross-section lattice, with its multiplicity.
#[derive(Debug, Clone)]
pub struct CuspClass {
    pub module: FracIdeal,
    pub multiplicity: i128,
}

/// The multiset of cusp cross-section modules of the subgroup, from the
/// divisor classification. Class number one only.
///
/// For `Gamma(a)` every cusp carries the module `a`. For `Gamma_0(a)` the
/// cusps with denominator class `c | a` number `phi_u(c + c^{-1}a)` and
/// carry the module with exponents `max(0, v_p(a) - 2 v_p(c))`.
pub fn cusp_profile(spec: &SubgroupSpec) -> Result<Vec<CuspClass>> {
    let field = spec.field().clone();
    if field.class_number() != 1 {
        return Err(Error::domain(
            "cusp profiles implemented for class number one only",
        ));
    }
    let a = &spec.level;
    match spec.kind {
        SubgroupKind::Principal => Ok(vec![CuspClass {
            module: FracIdeal::from_integral(a.clone()),
            multiplicity: kappa_principal(a)?,
        }]),
        SubgroupKind::Hecke => {
            let fa = factor(a)?;
            let mut classes = Vec::new();
            for c in divisors(a)? {
                let cofactor = a.exact_quotient(&c)?;
                let mult = cusp_class_count(&c.sum(&cofactor))?;
                // module exponents max(0, e_p - 2 c_p)
                let fc = factor(&c)?;
                let mut module = Ideal::unit(&field);
                for (p, e) in &fa.factors {
                    let cp = fc
                        .factors
                        .iter()
                        .find(|(q, _)| q == p)
                        .map(|(_, e)| *e)
                        .unwrap_or(0);
                    let exp = (*e as i64 - 2 * cp as i64).max(0) as u32;
                    for _ in 0..exp {
                        module = module.mul(p);
                    }
                }
                classes.push(CuspClass {
                    module: FracIdeal::from_integral(module),
                    multiplicity: mult,
                });
            }
            Ok(classes)
        }
        SubgroupKind::HeckeIntersected => Err(Error::domain(
            "cusp profile of an intersected Hecke subgroup is not available in closed form; \
             only the index band and the kappa upper bound are reported",
        )),
    }
}

/// Per-subgroup row of the asymptotics reports.
#[derive(Debug, Clone, Serialize)]
pub struct SequencePoint {
    pub kind: SubgroupKind,
    pub level_norm: i128,
    /// exact index when available
    pub index: Option<i128>,
    /// `[low, high]` band for the intersected kind
    pub index_interval: Option<(i128, i128)>,
    pub kappa: i128,
    /// true when `kappa` is only the upper bound `n_0 kappa(Gamma_0(a))`
    pub kappa_is_upper_bound: bool,
    pub nilpotent_log_sum: Option<f64>,
    pub alpha: Option<f64>,
    pub condseq_ratio: Option<f64>,
    pub condnew_ratio: Option<f64>,
}

/// Assemble the congruence data of one subgroup. `alpha_in`, when given,
/// is copied into the row (the cusp-lattice pipeline computes it).
pub fn sequence_point(spec: &SubgroupSpec, alpha_in: Option<f64>) -> Result<SequencePoint> {
    let a = &spec.level;
    match spec.kind {
        SubgroupKind::Principal | SubgroupKind::Hecke => {
            let (index, kappa) = match spec.kind {
                SubgroupKind::Principal => (index_principal(a)?, kappa_principal(a)?),
                _ => (index_hecke(a)?, kappa_hecke(a)?),
            };
            let profile = cusp_profile(spec)?;
            let mut log_sum = 0.0f64;
            for class in &profile {
                let (n, d2) = class.module.index_in_ring();
                log_sum += class.multiplicity as f64 * ((n as f64 / d2 as f64).ln());
            }
            let idx_f = index as f64;
            let kappa_f = kappa as f64;
            Ok(SequencePoint {
                kind: spec.kind,
                level_norm: a.norm(),
                index: Some(index),
                index_interval: None,
                kappa,
                kappa_is_upper_bound: false,
                nilpotent_log_sum: Some(log_sum),
                alpha: alpha_in,
                condseq_ratio: Some((kappa_f + log_sum) / idx_f),
                condnew_ratio: Some(kappa_f * idx_f.ln() / idx_f),
            })
        }
        SubgroupKind::HeckeIntersected => {
            let c = spec
                .intersect_level
                .as_ref()
                .ok_or_else(|| Error::domain("intersected kind requires intersect_level"))?;
            let n0 = index_principal(c)?;
            let hecke_idx = index_hecke(a)?;
            let kappa0 = kappa_hecke(a)?;
            // at tiny norms the coset oracle pins the exact index
            let exact = match a.intersect(c) {
                Ok(m) if m.norm() <= 12 => {
                    Some(hecke_intersected_index_exact(a, c, 12)?)
                }
                _ => None,
            };
            Ok(SequencePoint {
                kind: spec.kind,
                level_norm: a.norm(),
                index: exact,
                index_interval: Some((hecke_idx, n0 * hecke_idx)),
                kappa: n0 * kappa0,
                kappa_is_upper_bound: true,
                nilpotent_log_sum: None,
                alpha: alpha_in,
                condseq_ratio: None,
                condnew_ratio: Some({
                    // conservative band endpoint: largest kappa over smallest index
                    let k = (n0 * kappa0) as f64;
                    let i = hecke_idx as f64;
                    k * i.ln() / i
                }),
            })
        }
    }
}

/// Exact index `[Gamma(D) : Gamma_0(a) cap Gamma(c)]` by counting the image
/// subgroup inside `SL_2(O/m)`, `m = lcm(a, c)`. Small norms only.
pub fn hecke_intersected_index_exact(a: &Ideal, c: &Ideal, cap: i128) -> Result<i128> {
    let m = a.intersect(c)?;
    let n = m.norm();
    if n > cap {
        return Err(Error::budget(format!(
            "oracle cap exceeded: N(lcm) = {n} > {cap}"
        )));
    }
    let field = a.field().clone();
    let (ha, _, hd) = m.hnf();
    let mut elems = Vec::new();
    for y in 0..hd {
        for x in 0..ha {
            elems.push(crate::quadfield::QuadInt::new(x, y));
        }
    }
    let one = crate::quadfield::reduce_mod(&m, crate::quadfield::QuadInt::one());
    let mut total = 0i128;
    let mut in_subgroup = 0i128;
    for &ea in &elems {
        for &eb in &elems {
            for &ec in &elems {
                for &ed in &elems {
                    let det = field.sub(field.mul(ea, ed), field.mul(eb, ec));
                    if crate::quadfield::reduce_mod(&m, det) != one {
                        continue;
                    }
                    total += 1;
                    let diag_a = field.sub(ea, crate::quadfield::QuadInt::one());
                    let diag_d = field.sub(ed, crate::quadfield::QuadInt::one());
                    if c.contains(diag_a)
                        && c.contains(diag_d)
                        && c.contains(eb)
                        && c.contains(ec)
                        && a.contains(ec)
                    {
                        in_subgroup += 1;
                    }
                }
            }
        }
    }
    debug_assert!(in_subgroup > 0);
    Ok(total / in_subgroup)
}
