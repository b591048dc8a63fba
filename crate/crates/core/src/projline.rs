//! The projective line `P^1(O_D/a)`, the reduction `SL_2(O_D/a)`, and
//! brute-force counting oracles for fixed points, orbits and group orders.
//!
//! Convention: cosets `g Gamma_0(a)` are identified with column points
//! `g.[1:0]`, so fixed points of `gamma` on the coset space are fixed
//! points of the left linear substitution `[x:y] -> [a x + b y : c x + d y]`
//! on `P^1(O/a)`. Cusps correspond to orbits of the upper-triangular
//! stabilizer of infinity acting on bottom rows, i.e. on the right.

use std::collections::HashMap;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::quadfield::{factor, reduce_mod, FieldDescriptor, Ideal, QuadInt};

/// A unit-determinant 2x2 matrix over `O_D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub a: QuadInt,
    pub b: QuadInt,
    pub c: QuadInt,
    pub d: QuadInt,
}

impl GroupElement {
    /// Construct and check `ad - bc = 1` exactly.
    pub fn new(
        field: &FieldDescriptor,
        a: QuadInt,
        b: QuadInt,
        c: QuadInt,
        d: QuadInt,
    ) -> Result<Self> {
        let det = field.sub(field.mul(a, d), field.mul(b, c));
        if det != QuadInt::one() {
            return Err(Error::domain(format!("determinant is {det}, not 1")));
        }
        Ok(GroupElement { a, b, c, d })
    }

    pub fn identity() -> Self {
        GroupElement {
            a: QuadInt::one(),
            b: QuadInt::zero(),
            c: QuadInt::zero(),
            d: QuadInt::one(),
        }
    }

    pub fn mul(&self, field: &FieldDescriptor, other: &GroupElement) -> GroupElement {
        GroupElement {
            a: field.add(field.mul(self.a, other.a), field.mul(self.b, other.c)),
            b: field.add(field.mul(self.a, other.b), field.mul(self.b, other.d)),
            c: field.add(field.mul(self.c, other.a), field.mul(self.d, other.c)),
            d: field.add(field.mul(self.c, other.b), field.mul(self.d, other.d)),
        }
    }
}

/// A canonical point of `P^1(O/a)`: the lexicographically least residue
/// pair in its unit-scaling class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    pub x: QuadInt,
    pub y: QuadInt,
}

/// Enumerated data for a modulus: residue representatives, units of the
/// quotient ring, prime divisors, and the canonical `P^1` point list.
pub struct P1Space {
    modulus: Ideal,
    primes: Vec<Ideal>,
    units: Vec<QuadInt>,
    points: Vec<ProjPoint>,
}

impl P1Space {
    /// Enumerate `P^1(O/a)` completely. `cap` bounds `N(a)`.
    pub fn new(a: &Ideal, cap: i128) -> Result<Self> {
        let n = a.norm();
        if n > cap {
            return Err(Error::budget(format!(
                "oracle cap exceeded: N(a) = {n} > {cap}"
            )));
        }
        let f = factor(a)?;
        let primes: Vec<Ideal> = f.factors.iter().map(|(p, _)| p.clone()).collect();
        let (ha, _, hd) = a.hnf();
        let mut units = Vec::new();
        for y in 0..hd {
            for x in 0..ha {
                let e = QuadInt::new(x, y);
                if primes.iter().all(|p| !p.contains(e)) {
                    units.push(e);
                }
            }
        }
        let mut space = P1Space {
            modulus: a.clone(),
            primes,
            units,
            points: Vec::new(),
        };
        let mut points = Vec::new();
        for yy in 0..hd {
            for yx in 0..ha {
                let y = QuadInt::new(yx, yy);
                for xy in 0..hd {
                    for xx in 0..ha {
                        let x = QuadInt::new(xx, xy);
                        if !space.unimodular(x, y) {
                            continue;
                        }
                        let p = ProjPoint { x, y };
                        if space.canonicalize(p) == p {
                            points.push(p);
                        }
                    }
                }
            }
        }
        space.points = points;
        let expected = p1_size(a)?;
        if space.points.len() as i128 != expected {
            return Err(Error::domain(format!(
                "P1 enumeration produced {} points, Euler product expects {expected}",
                space.points.len()
            )));
        }
        Ok(space)
    }

    pub fn modulus(&self) -> &Ideal {
        &self.modulus
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// ring units of `O/a`
    pub fn ring_units(&self) -> &[QuadInt] {
        &self.units
    }

    fn field(&self) -> &FieldDescriptor {
        self.modulus.field()
    }

    fn red(&self, p: QuadInt) -> QuadInt {
        reduce_mod(&self.modulus, p)
    }

    /// `(x, y)` lifts to a pair generating the unit ideal together with `a`.
    fn unimodular(&self, x: QuadInt, y: QuadInt) -> bool {
        self.primes
            .iter()
            .all(|p| !(p.contains(x) && p.contains(y)))
    }

    /// Order key used to pick canonical representatives.
    fn key(&self, p: ProjPoint) -> (i128, i128, i128, i128) {
        (p.x.y, p.x.x, p.y.y, p.y.x)
    }

    /// Least unit-scaling of the pair under the fixed residue order.
    pub fn canonicalize(&self, p: ProjPoint) -> ProjPoint {
        let field = self.field().clone();
        let mut best: Option<ProjPoint> = None;
        for &u in &self.units {
            let cand = ProjPoint {
                x: self.red(field.mul(u, p.x)),
                y: self.red(field.mul(u, p.y)),
            };
            best = match best {
                None => Some(cand),
                Some(b) if self.key(cand) < self.key(b) => Some(cand),
                keep => keep,
            };
        }
        best.expect("unit group of a residue ring is nonempty")
    }

    /// Left linear action `[x:y] -> [a x + b y : c x + d y]`, canonicalized.
    pub fn act(&self, g: &GroupElement, p: ProjPoint) -> ProjPoint {
        let f = self.field().clone();
        let nx = self.red(f.add(f.mul(g.a, p.x), f.mul(g.b, p.y)));
        let ny = self.red(f.add(f.mul(g.c, p.x), f.mul(g.d, p.y)));
        self.canonicalize(ProjPoint { x: nx, y: ny })
    }

    /// Right action of an upper-triangular `[[u, beta], [0, conj(u)]]` on a
    /// bottom-row point `(x, y) -> (u x, beta x + conj(u) y)`.
    fn act_upper_right(&self, p: ProjPoint, u: QuadInt, beta: QuadInt) -> ProjPoint {
        let f = self.field().clone();
        let uinv = f.conj(u); // units have norm 1
        let nx = self.red(f.mul(p.x, u));
        let ny = self.red(f.add(f.mul(p.x, beta), f.mul(p.y, uinv)));
        self.canonicalize(ProjPoint { x: nx, y: ny })
    }

    /// Exact count of points fixed by the left action of `g`.
    pub fn fixed_points(&self, g: &GroupElement) -> u64 {
        self.points
            .iter()
            .filter(|&&p| self.act(g, p) == p)
            .count() as u64
    }

    /// Orbits of the stabilizer of infinity (translations by `1` and `w`
    /// plus the global units) acting on bottom rows; each orbit is one cusp
    /// of the Hecke subgroup of this level. Returns one representative per
    /// orbit. Requires class number one.
    pub fn infinity_orbit_reps(&self) -> Result<Vec<ProjPoint>> {
        let field = self.field().clone();
        if field.class_number() != 1 {
            return Err(Error::domain(
                "oracle requires class number one".to_string(),
            ));
        }
        let generators: Vec<(QuadInt, QuadInt)> = {
            let mut g = vec![
                (QuadInt::one(), QuadInt::one()),
                (QuadInt::one(), field.omega()),
            ];
            for &u in field.units() {
                g.push((u, QuadInt::zero()));
            }
            g
        };
        let mut visited: HashSet<ProjPoint> = HashSet::new();
        let mut reps = Vec::new();
        for &start in &self.points {
            if visited.contains(&start) {
                continue;
            }
            reps.push(start);
            let mut queue = vec![start];
            visited.insert(start);
            while let Some(p) = queue.pop() {
                for &(u, beta) in &generators {
                    let q = self.act_upper_right(p, u, beta);
                    if visited.insert(q) {
                        queue.push(q);
                    }
                }
            }
        }
        Ok(reps)
    }
}

/// `#P^1(O/a) = N(a) prod_{p|a} (1 + 1/N(p))`, exactly.
pub fn p1_size(a: &Ideal) -> Result<i128> {
    let f = factor(a)?;
    let mut size: i128 = 1;
    for (p, e) in &f.factors {
        let np = p.norm();
        size *= np.pow(*e) + np.pow(*e - 1);
    }
    Ok(size)
}

/// Complete enumeration of `P^1(O/a)`; errors beyond the cap.
pub fn enumerate_p1(a: &Ideal, cap: i128) -> Result<P1Space> {
    P1Space::new(a, cap)
}

/// Number of fixed points of `g` on `P^1(O/a)` by brute force.
pub fn fixed_points(g: &GroupElement, a: &Ideal, cap: i128) -> Result<u64> {
    Ok(P1Space::new(a, cap)?.fixed_points(g))
}

/// Number of orbits of the infinity-stabilizer on `P^1(O/a)`; equals the
/// cusp count of the Hecke subgroup of level `a` in class number one.
pub fn cusp_count_oracle(a: &Ideal, cap: i128) -> Result<u64> {
    Ok(P1Space::new(a, cap)?.infinity_orbit_reps()?.len() as u64)
}

/// The largest divisor `b` of `a` with `a - d`, `b`-entry and `c`-entry of
/// `g` all in `b`; the level measuring how close `g` is to central.
pub fn gamma_tilde_level(g: &GroupElement, a: &Ideal) -> Ideal {
    let field = a.field();
    let diff = field.sub(g.a, g.d);
    match Ideal::from_generators(field, &[diff, g.b, g.c]) {
        Ok(e) => a.sum(&e),
        // all three quantities vanish: gamma is central, b = a
        Err(_) => a.clone(),
    }
}

/// Exact order of `SL_2(O/a)` by direct enumeration. Feasible only for
/// tiny norms; used as a cross-check for the CRT route.
pub fn sl2_order_direct(a: &Ideal, cap: i128) -> Result<u64> {
    let n = a.norm();
    if n > cap {
        return Err(Error::budget(format!(
            "oracle cap exceeded: N(a) = {n} > {cap} for direct SL2 enumeration"
        )));
    }
    let field = a.field().clone();
    let (ha, _, hd) = a.hnf();
    let mut elems = Vec::with_capacity(n as usize);
    for y in 0..hd {
        for x in 0..ha {
            elems.push(QuadInt::new(x, y));
        }
    }
    let one = reduce_mod(a, QuadInt::one());
    let mut count = 0u64;
    for &ea in &elems {
        for &eb in &elems {
            for &ec in &elems {
                for &ed in &elems {
                    let det = field.sub(field.mul(ea, ed), field.mul(eb, ec));
                    if reduce_mod(a, det) == one {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Exact order of `SL_2(O/a)`: brute force at each prime power, composed
/// multiplicatively over the coprime parts.
pub fn sl2_order(a: &Ideal, cap: i128) -> Result<u64> {
    if a.is_unit_ideal() {
        return Ok(1);
    }
    let f = factor(a)?;
    let mut order = 1u64;
    for (p, e) in &f.factors {
        let mut pk = Ideal::unit(a.field());
        for _ in 0..*e {
            pk = pk.mul(p);
        }
        order *= sl2_order_direct(&pk, cap)?;
    }
    Ok(order)
}

/// Reduce the entries of `g` modulo `a`; the fixed-point count and the
/// tilde level of `g` depend only on this reduction.
pub fn reduce_element(g: &GroupElement, a: &Ideal) -> GroupElement {
    GroupElement {
        a: reduce_mod(a, g.a),
        b: reduce_mod(a, g.b),
        c: reduce_mod(a, g.c),
        d: reduce_mod(a, g.d),
    }
}

/// All determinant-one matrices over `O_D` whose entries have coordinates
/// bounded by `height` in absolute value.
pub fn det_one_matrices(field: &FieldDescriptor, height: i128) -> Vec<GroupElement> {
    let mut entries = Vec::new();
    for x in -height..=height {
        for y in -height..=height {
            entries.push(QuadInt::new(x, y));
        }
    }
    let mut out = Vec::new();
    for &a in &entries {
        for &b in &entries {
            for &c in &entries {
                // solve a*d = 1 + b*c exactly
                let target = field.add(QuadInt::one(), field.mul(b, c));
                if a.is_zero() {
                    if target.is_zero() {
                        for &d in &entries {
                            out.push(GroupElement { a, b, c, d });
                        }
                    }
                    continue;
                }
                let na = field.norm(a);
                let num = field.mul(target, field.conj(a));
                if num.x % na != 0 || num.y % na != 0 {
                    continue;
                }
                let d = QuadInt::new(num.x / na, num.y / na);
                if d.x.abs() <= height && d.y.abs() <= height {
                    debug_assert_eq!(
                        field.sub(field.mul(a, d), field.mul(b, c)),
                        QuadInt::one()
                    );
                    out.push(GroupElement { a, b, c, d });
                }
            }
        }
    }
    out
}

/// Key for deduplicating matrices modulo an ideal.
pub fn reduction_key(g: &GroupElement, a: &Ideal) -> [(i128, i128); 4] {
    let r = reduce_element(g, a);
    [
        (r.a.x, r.a.y),
        (r.b.x, r.b.y),
        (r.c.x, r.c.y),
        (r.d.x, r.d.y),
    ]
}

/// Group the reductions of `mats` modulo `a`, returning one representative
/// per residue class.
pub fn dedupe_mod(mats: &[GroupElement], a: &Ideal) -> Vec<GroupElement> {
    let mut seen: HashMap<[(i128, i128); 4], ()> = HashMap::new();
    let mut reps = Vec::new();
    for g in mats {
        let key = reduction_key(g, a);
        if seen.insert(key, ()).is_none() {
            reps.push(*g);
        }
    }
    reps
}
