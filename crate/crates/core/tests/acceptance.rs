//! Acceptance suite: every release criterion as one test, each printing a
//! single PASS line with the measured margin. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use num::complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cuspkit_core::congruence::{
    self, index_hecke, index_principal, kappa_hecke, kappa_hecke_upper, kappa_mult, props_check,
    SubgroupSpec,
};
use cuspkit_core::heatterms::{
    hecke_power_family, hyp_bound_expression, lemint_residual, principal_family, sequence_report,
    SequenceOptions,
};
use cuspkit_core::lattice_zeta::{
    alpha_for, ball_count, bhw_bound, constant_term, direct_sum, epstein_zeta, lambda1,
    numeric_residue, propalpha_audit, scaling_law, EpsteinConfig, Lattice,
};
use cuspkit_core::projline::{
    cusp_count_oracle, dedupe_mod, det_one_matrices, enumerate_p1, fixed_points, sl2_order,
};
use cuspkit_core::quadfield::{
    dedekind_zeta2, dedekind_zeta2_by_lseries, ideals_with_norm_up_to, volume_xd,
    FieldDescriptor, Ideal, QuadInt,
};
use cuspkit_core::so_lattice::{cuspun2_check, exp_in_level, level_lattice};
use cuspkit_core::weights::{
    c_sigma, complementary_gap_check, eqc2_residual, gap_check, interlacing_superset,
    tau_casimir, theta_nontrivial, w0_action, RankContext, WeightG,
};

const ORACLE_CAP: i128 = 100_000;

fn fields(ds: &[u64]) -> Vec<FieldDescriptor> {
    ds.iter().map(|&d| FieldDescriptor::new(d).unwrap()).collect()
}

/// Criterion 1: closed-form indices equal the brute-force group orders,
/// `N(a) <= 40`, `D in {1, 2, 3, 7, 11}`.
#[test]
fn acceptance_01_index_identities() {
    let mut checked = 0u64;
    for field in fields(&[1, 2, 3, 7, 11]) {
        for a in ideals_with_norm_up_to(&field, 40).unwrap() {
            let principal = index_principal(&a).unwrap();
            let hecke = index_hecke(&a).unwrap();
            assert_eq!(
                principal as u64,
                sl2_order(&a, ORACLE_CAP).unwrap(),
                "D={} a={a}",
                field.d()
            );
            assert_eq!(
                hecke as usize,
                enumerate_p1(&a, ORACLE_CAP).unwrap().len(),
                "D={} a={a}",
                field.d()
            );
            checked += 1;
        }
    }
    println!("ACCEPTANCE C1 (index identities): PASS — {checked} ideals, exact equality");
}

/// Criterion 2: the divisor-sum cusp formula equals the orbit oracle,
/// `N(a) <= 40`, class-number-one fields.
#[test]
fn acceptance_02_cusp_counts() {
    let mut checked = 0u64;
    for field in fields(&[1, 2, 3, 7, 11]) {
        for a in ideals_with_norm_up_to(&field, 40).unwrap() {
            assert_eq!(
                kappa_hecke(&a).unwrap() as u64,
                cusp_count_oracle(&a, ORACLE_CAP).unwrap(),
                "D={} a={a}",
                field.d()
            );
            checked += 1;
        }
    }
    println!("ACCEPTANCE C2 (cusp counts): PASS — {checked} ideals, exact equality");
}

/// Criterion 3: fixed-point bound over all determinant-one matrices of
/// entry height <= 3 and all levels of norm <= 25 in D = 1, 3; plus
/// multiplicativity of fixed-point counts over coprime moduli.
#[test]
fn acceptance_03_fixed_point_bound() {
    let mut classes = 0u64;
    for field in fields(&[1, 3]) {
        let mats = det_one_matrices(&field, 3);
        assert!(!mats.is_empty());
        for a in ideals_with_norm_up_to(&field, 25).unwrap() {
            if a.is_unit_ideal() {
                continue;
            }
            for g in dedupe_mod(&mats, &a) {
                let r = props_check(&g, &a, ORACLE_CAP).unwrap();
                assert!(
                    r.ok,
                    "D={} a={a} count={} bound={} coarse={}",
                    field.d(),
                    r.count,
                    r.bound,
                    r.coarse_bound
                );
                classes += 1;
            }
        }
    }
    // CRT multiplicativity on sampled matrices over coprime pairs
    let field = FieldDescriptor::new(1).unwrap();
    let mats = det_one_matrices(&field, 2);
    let pairs = [
        ((2i128, 0i128), (3i128, 0i128)),
        ((1, 1), (3, 0)),
        ((2, 1), (1, 1)),
        ((1, 2), (1, 1)),
    ];
    let mut crt_checked = 0u64;
    for ((ax, ay), (bx, by)) in pairs {
        let a = Ideal::from_generators(&field, &[QuadInt::new(ax, ay)]).unwrap();
        let b = Ideal::from_generators(&field, &[QuadInt::new(bx, by)]).unwrap();
        assert!(a.sum(&b).is_unit_ideal(), "pairs must be coprime");
        let ab = a.mul(&b);
        for g in mats.iter().step_by(97) {
            let lhs = fixed_points(g, &ab, ORACLE_CAP).unwrap();
            let rhs = fixed_points(g, &a, ORACLE_CAP).unwrap()
                * fixed_points(g, &b, ORACLE_CAP).unwrap();
            assert_eq!(lhs, rhs);
            crt_checked += 1;
        }
    }
    println!(
        "ACCEPTANCE C3 (fixed-point bound): PASS — {classes} matrix classes, \
         {crt_checked} CRT factorizations, exact"
    );
}

/// Criterion 4: `sum_{b|a} phi(b + b^{-1}a) = kappa(a)` exactly for all
/// `N(a) <= 200`, D = 1.
#[test]
fn acceptance_04_divisor_sum_identity() {
    let field = FieldDescriptor::new(1).unwrap();
    let mut checked = 0u64;
    for a in ideals_with_norm_up_to(&field, 200).unwrap() {
        let bounds = kappa_hecke_upper(&a).unwrap();
        assert_eq!(bounds.phi_variant, kappa_mult(&a).unwrap(), "a = {a}");
        assert!(bounds.kappa <= bounds.upper, "a = {a}");
        checked += 1;
    }
    println!("ACCEPTANCE C4 (divisor-sum identity): PASS — {checked} ideals, exact");
}

fn random_lattice(rng: &mut ChaCha8Rng, dim: usize) -> Lattice {
    loop {
        let mut basis = vec![vec![0.0f64; dim]; dim];
        for (i, row) in basis.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let noise: f64 = rng.gen_range(-0.22..0.22);
                *entry = if i == j { 1.0 + noise } else { noise };
            }
        }
        if let Ok(lat) = Lattice::new(basis) {
            let lat = lat.unimodular_rescale();
            if lambda1(&lat, 4_000_000).unwrap() > 0.55 {
                return lat;
            }
        }
    }
}

/// Criterion 5: Epstein suite — continuation vs direct sum to 1e-8 on 20
/// random lattices, residue vs closed form to 1e-6, scaling law to 1e-7,
/// `C(Z^2)` stability to 1e-8 across cutoffs.
#[test]
fn acceptance_05_epstein_suite() {
    let cfg = EpsteinConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed0501);
    let mut max_two_route = 0.0f64;
    for k in 0..20 {
        let dim = if k < 10 { 2 } else { 4 };
        let lat = random_lattice(&mut rng, dim);
        let s = Complex64::new(2.0, 0.0);
        let cont = epstein_zeta(&lat, s, &cfg).unwrap();
        let (direct, _) = direct_sum(&lat, s, 1e-10, 60_000_000).unwrap();
        let dev = (cont.value.0 - direct.re).abs().max(cont.value.1.abs());
        assert!(dev < 1e-8, "lattice {k}: two-route deviation {dev}");
        max_two_route = max_two_route.max(dev);
    }
    // residue, numeric route vs vol(S^{2n-1})/(2n vol)
    let mut max_residue_dev = 0.0f64;
    for dim in [2usize, 4] {
        let lat = random_lattice(&mut rng, dim);
        let n = lat.half_dim() as f64;
        let sphere = 2.0 * std::f64::consts::PI.powi(lat.half_dim() as i32)
            / (1..lat.half_dim()).map(|k| k as f64).product::<f64>().max(1.0);
        let expected = sphere / (2.0 * n * lat.volume());
        let nr = numeric_residue(&lat, &cfg).unwrap();
        let dev = (nr - expected).abs();
        assert!(dev < 1e-6, "dim {dim}: residue deviation {dev}");
        max_residue_dev = max_residue_dev.max(dev);
    }
    // scaling law
    let mut max_scaling = 0.0f64;
    for dim in [2usize, 4] {
        let lat = random_lattice(&mut rng, dim);
        for mu in [0.5, 2.0, 3.0] {
            let check = scaling_law(&lat, mu, &cfg).unwrap();
            assert!(check.diff < 1e-7, "dim {dim} mu {mu}: diff {}", check.diff);
            max_scaling = max_scaling.max(check.diff);
        }
    }
    // constant-term stability of the square lattice across two cutoffs
    let z2 = Lattice::standard(2);
    let c1 = constant_term(&z2, &cfg).unwrap().constant_term;
    let wide = EpsteinConfig {
        theta_target: 70.0,
        ..cfg
    };
    let c2 = constant_term(&z2, &wide).unwrap().constant_term;
    assert!((c1 - c2).abs() < 1e-8);
    println!(
        "ACCEPTANCE C5 (Epstein suite): PASS — two-route {max_two_route:.2e} <= 1e-8, \
         residue {max_residue_dev:.2e} <= 1e-6, scaling {max_scaling:.2e} <= 1e-7, \
         C(Z^2) cutoff drift {:.2e} <= 1e-8",
        (c1 - c2).abs()
    );
}

/// Criterion 6: counting bound `ball_count(R) <= (2R/lambda1 + 1)^{2n}` on
/// 50 random (lattice, radius) pairs, exact integer comparison.
#[test]
fn acceptance_06_counting_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed0601);
    let mut checked = 0;
    for k in 0..50 {
        let dim = [2, 4, 6][k % 3];
        let lat = random_lattice(&mut rng, dim);
        let radius: f64 = rng.gen_range(0.3..3.5);
        let l1 = lambda1(&lat, 4_000_000).unwrap();
        let count = ball_count(&lat, radius, 8_000_000).unwrap();
        let bound = bhw_bound(radius, l1, dim);
        assert!(
            (count as f64) <= bound,
            "dim {dim} R {radius}: {count} > {bound}"
        );
        checked += 1;
    }
    println!("ACCEPTANCE C6 (counting bound): PASS — {checked} (lattice, R) pairs");
}

/// Criterion 7: sandwich inclusions for d in {3, 5}, q in 1..=6, and
/// brute-force membership equal to the closed form on a box of side 4q.
#[test]
fn acceptance_07_so_lattice_sandwich() {
    let mut boxes = 0u64;
    for d in [3u32, 5] {
        for q in 1..=6u32 {
            let s = cuspun2_check(d, q).unwrap();
            assert!(s.lower_ok && s.upper_ok, "d={d} q={q}");
            let lat = level_lattice(d, q).unwrap();
            let m = (d - 1) as usize;
            let half = (2 * q) as i128;
            let mut idx = vec![-half; m];
            loop {
                let brute = exp_in_level(d, &idx, q).unwrap();
                assert_eq!(lat.contains(&idx), brute, "d={d} q={q} v={idx:?}");
                boxes += 1;
                let mut pos = 0;
                while pos < m {
                    idx[pos] += 1;
                    if idx[pos] <= half {
                        break;
                    }
                    idx[pos] = -half;
                    pos += 1;
                }
                if pos == m {
                    break;
                }
            }
        }
    }
    println!("ACCEPTANCE C7 (nilpotent sandwich): PASS — {boxes} box vectors, exact");
}

/// Criterion 8: spectral-gap suite in exact rationals for every
/// twist-nontrivial tau with coordinates <= 6 in d in {3, 5, 7}.
#[test]
fn acceptance_08_spectral_gap() {
    let quarter = num::rational::Ratio::new(1i64, 4);
    let mut taus = 0u64;
    let mut sigmas = 0u64;
    for d in [3u32, 5, 7] {
        for spin in [false, true] {
            let ctx = RankContext::new(d, spin).unwrap();
            for tau in enumerate_dominant(&ctx, 6) {
                if !theta_nontrivial(&tau) {
                    continue;
                }
                taus += 1;
                let gap = gap_check(&ctx, &tau).unwrap();
                assert!(
                    gap.min_gap >= quarter,
                    "d={d} spin={spin} tau={:?}: gap {:?}",
                    tau.coords(),
                    gap.min_gap
                );
                if tau.coords().iter().all(|c| c.denom() == &1) {
                    assert!(complementary_gap_check(&ctx, &tau).unwrap().ok);
                }
                for sigma in interlacing_superset(&ctx, &tau) {
                    assert_eq!(c_sigma(&ctx, &sigma), c_sigma(&ctx, &w0_action(&ctx, &sigma)));
                    sigmas += 1;
                }
                for l in 1..=ctx.n + 1 {
                    assert!(eqc2_residual(&ctx, &tau, l).numer() == &0);
                }
                assert!(tau_casimir(&ctx, &tau).numer() > &0);
            }
        }
    }
    println!(
        "ACCEPTANCE C8 (spectral gap): PASS — {taus} weights, {sigmas} sigma checks, \
         min gap >= 1/4 exactly"
    );
}

fn enumerate_dominant(ctx: &RankContext, max_coord: i64) -> Vec<WeightG> {
    let mut out = Vec::new();
    let len = ctx.n as usize + 1;
    let offsets: &[i64] = if ctx.spin { &[1] } else { &[0] };
    for &off in offsets {
        // coordinates are v + off/2 with v integer
        let mut current: Vec<num::rational::Ratio<i64>> = Vec::new();
        fn rec(
            ctx: &RankContext,
            len: usize,
            max2: i64, // numerator bound over denominator 2
            off: i64,
            current: &mut Vec<num::rational::Ratio<i64>>,
            out: &mut Vec<WeightG>,
        ) {
            if current.len() == len {
                if let Ok(w) = WeightG::new(ctx, current.clone()) {
                    out.push(w);
                }
                return;
            }
            let hi = match current.last() {
                Some(prev) => *prev,
                None => num::rational::Ratio::new(max2, 2),
            };
            let last = current.len() == len - 1;
            let mut v = hi;
            let lo = if last {
                -num::rational::Ratio::new(max2, 2)
            } else {
                num::rational::Ratio::new(off, 2)
            };
            while v >= lo {
                current.push(v);
                rec(ctx, len, max2, off, current, out);
                current.pop();
                v -= num::rational::Ratio::new(1, 1);
            }
        }
        let max2 = 2 * max_coord - off;
        rec(ctx, len, max2, off, &mut current, &mut out);
    }
    out
}

/// Criterion 9: residual of the resolvent integral identity below 1e-9 on
/// the 15-point grid.
#[test]
fn acceptance_09_lemint_identity() {
    let mut worst = 0.0f64;
    for sigma in [0.25, 0.5, 1.0, 2.0, 5.0] {
        for t in [0.1, 1.0, 10.0] {
            let r = lemint_residual(sigma, t, 1e-9).unwrap();
            assert!(r.residual < 1e-9, "sigma={sigma} t={t}: {}", r.residual);
            worst = worst.max(r.residual);
        }
    }
    println!("ACCEPTANCE C9 (resolvent identity): PASS — max residual {worst:.2e} <= 1e-9");
}

/// Criterion 10: finite-range trend checks of the theorem hypotheses on
/// the principal family q = 2..14 together with the Hecke power family
/// k = 1..12 over D = 1, through the index-sorted sequence report.
#[test]
fn acceptance_10_trend_checks() {
    let field = FieldDescriptor::new(1).unwrap();
    let p = Ideal::from_generators(&field, &[QuadInt::new(1, 1)]).unwrap();
    let options = SequenceOptions::default();
    let mut family = principal_family(&field, 14).unwrap();
    family.extend(hecke_power_family(&p, 12).unwrap());
    let rows: Vec<_> = sequence_report(&family, &options)
        .into_iter()
        .map(|r| r.expect("row evaluates"))
        .collect();
    assert_eq!(rows.len(), 13 + 12);
    let ratios: Vec<f64> = rows
        .iter()
        .map(|r| r.point.condnew_ratio.unwrap())
        .collect();
    // eventually strictly decreasing: a strictly decreasing tail that
    // covers at least the last eight rows of the table
    let mut tail_start = 0;
    for i in 1..ratios.len() {
        if ratios[i] >= ratios[i - 1] {
            tail_start = i;
        }
    }
    assert!(
        ratios.len() - tail_start >= 8,
        "decreasing tail too short: starts at {tail_start} of {}",
        ratios.len()
    );
    // the ratio collapses below 5% of its initial value
    let initial = ratios[0];
    let final_ratio = *ratios.last().unwrap();
    assert!(
        final_ratio < 0.05 * initial,
        "final {final_ratio} vs initial {initial}"
    );
    // each subfamily alone is strictly decreasing past its peak
    for kind in [
        congruence::SubgroupKind::Principal,
        congruence::SubgroupKind::Hecke,
    ] {
        let sub: Vec<f64> = rows
            .iter()
            .filter(|r| r.point.kind == kind)
            .map(|r| r.point.condnew_ratio.unwrap())
            .collect();
        let peak = sub
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(peak <= 1, "{kind:?}: peak too late ({peak})");
        for w in sub[peak..].windows(2) {
            assert!(w[0] > w[1], "{kind:?}: not strictly decreasing after the peak");
        }
    }
    // row-wise cusp-count bound kappa/index <= 2 d_F / sqrt(N(a))
    for r in &rows {
        assert_eq!(r.kappa_bound_ok, Some(true));
    }
    // alpha bounded linearly in kappa + nilpotent log sums
    let points: Vec<_> = rows.iter().map(|r| r.point.clone()).collect();
    let audit = propalpha_audit(&points);
    assert!(audit.ok && audit.c1_witness.is_finite());
    println!(
        "ACCEPTANCE C10 (trend checks): PASS — final/initial {:.4} <= 0.05, \
         decreasing tail of {} rows, c1 witness {:.3}, c2 witness {:.3}",
        final_ratio / initial,
        ratios.len() - tail_start,
        audit.c1_witness,
        audit.c2_witness
    );
}

/// Criterion 11: the volume formula with two independent zeta routes,
/// agreeing within 1e-3, for D = 1 and D = 3.
#[test]
fn acceptance_11_volume_formula() {
    let mut devs = Vec::new();
    for d in [1u64, 3] {
        let field = FieldDescriptor::new(d).unwrap();
        let (ideal_route, e1) = dedekind_zeta2(&field, 1_000_000);
        let (l_route, e2) = dedekind_zeta2_by_lseries(&field, 1_000_000);
        let dev = (ideal_route - l_route).abs();
        assert!(dev <= 1e-3, "D={d}: zeta routes differ by {dev}");
        assert!(dev <= e1 + e2, "D={d}: deviation exceeds the stated bounds");
        let vol = volume_xd(&field, 1_000_000);
        let scale = (field.discriminant().unsigned_abs() as f64).powf(1.5)
            / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
        let vol_l_route = scale * l_route;
        assert!((vol.volume - vol_l_route).abs() <= 1e-3);
        devs.push(format!("D={d}: {:.2e}", dev));
    }
    // spot values
    let v1 = volume_xd(&FieldDescriptor::new(1).unwrap(), 1_000_000);
    assert!((v1.volume - 0.305_321_86).abs() < 1e-3);
    let v3 = volume_xd(&FieldDescriptor::new(3).unwrap(), 1_000_000);
    assert!((v3.volume - 0.169_156_93).abs() < 1e-3);
    println!(
        "ACCEPTANCE C11 (volume formula): PASS — route deviations {}",
        devs.join(", ")
    );
}

/// The alpha pipeline itself (exercised inside criterion 10) against a
/// hand-built cusp list at a tiny level, as an extra end-to-end pin.
#[test]
fn acceptance_supplement_alpha_pipeline() {
    let field = FieldDescriptor::new(1).unwrap();
    let two = Ideal::from_generators(&field, &[QuadInt::new(2, 0)]).unwrap();
    let spec = SubgroupSpec::hecke(two.clone());
    let cfg = EpsteinConfig::default();
    let r = alpha_for(&spec, 1.0, &cfg).unwrap();
    assert_eq!(r.cusp_count, congruence::kappa_hecke(&two).unwrap());
    // modules are (2), (1), (1): alpha = (3 C(Z^2) - pi ln 4) / (2 pi)
    let c = 2.584_981_759_579_253f64;
    let expected = (3.0 * c - std::f64::consts::PI * 4.0f64.ln()) / (2.0 * std::f64::consts::PI);
    assert!((r.alpha - expected).abs() < 1e-8, "{} vs {expected}", r.alpha);
    println!("ACCEPTANCE supplement (alpha pipeline): PASS — alpha({}) = {:.6}", two, r.alpha);
}
