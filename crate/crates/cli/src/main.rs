//! Command-line front end: parsing, dispatch to the toolkit modules,
//! JSON/CSV emission, tolerances and enumeration budgets via flags, and
//! deterministic exit codes:
//! `0` success (all requested checks passed), `1` computation failure,
//! `2` usage error, `3` enumeration or quadrature budget exceeded.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::complex::Complex64;
use serde::Serialize;
use serde_json::json;

use cuspkit_core::congruence::{self, SubgroupSpec};
use cuspkit_core::error::Error as CoreError;
use cuspkit_core::heatterms;
use cuspkit_core::lattice_zeta::{self, EpsteinConfig};
use cuspkit_core::projline::{self, GroupElement};
use cuspkit_core::quadfield::{self, FieldDescriptor, Ideal, QuadInt};
use cuspkit_core::so_lattice;
use cuspkit_core::weights::{self, rat_to_string, RankContext, WeightG};

#[derive(Parser)]
#[command(
    name = "cuspkit",
    about = "Arithmetic, lattice and spectral-gap invariants of Bianchi and SO(d,1) congruence subgroups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field data for Q(sqrt(-D)): discriminant, units, class number, volume
    Field(FieldArgs),
    /// Subgroup indices of the principal and Hecke subgroups of a level
    Index(LevelArgs),
    /// Cusp number of the Hecke subgroup of a level
    Cusps(LevelArgs),
    /// Points of P^1(O/a) and fixed points of a matrix
    FixedPoints(FixedPointsArgs),
    /// Exhaustive fixed-point bound audit over small matrices and levels
    PropsSweep(PropsSweepArgs),
    /// Epstein zeta continuation at a point, with residue and constant term
    Epstein(EpsteinArgs),
    /// Cusp constant alpha of a subgroup
    Alpha(AlphaArgs),
    /// Cusp-uniformity audit over a family of levels
    Uniformity(UniformityArgs),
    /// Nilpotent level lattice of SO(d,1): generators, index, sandwich
    SoLattice(SoLatticeArgs),
    /// Exact spectral-gap check for a highest weight
    GapCheck(GapCheckArgs),
    /// Residual of the Gaussian resolvent integral identity
    Lemint(LemintArgs),
    /// Per-subgroup convergence table for a family
    SequenceReport(SequenceReportArgs),
}

#[derive(Args)]
struct FieldArgs {
    /// squarefree D of Q(sqrt(-D))
    #[arg(long = "D")]
    d: u64,
    /// Dirichlet-series terms for the volume
    #[arg(long, default_value_t = 500_000)]
    tail_terms: usize,
}

#[derive(Args)]
struct LevelArgs {
    #[arg(long = "D")]
    d: u64,
    /// semicolon-separated generators, each "x+y*w"
    #[arg(long)]
    ideal: String,
}

#[derive(Args)]
struct FixedPointsArgs {
    #[arg(long = "D")]
    d: u64,
    #[arg(long)]
    ideal: String,
    /// matrix "a,b;c,d" with entries "x+y*w"
    #[arg(long)]
    matrix: String,
    /// enumeration cap on N(a)
    #[arg(long, default_value_t = 10_000)]
    cap: i128,
}

#[derive(Args)]
struct PropsSweepArgs {
    #[arg(long = "D")]
    d: u64,
    /// coordinate height bound of the matrix entries
    #[arg(long, default_value_t = 2)]
    height: i128,
    /// largest level norm in the sweep
    #[arg(long, default_value_t = 10)]
    max_norm: i128,
    #[arg(long, default_value_t = 10_000)]
    cap: i128,
}

#[derive(Args)]
struct EpsteinArgs {
    /// row-major basis as JSON, e.g. `[[1,0],[0,1]]`
    #[arg(long)]
    basis: String,
    /// evaluation point, "re" or "re+imi"
    #[arg(long)]
    s: String,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    /// quadrature evaluation budget
    #[arg(long, default_value_t = 2_000_000)]
    budget: usize,
    /// theta-series truncation target (terms kept while pi r^2 <= target)
    #[arg(long, default_value_t = 48.0)]
    theta_target: f64,
}

#[derive(Args)]
struct AlphaArgs {
    #[arg(long = "D")]
    d: u64,
    #[arg(long, value_enum, default_value_t = KindArg::Hecke)]
    kind: KindArg,
    #[arg(long)]
    ideal: String,
    /// metric normalization of the embedding
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 2_000_000)]
    budget: usize,
}

#[derive(Args)]
struct UniformityArgs {
    #[arg(long = "D")]
    d: u64,
    #[arg(long, value_enum, default_value_t = KindArg::Hecke)]
    family: KindArg,
    #[arg(long, default_value_t = 30)]
    max_norm: i128,
    /// shortest-vector threshold of the compactness proxy
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 2_000_000)]
    budget: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Principal,
    Hecke,
}

#[derive(Args)]
struct SoLatticeArgs {
    /// odd dimension d = 2n+1
    #[arg(long)]
    d: u32,
    #[arg(long)]
    q: u32,
}

#[derive(Args)]
struct GapCheckArgs {
    /// odd dimension d = 2n+1
    #[arg(long)]
    d: u32,
    /// comma-separated weight coordinates, e.g. "1,1"
    #[arg(long)]
    tau: String,
    /// allow half-integral coordinates ("3/2,1/2")
    #[arg(long, default_value_t = false)]
    spin: bool,
}

#[derive(Args)]
struct LemintArgs {
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct SequenceReportArgs {
    #[arg(long = "D")]
    d: u64,
    /// "principal" for Gamma((q)) or "hecke-powers" for Gamma_0(p^k)
    #[arg(long)]
    family: String,
    /// largest q of the principal family
    #[arg(long, default_value_t = 10)]
    qmax: u32,
    /// largest k of the Hecke power family
    #[arg(long, default_value_t = 8)]
    kmax: u32,
    /// prime for the Hecke family; defaults to a smallest-norm prime
    #[arg(long)]
    prime: Option<String>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// skip the Epstein-based alpha column
    #[arg(long, default_value_t = false)]
    no_alpha: bool,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(all_ok) => {
            if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CoreError::Budget(_) => ExitCode::from(3),
                CoreError::Domain(_) => ExitCode::from(1),
            }
        }
    }
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cmd: Command) -> Result<bool, CoreError> {
    match cmd {
        Command::Field(args) => {
            let field = FieldDescriptor::new(args.d)?;
            let vol = quadfield::volume_xd(&field, args.tail_terms);
            let units: Vec<String> = field.units().iter().map(|u| u.to_string()).collect();
            emit(&json!({
                "D": field.d(),
                "discriminant": field.discriminant(),
                "ring_generator": match field.omega_kind() {
                    quadfield::OmegaKind::SqrtMinusD => "sqrt(-D)",
                    quadfield::OmegaKind::HalfOnePlusSqrtMinusD => "(1+sqrt(-D))/2",
                },
                "units": units,
                "class_number": field.class_number(),
                "zeta_F_2": vol.zeta_f_2,
                "volume": vol.volume,
                "volume_error_bound": vol.error_bound,
                "tail_terms": args.tail_terms,
            }));
            Ok(true)
        }
        Command::Index(args) => {
            let (field, a) = parse_level(args.d, &args.ideal)?;
            let hnf = a.hnf();
            emit(&json!({
                "D": field.d(),
                "ideal_hnf": [[hnf.0, hnf.1], [0, hnf.2]],
                "norm": a.norm(),
                "index_principal": congruence::index_principal(&a)?,
                "index_hecke": congruence::index_hecke(&a)?,
            }));
            Ok(true)
        }
        Command::Cusps(args) => {
            let (_, a) = parse_level(args.d, &args.ideal)?;
            emit(&json!({
                "norm": a.norm(),
                "kappa": congruence::kappa_hecke(&a)?,
            }));
            Ok(true)
        }
        Command::FixedPoints(args) => {
            let (field, a) = parse_level(args.d, &args.ideal)?;
            let g = parse_matrix(&field, &args.matrix)?;
            let space = projline::enumerate_p1(&a, args.cap)?;
            let fixed = space.fixed_points(&g);
            emit(&json!({
                "points": space.len(),
                "fixed": fixed,
                "cap": args.cap,
            }));
            Ok(true)
        }
        Command::PropsSweep(args) => {
            let field = FieldDescriptor::new(args.d)?;
            let mats = projline::det_one_matrices(&field, args.height);
            let ideals = quadfield::ideals_with_norm_up_to(&field, args.max_norm)?;
            let mut checked = 0u64;
            let mut failures = 0u64;
            for a in &ideals {
                if a.is_unit_ideal() {
                    continue;
                }
                for g in projline::dedupe_mod(&mats, a) {
                    let r = congruence::props_check(&g, a, args.cap)?;
                    checked += 1;
                    if !r.ok {
                        failures += 1;
                    }
                }
            }
            emit(&json!({
                "matrices": mats.len(),
                "levels": ideals.len(),
                "classes_checked": checked,
                "failures": failures,
                "ok": failures == 0,
                "cap": args.cap,
            }));
            Ok(failures == 0)
        }
        Command::Epstein(args) => {
            let basis: Vec<Vec<f64>> = serde_json::from_str(&args.basis)
                .map_err(|e| CoreError::domain(format!("bad basis JSON: {e}")))?;
            let lat = lattice_zeta::Lattice::new(basis)?;
            let s = parse_complex(&args.s)?;
            let cfg = EpsteinConfig {
                theta_target: args.theta_target,
                quad_tol: args.tol,
                quad_budget: args.budget,
                ..Default::default()
            };
            let r = lattice_zeta::epstein_zeta(&lat, s, &cfg)?;
            emit(&json!({
                "s": [r.s.0, r.s.1],
                "value": [r.value.0, r.value.1],
                "C": r.constant_term,
                "R": r.residue_at_0,
                "err": r.error_estimate,
                "tol": args.tol,
            }));
            Ok(true)
        }
        Command::Alpha(args) => {
            let (_, a) = parse_level(args.d, &args.ideal)?;
            let spec = match args.kind {
                KindArg::Principal => SubgroupSpec::principal(a),
                KindArg::Hecke => SubgroupSpec::hecke(a),
            };
            let cfg = EpsteinConfig {
                quad_tol: args.tol,
                quad_budget: args.budget,
                ..Default::default()
            };
            let r = lattice_zeta::alpha_for(&spec, args.scale, &cfg)?;
            emit(&json!({
                "alpha": r.alpha,
                "kappa": r.cusp_count,
                "classes": r.terms,
                "metric_scale": args.scale,
                "tol": args.tol,
            }));
            Ok(true)
        }
        Command::Uniformity(args) => {
            let field = FieldDescriptor::new(args.d)?;
            let cfg = EpsteinConfig {
                quad_tol: args.tol,
                quad_budget: args.budget,
                ..Default::default()
            };
            let mut family = Vec::new();
            for a in quadfield::ideals_with_norm_up_to(&field, args.max_norm)? {
                let spec = match args.family {
                    KindArg::Principal => SubgroupSpec::principal(a),
                    KindArg::Hecke => SubgroupSpec::hecke(a),
                };
                for (lat, _) in lattice_zeta::cusp_lattices_for(&spec, 1.0)? {
                    family.push(lat);
                }
            }
            let audit = lattice_zeta::uniformity_audit(&family, args.threshold, &cfg)?;
            emit(&json!({
                "min_lambda1_hat": audit.min_lambda1_hat,
                "max_abs_C_hat": audit.max_abs_constant_hat,
                "uniform": audit.uniform,
                "lattices": audit.lattice_count,
                "threshold": args.threshold,
            }));
            Ok(audit.uniform)
        }
        Command::SoLattice(args) => {
            let lat = so_lattice::level_lattice(args.d, args.q)?;
            let sandwich = so_lattice::cuspun2_check(args.d, args.q)?;
            emit(&json!({
                "d": lat.d,
                "q": lat.q,
                "generator_matrix": lat.generator_matrix,
                "index_over_level1": lat.index_over_level1,
                "lower_ok": sandwich.lower_ok,
                "upper_ok": sandwich.upper_ok,
            }));
            Ok(sandwich.lower_ok && sandwich.upper_ok)
        }
        Command::GapCheck(args) => {
            let ctx = RankContext::new(args.d, args.spin)?;
            let tau = parse_weight(&ctx, &args.tau)?;
            let r = weights::gap_check(&ctx, &tau)?;
            let comp = if tau.coords().iter().all(|c| c.denom() == &1) {
                Some(weights::complementary_gap_check(&ctx, &tau)?.ok)
            } else {
                None
            };
            emit(&json!({
                "d": args.d,
                "tau": args.tau,
                "min_gap": rat_to_string(r.min_gap),
                "ok": r.ok,
                "complementary_ok": comp,
            }));
            Ok(r.ok && comp.unwrap_or(true))
        }
        Command::Lemint(args) => {
            let r = heatterms::lemint_residual(args.sigma, args.t, args.tol)?;
            let ok = r.residual < args.tol;
            emit(&json!({
                "lhs": r.lhs,
                "rhs": r.rhs,
                "residual": r.residual,
                "tol": args.tol,
                "ok": ok,
            }));
            Ok(ok)
        }
        Command::SequenceReport(args) => {
            let field = FieldDescriptor::new(args.d)?;
            let family = match args.family.as_str() {
                "principal" => heatterms::principal_family(&field, args.qmax)?,
                "hecke-powers" => {
                    let prime = match &args.prime {
                        Some(text) => parse_ideal(&field, text)?,
                        None => smallest_prime(&field),
                    };
                    heatterms::hecke_power_family(&prime, args.kmax)?
                }
                other => {
                    return Err(CoreError::domain(format!(
                        "unknown family '{other}' (use principal or hecke-powers)"
                    )))
                }
            };
            let options = heatterms::SequenceOptions {
                with_alpha: !args.no_alpha,
                metric_scale: args.scale,
                ..Default::default()
            };
            let rows = heatterms::sequence_report(&family, &options);
            render_report(&rows, &args.format)?;
            Ok(rows.iter().all(|r| r.is_ok()))
        }
    }
}

const CSV_HEADER: &str = "norm,index,kappa,alpha,log_nilp,condseq,condnew,hypratio";

fn render_report(
    rows: &[Result<heatterms::ReportRow, heatterms::RowError>],
    format: &str,
) -> Result<(), CoreError> {
    match format {
        "csv" => {
            println!("{CSV_HEADER}");
            for row in rows {
                match row {
                    Ok(r) => println!("{}", csv_row(r)),
                    Err(e) => println!("{},error:{}", e.level_norm, e.message),
                }
            }
        }
        "json" => {
            let payload: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| match row {
                    Ok(r) => serde_json::to_value(r).expect("serializable"),
                    Err(e) => json!({"level_norm": e.level_norm, "error": e.message}),
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&payload).expect("serializable"));
        }
        "table" => {
            println!(
                "{:>8} {:>12} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
                "norm", "index", "kappa", "alpha", "log_nilp", "condseq", "condnew", "hypratio"
            );
            for row in rows {
                match row {
                    Ok(r) => {
                        let p = &r.point;
                        println!(
                            "{:>8} {:>12} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
                            p.level_norm,
                            p.index.map_or("-".into(), |v: i128| v.to_string()),
                            p.kappa,
                            fmt_opt(p.alpha),
                            fmt_opt(p.nilpotent_log_sum),
                            fmt_opt(p.condseq_ratio),
                            fmt_opt(p.condnew_ratio),
                            fmt_opt(r.hyp_ratio),
                        );
                    }
                    Err(e) => println!("{:>8} error: {}", e.level_norm, e.message),
                }
            }
        }
        other => {
            return Err(CoreError::domain(format!(
                "unknown format '{other}' (use csv, json or table)"
            )))
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6}"))
}

fn csv_row(r: &heatterms::ReportRow) -> String {
    let p = &r.point;
    format!(
        "{},{},{},{},{},{},{},{}",
        p.level_norm,
        p.index.map_or(String::new(), |v| v.to_string()),
        p.kappa,
        p.alpha.map_or(String::new(), |v| v.to_string()),
        p.nilpotent_log_sum.map_or(String::new(), |v| v.to_string()),
        p.condseq_ratio.map_or(String::new(), |v| v.to_string()),
        p.condnew_ratio.map_or(String::new(), |v| v.to_string()),
        r.hyp_ratio.map_or(String::new(), |v| v.to_string()),
    )
}

fn parse_level(d: u64, ideal_text: &str) -> Result<(FieldDescriptor, Ideal), CoreError> {
    let field = FieldDescriptor::new(d)?;
    let a = parse_ideal(&field, ideal_text)?;
    Ok((field, a))
}

/// Parse "x+y*w" with integer x, y; accepts "3", "w", "-w", "2*w", "1-1*w".
fn parse_quadint(text: &str) -> Result<QuadInt, CoreError> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(CoreError::domain("empty element"));
    }
    let mut terms: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, c) in cleaned.chars().enumerate() {
        if (c == '+' || c == '-') && i > 0 {
            terms.push(current.clone());
            current.clear();
        }
        current.push(c);
    }
    terms.push(current);
    let mut x: i128 = 0;
    let mut y: i128 = 0;
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1i128, rest.to_string()),
            None => (1i128, term.strip_prefix('+').unwrap_or(&term).to_string()),
        };
        if let Some(coeff) = body.strip_suffix("*w").or_else(|| body.strip_suffix('w')) {
            let c: i128 = if coeff.is_empty() {
                1
            } else {
                coeff
                    .trim_end_matches('*')
                    .parse()
                    .map_err(|_| CoreError::domain(format!("bad coefficient in '{text}'")))?
            };
            y += sign * c;
        } else {
            let c: i128 = body
                .parse()
                .map_err(|_| CoreError::domain(format!("bad integer in '{text}'")))?;
            x += sign * c;
        }
    }
    Ok(QuadInt::new(x, y))
}

fn parse_ideal(field: &FieldDescriptor, text: &str) -> Result<Ideal, CoreError> {
    let gens: Vec<QuadInt> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_quadint)
        .collect::<Result<_, _>>()?;
    if gens.is_empty() {
        return Err(CoreError::domain("ideal needs at least one generator"));
    }
    Ideal::from_generators(field, &gens)
}

fn parse_matrix(field: &FieldDescriptor, text: &str) -> Result<GroupElement, CoreError> {
    let rows: Vec<&str> = text.split(';').collect();
    if rows.len() != 2 {
        return Err(CoreError::domain("matrix needs two rows 'a,b;c,d'"));
    }
    let mut entries = Vec::new();
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 2 {
            return Err(CoreError::domain("each matrix row needs two entries"));
        }
        for c in cols {
            entries.push(parse_quadint(c)?);
        }
    }
    GroupElement::new(field, entries[0], entries[1], entries[2], entries[3])
}

/// Parse "1.5", "1.5+0.7i", "-2i".
fn parse_complex(text: &str) -> Result<Complex64, CoreError> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(re) = cleaned.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    if let Some(imag) = cleaned.strip_suffix('i') {
        let chars: Vec<char> = imag.chars().collect();
        for pos in (1..chars.len()).rev() {
            let c = chars[pos];
            if (c == '+' || c == '-') && chars[pos - 1] != 'e' && chars[pos - 1] != 'E' {
                let re_part: String = chars[..pos].iter().collect();
                let im_part: String = chars[pos..].iter().collect();
                let re = re_part
                    .parse::<f64>()
                    .map_err(|_| CoreError::domain(format!("bad complex number '{text}'")))?;
                let im = match im_part.as_str() {
                    "+" => 1.0,
                    "-" => -1.0,
                    other => other
                        .parse::<f64>()
                        .map_err(|_| CoreError::domain(format!("bad complex number '{text}'")))?,
                };
                return Ok(Complex64::new(re, im));
            }
        }
        let im = match imag {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| CoreError::domain(format!("bad complex number '{text}'")))?,
        };
        return Ok(Complex64::new(0.0, im));
    }
    Err(CoreError::domain(format!("bad complex number '{text}'")))
}

fn parse_weight(ctx: &RankContext, text: &str) -> Result<WeightG, CoreError> {
    let coords: Vec<num::rational::Ratio<i64>> = text
        .split(',')
        .map(|part| {
            let part = part.trim();
            if let Some((num_s, den_s)) = part.split_once('/') {
                let n: i64 = num_s
                    .parse()
                    .map_err(|_| CoreError::domain(format!("bad coordinate '{part}'")))?;
                let d: i64 = den_s
                    .parse()
                    .map_err(|_| CoreError::domain(format!("bad coordinate '{part}'")))?;
                Ok(num::rational::Ratio::new(n, d))
            } else {
                part.parse::<i64>()
                    .map(num::rational::Ratio::from_integer)
                    .map_err(|_| CoreError::domain(format!("bad coordinate '{part}'")))
            }
        })
        .collect::<Result<_, CoreError>>()?;
    WeightG::new(ctx, coords)
}

/// A prime ideal of smallest norm: split/ramified primes have norm p.
fn smallest_prime(field: &FieldDescriptor) -> Ideal {
    let mut best: Option<Ideal> = None;
    for p in 2i128..50 {
        if (2..p).any(|q| p % q == 0) {
            continue;
        }
        for prime in quadfield::primes_above(field, p) {
            best = match best {
                None => Some(prime),
                Some(b) if prime.norm() < b.norm() => Some(prime),
                keep => keep,
            };
        }
        if best.as_ref().map(|b| b.norm()) == Some(p) {
            break;
        }
    }
    best.expect("some rational prime below 50 yields a prime ideal")
}
