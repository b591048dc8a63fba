//! Small numerical kernel: adaptive Simpson quadrature for real and
//! complex integrands, a Lanczos gamma function, and digamma at integers.

use num::complex::Complex64;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
/// `budget` caps the number of function evaluations.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<(f64, f64)> {
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        if *evals > budget {
            return Err(Error::budget(format!(
                "quadrature used more than {budget} evaluations"
            )));
        }
        Ok(f(x))
    };
    let fa = eval(a, &mut evals)?;
    let fb = eval(b, &mut evals)?;
    let m = 0.5 * (a + b);
    let fm = eval(m, &mut evals)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    struct Frame {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }
    let mut total = 0.0f64;
    let mut err_acc = 0.0f64;
    let mut stack = vec![Frame {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        depth: 0,
    }];
    while let Some(fr) = stack.pop() {
        let m = 0.5 * (fr.a + fr.b);
        let lm = 0.5 * (fr.a + m);
        let rm = 0.5 * (m + fr.b);
        let flm = eval(lm, &mut evals)?;
        let frm = eval(rm, &mut evals)?;
        let left = (m - fr.a) / 6.0 * (fr.fa + 4.0 * flm + fr.fm);
        let right = (fr.b - m) / 6.0 * (fr.fm + 4.0 * frm + fr.fb);
        let delta = left + right - fr.whole;
        if fr.depth > 60 || delta.abs() <= 15.0 * fr.tol {
            total += left + right + delta / 15.0;
            err_acc += delta.abs() / 15.0;
        } else {
            stack.push(Frame {
                a: fr.a,
                b: m,
                fa: fr.fa,
                fm: flm,
                fb: fr.fm,
                whole: left,
                tol: 0.5 * fr.tol,
                depth: fr.depth + 1,
            });
            stack.push(Frame {
                a: m,
                b: fr.b,
                fa: fr.fm,
                fm: frm,
                fb: fr.fb,
                whole: right,
                tol: 0.5 * fr.tol,
                depth: fr.depth + 1,
            });
        }
    }
    Ok((total, err_acc))
}

/// Adaptive Simpson for complex-valued integrands on a real interval.
pub fn adaptive_simpson_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<(Complex64, f64)> {
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| -> Result<Complex64> {
        *evals += 1;
        if *evals > budget {
            return Err(Error::budget(format!(
                "quadrature used more than {budget} evaluations"
            )));
        }
        Ok(f(x))
    };
    let fa = eval(a, &mut evals)?;
    let fb = eval(b, &mut evals)?;
    let m = 0.5 * (a + b);
    let fm = eval(m, &mut evals)?;
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);

    struct Frame {
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut err_acc = 0.0f64;
    let mut stack = vec![Frame {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        depth: 0,
    }];
    while let Some(fr) = stack.pop() {
        let m = 0.5 * (fr.a + fr.b);
        let lm = 0.5 * (fr.a + m);
        let rm = 0.5 * (m + fr.b);
        let flm = eval(lm, &mut evals)?;
        let frm = eval(rm, &mut evals)?;
        let left = (fr.fa + flm * 4.0 + fr.fm) * ((m - fr.a) / 6.0);
        let right = (fr.fm + frm * 4.0 + fr.fb) * ((fr.b - m) / 6.0);
        let delta = left + right - fr.whole;
        if fr.depth > 60 || delta.norm() <= 15.0 * fr.tol {
            total += left + right + delta / 15.0;
            err_acc += delta.norm() / 15.0;
        } else {
            stack.push(Frame {
                a: fr.a,
                b: m,
                fa: fr.fa,
                fm: flm,
                fb: fr.fm,
                whole: left,
                tol: 0.5 * fr.tol,
                depth: fr.depth + 1,
            });
            stack.push(Frame {
                a: m,
                b: fr.b,
                fa: fr.fm,
                fm: frm,
                fb: fr.fb,
                whole: right,
                tol: 0.5 * fr.tol,
                depth: fr.depth + 1,
            });
        }
    }
    Ok((total, err_acc))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for complex argument (Lanczos, reflection for Re < 1/2).
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let pi = std::f64::consts::PI;
        let pz = Complex64::new(pi, 0.0) * z;
        return Complex64::new(pi, 0.0) / (pz.sin() * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let sqrt_two_pi = (2.0 * std::f64::consts::PI).sqrt();
    sqrt_two_pi * t.powc(z + 0.5) * (-t).exp() * x
}

pub fn gamma_real(x: f64) -> f64 {
    gamma_complex(Complex64::new(x, 0.0)).re
}

/// Digamma at a positive integer: `psi(n) = -gamma + H_{n-1}`.
pub fn digamma_int(n: u32) -> f64 {
    let mut h = 0.0;
    for k in 1..n {
        h += 1.0 / k as f64;
    }
    -EULER_GAMMA + h
}

/// Exact factorial as f64 for the small arguments used here.
pub fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Surface volume of the unit sphere `S^{2n-1}`: `2 pi^n / (n-1)!`.
pub fn sphere_volume(n: u32) -> f64 {
    2.0 * std::f64::consts::PI.powi(n as i32) / factorial(n - 1)
}
