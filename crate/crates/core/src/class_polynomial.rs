//! Ring class polynomials `P_O(X) = ∏ (X − j(τ_a))` over the reduced forms of `Δ`.
//!
//! `j` is evaluated at the CM point of each form from the eta quotient
//! `x = (η(τ)/η(2τ))^24`, `j = (x + 256)³ / x²`, with the Euler product summed
//! through the pentagonal number series. A second route through the integer
//! q-expansion `j = 1/q + 744 + 196884q + …` is kept as an independent check.

use std::fmt;
use std::sync::{Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Assign, Float, Integer};

use crate::bigcomplex::{pi, BigComplex, MIN_PRECISION};
use crate::error::{Error, Result};
use crate::quadratic_orders::{enumerate_reduced_forms, ReducedForm};

/// Monic polynomial with exact integer coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerPolynomial {
    coeffs: Vec<Integer>,
}

impl IntegerPolynomial {
    /// Coefficients `c0, …, cn`; the last one must be 1.
    pub fn from_coeffs(coeffs: Vec<Integer>) -> Result<Self> {
        match coeffs.last() {
            Some(c) if *c == 1 => Ok(Self { coeffs }),
            _ => Err(Error::InvalidInput("polynomial is not monic".into())),
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::from_coeffs(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }
}

impl fmt::Display for IntegerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for k in (0..=n).rev() {
            let c = &self.coeffs[k];
            if *c == 0 && !(n == 0 && k == 0) {
                continue;
            }
            let neg = *c < 0;
            let mag = Integer::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = mag != 1 || k == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "X")?,
                _ => write!(f, "X^{k}")?,
            }
        }
        Ok(())
    }
}

/// The nome `q = e^{2πiτ}` at `τ = (−b + i√|Δ|)/(2a)`.
fn nome(form: &ReducedForm, prec: u32) -> BigComplex {
    let disc = -form.discriminant();
    let pi = pi(prec);
    let a = Float::with_val(prec, form.a);
    let modulus = (-(Float::with_val(prec, disc).sqrt() * &pi / &a)).exp();
    let arg = Float::with_val(prec, -form.b) * &pi / &a;
    BigComplex::from_polar(&modulus, &arg)
}

/// `log₂ |1/q|` for the form, an upper estimate of `log₂ |j|` up to a constant.
fn log2_inverse_nome(disc: i64, a: i64) -> f64 {
    std::f64::consts::PI * (disc.unsigned_abs() as f64).sqrt() / (a as f64 * std::f64::consts::LN_2)
}

/// Bits added on top of the requested precision so the result is accurate in absolute terms.
fn working_precision(form: &ReducedForm, prec: u32) -> u32 {
    prec + log2_inverse_nome(form.discriminant(), form.a).ceil() as u32 + 32
}

/// `∏_{n≥1} (1 − qⁿ)` via `1 + Σ_{k≥1} (−1)^k (q^{k(3k−1)/2} + q^{k(3k+1)/2})`.
fn euler_product(q: &BigComplex, prec: u32) -> BigComplex {
    let q3 = q.mul(q).mul(q);
    let mut sum = BigComplex::from_real(prec, 1);
    // pg = q^{k(3k−1)/2}, step = q^{3k−2}, qk = q^k
    let mut pg = BigComplex::from_real(prec, 1);
    let mut step = q.clone();
    let mut qk = BigComplex::from_real(prec, 1);
    let stop = -(prec as i64) - 8;
    for k in 1u64.. {
        pg = pg.mul(&step);
        step = step.mul(&q3);
        qk = qk.mul(q);
        let pair = pg.add(&pg.mul(&qk));
        sum = if k % 2 == 1 { sum.sub(&pair) } else { sum.add(&pair) };
        if pg.mul(&step).below_pow2(stop) {
            break;
        }
    }
    sum
}

fn check_precision(precision_bits: u32) -> Result<()> {
    if precision_bits < MIN_PRECISION {
        return Err(Error::InvalidInput(format!(
            "precision {precision_bits} is below the minimum of {MIN_PRECISION} bits"
        )));
    }
    Ok(())
}

/// `j(τ)` at the CM point of a reduced form, with absolute error at most `2^{−precision_bits/2}`.
pub fn j_of_form(form: &ReducedForm, precision_bits: u32) -> Result<BigComplex> {
    check_precision(precision_bits)?;
    Ok(j_relative(form, working_precision(form, precision_bits)))
}

/// `j(τ)` computed throughout at `w` bits, so accurate to about `w` bits relative to `|j|`.
fn j_relative(form: &ReducedForm, w: u32) -> BigComplex {
    let q = nome(form, w);
    let p1 = euler_product(&q, w);
    let p2 = euler_product(&q.square(), w);
    let r = p2.div(&p1);
    let r2 = r.square();
    let r4 = r2.square();
    let r8 = r4.square();
    let r16 = r8.square();
    // f = 1/x = Δ(2τ)/Δ(τ)
    let f = q.mul(&r16).mul(&r8);
    let s = f.scale(&Float::with_val(w, 256)).add(&BigComplex::from_real(w, 1));
    s.square().mul(&s).div(&f)
}

/// Coefficients `c_{−1}, c_0, c_1, …` of `j = Σ c_n qⁿ`, extended on demand.
fn j_coefficients(count: usize) -> Vec<Integer> {
    static CACHE: OnceLock<Mutex<Vec<Integer>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("j coefficient cache poisoned");
    if guard.len() < count {
        *guard = compute_j_coefficients(count.max(2 * guard.len()).max(64));
    }
    guard[..count].to_vec()
}

/// `j·q = E4³ · ∏(1 − qⁿ)^{−24}` as an integer power series.
fn compute_j_coefficients(count: usize) -> Vec<Integer> {
    let sigma = |n: usize, k: u32| -> Integer {
        let mut s = Integer::new();
        for d in 1..=n {
            if n.is_multiple_of(d) {
                s += Integer::from(d).pow(k);
            }
        }
        s
    };
    let mut e4 = vec![Integer::from(1)];
    for n in 1..count {
        e4.push(sigma(n, 3) * 240u32);
    }
    let mul = |a: &[Integer], b: &[Integer]| -> Vec<Integer> {
        let mut out = vec![Integer::new(); count];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate().take(count - i) {
                out[i + j] += Integer::from(x * y);
            }
        }
        out
    };
    let e4_cubed = mul(&mul(&e4, &e4), &e4);
    // F = ∏(1 − qⁿ)^{−24}: n·F_n = 24 Σ_{k=1}^{n} σ1(k) F_{n−k}
    let sigma1: Vec<Integer> = (0..count).map(|n| if n == 0 { Integer::new() } else { sigma(n, 1) }).collect();
    let mut big_f = vec![Integer::from(1)];
    for n in 1..count {
        let mut acc = Integer::new();
        for k in 1..=n {
            acc += Integer::from(&sigma1[k] * &big_f[n - k]);
        }
        acc *= 24u32;
        acc /= n as u32;
        big_f.push(acc);
    }
    mul(&e4_cubed, &big_f)
}

/// `j(τ)` from the q-expansion with exact integer coefficients; independent of [`j_of_form`].
pub fn j_of_form_qexpansion(form: &ReducedForm, precision_bits: u32) -> Result<BigComplex> {
    check_precision(precision_bits)?;
    let w = working_precision(form, precision_bits);
    let q = nome(form, w);
    let stop = -(w as i64) - 8;
    let mut sum = q.recip();
    let mut qn = BigComplex::from_real(w, 1);
    let mut n = 0usize;
    let mut coeffs = j_coefficients(128);
    loop {
        if n + 1 >= coeffs.len() {
            coeffs = j_coefficients(2 * coeffs.len());
        }
        let c = Float::with_val(w, &coeffs[n + 1]);
        let term = qn.scale(&c);
        sum = sum.add(&term);
        if n > 0 && term.below_pow2(stop) {
            break;
        }
        qn = qn.mul(&q);
        n += 1;
    }
    Ok(sum)
}

/// Bits of precision for expanding the class polynomial of `disc`:
/// `⌈(π√|Δ|/ln 2)·Σ 1/a⌉ + 32h + 96`.
pub fn required_precision(disc: i64, forms: &[ReducedForm]) -> u32 {
    let s: f64 = forms.iter().map(|f| log2_inverse_nome(disc, f.a)).sum();
    s.ceil() as u32 + 32 * forms.len() as u32 + 96
}

const RETRIES: u32 = 3;

/// `P_Δ(X)` with exact integer coefficients.
pub fn class_polynomial(disc: i64) -> Result<IntegerPolynomial> {
    let forms = enumerate_reduced_forms(disc)?;
    let mut prec = required_precision(disc, &forms);
    for _ in 0..=RETRIES {
        if let Some(poly) = expand_and_round(&forms, prec)? {
            return Ok(poly);
        }
        prec *= 2;
    }
    Err(Error::PrecisionExhausted { disc, bits: prec / 2 })
}

/// Expands `∏ (X − j)` at `prec` bits; `None` when some coefficient fails the rounding test.
///
/// The forms `(a, b, c)` and `(a, −b, c)` give complex conjugate values of `j`,
/// so each such pair contributes the real quadratic `X² − 2·Re(j)·X + |j|²`;
/// ambiguous forms give real `j`. The expansion then runs in real arithmetic.
fn expand_and_round(forms: &[ReducedForm], prec: u32) -> Result<Option<IntegerPolynomial>> {
    let tol = Float::with_val(prec, 1u32) >> 10;
    let mut poly = vec![Float::with_val(prec, 1u32)];
    let mut tmp = Float::new(prec);
    for f in forms {
        if f.b < 0 {
            continue;
        }
        let j = j_relative(f, prec);
        if f.is_ambiguous() {
            if Float::with_val(prec, j.im.abs_ref()) >= tol {
                return Ok(None);
            }
            // multiply by (X − j)
            poly.push(Float::new(prec));
            for k in (0..poly.len()).rev() {
                tmp.assign(&poly[k] * &j.re);
                if k > 0 {
                    let (lo, hi) = poly.split_at_mut(k);
                    hi[0].assign(&lo[k - 1] - &tmp);
                } else {
                    poly[0].assign(-&tmp);
                }
            }
        } else {
            let t = Float::with_val(prec, &j.re * 2u32);
            let n = j.norm();
            // multiply by (X² − tX + n)
            poly.push(Float::new(prec));
            poly.push(Float::new(prec));
            for k in (0..poly.len()).rev() {
                let mut acc = Float::with_val(prec, &poly[k] * &n);
                if k >= 1 {
                    tmp.assign(&poly[k - 1] * &t);
                    acc -= &tmp;
                }
                if k >= 2 {
                    acc += &poly[k - 2];
                }
                poly[k] = acc;
            }
        }
    }
    let mut coeffs = Vec::with_capacity(poly.len());
    for c in &poly {
        let Some(rounded) = c.to_integer() else {
            return Ok(None);
        };
        let residual = Float::with_val(prec, c - &rounded).abs();
        if residual >= tol {
            return Ok(None);
        }
        coeffs.push(rounded);
    }
    IntegerPolynomial::from_coeffs(coeffs).map(Some)
}
