//! Exact arithmetic in the cyclotomic integers `Z[ζ_N]`.
//!
//! Elements are kept in group-ring form: one integer coefficient per
//! exponent class modulo `N`. That form is not unique (the relation
//! `Φ_N(ζ) = 0` allows many representatives), so ring equality is always
//! decided by reducing the difference modulo the cyclotomic polynomial
//! `Φ_N`. Multiplication by a root of unity and complex conjugation are
//! index permutations in this form.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

/// Dense integer polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[n] += 1;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Quotient and remainder by a monic divisor. Integral because the
    /// divisor's leading coefficient is one.
    ///
    /// Panics if `divisor` is not monic.
    pub fn div_rem_monic(&self, divisor: &IntPoly) -> (IntPoly, IntPoly) {
        assert!(divisor.is_monic(), "div_rem_monic: divisor must be monic");
        let d = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= d {
            return (IntPoly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); rem.len() - d];
        for top in (d..rem.len()).rev() {
            let q = std::mem::take(&mut rem[top]);
            if q.is_zero() {
                continue;
            }
            for (j, c) in divisor.coeffs[..d].iter().enumerate() {
                if !c.is_zero() {
                    rem[top - d + j] -= &q * c;
                }
            }
            quot[top - d] = q;
        }
        rem.truncate(d);
        (IntPoly::new(quot), IntPoly::new(rem))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match (deg, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}x")?,
                (_, true) => write!(f, "x^{deg}")?,
                (_, false) => write!(f, "{mag}x^{deg}")?,
            }
        }
        Ok(())
    }
}

struct PhiEntry {
    poly: IntPoly,
    // Φ_N coefficients as machine integers, when they fit.
    small: Option<Vec<i64>>,
}

fn phi_cache() -> &'static RwLock<HashMap<usize, Arc<PhiEntry>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<PhiEntry>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

pub(crate) fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i != n / i {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn phi_entry(n: usize) -> Arc<PhiEntry> {
    if let Some(e) = phi_cache().read().unwrap().get(&n) {
        return Arc::clone(e);
    }
    // Computed outside the lock; a concurrent insert of the same N is identical.
    let mut poly = IntPoly::x_pow_minus_one(n);
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let (q, r) = poly.div_rem_monic(&phi_entry(d).poly);
        debug_assert!(r.is_zero());
        poly = q;
    }
    let small = poly.coeffs.iter().map(ToPrimitive::to_i64).collect();
    let entry = Arc::new(PhiEntry { poly, small });
    let mut cache = phi_cache().write().unwrap();
    Arc::clone(cache.entry(n).or_insert(entry))
}

/// The `n`-th cyclotomic polynomial, by exact division of `x^n - 1` by
/// `Φ_d` for every proper divisor `d` of `n`. Results are cached.
pub fn cyclotomic_polynomial(n: usize) -> Result<IntPoly> {
    if n == 0 {
        return Err(invalid("cyclotomic polynomial order must be positive"));
    }
    Ok(phi_entry(n).poly.clone())
}

// Long division of Σ buf[t] x^t by the monic `phi`; `None` on i128 overflow.
fn remainder_is_zero_small(buf: &mut [i128], phi: &[i64]) -> Option<bool> {
    let d = phi.len() - 1;
    for top in (d..buf.len()).rev() {
        let q = buf[top];
        if q == 0 {
            continue;
        }
        buf[top] = 0;
        for (j, &c) in phi[..d].iter().enumerate() {
            if c != 0 {
                let slot = &mut buf[top - d + j];
                *slot = slot.checked_sub(q.checked_mul(c as i128)?)?;
            }
        }
    }
    Some(buf[..d.min(buf.len())].iter().all(|&c| c == 0))
}

fn remainder_is_zero_big(coeffs: &[BigInt], phi: &IntPoly) -> bool {
    let (_, r) = IntPoly::new(coeffs.to_vec()).div_rem_monic(phi);
    r.is_zero()
}

/// Reusable zero test for machine-integer coefficient vectors of a fixed
/// order. Keeps its scratch buffer between calls.
pub(crate) struct ZeroTester {
    phi: Arc<PhiEntry>,
    buf: Vec<i128>,
}

impl ZeroTester {
    pub(crate) fn new(order: usize) -> Self {
        assert!(order > 0);
        ZeroTester { phi: phi_entry(order), buf: Vec::with_capacity(order) }
    }

    pub(crate) fn is_zero(&mut self, coeffs: &[i64]) -> bool {
        if let Some(phi) = &self.phi.small {
            self.buf.clear();
            self.buf.extend(coeffs.iter().map(|&c| c as i128));
            if let Some(z) = remainder_is_zero_small(&mut self.buf, phi) {
                return z;
            }
        }
        let big: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
        remainder_is_zero_big(&big, &self.phi.poly)
    }
}

/// An element of `Z[ζ_N]` in group-ring form: `Σ coeffs[t] ζ_N^t`.
///
/// Equality is ring equality and must go through [`CycInt::equals`];
/// there is deliberately no `PartialEq` impl, since two different
/// coefficient vectors can represent the same number.
#[derive(Clone, Debug)]
pub struct CycInt {
    order: usize,
    coeffs: Vec<BigInt>,
}

fn check_order(n: usize) {
    assert!(n > 0, "cyclotomic order must be positive");
}

impl CycInt {
    /// Panics if `order == 0`.
    pub fn zero(order: usize) -> Self {
        check_order(order);
        CycInt { order, coeffs: vec![BigInt::zero(); order] }
    }

    pub fn from_integer(order: usize, value: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = value.into();
        z
    }

    /// `ζ_order^t`, with `t` reduced modulo `order`. Panics if `order == 0`.
    pub fn from_root(order: usize, t: i64) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[t.rem_euclid(order as i64) as usize] = BigInt::one();
        z
    }

    pub fn from_coeffs(order: usize, coeffs: Vec<BigInt>) -> Result<Self> {
        if order == 0 {
            return Err(invalid("cyclotomic order must be positive"));
        }
        if coeffs.len() != order {
            return Err(invalid(format!("expected {order} coefficients, got {}", coeffs.len())));
        }
        Ok(CycInt { order, coeffs })
    }

    pub fn from_i64_coeffs(order: usize, coeffs: &[i64]) -> Result<Self> {
        Self::from_coeffs(order, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn same_order(&self, other: &CycInt) -> Result<()> {
        if self.order != other.order {
            return Err(invalid(format!("cyclotomic order mismatch: {} vs {}", self.order, other.order)));
        }
        Ok(())
    }

    pub fn add(&self, other: &CycInt) -> Result<CycInt> {
        self.same_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CycInt { order: self.order, coeffs })
    }

    pub fn sub(&self, other: &CycInt) -> Result<CycInt> {
        self.same_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CycInt { order: self.order, coeffs })
    }

    pub fn neg(&self) -> CycInt {
        CycInt { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> CycInt {
        let c = c.into();
        CycInt { order: self.order, coeffs: self.coeffs.iter().map(|a| a * &c).collect() }
    }

    /// Cyclic convolution of the coefficient vectors.
    pub fn mul(&self, other: &CycInt) -> Result<CycInt> {
        self.same_order(other)?;
        let n = self.order;
        let mut out = vec![BigInt::zero(); n];
        let rhs: Vec<(usize, &BigInt)> = other.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for &(j, b) in &rhs {
                let k = if i + j >= n { i + j - n } else { i + j };
                out[k] += a * b;
            }
        }
        Ok(CycInt { order: n, coeffs: out })
    }

    /// Multiplication by `ζ^t`, a rotation of the coefficients.
    pub fn mul_root(&self, t: i64) -> CycInt {
        let n = self.order;
        let shift = t.rem_euclid(n as i64) as usize;
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(i + shift) % n] = c.clone();
        }
        CycInt { order: n, coeffs }
    }

    pub fn pow(&self, mut e: u32) -> CycInt {
        let mut result = CycInt::from_integer(self.order, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same order");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same order");
            }
        }
        result
    }

    /// Complex conjugate: `ζ^t ↦ ζ^{-t}`.
    pub fn conj(&self) -> CycInt {
        let n = self.order;
        let mut coeffs = vec![BigInt::zero(); n];
        for (t, c) in self.coeffs.iter().enumerate() {
            coeffs[(n - t) % n] = c.clone();
        }
        CycInt { order: n, coeffs }
    }

    /// Decided by the remainder modulo `Φ_N`.
    pub fn is_zero(&self) -> bool {
        if self.coeffs.iter().all(Zero::is_zero) {
            return true;
        }
        let entry = phi_entry(self.order);
        if let Some(phi) = &entry.small {
            let small: Option<Vec<i128>> = self.coeffs.iter().map(ToPrimitive::to_i128).collect();
            if let Some(mut buf) = small {
                if let Some(z) = remainder_is_zero_small(&mut buf, phi) {
                    return z;
                }
            }
        }
        remainder_is_zero_big(&self.coeffs, &entry.poly)
    }

    pub fn equals(&self, other: &CycInt) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Whether this element equals the rational integer `value`.
    pub fn equals_integer(&self, value: &BigInt) -> bool {
        let mut diff = self.clone();
        diff.coeffs[0] -= value;
        diff.is_zero()
    }

    /// The `t` in `[0, N)` with `self == scale · ζ_N^t`, found by testing
    /// every candidate exactly.
    pub fn find_scaled_root(&self, scale: &BigInt) -> Option<usize> {
        let mut diff = self.clone();
        for t in 0..self.order {
            diff.coeffs[t] -= scale;
            let hit = diff.is_zero();
            diff.coeffs[t] += scale;
            if hit {
                return Some(t);
            }
        }
        None
    }

    /// The exponent `t` with `self == ζ_N^t`, if this is an `N`-th root of unity.
    pub fn as_root_of_unity(&self) -> Option<usize> {
        self.find_scaled_root(&BigInt::one())
    }

    /// Image under `Z[ζ_N] → Z[ζ_{N2}]`, `ζ_N ↦ ζ_{N2}^{N2/N}`.
    pub fn embed(&self, n2: usize) -> Result<CycInt> {
        if n2 == 0 || n2 % self.order != 0 {
            return Err(invalid(format!("cannot embed order {} into order {n2}", self.order)));
        }
        let step = n2 / self.order;
        let mut coeffs = vec![BigInt::zero(); n2];
        for (t, c) in self.coeffs.iter().enumerate() {
            coeffs[t * step] = c.clone();
        }
        Ok(CycInt { order: n2, coeffs })
    }

    /// Double-precision value under `ζ_N ↦ e^{2πi/N}`.
    pub fn eval_complex(&self) -> Complex64 {
        let n = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(t, c)| {
                let w = c.to_f64().unwrap_or(f64::NAN);
                Complex64::from_polar(w, TAU * t as f64 / n)
            })
            .sum()
    }

    /// Sum of absolute coefficient values, as a float.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.order;
        let mut first = true;
        for (t, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match (t, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "z{n}^{t}")?,
                (_, false) => write!(f, "{mag}*z{n}^{t}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// JSON coefficient: a plain integer when it fits, otherwise a decimal string.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireCoef {
    Small(i64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
struct WireCycInt {
    order: usize,
    coeffs: Vec<WireCoef>,
}

impl Serialize for CycInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| match c.to_i64() {
                Some(v) => WireCoef::Small(v),
                None => WireCoef::Big(c.to_string()),
            })
            .collect();
        WireCycInt { order: self.order, coeffs }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CycInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = WireCycInt::deserialize(deserializer)?;
        let coeffs = wire
            .coeffs
            .into_iter()
            .map(|c| match c {
                WireCoef::Small(v) => Ok(BigInt::from(v)),
                WireCoef::Big(s) => s.parse::<BigInt>().map_err(D::Error::custom),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        CycInt::from_coeffs(wire.order, coeffs).map_err(D::Error::custom)
    }
}

/// Euler's totient.
pub fn totient(n: usize) -> usize {
    let mut result = n;
    let mut rest = n;
    let mut p = 2;
    while p * p <= rest {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if rest > 1 {
        result -= result / rest;
    }
    result
}

pub(crate) fn lcm_all(values: &[usize]) -> usize {
    values.iter().fold(1, |acc, &v| acc.lcm(&v))
}
