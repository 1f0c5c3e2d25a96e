//! Eigenvalues of the unitary matrix `B = M/√m` associated with a
//! Butson-Hadamard matrix `M`, and their orders as roots of unity.
//!
//! Circulant inputs take an exact path: the eigenvalues of `M` are the
//! first-row polynomial evaluated at the powers of `e^{2πi/m}`, which are
//! elements of `Z[ζ_L]` with `L = lcm(l, m)`. `√m` is never represented;
//! every exact order test is restated as an identity between integer
//! powers. Everything else goes through a dense complex eigensolver and a
//! continued-fraction order detector.

mod eigen;

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{divisors, lcm_all, totient, CycInt};
use crate::error::{invalid, Error, Result};
use crate::matrices::{verify_bh, RootMatrix};

use eigen::Dense;

/// Default tolerance for `|λ^q − 1|` in [`order_numeric`].
pub const ORDER_EPS: f64 = 1e-8;

/// Residual bound, relative to the Frobenius norm of `B`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// A reduced fraction of a full turn: the angle `2π·num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TurnFraction {
    pub num: u64,
    pub den: u64,
}

impl std::fmt::Display for TurnFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    ExactCirculant,
    Numeric,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenFinding {
    /// Eigenvalue of `B`.
    pub value_numeric: Complex64,
    /// `h(ξ^j) ∈ Z[ζ_L]`, the matching eigenvalue of `M`, for circulant input.
    pub exact_h: Option<CycInt>,
    /// Least `k ≥ 1` with `λ^k = 1`.
    pub order: Option<u64>,
    pub primitive: bool,
    pub angle: Option<TurnFraction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumFailure {
    /// The exact path proved eigenvalue `index` is not a root of unity.
    NonRootEigenvalue {
        index: usize,
    },
    /// No order up to `bound` was detected for eigenvalue `index`.
    OrderBoundExceeded {
        index: usize,
        bound: u64,
    },
    MixedOrders {
        orders: Vec<u64>,
    },
}

impl std::fmt::Display for SpectrumFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectrumFailure::NonRootEigenvalue { index } => {
                write!(f, "eigenvalue {index} is not a root of unity")
            }
            SpectrumFailure::OrderBoundExceeded { index, bound } => {
                write!(f, "no order <= {bound} found for eigenvalue {index}")
            }
            SpectrumFailure::MixedOrders { orders } => {
                write!(f, "eigenvalue orders differ: {orders:?}")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub method: SpectrumMethod,
    pub findings: Vec<EigenFinding>,
    pub common_k: Option<u64>,
    pub failure: Option<SpectrumFailure>,
}

/// Angle of `z` as a fraction of a full turn, in `[0, 1)`.
pub fn principal_turn(z: Complex64) -> f64 {
    let t = z.arg() / TAU;
    let t = if t < 0.0 { t + 1.0 } else { t };
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Sorts by principal angle, then modulus.
pub fn sort_by_angle(values: &mut [Complex64]) {
    values.sort_by(|a, b| principal_turn(*a).total_cmp(&principal_turn(*b)).then(a.norm().total_cmp(&b.norm())));
}

/// The angle of a root of unity of known order `k` as a reduced fraction.
pub fn turn_fraction(value: Complex64, order: u64) -> TurnFraction {
    let num = (principal_turn(value) * order as f64).round() as u64 % order;
    let g = num.gcd(&order);
    TurnFraction { num: num / g, den: order / g }
}

/// Eigenvalues `h_j = Σ_s ζ_L^{a_s·L/l + j·s·L/m}` of a circulant `M`,
/// `j = 0..m`, as exact elements of `Z[ζ_L]`, `L = lcm(l, m)`.
pub fn circulant_eigenvalues_exact(mat: &RootMatrix) -> Result<Vec<CycInt>> {
    if !mat.is_circulant() {
        return Err(invalid("matrix is not circulant"));
    }
    let (m, l) = (mat.m(), mat.l());
    let big_l = l.lcm(&m);
    let (step_a, step_x) = (big_l / l, big_l / m);
    let row = mat.row(0);
    (0..m)
        .map(|j| {
            let mut coeffs = vec![0i64; big_l];
            for (s, &a) in row.iter().enumerate() {
                coeffs[(a as usize * step_a + j * s * step_x) % big_l] += 1;
            }
            CycInt::from_i64_coeffs(big_l, &coeffs)
        })
        .collect()
}

fn to_dense_unitary(mat: &RootMatrix) -> Dense {
    let m = mat.m();
    let scale = 1.0 / (m as f64).sqrt();
    let l = mat.l() as f64;
    let a = mat.exps().iter().map(|&e| Complex64::from_polar(scale, TAU * e as f64 / l)).collect();
    Dense { n: m, a }
}

/// Eigenvalues of `B = M/√m`, sorted by principal angle.
///
/// Fails with [`Error::NumericFailure`] if the QR iteration does not
/// converge or an eigenpair residual exceeds `1e-9·‖B‖_F`.
pub fn eig_numeric(mat: &RootMatrix) -> Result<Vec<Complex64>> {
    let b = to_dense_unitary(mat);
    let tol = RESIDUAL_TOL * b.frobenius();
    let pairs = eigen::eigen_with_residuals(&b)?;
    if let Some(index) = pairs.iter().position(|&(_, res)| res.is_nan() || res > tol) {
        return Err(Error::NumericFailure { index });
    }
    let mut values: Vec<Complex64> = pairs.into_iter().map(|p| p.0).collect();
    sort_by_angle(&mut values);
    Ok(values)
}

/// Exact order of `λ = h/√m`, searching the divisors of `bound` in
/// increasing order.
///
/// Even `d`: `λ^d = 1` iff `h^d = m^{d/2}`. Odd `d`: `h^{2d} = m^d` gives
/// `λ^d = ±1`, and the sign of `h^d` is read off numerically; the two
/// candidates `±m^{d/2}` are at distance at least 2.
pub fn order_exact(h: &CycInt, m: u64, bound: u64) -> Result<Option<u64>> {
    let m_big = BigInt::from(m);
    if !h.mul(&h.conj())?.equals_integer(&m_big) {
        return Err(invalid(format!("|h|^2 is not the integer {m}")));
    }
    for d in divisors(bound as usize) {
        let d = d as u64;
        let found = if d % 2 == 0 {
            h.pow(d as u32).equals_integer(&m_big.pow(d as u32 / 2))
        } else {
            let hd = h.pow(d as u32);
            hd.mul(&hd)?.equals_integer(&m_big.pow(d as u32)) && hd.eval_complex().re > 0.0
        };
        if found {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Order of a numerically given root of unity: walks the continued-fraction
/// convergents `p/q` of `arg(λ)/2π` with `q ≤ q_max` and returns the first
/// `q` with `|λ^q − 1| < eps`.
pub fn order_numeric(lambda: Complex64, q_max: u64, eps: f64) -> Option<u64> {
    let theta = principal_turn(lambda);
    let (mut p_prev, mut p) = (1u64, 0u64);
    let (mut q_prev, mut q) = (0u64, 1u64);
    let mut x = theta;
    let mut first = true;
    loop {
        let a = x.floor();
        if !first {
            if a > (q_max as f64) {
                return None;
            }
            let a = a as u64;
            let p_next = a.checked_mul(p)?.checked_add(p_prev)?;
            let q_next = a.checked_mul(q)?.checked_add(q_prev)?;
            (p_prev, p, q_prev, q) = (p, p_next, q, q_next);
        }
        first = false;
        if q > q_max {
            return None;
        }
        if q <= i32::MAX as u64 && (lambda.powi(q as i32) - 1.0).norm() < eps {
            return Some(q / p.gcd(&q).max(1));
        }
        let frac = x - a;
        if frac <= f64::EPSILON {
            return None;
        }
        x = 1.0 / frac;
    }
}

/// Orders available to `h/√m` with `h ∈ Z[ζ_L]` divide `lcm(2, L, 4m)`.
pub fn exact_order_bound(m: usize, l: usize) -> u64 {
    lcm_all(&[2, l.lcm(&m), 4 * m]) as u64
}

/// Largest order a primitive root of unity can have as an eigenvalue of
/// `B`: its degree is at most `m·φ(lcm(l, 4m))`, and `φ(k) ≥ √(k/2)`.
pub fn numeric_order_bound(m: usize, l: usize) -> u64 {
    let degree = (m * totient(lcm_all(&[2, l, 4 * m]))) as u64;
    2 * degree * degree
}

fn assemble(
    method: SpectrumMethod,
    findings: Vec<EigenFinding>,
    missing: impl Fn(usize) -> SpectrumFailure,
) -> SpectrumReport {
    let mut failure = None;
    if let Some(index) = findings.iter().position(|f| f.order.is_none()) {
        failure = Some(missing(index));
    } else {
        let orders: Vec<u64> = findings.iter().filter_map(|f| f.order).collect();
        if orders.windows(2).any(|w| w[0] != w[1]) {
            failure = Some(SpectrumFailure::MixedOrders { orders });
        }
    }
    let common_k = match failure {
        None => findings.first().and_then(|f| f.order),
        Some(_) => None,
    };
    SpectrumReport { method, findings, common_k, failure }
}

/// Spectrum of the unitary associated with a BH matrix, with the common
/// primitive order `k` when every eigenvalue has the same order.
pub fn spectrum_report(mat: &RootMatrix) -> Result<SpectrumReport> {
    if !verify_bh(mat).is_bh {
        return Err(Error::Precondition("matrix is not Butson-Hadamard".into()));
    }
    let (m, l) = (mat.m(), mat.l());
    let sqrt_m = (m as f64).sqrt();
    if mat.is_circulant() {
        let bound = exact_order_bound(m, l);
        let findings = circulant_eigenvalues_exact(mat)?
            .into_iter()
            .map(|h| {
                let value = h.eval_complex() / sqrt_m;
                let order = order_exact(&h, m as u64, bound)?;
                Ok(EigenFinding {
                    value_numeric: value,
                    angle: order.map(|k| turn_fraction(value, k)),
                    primitive: order.is_some(),
                    order,
                    exact_h: Some(h),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(SpectrumMethod::ExactCirculant, findings, |index| SpectrumFailure::NonRootEigenvalue { index }))
    } else {
        let bound = numeric_order_bound(m, l);
        let findings = eig_numeric(mat)?
            .into_iter()
            .map(|value| {
                let order = order_numeric(value, bound, ORDER_EPS);
                EigenFinding {
                    value_numeric: value,
                    exact_h: None,
                    angle: order.map(|k| turn_fraction(value, k)),
                    primitive: order.is_some(),
                    order,
                }
            })
            .collect();
        Ok(assemble(SpectrumMethod::Numeric, findings, |index| SpectrumFailure::OrderBoundExceeded { index, bound }))
    }
}

/// Largest distance under a greedy nearest-neighbour matching of two
/// equal-length multisets; `INFINITY` on length mismatch.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (idx, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("lengths match");
        used[idx] = true;
        worst = worst.max(d);
    }
    worst
}
