//! Scaled powers `√m^{1−i} M^i` of a Butson-Hadamard matrix whose unitary
//! has all eigenvalues primitive `k`-th roots of unity.
//!
//! The scaled power always satisfies the Gram identity, so it lies in
//! `BH(m, l)` exactly when every entry is an `l`-th root of unity. Entries
//! are classified exactly: each is matched against `√m^{i−1}·ζ_n^t` over
//! the ladder of orders `n` dividing `lcm(2l, 2k, 2m)`.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{lcm_all, CycInt};
use crate::error::{Error, Result};
use crate::matrices::{circulant, CycMatrix, RootMatrix};
use crate::spectra::{spectrum_report, SpectrumReport};

/// `ζ_n^t` in lowest terms: `gcd(t, n) = 1`, or `(n, t) = (1, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RootExponent {
    pub n: u64,
    pub t: u64,
}

impl RootExponent {
    pub fn reduced(n: u64, t: u64) -> Self {
        let t = t % n;
        let g = t.gcd(&n);
        RootExponent { n: n / g, t: t / g }
    }

    /// Whether `ζ_n^t` lies in `μ_order`.
    pub fn in_mu(&self, order: u64) -> bool {
        order % self.n == 0
    }
}

impl std::fmt::Display for RootExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "z{}^{}", self.n, self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryClass {
    pub row: usize,
    pub col: usize,
    /// The entry equals `√m^{i−1}·ζ_n^t`; `None` if it is not of that form
    /// for any `n` on the ladder.
    pub root_exponent: Option<RootExponent>,
    pub in_mu_l: bool,
    pub in_mu_k: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerVerdict {
    pub i: u64,
    pub all_in_mu_l: bool,
    pub all_in_mu_k: bool,
    /// Distinct classified entry values, sorted.
    pub distinct_values: Vec<RootExponent>,
    pub unclassified: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureVerdict {
    pub k: u64,
    /// One entry per `i` in `[1, k]` coprime to `k`, increasing.
    pub per_i: Vec<PowerVerdict>,
    pub holds: bool,
    pub counterexample_i: Option<u64>,
}

fn ladder_order(m: usize, l: usize, k: u64) -> usize {
    lcm_all(&[2 * l, 2 * k as usize, 2 * m])
}

// Exponent t with e == scale·ζ_order^t, trying Z[ζ_l] before the ladder ring.
fn scaled_root_on_ladder(e: &CycInt, scale: &BigInt, ladder: usize) -> Result<Option<RootExponent>> {
    if let Some(t) = e.find_scaled_root(scale) {
        return Ok(Some(RootExponent::reduced(e.order() as u64, t as u64)));
    }
    if ladder == e.order() {
        return Ok(None);
    }
    let wide = e.embed(ladder)?;
    Ok(wide.find_scaled_root(scale).map(|t| RootExponent::reduced(ladder as u64, t as u64)))
}

fn classify_entry(e: &CycInt, m: usize, i: u64, ladder: usize) -> Result<Option<RootExponent>> {
    let m_big = BigInt::from(m);
    if i % 2 == 1 {
        return scaled_root_on_ladder(e, &m_big.pow(((i - 1) / 2) as u32), ladder);
    }
    // e² = m^{i−1}·ζ_n^s, so e = ±√m^{i−1}·ζ_{2n}^s; the two candidates are
    // 2·√m^{i−1} ≥ 2 apart and the sign is read off numerically.
    let square = e.mul(e)?;
    let Some(sq) = scaled_root_on_ladder(&square, &m_big.pow((i - 1) as u32), ladder)? else {
        return Ok(None);
    };
    let target = e.eval_complex() / (m as f64).sqrt().powi((i - 1) as i32);
    let double = 2 * sq.n;
    let candidate = |t: u64| num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / double as f64);
    let t =
        if (candidate(sq.t) - target).norm() <= (candidate(sq.t + sq.n) - target).norm() { sq.t } else { sq.t + sq.n };
    Ok(Some(RootExponent::reduced(double, t)))
}

fn classify_power_matrix(power: &CycMatrix, m: usize, l: usize, i: u64, k: u64) -> Result<Vec<EntryClass>> {
    let ladder = ladder_order(m, l, k);
    let mut out = Vec::with_capacity(m * m);
    for row in 0..m {
        for col in 0..m {
            let root_exponent = classify_entry(power.get(row, col), m, i, ladder)?;
            out.push(EntryClass {
                row,
                col,
                root_exponent,
                in_mu_l: root_exponent.is_some_and(|r| r.in_mu(l as u64)),
                in_mu_k: root_exponent.is_some_and(|r| r.in_mu(k)),
            });
        }
    }
    Ok(out)
}

/// Classify the entries of `√m^{1−i} M^i` for `i ≥ 1`, row-major.
pub fn classify_scaled_power(mat: &RootMatrix, i: u64, k: u64) -> Result<Vec<EntryClass>> {
    if i == 0 || k == 0 {
        return Err(crate::error::invalid("i and k must be positive"));
    }
    let i32_exp = u32::try_from(i).map_err(|_| crate::error::invalid("exponent too large"))?;
    let power = mat.to_cyc().pow(i32_exp);
    classify_power_matrix(&power, mat.m(), mat.l(), i, k)
}

fn summarize(i: u64, classes: &[EntryClass]) -> PowerVerdict {
    let mut distinct: Vec<RootExponent> = classes.iter().filter_map(|c| c.root_exponent).collect();
    distinct.sort();
    distinct.dedup();
    PowerVerdict {
        i,
        all_in_mu_l: classes.iter().all(|c| c.in_mu_l),
        all_in_mu_k: classes.iter().all(|c| c.in_mu_k),
        distinct_values: distinct,
        unclassified: classes.iter().filter(|c| c.root_exponent.is_none()).count(),
    }
}

/// Run the test for every `i ∈ [1, k]` coprime to `k`, given a spectrum
/// report for `mat`. Larger `i` repeat with period `k` because `B^k = I`.
pub fn conjecture_test_with(mat: &RootMatrix, spectrum: &SpectrumReport) -> Result<ConjectureVerdict> {
    let Some(k) = spectrum.common_k else {
        return Err(Error::NoCommonOrder(
            spectrum.failure.as_ref().map_or_else(|| "no common order".to_string(), ToString::to_string),
        ));
    };
    let (m, l) = (mat.m(), mat.l());
    let base = mat.to_cyc();
    let mut power = base.clone();
    let mut per_i = Vec::new();
    for i in 1..=k {
        if i > 1 {
            power = power.mul(&base)?;
        }
        if i.gcd(&k) != 1 {
            continue;
        }
        let classes = classify_power_matrix(&power, m, l, i, k)?;
        per_i.push(summarize(i, &classes));
    }
    let counterexample_i = per_i.iter().find(|v| !v.all_in_mu_l).map(|v| v.i);
    Ok(ConjectureVerdict { k, per_i, holds: counterexample_i.is_none(), counterexample_i })
}

/// Spectrum report followed by [`conjecture_test_with`]. Fails with
/// [`Error::NoCommonOrder`] when the eigenvalues have no common order.
pub fn conjecture_test(mat: &RootMatrix) -> Result<ConjectureVerdict> {
    let spectrum = spectrum_report(mat)?;
    conjecture_test_with(mat, &spectrum)
}

#[derive(Clone, Debug)]
pub struct NamedMatrix {
    pub name: &'static str,
    pub description: &'static str,
    pub matrix: RootMatrix,
}

/// The three reference matrices: a BH(2,4) with k = 24, the circulant
/// BH(5,5) counterexample with k = 10, and a BH(4,2) with k = 3.
pub fn reference_examples() -> [NamedMatrix; 3] {
    [
        NamedMatrix {
            name: "ex1",
            description: "BH(2,4) [[1,1],[i,-i]]; eigenvalues of M/sqrt(2) are primitive 24th roots",
            matrix: RootMatrix::new(4, vec![vec![0, 0], vec![1, 3]]).expect("valid"),
        },
        NamedMatrix {
            name: "ex2",
            description: "circulant symmetric BH(5,5) with first row exponents (1,3,4,4,3); k = 10, fails at i = 3",
            matrix: circulant(5, &[1, 3, 4, 4, 3]).expect("valid"),
        },
        NamedMatrix {
            name: "ex3",
            description: "BH(4,2) Hadamard matrix with constant diagonal; k = 3",
            matrix: RootMatrix::new(2, vec![vec![1, 0, 1, 0], vec![1, 1, 1, 1], vec![0, 0, 1, 1], vec![1, 0, 0, 1]])
                .expect("valid"),
        },
    ]
}

pub fn builtin(name: &str) -> Option<NamedMatrix> {
    reference_examples().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{power, verify_bh};

    fn ex(name: &str) -> RootMatrix {
        builtin(name).unwrap().matrix
    }

    #[test]
    fn builtins_verify() {
        for e in reference_examples() {
            assert!(verify_bh(&e.matrix).is_bh, "{}", e.name);
        }
        let m = ex("ex2");
        assert!(m.is_symmetric() && m.is_circulant() && m.is_unreal());
        assert!(builtin("ex4").is_none());
    }

    #[test]
    fn example_one_at_five() {
        let classes = classify_scaled_power(&ex("ex1"), 5, 24).unwrap();
        let got: Vec<RootExponent> = classes.iter().map(|c| c.root_exponent.unwrap()).collect();
        let want = [(4, 1), (1, 0), (4, 1), (2, 1)].map(|(n, t)| RootExponent { n, t });
        assert_eq!(got, want);
        assert!(classes.iter().all(|c| c.in_mu_l));
    }

    #[test]
    fn example_two_at_three() {
        let classes = classify_scaled_power(&ex("ex2"), 3, 10).unwrap();
        let summary = summarize(3, &classes);
        let want: Vec<RootExponent> = [1, 3, 9].iter().map(|&t| RootExponent { n: 10, t }).collect();
        assert_eq!(summary.distinct_values, want);
        assert!(classes.iter().all(|c| !c.in_mu_l && c.in_mu_k));
    }

    #[test]
    fn example_three_at_two() {
        let classes = classify_scaled_power(&ex("ex3"), 2, 3).unwrap();
        assert!(classes.iter().all(|c| c.in_mu_l));
        assert!(!summarize(2, &classes).all_in_mu_k);
        // -1 = ζ_2 is the entry that escapes μ_3.
        assert!(classes.iter().all(|c| c.in_mu_k == (c.root_exponent.unwrap().n == 1)));
        let signs: Vec<u64> = classes.iter().map(|c| c.root_exponent.unwrap().t).collect();
        assert_eq!(signs, vec![1, 1, 0, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn verdicts() {
        let v2 = conjecture_test(&ex("ex2")).unwrap();
        assert_eq!((v2.k, v2.holds, v2.counterexample_i), (10, false, Some(3)));
        assert_eq!(v2.per_i.iter().map(|v| v.i).collect::<Vec<_>>(), vec![1, 3, 7, 9]);

        let v1 = conjecture_test(&ex("ex1")).unwrap();
        assert_eq!(v1.k, 24);
        assert!(v1.per_i.iter().find(|v| v.i == 5).unwrap().all_in_mu_l);

        let v3 = conjecture_test(&ex("ex3")).unwrap();
        assert!(v3.holds);
        let at2 = v3.per_i.iter().find(|v| v.i == 2).unwrap();
        assert!(at2.all_in_mu_l && !at2.all_in_mu_k);
    }

    #[test]
    fn first_power_always_passes() {
        for e in reference_examples() {
            let classes = classify_scaled_power(&e.matrix, 1, 7).unwrap();
            for c in classes {
                let r = c.root_exponent.unwrap();
                let l = e.matrix.l() as u64;
                assert_eq!(r, RootExponent::reduced(l, e.matrix.get(c.row, c.col) as u64));
                assert!(c.in_mu_l);
            }
        }
    }

    #[test]
    fn no_common_order_is_an_error() {
        let err = conjecture_test(&crate::matrices::fourier(2)).unwrap_err();
        assert!(matches!(err, Error::NoCommonOrder(_)));
    }

    #[test]
    fn incremental_powers_match_binary_powers() {
        let m = ex("ex2");
        let a = classify_scaled_power(&m, 7, 10).unwrap();
        let b = classify_power_matrix(&power(&m, 7), 5, 5, 7, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduced_exponents() {
        assert_eq!(RootExponent::reduced(10, 4), RootExponent { n: 5, t: 2 });
        assert_eq!(RootExponent::reduced(10, 0), RootExponent { n: 1, t: 0 });
        assert_eq!(RootExponent::reduced(4, 2), RootExponent { n: 2, t: 1 });
        assert!(RootExponent { n: 2, t: 1 }.in_mu(4));
        assert!(!RootExponent { n: 2, t: 1 }.in_mu(3));
    }
}
