//! Butson-Hadamard matrices stored as exponent matrices over `Z/l`.
//!
//! Entry `(j, k)` of a [`RootMatrix`] with root order `l` stands for
//! `ζ_l^{exps[j][k]}`. Products of entries are exponent sums, so the Gram
//! cells of `M M^*` are plain coefficient histograms over `Z/l` and can be
//! tested for zero without building any [`CycInt`].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CycInt, ZeroTester};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootMatrix {
    m: usize,
    l: usize,
    exps: Vec<u32>,
}

impl RootMatrix {
    pub fn new(l: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        let m = rows.len();
        if let Some((j, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(invalid(format!("row {j} has {} entries, expected {m}", r.len())));
        }
        Self::from_flat(m, l, rows.into_iter().flatten().collect())
    }

    /// Row-major exponents.
    pub fn from_flat(m: usize, l: usize, exps: Vec<u32>) -> Result<Self> {
        if m == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if l == 0 {
            return Err(invalid("root order must be positive"));
        }
        if exps.len() != m * m {
            return Err(invalid(format!("expected {} exponents, got {}", m * m, exps.len())));
        }
        if let Some(pos) = exps.iter().position(|&a| a as usize >= l) {
            return Err(invalid(format!("exponent {} at ({}, {}) is outside [0, {l})", exps[pos], pos / m, pos % m)));
        }
        Ok(RootMatrix { m, l, exps })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn get(&self, j: usize, k: usize) -> u32 {
        self.exps[j * self.m + k]
    }

    pub fn row(&self, j: usize) -> &[u32] {
        &self.exps[j * self.m..(j + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.exps.chunks(self.m)
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn to_cyc(&self) -> CycMatrix {
        let entries = self.exps.iter().map(|&a| CycInt::from_root(self.l, a as i64)).collect();
        CycMatrix { m: self.m, order: self.l, entries }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.m).all(|j| (j + 1..self.m).all(|k| self.get(j, k) == self.get(k, j)))
    }

    pub fn is_circulant(&self) -> bool {
        let first = self.row(0);
        (1..self.m).all(|j| (0..self.m).all(|k| self.get(j, k) == first[(k + self.m - j) % self.m]))
    }

    /// No entry is real, i.e. no exponent `a` with `2a ≡ 0 (mod l)`.
    pub fn is_unreal(&self) -> bool {
        self.exps.iter().all(|&a| (2 * a as usize) % self.l != 0)
    }
}

impl fmt::Display for RootMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_text(self))
    }
}

/// Row `j` is the first row shifted cyclically `j` places to the right.
pub fn circulant(l: usize, first_row: &[u32]) -> Result<RootMatrix> {
    let m = first_row.len();
    let mut exps = Vec::with_capacity(m * m);
    for j in 0..m {
        exps.extend((0..m).map(|k| first_row[(k + m - j) % m]));
    }
    RootMatrix::from_flat(m, l, exps)
}

/// The Fourier matrix `exps[j][k] = jk mod m` over `μ_m`.
pub fn fourier(m: usize) -> RootMatrix {
    assert!(m > 0, "fourier: dimension must be positive");
    let exps = (0..m).flat_map(|j| (0..m).map(move |k| ((j * k) % m) as u32)).collect();
    RootMatrix { m, l: m, exps }
}

/// Kronecker product over `μ_L`, `L = lcm(l_a, l_b)`.
pub fn kronecker(a: &RootMatrix, b: &RootMatrix) -> RootMatrix {
    let l = a.l.lcm(&b.l);
    let (sa, sb) = ((l / a.l) as u64, (l / b.l) as u64);
    let m = a.m * b.m;
    let mut exps = Vec::with_capacity(m * m);
    for ja in 0..a.m {
        for jb in 0..b.m {
            for ka in 0..a.m {
                for kb in 0..b.m {
                    let e = (a.get(ja, ka) as u64 * sa + b.get(jb, kb) as u64 * sb) % l as u64;
                    exps.push(e as u32);
                }
            }
        }
    }
    RootMatrix { m, l, exps }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramFailure {
    pub row: usize,
    pub col: usize,
    /// The offending cell of `M M^*`.
    pub value: CycInt,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BhReport {
    pub is_bh: bool,
    pub failure: Option<GramFailure>,
}

/// Exact check of `M M^* = m I` over `Z[ζ_l]`.
///
/// Only the upper triangle and diagonal are evaluated; the lower triangle
/// is the conjugate. The first failing cell in row-major order is reported.
pub fn verify_bh(mat: &RootMatrix) -> BhReport {
    let (m, l) = (mat.m, mat.l);
    let mut tester = ZeroTester::new(l);
    let mut counts = vec![0i64; l];
    for j in 0..m {
        for k in j..m {
            counts.iter_mut().for_each(|c| *c = 0);
            for (&a, &b) in mat.row(j).iter().zip(mat.row(k)) {
                counts[(a as usize + l - b as usize) % l] += 1;
            }
            if j == k {
                counts[0] -= m as i64;
            }
            if !tester.is_zero(&counts) {
                if j == k {
                    counts[0] += m as i64;
                }
                let value = CycInt::from_i64_coeffs(l, &counts).expect("length l");
                return BhReport { is_bh: false, failure: Some(GramFailure { row: j, col: k, value }) };
            }
        }
    }
    BhReport { is_bh: true, failure: None }
}

/// Square matrix of [`CycInt`] entries of a common order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycMatrix {
    m: usize,
    order: usize,
    entries: Vec<CycInt>,
}

impl CycMatrix {
    pub fn new(m: usize, order: usize, entries: Vec<CycInt>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(invalid(format!("expected {} entries, got {}", m * m, entries.len())));
        }
        if entries.iter().any(|e| e.order() != order) {
            return Err(invalid("all entries must share one cyclotomic order"));
        }
        Ok(CycMatrix { m, order, entries })
    }

    pub fn scalar(m: usize, order: usize, value: impl Into<BigInt>) -> Self {
        let value = value.into();
        let entries = (0..m * m)
            .map(|p| if p / m == p % m { CycInt::from_integer(order, value.clone()) } else { CycInt::zero(order) })
            .collect();
        CycMatrix { m, order, entries }
    }

    pub fn identity(m: usize, order: usize) -> Self {
        Self::scalar(m, order, 1)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, j: usize, k: usize) -> &CycInt {
        &self.entries[j * self.m + k]
    }

    pub fn entries(&self) -> &[CycInt] {
        &self.entries
    }

    pub fn mul(&self, other: &CycMatrix) -> Result<CycMatrix> {
        if self.m != other.m || self.order != other.order {
            return Err(invalid("matrix shape or order mismatch"));
        }
        let m = self.m;
        let mut entries = Vec::with_capacity(m * m);
        for j in 0..m {
            for k in 0..m {
                let mut acc = CycInt::zero(self.order);
                for c in 0..m {
                    let a = self.get(j, c);
                    let b = other.get(c, k);
                    if a.coeffs().iter().all(Zero::is_zero) || b.coeffs().iter().all(Zero::is_zero) {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
                entries.push(acc);
            }
        }
        Ok(CycMatrix { m, order: self.order, entries })
    }

    pub fn conj_transpose(&self) -> CycMatrix {
        let m = self.m;
        let entries = (0..m * m).map(|p| self.get(p % m, p / m).conj()).collect();
        CycMatrix { m, order: self.order, entries }
    }

    pub fn gram(&self) -> CycMatrix {
        self.mul(&self.conj_transpose()).expect("same shape")
    }

    /// Entry-wise ring equality.
    pub fn equals(&self, other: &CycMatrix) -> Result<bool> {
        if self.m != other.m || self.order != other.order {
            return Err(invalid("matrix shape or order mismatch"));
        }
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if !a.equals(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equals_scalar(&self, value: &BigInt) -> bool {
        let m = self.m;
        self.entries.iter().enumerate().all(|(p, e)| if p / m == p % m { e.equals_integer(value) } else { e.is_zero() })
    }

    pub fn pow(&self, mut e: u32) -> CycMatrix {
        let mut result = CycMatrix::identity(self.m, self.order);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same shape");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same shape");
            }
        }
        result
    }
}

/// `M^i` over `Z[ζ_l]` by binary exponentiation. `i = 0` gives the identity.
pub fn power(mat: &RootMatrix, i: u32) -> CycMatrix {
    mat.to_cyc().pow(i)
}

/// Parse failure with 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

// (1-based column, token) pairs.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_exponent_row(
    line_no: usize,
    line: &str,
    m: usize,
    l: usize,
    out: &mut Vec<u32>,
) -> std::result::Result<(), ParseError> {
    let toks = tokens(line);
    for (idx, &(col, tok)) in toks.iter().enumerate() {
        if idx >= m {
            return Err(perr(line_no, col, format!("too many entries: expected {m}")));
        }
        let v: u64 =
            tok.parse().map_err(|_| perr(line_no, col, format!("expected a non-negative integer, found `{tok}`")))?;
        if v >= l as u64 {
            return Err(perr(line_no, col, format!("exponent {v} is outside [0, {l})")));
        }
        out.push(v as u32);
    }
    if toks.len() < m {
        let col = line.trim_end().len() + 1;
        return Err(perr(line_no, col, format!("too few entries: expected {m}, found {}", toks.len())));
    }
    Ok(())
}

fn parse_positive(line_no: usize, (col, tok): (usize, &str), what: &str) -> std::result::Result<usize, ParseError> {
    match tok.parse::<usize>() {
        Ok(v) if v > 0 && v <= u32::MAX as usize => Ok(v),
        _ => Err(perr(line_no, col, format!("{what} must be a positive integer, found `{tok}`"))),
    }
}

/// Parse the matrix text format:
///
/// ```text
/// bh <m> <l>
/// <m rows of m exponents in [0, l)>
/// ```
///
/// or the circulant shorthand `circ <m> <l>` followed by the first row.
/// Trailing blank lines are ignored.
pub fn parse_matrix(text: &str) -> std::result::Result<RootMatrix, ParseError> {
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    let header = lines.first().ok_or_else(|| perr(1, 1, "empty input"))?;
    let head = tokens(header);
    if head.len() != 3 {
        let col = head.get(3).map_or(header.trim_end().len() + 1, |t| t.0);
        return Err(perr(1, col, "header must be `bh <m> <l>` or `circ <m> <l>`"));
    }
    let circ = match head[0].1 {
        "bh" => false,
        "circ" => true,
        other => return Err(perr(1, head[0].0, format!("unknown matrix kind `{other}`"))),
    };
    let m = parse_positive(1, head[1], "dimension")?;
    let l = parse_positive(1, head[2], "root order")?;
    let expected_rows = if circ { 1 } else { m };
    let mut exps = Vec::with_capacity(m * expected_rows);
    for r in 0..expected_rows {
        let line_no = r + 2;
        let line =
            lines.get(r + 1).ok_or_else(|| perr(line_no, 1, format!("missing row: expected {expected_rows} rows")))?;
        parse_exponent_row(line_no, line, m, l, &mut exps)?;
    }
    if lines.len() > expected_rows + 1 {
        let line_no = expected_rows + 2;
        let col = tokens(lines[expected_rows + 1]).first().map_or(1, |t| t.0);
        return Err(perr(line_no, col, format!("unexpected extra row: expected {expected_rows} rows")));
    }
    let built = if circ { circulant(l, &exps) } else { RootMatrix::from_flat(m, l, exps) };
    built.map_err(|e| perr(1, 1, e.to_string()))
}

/// Full `bh` form of a matrix, newline terminated.
pub fn to_text(mat: &RootMatrix) -> String {
    let mut s = format!("bh {} {}\n", mat.m, mat.l);
    for row in mat.rows() {
        let cells: Vec<String> = row.iter().map(u32::to_string).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

/// `circ` shorthand for a circulant matrix, or `None` if it is not circulant.
pub fn to_circ_text(mat: &RootMatrix) -> Option<String> {
    if !mat.is_circulant() {
        return None;
    }
    let cells: Vec<String> = mat.row(0).iter().map(u32::to_string).collect();
    Some(format!("circ {} {}\n{}\n", mat.m, mat.l, cells.join(" ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> RootMatrix {
        RootMatrix::new(4, vec![vec![0, 0], vec![1, 3]]).unwrap()
    }

    fn ex2() -> RootMatrix {
        circulant(5, &[1, 3, 4, 4, 3]).unwrap()
    }

    fn ex3() -> RootMatrix {
        RootMatrix::new(2, vec![vec![1, 0, 1, 0], vec![1, 1, 1, 1], vec![0, 0, 1, 1], vec![1, 0, 0, 1]]).unwrap()
    }

    fn exponent_matrix(c: &CycMatrix, scale: i64) -> Vec<u32> {
        c.entries().iter().map(|e| e.find_scaled_root(&BigInt::from(scale)).expect("scaled root") as u32).collect()
    }

    #[test]
    fn golden_matrices_are_bh() {
        assert!(verify_bh(&ex1()).is_bh);
        assert!(verify_bh(&ex2()).is_bh);
        assert!(verify_bh(&ex3()).is_bh);
    }

    #[test]
    fn all_ones_is_not_bh() {
        let ones = RootMatrix::new(2, vec![vec![0, 0], vec![0, 0]]).unwrap();
        let report = verify_bh(&ones);
        assert!(!report.is_bh);
        let f = report.failure.unwrap();
        assert_eq!((f.row, f.col), (0, 1));
        assert!(f.value.equals_integer(&BigInt::from(2)));
    }

    #[test]
    fn circulant_layout() {
        let m = ex2();
        assert_eq!(m.row(1), &[3, 1, 3, 4, 4]);
        assert_eq!(m.row(4), &[3, 4, 4, 3, 1]);
        assert_eq!(circulant(2, &[0]).unwrap().exps(), &[0]);
        assert_eq!(circulant(4, &[0, 1]).unwrap().exps(), &[0, 1, 1, 0]);
        assert!(circulant(5, &[1, 5]).is_err());
    }

    #[test]
    fn structural_predicates() {
        let m = ex2();
        assert!(m.is_symmetric() && m.is_circulant() && m.is_unreal());
        assert!(!ex3().is_unreal());
        let one = RootMatrix::new(1, vec![vec![0]]).unwrap();
        assert!(one.is_symmetric() && one.is_circulant() && !one.is_unreal());
        assert!(!ex1().is_symmetric());
        assert!(!ex1().is_circulant());
    }

    #[test]
    fn example_one_fifth_power() {
        let p = power(&ex1(), 5);
        assert_eq!(exponent_matrix(&p, 4), vec![1, 0, 1, 2]);
    }

    #[test]
    fn example_three_square() {
        let p = power(&ex3(), 2);
        assert_eq!(exponent_matrix(&p, 2), vec![1, 1, 0, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn first_power_is_the_matrix() {
        let m = ex2();
        let p = power(&m, 1);
        for j in 0..5 {
            for k in 0..5 {
                assert!(p.get(j, k).equals(&CycInt::from_root(5, m.get(j, k) as i64)).unwrap());
            }
        }
    }

    #[test]
    fn kronecker_products() {
        let f2 = fourier(2);
        let h4 = kronecker(&f2, &f2);
        assert_eq!((h4.m(), h4.l()), (4, 2));
        assert!(verify_bh(&h4).is_bh);
        let one = RootMatrix::new(1, vec![vec![0]]).unwrap();
        assert_eq!(kronecker(&ex1(), &one), ex1());
        let big = kronecker(&ex1(), &ex2());
        assert_eq!((big.m(), big.l()), (10, 20));
        assert!(verify_bh(&big).is_bh);
    }

    #[test]
    fn fourier_matrices() {
        assert_eq!(fourier(2).exps(), &[0, 0, 0, 1]);
        assert_eq!(fourier(3).exps(), &[0, 0, 0, 0, 1, 2, 0, 2, 1]);
        assert!(verify_bh(&fourier(7)).is_bh);
    }

    #[test]
    fn gram_of_bh_matrix_is_scalar() {
        let c = ex2().to_cyc();
        assert!(c.gram().equals_scalar(&BigInt::from(5)));
    }

    #[test]
    fn parse_bh_and_circ() {
        let m = parse_matrix("bh 2 4\n0 0\n1 3\n").unwrap();
        assert_eq!(m, ex1());
        let c = parse_matrix("circ 5 5\n1 3 4 4 3\n\n").unwrap();
        assert_eq!(c, ex2());
        assert_eq!(parse_matrix(&to_text(&ex3())).unwrap(), ex3());
        assert_eq!(parse_matrix(&to_circ_text(&ex2()).unwrap()).unwrap(), ex2());
        assert!(to_circ_text(&ex1()).is_none());
    }

    #[test]
    fn parse_diagnostics() {
        let e = parse_matrix("bh 2 4\n0 0\n1\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 2));
        assert!(e.message.contains("too few"));

        let e = parse_matrix("bh 2 4\n0 0\n1 4\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));

        let e = parse_matrix("bh 2 4\n0 0 0\n1 3\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));

        let e = parse_matrix("bh 2 4\n0 x\n1 3\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));

        let e = parse_matrix("bh 2 4\n0 0\n").unwrap_err();
        assert_eq!(e.line, 3);

        let e = parse_matrix("bh 1 4\n0\n1\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 1));

        let e = parse_matrix("hadamard 2 2\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));

        let e = parse_matrix("bh 0 2\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 4));

        assert!(parse_matrix("").is_err());
    }
}
