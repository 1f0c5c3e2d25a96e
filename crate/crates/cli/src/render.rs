//! Plain-text rendering of run reports.

use std::f64::consts::TAU;
use std::fmt::Write;

use butson_core::spectra::{principal_turn, SpectrumMethod, SpectrumReport};

use crate::report::{ConjectureResult, InputFingerprint, ResultPayload, RunReport, VerifyResult};

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn human(report: &RunReport, timing: bool) -> String {
    let mut out = String::new();
    header(&mut out, &report.input);
    match &report.result {
        ResultPayload::Verify(v) => verify(&mut out, v),
        ResultPayload::Spectrum(s) => spectrum(&mut out, s),
        ResultPayload::Conjecture(c) => conjecture(&mut out, c),
        ResultPayload::Search(s) => {
            let _ = writeln!(out, "rows scanned:       {}", s.scanned);
            let _ = writeln!(out, "rows skipped:       {}", s.skipped);
            let _ = writeln!(out, "BH circulants:      {}", s.bh_count);
            let _ = writeln!(out, "conjecture holds:   {}", s.holds_count);
            let _ = writeln!(out, "counterexamples:    {}", s.counterexample_count);
            let _ = writeln!(out, "no common order:    {}", s.no_common_k_count);
            for c in &s.counterexamples {
                let row: Vec<String> = c.first_row.iter().map(u32::to_string).collect();
                let _ = writeln!(
                    out,
                    "  rank {:>8}  row [{}]  k = {}  fails at i = {}",
                    c.rank,
                    row.join(" "),
                    c.k,
                    c.counterexample_i
                );
            }
        }
        ResultPayload::NumericFailure { index } => {
            let _ = writeln!(out, "eigensolver did not converge (eigenvalue {index})");
        }
    }
    if timing {
        let _ = writeln!(out, "elapsed: {} ms", report.elapsed_ms);
    }
    out
}

fn header(out: &mut String, input: &InputFingerprint) {
    let _ = writeln!(out, "input: {} (m = {}, l = {}, hash {})", input.source, input.m, input.l, input.hash);
}

fn verify(out: &mut String, v: &VerifyResult) {
    match &v.bh.failure {
        None => {
            let _ = writeln!(out, "Butson-Hadamard: yes");
        }
        Some(f) => {
            let _ = writeln!(out, "Butson-Hadamard: no (Gram entry ({}, {}) = {})", f.row, f.col, f.value);
        }
    }
    let _ = writeln!(out, "symmetric: {}", yes_no(v.symmetric));
    let _ = writeln!(out, "circulant: {}", yes_no(v.circulant));
    let _ = writeln!(out, "unreal: {}", yes_no(v.unreal));
}

fn spectrum(out: &mut String, s: &SpectrumReport) {
    let method = match s.method {
        SpectrumMethod::ExactCirculant => "exact (circulant)",
        SpectrumMethod::Numeric => "numeric",
    };
    let _ = writeln!(out, "method: {method}");
    let _ = writeln!(out, "{:>3}  {:>8}  {:>10}  {:>24}  order", "#", "turns", "radians", "value");
    for (idx, f) in s.findings.iter().enumerate() {
        let turns = f.angle.map_or_else(|| "-".to_string(), |a| a.to_string());
        let radians = principal_turn(f.value_numeric) * TAU;
        let value = format!("{:+.9}{:+.9}i", f.value_numeric.re, f.value_numeric.im);
        let order = match f.order {
            Some(k) if f.primitive => format!("{k} (primitive)"),
            Some(k) => k.to_string(),
            None => "none".to_string(),
        };
        let _ = writeln!(out, "{idx:>3}  {turns:>8}  {radians:>10.6}  {value:>24}  {order}");
    }
    match (s.common_k, &s.failure) {
        (Some(k), _) => {
            let _ = writeln!(out, "common order k = {k}");
        }
        (None, Some(f)) => {
            let _ = writeln!(out, "no common order: {f}");
        }
        (None, None) => {
            let _ = writeln!(out, "no common order");
        }
    }
}

fn conjecture(out: &mut String, c: &ConjectureResult) {
    let Some(v) = &c.verdict else {
        match &c.spectrum.failure {
            Some(f) => {
                let _ = writeln!(out, "no common order: {f}");
            }
            None => {
                let _ = writeln!(out, "no common order");
            }
        }
        return;
    };
    let _ = writeln!(out, "k = {}", v.k);
    let _ = writeln!(out, "{:>4}  {:>7}  {:>7}  values", "i", "in mu_l", "in mu_k");
    for p in &v.per_i {
        let mut values: Vec<String> = p.distinct_values.iter().map(ToString::to_string).collect();
        if p.unclassified > 0 {
            values.push(format!("({} unclassified)", p.unclassified));
        }
        let _ = writeln!(
            out,
            "{:>4}  {:>7}  {:>7}  {}",
            p.i,
            yes_no(p.all_in_mu_l),
            yes_no(p.all_in_mu_k),
            values.join(" ")
        );
    }
    match v.counterexample_i {
        None => {
            let _ = writeln!(out, "conjecture holds for this matrix");
        }
        Some(i) => {
            let _ = writeln!(out, "counterexample: the scaled power at i = {i} leaves BH(m, l)");
        }
    }
}
