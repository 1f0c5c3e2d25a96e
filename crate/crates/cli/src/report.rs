use butson_core::conjecture::ConjectureVerdict;
use butson_core::matrices::{to_text, BhReport, RootMatrix};
use butson_core::search::SearchReport;
use butson_core::spectra::SpectrumReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Top-level JSON document printed by `--json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub input: InputFingerprint,
    pub result: ResultPayload,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFingerprint {
    /// `builtin:<name>`, a file path, or `search`.
    pub source: String,
    pub m: usize,
    pub l: usize,
    /// First 16 hex digits of the SHA-256 of the canonical matrix text, or
    /// the search configuration hash.
    pub hash: String,
}

impl InputFingerprint {
    pub fn of_matrix(source: String, mat: &RootMatrix) -> Self {
        let digest = Sha256::digest(to_text(mat).as_bytes());
        let hash = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        InputFingerprint { source, m: mat.m(), l: mat.l(), hash }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyResult {
    pub m: usize,
    pub l: usize,
    pub bh: BhReport,
    pub symmetric: bool,
    pub circulant: bool,
    pub unreal: bool,
}

impl VerifyResult {
    pub fn new(mat: &RootMatrix, bh: BhReport) -> Self {
        VerifyResult {
            m: mat.m(),
            l: mat.l(),
            bh,
            symmetric: mat.is_symmetric(),
            circulant: mat.is_circulant(),
            unreal: mat.is_unreal(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjectureResult {
    pub spectrum: SpectrumReport,
    /// Absent when the spectrum has no common order.
    pub verdict: Option<ConjectureVerdict>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultPayload {
    Verify(VerifyResult),
    Spectrum(SpectrumReport),
    Conjecture(ConjectureResult),
    Search(SearchReport),
    /// The eigensolver failed to converge.
    NumericFailure {
        index: usize,
    },
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const NOT_BH: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const COUNTEREXAMPLE: u8 = 3;
    pub const NO_COMMON_K: u8 = 4;
    pub const NUMERIC: u8 = 5;
}

impl RunReport {
    /// Exit status implied by the result.
    pub fn exit_code(&self) -> u8 {
        match &self.result {
            ResultPayload::Verify(v) if v.bh.is_bh => exit::OK,
            ResultPayload::Verify(_) => exit::NOT_BH,
            ResultPayload::Spectrum(s) if s.common_k.is_some() => exit::OK,
            ResultPayload::Spectrum(_) => exit::NO_COMMON_K,
            ResultPayload::Conjecture(c) => match &c.verdict {
                Some(v) if v.holds => exit::OK,
                Some(_) => exit::COUNTEREXAMPLE,
                None => exit::NO_COMMON_K,
            },
            ResultPayload::Search(_) => exit::OK,
            ResultPayload::NumericFailure { .. } => exit::NUMERIC,
        }
    }
}
