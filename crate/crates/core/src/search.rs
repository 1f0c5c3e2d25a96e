//! Exhaustive scan of circulant matrices over `μ_l` for Butson-Hadamard
//! members and scaled-power counterexamples.
//!
//! First rows are enumerated by lexicographic rank, `rank = Σ a_j l^{m−1−j}`.
//! Work is split into contiguous rank shards; shard reports are merged in
//! rank order, so the result does not depend on the number of workers.
//!
//! A checkpoint is a text file
//!
//! ```text
//! butson-search-v1 <cfg-hash>
//! shard <lo> <hi> <next>
//! ...
//! ```
//!
//! with the per-shard partial reports stored next to it in
//! `<checkpoint>.partial.json`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conjecture::conjecture_test_with;
use crate::cyclotomic::ZeroTester;
use crate::error::{Error, Result};
use crate::matrices::circulant;
use crate::spectra::spectrum_report;

pub const CHECKPOINT_MAGIC: &str = "butson-search-v1";

/// Half-open rank interval `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankRange {
    pub lo: u64,
    pub hi: u64,
}

impl RankRange {
    pub fn len(&self) -> u64 {
        self.hi.saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub m: usize,
    pub l: usize,
    /// Only scan rows that are the least member of their orbit under
    /// rotation and global exponent shift. Counts are then per orbit. Both
    /// symmetries preserve BH membership and the scaled-power entry classes,
    /// but not the eigenvalue orders, so each BH orbit is classified from all
    /// of its members: a counterexample if any member is one, otherwise
    /// `holds` if any member has a common order.
    pub dedup: bool,
    /// Defaults to every row, `[0, l^m)`.
    pub range: Option<RankRange>,
    pub checkpoint_every: u64,
}

impl SearchConfig {
    pub fn new(m: usize, l: usize) -> Self {
        SearchConfig { m, l, dedup: false, range: None, checkpoint_every: 4096 }
    }

    /// `l^m`, if it fits in a `u64`.
    pub fn total_rows(&self) -> Option<u64> {
        (self.l as u64).checked_pow(u32::try_from(self.m).ok()?)
    }

    /// The explicit rank range after validation.
    pub fn resolved_range(&self) -> Result<RankRange> {
        if self.m == 0 || self.l == 0 {
            return Err(Error::Config("m and l must be positive".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint interval must be positive".into()));
        }
        let total = self.total_rows();
        let range = match (self.range, total) {
            (Some(r), _) => r,
            (None, Some(t)) => RankRange { lo: 0, hi: t },
            (None, None) => {
                return Err(Error::Config(format!(
                    "{}^{} rows overflow the rank index; an explicit range is required",
                    self.l, self.m
                )))
            }
        };
        if range.lo > range.hi {
            return Err(Error::Config(format!("range {}..{} is reversed", range.lo, range.hi)));
        }
        if let Some(t) = total {
            if range.hi > t {
                return Err(Error::Config(format!("range end {} exceeds {t} rows", range.hi)));
            }
        }
        Ok(range)
    }

    /// Fingerprint of everything that determines the report.
    pub fn hash(&self) -> Result<String> {
        let r = self.resolved_range()?;
        let canonical =
            format!("{CHECKPOINT_MAGIC} m={} l={} dedup={} range={}..{}", self.m, self.l, self.dedup, r.lo, r.hi);
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub rank: u64,
    pub first_row: Vec<u32>,
    pub k: u64,
    pub counterexample_i: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    /// Rows examined (after orbit deduplication).
    pub scanned: u64,
    /// Rows skipped as non-canonical.
    pub skipped: u64,
    pub bh_count: u64,
    pub tested: u64,
    pub holds_count: u64,
    pub counterexample_count: u64,
    pub no_common_k_count: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl SearchReport {
    /// Combine with the report of the immediately following rank range.
    pub fn merge(&mut self, next: SearchReport) {
        self.scanned += next.scanned;
        self.skipped += next.skipped;
        self.bh_count += next.bh_count;
        self.tested += next.tested;
        self.holds_count += next.holds_count;
        self.counterexample_count += next.counterexample_count;
        self.no_common_k_count += next.no_common_k_count;
        self.counterexamples.extend(next.counterexamples);
    }
}

fn autocorrelations_vanish(tester: &mut ZeroTester, counts: &mut [i64], l: usize, row: &[u32]) -> bool {
    let m = row.len();
    // Shift m − s is the conjugate of shift s.
    for s in 1..=m / 2 {
        counts.iter_mut().for_each(|c| *c = 0);
        for j in 0..m {
            let d = row[j] as usize + l - row[(j + s) % m] as usize;
            counts[d % l] += 1;
        }
        if !tester.is_zero(counts) {
            return false;
        }
    }
    true
}

/// Whether `circulant(l, row)` is Butson-Hadamard: every nontrivial
/// periodic autocorrelation `Σ_j ζ_l^{a_j − a_{j+s}}` vanishes exactly.
pub fn autocorrelation_is_bh(l: usize, row: &[u32]) -> bool {
    let mut tester = ZeroTester::new(l);
    let mut counts = vec![0i64; l];
    autocorrelations_vanish(&mut tester, &mut counts, l, row)
}

fn rank_of(l: usize, row: impl IntoIterator<Item = u32>) -> u64 {
    row.into_iter().fold(0u64, |acc, a| acc * l as u64 + a as u64)
}

fn row_of(l: usize, m: usize, mut rank: u64) -> Vec<u32> {
    let mut row = vec![0u32; m];
    for slot in row.iter_mut().rev() {
        *slot = (rank % l as u64) as u32;
        rank /= l as u64;
    }
    row
}

/// Rank of the least row in the orbit of `row` under cyclic rotation and
/// global exponent shift `a_j ↦ a_j + c (mod l)`.
pub fn canonical_rank(l: usize, row: &[u32]) -> u64 {
    let m = row.len();
    // The least representative starts with 0, which fixes the shift per rotation.
    (0..m)
        .map(|r| {
            let c = l as u32 - row[r];
            (0..m).map(move |j| (row[(r + j) % m] + c) % l as u32)
        })
        .map(|rot| rot.collect::<Vec<u32>>())
        .min()
        .map_or(0, |best| rank_of(l, best))
}

struct Scanner {
    m: usize,
    l: usize,
    dedup: bool,
    tester: ZeroTester,
    counts: Vec<i64>,
}

impl Scanner {
    fn new(cfg: &SearchConfig) -> Self {
        Scanner { m: cfg.m, l: cfg.l, dedup: cfg.dedup, tester: ZeroTester::new(cfg.l), counts: vec![0; cfg.l] }
    }

    fn scan(&mut self, range: RankRange, report: &mut SearchReport) -> Result<()> {
        if range.is_empty() {
            return Ok(());
        }
        let mut row = row_of(self.l, self.m, range.lo);
        for rank in range.lo..range.hi {
            if rank > range.lo {
                // Odometer increment.
                for slot in row.iter_mut().rev() {
                    *slot += 1;
                    if (*slot as usize) < self.l {
                        break;
                    }
                    *slot = 0;
                }
            }
            self.visit(rank, &row, report)?;
        }
        Ok(())
    }

    fn visit(&mut self, rank: u64, row: &[u32], report: &mut SearchReport) -> Result<()> {
        if self.dedup && canonical_rank(self.l, row) != rank {
            report.skipped += 1;
            return Ok(());
        }
        report.scanned += 1;
        if !autocorrelations_vanish(&mut self.tester, &mut self.counts, self.l, row) {
            return Ok(());
        }
        report.bh_count += 1;
        report.tested += 1;
        let members = if self.dedup { orbit_members(self.l, row) } else { vec![(rank, row.to_vec())] };
        let mut any_holds = false;
        for (member_rank, member) in members {
            match evaluate(self.l, &member)? {
                Outcome::Counterexample { k, i } => {
                    report.counterexample_count += 1;
                    report.counterexamples.push(Counterexample {
                        rank: member_rank,
                        first_row: member,
                        k,
                        counterexample_i: i,
                    });
                    return Ok(());
                }
                Outcome::Holds => any_holds = true,
                Outcome::NoCommonK => {}
            }
        }
        if any_holds {
            report.holds_count += 1;
        } else {
            report.no_common_k_count += 1;
        }
        Ok(())
    }
}

enum Outcome {
    Holds,
    Counterexample { k: u64, i: u64 },
    NoCommonK,
}

fn evaluate(l: usize, row: &[u32]) -> Result<Outcome> {
    let mat = circulant(l, row)?;
    let spectrum = spectrum_report(&mat)?;
    match conjecture_test_with(&mat, &spectrum) {
        Ok(v) => Ok(match v.counterexample_i {
            None => Outcome::Holds,
            Some(i) => Outcome::Counterexample { k: v.k, i },
        }),
        Err(Error::NoCommonOrder(_)) => Ok(Outcome::NoCommonK),
        Err(e) => Err(e),
    }
}

/// Distinct members of the rotation × shift orbit of `row`, by increasing rank.
pub fn orbit_members(l: usize, row: &[u32]) -> Vec<(u64, Vec<u32>)> {
    let m = row.len();
    let mut out: Vec<(u64, Vec<u32>)> = (0..m)
        .flat_map(|r| {
            (0..l as u32).map(move |c| {
                let member: Vec<u32> = (0..m).map(|j| (row[(r + j) % m] + c) % l as u32).collect();
                (rank_of(l, member.iter().copied()), member)
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shard {
    pub lo: u64,
    pub hi: u64,
    pub next: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub cfg_hash: String,
    pub shards: Vec<Shard>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut s = format!("{CHECKPOINT_MAGIC} {}\n", self.cfg_hash);
        for sh in &self.shards {
            s.push_str(&format!("shard {} {} {}\n", sh.lo, sh.hi, sh.next));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Checkpoint(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty checkpoint"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 || head[0] != CHECKPOINT_MAGIC {
            return Err(bad(1, "expected `butson-search-v1 <cfg-hash>`"));
        }
        let mut shards = Vec::new();
        for (idx, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let nums: Option<Vec<u64>> = parts.iter().skip(1).map(|p| p.parse().ok()).collect();
            match (parts.first(), nums.as_deref()) {
                (Some(&"shard"), Some(&[lo, hi, next])) if lo <= next && next <= hi => {
                    shards.push(Shard { lo, hi, next })
                }
                _ => return Err(bad(idx + 1, "expected `shard <lo> <hi> <next>` with lo <= next <= hi")),
            }
        }
        if shards.windows(2).any(|w| w[0].hi != w[1].lo) {
            return Err(Error::Checkpoint("shards are not contiguous".into()));
        }
        Ok(Checkpoint { cfg_hash: head[1].to_string(), shards })
    }
}

fn partial_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.as_os_str().to_owned();
    name.push(".partial.json");
    PathBuf::from(name)
}

fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn split_shards(range: RankRange, parts: usize) -> Vec<Shard> {
    let parts = parts.max(1) as u64;
    let len = range.len();
    if len == 0 {
        return vec![Shard { lo: range.lo, hi: range.hi, next: range.lo }];
    }
    let parts = parts.min(len);
    let (base, extra) = (len / parts, len % parts);
    let mut lo = range.lo;
    (0..parts)
        .map(|p| {
            let hi = lo + base + u64::from(p < extra);
            let sh = Shard { lo, hi, next: lo };
            lo = hi;
            sh
        })
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct SearchOptions {
    /// Worker threads; `0` is treated as one.
    pub workers: usize,
    /// Resume from, and periodically write, this checkpoint.
    pub checkpoint: Option<PathBuf>,
}

struct Progress {
    shards: Vec<Shard>,
    partial: Vec<SearchReport>,
}

fn persist(path: &Path, cfg_hash: &str, progress: &Progress) -> Result<()> {
    let cp = Checkpoint { cfg_hash: cfg_hash.to_string(), shards: progress.shards.clone() };
    let partial = serde_json::to_vec(&progress.partial).expect("report serializes");
    // Partial results first: a checkpoint line never points past saved results.
    write_atomic(&partial_path(path), &partial)
        .and_then(|_| write_atomic(path, cp.to_text().as_bytes()))
        .map_err(|e| Error::Checkpoint(format!("writing {}: {e}", path.display())))
}

fn load_progress(path: &Path, cfg_hash: &str, range: RankRange) -> Result<Option<Progress>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::Checkpoint(format!("reading {}: {e}", path.display()))),
    };
    let cp = Checkpoint::parse(&text)?;
    if cp.cfg_hash != cfg_hash {
        return Err(Error::Checkpoint(format!(
            "checkpoint was written for configuration {}, not {cfg_hash}",
            cp.cfg_hash
        )));
    }
    let covers = cp.shards.first().map(|s| s.lo) == Some(range.lo) && cp.shards.last().map(|s| s.hi) == Some(range.hi);
    if !covers {
        return Err(Error::Checkpoint("shards do not cover the configured range".into()));
    }
    let partial_file = partial_path(path);
    let raw =
        fs::read(&partial_file).map_err(|e| Error::Checkpoint(format!("reading {}: {e}", partial_file.display())))?;
    let partial: Vec<SearchReport> = serde_json::from_slice(&raw)
        .map_err(|e| Error::Checkpoint(format!("parsing {}: {e}", partial_file.display())))?;
    if partial.len() != cp.shards.len() {
        return Err(Error::Checkpoint("partial results do not match the shard list".into()));
    }
    Ok(Some(Progress { shards: cp.shards, partial }))
}

/// Single-threaded scan without checkpointing.
pub fn run_search(cfg: &SearchConfig) -> Result<SearchReport> {
    run_search_with(cfg, &SearchOptions { workers: 1, checkpoint: None })
}

/// Scan with `opts.workers` threads over disjoint rank shards, optionally
/// resuming from and updating a checkpoint every `cfg.checkpoint_every`
/// rows per shard. If a checkpoint write fails the scan stops and the last
/// successfully written checkpoint remains valid.
pub fn run_search_with(cfg: &SearchConfig, opts: &SearchOptions) -> Result<SearchReport> {
    let range = cfg.resolved_range()?;
    let cfg_hash = cfg.hash()?;
    let workers = opts.workers.max(1);

    let resumed = match &opts.checkpoint {
        Some(path) => load_progress(path, &cfg_hash, range)?,
        None => None,
    };
    let progress = resumed.unwrap_or_else(|| {
        let shards = split_shards(range, workers);
        let partial = vec![SearchReport::default(); shards.len()];
        Progress { shards, partial }
    });
    if let Some(path) = &opts.checkpoint {
        persist(path, &cfg_hash, &progress)?;
    }

    let shard_count = progress.shards.len();
    let state = Mutex::new(progress);
    let next_shard = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let first_error: Mutex<Option<Error>> = Mutex::new(None);
    let fail = |e: Error| {
        abort.store(true, Ordering::SeqCst);
        first_error.lock().unwrap().get_or_insert(e);
    };

    std::thread::scope(|scope| {
        for _ in 0..workers.min(shard_count) {
            scope.spawn(|| {
                let mut scanner = Scanner::new(cfg);
                loop {
                    let idx = next_shard.fetch_add(1, Ordering::SeqCst);
                    if idx >= shard_count {
                        return;
                    }
                    let shard = state.lock().unwrap().shards[idx];
                    let mut pos = shard.next;
                    while pos < shard.hi {
                        if abort.load(Ordering::SeqCst) {
                            return;
                        }
                        let end = shard.hi.min(pos.saturating_add(cfg.checkpoint_every));
                        let mut chunk = SearchReport::default();
                        if let Err(e) = scanner.scan(RankRange { lo: pos, hi: end }, &mut chunk) {
                            fail(e);
                            return;
                        }
                        pos = end;
                        let mut st = state.lock().unwrap();
                        st.partial[idx].merge(chunk);
                        st.shards[idx].next = pos;
                        if let Some(path) = &opts.checkpoint {
                            if let Err(e) = persist(path, &cfg_hash, &st) {
                                drop(st);
                                fail(e);
                                return;
                            }
                        }
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let progress = state.into_inner().unwrap();
    Ok(progress.partial.into_iter().fold(SearchReport::default(), |mut acc, r| {
        acc.merge(r);
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::verify_bh;

    #[test]
    fn autocorrelation_examples() {
        assert!(autocorrelation_is_bh(5, &[1, 3, 4, 4, 3]));
        assert!(!autocorrelation_is_bh(5, &[0, 0, 0, 0, 0]));
        // Oracle: the exact Gram check on the materialized circulant.
        assert!(verify_bh(&circulant(2, &[0, 0, 0, 1]).unwrap()).is_bh);
        assert!(autocorrelation_is_bh(2, &[0, 0, 0, 1]));
    }

    #[test]
    fn canonical_rank_examples() {
        // Brute force over all 25 rotations × shifts.
        let row = [1u32, 3, 4, 4, 3];
        let brute = (0..5)
            .flat_map(|r| (0..5u32).map(move |c| (0..5).map(move |j| (row[(r + j) % 5] + c) % 5).collect::<Vec<u32>>()))
            .min()
            .unwrap();
        assert_eq!(brute, vec![0, 0, 4, 2, 4]);
        assert_eq!(canonical_rank(5, &row), rank_of(5, brute));
        assert_eq!(canonical_rank(7, &[0, 0, 0]), 0);
        let base = [2u32, 0, 5, 1];
        for r in 0..4 {
            let rot: Vec<u32> = (0..4).map(|j| base[(j + r) % 4]).collect();
            assert_eq!(canonical_rank(6, &rot), canonical_rank(6, &base));
        }
    }

    #[test]
    fn rank_encoding_round_trips() {
        for rank in 0..81 {
            let row = row_of(3, 4, rank);
            assert_eq!(rank_of(3, row.iter().copied()), rank);
        }
    }

    #[test]
    fn small_full_scan() {
        // Oracle: exact Gram check on all four 2×2 circulants over ±1. None is
        // Hadamard, since the shift-1 autocorrelation is ±2.
        let oracle = (0..4).filter(|&r| verify_bh(&circulant(2, &row_of(2, 2, r)).unwrap()).is_bh).count();
        assert_eq!(oracle, 0);
        let report = run_search(&SearchConfig::new(2, 2)).unwrap();
        assert_eq!(report.scanned, 4);
        assert_eq!(report.bh_count, oracle as u64);
        assert_eq!(report.tested, report.holds_count + report.counterexample_count + report.no_common_k_count);
        assert_eq!(report.no_common_k_count, 0);
    }

    #[test]
    fn empty_range_reports_nothing() {
        let cfg = SearchConfig { range: Some(RankRange { lo: 0, hi: 0 }), ..SearchConfig::new(5, 5) };
        assert_eq!(run_search(&cfg).unwrap(), SearchReport::default());
    }

    #[test]
    fn configuration_errors() {
        let huge = SearchConfig::new(40, 7);
        assert!(matches!(run_search(&huge), Err(Error::Config(_))));
        let with_range = SearchConfig { range: Some(RankRange { lo: 0, hi: 10 }), ..huge };
        assert!(run_search(&with_range).is_ok());
        let past_end = SearchConfig { range: Some(RankRange { lo: 0, hi: 5 }), ..SearchConfig::new(2, 2) };
        assert!(matches!(run_search(&past_end), Err(Error::Config(_))));
        let reversed = SearchConfig { range: Some(RankRange { lo: 3, hi: 1 }), ..SearchConfig::new(2, 2) };
        assert!(matches!(run_search(&reversed), Err(Error::Config(_))));
    }

    #[test]
    fn checkpoint_text_round_trip() {
        let cp = Checkpoint {
            cfg_hash: "0123abcd".into(),
            shards: vec![Shard { lo: 0, hi: 10, next: 4 }, Shard { lo: 10, hi: 20, next: 20 }],
        };
        let text = cp.to_text();
        assert_eq!(text, "butson-search-v1 0123abcd\nshard 0 10 4\nshard 10 20 20\n");
        assert_eq!(Checkpoint::parse(&text).unwrap(), cp);
        assert!(Checkpoint::parse("butson-search-v2 x\n").is_err());
        assert!(Checkpoint::parse("butson-search-v1 x\nshard 0 10 11\n").is_err());
        assert!(Checkpoint::parse("butson-search-v1 x\nshard 0 10 0\nshard 11 20 11\n").is_err());
    }

    #[test]
    fn shard_split_is_contiguous() {
        let shards = split_shards(RankRange { lo: 3, hi: 20 }, 4);
        assert_eq!(shards.len(), 4);
        assert_eq!(shards[0].lo, 3);
        assert_eq!(shards[3].hi, 20);
        assert!(shards.windows(2).all(|w| w[0].hi == w[1].lo));
        assert_eq!(split_shards(RankRange { lo: 0, hi: 2 }, 8).len(), 2);
    }

    #[test]
    fn hash_depends_on_result_relevant_fields_only() {
        let a = SearchConfig::new(5, 5);
        let b = SearchConfig { checkpoint_every: 7, ..a.clone() };
        let c = SearchConfig { dedup: true, ..a.clone() };
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 16);
    }
}
