//! Long-running, parallel, resumable sweeps for the expensive claims.
//!
//! A sweep partitions `[n_lo, n_hi]` into contiguous chunks, evaluates
//! chunks across a worker pool, and merges results in chunk order, so the
//! final report is identical to a single-threaded run regardless of
//! worker count or completion order. With a checkpoint configured, each
//! completed chunk is appended to a line-delimited file and a later run
//! completes only the missing chunks.
//!
//! Checkpoint file format: each line is `<crc32-hex> <json>`. The first
//! line is a header record carrying a digest of the scan configuration
//! (task, range, chunk size; worker count and paths are excluded since
//! they do not affect the work); chunk records are self-contained results.
//! Resuming under a configuration with a different digest is rejected.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use crate::claims::{self, CheckOptions, ChunkOutcome, ClaimReport, KPolicy};
use crate::{modular, primes, Error, Result};

pub const CHECKPOINT_FORMAT_VERSION: u64 = 1;
pub const DEFAULT_CHUNK_SIZE: u64 = 64;

/// What a sweep evaluates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum ScanTask {
    /// One registered claim under a k policy.
    Claim { id: String, k_policy: KPolicy },
    /// The Giuga census: classify every n in range by the literal
    /// congruence `S_{n-1}(n) = -1 (mod n)` and by primality.
    GiugaCensus,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub task: ScanTask,
    pub n_lo: u64,
    pub n_hi: u64,
    pub workers: usize,
    /// Consecutive n per work unit.
    pub chunk_size: u64,
    pub checkpoint_path: Option<PathBuf>,
    /// Where the caller intends to write the report; not used by the
    /// sweep itself and excluded from the digest.
    pub output_path: Option<PathBuf>,
}

impl ScanConfig {
    pub fn new(task: ScanTask, n_lo: u64, n_hi: u64) -> ScanConfig {
        ScanConfig {
            task,
            n_lo,
            n_hi,
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(4),
            chunk_size: DEFAULT_CHUNK_SIZE,
            checkpoint_path: None,
            output_path: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_lo > self.n_hi {
            return Err(Error::Config(format!(
                "empty scan range [{}, {}]",
                self.n_lo, self.n_hi
            )));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk size must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be >= 1".into()));
        }
        if self.n_hi >= modular::MAX_MODULUS {
            return Err(Error::Config(format!(
                "n_hi must stay below 2^63, got {}",
                self.n_hi
            )));
        }
        Ok(())
    }

    /// Stable hash of the work definition. Excludes paths and the worker
    /// count: scheduling must not invalidate a checkpoint.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct DigestView<'a> {
            task: &'a ScanTask,
            n_lo: u64,
            n_hi: u64,
            chunk_size: u64,
        }
        let view = DigestView {
            task: &self.task,
            n_lo: self.n_lo,
            n_hi: self.n_hi,
            chunk_size: self.chunk_size,
        };
        let json = serde_json::to_string(&view).expect("digest view serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn num_chunks(&self) -> u64 {
        (self.n_hi - self.n_lo) / self.chunk_size + 1
    }

    fn chunk_range(&self, index: u64) -> (u64, u64) {
        let lo = self.n_lo + index * self.chunk_size;
        let hi = (lo + self.chunk_size - 1).min(self.n_hi);
        (lo, hi)
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderRecord {
    record: String,
    format_version: u64,
    digest: String,
    task: ScanTask,
    n_lo: u64,
    n_hi: u64,
    chunk_size: u64,
}

#[derive(Serialize)]
struct ChunkRecordRef<'a, R: Serialize> {
    record: &'static str,
    index: u64,
    payload: &'a R,
}

#[derive(Deserialize)]
struct ChunkRecord<R> {
    #[allow(dead_code)]
    record: String,
    index: u64,
    payload: R,
}

fn record_line(json: &str) -> String {
    format!("{:08x} {json}\n", crc32fast::hash(json.as_bytes()))
}

fn parse_record_line(line_no: usize, line: &str) -> Result<&str> {
    let corrupt = |reason: &str| Error::CorruptCheckpoint {
        line: line_no,
        reason: reason.to_string(),
    };
    let (crc_hex, json) = line
        .split_once(' ')
        .ok_or_else(|| corrupt("missing checksum field"))?;
    let stored = u32::from_str_radix(crc_hex, 16).map_err(|_| corrupt("bad checksum field"))?;
    if stored != crc32fast::hash(json.as_bytes()) {
        return Err(corrupt("checksum mismatch"));
    }
    Ok(json)
}

/// Header plus completed chunk indices, payload-agnostic. Enough to
/// reconstruct the scan configuration and decide what remains.
#[derive(Clone, Debug)]
pub struct CheckpointInfo {
    pub digest: String,
    pub task: ScanTask,
    pub n_lo: u64,
    pub n_hi: u64,
    pub chunk_size: u64,
    pub completed_chunks: Vec<u64>,
}

/// Complete, checksum-verified lines of a checkpoint file. A trailing
/// line without a newline terminator is an interrupted write and is
/// dropped; a checksum failure on a complete line is an error.
fn complete_lines(text: &str) -> Vec<&str> {
    let body = match text.rfind('\n') {
        Some(pos) => &text[..pos],
        None => return Vec::new(),
    };
    body.split('\n').filter(|l| !l.is_empty()).collect()
}

fn read_header(line: &str) -> Result<HeaderRecord> {
    let json = parse_record_line(1, line)?;
    let header: HeaderRecord = serde_json::from_str(json).map_err(|e| Error::CorruptCheckpoint {
        line: 1,
        reason: format!("bad header record: {e}"),
    })?;
    if header.record != "header" {
        return Err(Error::CorruptCheckpoint {
            line: 1,
            reason: "first record is not a header".into(),
        });
    }
    if header.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::CorruptCheckpoint {
            line: 1,
            reason: format!("unsupported checkpoint version {}", header.format_version),
        });
    }
    Ok(header)
}

/// Read a checkpoint's header and completed chunk indices without
/// interpreting chunk payloads; used to rebuild a configuration for
/// resumption.
pub fn read_checkpoint_info(path: &Path) -> Result<CheckpointInfo> {
    let text = std::fs::read_to_string(path)?;
    let lines = complete_lines(&text);
    let Some(first) = lines.first() else {
        return Err(Error::CorruptCheckpoint {
            line: 1,
            reason: "checkpoint file has no complete records".into(),
        });
    };
    let header = read_header(first)?;
    let mut completed = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let json = parse_record_line(i + 1, line)?;
        let value: serde_json::Value =
            serde_json::from_str(json).map_err(|e| Error::CorruptCheckpoint {
                line: i + 1,
                reason: e.to_string(),
            })?;
        if let Some(index) = value.get("index").and_then(|v| v.as_u64()) {
            completed.push(index);
        }
    }
    completed.sort_unstable();
    completed.dedup();
    Ok(CheckpointInfo {
        digest: header.digest,
        task: header.task,
        n_lo: header.n_lo,
        n_hi: header.n_hi,
        chunk_size: header.chunk_size,
        completed_chunks: completed,
    })
}

fn load_chunks<R: DeserializeOwned>(path: &Path, digest: &str) -> Result<Option<BTreeMap<u64, R>>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    let lines = complete_lines(&text);
    let Some(first) = lines.first() else {
        return Ok(None);
    };
    let header = read_header(first)?;
    if header.digest != digest {
        return Err(Error::DigestMismatch {
            expected: digest.to_string(),
            found: header.digest,
        });
    }
    let mut chunks = BTreeMap::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let json = parse_record_line(i + 1, line)?;
        let rec: ChunkRecord<R> =
            serde_json::from_str(json).map_err(|e| Error::CorruptCheckpoint {
                line: i + 1,
                reason: e.to_string(),
            })?;
        chunks.insert(rec.index, rec.payload);
    }
    Ok(Some(chunks))
}

/// Evaluate all chunks of the configured range, resuming from the
/// checkpoint when one exists. Returns payloads in chunk order.
fn run_chunked<R>(cfg: &ScanConfig, eval: impl Fn(u64, u64) -> Result<R> + Sync) -> Result<Vec<R>>
where
    R: Serialize + DeserializeOwned + Send,
{
    cfg.validate()?;
    let digest = cfg.digest();
    let total = cfg.num_chunks();

    let mut completed: BTreeMap<u64, R> = BTreeMap::new();
    let mut sink: Option<Mutex<File>> = None;
    if let Some(path) = &cfg.checkpoint_path {
        match load_chunks::<R>(path, &digest)? {
            Some(chunks) => {
                completed = chunks;
                let file = OpenOptions::new().append(true).open(path)?;
                sink = Some(Mutex::new(file));
            }
            None => {
                let mut file = File::create(path)?;
                let header = HeaderRecord {
                    record: "header".into(),
                    format_version: CHECKPOINT_FORMAT_VERSION,
                    digest: digest.clone(),
                    task: cfg.task.clone(),
                    n_lo: cfg.n_lo,
                    n_hi: cfg.n_hi,
                    chunk_size: cfg.chunk_size,
                };
                let json = serde_json::to_string(&header).expect("header serializes");
                file.write_all(record_line(&json).as_bytes())?;
                file.flush()?;
                sink = Some(Mutex::new(file));
            }
        }
    }

    let missing: Vec<u64> = (0..total).filter(|i| !completed.contains_key(i)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let fresh: Vec<(u64, R)> = pool.install(|| {
        missing
            .par_iter()
            .map(|&index| {
                let (lo, hi) = cfg.chunk_range(index);
                let payload = eval(lo, hi)?;
                if let Some(sink) = &sink {
                    let rec = ChunkRecordRef {
                        record: "chunk",
                        index,
                        payload: &payload,
                    };
                    let json = serde_json::to_string(&rec).expect("chunk serializes");
                    let mut file = sink.lock().unwrap();
                    file.write_all(record_line(&json).as_bytes())?;
                    file.flush()?;
                }
                Ok((index, payload))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    completed.extend(fresh);
    Ok(completed.into_values().collect())
}

/// Run a claim sweep to completion (resuming from its checkpoint when one
/// is configured and present). The report equals a single-threaded
/// [`claims::check_claim`] over the same range.
pub fn sweep(cfg: &ScanConfig, opts: &CheckOptions) -> Result<ClaimReport> {
    let ScanTask::Claim { id, k_policy } = &cfg.task else {
        return Err(Error::Config(
            "sweep requires a claim task; use census_sweep for the census".into(),
        ));
    };
    let desc = claims::find_claim(id)?;
    claims::enforce_budget(desc, cfg.n_hi, k_policy, &opts.budget)?;
    let started = Instant::now();
    let chunks = run_chunked(cfg, |lo, hi| {
        claims::evaluate_slice(desc, lo, hi, k_policy, opts)
    })?;
    let merged = chunks
        .into_iter()
        .fold(ChunkOutcome::default(), ChunkOutcome::merge);
    Ok(claims::assemble_report(
        desc,
        cfg.n_lo,
        cfg.n_hi,
        k_policy,
        merged,
        started.elapsed().as_millis() as u64,
    ))
}

/// Complete a previously checkpointed claim sweep. Requires the
/// checkpoint file to exist; its digest must match the configuration.
pub fn resume(cfg: &ScanConfig, opts: &CheckOptions) -> Result<ClaimReport> {
    require_checkpoint(cfg)?;
    sweep(cfg, opts)
}

fn require_checkpoint(cfg: &ScanConfig) -> Result<&Path> {
    let path = cfg
        .checkpoint_path
        .as_deref()
        .ok_or_else(|| Error::Config("resume requires a checkpoint path".into()))?;
    if !path.exists() {
        return Err(Error::Config(format!(
            "checkpoint file {} does not exist",
            path.display()
        )));
    }
    Ok(path)
}

/// Census of the Giuga congruence below a bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GiugaCensus {
    /// Exclusive bound: every n < x was classified.
    pub x: u64,
    /// Count of primes satisfying the congruence (all of them should).
    pub prime_satisfiers: u64,
    /// Composite satisfiers: each one is a Giuga counterexample.
    pub composite_satisfiers: Vec<u64>,
    /// G(x) = number of composite satisfiers.
    pub g: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct CensusChunk {
    prime_satisfiers: u64,
    composite_satisfiers: Vec<u64>,
}

fn census_slice(lo: u64, hi: u64) -> Result<CensusChunk> {
    let mut out = CensusChunk::default();
    for n in lo..=hi {
        let r = modular::giuga_residue(n)?;
        if r.r == n - 1 {
            if primes::is_prime(n) {
                out.prime_satisfiers += 1;
            } else {
                out.composite_satisfiers.push(n);
            }
        }
    }
    Ok(out)
}

/// Run the census over the configured range (task must be
/// [`ScanTask::GiugaCensus`]), with the same chunking, checkpointing and
/// determinism as claim sweeps.
pub fn census_sweep(cfg: &ScanConfig, opts: &CheckOptions) -> Result<GiugaCensus> {
    if !matches!(cfg.task, ScanTask::GiugaCensus) {
        return Err(Error::Config("census_sweep requires the census task".into()));
    }
    let x = cfg.n_hi + 1;
    if x > opts.budget.max_census_x {
        return Err(Error::CostCeiling {
            what: format!("Giuga census to x = {x} (per-n cost n log n)"),
            ceiling: opts.budget.max_census_x,
        });
    }
    let chunks = run_chunked(cfg, census_slice)?;
    let mut census = GiugaCensus {
        x,
        prime_satisfiers: 0,
        composite_satisfiers: Vec::new(),
        g: 0,
    };
    for c in chunks {
        census.prime_satisfiers += c.prime_satisfiers;
        census.composite_satisfiers.extend(c.composite_satisfiers);
    }
    census.g = census.composite_satisfiers.len() as u64;
    Ok(census)
}

/// Census over all `n < x` with default scheduling.
pub fn giuga_census(x: u64, opts: &CheckOptions) -> Result<GiugaCensus> {
    if x < 3 {
        return Err(Error::Domain(format!("census needs x >= 3, got {x}")));
    }
    census_sweep(&ScanConfig::new(ScanTask::GiugaCensus, 2, x - 1), opts)
}

/// Complete a previously checkpointed census.
pub fn resume_census(cfg: &ScanConfig, opts: &CheckOptions) -> Result<GiugaCensus> {
    require_checkpoint(cfg)?;
    census_sweep(cfg, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::{check_claim, Budget};
    use crate::exact;
    use num_bigint::BigUint;
    use num_traits::Zero;

    fn claim_cfg(id: &str, n_lo: u64, n_hi: u64) -> ScanConfig {
        let mut cfg = ScanConfig::new(
            ScanTask::Claim {
                id: id.into(),
                k_policy: KPolicy::AllValid,
            },
            n_lo,
            n_hi,
        );
        cfg.chunk_size = 16;
        cfg
    }

    #[test]
    fn census_examples() {
        let opts = CheckOptions::default();
        let c = giuga_census(100, &opts).unwrap();
        assert_eq!(c.prime_satisfiers, 25);
        assert_eq!(c.g, 0);
        assert!(c.composite_satisfiers.is_empty());

        let tiny = giuga_census(3, &opts).unwrap();
        assert_eq!(tiny.prime_satisfiers, 1); // n = 2
        assert_eq!(tiny.g, 0);

        assert!(giuga_census(2, &opts).is_err());
    }

    #[test]
    fn census_budget_enforced() {
        let opts = CheckOptions::default();
        let err = giuga_census(60_000, &opts).unwrap_err();
        assert!(matches!(err, Error::CostCeiling { .. }));

        let opts = CheckOptions {
            budget: Budget {
                max_census_x: 60_000,
                ..Budget::default()
            },
            ..CheckOptions::default()
        };
        // budget check passes; don't actually run 60k here
        assert!(60_000 <= opts.budget.max_census_x);
    }

    #[test]
    fn sweep_matches_check_claim_and_is_schedule_independent() {
        let opts = CheckOptions::default();
        let direct = check_claim("thm-ukz", 2, 120, &KPolicy::AllValid, &opts).unwrap();

        let mut one = claim_cfg("thm-ukz", 2, 120);
        one.workers = 1;
        let r1 = sweep(&one, &opts).unwrap();

        let mut four = claim_cfg("thm-ukz", 2, 120);
        four.workers = 4;
        four.chunk_size = 7;
        let r4 = sweep(&four, &opts).unwrap();

        assert_eq!(r1, direct);
        assert_eq!(r4, direct);
    }

    #[test]
    fn census_schedule_independent() {
        let opts = CheckOptions::default();
        let mut a = ScanConfig::new(ScanTask::GiugaCensus, 2, 499);
        a.workers = 1;
        a.chunk_size = 64;
        let mut b = ScanConfig::new(ScanTask::GiugaCensus, 2, 499);
        b.workers = 4;
        b.chunk_size = 64;
        assert_eq!(census_sweep(&a, &opts).unwrap(), census_sweep(&b, &opts).unwrap());
    }

    #[test]
    fn checkpoint_prefix_resume_equals_uninterrupted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let opts = CheckOptions::default();

        let mut cfg = claim_cfg("thm-ukz", 2, 100);
        cfg.checkpoint_path = Some(path.clone());
        let full = sweep(&cfg, &opts).unwrap();

        // keep the header plus the first two chunk records
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.len() > 3);
        let prefix = lines[..3].join("\n") + "\n";
        std::fs::write(&path, prefix).unwrap();

        let resumed = resume(&cfg, &opts).unwrap();
        assert_eq!(resumed, full);

        // resuming with zero completed chunks is a full run
        std::fs::write(&path, format!("{}\n", lines[0])).unwrap();
        let from_scratch = resume(&cfg, &opts).unwrap();
        assert_eq!(from_scratch, full);
    }

    #[test]
    fn checkpoint_digest_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let opts = CheckOptions::default();

        let mut cfg = claim_cfg("lemma-u1", 3, 100);
        cfg.checkpoint_path = Some(path.clone());
        sweep(&cfg, &opts).unwrap();

        let mut altered = cfg.clone();
        altered.n_hi = 120;
        let err = resume(&altered, &opts).unwrap_err();
        assert!(matches!(err, Error::DigestMismatch { .. }));
    }

    #[test]
    fn corrupt_checkpoint_record_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let opts = CheckOptions::default();

        let mut cfg = claim_cfg("lemma-u1", 3, 100);
        cfg.checkpoint_path = Some(path.clone());
        sweep(&cfg, &opts).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        // flip a payload byte inside the second line, keeping the stored crc
        let corrupted: Vec<String> = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                if i == 1 {
                    l.replace("\"checked\":", "\"chacked\":")
                } else {
                    l.to_string()
                }
            })
            .collect();
        std::fs::write(&path, corrupted.join("\n") + "\n").unwrap();

        let err = resume(&cfg, &opts).unwrap_err();
        assert!(matches!(err, Error::CorruptCheckpoint { .. }));
    }

    #[test]
    fn interrupted_trailing_write_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let opts = CheckOptions::default();

        let mut cfg = claim_cfg("lemma-u1", 3, 80);
        cfg.checkpoint_path = Some(path.clone());
        let full = sweep(&cfg, &opts).unwrap();

        // simulate a crash mid-record: partial line, no newline terminator
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("deadbeef {\"record\":\"chunk\",\"index\":9");
        std::fs::write(&path, text).unwrap();

        let resumed = resume(&cfg, &opts).unwrap();
        assert_eq!(resumed, full);
    }

    #[test]
    fn checkpoint_info_reconstructs_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let opts = CheckOptions::default();

        let mut cfg = claim_cfg("thm-ukz", 2, 60);
        cfg.checkpoint_path = Some(path.clone());
        sweep(&cfg, &opts).unwrap();

        let info = read_checkpoint_info(&path).unwrap();
        assert_eq!(info.digest, cfg.digest());
        assert_eq!(info.n_lo, 2);
        assert_eq!(info.n_hi, 60);
        assert_eq!(info.chunk_size, 16);
        assert_eq!(info.completed_chunks, (0..cfg.num_chunks()).collect::<Vec<_>>());
        assert_eq!(
            info.task,
            ScanTask::Claim {
                id: "thm-ukz".into(),
                k_policy: KPolicy::AllValid
            }
        );
    }

    #[test]
    fn resume_without_checkpoint_is_an_error() {
        let cfg = claim_cfg("lemma-u1", 3, 50);
        assert!(matches!(
            resume(&cfg, &CheckOptions::default()).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn census_crosscheck_full_exact_small() {
        // literal congruence kernel vs the exact integer power sum
        for n in 2..=300u64 {
            let expected = exact::mod_u64(&exact::power_sum(n - 1, n), n);
            assert_eq!(modular::giuga_residue(n).unwrap().r, expected, "n={n}");
        }
    }

    #[test]
    fn census_crosscheck_bigint_modpow_to_2000() {
        // Independent oracle: per-term arbitrary-precision modpow. Equal to
        // the exact integer sum reduced mod n by modular arithmetic laws.
        let failures: Vec<u64> = (2..=2000u64)
            .into_par_iter()
            .filter(|&n| {
                let m = BigUint::from(n);
                let e = BigUint::from(n - 1);
                let mut acc = BigUint::zero();
                for j in 1..n {
                    acc += BigUint::from(j).modpow(&e, &m);
                }
                let expected = exact::mod_u64(&acc, n);
                modular::giuga_residue(n).unwrap().r != expected
            })
            .collect();
        assert!(failures.is_empty(), "mismatches at {failures:?}");
    }
}
