//! Verification certificates: what was checked, how, with which seed, and
//! every witness of failure.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::sampling::Shard;

/// Witnesses kept per certificate; the failure count is always exact.
pub const MAX_WITNESSES: usize = 64;

pub const TOOLCHAIN: &str = concat!("eggunital ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The computation could not settle the claim and flags it instead.
    Review,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub object: String,
    pub spec_hash: Option<String>,
    pub mode: String,
    pub seed: Option<u64>,
    pub shard: Option<Shard>,
    pub status: Status,
    pub checks_run: u64,
    pub failure_count: u64,
    pub failures: Vec<Value>,
    pub details: BTreeMap<String, Value>,
    pub depends_on: Vec<Certificate>,
    pub wall_time_ms: u64,
    pub toolchain: String,
}

/// SHA-256 of a serializable spec, hex encoded.
pub fn spec_hash<T: Serialize>(spec: &T) -> String {
    let bytes = serde_json::to_vec(spec).expect("specs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Certificate {
    pub fn new(object: impl Into<String>, mode: impl Into<String>) -> Self {
        Certificate {
            object: object.into(),
            spec_hash: None,
            mode: mode.into(),
            seed: None,
            shard: None,
            status: Status::Pass,
            checks_run: 0,
            failure_count: 0,
            failures: Vec::new(),
            details: BTreeMap::new(),
            depends_on: Vec::new(),
            wall_time_ms: 0,
            toolchain: TOOLCHAIN.to_string(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_shard(mut self, shard: Shard) -> Self {
        if shard.count > 1 {
            self.shard = Some(shard);
        }
        self
    }

    pub fn with_spec<T: Serialize>(mut self, spec: &T) -> Self {
        self.spec_hash = Some(spec_hash(spec));
        self
    }

    pub fn add_checks(&mut self, n: u64) {
        self.checks_run += n;
    }

    pub fn fail(&mut self, witness: Value) {
        self.failure_count += 1;
        if self.failures.len() < MAX_WITNESSES {
            self.failures.push(witness);
        }
        self.status = Status::Fail;
    }

    /// Merges a tally of `(checks, failure witnesses)` from a sweep.
    pub fn absorb(&mut self, checks: u64, failures: impl IntoIterator<Item = Value>) {
        self.checks_run += checks;
        for w in failures {
            self.fail(w);
        }
    }

    pub fn absorb_tally(&mut self, tally: Tally) {
        self.checks_run += tally.checks;
        if tally.failures > 0 {
            self.failure_count += tally.failures;
            self.status = Status::Fail;
            let room = MAX_WITNESSES.saturating_sub(self.failures.len());
            self.failures.extend(tally.witnesses.into_iter().take(room));
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.to_string(), serde_json::to_value(value).expect("details serialize"));
    }

    pub fn flag_review(&mut self, reason: &str) {
        if self.status == Status::Pass {
            self.status = Status::Review;
        }
        self.detail("review_reason", reason);
    }

    /// Embeds a prerequisite certificate; a failed prerequisite fails this one.
    pub fn depend(&mut self, cert: Certificate) {
        if cert.status != Status::Pass && self.status == Status::Pass {
            self.status = cert.status;
        }
        self.depends_on.push(cert);
    }

    pub fn finish(mut self, started: Instant) -> Self {
        self.wall_time_ms = started.elapsed().as_millis() as u64;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// A copy with timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Certificate {
        let mut c = self.clone();
        c.wall_time_ms = 0;
        c.depends_on = c.depends_on.iter().map(Certificate::without_timing).collect();
        c
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("certificates serialize")
    }
}

/// Check and failure counts of a sweep, with the first witnesses in index order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tally {
    pub checks: u64,
    pub failures: u64,
    pub witnesses: Vec<Value>,
}

impl Tally {
    pub fn record(&mut self, outcome: Option<Value>) {
        self.checks += 1;
        if let Some(w) = outcome {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.failures += other.failures;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
        self
    }
}

/// Runs `check` on every index of the shard in parallel; `check` returns a
/// failure witness or `None`. The result does not depend on thread count.
pub fn par_sweep<F>(shard: Shard, total: u64, check: F) -> Tally
where
    F: Fn(u64) -> Option<Value> + Sync,
{
    let owned = if total > shard.index as u64 { (total - shard.index as u64).div_ceil(shard.count as u64) } else { 0 };
    (0..owned)
        .into_par_iter()
        .map(|k| shard.index as u64 + k * shard.count as u64)
        .fold(Tally::default, |mut t, i| {
            t.record(check(i));
            t
        })
        .reduce(Tally::default, Tally::merge)
}

/// Like [`par_sweep`], but each index may perform several checks and report
/// several witnesses.
pub fn par_sweep_many<F>(shard: Shard, total: u64, check: F) -> Tally
where
    F: Fn(u64) -> Tally + Sync,
{
    let owned = if total > shard.index as u64 { (total - shard.index as u64).div_ceil(shard.count as u64) } else { 0 };
    (0..owned)
        .into_par_iter()
        .map(|k| check(shard.index as u64 + k * shard.count as u64))
        .reduce(Tally::default, Tally::merge)
}
