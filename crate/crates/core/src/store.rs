//! Persistence: an append-only JSON-lines event log of accepted submissions
//! in `DIR/events.log`, plus optional `DIR/schema.scl` and
//! `DIR/profiles.scl`. Replaying the log onto the schema rebuilds the KB.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::{parse_profiles, parse_schema, print_profile, DslError};
use crate::inference::InterestProfile;
use crate::ingest::{ingest_text, IngestError, IngestReport};
use crate::kb::{KnowledgeBase, Timestamp};
use crate::schema::SchemaRegistry;

pub const LOG_FILE: &str = "events.log";
pub const SCHEMA_FILE: &str = "schema.scl";
pub const PROFILES_FILE: &str = "profiles.scl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt log record {0}")]
    CorruptRecord(u64),
    #[error("log record {seq} no longer applies: {message}")]
    ReplayFailed { seq: u64, message: String },
    #[error("{file}: {error}")]
    Config { file: &'static str, error: DslError },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub source: String,
    pub lax: bool,
    pub text: String,
    pub checksum: String,
}

impl LogRecord {
    pub fn new(seq: u64, timestamp: Timestamp, source: &str, lax: bool, text: &str) -> Self {
        let mut r = LogRecord {
            seq,
            timestamp,
            source: source.to_string(),
            lax,
            text: text.to_string(),
            checksum: String::new(),
        };
        r.checksum = r.expected_checksum();
        r
    }

    fn expected_checksum(&self) -> String {
        let body = serde_json::to_vec(&(self.seq, self.timestamp, &self.source, self.lax, &self.text))
            .expect("record fields serialize");
        hex::encode(Sha256::digest(&body))
    }

    pub fn is_intact(&self) -> bool {
        self.checksum == self.expected_checksum()
    }
}

fn decode(line: &[u8], seq: u64) -> Option<LogRecord> {
    let r: LogRecord = serde_json::from_slice(line).ok()?;
    (r.seq == seq && r.is_intact()).then_some(r)
}

/// Reads every record. Strict mode fails on any damage; otherwise a damaged
/// final record is reported through the returned byte length of the intact
/// prefix so the caller can truncate it.
fn read_records(path: &Path, strict: bool) -> Result<(Vec<LogRecord>, u64), StoreError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut records = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        let seq = records.len() as u64 + 1;
        let rest = &bytes[offset..];
        let (line, complete) = match rest.iter().position(|&b| b == b'\n') {
            Some(n) => (&rest[..n], true),
            None => (rest, false),
        };
        let decoded = if complete { decode(line, seq) } else { None };
        match decoded {
            Some(r) => {
                records.push(r);
                offset += line.len() + 1;
            }
            None => {
                let is_last = !complete || offset + line.len() + 1 == bytes.len();
                if strict || !is_last {
                    return Err(StoreError::CorruptRecord(seq));
                }
                log::warn!("{}: dropping torn record {seq}", path.display());
                break;
            }
        }
    }
    Ok((records, offset as u64))
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

impl EventLog {
    /// Opens (creating if needed) the log in `dir`, truncating a torn final
    /// record left by an interrupted write.
    pub fn open(dir: &Path) -> Result<(Self, Vec<LogRecord>), StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(LOG_FILE);
        let (records, intact) = read_records(&path, false)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let len = file.metadata().map_err(io_err(&path))?.len();
        if len > intact {
            file.set_len(intact).map_err(io_err(&path))?;
            file.sync_all().map_err(io_err(&path))?;
        }
        let next_seq = records.len() as u64 + 1;
        Ok((EventLog { path, file, next_seq }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Appends and syncs one record.
    pub fn append(&mut self, timestamp: Timestamp, source: &str, lax: bool, text: &str) -> Result<LogRecord, StoreError> {
        let record = LogRecord::new(self.next_seq, timestamp, source, lax, text);
        let mut line = serde_json::to_vec(&record).expect("records serialize");
        line.push(b'\n');
        self.file.write_all(&line).map_err(io_err(&self.path))?;
        self.file.sync_data().map_err(io_err(&self.path))?;
        self.next_seq += 1;
        Ok(record)
    }
}

pub fn read_log(dir: &Path) -> Result<Vec<LogRecord>, StoreError> {
    Ok(read_records(&dir.join(LOG_FILE), true)?.0)
}

/// `DIR/schema.scl` when present, otherwise the built-in schema.
pub fn load_schema(dir: &Path) -> Result<SchemaRegistry, StoreError> {
    let path = dir.join(SCHEMA_FILE);
    match fs::read_to_string(&path) {
        Ok(text) => parse_schema(&text).map_err(|error| StoreError::Config {
            file: SCHEMA_FILE,
            error,
        }),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(SchemaRegistry::builtin()),
        Err(e) => Err(io_err(&path)(e)),
    }
}

fn load_profiles(dir: &Path, schema: &SchemaRegistry) -> Result<Vec<InterestProfile>, StoreError> {
    let path = dir.join(PROFILES_FILE);
    match fs::read_to_string(&path) {
        Ok(text) => parse_profiles(&text, schema).map_err(|error| StoreError::Config {
            file: PROFILES_FILE,
            error,
        }),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(io_err(&path)(e)),
    }
}

fn apply_records(mut kb: KnowledgeBase, records: &[LogRecord]) -> Result<KnowledgeBase, StoreError> {
    for r in records {
        kb = ingest_text(&kb, &r.text, r.timestamp, r.lax)
            .map_err(|e| StoreError::ReplayFailed {
                seq: r.seq,
                message: e.to_string(),
            })?
            .0;
    }
    Ok(kb)
}

/// Rebuilds the KB from `dir` without modifying anything. Any damaged record
/// is an error.
pub fn replay(dir: &Path) -> Result<KnowledgeBase, StoreError> {
    let schema = load_schema(dir)?;
    apply_records(KnowledgeBase::new(schema), &read_log(dir)?)
}

pub fn now_millis() -> Timestamp {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as Timestamp)
        .unwrap_or(0)
}

/// A data directory opened for writing: the log, the live KB and the
/// registered interest profiles.
#[derive(Debug)]
pub struct Repository {
    dir: PathBuf,
    log: EventLog,
    kb: KnowledgeBase,
    profiles: Vec<InterestProfile>,
}

impl Repository {
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let (log, records) = EventLog::open(dir)?;
        let schema = load_schema(dir)?;
        let profiles = load_profiles(dir, &schema)?;
        let kb = apply_records(KnowledgeBase::new(schema), &records)?;
        Ok(Repository {
            dir: dir.to_path_buf(),
            log,
            kb,
            profiles,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn profiles(&self) -> &[InterestProfile] {
        &self.profiles
    }

    pub fn log_len(&self) -> u64 {
        self.log.next_seq() - 1
    }

    pub fn ingest(&mut self, text: &str, source: &str, lax: bool) -> Result<IngestReport, StoreError> {
        self.ingest_at(text, source, lax, now_millis())
    }

    /// Validates against a copy of the KB, appends to the log, then publishes
    /// the copy. Empty submissions are not logged.
    pub fn ingest_at(
        &mut self,
        text: &str,
        source: &str,
        lax: bool,
        timestamp: Timestamp,
    ) -> Result<IngestReport, StoreError> {
        let (next, mut report) = ingest_text(&self.kb, text, timestamp, lax)?;
        if report.articles.is_empty()
            && report.concepts.is_empty()
            && report.accepted_claims() == 0
            && report.skipped.is_empty()
        {
            return Ok(report);
        }
        let record = self.log.append(timestamp, source, lax, text)?;
        report.seq = Some(record.seq);
        self.kb = next;
        Ok(report)
    }

    /// Adds or replaces profiles by id and rewrites `DIR/profiles.scl`.
    pub fn add_profiles(&mut self, text: &str) -> Result<Vec<String>, StoreError> {
        let parsed = parse_profiles(text, self.kb.schema()).map_err(|error| StoreError::Config {
            file: PROFILES_FILE,
            error,
        })?;
        let mut all = self.profiles.clone();
        let mut ids = Vec::new();
        for p in parsed {
            ids.push(p.id.clone());
            match all.iter_mut().find(|q| q.id == p.id) {
                Some(slot) => *slot = p,
                None => all.push(p),
            }
        }
        let body: String = all.iter().map(print_profile).collect::<Vec<_>>().join("\n");
        let path = self.dir.join(PROFILES_FILE);
        let tmp = self.dir.join(format!("{PROFILES_FILE}.tmp"));
        fs::write(&tmp, body).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        self.profiles = all;
        Ok(ids)
    }
}
