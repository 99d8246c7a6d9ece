//! Helpers for driving the `cg` binary and its HTTP API.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub const DEXTER: &str = "dexter-ht-ref-model";
pub const BATTERY: [&str; 5] = [
    "dexter-prelude",
    "dexter",
    "extension-amsterdam",
    "extension-devise",
    "devise-system",
];

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(format!("{name}.scl"))
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn cg(data: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cg"));
    c.arg("--data").arg(data).env_remove("CG_DATA").env("RUST_LOG", "warn");
    c
}

pub fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn cg")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Query strings built by tests only contain ids, spaces and digits.
pub fn encode(q: &str) -> String {
    q.replace(' ', "+")
}

/// In-process request against the router.
pub async fn call(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

/// A `cg serve` child process; killed on drop.
pub struct Server {
    pub child: Child,
    pub addr: SocketAddr,
}

impl Server {
    pub fn start(data: &Path, extra: &[&str]) -> Server {
        let mut child = cg(data)
            .args(["serve", "--port", "0"])
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn cg serve");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .parse()
            .unwrap();
        Server { child, addr }
    }

    pub fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.kill();
    }
}

/// Minimal HTTP/1.1 exchange with `Connection: close`.
pub fn http(addr: SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<(u16, String)> {
    let mut s = TcpStream::connect(addr)?;
    s.set_read_timeout(Some(Duration::from_secs(30)))?;
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: text/plain\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )?;
    let mut raw = String::new();
    s.read_to_string(&mut raw)?;
    let (head, rest) = raw
        .split_once("\r\n\r\n")
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "truncated response"))?;
    let status = head
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidData, "bad status line"))?;
    Ok((status, rest.to_string()))
}

/// Documents that support `l` and challenge `m`, and as many the other way.
pub fn schools_submissions(per_side: usize) -> Vec<String> {
    let mut out = vec!["(language l)\n(language m)\n".to_string()];
    for side in 0..2 {
        let (pro, con) = if side == 0 { ("l", "m") } else { ("m", "l") };
        for i in 0..per_side {
            let challenge = if i % 2 == 0 { "refutes" } else { "raises-issues-with" };
            out.push(format!(
                "(article doc{side}-{i} (has-author author{side}-{i}) (describes e{side}-{i}))\n\
                 (evidence e{side}-{i} (supports {pro}) ({challenge} {con}))\n"
            ));
        }
    }
    out
}

pub fn schools_profile(id: &str, min: usize) -> String {
    format!("(profile {id}\n  (when supports l challenges m min {min})\n  (when supports m challenges l min {min}))\n")
}

/// The assertion every later claim of the inconsistency fixture talks about.
pub const FIG6_PRELUDE: &str = "(methodology m)\n(problem p)\n(idea x)\n\
    (claim (by a0) (assert m addresses p) (because \"m solves p\"))\n";

pub fn fig6_claims(y: &str, support: &str, refute: &str) -> String {
    format!(
        "(claim (by {support}) (assert x supports {y}) (because \"agree\"))\n\
         (claim (by {refute}) (assert x refutes {y}) (because \"disagree\"))\n"
    )
}

pub struct KillOutcome {
    pub acked: usize,
    pub records: u64,
    pub sent: Vec<String>,
    pub logged: Vec<String>,
    pub replay_matches_open: bool,
}

/// Submission `i` of the kill test; the long title makes each record span
/// several kilobytes.
pub fn kill_submission(i: usize) -> String {
    format!(
        "(article art-{i} (has-author author-{}) (has-title \"{}\") (describes idea-{i}))\n\
         (problem problem-{})\n(idea idea-{i} (addresses problem-{}))\n",
        i % 7,
        "x".repeat(2048 + i),
        i % 5,
        i % 5
    )
}

/// Posts submissions one at a time to a live server, kills it with SIGKILL
/// after `after`, then recovers the data directory.
pub fn kill_and_replay(after: Duration) -> KillOutcome {
    use std::sync::atomic::{AtomicBool, Ordering};
    use std::sync::Arc;

    let dir = tempfile::tempdir().unwrap();
    let mut server = Server::start(dir.path(), &[]);
    let addr = server.addr;
    let stop = Arc::new(AtomicBool::new(false));
    let client = {
        let stop = stop.clone();
        std::thread::spawn(move || {
            let (mut acked, mut sent) = (0, Vec::new());
            while !stop.load(Ordering::SeqCst) {
                let text = kill_submission(sent.len());
                sent.push(text.clone());
                match http(addr, "POST", "/submissions", &text) {
                    Ok((201, _)) => acked += 1,
                    _ => break,
                }
            }
            (acked, sent)
        })
    };
    std::thread::sleep(after);
    server.kill();
    stop.store(true, Ordering::SeqCst);
    let (acked, sent) = client.join().unwrap();

    let repo = claimgraph::store::Repository::open(dir.path()).expect("recovering open");
    let logged = claimgraph::store::read_log(dir.path())
        .unwrap()
        .into_iter()
        .map(|r| r.text)
        .collect();
    let replay_matches_open = claimgraph::store::replay(dir.path()).unwrap().content_hash() == repo.kb().content_hash();
    KillOutcome {
        acked,
        records: repo.log_len(),
        sent,
        logged,
        replay_matches_open,
    }
}

impl KillOutcome {
    /// At most the in-flight submission is lost, and what survives is a
    /// prefix of what was sent.
    pub fn check(&self) -> Result<(), String> {
        let n = self.records as usize;
        if n < self.acked || n > self.acked + 1 {
            return Err(format!("{} acked but {n} records", self.acked));
        }
        if self.logged.len() != n || self.logged[..] != self.sent[..n] {
            return Err("log is not a prefix of the submissions sent".into());
        }
        if !self.replay_matches_open {
            return Err("replay differs from the recovered repository".into());
        }
        Ok(())
    }
}
