//! Live search sessions that a person can steer, and a line-based JSON
//! protocol over TCP to drive them.
//!
//! A session runs its search on a worker thread. Commands are queued and
//! applied between two node expansions, so the stack a client sees is never
//! half-updated.

use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Answer, Goal, Level, Search, StepResult};
use crate::position::Position;
use crate::store::Store;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Paused,
    Done,
    Failed,
}

/// Point-in-time view of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub levels: Vec<Level>,
    pub status: Status,
    pub nodes: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<Answer>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Command {
    RedirectChild { level: usize, ordinal: usize },
    RedirectLand { level: usize, ordinal: usize },
    Pause,
    Resume,
    Step,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CommandError {
    #[error("{0}")]
    Steer(String),
    #[error("step needs a paused session")]
    StepWhileRunning,
    #[error("session is finished")]
    Finished,
    #[error("session worker is gone")]
    Closed,
}

/// A command as applied, with the node count at that moment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub nodes: u64,
    pub command: Command,
}

enum Request {
    Command(Command, Sender<Result<(), CommandError>>),
    Stop,
}

struct Shared {
    state: Mutex<SessionState>,
    changed: Condvar,
    log: Mutex<Vec<LogEntry>>,
}

pub struct Session {
    tx: Sender<Request>,
    shared: Arc<Shared>,
    worker: Option<JoinHandle<()>>,
}

impl Session {
    /// Starts a search on `root`. With `paused`, nothing is expanded until
    /// a `resume` or `step`.
    pub fn start(store: Arc<Store>, root: &Position, goal: Goal, paused: bool) -> Session {
        Session::start_with_budget(store, root, goal, paused, None)
    }

    pub fn start_with_budget(
        store: Arc<Store>,
        root: &Position,
        goal: Goal,
        paused: bool,
        budget: Option<u64>,
    ) -> Session {
        let search = Search::new(store, root, goal).with_budget(budget);
        let status = if paused {
            Status::Paused
        } else {
            Status::Running
        };
        let shared = Arc::new(Shared {
            state: Mutex::new(view(&search, status, None)),
            changed: Condvar::new(),
            log: Mutex::new(Vec::new()),
        });
        let (tx, rx) = mpsc::channel();
        let worker = {
            let shared = shared.clone();
            thread::spawn(move || {
                Worker {
                    search,
                    status,
                    shared,
                }
                .run(rx)
            })
        };
        Session {
            tx,
            shared,
            worker: Some(worker),
        }
    }

    pub fn snapshot(&self) -> SessionState {
        self.shared.state.lock().unwrap().clone()
    }

    /// Queues a command and waits until the worker has applied it.
    pub fn command(&self, command: Command) -> Result<(), CommandError> {
        let (tx, rx) = mpsc::channel();
        self.tx
            .send(Request::Command(command, tx))
            .map_err(|_| CommandError::Closed)?;
        rx.recv().map_err(|_| CommandError::Closed)?
    }

    /// Blocks until the search ends.
    pub fn wait(&self) -> Result<Answer, String> {
        let mut state = self.shared.state.lock().unwrap();
        loop {
            match state.status {
                Status::Done => return Ok(state.result.expect("done sessions have a result")),
                Status::Failed => return Err(state.error.clone().unwrap_or_default()),
                _ => state = self.shared.changed.wait(state).unwrap(),
            }
        }
    }

    /// Blocks until the state differs from `seen` or `timeout` passes.
    pub fn wait_change(&self, seen: &SessionState, timeout: Duration) -> SessionState {
        let state = self.shared.state.lock().unwrap();
        let (state, _) = self
            .shared
            .changed
            .wait_timeout_while(state, timeout, |s| s == seen)
            .unwrap();
        state.clone()
    }

    /// Every command applied so far; replaying it on a fresh session with
    /// the same store reproduces the run.
    pub fn log(&self) -> Vec<LogEntry> {
        self.shared.log.lock().unwrap().clone()
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.tx.send(Request::Stop);
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn view(search: &Search, status: Status, error: Option<String>) -> SessionState {
    SessionState {
        levels: if search.answer().is_some() {
            Vec::new()
        } else {
            search.levels()
        },
        status,
        nodes: search.nodes(),
        result: search.answer(),
        error,
    }
}

struct Worker {
    search: Search,
    status: Status,
    shared: Arc<Shared>,
}

impl Worker {
    fn publish(&self, error: Option<String>) {
        *self.shared.state.lock().unwrap() = view(&self.search, self.status, error);
        self.shared.changed.notify_all();
    }

    fn advance(&mut self) {
        match self.search.step() {
            Ok(StepResult::Running) => self.publish(None),
            Ok(StepResult::Done(_)) => {
                self.status = Status::Done;
                self.publish(None);
            }
            Err(e) => {
                self.status = Status::Failed;
                self.publish(Some(e.to_string()));
            }
        }
    }

    fn apply(&mut self, command: Command) -> Result<(), CommandError> {
        let finished = matches!(self.status, Status::Done | Status::Failed);
        let steer = |e: crate::engine::SteerError| CommandError::Steer(e.to_string());
        match command {
            _ if finished => return Err(CommandError::Finished),
            Command::Pause => self.status = Status::Paused,
            Command::Resume => self.status = Status::Running,
            Command::Step => {
                if self.status == Status::Running {
                    return Err(CommandError::StepWhileRunning);
                }
                self.advance();
            }
            Command::RedirectChild { level, ordinal } => {
                self.search.redirect_child(level, ordinal).map_err(steer)?
            }
            Command::RedirectLand { level, ordinal } => {
                self.search.redirect_land(level, ordinal).map_err(steer)?
            }
        }
        self.shared.log.lock().unwrap().push(LogEntry {
            nodes: self.search.nodes(),
            command,
        });
        if command != Command::Step {
            self.publish(None);
        }
        Ok(())
    }

    fn handle(&mut self, req: Request) -> bool {
        match req {
            Request::Stop => false,
            Request::Command(c, reply) => {
                let r = self.apply(c);
                let _ = reply.send(r);
                true
            }
        }
    }

    fn run(mut self, rx: Receiver<Request>) {
        loop {
            if self.status == Status::Running {
                loop {
                    match rx.try_recv() {
                        Ok(req) => {
                            if !self.handle(req) {
                                return;
                            }
                        }
                        Err(mpsc::TryRecvError::Empty) => break,
                        Err(mpsc::TryRecvError::Disconnected) => return,
                    }
                }
                if self.status == Status::Running {
                    self.advance();
                }
            } else {
                match rx.recv() {
                    Ok(req) => {
                        if !self.handle(req) {
                            return;
                        }
                    }
                    Err(_) => return,
                }
            }
        }
    }
}

/// Several sessions under one roof, with a cap on how many run at once.
pub struct Service {
    store: Arc<Store>,
    sessions: Mutex<HashMap<u64, Arc<Session>>>,
    next_id: Mutex<u64>,
    limit: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ServiceError {
    #[error("at most {0} sessions may be open")]
    Limit(usize),
    #[error("no session {0}")]
    Unknown(u64),
}

impl Service {
    pub fn new(store: Arc<Store>, limit: usize) -> Service {
        Service {
            store,
            sessions: Mutex::new(HashMap::new()),
            next_id: Mutex::new(1),
            limit,
        }
    }

    pub fn start(&self, root: &Position, goal: Goal, paused: bool) -> Result<u64, ServiceError> {
        let mut sessions = self.sessions.lock().unwrap();
        sessions.retain(|_, s| !matches!(s.snapshot().status, Status::Done | Status::Failed));
        if sessions.len() >= self.limit {
            return Err(ServiceError::Limit(self.limit));
        }
        let mut next = self.next_id.lock().unwrap();
        let id = *next;
        *next += 1;
        sessions.insert(
            id,
            Arc::new(Session::start(self.store.clone(), root, goal, paused)),
        );
        Ok(id)
    }

    pub fn session(&self, id: u64) -> Result<Arc<Session>, ServiceError> {
        self.sessions
            .lock()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or(ServiceError::Unknown(id))
    }

    pub fn snapshot(&self, id: u64) -> Result<SessionState, ServiceError> {
        Ok(self.session(id)?.snapshot())
    }
}

/// Client to server message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientMessage {
    pub v: u32,
    #[serde(flatten)]
    pub command: Command,
}

/// Server to client message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ServerBody {
    Snapshot(SessionState),
    Ack { command: Command },
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerMessage {
    pub v: u32,
    #[serde(flatten)]
    pub body: ServerBody,
}

impl ServerMessage {
    pub fn new(body: ServerBody) -> ServerMessage {
        ServerMessage {
            v: PROTOCOL_VERSION,
            body,
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("messages serialize");
        s.push('\n');
        s
    }
}

/// Answer to one line of client input.
pub fn handle_line(session: &Session, line: &str) -> ServerMessage {
    let body = match serde_json::from_str::<ClientMessage>(line) {
        Err(e) => ServerBody::Error {
            message: format!("bad message: {e}"),
        },
        Ok(m) if m.v != PROTOCOL_VERSION => ServerBody::Error {
            message: format!("unsupported version {}", m.v),
        },
        Ok(m) => match session.command(m.command) {
            Ok(()) => ServerBody::Ack { command: m.command },
            Err(e) => ServerBody::Error {
                message: e.to_string(),
            },
        },
    };
    ServerMessage::new(body)
}

/// Serves one client: a snapshot on connect, a reply and a snapshot per
/// command, and a snapshot whenever the state changes (at most one per
/// `interval`). Returns when the client disconnects.
pub fn serve_client(session: &Session, stream: TcpStream, interval: Duration) -> io::Result<()> {
    stream.set_read_timeout(Some(interval))?;
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut last = session.snapshot();
    writer.write_all(
        ServerMessage::new(ServerBody::Snapshot(last.clone()))
            .to_line()
            .as_bytes(),
    )?;
    let mut line = String::new();
    loop {
        match reader.read_line(&mut line) {
            Ok(0) => return Ok(()),
            Ok(_) => {
                if !line.trim().is_empty() {
                    let reply = handle_line(session, line.trim());
                    writer.write_all(reply.to_line().as_bytes())?;
                    last = session.snapshot();
                    writer.write_all(
                        ServerMessage::new(ServerBody::Snapshot(last.clone()))
                            .to_line()
                            .as_bytes(),
                    )?;
                }
                line.clear();
            }
            Err(e)
                if matches!(
                    e.kind(),
                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                ) =>
            {
                let now = session.snapshot();
                if now != last {
                    last = now;
                    writer.write_all(
                        ServerMessage::new(ServerBody::Snapshot(last.clone()))
                            .to_line()
                            .as_bytes(),
                    )?;
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Accepts clients one after the other until the session ends and the
/// current client leaves. Returns the bound address through `bound`.
pub fn serve(
    session: Arc<Session>,
    addr: impl ToSocketAddrs,
    interval: Duration,
    bound: Option<Sender<std::net::SocketAddr>>,
) -> io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    if let Some(b) = bound {
        let _ = b.send(listener.local_addr()?);
    }
    for stream in listener.incoming() {
        serve_client(&session, stream?, interval)?;
        if matches!(session.snapshot().status, Status::Done | Status::Failed) {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> Arc<Store> {
        Arc::new(Store::new())
    }

    #[test]
    fn unsteered_session_finishes() {
        let s = Session::start(store(), &Position::start(3), Goal::Nimber, false);
        let a = s.wait().unwrap();
        assert_eq!(a.nimber, Some(1));
        let snap = s.snapshot();
        assert_eq!(snap.status, Status::Done);
        assert_eq!(snap.result, Some(a));
    }

    #[test]
    fn empty_position_is_done_at_once() {
        let s = Session::start(store(), &Position::empty(), Goal::Outcome(0), false);
        assert_eq!(s.wait().unwrap().outcome, crate::engine::Outcome::Loss);
    }

    #[test]
    fn pause_step_resume() {
        let s = Session::start(store(), &Position::start(4), Goal::Outcome(0), true);
        let a = s.snapshot();
        assert_eq!(a.status, Status::Paused);
        assert!(!a.levels.is_empty());
        assert_eq!(s.snapshot(), a);
        s.command(Command::Step).unwrap();
        assert_eq!(s.snapshot().nodes, a.nodes + 1);
        s.command(Command::Resume).unwrap();
        let r = s.command(Command::Step);
        assert!(matches!(
            r,
            Err(CommandError::StepWhileRunning | CommandError::Finished)
        ));
        s.wait().unwrap();
        assert_eq!(s.command(Command::Resume), Err(CommandError::Finished));
    }

    #[test]
    fn bad_redirects_are_rejected() {
        let s = Session::start(store(), &Position::start(3), Goal::Outcome(0), true);
        for _ in 0..3 {
            s.command(Command::Step).unwrap();
        }
        assert!(s
            .command(Command::RedirectChild {
                level: 99,
                ordinal: 0
            })
            .is_err());
        assert!(s
            .command(Command::RedirectChild {
                level: 1,
                ordinal: 999
            })
            .is_err());
        assert!(s
            .command(Command::RedirectLand {
                level: 1,
                ordinal: 1
            })
            .is_err());
        s.command(Command::RedirectChild {
            level: 1,
            ordinal: 0,
        })
        .unwrap();
        assert_eq!(s.log().len(), 4);
    }

    #[test]
    fn wire_format() {
        let m: ClientMessage =
            serde_json::from_str(r#"{"v":1,"type":"redirectChild","level":2,"ordinal":3}"#)
                .unwrap();
        assert_eq!(
            m.command,
            Command::RedirectChild {
                level: 2,
                ordinal: 3
            }
        );
        let m: ClientMessage = serde_json::from_str(r#"{"v":1,"type":"pause"}"#).unwrap();
        assert_eq!(m.command, Command::Pause);
        let snap = ServerMessage::new(ServerBody::Snapshot(SessionState {
            levels: vec![Level {
                level: 1,
                position: "0.0.}]!".into(),
                nimber_part: 0,
                phase: crate::engine::Phase::Expanding,
                tried: 0,
                total: 2,
            }],
            status: Status::Running,
            nodes: 1,
            result: None,
            error: None,
        }));
        let v: serde_json::Value = serde_json::from_str(&snap.to_line()).unwrap();
        assert_eq!(v["v"], 1);
        assert_eq!(v["type"], "snapshot");
        assert_eq!(v["levels"][0]["nimberPart"], 0);
        assert_eq!(v["levels"][0]["phase"], "expanding");
        assert_eq!(v["status"], "running");
    }
}
