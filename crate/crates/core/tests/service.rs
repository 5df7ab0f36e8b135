use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use sprouts_core::explore::{serve, ServerBody, ServerMessage, Status, PROTOCOL_VERSION};
use sprouts_core::{Goal, Position, Session, Store};

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(session: Arc<Session>) -> (Client, thread::JoinHandle<std::io::Result<()>>) {
        let (tx, rx) = mpsc::channel();
        let server = thread::spawn(move || {
            serve(session, "127.0.0.1:0", Duration::from_millis(20), Some(tx))
        });
        let addr = rx.recv_timeout(Duration::from_secs(5)).unwrap();
        let stream = TcpStream::connect(addr).unwrap();
        stream
            .set_read_timeout(Some(Duration::from_secs(30)))
            .unwrap();
        let client = Client {
            reader: BufReader::new(stream.try_clone().unwrap()),
            writer: stream,
        };
        (client, server)
    }

    fn recv(&mut self) -> ServerMessage {
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        let raw: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(raw["v"], PROTOCOL_VERSION);
        serde_json::from_value(raw).unwrap()
    }

    fn send(&mut self, v: Value) {
        self.writer.write_all(format!("{v}\n").as_bytes()).unwrap();
    }

    /// Reply to the last command, skipping periodic snapshots.
    fn reply(&mut self) -> ServerBody {
        loop {
            let m = self.recv();
            if !matches!(m.body, ServerBody::Snapshot(_)) {
                return m.body;
            }
        }
    }
}

fn paused(p: usize) -> Arc<Session> {
    Arc::new(Session::start(
        Arc::new(Store::new()),
        &Position::start(p),
        Goal::Nimber,
        true,
    ))
}

#[test]
fn snapshot_on_connect_and_steps() {
    let (mut c, _server) = Client::connect(paused(4));
    let ServerBody::Snapshot(first) = c.recv().body else {
        panic!("expected a snapshot first")
    };
    assert_eq!(first.status, Status::Paused);
    c.send(json!({"v": 1, "type": "step"}));
    assert!(matches!(c.reply(), ServerBody::Ack { .. }));
    let ServerBody::Snapshot(after) = c.recv().body else {
        panic!("expected a snapshot after the reply")
    };
    assert!(after.nodes > first.nodes);
    assert!(!after.levels.is_empty());
}

#[test]
fn bad_input_gets_an_error_reply() {
    let (mut c, _server) = Client::connect(paused(3));
    c.recv();
    c.send(json!({"v": 99, "type": "step"}));
    assert!(matches!(c.reply(), ServerBody::Error { .. }));
    c.send(json!({"v": 1, "type": "fly"}));
    assert!(matches!(c.reply(), ServerBody::Error { .. }));
    c.send(json!({"v": 1, "type": "redirectChild", "level": 40, "ordinal": 1}));
    assert!(matches!(c.reply(), ServerBody::Error { .. }));
}

#[test]
fn resume_runs_to_the_answer() {
    let session = paused(5);
    let (mut c, server) = Client::connect(session.clone());
    c.recv();
    c.send(json!({"v": 1, "type": "resume"}));
    assert!(matches!(c.reply(), ServerBody::Ack { .. }));
    let answer = session.wait().unwrap();
    assert_eq!(answer.nimber, Some(1));
    let done = loop {
        match c.recv().body {
            ServerBody::Snapshot(s) if s.status == Status::Done => break s,
            _ => {}
        }
    };
    assert_eq!(done.result, Some(answer));
    drop(c);
    server.join().unwrap().unwrap();
}
