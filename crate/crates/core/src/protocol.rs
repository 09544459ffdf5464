//! Newline-delimited JSON debugging protocol.
//!
//! The server writes one event per line. After every port event that is not
//! hidden it waits for exactly one request before letting the query run on.

use std::cell::RefCell;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::rc::Rc;
use std::sync::mpsc::{self, Receiver, TryRecvError};
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::debugger::{observe, parse_pred_spec, DebugSession, Mode, View};
use crate::program::Program;
use crate::solver::{Control, Monitor, Port, Solver, TraceEvent};
use crate::syntax::{write_term, VarStyle, WriteOptions};

pub const DEFAULT_PORT: u16 = 7458;
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Event {
    Hello {
        version: u32,
        file: String,
        goal: String,
    },
    Port {
        n: usize,
        depth: usize,
        port: Port,
        source: Option<String>,
        target: String,
        module: String,
        line: Option<u32>,
        hidden: bool,
    },
    Solution {
        bindings: serde_json::Map<String, serde_json::Value>,
    },
    Done,
    Error {
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "lowercase")]
pub enum Request {
    Step,
    Continue,
    Skip,
    Abort,
    Spy { pred: String },
    Nospy { pred: String },
    View { view: String },
}

pub(crate) enum Incoming {
    Request(Request),
    Malformed(String),
}

type Out = Rc<RefCell<dyn Write>>;

fn send(out: &Out, ev: &Event) -> io::Result<()> {
    let line = serde_json::to_string(ev).expect("events serialize");
    let mut w = out.borrow_mut();
    writeln!(w, "{line}")?;
    w.flush()
}

struct Session<'s, 'p> {
    sess: DebugSession<'p>,
    rx: &'s Receiver<Incoming>,
    out: Out,
    /// Set when the session must end without further output.
    closed: bool,
}

impl Session<'_, '_> {
    fn emit(&mut self, ev: &Event) -> bool {
        if send(&self.out, ev).is_err() {
            self.closed = true;
        }
        !self.closed
    }

    /// Reports requests that arrived without a port event to answer.
    fn reject_early(&mut self) -> bool {
        loop {
            match self.rx.try_recv() {
                Ok(Incoming::Request(r)) => {
                    let msg = format!("request {:?} sent out of turn", r);
                    if !self.emit(&Event::Error { message: msg }) {
                        return false;
                    }
                }
                Ok(Incoming::Malformed(m)) => {
                    self.emit(&Event::Error { message: m });
                    self.closed = true;
                    return false;
                }
                Err(TryRecvError::Empty) => return true,
                Err(TryRecvError::Disconnected) => {
                    self.closed = true;
                    return false;
                }
            }
        }
    }

    fn await_request(&mut self, port: Port, depth: usize) -> Control {
        let req = match self.rx.recv() {
            Ok(Incoming::Request(r)) => r,
            Ok(Incoming::Malformed(m)) => {
                self.emit(&Event::Error { message: m });
                self.closed = true;
                return Control::Abort;
            }
            Err(_) => {
                self.closed = true;
                return Control::Abort;
            }
        };
        self.sess.mode = match req {
            Request::Step => Mode::Trace,
            Request::Continue => Mode::Leap,
            Request::Skip if matches!(port, Port::Call | Port::Redo) => Mode::Skip(depth),
            Request::Skip => Mode::Trace,
            Request::Abort => return Control::Abort,
            Request::Spy { pred } | Request::Nospy { pred } if parse_pred_spec(&pred).is_none() => {
                self.emit(&Event::Error {
                    message: format!("bad predicate indicator `{pred}`"),
                });
                Mode::Trace
            }
            Request::Spy { pred } => {
                let (n, a) = parse_pred_spec(&pred).expect("checked");
                self.sess.spy(&n, a);
                Mode::Trace
            }
            Request::Nospy { pred } => {
                let (n, a) = parse_pred_spec(&pred).expect("checked");
                self.sess.nospy(&n, a);
                Mode::Trace
            }
            Request::View { view } => {
                match view.as_str() {
                    "source" => self.sess.view = View::Source,
                    "target" => self.sess.view = View::Target,
                    other => {
                        self.emit(&Event::Error {
                            message: format!("unknown view `{other}`"),
                        });
                    }
                }
                Mode::Trace
            }
        };
        if self.closed {
            Control::Abort
        } else {
            Control::Proceed
        }
    }
}

impl Monitor for Session<'_, '_> {
    fn port(&mut self, ev: &TraceEvent<'_>) -> Control {
        if self.closed {
            return Control::Abort;
        }
        let o = observe(ev, self.sess.program);
        let hidden = self.sess.view == View::Source && o.hidden;
        if hidden && self.sess.mode != Mode::Trace {
            return Control::Proceed;
        }
        if !hidden && !self.sess.should_stop(&o) {
            return Control::Proceed;
        }
        if !hidden && !self.reject_early() {
            return Control::Abort;
        }
        let step = self.sess.display(&o);
        let (source, line) = match (self.sess.view, &step) {
            (View::Source, Some(s)) => (Some(s.text.clone()), o.source.as_ref().map(|(_, l)| *l)),
            _ => (None, None),
        };
        let event = Event::Port {
            n: o.n,
            depth: o.depth,
            port: o.port,
            source,
            target: o.target.clone(),
            module: self.sess.program.module.to_string(),
            line,
            hidden,
        };
        if !self.emit(&event) {
            return Control::Abort;
        }
        if hidden {
            return Control::Proceed;
        }
        self.await_request(o.port, o.depth)
    }
}

fn spawn_reader<R: BufRead + Send + 'static>(input: R) -> Receiver<Incoming> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in input.lines() {
            let Ok(line) = line else { break };
            if line.trim().is_empty() {
                continue;
            }
            let msg = match serde_json::from_str::<Request>(&line) {
                Ok(r) => Incoming::Request(r),
                Err(e) => Incoming::Malformed(format!("malformed request: {e}")),
            };
            let stop = matches!(msg, Incoming::Malformed(_));
            if tx.send(msg).is_err() || stop {
                break;
            }
        }
    });
    rx
}

/// Runs one debugging session for `goal` over the given line channel.
pub fn serve<R, W>(program: &Program, file: &str, goal: &str, input: R, output: W) -> io::Result<()>
where
    R: BufRead + Send + 'static,
    W: Write + 'static,
{
    serve_channel(program, file, goal, spawn_reader(input), output)
}

pub(crate) fn serve_channel<W: Write + 'static>(
    program: &Program,
    file: &str,
    goal: &str,
    rx: Receiver<Incoming>,
    output: W,
) -> io::Result<()> {
    let out: Out = Rc::new(RefCell::new(output));
    send(
        &out,
        &Event::Hello {
            version: VERSION,
            file: file.to_string(),
            goal: goal.to_string(),
        },
    )?;
    let query = match program.parse_query(goal) {
        Ok(q) => q,
        Err(e) => {
            send(&out, &Event::Error { message: e.to_string() })?;
            return send(&out, &Event::Done);
        }
    };
    let mut session = Session {
        sess: DebugSession::new(program, View::Source),
        rx: &rx,
        out: out.clone(),
        closed: false,
    };
    let opts = WriteOptions {
        vars: VarStyle::Fresh,
        ..WriteOptions::default()
    };
    let mut solver = Solver::new(&program.db, query.goal.clone(), &query.names, Some(&mut session));
    let mut failure = None;
    for r in solver.by_ref() {
        match r {
            Ok(sol) => {
                let bindings = sol
                    .bindings
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::Value::String(write_term(v, &program.ops, &opts))))
                    .collect();
                send(&out, &Event::Solution { bindings })?;
            }
            Err(e) => failure = Some(e),
        }
    }
    drop(solver);
    if session.closed {
        return Ok(());
    }
    if let Some(e) = failure {
        send(&out, &Event::Error { message: e.to_string() })?;
    }
    send(&out, &Event::Done)
}

/// Serves one session per connection until the listener fails.
pub fn serve_listener(listener: TcpListener, program: Arc<Program>, file: String, goal: String) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let program = program.clone();
        let (file, goal) = (file.clone(), goal.clone());
        thread::spawn(move || {
            let _ = handle_connection(stream, &program, &file, &goal);
        });
    }
    Ok(())
}

fn handle_connection(stream: TcpStream, program: &Program, file: &str, goal: &str) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let input = BufReader::new(stream.try_clone()?);
    let control = stream.try_clone()?;
    let r = serve(program, file, goal, input, stream);
    // The reader thread holds a clone, so close explicitly.
    let _ = control.shutdown(Shutdown::Both);
    r
}

/// Serves on standard input and output.
pub fn serve_stdio(program: &Program, file: &str, goal: &str) -> io::Result<()> {
    serve(program, file, goal, BufReader::new(io::stdin()), io::stdout())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::Registry;
    use crate::program::load_program;
    use std::sync::Mutex;
    use std::time::Duration;

    #[derive(Clone, Default)]
    struct Shared(Arc<Mutex<Vec<u8>>>);

    impl Write for Shared {
        fn write(&mut self, b: &[u8]) -> io::Result<usize> {
            self.0.lock().unwrap().extend_from_slice(b);
            Ok(b.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    impl Shared {
        fn events(&self) -> Vec<serde_json::Value> {
            let buf = self.0.lock().unwrap();
            String::from_utf8_lossy(&buf)
                .lines()
                .map(|l| serde_json::from_str(l).unwrap())
                .collect()
        }
    }

    #[test]
    fn early_requests_are_rejected_and_session_continues() {
        let (tx, rx) = mpsc::channel();
        tx.send(Incoming::Request(Request::Step)).unwrap();
        tx.send(Incoming::Request(Request::Skip)).unwrap();
        let out = Shared::default();
        let sink = out.clone();
        let server = thread::spawn(move || {
            let p = load_program("p(1).\np(2).\n", "t", &Registry::standard()).unwrap();
            serve_channel(&p, "t.pl", "p(X)", rx, sink).unwrap();
        });
        while !out.events().iter().any(|e| e["type"] == "port") {
            thread::sleep(Duration::from_millis(5));
        }
        let evs = out.events();
        let kinds: Vec<&str> = evs.iter().map(|e| e["type"].as_str().unwrap()).collect();
        assert_eq!(kinds, ["hello", "error", "error", "port"]);
        tx.send(Incoming::Request(Request::Continue)).unwrap();
        server.join().unwrap();
        let evs = out.events();
        let sols: Vec<_> = evs.iter().filter(|e| e["type"] == "solution").collect();
        assert_eq!(sols.len(), 2);
        assert_eq!(evs.last().unwrap()["type"], "done");
    }

    #[test]
    fn event_shapes() {
        let ev = Event::Port {
            n: 2,
            depth: 2,
            port: Port::Call,
            source: None,
            target: "f(3,_G1)".into(),
            module: "ex0".into(),
            line: None,
            hidden: false,
        };
        let v: serde_json::Value = serde_json::to_value(&ev).unwrap();
        assert_eq!(v["type"], "port");
        assert_eq!(v["port"], "call");
        assert!(v["source"].is_null() && v["line"].is_null());
        assert_eq!(serde_json::to_string(&Event::Done).unwrap(), r#"{"type":"done"}"#);
        let r: Request = serde_json::from_str(r#"{"cmd":"spy","pred":"k/1"}"#).unwrap();
        assert_eq!(r, Request::Spy { pred: "k/1".into() });
        assert!(serde_json::from_str::<Request>(r#"{"cmd":"spy"}"#).is_err());
    }
}
