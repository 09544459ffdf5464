//! Interactive tracing at source level.
//!
//! The meta-controller maps each port event back to the source construct
//! that produced it, using the symbol table built by extraction, and hides
//! the unifications that only exist in the translated program.

use std::collections::{BTreeSet, HashMap};

use crate::program::{format_solution, Program, Query};
use crate::solver::{Activation, Control, Monitor, Port, Solution, SolveError, Solver, TraceEvent};
use crate::syntax::{write_goal_canonical, write_term, WriteOptions};
use crate::term::{Substitution, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum View {
    Source,
    Target,
}

impl View {
    pub fn toggled(self) -> View {
        match self {
            View::Source => View::Target,
            View::Target => View::Source,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Trace,
    Leap,
    /// Silent until an event at or above this depth.
    Skip(usize),
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Source,
    Target,
    Qualified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisplayedStep {
    pub n: usize,
    pub depth: usize,
    pub port: Port,
    pub text: String,
    pub origin: Origin,
}

/// Everything the debugger can say about one event, for either view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub n: usize,
    pub depth: usize,
    pub port: Port,
    /// Raw goal in canonical form, as the target-level debugger shows it.
    pub target: String,
    /// Source-level rendering and the line of the source construct.
    pub source: Option<(String, u32)>,
    /// Raw goal qualified with its module when it is a program predicate.
    pub qualified: String,
    pub hidden: bool,
    pub functor: Option<(String, usize)>,
}

pub struct DebugSession<'p> {
    pub program: &'p Program,
    pub mode: Mode,
    pub view: View,
    pub spypoints: BTreeSet<(String, usize)>,
    source_functors: HashMap<(String, usize), BTreeSet<(String, usize)>>,
}

fn functor_of(t: &Term) -> Option<(String, usize)> {
    t.functor().map(|(n, a)| (n.to_string(), a))
}

/// Substitutes the activation's fresh variables into a symbolic-information
/// term and renders it with the current bindings.
fn render_si(si: &Term, act: &Activation, s: &Substitution, p: &Program) -> String {
    let t = s.apply(&si.substitute(&act.renaming));
    write_term(&t, &p.ops, &WriteOptions::source())
}

pub fn observe(ev: &TraceEvent<'_>, p: &Program) -> Observation {
    let trace = WriteOptions::trace();
    let target = write_goal_canonical(&ev.goal, &p.ops, &trace);
    let functor = functor_of(&ev.goal);
    let qualified = match &functor {
        Some((n, a)) if p.db.is_defined(n, *a) => format!("{}:{target}", p.module),
        _ => target.clone(),
    };
    let mut source = None;
    let mut hidden = false;
    let callee = ev.clause.and_then(|a| p.symtab.lookup_clause(&a.clause_id).map(|i| (a, i)));
    let goal_info = ev.goal_id.and_then(|g| p.symtab.lookup_goal(g));
    let parent = ev.parent.and_then(|a| p.symtab.lookup_clause(&a.clause_id).map(|i| (a, i)));
    if let (Port::Exit, Some(_), Some((act, info))) = (ev.port, ev.parent, callee) {
        source = Some((render_si(&info.si, act, ev.bindings, p), info.span.start_line));
    } else if let (Some(info), Some(act)) = (goal_info, ev.parent) {
        source = Some((render_si(&info.si, act, ev.bindings, p), info.span.start_line));
    } else if let Some((act, info)) = parent {
        if ev.goal.is_functor("=", 2) {
            hidden = true;
        } else {
            source = Some((render_si(&info.si, act, ev.bindings, p), info.span.start_line));
        }
    }
    Observation {
        n: ev.n,
        depth: ev.depth,
        port: ev.port,
        target,
        source,
        qualified,
        hidden,
        functor,
    }
}

impl<'p> DebugSession<'p> {
    pub fn new(program: &'p Program, view: View) -> DebugSession<'p> {
        let mut source_functors: HashMap<(String, usize), BTreeSet<(String, usize)>> = HashMap::new();
        for (id, info) in &program.symtab.clause_entries {
            let Some(clause) = program.db.clause(id) else { continue };
            let src_head = match &info.si {
                Term::Compound(f, args) if (&**f == ":=" || &**f == "-->") && args.len() == 2 => &args[0],
                _ => continue,
            };
            if let (Some(t), Some(s)) = (functor_of(&clause.head), functor_of(src_head)) {
                source_functors.entry(t).or_default().insert(s);
            }
        }
        DebugSession {
            program,
            mode: Mode::Trace,
            view,
            spypoints: BTreeSet::new(),
            source_functors,
        }
    }

    pub fn spy(&mut self, name: &str, arity: usize) {
        self.spypoints.insert((name.to_string(), arity));
    }

    pub fn nospy(&mut self, name: &str, arity: usize) {
        self.spypoints.remove(&(name.to_string(), arity));
    }

    /// Spypoints match the target functor or any source functor it was
    /// translated from.
    pub fn is_spied(&self, functor: Option<&(String, usize)>) -> bool {
        let Some(f) = functor else { return false };
        self.spypoints.contains(f)
            || self
                .source_functors
                .get(f)
                .is_some_and(|srcs| srcs.iter().any(|s| self.spypoints.contains(s)))
    }

    /// The step to show for an observation in the current view, or `None`
    /// when it is hidden.
    pub fn display(&self, o: &Observation) -> Option<DisplayedStep> {
        let (text, origin) = match self.view {
            View::Target => (o.target.clone(), Origin::Target),
            View::Source if o.hidden => return None,
            View::Source => match &o.source {
                Some((s, _)) => (s.clone(), Origin::Source),
                None if o.qualified != o.target => (o.qualified.clone(), Origin::Qualified),
                None => (o.target.clone(), Origin::Target),
            },
        };
        Some(DisplayedStep {
            n: o.n,
            depth: o.depth,
            port: o.port,
            text,
            origin,
        })
    }

    /// Whether the current mode stops at this step; updates skip mode.
    pub fn should_stop(&mut self, o: &Observation) -> bool {
        match self.mode {
            Mode::Trace => true,
            Mode::Off => false,
            Mode::Leap => self.is_spied(o.functor.as_ref()),
            Mode::Skip(d) if o.depth <= d => {
                self.mode = Mode::Trace;
                true
            }
            Mode::Skip(_) => self.is_spied(o.functor.as_ref()),
        }
    }
}

pub fn meta_controller(ev: &TraceEvent<'_>, sess: &DebugSession<'_>) -> Option<DisplayedStep> {
    sess.display(&observe(ev, sess.program))
}

pub fn format_step(s: &DisplayedStep) -> String {
    format!("{:>4} {:>2}    {}: {} ? ", s.n, s.depth, s.port, s.text)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Creep,
    Skip,
    Leap,
    Abort,
    Spy(String, usize),
    NoSpy(String, usize),
    ToggleView,
}

pub fn parse_pred_spec(s: &str) -> Option<(String, usize)> {
    let (name, arity) = s.trim().rsplit_once('/')?;
    if name.is_empty() {
        return None;
    }
    Some((name.to_string(), arity.parse().ok()?))
}

pub fn parse_command(line: &str) -> Option<Command> {
    let line = line.trim();
    Some(match line {
        "" | "c" => Command::Creep,
        "s" => Command::Skip,
        "l" => Command::Leap,
        "a" => Command::Abort,
        "v" => Command::ToggleView,
        _ => {
            if let Some(rest) = line.strip_prefix('+') {
                let (n, a) = parse_pred_spec(rest)?;
                Command::Spy(n, a)
            } else {
                let (n, a) = parse_pred_spec(line.strip_prefix('-')?)?;
                Command::NoSpy(n, a)
            }
        }
    })
}

/// Line-oriented channel between the debugger and its user.
pub trait DebugIo {
    /// Shows a prompt and returns the reply, or `None` at end of input.
    fn prompt(&mut self, text: &str) -> Option<String>;

    fn message(&mut self, text: &str);
}

/// Replays a fixed list of commands, echoing the transcript into a buffer.
/// Once the script runs out every further prompt is answered with creep.
pub struct ScriptIo {
    commands: std::collections::VecDeque<String>,
    pub transcript: String,
}

impl ScriptIo {
    pub fn new(script: &str) -> ScriptIo {
        ScriptIo {
            commands: script.lines().map(str::to_string).collect(),
            transcript: String::new(),
        }
    }
}

impl DebugIo for ScriptIo {
    fn prompt(&mut self, text: &str) -> Option<String> {
        self.transcript.push_str(text);
        self.transcript.push('\n');
        self.commands.pop_front()
    }

    fn message(&mut self, text: &str) {
        self.transcript.push_str(text);
        self.transcript.push('\n');
    }
}

struct Tracer<'s, 'p> {
    sess: &'s mut DebugSession<'p>,
    io: &'s mut dyn DebugIo,
}

impl Tracer<'_, '_> {
    fn interact(&mut self, o: &Observation) -> Control {
        loop {
            let Some(step) = self.sess.display(o) else {
                return Control::Proceed;
            };
            let Some(reply) = self.io.prompt(&format_step(&step)) else {
                self.sess.mode = Mode::Trace;
                return Control::Proceed;
            };
            match parse_command(&reply) {
                Some(Command::Creep) => {
                    self.sess.mode = Mode::Trace;
                    return Control::Proceed;
                }
                Some(Command::Skip) => {
                    self.sess.mode = match o.port {
                        Port::Call | Port::Redo => Mode::Skip(o.depth),
                        _ => Mode::Trace,
                    };
                    return Control::Proceed;
                }
                Some(Command::Leap) => {
                    self.sess.mode = Mode::Leap;
                    return Control::Proceed;
                }
                Some(Command::Abort) => return Control::Abort,
                Some(Command::Spy(n, a)) => {
                    self.io.message(&format!("Spypoint placed on {n}/{a}"));
                    self.sess.spy(&n, a);
                }
                Some(Command::NoSpy(n, a)) => {
                    self.io.message(&format!("Spypoint removed from {n}/{a}"));
                    self.sess.nospy(&n, a);
                }
                Some(Command::ToggleView) => self.sess.view = self.sess.view.toggled(),
                None => self.io.message(&format!("unknown command `{}`", reply.trim())),
            }
        }
    }
}

impl Monitor for Tracer<'_, '_> {
    fn port(&mut self, ev: &TraceEvent<'_>) -> Control {
        let o = observe(ev, self.sess.program);
        if self.sess.display(&o).is_none() || !self.sess.should_stop(&o) {
            return Control::Proceed;
        }
        self.interact(&o)
    }

    fn warning(&mut self, msg: &str) {
        self.io.message(&format!("Warning: {msg}"));
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DebugOutcome {
    pub solutions: Vec<Solution>,
    pub aborted: bool,
    pub error: Option<SolveError>,
}

/// Runs `query` under the debugger; the answers are reported once the
/// search is over.
pub fn interactive_loop(sess: &mut DebugSession<'_>, query: &Query, io: &mut dyn DebugIo) -> DebugOutcome {
    let program = sess.program;
    let mut solutions = Vec::new();
    let mut error = None;
    let aborted;
    {
        let mut tracer = Tracer { sess, io: &mut *io };
        let mut solver = Solver::new(&program.db, query.goal.clone(), &query.names, Some(&mut tracer));
        for r in solver.by_ref() {
            match r {
                Ok(s) => solutions.push(s),
                Err(e) => error = Some(e),
            }
        }
        aborted = solver.aborted();
    }
    for s in &solutions {
        io.message(&format_solution(s, &program.ops));
    }
    if let Some(e) = &error {
        io.message(&format!("error: {e}"));
    } else if aborted {
        io.message("% aborted");
    } else if solutions.is_empty() {
        io.message("no");
    }
    DebugOutcome {
        solutions,
        aborted,
        error,
    }
}
