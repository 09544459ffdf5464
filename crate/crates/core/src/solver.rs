//! SLD resolution with Byrd-box port events.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{eval_arith, ArithError};
use crate::expand::{Clause, ClauseId, GoalId, CLAUSE_INFO, GOAL_INFO, GOAL_MARK};
use crate::term::{rename_with, Substitution, Term, VarGen};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Call,
    Exit,
    Redo,
    Fail,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::Call => "Call",
            Port::Exit => "Exit",
            Port::Redo => "Redo",
            Port::Fail => "Fail",
        })
    }
}

const RESERVED_HEADS: &[(&str, usize)] = &[
    (",", 2),
    ("->", 2),
    (";", 2),
    ("!", 0),
    ("true", 0),
    ("fail", 0),
    ("=", 2),
    ("is", 2),
    ("<", 2),
    (">", 2),
    ("=<", 2),
    (">=", 2),
    (CLAUSE_INFO, 2),
    (GOAL_INFO, 2),
    (GOAL_MARK, 2),
];

fn is_builtin(name: &str, arity: usize) -> bool {
    matches!(
        (name, arity),
        ("fail", 0) | ("=", 2) | ("is", 2) | ("<", 2) | (">", 2) | ("=<", 2) | (">=", 2)
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsultError {
    #[error("{0}: clause head must be an atom or compound term")]
    BadHead(String),
    #[error("{id}: cannot define control construct or builtin {name}/{arity}")]
    Reserved { id: String, name: String, arity: usize },
}

/// Clauses indexed by predicate, in source order.
#[derive(Clone, Debug, Default)]
pub struct Database {
    preds: HashMap<(String, usize), Vec<Arc<Clause>>>,
    by_id: BTreeMap<ClauseId, Arc<Clause>>,
}

impl Database {
    pub fn consult(clauses: Vec<Clause>) -> Result<Database, ConsultError> {
        let mut db = Database::default();
        for c in clauses {
            db.add(c)?;
        }
        Ok(db)
    }

    pub fn add(&mut self, c: Clause) -> Result<(), ConsultError> {
        let Some((name, arity)) = c.head.functor() else {
            return Err(ConsultError::BadHead(c.id.to_string()));
        };
        if RESERVED_HEADS.contains(&(name, arity)) || (name == "call" && arity >= 1) {
            return Err(ConsultError::Reserved {
                id: c.id.to_string(),
                name: name.to_string(),
                arity,
            });
        }
        let key = (name.to_string(), arity);
        let c = Arc::new(c);
        self.by_id.insert(c.id.clone(), c.clone());
        self.preds.entry(key).or_default().push(c);
        Ok(())
    }

    pub fn clauses(&self, name: &str, arity: usize) -> Option<&[Arc<Clause>]> {
        self.preds.get(&(name.to_string(), arity)).map(|v| v.as_slice())
    }

    pub fn is_defined(&self, name: &str, arity: usize) -> bool {
        self.preds.contains_key(&(name.to_string(), arity))
    }

    pub fn clause(&self, id: &ClauseId) -> Option<&Arc<Clause>> {
        self.by_id.get(id)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

/// A clause instance entered by resolution: its id and the renaming from
/// program variables to the fresh ones of this activation.
#[derive(Debug)]
pub struct Activation {
    pub clause_id: ClauseId,
    pub renaming: HashMap<usize, Term>,
}

#[derive(Debug)]
struct BoxNode {
    n: usize,
    depth: usize,
    goal: Term,
    goal_id: Option<GoalId>,
    parent_act: Option<Rc<Activation>>,
    parent: Option<Rc<BoxNode>>,
    exited: Cell<bool>,
    clause: RefCell<Option<Rc<Activation>>>,
}

// Long chains are released iteratively; the default recursive drop
// overflows the stack on deep recursions.
impl Drop for BoxNode {
    fn drop(&mut self) {
        let mut next = self.parent.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut node) => next = node.parent.take(),
                Err(_) => break,
            }
        }
    }
}

pub struct TraceEvent<'a> {
    pub n: usize,
    pub depth: usize,
    pub port: Port,
    /// The goal with current bindings applied.
    pub goal: Term,
    pub goal_id: Option<GoalId>,
    /// Activation of the clause whose body contains the goal.
    pub parent: Option<&'a Activation>,
    /// Clause the box is currently inside (set on Exit and Redo).
    pub clause: Option<&'a Activation>,
    pub bindings: &'a Substitution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Proceed,
    Abort,
}

pub trait Monitor {
    fn port(&mut self, ev: &TraceEvent<'_>) -> Control;

    fn warning(&mut self, _msg: &str) {}
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{0}")]
    Arith(#[from] ArithError),
    #[error("instantiation error: unbound goal")]
    UnboundGoal,
    #[error("type error: `{0}` is not callable")]
    NotCallable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// The query with the answer substitution applied.
    pub goal: Term,
    /// Named query variables and their values, in order of appearance.
    pub bindings: Vec<(String, Term)>,
}

#[derive(Clone)]
struct Frame {
    goal: Term,
    depth: usize,
    parent: Option<Rc<BoxNode>>,
    act: Option<Rc<Activation>>,
    cut_barrier: usize,
    goal_id: Option<GoalId>,
}

#[derive(Clone)]
enum Item {
    Goal(Frame),
    Exit(Rc<BoxNode>),
}

struct ContNode {
    item: Item,
    next: Cont,
}

type Cont = Option<Rc<ContNode>>;

impl Drop for ContNode {
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut node) => next = node.next.take(),
                Err(_) => break,
            }
        }
    }
}

fn push(item: Item, next: Cont) -> Cont {
    Some(Rc::new(ContNode { item, next }))
}

enum ChoicePoint {
    BoxFail {
        bx: Rc<BoxNode>,
        trail: usize,
    },
    Alternatives {
        bx: Rc<BoxNode>,
        frame: Frame,
        next_clause: usize,
        trail: usize,
        cont: Cont,
    },
}

enum Stop {
    Abort,
    Error(SolveError),
}

impl From<SolveError> for Stop {
    fn from(e: SolveError) -> Stop {
        Stop::Error(e)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub occurs_check: bool,
}


/// Lazily enumerates the answers to a query.
pub struct Solver<'a> {
    db: &'a Database,
    monitor: Option<&'a mut dyn Monitor>,
    query: Term,
    names: Vec<(usize, String)>,
    subst: Substitution,
    gen: VarGen,
    cont: Cont,
    cps: Vec<ChoicePoint>,
    next_n: usize,
    started: bool,
    done: bool,
    aborted: bool,
    occurs_check: bool,
    warnings: Vec<String>,
}

impl<'a> Solver<'a> {
    /// `names` maps query variable ids to the names reported in solutions.
    pub fn new(
        db: &'a Database,
        query: Term,
        names: &BTreeMap<usize, String>,
        monitor: Option<&'a mut dyn Monitor>,
    ) -> Solver<'a> {
        Solver::with_options(db, query, names, monitor, SolveOptions::default())
    }

    pub fn with_options(
        db: &'a Database,
        query: Term,
        names: &BTreeMap<usize, String>,
        monitor: Option<&'a mut dyn Monitor>,
        opts: SolveOptions,
    ) -> Solver<'a> {
        let gen = VarGen::starting_at(query.max_var_id().map_or(1, |m| m + 1));
        let wrapper = Rc::new(BoxNode {
            n: 1,
            depth: 1,
            goal: query.clone(),
            goal_id: None,
            parent_act: None,
            parent: None,
            exited: Cell::new(false),
            clause: RefCell::new(None),
        });
        let frame = Frame {
            goal: query.clone(),
            depth: 2,
            parent: Some(wrapper),
            act: None,
            cut_barrier: 0,
            goal_id: None,
        };
        Solver {
            db,
            monitor,
            query,
            names: names.iter().map(|(k, v)| (*k, v.clone())).collect(),
            subst: Substitution::new(),
            gen,
            cont: push(Item::Goal(frame), None),
            cps: Vec::new(),
            next_n: 2,
            started: false,
            done: false,
            aborted: false,
            occurs_check: opts.occurs_check,
            warnings: Vec::new(),
        }
    }

    pub fn aborted(&self) -> bool {
        self.aborted
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn solution(&self) -> Solution {
        Solution {
            goal: self.subst.apply(&self.query),
            bindings: self
                .names
                .iter()
                .map(|(id, name)| {
                    let v = Term::Var(crate::term::Var::new(*id, Some(name)));
                    (name.clone(), self.subst.apply(&v))
                })
                .collect(),
        }
    }

    fn warn(&mut self, msg: String) {
        if let Some(m) = self.monitor.as_deref_mut() {
            m.warning(&msg);
        }
        self.warnings.push(msg);
    }

    fn emit(&mut self, port: Port, bx: &BoxNode) -> Result<(), Stop> {
        let Some(m) = self.monitor.as_deref_mut() else {
            return Ok(());
        };
        let clause = bx.clause.borrow().clone();
        let ev = TraceEvent {
            n: bx.n,
            depth: bx.depth,
            port,
            goal: self.subst.apply(&bx.goal),
            goal_id: bx.goal_id,
            parent: bx.parent_act.as_deref(),
            clause: match port {
                Port::Exit | Port::Redo => clause.as_deref(),
                _ => None,
            },
            bindings: &self.subst,
        };
        match m.port(&ev) {
            Control::Proceed => Ok(()),
            Control::Abort => Err(Stop::Abort),
        }
    }

    fn new_box(&mut self, f: &Frame) -> Rc<BoxNode> {
        let n = self.next_n;
        self.next_n += 1;
        Rc::new(BoxNode {
            n,
            depth: f.depth,
            goal: f.goal.clone(),
            goal_id: f.goal_id,
            parent_act: f.act.clone(),
            parent: f.parent.clone(),
            exited: Cell::new(false),
            clause: RefCell::new(None),
        })
    }

    /// Runs one continuation item. `Ok(false)` means the current branch failed.
    fn step(&mut self, item: Item) -> Result<bool, Stop> {
        let f = match item {
            Item::Exit(bx) => {
                self.emit(Port::Exit, &bx)?;
                bx.exited.set(true);
                if let Some(ChoicePoint::BoxFail { bx: top, .. }) = self.cps.last() {
                    if Rc::ptr_eq(top, &bx) {
                        self.cps.pop();
                    }
                }
                return Ok(true);
            }
            Item::Goal(f) => f,
        };
        let goal = self.subst.walk(&f.goal).clone();
        match &goal {
            Term::Var(_) => return Err(SolveError::UnboundGoal.into()),
            Term::Int(_) => return Err(SolveError::NotCallable(goal.to_string()).into()),
            _ => {}
        }
        let (name, arity) = goal.functor().expect("callable");
        let args = goal.args();
        match (name, arity) {
            ("true", 0) => return Ok(true),
            (",", 2) => {
                let second = Frame {
                    goal: args[1].clone(),
                    ..f.clone()
                };
                let first = Frame {
                    goal: args[0].clone(),
                    ..f
                };
                let next = push(Item::Goal(second), self.cont.take());
                self.cont = push(Item::Goal(first), next);
                return Ok(true);
            }
            ("!", 0) => {
                self.cps.truncate(f.cut_barrier);
                return Ok(true);
            }
            (GOAL_MARK, 2) => {
                let gid = match self.subst.walk(&args[0]) {
                    Term::Int(n) => usize::try_from(n).ok(),
                    _ => None,
                };
                let inner = Frame {
                    goal: args[1].clone(),
                    goal_id: gid.or(f.goal_id),
                    ..f
                };
                self.cont = push(Item::Goal(inner), self.cont.take());
                return Ok(true);
            }
            ("call", n) if n >= 1 => {
                let target = self.subst.walk(&args[0]).clone();
                if target.is_var() {
                    return Err(SolveError::UnboundGoal.into());
                }
                let called = target
                    .with_extra_args(args[1..].to_vec())
                    .ok_or_else(|| SolveError::NotCallable(target.to_string()))?;
                let inner = Frame {
                    goal: called,
                    cut_barrier: self.cps.len(),
                    ..f
                };
                self.cont = push(Item::Goal(inner), self.cont.take());
                return Ok(true);
            }
            _ => {}
        }
        let f = Frame { goal: goal.clone(), ..f };
        let bx = self.new_box(&f);
        self.emit(Port::Call, &bx)?;
        if is_builtin(name, arity) {
            let ok = self.builtin(name, args)?;
            if ok {
                self.emit(Port::Exit, &bx)?;
            } else {
                self.emit(Port::Fail, &bx)?;
            }
            return Ok(ok);
        }
        if !self.db.is_defined(name, arity) {
            self.warn(format!("existence error: unknown procedure {name}/{arity}"));
            self.emit(Port::Fail, &bx)?;
            return Ok(false);
        }
        self.cps.push(ChoicePoint::BoxFail {
            bx: bx.clone(),
            trail: self.subst.mark(),
        });
        let cont = self.cont.take();
        self.try_clauses(bx, f, 0, cont)
    }

    fn builtin(&mut self, name: &str, args: &[Term]) -> Result<bool, Stop> {
        match name {
            "fail" => Ok(false),
            "=" => {
                let mark = self.subst.mark();
                let ok = self.subst.unify_in_place(&args[0], &args[1], self.occurs_check);
                if !ok {
                    self.subst.undo_to(mark);
                }
                Ok(ok)
            }
            "is" => {
                let v = eval_arith(&args[1], &self.subst).map_err(SolveError::from)?;
                let mark = self.subst.mark();
                let ok = self.subst.unify_in_place(&args[0], &Term::Int(v), self.occurs_check);
                if !ok {
                    self.subst.undo_to(mark);
                }
                Ok(ok)
            }
            cmp => {
                let a = eval_arith(&args[0], &self.subst).map_err(SolveError::from)?;
                let b = eval_arith(&args[1], &self.subst).map_err(SolveError::from)?;
                Ok(match cmp {
                    "<" => a < b,
                    ">" => a > b,
                    "=<" => a <= b,
                    _ => a >= b,
                })
            }
        }
    }

    /// Tries the clauses of `bx`'s predicate from index `start`.
    fn try_clauses(&mut self, bx: Rc<BoxNode>, f: Frame, start: usize, cont: Cont) -> Result<bool, Stop> {
        let (name, arity) = f.goal.functor().expect("callable");
        let clauses = self.db.clauses(name, arity).unwrap_or(&[]);
        let barrier = self.cps.len();
        for i in start..clauses.len() {
            let c = &clauses[i];
            let mark = self.subst.mark();
            let mut renaming = HashMap::new();
            let head = rename_with(&c.head, &mut self.gen, &mut renaming);
            if !self.subst.unify_in_place(&f.goal, &head, self.occurs_check) {
                self.subst.undo_to(mark);
                continue;
            }
            let body = rename_with(&c.body, &mut self.gen, &mut renaming);
            if i + 1 < clauses.len() {
                self.cps.push(ChoicePoint::Alternatives {
                    bx: bx.clone(),
                    frame: f.clone(),
                    next_clause: i + 1,
                    trail: mark,
                    cont: cont.clone(),
                });
            }
            let act = Rc::new(Activation {
                clause_id: c.id.clone(),
                renaming,
            });
            *bx.clause.borrow_mut() = Some(act.clone());
            let frame = Frame {
                goal: body,
                depth: f.depth + 1,
                parent: Some(bx.clone()),
                act: Some(act),
                cut_barrier: barrier,
                goal_id: None,
            };
            self.cont = push(Item::Goal(frame), push(Item::Exit(bx), cont));
            return Ok(true);
        }
        Ok(false)
    }

    /// Resumes the most recent alternative. `Ok(false)` when none is left.
    fn backtrack(&mut self) -> Result<bool, Stop> {
        while let Some(cp) = self.cps.pop() {
            match cp {
                ChoicePoint::BoxFail { bx, trail } => {
                    self.subst.undo_to(trail);
                    if bx.exited.get() {
                        self.emit(Port::Redo, &bx)?;
                        bx.exited.set(false);
                    }
                    self.emit(Port::Fail, &bx)?;
                }
                ChoicePoint::Alternatives {
                    bx,
                    frame,
                    next_clause,
                    trail,
                    cont,
                } => {
                    self.subst.undo_to(trail);
                    let mut exited = Vec::new();
                    let mut b = Some(bx.clone());
                    while let Some(node) = b {
                        if node.exited.get() {
                            exited.push(node.clone());
                        }
                        b = node.parent.clone();
                    }
                    for node in exited.iter().rev() {
                        node.exited.set(false);
                        self.emit(Port::Redo, node)?;
                    }
                    if self.try_clauses(bx, frame, next_clause, cont)? {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    fn run(&mut self) -> Result<Option<Solution>, Stop> {
        if self.started && !self.backtrack()? {
            return Ok(None);
        }
        self.started = true;
        loop {
            let Some(node) = self.cont.take() else {
                return Ok(Some(self.solution()));
            };
            self.cont = node.next.clone();
            if !self.step(node.item.clone())? && !self.backtrack()? {
                return Ok(None);
            }
        }
    }
}

impl Iterator for Solver<'_> {
    type Item = Result<Solution, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.run() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(Stop::Abort) => {
                self.done = true;
                self.aborted = true;
                None
            }
            Err(Stop::Error(e)) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Convenience wrapper: all answers without a monitor.
pub fn solve_all(db: &Database, query: &Term, names: &BTreeMap<usize, String>) -> Result<Vec<Solution>, SolveError> {
    Solver::new(db, query.clone(), names, None).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::Registry;
    use crate::program::{load_program, Program};

    const EX0: &str = ":- use_package(fsyntax).\n\
        f(X) := X < 42 ? (k(l(m(X))) * 3) | 1000.\n\
        k(X) := X + 1.\nl(X) := X - 2.\nm(X) := X.\n";

    fn load(src: &str) -> Program {
        load_program(src, "t", &Registry::standard()).unwrap()
    }

    #[derive(Default)]
    struct Recorder {
        events: Vec<(usize, usize, Port, String)>,
        abort_at: Option<usize>,
        warnings: Vec<String>,
    }

    impl Monitor for Recorder {
        fn port(&mut self, ev: &TraceEvent<'_>) -> Control {
            let name = ev.goal.functor().map(|(n, _)| n.to_string()).unwrap_or_default();
            self.events.push((ev.n, ev.depth, ev.port, name));
            if self.abort_at == Some(self.events.len()) {
                Control::Abort
            } else {
                Control::Proceed
            }
        }

        fn warning(&mut self, msg: &str) {
            self.warnings.push(msg.to_string());
        }
    }

    fn trace(p: &Program, q: &str, rec: &mut Recorder) -> Vec<Solution> {
        let q = p.parse_query(q).unwrap();
        Solver::new(&p.db, q.goal, &q.names, Some(rec)).map(|r| r.unwrap()).collect()
    }

    fn values(sols: &[Solution]) -> Vec<String> {
        sols.iter()
            .map(|s| s.bindings.iter().map(|(_, v)| v.to_string()).collect::<Vec<_>>().join(","))
            .collect()
    }

    #[test]
    fn consult_keeps_order_and_rejects_control_heads() {
        let p = load("p(1).\np(2).\n");
        let cs = p.db.clauses("p", 1).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].head.to_string(), "p(1)");
        assert!(Database::consult(Vec::new()).unwrap().is_empty());
        let bad = load_program("','(a, b).\n", "t", &Registry::standard());
        assert!(matches!(bad, Err(crate::program::LoadError::Consult(_))));
    }

    #[test]
    fn functional_example_answers() {
        let p = load(EX0);
        let mut rec = Recorder::default();
        // Chained dataflow: m(3)=3, l(3)=1, k(1)=2, 2*3 = 6 (not 12).
        assert_eq!(values(&trace(&p, "f(3,R)", &mut rec)), vec!["6"]);
        assert_eq!(values(&trace(&p, "f(100,R)", &mut rec)), vec!["1000"]);
    }

    #[test]
    fn backtracking_order() {
        let p = load("p(1).\np(2).\n");
        assert_eq!(values(&trace(&p, "p(X)", &mut Recorder::default())), vec!["1", "2"]);
    }

    #[test]
    fn raw_call_numbering() {
        let p = load(EX0);
        let mut rec = Recorder::default();
        trace(&p, "f(3,R)", &mut rec);
        let calls: Vec<_> = rec
            .events
            .iter()
            .filter(|e| e.2 == Port::Call)
            .map(|(n, d, _, g)| (*n, *d, g.as_str()))
            .collect();
        assert_eq!(
            calls,
            vec![
                (2, 2, "f"),
                (3, 3, "<"),
                (4, 3, "m"),
                (5, 3, "l"),
                (6, 4, "is"),
                (7, 3, "k"),
                (8, 4, "is"),
                (9, 3, "is"),
                (10, 3, "="),
            ]
        );
        let last = rec.events.last().unwrap();
        assert_eq!((last.0, last.2), (2, Port::Exit));
    }

    fn check_port_discipline(events: &[(usize, usize, Port, String)]) {
        let mut per_box: BTreeMap<usize, Vec<Port>> = BTreeMap::new();
        for e in events {
            per_box.entry(e.0).or_default().push(e.2);
        }
        for (n, ports) in per_box {
            assert_eq!(ports[0], Port::Call, "box {n}: {ports:?}");
            let mut i = 1;
            while i < ports.len() {
                match ports[i] {
                    Port::Exit if i + 1 == ports.len() => {}
                    Port::Exit => assert_eq!(ports[i + 1], Port::Redo, "box {n}: {ports:?}"),
                    Port::Redo => assert_eq!(ports[i - 1], Port::Exit, "box {n}: {ports:?}"),
                    Port::Fail => assert_eq!(i + 1, ports.len(), "box {n}: {ports:?}"),
                    Port::Call => panic!("box {n}: second call {ports:?}"),
                }
                i += 1;
            }
        }
    }

    #[test]
    fn ports_alternate_legally() {
        let p = load("p(1).\np(2).\np(3).\nq(X) :- p(X), X > 1.\nr(X, Y) :- q(X), p(Y), Y < X.\n");
        let mut rec = Recorder::default();
        let sols = trace(&p, "r(X, Y)", &mut rec);
        assert_eq!(values(&sols), vec!["2,1", "3,1", "3,2"]);
        check_port_discipline(&rec.events);
        assert!(rec.events.iter().any(|e| e.2 == Port::Redo));
        assert!(rec.events.iter().any(|e| e.2 == Port::Fail));
    }

    #[test]
    fn cut_commits_to_first_clause() {
        let p = load(EX0);
        let mut rec = Recorder::default();
        assert!(trace(&p, "f(3,R), fail", &mut rec).is_empty());
        assert!(!rec.events.iter().any(|e| e.0 == 2 && e.2 == Port::Redo));
        check_port_discipline(&rec.events);
    }

    #[test]
    fn cut_inside_call_is_local() {
        let p = load("a(1).\na(2).\nb(X) :- call(a(X)), !.\nc(X) :- call(','(a(X), !)).\n");
        assert_eq!(values(&trace(&p, "b(X)", &mut Recorder::default())), vec!["1"]);
        assert_eq!(values(&trace(&p, "c(X)", &mut Recorder::default())), vec!["1"]);
        let p = load("a(1).\na(2).\nd(X) :- call(a(X)).\nd(3).\n");
        assert_eq!(values(&trace(&p, "d(X)", &mut Recorder::default())), vec!["1", "2", "3"]);
    }

    #[test]
    fn monitor_is_neutral() {
        let p = load(EX0);
        let q = p.parse_query("f(X,R)").unwrap();
        let plain: Vec<_> = Solver::new(&p.db, q.goal.clone(), &q.names, None).collect();
        let mut rec = Recorder::default();
        let watched: Vec<_> = Solver::new(&p.db, q.goal, &q.names, Some(&mut rec)).collect();
        assert_eq!(plain, watched);
    }

    #[test]
    fn abort_stops_everything() {
        let p = load("p(1).\np(2).\n");
        let mut rec = Recorder {
            abort_at: Some(1),
            ..Recorder::default()
        };
        let q = p.parse_query("p(X)").unwrap();
        let mut s = Solver::new(&p.db, q.goal, &q.names, Some(&mut rec));
        assert!(s.next().is_none());
        assert!(s.aborted());
        assert!(s.next().is_none());
        drop(s);
        assert_eq!(rec.events.len(), 1);
    }

    #[test]
    fn unknown_predicate_fails_with_warning() {
        let p = load("p :- nope.\n");
        let mut rec = Recorder::default();
        assert!(trace(&p, "p", &mut rec).is_empty());
        assert_eq!(rec.warnings, vec!["existence error: unknown procedure nope/0"]);
        let ports: Vec<Port> = rec.events.iter().map(|e| e.2).collect();
        assert_eq!(ports, vec![Port::Call, Port::Call, Port::Fail, Port::Fail]);
    }

    #[test]
    fn arithmetic_errors_propagate() {
        let p = load("p(X) :- Y is X + Z, Y = Z.\n");
        let q = p.parse_query("p(1)").unwrap();
        let r: Vec<_> = Solver::new(&p.db, q.goal, &q.names, None).collect();
        assert_eq!(r, vec![Err(SolveError::Arith(ArithError::Instantiation))]);
    }

    #[test]
    fn occurs_check_option() {
        let p = load("same(X, X).\n");
        let q = p.parse_query("same(Y, f(Y))").unwrap();
        let opts = SolveOptions { occurs_check: true };
        let n = Solver::with_options(&p.db, q.goal.clone(), &q.names, None, opts).count();
        assert_eq!(n, 0);
    }

    #[test]
    fn deep_recursion_does_not_overflow() {
        let p = load("count(0).\ncount(N) :- N > 0, M is N - 1, count(M).\n");
        assert_eq!(trace(&p, "count(20000)", &mut Recorder::default()).len(), 1);
    }
}
