//! First-order terms, substitutions and unification.
//!
//! A [`Term`] is the universal value of the system: program clauses, goals,
//! annotations and the symbolic information carried by annotations are all
//! terms. Variables are identified by a numeric id only; the optional display
//! name is kept for printing.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;

/// A logic variable.
#[derive(Clone, Debug)]
pub struct Var {
    pub id: usize,
    pub name: Option<Arc<str>>,
}

impl Var {
    pub fn new(id: usize, name: Option<&str>) -> Var {
        Var {
            id,
            name: name.map(Arc::from),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Var) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Atom(Arc<str>),
    Int(BigInt),
    /// Functor name and arguments. Always at least one argument; use
    /// [`Term::compound`] to build one.
    Compound(Arc<str>, Vec<Term>),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Arc::from(name))
    }

    pub fn int(value: impl Into<BigInt>) -> Term {
        Term::Int(value.into())
    }

    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    /// Builds `name(args...)`, collapsing to an atom when `args` is empty.
    pub fn compound(name: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::atom(name)
        } else {
            Term::Compound(Arc::from(name), args)
        }
    }

    pub fn nil() -> Term {
        Term::atom("[]")
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Compound(Arc::from("."), vec![head, tail])
    }

    /// A proper list, or a partial list ending in `tail`.
    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc))
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    /// Elements of a proper list, or `None` for anything else.
    pub fn list_items(&self) -> Option<Vec<&Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Atom(a) if &**a == "[]" => return Some(out),
                Term::Compound(f, args) if &**f == "." && args.len() == 2 => {
                    out.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// `(name, arity)` for atoms and compounds.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound(..))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_atom(&self, name: &str) -> bool {
        matches!(self, Term::Atom(a) if &**a == name)
    }

    /// True if this is a compound with the given functor.
    pub fn is_functor(&self, name: &str, arity: usize) -> bool {
        matches!(self, Term::Compound(f, args) if &**f == name && args.len() == arity)
    }

    /// Appends arguments, turning an atom into a compound.
    pub fn with_extra_args(&self, extra: Vec<Term>) -> Option<Term> {
        match self {
            Term::Atom(a) => Some(Term::compound(a, extra)),
            Term::Compound(f, args) => {
                let mut args = args.clone();
                args.extend(extra);
                Some(Term::Compound(f.clone(), args))
            }
            _ => None,
        }
    }

    /// Distinct variables in depth-first, left-to-right order.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars(&self, seen: &mut HashSet<usize>, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if seen.insert(v.id) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(seen, out)),
            _ => {}
        }
    }

    pub fn max_var_id(&self) -> Option<usize> {
        match self {
            Term::Var(v) => Some(v.id),
            Term::Compound(_, args) => args.iter().filter_map(Term::max_var_id).max(),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// Replaces variables according to `map`, leaving the others in place.
    pub fn substitute(&self, map: &HashMap<usize, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(&v.id).cloned().unwrap_or_else(|| self.clone()),
            Term::Compound(f, args) => Term::Compound(
                f.clone(),
                args.iter().map(|a| a.substitute(map)).collect(),
            ),
            _ => self.clone(),
        }
    }

    /// Flattens a `','/2` chain into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Term::Compound(f, args) = cur {
            if &**f == "," && args.len() == 2 {
                out.extend(args[0].conjuncts());
                cur = &args[1];
            } else {
                break;
            }
        }
        out.push(cur);
        out
    }

    /// Right-nested conjunction of `goals`; `true` when empty.
    pub fn conjunction(mut goals: Vec<Term>) -> Term {
        match goals.len() {
            0 => Term::atom("true"),
            _ => {
                let last = goals.pop().unwrap();
                goals
                    .into_iter()
                    .rev()
                    .fold(last, |acc, g| Term::compound(",", vec![g, acc]))
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops = crate::syntax::OperatorTable::default();
        f.write_str(&crate::syntax::write_term(
            self,
            &ops,
            &crate::syntax::WriteOptions::default(),
        ))
    }
}

/// Source of fresh variable ids.
///
/// Ids start at 1, so the first variable of a freshly read query prints as
/// `_G1`.
#[derive(Clone, Debug)]
pub struct VarGen {
    next: usize,
}

impl Default for VarGen {
    fn default() -> Self {
        VarGen { next: 1 }
    }
}

impl VarGen {
    pub fn new() -> VarGen {
        VarGen::default()
    }

    pub fn starting_at(next: usize) -> VarGen {
        VarGen { next }
    }

    pub fn fresh(&mut self, name: Option<&str>) -> Var {
        let v = Var::new(self.next, name);
        self.next += 1;
        v
    }

    pub fn fresh_term(&mut self, name: Option<&str>) -> Term {
        Term::Var(self.fresh(name))
    }

    /// Makes sure ids handed out later are above `id`.
    pub fn reserve_past(&mut self, id: usize) {
        if self.next <= id {
            self.next = id + 1;
        }
    }

    pub fn peek(&self) -> usize {
        self.next
    }
}

/// Replaces every variable of `t` with a fresh one, keeping display names.
pub fn rename_apart(t: &Term, gen: &mut VarGen) -> Term {
    let mut map = HashMap::new();
    rename_with(t, gen, &mut map)
}

/// Renaming that extends `map`, so several terms can share one renaming.
pub fn rename_with(t: &Term, gen: &mut VarGen, map: &mut HashMap<usize, Term>) -> Term {
    match t {
        Term::Var(v) => map
            .entry(v.id)
            .or_insert_with(|| gen.fresh_term(v.name.as_deref()))
            .clone(),
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| rename_with(a, gen, map)).collect(),
        ),
        _ => t.clone(),
    }
}

/// Bindings from variable ids to terms, with a trail for undoing.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    map: HashMap<usize, Term>,
    trail: Vec<usize>,
}

impl PartialEq for Substitution {
    fn eq(&self, other: &Substitution) -> bool {
        self.map == other.map
    }
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Term> {
        self.map.get(&id)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (usize, &Term)> {
        self.map.iter().map(|(k, v)| (*k, v))
    }

    /// Binds an unbound variable. Binding an already bound variable is a
    /// logic error.
    pub fn bind(&mut self, id: usize, t: Term) {
        debug_assert!(!self.map.contains_key(&id));
        self.map.insert(id, t);
        self.trail.push(id);
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let id = self.trail.pop().unwrap();
            self.map.remove(&id);
        }
    }

    /// Follows variable bindings until an unbound variable or a non-variable.
    pub fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.map.get(&v.id) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Fully dereferenced copy of `t`.
    pub fn apply(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            other => other.clone(),
        }
    }

    fn occurs(&self, id: usize, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => v.id == id,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(id, a)),
            _ => false,
        }
    }

    /// Unifies in place. On failure some bindings may already have been
    /// made; callers undo them with [`Substitution::undo_to`].
    pub fn unify_in_place(&mut self, a: &Term, b: &Term, occurs_check: bool) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let x = self.walk(&x).clone();
            let y = self.walk(&y).clone();
            match (&x, &y) {
                (Term::Var(v), Term::Var(w)) if v.id == w.id => {}
                (Term::Var(v), Term::Var(w)) => {
                    // Younger variables point at older ones.
                    if v.id > w.id {
                        self.bind(v.id, y.clone());
                    } else {
                        self.bind(w.id, x.clone());
                    }
                }
                (Term::Var(v), other) | (other, Term::Var(v)) => {
                    if occurs_check && self.occurs(v.id, other) {
                        return false;
                    }
                    self.bind(v.id, other.clone());
                }
                (Term::Atom(p), Term::Atom(q)) => {
                    if p != q {
                        return false;
                    }
                }
                (Term::Int(p), Term::Int(q)) => {
                    if p != q {
                        return false;
                    }
                }
                (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    for (p, q) in xs.iter().zip(ys.iter()).rev() {
                        stack.push((p.clone(), q.clone()));
                    }
                }
                _ => return false,
            }
        }
        true
    }
}

/// Most general unifier of `a` and `b` extending `s`, or `None`.
pub fn unify(a: &Term, b: &Term, s: &Substitution, occurs_check: bool) -> Option<Substitution> {
    let mut out = s.clone();
    if out.unify_in_place(a, b, occurs_check) {
        out.trail.clear();
        Some(out)
    } else {
        None
    }
}

/// Two terms are variants if they are equal up to a consistent,
/// one-to-one renaming of variables.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fwd: &mut HashMap<usize, usize>, back: &mut HashMap<usize, usize>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let f = *fwd.entry(x.id).or_insert(y.id);
                let g = *back.entry(y.id).or_insert(x.id);
                f == y.id && g == x.id
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(p, q)| go(p, q, fwd, back))
            }
            _ => a == b,
        }
    }
    go(a, b, &mut HashMap::new(), &mut HashMap::new())
}
