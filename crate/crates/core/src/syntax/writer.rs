//! Term output with minimal parenthesisation.

use std::collections::HashMap;

use super::lexer::{is_alnum, is_graphic};
use super::ops::OperatorTable;
use crate::term::{Substitution, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Spacing {
    /// `1+1`, `X<42`; alphabetic operators and `:-` keep their spaces.
    #[default]
    Compact,
    /// Spaces around operators of priority 500 and above, as in
    /// `f(3) := 3 < 42 ? k(l(m(3)))*3 | 1000`.
    Source,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VarStyle {
    /// Source names where known (disambiguated on clashes), `_G<id>` otherwise.
    #[default]
    Names,
    /// Always `_G<id>`, as in trace output.
    Fresh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WriteOptions {
    pub spacing: Spacing,
    pub vars: VarStyle,
    pub quoted: bool,
    pub max_priority: u16,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions {
            spacing: Spacing::Compact,
            vars: VarStyle::Names,
            quoted: true,
            max_priority: 1200,
        }
    }
}

impl WriteOptions {
    pub fn source() -> WriteOptions {
        WriteOptions {
            spacing: Spacing::Source,
            vars: VarStyle::Fresh,
            ..WriteOptions::default()
        }
    }

    pub fn trace() -> WriteOptions {
        WriteOptions {
            vars: VarStyle::Fresh,
            ..WriteOptions::default()
        }
    }
}

/// Writes `t` with the bindings of `s` applied.
pub fn write_bound(t: &Term, ops: &OperatorTable, s: &Substitution, opts: &WriteOptions) -> String {
    write_term(&s.apply(t), ops, opts)
}

pub fn write_term(t: &Term, ops: &OperatorTable, opts: &WriteOptions) -> String {
    let mut w = Writer::new(ops, opts, t);
    w.term(t, opts.max_priority);
    w.out
}

/// Writes a goal in canonical form at the top (`is(_G2,3-2)`) with
/// operator syntax inside the arguments.
pub fn write_goal_canonical(goal: &Term, ops: &OperatorTable, opts: &WriteOptions) -> String {
    let mut w = Writer::new(ops, opts, goal);
    match goal {
        Term::Compound(f, args) => {
            w.atom(f);
            w.emit("(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    w.emit(",");
                }
                w.term(a, 999);
            }
            w.emit(")");
        }
        other => w.term(other, 1200),
    }
    w.out
}

/// Formats a clause term as program text, one body goal per line.
pub fn portray_clause(t: &Term, ops: &OperatorTable, opts: &WriteOptions) -> String {
    let mut w = Writer::new(ops, opts, t);
    match t {
        Term::Compound(f, args) if &**f == ":-" && args.len() == 2 && !args[1].is_atom("true") => {
            w.term(&args[0], 1199);
            w.out.push_str(" :-");
            for (i, g) in args[1].conjuncts().into_iter().enumerate() {
                if i > 0 {
                    w.out.push(',');
                }
                w.out.push_str("\n    ");
                w.term(g, 999);
            }
        }
        Term::Compound(f, args) if &**f == ":-" && args.len() == 2 => w.term(&args[0], 1199),
        other => w.term(other, 1199),
    }
    w.emit(".");
    w.out
}

pub fn atom_needs_quotes(name: &str) -> bool {
    if matches!(name, "[]" | "{}" | "!" | ";") {
        return false;
    }
    let mut chars = name.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_lowercase() => !chars.all(is_alnum),
        Some(c) if is_graphic(c) => !chars.all(is_graphic),
        _ => true,
    }
}

pub fn quote_atom(name: &str) -> String {
    let mut s = String::with_capacity(name.len() + 2);
    s.push('\'');
    for c in name.chars() {
        match c {
            '\'' => s.push_str("\\'"),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\t' => s.push_str("\\t"),
            c => s.push(c),
        }
    }
    s.push('\'');
    s
}

struct Writer<'a> {
    ops: &'a OperatorTable,
    opts: &'a WriteOptions,
    names: HashMap<usize, String>,
    out: String,
}

impl<'a> Writer<'a> {
    fn new(ops: &'a OperatorTable, opts: &'a WriteOptions, t: &Term) -> Writer<'a> {
        let mut names = HashMap::new();
        if opts.vars == VarStyle::Names {
            let mut taken: HashMap<String, usize> = HashMap::new();
            for v in t.vars() {
                let Some(name) = v.name.as_deref() else { continue };
                let display = match taken.get(name) {
                    Some(&owner) if owner != v.id => format!("{name}_{}", v.id),
                    _ => {
                        taken.insert(name.to_string(), v.id);
                        name.to_string()
                    }
                };
                names.insert(v.id, display);
            }
        }
        Writer {
            ops,
            opts,
            names,
            out: String::new(),
        }
    }

    /// Appends a token, separating it from the previous one when the two
    /// would otherwise lex as a single token.
    fn emit(&mut self, tok: &str) {
        if let (Some(prev), Some(next)) = (self.out.chars().last(), tok.chars().next()) {
            let glue = (is_alnum(prev) && is_alnum(next)) || (is_graphic(prev) && is_graphic(next));
            if glue {
                self.out.push(' ');
            }
        }
        self.out.push_str(tok);
    }

    fn atom(&mut self, name: &str) {
        if self.opts.quoted && atom_needs_quotes(name) {
            let q = quote_atom(name);
            self.emit(&q);
        } else {
            self.emit(name);
        }
    }

    fn infix_op(&mut self, name: &str, priority: u16) {
        if name == "," {
            match self.opts.spacing {
                Spacing::Compact => self.out.push(','),
                Spacing::Source => self.out.push_str(", "),
            }
            return;
        }
        let alpha = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        let spaced = alpha
            || name == ":-"
            || name == "-->"
            || (self.opts.spacing == Spacing::Source && priority >= 500);
        let bare = name == "|";
        if spaced {
            self.out.push(' ');
        }
        if bare {
            self.emit(name);
        } else {
            self.atom(name);
        }
        if spaced {
            self.out.push(' ');
        }
    }

    fn var(&mut self, id: usize) {
        let s = self.names.get(&id).cloned().unwrap_or_else(|| format!("_G{id}"));
        self.emit(&s);
    }

    fn term(&mut self, t: &Term, max: u16) {
        match t {
            Term::Var(v) => self.var(v.id),
            Term::Int(n) => {
                let s = n.to_string();
                self.emit(&s);
            }
            Term::Atom(a) => {
                // A bare operator atom in operand position is bracketed.
                if max < 1200 && self.ops.is_op(a) && self.ops.infix(a).is_some_and(|o| o.priority > max) {
                    self.emit("(");
                    self.atom(a);
                    self.emit(")");
                } else {
                    self.atom(a);
                }
            }
            Term::Compound(f, args) => self.compound(f, args, max),
        }
    }

    fn compound(&mut self, f: &str, args: &[Term], max: u16) {
        if f == "." && args.len() == 2 {
            return self.list(args);
        }
        if f == "{}" && args.len() == 1 {
            self.emit("{");
            self.term(&args[0], 1200);
            self.emit("}");
            return;
        }
        if args.len() == 2 {
            if let Some(op) = self.ops.infix(f) {
                let open = op.priority > max;
                if open {
                    self.emit("(");
                }
                self.operand(&args[0], op.left_max());
                self.infix_op(f, op.priority);
                self.operand(&args[1], op.right_max());
                if open {
                    self.emit(")");
                }
                return;
            }
        }
        if args.len() == 1 {
            if let Some(op) = self.ops.prefix(f) {
                let open = op.priority > max;
                if open {
                    self.emit("(");
                }
                self.atom(f);
                let arg = &args[0];
                let bracketed = self.priority_of(arg) > op.right_max();
                let alpha = f.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
                if bracketed || alpha || matches!(arg, Term::Int(_)) || self.is_bare_op_atom(arg) {
                    self.out.push(' ');
                }
                self.operand(arg, op.right_max());
                if open {
                    self.emit(")");
                }
                return;
            }
            if let Some(op) = self.ops.postfix(f) {
                let open = op.priority > max;
                if open {
                    self.emit("(");
                }
                self.operand(&args[0], op.left_max());
                self.atom(f);
                if open {
                    self.emit(")");
                }
                return;
            }
        }
        self.atom(f);
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.term(a, 999);
        }
        self.out.push(')');
    }

    /// An operator atom next to an operator would be read as applying it.
    fn operand(&mut self, t: &Term, max: u16) {
        match t {
            Term::Atom(a) if self.ops.is_op(a) => {
                self.emit("(");
                self.atom(a);
                self.emit(")");
            }
            _ => self.term(t, max),
        }
    }

    fn is_bare_op_atom(&self, t: &Term) -> bool {
        matches!(t, Term::Atom(a) if self.ops.is_op(a))
    }

    fn priority_of(&self, t: &Term) -> u16 {
        match t {
            Term::Compound(f, args) if args.len() == 2 && &**f != "." => {
                self.ops.infix(f).map_or(0, |o| o.priority)
            }
            Term::Compound(f, args) if args.len() == 1 && &**f != "{}" => self
                .ops
                .prefix(f)
                .or_else(|| self.ops.postfix(f))
                .map_or(0, |o| o.priority),
            _ => 0,
        }
    }

    fn list(&mut self, args: &[Term]) {
        self.emit("[");
        self.term(&args[0], 999);
        let mut tail = &args[1];
        loop {
            match tail {
                Term::Compound(f, xs) if &**f == "." && xs.len() == 2 => {
                    self.out.push(',');
                    self.term(&xs[0], 999);
                    tail = &xs[1];
                }
                Term::Atom(a) if &**a == "[]" => break,
                other => {
                    self.out.push('|');
                    self.term(other, 999);
                    break;
                }
            }
        }
        self.out.push(']');
    }
}
