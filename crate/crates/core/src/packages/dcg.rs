//! Definite clause grammars: `Head --> Body` rules compiled to predicates
//! threading a difference list.

use crate::expand::{AnnotatedClause, ExpandError, Item, Package, CLAUSE_INFO, GOAL_INFO};
use crate::syntax::{OpDecl, OpType, SourceSpan};
use crate::term::{Term, VarGen};

pub struct Dcg;

const RUNTIME: &str = "\
phrase(G, L) :- call(G, L, []).
phrase(G, L, R) :- call(G, L, R).
";

impl Package for Dcg {
    fn name(&self) -> &str {
        "dcg"
    }

    fn operators(&self) -> Vec<OpDecl> {
        vec![OpDecl::new(1200, OpType::Xfx, "-->")]
    }

    fn expand(&self, items: Vec<Item>, gen: &mut VarGen) -> Result<Vec<Item>, ExpandError> {
        items
            .into_iter()
            .map(|item| match item {
                Item::Source(s) if s.term.is_functor("-->", 2) => {
                    let term = dcg_rule(&s.term, gen, &s.span)?;
                    Ok(Item::Annotated(AnnotatedClause { term, span: s.span }))
                }
                other => Ok(other),
            })
            .collect()
    }

    fn runtime_source(&self) -> &str {
        RUNTIME
    }
}

/// `Head --> Body` to `'$clause_info'([Clause], (Head --> Body))`.
pub fn dcg_rule(rule: &Term, gen: &mut VarGen, span: &SourceSpan) -> Result<Term, ExpandError> {
    let [head, body] = rule.args() else {
        return Err(ExpandError::new("expected `Head --> Body`", Some(span)));
    };
    if head.is_functor(",", 2) {
        return Err(ExpandError::new("pushback in grammar rule heads is not supported", Some(span)));
    }
    if !head.is_callable() {
        return Err(ExpandError::new("grammar rule head must be an atom or compound term", Some(span)));
    }
    let mut t = Threader { gen, span, next: 1 };
    let s0 = t.gen.fresh_term(Some("S0"));
    let mut goals = Vec::new();
    let s = t.body(body, s0.clone(), &mut goals)?;
    let h = head.with_extra_args(vec![s0, s]).expect("callable head");
    let clause = if goals.is_empty() {
        h
    } else {
        Term::compound(":-", vec![h, Term::conjunction(goals)])
    };
    Ok(Term::compound(CLAUSE_INFO, vec![Term::list(vec![clause]), rule.clone()]))
}

/// The goal run by `phrase(NT, List, Rest)`.
pub fn phrase_goal(nt: &Term, list: Term, rest: Term) -> Result<Term, ExpandError> {
    if nt.is_var() {
        return Err(ExpandError::new("instantiation error: unbound nonterminal", None));
    }
    nt.with_extra_args(vec![list, rest])
        .ok_or_else(|| ExpandError::new(format!("type error: `{nt}` is not a nonterminal"), None))
}

struct Threader<'a> {
    gen: &'a mut VarGen,
    span: &'a SourceSpan,
    next: usize,
}

impl Threader<'_> {
    fn fresh(&mut self) -> Term {
        let name = format!("S{}", self.next);
        self.next += 1;
        self.gen.fresh_term(Some(&name))
    }

    fn unsupported(&self, what: &str) -> ExpandError {
        ExpandError::new(format!("{what} in grammar rule bodies is not supported"), Some(self.span))
    }

    /// Appends the goals for `b` starting from list `s_in`; returns the
    /// remaining list.
    fn body(&mut self, b: &Term, s_in: Term, goals: &mut Vec<Term>) -> Result<Term, ExpandError> {
        match b {
            Term::Var(_) => Err(self.unsupported("a variable")),
            Term::Int(_) => Err(ExpandError::new("integer in grammar rule body", Some(self.span))),
            Term::Compound(f, args) if &**f == "," && args.len() == 2 => {
                let mid = self.body(&args[0], s_in, goals)?;
                self.body(&args[1], mid, goals)
            }
            Term::Compound(f, args) if &**f == "{}" && args.len() == 1 => {
                goals.push(args[0].clone());
                Ok(s_in)
            }
            Term::Compound(f, args) if matches!(&**f, ";" | "->" | "|" | "\\+") && args.len() <= 2 => {
                Err(self.unsupported(&format!("`{f}`")))
            }
            Term::Compound(f, _) if &**f == "call" => Err(self.unsupported("call//N")),
            Term::Atom(a) if &**a == "!" => {
                goals.push(b.clone());
                Ok(s_in)
            }
            Term::Atom(a) if &**a == "[]" => Ok(s_in),
            Term::Compound(f, args) if &**f == "." && args.len() == 2 => {
                let items = b
                    .list_items()
                    .ok_or_else(|| ExpandError::new("terminal list must be a proper list", Some(self.span)))?;
                let s_out = self.fresh();
                let items: Vec<Term> = items.into_iter().cloned().collect();
                let unify = Term::compound("=", vec![s_in, Term::list_with_tail(items, s_out.clone())]);
                goals.push(Term::compound(GOAL_INFO, vec![unify, b.clone()]));
                Ok(s_out)
            }
            nt => {
                let s_out = self.fresh();
                goals.push(nt.with_extra_args(vec![s_in, s_out.clone()]).expect("callable"));
                Ok(s_out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{default_ops, read_sentence, OperatorTable, Pos};

    fn ops() -> OperatorTable {
        let mut t = default_ops();
        t.declare(&Dcg.operators()[0]).unwrap();
        t
    }

    fn rule(src: &str) -> Result<Term, ExpandError> {
        let mut gen = VarGen::new();
        let s = read_sentence(src, &ops(), "t", &mut gen).unwrap().unwrap();
        let span = SourceSpan::new("t".into(), Pos { line: 1, col: 1 }, Pos { line: 1, col: 2 });
        dcg_rule(&s.term, &mut gen, &span)
    }

    fn clause_text(src: &str) -> String {
        let t = rule(src).unwrap();
        t.args()[0].list_items().unwrap()[0].to_string()
    }

    #[test]
    fn empty_production_shares_var() {
        assert_eq!(clause_text("a --> []."), "a(S0,S0)");
    }

    #[test]
    fn terminals_and_nonterminals() {
        assert_eq!(
            clause_text("greeting --> [hello], name."),
            "greeting(S0,S2) :- '$goal_info'(S0=[hello|S1],[hello]),name(S1,S2)"
        );
    }

    #[test]
    fn braces_consume_nothing() {
        assert_eq!(clause_text("b --> c, {g}, d."), "b(S0,S2) :- c(S0,S1),g,d(S1,S2)");
    }

    #[test]
    fn arguments_are_kept() {
        assert_eq!(clause_text("digits(D) --> digit(D), !."), "digits(D,S0,S1) :- digit(D,S0,S1),!");
    }

    #[test]
    fn unsupported_bodies() {
        assert!(rule("a --> ';'(b, c).").is_err());
        assert!(rule("a --> X.").is_err());
        assert!(rule("a, [x] --> b.").is_err());
        assert!(rule("a --> call(g).").is_err());
    }

    #[test]
    fn phrase_appends_lists() {
        let g = phrase_goal(&Term::atom("greeting"), Term::list(vec![Term::atom("hello")]), Term::nil()).unwrap();
        assert_eq!(g.to_string(), "greeting([hello],[])");
        let v = Term::Var(crate::term::Var::new(1, Some("G")));
        assert!(phrase_goal(&v, Term::nil(), Term::nil()).is_err());
    }
}
