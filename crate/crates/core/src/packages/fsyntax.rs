//! Functional notation: `Head := Value` definitions, `Cond ? Value | Else`
//! conditionals and nested function calls in goal arguments.

use std::collections::HashSet;

use crate::arith::is_arith_functor;
use crate::expand::{AnnotatedClause, ExpandError, Item, Package, CLAUSE_INFO, GOAL_INFO};
use crate::syntax::{OpDecl, OpType, Sentence, SourceSpan};
use crate::term::{Term, VarGen};

pub struct Fsyntax;

impl Package for Fsyntax {
    fn name(&self) -> &str {
        "fsyntax"
    }

    fn operators(&self) -> Vec<OpDecl> {
        vec![
            OpDecl::new(1150, OpType::Xfx, ":="),
            OpDecl::new(1100, OpType::Xfy, "|"),
            OpDecl::new(1050, OpType::Xfx, "?"),
        ]
    }

    fn expand(&self, items: Vec<Item>, gen: &mut VarGen) -> Result<Vec<Item>, ExpandError> {
        let funcs = function_table(&items);
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Item::Source(s) if s.term.is_functor(":=", 2) => {
                    let term = Translator::new(&funcs, gen, &s.span).defunc(&s.term)?;
                    out.push(Item::Annotated(AnnotatedClause { term, span: s.span }));
                }
                Item::Source(s) => match Translator::new(&funcs, gen, &s.span).plain_clause(&s.term) {
                    Some(term) => out.push(Item::Annotated(AnnotatedClause { term, span: s.span })),
                    None => out.push(Item::Source(s)),
                },
                other => out.push(other),
            }
        }
        Ok(out)
    }
}

/// Name and source arity of every function defined with `:=`.
pub fn function_table(items: &[Item]) -> HashSet<(String, usize)> {
    items
        .iter()
        .filter_map(|it| match it {
            Item::Source(Sentence { term, .. }) if term.is_functor(":=", 2) => {
                term.args()[0].functor().map(|(n, a)| (n.to_string(), a))
            }
            _ => None,
        })
        .collect()
}

fn result_name(functor: &str) -> String {
    let mut cs = functor.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() => c.to_ascii_uppercase().to_string(),
        _ => "V".to_string(),
    }
}

fn goal_info(g: Term, si: &Term) -> Term {
    Term::compound(GOAL_INFO, vec![g, si.clone()])
}

fn clause(head: Term, goals: Vec<Term>) -> Term {
    if goals.is_empty() {
        head
    } else {
        Term::compound(":-", vec![head, Term::conjunction(goals)])
    }
}

pub struct Translator<'a> {
    funcs: &'a HashSet<(String, usize)>,
    gen: &'a mut VarGen,
    span: &'a SourceSpan,
}

impl<'a> Translator<'a> {
    pub fn new(funcs: &'a HashSet<(String, usize)>, gen: &'a mut VarGen, span: &'a SourceSpan) -> Translator<'a> {
        Translator { funcs, gen, span }
    }

    fn err(&self, msg: impl Into<String>) -> ExpandError {
        ExpandError::new(msg, Some(self.span))
    }

    /// `Head := Opts` to `'$clause_info'(Clauses, (Head := Opts))`.
    pub fn defunc(&mut self, def: &Term) -> Result<Term, ExpandError> {
        let [head, rhs] = def.args() else {
            return Err(self.err("expected `Head := Value`"));
        };
        if !head.is_callable() {
            return Err(self.err("function head must be an atom or compound term"));
        }
        let clauses = self.defunc_rec(head, rhs, def)?;
        Ok(Term::compound(CLAUSE_INFO, vec![Term::list(clauses), def.clone()]))
    }

    /// One clause per `|` option, in order.
    pub fn defunc_rec(&mut self, head: &Term, rhs: &Term, si: &Term) -> Result<Vec<Term>, ExpandError> {
        if let Term::Compound(f, args) = rhs {
            if &**f == "|" && args.len() == 2 {
                let mut cs = self.defunc_rec(head, &args[0], si)?;
                cs.extend(self.defunc_rec(head, &args[1], si)?);
                return Ok(cs);
            }
            if &**f == "?" && args.len() == 2 {
                let res = self.gen.fresh_term(Some("Res"));
                let h = head.with_extra_args(vec![res.clone()]).expect("callable head");
                let mut cond = Vec::new();
                for g in args[0].conjuncts() {
                    self.goal(g, &mut cond)?;
                }
                let mut then = vec![Term::atom("!")];
                let value = self.expr(&args[1], None, &mut then)?;
                let body = vec![
                    goal_info(Term::conjunction(cond), si),
                    goal_info(Term::conjunction(then), si),
                    Term::compound("=", vec![res, value]),
                ];
                return Ok(vec![clause(h, body)]);
            }
        }
        let res = self.gen.fresh_term(Some("Res"));
        let mut goals = Vec::new();
        let value = self.expr(rhs, Some(res), &mut goals)?;
        let h = head.with_extra_args(vec![value]).expect("callable head");
        if goals.is_empty() {
            Ok(vec![h])
        } else {
            Ok(vec![clause(h, vec![goal_info(Term::conjunction(goals), si)])])
        }
    }

    /// Flattens a value expression, innermost calls first, appending the
    /// generated goals. The outermost call writes its result to `out` when given.
    pub fn expr(&mut self, e: &Term, out: Option<Term>, goals: &mut Vec<Term>) -> Result<Term, ExpandError> {
        let Term::Compound(f, args) = e else {
            return Ok(e.clone());
        };
        if (&**f == "?" || &**f == "|") && args.len() == 2 {
            return Err(self.err(format!("`{f}` is only allowed at the top of a definition")));
        }
        if &**f == "." && args.len() == 2 {
            let h = self.expr(&args[0], None, goals)?;
            let t = self.expr(&args[1], None, goals)?;
            return Ok(Term::cons(h, t));
        }
        if is_arith_functor(f, args.len()) {
            let inline = self.arith(e, goals)?;
            let t = out.unwrap_or_else(|| self.gen.fresh_term(Some("T")));
            goals.push(Term::compound("is", vec![t.clone(), inline]));
            return Ok(t);
        }
        let mut call_args = Vec::with_capacity(args.len() + 1);
        for a in args {
            call_args.push(self.expr(a, None, goals)?);
        }
        let t = out.unwrap_or_else(|| self.gen.fresh_term(Some(&result_name(f))));
        call_args.push(t.clone());
        goals.push(Term::compound(f, call_args));
        Ok(t)
    }

    fn arith(&mut self, e: &Term, goals: &mut Vec<Term>) -> Result<Term, ExpandError> {
        match e {
            Term::Compound(f, args) if is_arith_functor(f, args.len()) => {
                let mut xs = Vec::with_capacity(args.len());
                for a in args {
                    xs.push(self.arith(a, goals)?);
                }
                Ok(Term::compound(f, xs))
            }
            other => self.expr(other, None, goals),
        }
    }

    /// Expands calls to known functions inside the arguments of `g`.
    pub fn goal(&mut self, g: &Term, goals: &mut Vec<Term>) -> Result<(), ExpandError> {
        match g {
            Term::Compound(f, args) => {
                let mut xs = Vec::with_capacity(args.len());
                for a in args {
                    xs.push(self.goal_arg(a, goals)?);
                }
                goals.push(Term::compound(f, xs));
            }
            other => goals.push(other.clone()),
        }
        Ok(())
    }

    fn goal_arg(&mut self, a: &Term, goals: &mut Vec<Term>) -> Result<Term, ExpandError> {
        let Term::Compound(f, args) = a else {
            return Ok(a.clone());
        };
        let mut xs = Vec::with_capacity(args.len() + 1);
        for x in args {
            xs.push(self.goal_arg(x, goals)?);
        }
        if self.funcs.contains(&(f.to_string(), args.len())) {
            let t = self.gen.fresh_term(Some(&result_name(f)));
            xs.push(t.clone());
            goals.push(Term::compound(f, xs));
            Ok(t)
        } else {
            Ok(Term::compound(f, xs))
        }
    }

    /// A non-definition clause whose body calls functions. Returns `None`
    /// when nothing needs rewriting.
    pub fn plain_clause(&mut self, t: &Term) -> Option<Term> {
        if self.funcs.is_empty() || !t.is_functor(":-", 2) {
            return None;
        }
        let [head, body] = t.args() else { return None };
        let old = body.conjuncts();
        let mut goals = Vec::new();
        for g in &old {
            self.goal(g, &mut goals).ok()?;
        }
        if goals.len() == old.len() && goals.iter().zip(&old).all(|(a, b)| a == *b) {
            return None;
        }
        let c = clause(head.clone(), vec![goal_info(Term::conjunction(goals), t)]);
        Some(Term::compound(CLAUSE_INFO, vec![Term::list(vec![c]), t.clone()]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::{expand_program, strip_annotations, AnnotatedClause};
    use crate::syntax::{default_ops, read_all, OperatorTable};

    fn ops() -> OperatorTable {
        let mut t = default_ops();
        for d in Fsyntax.operators() {
            t.declare(&d).unwrap();
        }
        t
    }

    fn expand(src: &str) -> Vec<AnnotatedClause> {
        let mut gen = VarGen::new();
        let sentences = read_all(src, &ops(), "t", &mut gen).unwrap();
        let pkgs: Vec<std::sync::Arc<dyn Package>> = vec![std::sync::Arc::new(Fsyntax)];
        expand_program(sentences, &pkgs, &mut gen).unwrap()
    }

    fn stripped(src: &str) -> Vec<String> {
        strip_annotations(&expand(src))
            .unwrap()
            .iter()
            .map(|c| c.to_term().to_string())
            .collect()
    }

    const EX0: &str = "f(X) := X < 42 ? (k(l(m(X))) * 3) | 1000.\nk(X) := X + 1.\nl(X) := X - 2.\nm(X) := X.\n";

    #[test]
    fn functional_example_program() {
        assert_eq!(
            stripped(EX0),
            vec![
                "f(X,Res) :- X<42,!,m(X,M),l(M,L),k(L,K),T is K*3,Res=T",
                "f(X,1000)",
                "k(X,Res) :- Res is X+1",
                "l(X,Res) :- Res is X-2",
                "m(X,X)",
            ]
        );
    }

    #[test]
    fn annotated_shape() {
        let acs = expand(EX0);
        assert_eq!(acs.len(), 4);
        let k = crate::syntax::write_term(&acs[1].term, &ops(), &Default::default());
        assert_eq!(k, "'$clause_info'([(k(X,Res) :- '$goal_info'(Res is X+1,(k(X):=X+1)))],(k(X):=X+1))");
        let f = &acs[0].term;
        assert_eq!(f.args()[0].list_items().unwrap().len(), 2);
        let m = crate::syntax::write_term(&acs[3].term, &ops(), &Default::default());
        assert_eq!(m, "'$clause_info'([m(X,X)],(m(X):=X))");
    }

    #[test]
    fn three_options() {
        assert_eq!(stripped("g(X) := X < 0 ? a | X < 9 ? b | c.").len(), 3);
    }

    #[test]
    fn goal_expansion_in_plain_clauses() {
        let out = stripped("p(X) := X.\nq(Y) :- r(p(p(Y))).\ns :- t(a).");
        assert_eq!(out[1], "q(Y) :- p(Y,P),p(P,P_5),r(P_5)");
        assert_eq!(out[2], "s :- t(a)");
    }

    #[test]
    fn data_results_stay_in_head() {
        assert_eq!(stripped("w(X) := [X, m(X)].\nm(X) := X.")[0], "w(X,[X,M]) :- m(X,M)");
    }

    #[test]
    fn misplaced_conditional_is_an_error() {
        let mut gen = VarGen::new();
        let sentences = read_all("f(X) := g((X ? 1)).", &ops(), "t", &mut gen).unwrap();
        let pkgs: Vec<std::sync::Arc<dyn Package>> = vec![std::sync::Arc::new(Fsyntax)];
        let e = expand_program(sentences, &pkgs, &mut gen).unwrap_err();
        assert_eq!(e.span.unwrap().start_line, 1);
    }
}
