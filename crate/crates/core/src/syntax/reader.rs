//! Operator-precedence reader.
//!
//! Sentences are read one at a time: the lexer tokens up to the end token
//! (a `.` followed by layout) are collected and then parsed with priority
//! climbing against the current [`OperatorTable`]. Every subterm gets a span,
//! addressed by its argument path from the sentence root.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::lexer::{Lexer, Pos, Token, TokenKind};
use super::ops::OperatorTable;
use super::{SourceSpan, SyntaxError};
use crate::term::{Term, Var, VarGen};

/// One read sentence with its source positions.
#[derive(Clone, Debug)]
pub struct Sentence {
    pub term: Term,
    pub span: SourceSpan,
    /// Source name of every named variable, by variable id.
    pub var_names: BTreeMap<usize, String>,
    /// Span of each subterm by argument path; the empty path is the term.
    pub subterm_spans: BTreeMap<Vec<usize>, SourceSpan>,
}

impl Sentence {
    pub fn subterm_span(&self, path: &[usize]) -> Option<&SourceSpan> {
        self.subterm_spans.get(path)
    }
}

#[derive(Clone, Debug)]
struct SpanTree {
    start: Pos,
    end: Pos,
    children: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(tok: &Token) -> SpanTree {
        SpanTree {
            start: tok.start,
            end: tok.end,
            children: Vec::new(),
        }
    }

    fn flatten(&self, module: &Arc<str>, path: &mut Vec<usize>, out: &mut BTreeMap<Vec<usize>, SourceSpan>) {
        out.insert(path.clone(), SourceSpan::new(module.clone(), self.start, self.end));
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            c.flatten(module, path, out);
            path.pop();
        }
    }
}

/// Streams sentences out of one source text.
pub struct Reader<'a> {
    lexer: Lexer<'a>,
    module: Arc<str>,
}

impl<'a> Reader<'a> {
    pub fn new(text: &'a str, module: &str) -> Reader<'a> {
        Reader {
            lexer: Lexer::new(text),
            module: Arc::from(module),
        }
    }

    /// Reads the next sentence, or `Ok(None)` at end of input. The operator
    /// table may differ between calls.
    pub fn next_sentence(
        &mut self,
        ops: &OperatorTable,
        gen: &mut VarGen,
    ) -> Result<Option<Sentence>, SyntaxError> {
        let mut tokens = Vec::new();
        loop {
            match self.lexer.next_token()? {
                None if tokens.is_empty() => return Ok(None),
                None => {
                    let p = self.lexer.pos();
                    return Err(SyntaxError::new(p, "unexpected end of file: missing `.`"));
                }
                Some(t) => {
                    let end = t.kind == TokenKind::End;
                    tokens.push(t);
                    if end {
                        break;
                    }
                }
            }
        }
        let mut parser = Parser {
            tokens,
            idx: 0,
            ops,
            gen,
            vars: HashMap::new(),
            var_names: BTreeMap::new(),
        };
        let (term, _, tree) = parser.parse(1200)?;
        let end_tok = parser.next().expect("tokens end with End");
        if end_tok.kind != TokenKind::End {
            return Err(SyntaxError::new(end_tok.start, "operator expected"));
        }
        let span = SourceSpan::new(self.module.clone(), parser.tokens[0].start, end_tok.end);
        let mut subterm_spans = BTreeMap::new();
        tree.flatten(&self.module, &mut Vec::new(), &mut subterm_spans);
        Ok(Some(Sentence {
            term,
            span,
            var_names: parser.var_names,
            subterm_spans,
        }))
    }
}

/// Reads the first sentence of `text`.
pub fn read_sentence(
    text: &str,
    ops: &OperatorTable,
    module: &str,
    gen: &mut VarGen,
) -> Result<Option<Sentence>, SyntaxError> {
    Reader::new(text, module).next_sentence(ops, gen)
}

/// Reads every sentence of `text`.
pub fn read_all(
    text: &str,
    ops: &OperatorTable,
    module: &str,
    gen: &mut VarGen,
) -> Result<Vec<Sentence>, SyntaxError> {
    let mut reader = Reader::new(text, module);
    let mut out = Vec::new();
    while let Some(s) = reader.next_sentence(ops, gen)? {
        out.push(s);
    }
    Ok(out)
}

/// Reads a single query term; the terminating `.` is optional.
pub fn read_query(text: &str, ops: &OperatorTable, gen: &mut VarGen) -> Result<Sentence, SyntaxError> {
    let trimmed = text.trim_end();
    let owned;
    let src = if trimmed.ends_with('.') && !trimmed.ends_with("..") {
        trimmed
    } else {
        owned = format!("{trimmed} .");
        &owned
    };
    let mut reader = Reader::new(src, "user");
    let s = reader
        .next_sentence(ops, gen)?
        .ok_or_else(|| SyntaxError::new(Pos { line: 1, col: 1 }, "empty query"))?;
    if reader.next_sentence(ops, gen)?.is_some() {
        return Err(SyntaxError::new(Pos { line: 1, col: 1 }, "query must be a single term"));
    }
    Ok(s)
}

struct Parser<'o, 'g> {
    tokens: Vec<Token>,
    idx: usize,
    ops: &'o OperatorTable,
    gen: &'g mut VarGen,
    vars: HashMap<String, Var>,
    var_names: BTreeMap<usize, String>,
}

type Parsed = (Term, u16, SpanTree);

fn starts_term(kind: &TokenKind) -> bool {
    matches!(
        kind,
        TokenKind::Name { .. } | TokenKind::Var(_) | TokenKind::Int(_) | TokenKind::Open | TokenKind::OpenList | TokenKind::OpenCurly
    )
}

impl Parser<'_, '_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.idx + n)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn current_pos(&self) -> Pos {
        self.peek()
            .or_else(|| self.tokens.last())
            .map(|t| t.start)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.next().unwrap()),
            _ => Err(SyntaxError::new(self.current_pos(), format!("expected {what}"))),
        }
    }

    /// Name of the token when it can act as an infix or postfix operator.
    fn operator_name(tok: &Token) -> Option<&str> {
        match &tok.kind {
            TokenKind::Name { text, .. } => Some(text),
            TokenKind::Comma => Some(","),
            TokenKind::Bar => Some("|"),
            _ => None,
        }
    }

    fn parse(&mut self, max: u16) -> Result<Parsed, SyntaxError> {
        let (mut left, mut left_prec, mut left_span) = self.primary(max)?;
        while let Some(tok) = self.peek() {
            let Some(name) = Self::operator_name(tok).map(str::to_string) else {
                break;
            };
            if let Some(op) = self.ops.infix(&name) {
                if op.priority <= max && left_prec <= op.left_max() {
                    // An infix operator needs a right operand.
                    if self.peek_at(1).is_some_and(|t| starts_term(&t.kind)) {
                        self.next();
                        let (right, _, right_span) = self.parse(op.right_max())?;
                        let span = SpanTree {
                            start: left_span.start,
                            end: right_span.end,
                            children: vec![left_span, right_span],
                        };
                        left = Term::compound(&name, vec![left, right]);
                        left_prec = op.priority;
                        left_span = span;
                        continue;
                    }
                }
            }
            if let Some(op) = self.ops.postfix(&name) {
                if op.priority <= max && left_prec <= op.left_max() {
                    let tok = self.next().unwrap();
                    let span = SpanTree {
                        start: left_span.start,
                        end: tok.end,
                        children: vec![left_span],
                    };
                    left = Term::compound(&name, vec![left]);
                    left_prec = op.priority;
                    left_span = span;
                    continue;
                }
            }
            break;
        }
        Ok((left, left_prec, left_span))
    }

    fn primary(&mut self, max: u16) -> Result<Parsed, SyntaxError> {
        let Some(tok) = self.next() else {
            return Err(SyntaxError::new(self.current_pos(), "unexpected end of clause"));
        };
        match tok.kind.clone() {
            TokenKind::Int(n) => Ok((Term::Int(n), 0, SpanTree::leaf(&tok))),
            TokenKind::Var(name) => {
                let term = if name == "_" {
                    Term::Var(self.gen.fresh(None))
                } else if let Some(v) = self.vars.get(&name) {
                    Term::Var(v.clone())
                } else {
                    let v = self.gen.fresh(Some(&name));
                    self.var_names.insert(v.id, name.clone());
                    self.vars.insert(name, v.clone());
                    Term::Var(v)
                };
                Ok((term, 0, SpanTree::leaf(&tok)))
            }
            TokenKind::Open => {
                let (t, _, mut inner) = self.parse(1200)?;
                let close = self.expect(TokenKind::Close, "`)`")?;
                inner.start = tok.start;
                inner.end = close.end;
                Ok((t, 0, inner))
            }
            TokenKind::OpenList => {
                if self.peek().is_some_and(|t| t.kind == TokenKind::CloseList) {
                    let close = self.next().unwrap();
                    return Ok((Term::nil(), 0, SpanTree { start: tok.start, end: close.end, children: vec![] }));
                }
                self.list(tok.start)
            }
            TokenKind::OpenCurly => {
                if self.peek().is_some_and(|t| t.kind == TokenKind::CloseCurly) {
                    let close = self.next().unwrap();
                    return Ok((Term::atom("{}"), 0, SpanTree { start: tok.start, end: close.end, children: vec![] }));
                }
                let (t, _, inner) = self.parse(1200)?;
                let close = self.expect(TokenKind::CloseCurly, "`}`")?;
                Ok((
                    Term::compound("{}", vec![t]),
                    0,
                    SpanTree {
                        start: tok.start,
                        end: close.end,
                        children: vec![inner],
                    },
                ))
            }
            TokenKind::Name { text, quoted } => self.name(tok, text, quoted, max),
            TokenKind::Close | TokenKind::CloseList | TokenKind::CloseCurly => {
                Err(SyntaxError::new(tok.start, "unexpected closing bracket"))
            }
            TokenKind::Comma | TokenKind::Bar => Err(SyntaxError::new(tok.start, "unexpected separator")),
            TokenKind::End => Err(SyntaxError::new(tok.start, "unexpected end of clause")),
        }
    }

    fn name(&mut self, tok: Token, text: String, quoted: bool, max: u16) -> Result<Parsed, SyntaxError> {
        // Functional notation: name immediately followed by `(`.
        if let Some(next) = self.peek() {
            if next.kind == TokenKind::Open && !next.layout_before {
                self.next();
                let mut args = Vec::new();
                let mut spans = Vec::new();
                loop {
                    let (a, _, s) = self.parse(999)?;
                    args.push(a);
                    spans.push(s);
                    match self.next() {
                        Some(t) if t.kind == TokenKind::Comma => continue,
                        Some(t) if t.kind == TokenKind::Close => {
                            return Ok((
                                Term::compound(&text, args),
                                0,
                                SpanTree { start: tok.start, end: t.end, children: spans },
                            ));
                        }
                        Some(t) => return Err(SyntaxError::new(t.start, "expected `,` or `)` in arguments")),
                        None => return Err(SyntaxError::new(self.current_pos(), "unterminated argument list")),
                    }
                }
            }
        }
        // Negative numeric literal.
        if text == "-" && !quoted {
            if let Some(Token { kind: TokenKind::Int(n), layout_before: false, .. }) = self.peek() {
                let n = -n.clone();
                let lit = self.next().unwrap();
                return Ok((Term::Int(n), 0, SpanTree { start: tok.start, end: lit.end, children: vec![] }));
            }
        }
        if let Some(op) = self.ops.prefix(&text) {
            let operand_follows = match self.peek() {
                Some(next) if starts_term(&next.kind) => match &next.kind {
                    TokenKind::Name { text: n, .. } => {
                        let infixish = self.ops.infix(n).is_some() || self.ops.postfix(n).is_some();
                        let functional = self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Open && !t.layout_before);
                        !infixish || self.ops.prefix(n).is_some() || functional
                    }
                    _ => true,
                },
                _ => false,
            };
            if operand_follows && op.priority <= max {
                let (arg, _, arg_span) = self.parse(op.right_max())?;
                let span = SpanTree {
                    start: tok.start,
                    end: arg_span.end,
                    children: vec![arg_span],
                };
                return Ok((Term::compound(&text, vec![arg]), op.priority, span));
            }
        }
        Ok((Term::atom(&text), 0, SpanTree::leaf(&tok)))
    }

    fn list(&mut self, start: Pos) -> Result<Parsed, SyntaxError> {
        let mut items = Vec::new();
        let mut spans = Vec::new();
        loop {
            let (t, _, s) = self.parse(999)?;
            items.push(t);
            spans.push(s);
            match self.peek().map(|t| t.kind.clone()) {
                Some(TokenKind::Comma) => {
                    self.next();
                }
                _ => break,
            }
        }
        let (tail, tail_span) = if self.peek().is_some_and(|t| t.kind == TokenKind::Bar) {
            self.next();
            let (t, _, s) = self.parse(999)?;
            (t, Some(s))
        } else {
            (Term::nil(), None)
        };
        let close = self.expect(TokenKind::CloseList, "`]`")?;
        let end = close.end;
        let mut acc_span = tail_span.unwrap_or(SpanTree { start: close.start, end, children: vec![] });
        for s in spans.into_iter().rev() {
            acc_span = SpanTree {
                start: s.start,
                end,
                children: vec![s, acc_span],
            };
        }
        acc_span.start = start;
        Ok((Term::list_with_tail(items, tail), 0, acc_span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ops::{default_ops, OpType};

    fn fsyntax_ops() -> OperatorTable {
        let mut t = default_ops();
        t.add(1150, OpType::Xfx, ":=").unwrap();
        t.add(1100, OpType::Xfy, "|").unwrap();
        t.add(1050, OpType::Xfx, "?").unwrap();
        t
    }

    fn read(src: &str, ops: &OperatorTable) -> Sentence {
        read_sentence(src, ops, "test", &mut VarGen::new()).unwrap().unwrap()
    }

    fn c(name: &str, args: Vec<Term>) -> Term {
        Term::compound(name, args)
    }

    #[test]
    fn function_definition() {
        let s = read("k(X) := X + 1.", &fsyntax_ops());
        let x = s.term.args()[0].args()[0].clone();
        assert_eq!(s.term, c(":=", vec![c("k", vec![x.clone()]), c("+", vec![x, Term::int(1)])]));
        assert_eq!(s.var_names.values().collect::<Vec<_>>(), vec!["X"]);
    }

    #[test]
    fn repeated_variable_is_shared() {
        let s = read("f(X,X).", &default_ops());
        let args = s.term.args();
        assert_eq!(args[0], args[1]);
        assert!(args[0].is_var());
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let s = read("f(_,_).", &default_ops());
        assert_ne!(s.term.args()[0], s.term.args()[1]);
        assert!(s.var_names.is_empty());
    }

    #[test]
    fn identity_function() {
        let s = read("m(X) := X.", &fsyntax_ops());
        let x = s.term.args()[1].clone();
        assert_eq!(s.term, c(":=", vec![c("m", vec![x.clone()]), x]));
    }

    #[test]
    fn conditional_grouping() {
        let s = read("f(X) := X < 42 ? (k(l(m(X))) * 3) | 1000.", &fsyntax_ops());
        let rhs = &s.term.args()[1];
        assert!(rhs.is_functor("|", 2));
        assert!(rhs.args()[0].is_functor("?", 2));
        assert_eq!(rhs.args()[1], Term::int(1000));
        assert!(rhs.args()[0].args()[0].is_functor("<", 2));
    }

    #[test]
    fn bar_in_list_is_tail_separator() {
        let s = read("p([H|T], T).", &fsyntax_ops());
        let l = &s.term.args()[0];
        assert!(l.is_functor(".", 2));
        assert_eq!(l.args()[1], s.term.args()[1]);
    }

    #[test]
    fn bar_undeclared_is_an_error() {
        assert!(read_sentence("a | b.", &default_ops(), "t", &mut VarGen::new()).is_err());
    }

    #[test]
    fn left_and_right_associativity() {
        let s = read("x(1-2-3, (a,b,c)).", &default_ops());
        let minus = &s.term.args()[0];
        assert_eq!(minus, &c("-", vec![c("-", vec![Term::int(1), Term::int(2)]), Term::int(3)]));
        let conj = &s.term.args()[1];
        assert_eq!(conj.args()[0], Term::atom("a"));
        assert!(conj.args()[1].is_functor(",", 2));
    }

    #[test]
    fn negative_literals_and_prefix_minus() {
        let ops = default_ops();
        assert_eq!(read("x(-1).", &ops).term.args()[0], Term::int(-1));
        assert_eq!(read("x(- 1).", &ops).term.args()[0], c("-", vec![Term::int(1)]));
        assert_eq!(read("x(3-1).", &ops).term.args()[0], c("-", vec![Term::int(3), Term::int(1)]));
        assert_eq!(read("x(-a).", &ops).term.args()[0], c("-", vec![Term::atom("a")]));
        assert_eq!(read("x(-).", &ops).term.args()[0], Term::atom("-"));
        assert_eq!(read("x(- = a).", &ops).term.args()[0], c("=", vec![Term::atom("-"), Term::atom("a")]));
    }

    #[test]
    fn curly_terms() {
        let s = read("x({a, b}, {}).", &default_ops());
        assert!(s.term.args()[0].is_functor("{}", 1));
        assert_eq!(s.term.args()[1], Term::atom("{}"));
    }

    #[test]
    fn streams_successive_sentences() {
        let mut gen = VarGen::new();
        let all = read_all("a.\nb :- a.\n% done\n", &default_ops(), "m", &mut gen).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].span.start_line, 2);
        assert_eq!(&*all[1].span.module, "m");
    }

    #[test]
    fn errors_carry_positions() {
        let e = read_sentence("p :- .\n", &default_ops(), "t", &mut VarGen::new()).unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
        let e = read_sentence("p(a b).", &default_ops(), "t", &mut VarGen::new()).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(read_sentence("p(a)", &default_ops(), "t", &mut VarGen::new()).is_err());
    }

    #[test]
    fn priority_clash_is_error() {
        // xfx does not chain.
        assert!(read_sentence("a = b = c.", &default_ops(), "t", &mut VarGen::new()).is_err());
    }

    #[test]
    fn spans_nest_inside_sentence() {
        let s = read("f(X) :-\n    g(X),\n    h.", &default_ops());
        assert_eq!(s.span.start_line, 1);
        assert_eq!(s.span.end_line, 3);
        for span in s.subterm_spans.values() {
            assert!(s.span.contains(span));
        }
        let body = s.subterm_span(&[1]).unwrap();
        assert_eq!((body.start_line, body.start_col), (2, 5));
        let g = s.subterm_span(&[1, 0]).unwrap();
        assert_eq!((g.end_line, g.end_col), (2, 8));
    }

    #[test]
    fn query_without_period() {
        let mut gen = VarGen::new();
        let q = read_query("f(3,R)", &default_ops(), &mut gen).unwrap();
        assert!(q.term.is_functor("f", 2));
        let q = read_query("X = a.", &default_ops(), &mut gen).unwrap();
        assert!(q.term.is_functor("=", 2));
        assert!(read_query("a. b.", &default_ops(), &mut gen).is_err());
    }
}
