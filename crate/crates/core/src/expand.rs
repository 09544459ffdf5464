//! Package registry, expansion pipeline and annotation extraction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{write_term, OpDecl, OperatorTable, Sentence, SourceSpan, WriteOptions};
use crate::term::{Term, VarGen};

pub const CLAUSE_INFO: &str = "$clause_info";
pub const GOAL_INFO: &str = "$goal_info";
pub const GOAL_MARK: &str = "$gmark";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseId {
    pub module: Arc<str>,
    pub ordinal: usize,
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.module, self.ordinal)
    }
}

pub type GoalId = usize;

#[derive(Clone, Debug)]
pub struct Clause {
    pub head: Term,
    pub body: Term,
    pub id: ClauseId,
    pub span: Option<SourceSpan>,
}

impl Clause {
    pub fn from_term(t: &Term, id: ClauseId, span: Option<SourceSpan>) -> Clause {
        let (head, body) = match t {
            Term::Compound(f, args) if &**f == ":-" && args.len() == 2 => (args[0].clone(), args[1].clone()),
            other => (other.clone(), Term::atom("true")),
        };
        Clause { head, body, id, span }
    }

    pub fn to_term(&self) -> Term {
        if self.body.is_atom("true") {
            self.head.clone()
        } else {
            Term::compound(":-", vec![self.head.clone(), self.body.clone()])
        }
    }
}

/// Source information recorded for an annotated clause group or goal.
#[derive(Clone, Debug)]
pub struct SourceInfo {
    pub si: Term,
    pub span: SourceSpan,
    pub group: Vec<ClauseId>,
}

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    pub clause_entries: BTreeMap<ClauseId, SourceInfo>,
    pub goal_entries: BTreeMap<GoalId, SourceInfo>,
}

impl SymbolTable {
    pub fn lookup_clause(&self, id: &ClauseId) -> Option<&SourceInfo> {
        self.clause_entries.get(id)
    }

    pub fn lookup_goal(&self, id: GoalId) -> Option<&SourceInfo> {
        self.goal_entries.get(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.clause_entries.is_empty() && self.goal_entries.is_empty()
    }

    /// One line per entry: `id<TAB>line<TAB>si`, clauses first.
    pub fn dump(&self, ops: &OperatorTable) -> String {
        let opts = WriteOptions::default();
        let mut out = String::new();
        for (id, info) in &self.clause_entries {
            out.push_str(&format!("{id}\t{}\t{}\n", info.span.start_line, write_term(&info.si, ops, &opts)));
        }
        for (id, info) in &self.goal_entries {
            out.push_str(&format!("g{id}\t{}\t{}\n", info.span.start_line, write_term(&info.si, ops, &opts)));
        }
        out
    }
}

/// A clause term as produced by expansion: either a plain clause or
/// `'$clause_info'(Clauses, SI)`, possibly with `'$goal_info'(G, SI)` in bodies.
#[derive(Clone, Debug)]
pub struct AnnotatedClause {
    pub term: Term,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub enum Item {
    Source(Sentence),
    Annotated(AnnotatedClause),
}

impl Item {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Item::Source(s) => &s.span,
            Item::Annotated(a) => &a.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ExpandError {
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for ExpandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(s) => write!(f, "{}:{}: {}", s.start_line, s.start_col, self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ExpandError {
    pub fn new(message: impl Into<String>, span: Option<&SourceSpan>) -> ExpandError {
        ExpandError {
            message: message.into(),
            span: span.cloned(),
        }
    }
}

/// A language extension: operators, a whole-program translation and
/// runtime support clauses.
pub trait Package: Send + Sync {
    fn name(&self) -> &str;

    fn operators(&self) -> Vec<OpDecl>;

    /// Rewrites the items it handles; everything else is returned unchanged
    /// and in order.
    fn expand(&self, items: Vec<Item>, gen: &mut VarGen) -> Result<Vec<Item>, ExpandError>;

    /// Program text for the support predicates linked with every module
    /// using the package.
    fn runtime_source(&self) -> &str {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("package `{0}` is already registered")]
    Duplicate(String),
}

#[derive(Clone, Default)]
pub struct Registry {
    packages: Vec<Arc<dyn Package>>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    /// A registry with the bundled packages.
    pub fn standard() -> Registry {
        let mut r = Registry::new();
        r.register(Arc::new(crate::packages::fsyntax::Fsyntax)).expect("fresh registry");
        r.register(Arc::new(crate::packages::dcg::Dcg)).expect("fresh registry");
        r
    }

    pub fn register(&mut self, p: Arc<dyn Package>) -> Result<(), RegistryError> {
        if self.lookup(p.name()).is_some() {
            return Err(RegistryError::Duplicate(p.name().to_string()));
        }
        self.packages.push(p);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<Arc<dyn Package>> {
        self.packages.iter().find(|p| p.name() == name).cloned()
    }

    pub fn names(&self) -> Vec<&str> {
        self.packages.iter().map(|p| p.name()).collect()
    }
}

/// Runs each package over the whole program in order; leftover sentences
/// become bare clauses.
pub fn expand_program(
    sentences: Vec<Sentence>,
    pkgs: &[Arc<dyn Package>],
    gen: &mut VarGen,
) -> Result<Vec<AnnotatedClause>, ExpandError> {
    let mut items: Vec<Item> = sentences.into_iter().map(Item::Source).collect();
    for p in pkgs {
        items = p.expand(items, gen)?;
    }
    Ok(items
        .into_iter()
        .map(|it| match it {
            Item::Source(s) => AnnotatedClause {
                term: s.term,
                span: s.span,
            },
            Item::Annotated(a) => a,
        })
        .collect())
}

#[derive(Clone, Debug, Default)]
pub struct Extracted {
    pub clauses: Vec<Clause>,
    pub symtab: SymbolTable,
    pub warnings: Vec<String>,
}

/// Flattens clause groups into plain clauses, moving symbolic information
/// into a symbol table and replacing goal wrappers by `'$gmark'(Id, G)`.
pub fn extract_annotations(acs: &[AnnotatedClause]) -> Result<Extracted, ExpandError> {
    let mut ex = Extractor {
        strip: false,
        out: Extracted::default(),
        next_goal: 1,
        ordinals: BTreeMap::new(),
    };
    for ac in acs {
        ex.annotated(ac)?;
    }
    Ok(ex.out)
}

/// Erases every annotation in place, keeping only the target program.
pub fn strip_annotations(acs: &[AnnotatedClause]) -> Result<Vec<Clause>, ExpandError> {
    let mut ex = Extractor {
        strip: true,
        out: Extracted::default(),
        next_goal: 1,
        ordinals: BTreeMap::new(),
    };
    for ac in acs {
        ex.annotated(ac)?;
    }
    Ok(ex.out.clauses)
}

struct Extractor {
    strip: bool,
    out: Extracted,
    next_goal: GoalId,
    ordinals: BTreeMap<Arc<str>, usize>,
}

impl Extractor {
    fn next_id(&mut self, module: &Arc<str>) -> ClauseId {
        let n = self.ordinals.entry(module.clone()).or_insert(0);
        *n += 1;
        ClauseId {
            module: module.clone(),
            ordinal: *n,
        }
    }

    fn annotated(&mut self, ac: &AnnotatedClause) -> Result<(), ExpandError> {
        let span = &ac.span;
        match &ac.term {
            Term::Compound(f, args) if &**f == CLAUSE_INFO => {
                let [payload, si] = args.as_slice() else {
                    return Err(ExpandError::new(format!("{CLAUSE_INFO} expects 2 arguments"), Some(span)));
                };
                let members = payload
                    .list_items()
                    .ok_or_else(|| ExpandError::new(format!("{CLAUSE_INFO} payload must be a list"), Some(span)))?;
                if members.is_empty() {
                    return Err(ExpandError::new(format!("{CLAUSE_INFO} payload is empty"), Some(span)));
                }
                let keep = self.keep_si(si, span);
                let mut group = Vec::new();
                for m in members {
                    if m.is_functor(CLAUSE_INFO, 2) {
                        return Err(ExpandError::new(format!("nested {CLAUSE_INFO}"), Some(span)));
                    }
                    let id = self.clause(m, span)?;
                    group.push(id);
                }
                if keep {
                    for id in &group {
                        let info = SourceInfo {
                            si: si.clone(),
                            span: span.clone(),
                            group: group.clone(),
                        };
                        self.out.symtab.clause_entries.insert(id.clone(), info);
                    }
                }
            }
            t => {
                self.clause(t, span)?;
            }
        }
        Ok(())
    }

    fn keep_si(&mut self, si: &Term, span: &SourceSpan) -> bool {
        if self.strip {
            return false;
        }
        if si.is_var() {
            self.out.warnings.push(format!(
                "{}:{}: unbound symbolic information ignored",
                span.start_line, span.start_col
            ));
            return false;
        }
        true
    }

    fn clause(&mut self, t: &Term, span: &SourceSpan) -> Result<ClauseId, ExpandError> {
        let (head, body) = match t {
            Term::Compound(f, args) if &**f == ":-" && args.len() == 2 => (args[0].clone(), Some(&args[1])),
            other => (other.clone(), None),
        };
        let body = match body {
            Some(b) => self.body(b, span)?,
            None => Term::atom("true"),
        };
        let id = self.next_id(&span.module);
        self.out.clauses.push(Clause {
            head,
            body,
            id: id.clone(),
            span: Some(span.clone()),
        });
        Ok(id)
    }

    fn body(&mut self, b: &Term, span: &SourceSpan) -> Result<Term, ExpandError> {
        if self.strip {
            let mut goals = Vec::new();
            self.strip_goals(b, span, &mut goals)?;
            return Ok(Term::conjunction(goals));
        }
        self.mark(b, span)
    }

    fn strip_goals(&mut self, b: &Term, span: &SourceSpan, out: &mut Vec<Term>) -> Result<(), ExpandError> {
        match b {
            Term::Compound(f, args) if &**f == "," && args.len() == 2 => {
                self.strip_goals(&args[0], span, out)?;
                self.strip_goals(&args[1], span, out)
            }
            Term::Compound(f, args) if &**f == GOAL_INFO => {
                let [g, _] = args.as_slice() else {
                    return Err(ExpandError::new(format!("{GOAL_INFO} expects 2 arguments"), Some(span)));
                };
                self.strip_goals(g, span, out)
            }
            t if t.is_atom("true") => Ok(()),
            t => {
                out.push(t.clone());
                Ok(())
            }
        }
    }

    fn mark(&mut self, b: &Term, span: &SourceSpan) -> Result<Term, ExpandError> {
        match b {
            Term::Compound(f, args) if &**f == "," && args.len() == 2 => Ok(Term::compound(
                ",",
                vec![self.mark(&args[0], span)?, self.mark(&args[1], span)?],
            )),
            Term::Compound(f, args) if &**f == GOAL_INFO => {
                let [g, si] = args.as_slice() else {
                    return Err(ExpandError::new(format!("{GOAL_INFO} expects 2 arguments"), Some(span)));
                };
                let inner = self.mark(g, span)?;
                if !self.keep_si(si, span) {
                    return Ok(inner);
                }
                let gid = self.next_goal;
                self.next_goal += 1;
                self.out.symtab.goal_entries.insert(
                    gid,
                    SourceInfo {
                        si: si.clone(),
                        span: span.clone(),
                        group: Vec::new(),
                    },
                );
                Ok(Term::compound(GOAL_MARK, vec![Term::int(gid as u64), inner]))
            }
            t => Ok(t.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{default_ops, read_sentence, Pos};

    fn span() -> SourceSpan {
        SourceSpan::new("t".into(), Pos { line: 1, col: 1 }, Pos { line: 1, col: 9 })
    }

    fn ac(src: &str) -> AnnotatedClause {
        let s = read_sentence(src, &default_ops(), "t", &mut VarGen::new()).unwrap().unwrap();
        AnnotatedClause { term: s.term, span: span() }
    }

    struct Nop(&'static str);

    impl Package for Nop {
        fn name(&self) -> &str {
            self.0
        }
        fn operators(&self) -> Vec<OpDecl> {
            Vec::new()
        }
        fn expand(&self, items: Vec<Item>, _: &mut VarGen) -> Result<Vec<Item>, ExpandError> {
            Ok(items)
        }
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut r = Registry::new();
        r.register(Arc::new(Nop("fsyntax"))).unwrap();
        assert!(r.lookup("fsyntax").is_some());
        assert_eq!(
            r.register(Arc::new(Nop("fsyntax"))).unwrap_err(),
            RegistryError::Duplicate("fsyntax".into())
        );
        assert_eq!(Registry::standard().names(), vec!["fsyntax", "dcg"]);
    }

    #[test]
    fn empty_program() {
        assert!(expand_program(Vec::new(), &[], &mut VarGen::new()).unwrap().is_empty());
        assert!(extract_annotations(&[]).unwrap().clauses.is_empty());
    }

    #[test]
    fn group_shares_info() {
        let ex = extract_annotations(&[ac("'$clause_info'([c1, (c2 :- '$goal_info'(g, sg))], si).")]).unwrap();
        assert_eq!(ex.clauses.len(), 2);
        let ids: Vec<_> = ex.clauses.iter().map(|c| c.id.clone()).collect();
        for id in &ids {
            let info = ex.symtab.lookup_clause(id).unwrap();
            assert_eq!(info.si, Term::atom("si"));
            assert_eq!(info.group, ids);
        }
        assert_eq!(ex.clauses[1].body.to_string(), "'$gmark'(1,g)");
        assert_eq!(ex.symtab.lookup_goal(1).unwrap().si, Term::atom("sg"));
        let missing = ClauseId { module: "t".into(), ordinal: 9 };
        assert!(ex.symtab.lookup_clause(&missing).is_none());
    }

    #[test]
    fn bare_clause_has_no_entries() {
        let ex = extract_annotations(&[ac("p(1).")]).unwrap();
        assert_eq!(ex.clauses[0].head.to_string(), "p(1)");
        assert!(ex.symtab.is_empty());
    }

    #[test]
    fn strip_erases_in_place() {
        let acs = [ac(
            "'$clause_info'([(f(X,R) :- '$goal_info'(X<42, s), '$goal_info'((!, g(X,T)), s), R=T), f(X,1000)], s).",
        )];
        let cs = strip_annotations(&acs).unwrap();
        let texts: Vec<String> = cs.iter().map(|c| c.to_term().to_string()).collect();
        assert_eq!(texts, vec!["f(X,R) :- X<42,!,g(X,T),R=T", "f(X,1000)"]);
    }

    #[test]
    fn malformed_annotations() {
        assert!(extract_annotations(&[ac("'$clause_info'(c1, si).")]).is_err());
        assert!(extract_annotations(&[ac("'$clause_info'([c1]).")]).is_err());
        assert!(extract_annotations(&[ac("p :- '$goal_info'(g).")]).is_err());
    }

    #[test]
    fn unbound_si_falls_back() {
        let ex = extract_annotations(&[ac("'$clause_info'([(p :- '$goal_info'(q, S))], S).")]).unwrap();
        assert!(ex.symtab.is_empty());
        assert_eq!(ex.clauses[0].body, Term::atom("q"));
        assert_eq!(ex.warnings.len(), 2);
    }

    #[test]
    fn vars_shared_between_si_and_clause() {
        let ex = extract_annotations(&[ac("'$clause_info'([m(X,X)], m(X)).")]).unwrap();
        let info = ex.symtab.lookup_clause(&ex.clauses[0].id).unwrap();
        assert_eq!(info.si.args()[0], ex.clauses[0].head.args()[0]);
    }
}
