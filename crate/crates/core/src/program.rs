//! Loading a module from source text and running queries against it.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expand::{
    expand_program, extract_annotations, strip_annotations, AnnotatedClause, Clause, ClauseId, ExpandError,
    Package, Registry, SymbolTable,
};
use crate::solver::{ConsultError, Database, SolveError, Solution, Solver};
use crate::syntax::{
    default_ops, portray_clause, read_query, write_term, OperatorTable, Reader, SyntaxError, VarStyle, WriteOptions,
};
use crate::term::{Term, VarGen};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Expand(#[from] ExpandError),
    #[error("{0}")]
    Consult(#[from] ConsultError),
    #[error("{line}:{col}: {message}")]
    Directive { line: u32, col: u32, message: String },
}

impl LoadError {
    /// Line and column of the offending text, when known.
    pub fn position(&self) -> Option<(u32, u32)> {
        match self {
            LoadError::Syntax(e) => Some((e.line, e.col)),
            LoadError::Expand(e) => e.span.as_ref().map(|s| (s.start_line, s.start_col)),
            LoadError::Directive { line, col, .. } => Some((*line, *col)),
            LoadError::Consult(_) => None,
        }
    }
}

pub struct Program {
    pub module: Arc<str>,
    pub ops: OperatorTable,
    pub packages: Vec<Arc<dyn Package>>,
    pub annotated: Vec<AnnotatedClause>,
    /// Runtime clauses contributed by packages.
    pub runtime: Vec<Clause>,
    /// Extracted program, goal wrappers replaced by `'$gmark'/2`.
    pub clauses: Vec<Clause>,
    pub symtab: SymbolTable,
    pub db: Database,
    pub warnings: Vec<String>,
}

pub struct Query {
    pub goal: Term,
    pub names: BTreeMap<usize, String>,
}

fn package_names(t: &Term) -> Option<Vec<String>> {
    match t {
        Term::Atom(a) => Some(vec![a.to_string()]),
        _ => t
            .list_items()?
            .into_iter()
            .map(|x| match x {
                Term::Atom(a) => Some(a.to_string()),
                _ => None,
            })
            .collect(),
    }
}

pub fn load_program(text: &str, module: &str, registry: &Registry) -> Result<Program, LoadError> {
    let mut ops = default_ops();
    let mut gen = VarGen::new();
    let mut reader = Reader::new(text, module);
    let mut packages: Vec<Arc<dyn Package>> = Vec::new();
    let mut sentences = Vec::new();
    while let Some(s) = reader.next_sentence(&ops, &mut gen)? {
        let directive = match &s.term {
            Term::Compound(f, args) if &**f == ":-" && args.len() == 1 => Some(&args[0]),
            _ => None,
        };
        let Some(d) = directive else {
            sentences.push(s);
            continue;
        };
        let err = |message: String| LoadError::Directive {
            line: s.span.start_line,
            col: s.span.start_col,
            message,
        };
        if !d.is_functor("use_package", 1) {
            return Err(err(format!("unsupported directive `{}`", write_term(d, &ops, &WriteOptions::default()))));
        }
        if !sentences.is_empty() {
            return Err(err("use_package must come before the first clause".to_string()));
        }
        let names = package_names(&d.args()[0]).ok_or_else(|| err("use_package expects a name or list".into()))?;
        for name in names {
            let p = registry.lookup(&name).ok_or_else(|| err(format!("unknown package `{name}`")))?;
            if packages.iter().any(|q| q.name() == name) {
                continue;
            }
            for op in p.operators() {
                ops.declare(&op).map_err(|e| err(e.to_string()))?;
            }
            packages.push(p);
        }
    }
    let annotated = expand_program(sentences, &packages, &mut gen)?;
    let extracted = extract_annotations(&annotated)?;
    let mut runtime = Vec::new();
    for p in &packages {
        let src = p.runtime_source();
        let mut r = Reader::new(src, p.name());
        let mut ordinal = 0;
        while let Some(s) = r.next_sentence(&default_ops(), &mut gen)? {
            ordinal += 1;
            let id = ClauseId {
                module: Arc::from(p.name()),
                ordinal,
            };
            runtime.push(Clause::from_term(&s.term, id, Some(s.span)));
        }
    }
    let mut all = extracted.clauses.clone();
    all.extend(runtime.iter().cloned());
    let db = Database::consult(all)?;
    Ok(Program {
        module: Arc::from(module),
        ops,
        packages,
        annotated,
        runtime,
        clauses: extracted.clauses,
        symtab: extracted.symtab,
        db,
        warnings: extracted.warnings,
    })
}

impl Program {
    /// The target program with every annotation erased, runtime clauses last.
    pub fn stripped_clauses(&self) -> Result<Vec<Clause>, ExpandError> {
        let mut cs = strip_annotations(&self.annotated)?;
        cs.extend(self.runtime.iter().cloned());
        Ok(cs)
    }

    pub fn stripped_db(&self) -> Result<Database, LoadError> {
        Ok(Database::consult(self.stripped_clauses()?)?)
    }

    /// The expanded program as re-readable text, with the symbol table
    /// appended as `%` comments. `strip` erases all annotations.
    pub fn listing(&self, strip: bool) -> Result<String, ExpandError> {
        let opts = WriteOptions {
            vars: VarStyle::Names,
            ..WriteOptions::source()
        };
        let terms: Vec<Term> = if strip {
            self.stripped_clauses()?.iter().map(Clause::to_term).collect()
        } else {
            let mut ts: Vec<Term> = self.annotated.iter().map(|a| a.term.clone()).collect();
            ts.extend(self.runtime.iter().map(Clause::to_term));
            ts
        };
        let mut out = String::new();
        for t in &terms {
            out.push_str(&portray_clause(t, &self.ops, &opts));
            out.push('\n');
        }
        for line in self.symtab.dump(&self.ops).lines() {
            out.push_str("% ");
            out.push_str(line);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse_query(&self, text: &str) -> Result<Query, SyntaxError> {
        let s = read_query(text, &self.ops, &mut VarGen::new())?;
        Ok(Query {
            goal: s.term,
            names: s.var_names,
        })
    }

    pub fn solve(&self, q: &Query) -> Result<Vec<Solution>, SolveError> {
        Solver::new(&self.db, q.goal.clone(), &q.names, None).collect()
    }
}

/// `X = a, Y = b`, or `yes` when the query has no named variables.
pub fn format_solution(s: &Solution, ops: &OperatorTable) -> String {
    if s.bindings.is_empty() {
        return "yes".to_string();
    }
    let opts = WriteOptions {
        vars: VarStyle::Fresh,
        ..WriteOptions::default()
    };
    s.bindings
        .iter()
        .map(|(name, value)| format!("{name} = {}", write_term(value, ops, &opts)))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Solve(#[from] SolveError),
}

/// Runs a query and returns one output line per answer, or `no`.
pub fn run_query(program: &Program, text: &str) -> Result<Vec<String>, QueryError> {
    let q = program.parse_query(text)?;
    let sols = program.solve(&q)?;
    if sols.is_empty() {
        return Ok(vec!["no".to_string()]);
    }
    Ok(sols.iter().map(|s| format_solution(s, &program.ops)).collect())
}
