use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fixity {
    Prefix,
    Infix,
    Postfix,
}

impl OpType {
    pub fn fixity(self) -> Fixity {
        match self {
            OpType::Xfx | OpType::Xfy | OpType::Yfx => Fixity::Infix,
            OpType::Fy | OpType::Fx => Fixity::Prefix,
            OpType::Xf | OpType::Yf => Fixity::Postfix,
        }
    }
}

impl FromStr for OpType {
    type Err = OpError;

    fn from_str(s: &str) -> Result<OpType, OpError> {
        Ok(match s {
            "xfx" => OpType::Xfx,
            "xfy" => OpType::Xfy,
            "yfx" => OpType::Yfx,
            "fy" => OpType::Fy,
            "fx" => OpType::Fx,
            "xf" => OpType::Xf,
            "yf" => OpType::Yf,
            _ => return Err(OpError::BadType(s.to_string())),
        })
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpType::Xfx => "xfx",
            OpType::Xfy => "xfy",
            OpType::Yfx => "yfx",
            OpType::Fy => "fy",
            OpType::Fx => "fx",
            OpType::Xf => "xf",
            OpType::Yf => "yf",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpDef {
    pub priority: u16,
    pub kind: OpType,
}

impl OpDef {
    /// Maximum priority of the left argument (infix and postfix ops).
    pub fn left_max(&self) -> u16 {
        match self.kind {
            OpType::Yfx | OpType::Yf => self.priority,
            _ => self.priority - 1,
        }
    }

    /// Maximum priority of the right argument (infix and prefix ops).
    pub fn right_max(&self) -> u16 {
        match self.kind {
            OpType::Xfy | OpType::Fy => self.priority,
            _ => self.priority - 1,
        }
    }
}

/// An operator declaration as carried by packages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDecl {
    pub priority: u16,
    pub kind: OpType,
    pub name: String,
}

impl OpDecl {
    pub fn new(priority: u16, kind: OpType, name: &str) -> OpDecl {
        OpDecl {
            priority,
            kind,
            name: name.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("operator priority {0} out of range 1..1200")]
    BadPriority(u16),
    #[error("unknown operator type `{0}`")]
    BadType(String),
}

/// Operator definitions keyed by name and fixity. Each name has at most one
/// definition per fixity; adding a second one replaces the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorTable {
    ops: HashMap<(String, Fixity), OpDef>,
}

impl Default for OperatorTable {
    fn default() -> Self {
        default_ops()
    }
}

impl OperatorTable {
    pub fn empty() -> OperatorTable {
        OperatorTable { ops: HashMap::new() }
    }

    pub fn add(&mut self, priority: u16, kind: OpType, name: &str) -> Result<(), OpError> {
        if !(1..=1200).contains(&priority) {
            return Err(OpError::BadPriority(priority));
        }
        self.ops
            .insert((name.to_string(), kind.fixity()), OpDef { priority, kind });
        Ok(())
    }

    pub fn declare(&mut self, decl: &OpDecl) -> Result<(), OpError> {
        self.add(decl.priority, decl.kind, &decl.name)
    }

    pub fn lookup(&self, name: &str, fixity: Fixity) -> Option<OpDef> {
        self.ops.get(&(name.to_string(), fixity)).copied()
    }

    pub fn infix(&self, name: &str) -> Option<OpDef> {
        self.lookup(name, Fixity::Infix)
    }

    pub fn prefix(&self, name: &str) -> Option<OpDef> {
        self.lookup(name, Fixity::Prefix)
    }

    pub fn postfix(&self, name: &str) -> Option<OpDef> {
        self.lookup(name, Fixity::Postfix)
    }

    pub fn is_op(&self, name: &str) -> bool {
        self.infix(name).is_some() || self.prefix(name).is_some() || self.postfix(name).is_some()
    }
}

/// The standard table: clause neck, conjunction, comparison and arithmetic.
pub fn default_ops() -> OperatorTable {
    let mut t = OperatorTable::empty();
    let defs: &[(u16, OpType, &str)] = &[
        (1200, OpType::Xfx, ":-"),
        (1200, OpType::Fx, ":-"),
        (1000, OpType::Xfy, ","),
        (700, OpType::Xfx, "="),
        (700, OpType::Xfx, "<"),
        (700, OpType::Xfx, ">"),
        (700, OpType::Xfx, "=<"),
        (700, OpType::Xfx, ">="),
        (700, OpType::Xfx, "is"),
        (500, OpType::Yfx, "+"),
        (500, OpType::Yfx, "-"),
        (400, OpType::Yfx, "*"),
        (400, OpType::Yfx, "//"),
        (400, OpType::Yfx, "mod"),
        (200, OpType::Fy, "-"),
    ];
    for &(p, k, n) in defs {
        t.add(p, k, n).expect("static table is valid");
    }
    t
}
