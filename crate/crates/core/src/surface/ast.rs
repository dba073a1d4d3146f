use num_bigint::BigInt;

use super::{HygienicName, NameTable, SourceSpan};

/// An identifier occurrence. `resolved` is filled in by name resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub text: String,
    pub span: SourceSpan,
    pub resolved: Option<HygienicName>,
}

impl Ident {
    pub fn new(text: impl Into<String>, span: SourceSpan) -> Self {
        Ident {
            text: text.into(),
            span,
            resolved: None,
        }
    }

    pub fn name(&self) -> &HygienicName {
        self.resolved
            .as_ref()
            .unwrap_or_else(|| panic!("identifier `{}` used before resolution", self.text))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SType {
    Named(Ident, Vec<SType>),
    Tuple(Vec<SType>),
    Fun(Vec<SType>, Box<SType>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    User,
    Base,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SCtor {
    pub name: Ident,
    pub typarams: Vec<Ident>,
    pub fields: Vec<(Ident, SType)>,
    pub parent: Ident,
    pub parent_args: Vec<SType>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SDataType {
    pub name: Ident,
    pub typarams: Vec<Ident>,
    pub ctors: Vec<SCtor>,
    pub span: SourceSpan,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SFun {
    pub name: Ident,
    pub typarams: Vec<Ident>,
    pub params: Vec<(Ident, SType)>,
    pub ret: Option<SType>,
    pub require: Option<SExpr>,
    pub body: SExpr,
    /// `ensuring` predicate, always a one-parameter lambda after parsing.
    pub ensuring: Option<SExpr>,
    pub holds: bool,
    pub proof: Option<Annotation>,
    pub library: Option<Annotation>,
    pub span: SourceSpan,
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaParam {
    pub name: Ident,
    pub ty: Option<SType>,
    /// Introduced by `_` placeholder syntax rather than written by the user.
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExprKind {
    /// Bare identifier: variable, function reference, or nullary constructor.
    Ident(Ident, Vec<SType>),
    Int(BigInt),
    Bool(bool),
    /// `name[T..](args)`: function call, constructor application, or
    /// application of a function-typed variable.
    Call(Ident, Vec<SType>, Vec<SExpr>),
    /// Application of an arbitrary expression: `(e)(args)`.
    Apply(Box<SExpr>, Vec<SExpr>),
    /// `recv.m(args)` or `recv.m`.
    Method(Box<SExpr>, Ident, Vec<SExpr>),
    Proj(Box<SExpr>, usize),
    Lambda(Vec<LambdaParam>, Box<SExpr>),
    Tuple(Vec<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Block(Vec<Stmt>, Box<SExpr>),
    Match(Box<SExpr>, Vec<SCase>),
    Binary(BinOp, Box<SExpr>, Box<SExpr>),
    Unary(UnOp, Box<SExpr>),
    /// `e ensuring p`; only legal as a function body wrapper.
    Ensuring(Box<SExpr>, Box<SExpr>),
    /// `_` inside an expression that will become a lambda.
    Placeholder(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SExpr {
    pub kind: SExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Val(Ident, Option<SType>, SExpr),
    Require(SExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SCase {
    pub pattern: SPattern,
    pub body: SExpr,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SPatternKind {
    Wild,
    /// Identifier pattern: a binder, or a nullary constructor.
    Bind(Ident),
    Ctor(Ident, Vec<SPattern>),
    Tuple(Vec<SPattern>),
    Int(BigInt),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SPattern {
    pub kind: SPatternKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SurfaceProgram {
    pub datatypes: Vec<SDataType>,
    pub functions: Vec<SFun>,
    pub name_table: NameTable,
    pub resolved: bool,
}

impl SurfaceProgram {
    pub fn user_functions(&self) -> impl Iterator<Item = &SFun> {
        self.functions.iter().filter(|f| f.origin == Origin::User)
    }
}
