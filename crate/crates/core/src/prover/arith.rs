//! Linear integer arithmetic by Fourier-Motzkin elimination with checkable
//! Farkas certificates, and the Peano normal form used for `Nat` equalities.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ir::{Expr, Name, Prim};

/// `Σ coeffs·atom + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lin {
    pub coeffs: BTreeMap<Expr, BigInt>,
    pub constant: BigInt,
}

impl Lin {
    fn constant(c: BigInt) -> Lin {
        Lin {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    fn atom(e: &Expr) -> Lin {
        Lin {
            coeffs: BTreeMap::from([(e.clone(), BigInt::one())]),
            constant: BigInt::zero(),
        }
    }

    fn add_scaled(&mut self, o: &Lin, k: &BigInt) {
        for (a, c) in &o.coeffs {
            let e = self.coeffs.entry(a.clone()).or_insert_with(BigInt::zero);
            *e += c * k;
            if e.is_zero() {
                self.coeffs.remove(a);
            }
        }
        self.constant += &o.constant * k;
    }

    fn scale(&self, k: &BigInt) -> Lin {
        let mut out = Lin::default();
        out.add_scaled(self, k);
        out
    }

    fn is_const(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Divides by the gcd of the coefficients, rounding the constant down;
    /// exact for `lin ≥ 0` over the integers.
    fn tighten(mut self) -> Lin {
        let g = self.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g > BigInt::one() {
            for c in self.coeffs.values_mut() {
                *c = &*c / &g;
            }
            self.constant = self.constant.div_floor(&g);
        }
        self
    }
}

pub fn linearize(e: &Expr) -> Lin {
    match e {
        Expr::Int(n) => Lin::constant(n.clone()),
        Expr::Prim(Prim::Add, a) if a.len() == 2 => {
            let mut l = linearize(&a[0]);
            l.add_scaled(&linearize(&a[1]), &BigInt::one());
            l
        }
        Expr::Prim(Prim::Sub, a) if a.len() == 2 => {
            let mut l = linearize(&a[0]);
            l.add_scaled(&linearize(&a[1]), &-BigInt::one());
            l
        }
        Expr::Prim(Prim::Neg, a) => linearize(&a[0]).scale(&-BigInt::one()),
        Expr::Prim(Prim::Mul, a) if a.len() == 2 => {
            let (x, y) = (linearize(&a[0]), linearize(&a[1]));
            if x.is_const() {
                y.scale(&x.constant)
            } else if y.is_const() {
                x.scale(&y.constant)
            } else {
                Lin::atom(e)
            }
        }
        _ => Lin::atom(e),
    }
}

fn diff(a: &Expr, b: &Expr) -> Lin {
    let mut l = linearize(a);
    l.add_scaled(&linearize(b), &-BigInt::one());
    l
}

fn minus_one(mut l: Lin) -> Lin {
    l.constant -= BigInt::one();
    l
}

/// Constraints `lin ≥ 0` equivalent to `e` being true, if `e` is a
/// conjunction-free arithmetic literal. `is_int` decides equality sides.
pub fn literal_constraints(e: &Expr, is_int: &dyn Fn(&Expr) -> bool) -> Option<Vec<Lin>> {
    let out = match e {
        Expr::Bool(false) => vec![Lin::constant(-BigInt::one())],
        Expr::Prim(op, a) if a.len() == 2 => {
            let (x, y) = (&a[0], &a[1]);
            match op {
                Prim::Le => vec![diff(y, x)],
                Prim::Lt => vec![minus_one(diff(y, x))],
                Prim::Ge => vec![diff(x, y)],
                Prim::Gt => vec![minus_one(diff(x, y))],
                Prim::Eq if is_int(x) => vec![diff(x, y), diff(y, x)],
                _ => return None,
            }
        }
        Expr::Prim(Prim::Not, a) => match &a[0] {
            Expr::Prim(op, b) if b.len() == 2 => {
                let (x, y) = (&b[0], &b[1]);
                match op {
                    Prim::Le => vec![minus_one(diff(x, y))],
                    Prim::Lt => vec![diff(x, y)],
                    Prim::Ge => vec![minus_one(diff(y, x))],
                    Prim::Gt => vec![diff(y, x)],
                    _ => return None,
                }
            }
            Expr::Bool(true) => vec![Lin::constant(-BigInt::one())],
            _ => return None,
        },
        _ => return None,
    };
    Some(out.into_iter().map(Lin::tighten).collect())
}

const MAX_BRANCHES: usize = 16;

/// The ways the goal can fail, each a conjunction of constraints. An empty
/// conjunction stands for a failure arithmetic cannot rule out.
pub fn negated_goal(goal: &Expr, is_int: &dyn Fn(&Expr) -> bool) -> Vec<Vec<Lin>> {
    let neg = |e: &Expr| literal_constraints(&Expr::not(e.clone()), is_int);
    let opaque = || vec![vec![]];
    match goal {
        Expr::Bool(false) => opaque(),
        Expr::Prim(Prim::Eq, a) if a.len() == 2 && is_int(&a[0]) => vec![
            vec![minus_one(diff(&a[0], &a[1])).tighten()],
            vec![minus_one(diff(&a[1], &a[0])).tighten()],
        ],
        Expr::Prim(Prim::Not, a) => match literal_constraints(&a[0], is_int) {
            Some(cs) => vec![cs],
            None => opaque(),
        },
        Expr::Prim(Prim::Le | Prim::Lt | Prim::Ge | Prim::Gt, _) => match neg(goal) {
            Some(cs) => vec![cs],
            None => opaque(),
        },
        Expr::Prim(Prim::And, a) => {
            let mut out: Vec<Vec<Lin>> = a.iter().flat_map(|x| negated_goal(x, is_int)).collect();
            if out.len() > MAX_BRANCHES || out.iter().any(|b| b.is_empty()) {
                out = opaque();
            }
            out
        }
        Expr::Prim(Prim::Or, a) => {
            let mut out: Vec<Vec<Lin>> = vec![vec![]];
            for x in a {
                let bs = negated_goal(x, is_int);
                out = out
                    .iter()
                    .flat_map(|o| bs.iter().map(move |b| o.iter().chain(b).cloned().collect()))
                    .collect();
                if out.len() > MAX_BRANCHES {
                    return opaque();
                }
            }
            out
        }
        Expr::Prim(Prim::Implies, a) if a.len() == 2 => {
            let hyp = literal_constraints(&a[0], is_int).unwrap_or_default();
            negated_goal(&a[1], is_int)
                .into_iter()
                .map(|b| hyp.iter().chain(&b).cloned().collect())
                .collect()
        }
        _ => opaque(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    /// Constraint `k` of fact `i`.
    Fact(usize, usize),
    /// Constraint `k` of the negated-goal branch.
    Goal(usize),
}

/// Positive multipliers whose combination is a negative constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub terms: Vec<(Source, BigInt)>,
}

const MAX_CONSTRAINTS: usize = 4000;

/// Searches for a refutation of `inputs` by Fourier-Motzkin elimination.
pub fn refute(inputs: &[(Source, Lin)]) -> Option<Certificate> {
    type Row = (Lin, BTreeMap<Source, BigInt>);
    let mut rows: Vec<Row> = inputs
        .iter()
        .map(|(s, l)| (l.clone(), BTreeMap::from([(*s, BigInt::one())])))
        .collect();
    loop {
        if let Some((_, d)) = rows.iter().find(|(l, _)| l.is_const() && l.constant.is_negative()) {
            return Some(Certificate {
                terms: d.iter().map(|(s, k)| (*s, k.clone())).collect(),
            });
        }
        // variable with the fewest generated combinations
        let mut counts: BTreeMap<&Expr, (usize, usize)> = BTreeMap::new();
        for (l, _) in &rows {
            for (a, c) in &l.coeffs {
                let e = counts.entry(a).or_default();
                if c.is_positive() {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let (var, _) = counts.iter().min_by_key(|(_, (p, n))| p * n)?;
        let var = (*var).clone();
        let (with, without): (Vec<Row>, Vec<Row>) = rows.into_iter().partition(|(l, _)| l.coeffs.contains_key(&var));
        let (pos, neg): (Vec<Row>, Vec<Row>) = with.into_iter().partition(|(l, _)| l.coeffs[&var].is_positive());
        let mut next = without;
        for (lp, dp) in &pos {
            for (ln, dn) in &neg {
                let a = lp.coeffs[&var].clone();
                let b = -ln.coeffs[&var].clone();
                let mut l = lp.scale(&b);
                l.add_scaled(ln, &a);
                let mut d: BTreeMap<Source, BigInt> = BTreeMap::new();
                for (s, k) in dp {
                    *d.entry(*s).or_insert_with(BigInt::zero) += k * &b;
                }
                for (s, k) in dn {
                    *d.entry(*s).or_insert_with(BigInt::zero) += k * &a;
                }
                next.push((l, d));
                if next.len() > MAX_CONSTRAINTS {
                    return None;
                }
            }
        }
        rows = next;
        if rows.is_empty() {
            return None;
        }
    }
}

/// Re-checks a certificate against independently recomputed constraints.
pub fn check_certificate(cert: &Certificate, lookup: &dyn Fn(Source) -> Option<Lin>) -> bool {
    if cert.terms.is_empty() {
        return false;
    }
    let mut sum = Lin::default();
    for (s, k) in &cert.terms {
        if !k.is_positive() {
            return false;
        }
        match lookup(*s) {
            Some(l) => sum.add_scaled(&l, k),
            None => return false,
        }
    }
    sum.is_const() && sum.constant.is_negative()
}

/// Constructor and function names of a Peano-style natural number type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatSig {
    pub datatype: Name,
    pub zero: Name,
    pub succ: Name,
    pub plus: Option<Name>,
    pub times: Option<Name>,
}

/// Polynomial with natural coefficients over opaque atoms; a monomial is a
/// sorted list of atoms.
pub type Poly = BTreeMap<Vec<Expr>, BigInt>;

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (m, c) in b {
        *out.entry(m.clone()).or_insert_with(BigInt::zero) += c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m: Vec<Expr> = ma.iter().chain(mb.iter()).cloned().collect();
            m.sort();
            *out.entry(m).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

impl NatSig {
    /// Whether the head symbol of `e` is one of the arithmetic symbols.
    pub fn is_nat_head(&self, e: &Expr) -> bool {
        match e {
            Expr::Ctor(c, _) => *c == self.zero || *c == self.succ,
            Expr::Call(f, _) => Some(f) == self.plus.as_ref() || Some(f) == self.times.as_ref(),
            _ => false,
        }
    }

    pub fn normalize(&self, e: &Expr) -> Poly {
        match e {
            Expr::Ctor(c, a) if *c == self.zero && a.is_empty() => Poly::new(),
            Expr::Ctor(c, a) if *c == self.succ && a.len() == 1 => poly_add(&self.normalize(&a[0]), &Poly::from([(vec![], BigInt::one())])),
            Expr::Call(f, a) if Some(f) == self.plus.as_ref() && a.len() == 2 => poly_add(&self.normalize(&a[0]), &self.normalize(&a[1])),
            Expr::Call(f, a) if Some(f) == self.times.as_ref() && a.len() == 2 => poly_mul(&self.normalize(&a[0]), &self.normalize(&a[1])),
            _ => Poly::from([(vec![e.clone()], BigInt::one())]),
        }
    }
}
