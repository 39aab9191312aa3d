//! Expressions over model variables.
//!
//! Three syntactic classes appear in a model:
//!
//! * [`Expr`] — polynomials of degree at most two with rational
//!   coefficients. Guards, invariants and kernel parameters are restricted
//!   to the affine fragment (checked by validation); edge resets and
//!   initial values may use the quadratic terms (products like
//!   `in * noise` or `in * age` where one factor is piecewise-constant).
//! * [`Predicate`] — conjunctions of atoms `e ⋈ 0` over affine `e`.
//! * [`FlowExpr`] — per-location derivatives: a rational constant plus
//!   value terms over piecewise-constant variables, rate terms referring
//!   to another variable's derivative, and rate*value product terms.
//!
//! Keeping resets quadratic while guards stay affine preserves closed-form
//! event detection: along a flow segment every variable is affine in time,
//! so guard atoms are affine in time and reset-image atoms at most
//! quadratic in time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::num::{format_q, q_int, q_to_f64, Q};

pub type Valuation = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Expr {
    pub constant: Q,
    /// variable -> coefficient
    pub linear: BTreeMap<String, Q>,
    /// (x, y) with x <= y -> coefficient of x*y
    pub quadratic: BTreeMap<(String, String), Q>,
}

fn pair(a: String, b: String) -> (String, String) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn constant(q: Q) -> Self {
        Expr { constant: q, ..Default::default() }
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(q_int(n))
    }

    pub fn var(name: &str) -> Self {
        let mut linear = BTreeMap::new();
        linear.insert(name.to_string(), q_int(1));
        Expr { constant: q_int(0), linear, quadratic: BTreeMap::new() }
    }

    pub fn term(coeff: Q, name: &str) -> Self {
        let mut e = Expr::var(name);
        e.linear.insert(name.to_string(), coeff);
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        self.linear.retain(|_, c| *c != q_int(0));
        self.quadratic.retain(|_, c| *c != q_int(0));
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, c) in &other.linear {
            *out.linear.entry(v.clone()).or_insert_with(|| q_int(0)) += *c;
        }
        for (k, c) in &other.quadratic {
            *out.quadratic.entry(k.clone()).or_insert_with(|| q_int(0)) += *c;
        }
        out.normalize();
        out
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.scale(q_int(-1)))
    }

    pub fn scale(&self, k: Q) -> Expr {
        let mut out = self.clone();
        out.constant *= k;
        for c in out.linear.values_mut() {
            *c *= k;
        }
        for c in out.quadratic.values_mut() {
            *c *= k;
        }
        out.normalize();
        out
    }

    /// Product of two expressions; fails if the result would exceed degree 2.
    pub fn mul(&self, other: &Expr) -> Result<Expr, DegreeError> {
        let mut out = Expr::constant(self.constant * other.constant);
        for (v, c) in &self.linear {
            *out.linear.entry(v.clone()).or_insert_with(|| q_int(0)) += *c * other.constant;
        }
        for (v, c) in &other.linear {
            *out.linear.entry(v.clone()).or_insert_with(|| q_int(0)) += *c * self.constant;
        }
        for (k, c) in &self.quadratic {
            *out.quadratic.entry(k.clone()).or_insert_with(|| q_int(0)) += *c * other.constant;
        }
        for (k, c) in &other.quadratic {
            *out.quadratic.entry(k.clone()).or_insert_with(|| q_int(0)) += *c * self.constant;
        }
        for (x, cx) in &self.linear {
            for (y, cy) in &other.linear {
                *out.quadratic
                    .entry(pair(x.clone(), y.clone()))
                    .or_insert_with(|| q_int(0)) += *cx * *cy;
            }
        }
        if (!self.quadratic.is_empty() && !other.is_constant_expr())
            || (!other.quadratic.is_empty() && !self.is_constant_expr())
        {
            return Err(DegreeError {
                context: format!("({}) * ({})", self, other),
            });
        }
        out.normalize();
        Ok(out)
    }

    pub fn is_constant_expr(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_constant_expr() {
            Some(self.constant)
        } else {
            None
        }
    }

    pub fn is_affine(&self) -> bool {
        self.quadratic.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.linear.keys().cloned().collect();
        for (x, y) in self.quadratic.keys() {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        out
    }

    pub fn eval(&self, v: &Valuation) -> f64 {
        let mut acc = q_to_f64(self.constant);
        for (name, c) in &self.linear {
            acc += q_to_f64(*c) * v.get(name).copied().unwrap_or(0.0);
        }
        for ((x, y), c) in &self.quadratic {
            acc += q_to_f64(*c)
                * v.get(x).copied().unwrap_or(0.0)
                * v.get(y).copied().unwrap_or(0.0);
        }
        acc
    }

    /// Replaces every occurrence of `name` (including inside products)
    /// with `repl`. Fails if a product slot would exceed degree 2.
    pub fn substitute(&self, name: &str, repl: &Expr) -> Result<Expr, DegreeError> {
        let mut out = Expr::constant(self.constant);
        for (v, c) in &self.linear {
            if v == name {
                out = out.add(&repl.scale(*c));
            } else {
                *out.linear.entry(v.clone()).or_insert_with(|| q_int(0)) += *c;
            }
        }
        for ((x, y), c) in &self.quadratic {
            let xe = if x == name { repl.clone() } else { Expr::var(x) };
            let ye = if y == name { repl.clone() } else { Expr::var(y) };
            out = out.add(&xe.mul(&ye)?.scale(*c));
        }
        out.normalize();
        Ok(out)
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Expr {
        let ren = |v: &String| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let mut out = Expr::constant(self.constant);
        for (v, c) in &self.linear {
            *out.linear.entry(ren(v)).or_insert_with(|| q_int(0)) += *c;
        }
        for ((x, y), c) in &self.quadratic {
            *out.quadratic.entry(pair(ren(x), ren(y))).or_insert_with(|| q_int(0)) += *c;
        }
        out.normalize();
        out
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("expression exceeds degree 2: {context}")]
pub struct DegreeError {
    pub context: String,
}

fn write_coeff(f: &mut fmt::Formatter<'_>, first: &mut bool, c: Q) -> fmt::Result {
    use num_traits::Signed;
    if *first {
        if c.is_negative() {
            write!(f, "-")?;
        }
        *first = false;
    } else if c.is_negative() {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let a = c.abs();
    if a != q_int(1) {
        write!(f, "{}*", format_q(a))?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::Signed;
        let mut first = true;
        for (v, c) in &self.linear {
            write_coeff(f, &mut first, *c)?;
            write!(f, "{v}")?;
        }
        for ((x, y), c) in &self.quadratic {
            write_coeff(f, &mut first, *c)?;
            write!(f, "{x}*{y}")?;
        }
        if self.constant != q_int(0) || first {
            if first {
                write!(f, "{}", format_q(self.constant))?;
            } else if self.constant.is_negative() {
                write!(f, " - {}", format_q(self.constant.abs()))?;
            } else {
                write!(f, " + {}", format_q(self.constant))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn text(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    /// Satisfaction of `value ⋈ 0` with an absolute tolerance band.
    pub fn holds(self, value: f64, tol: f64) -> bool {
        match self {
            Cmp::Lt => value < -tol,
            Cmp::Le => value <= tol,
            Cmp::Eq => value.abs() <= tol,
            Cmp::Ge => value >= -tol,
            Cmp::Gt => value > tol,
        }
    }
}

/// One conjunct `lhs ⋈ 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub lhs: Expr,
    pub op: Cmp,
}

impl Atom {
    pub fn new(lhs: Expr, op: Cmp) -> Self {
        Atom { lhs, op }
    }

    /// `a ⋈ b` normalized to `a - b ⋈ 0`.
    pub fn cmp(a: Expr, op: Cmp, b: Expr) -> Self {
        Atom { lhs: a.sub(&b), op }
    }

    pub fn holds(&self, v: &Valuation, tol: f64) -> bool {
        self.op.holds(self.lhs.eval(v), tol)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs = -self.lhs.constant;
        let mut lhs = self.lhs.clone();
        lhs.constant = q_int(0);
        if lhs.linear.is_empty() && lhs.quadratic.is_empty() {
            write!(f, "0 {} {}", self.op.text(), format_q(rhs))
        } else {
            write!(f, "{} {} {}", lhs, self.op.text(), format_q(rhs))
        }
    }
}

/// Conjunction of atoms; the empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Predicate {
    pub atoms: Vec<Atom>,
}

impl Predicate {
    pub fn top() -> Self {
        Predicate::default()
    }

    pub fn atom(a: Atom) -> Self {
        Predicate { atoms: vec![a] }
    }

    pub fn is_top(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn and(&self, other: &Predicate) -> Predicate {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut p = Predicate { atoms };
        p.canonicalize();
        p
    }

    pub fn canonicalize(&mut self) {
        self.atoms.sort();
        self.atoms.dedup();
    }

    pub fn holds(&self, v: &Valuation, tol: f64) -> bool {
        self.atoms.iter().all(|a| a.holds(v, tol))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            out.extend(a.lhs.vars());
        }
        out
    }

    pub fn is_affine(&self) -> bool {
        self.atoms.iter().all(|a| a.lhs.is_affine())
    }

    pub fn substitute(&self, name: &str, repl: &Expr) -> Result<Predicate, DegreeError> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            atoms.push(Atom { lhs: a.lhs.substitute(name, repl)?, op: a.op });
        }
        let mut p = Predicate { atoms };
        p.canonicalize();
        Ok(p)
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Predicate {
        let mut p = Predicate {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { lhs: a.lhs.rename_vars(map), op: a.op })
                .collect(),
        };
        p.canonicalize();
        p
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Derivative of one variable in one location.
///
/// `constant + Σ c·x (value of piecewise-constant x) + Σ c·ẏ + Σ c·ẏ·z`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct FlowExpr {
    pub constant: Q,
    pub value_terms: BTreeMap<String, Q>,
    pub rate_terms: BTreeMap<String, Q>,
    /// (rate-of, value-of) -> coefficient
    pub rate_value_terms: BTreeMap<(String, String), Q>,
}

impl FlowExpr {
    pub fn zero() -> Self {
        FlowExpr::default()
    }

    pub fn constant(q: Q) -> Self {
        FlowExpr { constant: q, ..Default::default() }
    }

    pub fn value_of(name: &str, coeff: Q) -> Self {
        let mut f = FlowExpr::zero();
        f.value_terms.insert(name.to_string(), coeff);
        f
    }

    pub fn rate_of(name: &str, coeff: Q) -> Self {
        let mut f = FlowExpr::zero();
        f.rate_terms.insert(name.to_string(), coeff);
        f
    }

    pub fn rate_times_value(rate_of: &str, value_of: &str, coeff: Q) -> Self {
        let mut f = FlowExpr::zero();
        f.rate_value_terms
            .insert((rate_of.to_string(), value_of.to_string()), coeff);
        f
    }

    pub fn add(&self, other: &FlowExpr) -> FlowExpr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, c) in &other.value_terms {
            *out.value_terms.entry(v.clone()).or_insert_with(|| q_int(0)) += *c;
        }
        for (v, c) in &other.rate_terms {
            *out.rate_terms.entry(v.clone()).or_insert_with(|| q_int(0)) += *c;
        }
        for (k, c) in &other.rate_value_terms {
            *out.rate_value_terms
                .entry(k.clone())
                .or_insert_with(|| q_int(0)) += *c;
        }
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        self.value_terms.retain(|_, c| *c != q_int(0));
        self.rate_terms.retain(|_, c| *c != q_int(0));
        self.rate_value_terms.retain(|_, c| *c != q_int(0));
    }

    pub fn is_zero(&self) -> bool {
        self.constant == q_int(0)
            && self.value_terms.is_empty()
            && self.rate_terms.is_empty()
            && self.rate_value_terms.is_empty()
    }

    /// Variables whose value is read (not their rate).
    pub fn value_vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.value_terms.keys().cloned().collect();
        for (_, z) in self.rate_value_terms.keys() {
            out.insert(z.clone());
        }
        out
    }

    /// Variables whose rate is referenced.
    pub fn rate_vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.rate_terms.keys().cloned().collect();
        for (y, _) in self.rate_value_terms.keys() {
            out.insert(y.clone());
        }
        out
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> FlowExpr {
        let ren = |v: &String| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let mut out = FlowExpr::constant(self.constant);
        for (v, c) in &self.value_terms {
            *out.value_terms.entry(ren(v)).or_insert_with(|| q_int(0)) += *c;
        }
        for (v, c) in &self.rate_terms {
            *out.rate_terms.entry(ren(v)).or_insert_with(|| q_int(0)) += *c;
        }
        for ((y, z), c) in &self.rate_value_terms {
            *out.rate_value_terms
                .entry((ren(y), ren(z)))
                .or_insert_with(|| q_int(0)) += *c;
        }
        out.normalize();
        out
    }
}

impl fmt::Display for FlowExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::Signed;
        let mut first = true;
        for (v, c) in &self.value_terms {
            write_coeff(f, &mut first, *c)?;
            write!(f, "{v}")?;
        }
        for (v, c) in &self.rate_terms {
            write_coeff(f, &mut first, *c)?;
            write!(f, "{v}'")?;
        }
        for ((y, z), c) in &self.rate_value_terms {
            write_coeff(f, &mut first, *c)?;
            write!(f, "{y}'*{z}")?;
        }
        if self.constant != q_int(0) || first {
            if first {
                write!(f, "{}", format_q(self.constant))?;
            } else if self.constant.is_negative() {
                write!(f, " - {}", format_q(self.constant.abs()))?;
            } else {
                write!(f, " + {}", format_q(self.constant))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::parse_q;

    fn v(pairs: &[(&str, f64)]) -> Valuation {
        pairs.iter().map(|(k, x)| (k.to_string(), *x)).collect()
    }

    #[test]
    fn eval_affine_and_quadratic() {
        let e = Expr::var("x").scale(q_int(2)).add(&Expr::int(3));
        assert_eq!(e.eval(&v(&[("x", 4.0)])), 11.0);
        let q = Expr::var("x").mul(&Expr::var("y")).unwrap();
        assert_eq!(q.eval(&v(&[("x", 3.0), ("y", 5.0)])), 15.0);
    }

    #[test]
    fn degree_cap_enforced() {
        let xy = Expr::var("x").mul(&Expr::var("y")).unwrap();
        assert!(xy.mul(&Expr::var("z")).is_err());
        assert!(xy.mul(&Expr::int(4)).is_ok());
    }

    #[test]
    fn substitution_into_product() {
        // (in * noise) with in := a + 2  =>  a*noise + 2*noise
        let e = Expr::var("in").mul(&Expr::var("noise")).unwrap();
        let repl = Expr::var("a").add(&Expr::int(2));
        let s = e.substitute("in", &repl).unwrap();
        assert_eq!(
            s.eval(&v(&[("a", 1.0), ("noise", 0.5)])),
            1.5
        );
        // substituting a quadratic into a product slot is rejected
        let quad = Expr::var("p").mul(&Expr::var("q")).unwrap();
        assert!(e.substitute("in", &quad).is_err());
    }

    #[test]
    fn atom_display_moves_constant_right() {
        let a = Atom::cmp(Expr::var("temp"), Cmp::Le, Expr::constant(parse_q("20.5").unwrap()));
        assert_eq!(a.to_string(), "temp <= 20.5");
        let b = Atom::cmp(
            Expr::var("x").scale(q_int(-1)),
            Cmp::Lt,
            Expr::var("y").scale(q_int(3)),
        );
        assert_eq!(b.to_string(), "-x - 3*y < 0");
    }

    #[test]
    fn predicate_tolerance() {
        let p = Predicate::atom(Atom::cmp(Expr::var("x"), Cmp::Le, Expr::int(20)));
        assert!(p.holds(&v(&[("x", 20.0)]), 1e-9));
        assert!(p.holds(&v(&[("x", 20.0 + 1e-12)]), 1e-9));
        assert!(!p.holds(&v(&[("x", 20.1)]), 1e-9));
    }

    #[test]
    fn flow_display() {
        let f = FlowExpr::rate_of("in", q_int(1))
            .add(&FlowExpr::rate_times_value("in", "noise", q_int(1)));
        assert_eq!(f.to_string(), "in' + in'*noise");
        assert_eq!(FlowExpr::zero().to_string(), "0");
        assert_eq!(FlowExpr::value_of("rate", q_int(1)).to_string(), "rate");
    }
}
