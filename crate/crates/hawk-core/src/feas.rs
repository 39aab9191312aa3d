//! Exact satisfiability of conjunctions of affine atoms over the reals,
//! by Fourier-Motzkin elimination in rational arithmetic.
//!
//! Sized for validation duty: guard sets in this codebase have a handful
//! of atoms over a handful of variables, far below FM's blowup regime.

use std::collections::BTreeSet;

use crate::expr::{Atom, Cmp, Expr, Predicate};
use crate::num::{q_int, Q};

/// `lhs ⋈ 0` with ⋈ in {<, <=}; equalities are split by the caller.
#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, Q)>,
    constant: Q,
    strict: bool,
}

impl Row {
    fn coeff(&self, var: usize) -> Q {
        self.coeffs
            .iter()
            .find(|(v, _)| *v == var)
            .map(|(_, c)| *c)
            .unwrap_or_else(|| q_int(0))
    }

    fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}

fn expr_rows(e: &Expr, vars: &[String], op: Cmp, out: &mut Vec<Row>) {
    debug_assert!(e.is_affine());
    let mk = |sign: Q, strict: bool| {
        let coeffs: Vec<(usize, Q)> = e
            .linear
            .iter()
            .map(|(name, c)| {
                let idx = vars.iter().position(|v| v == name).expect("var indexed");
                (idx, *c * sign)
            })
            .filter(|(_, c)| *c != q_int(0))
            .collect();
        Row { coeffs, constant: e.constant * sign, strict }
    };
    match op {
        Cmp::Lt => out.push(mk(q_int(1), true)),
        Cmp::Le => out.push(mk(q_int(1), false)),
        Cmp::Gt => out.push(mk(q_int(-1), true)),
        Cmp::Ge => out.push(mk(q_int(-1), false)),
        Cmp::Eq => {
            out.push(mk(q_int(1), false));
            out.push(mk(q_int(-1), false));
        }
    }
}

fn eliminate(rows: Vec<Row>, var: usize) -> Vec<Row> {
    let mut lower = Vec::new(); // coeff < 0: gives lower bounds on var
    let mut upper = Vec::new(); // coeff > 0: gives upper bounds on var
    let mut rest = Vec::new();
    for r in rows {
        let c = r.coeff(var);
        if c == q_int(0) {
            rest.push(r);
        } else if c > q_int(0) {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    for lo in &lower {
        for hi in &upper {
            // scale so the var cancels: hi * |lo_c| + lo * hi_c
            let lo_c = -lo.coeff(var);
            let hi_c = hi.coeff(var);
            let mut coeffs: Vec<(usize, Q)> = Vec::new();
            for &(v, c) in hi.coeffs.iter() {
                if v != var {
                    coeffs.push((v, c * lo_c));
                }
            }
            for &(v, c) in lo.coeffs.iter() {
                if v != var {
                    match coeffs.iter_mut().find(|(w, _)| *w == v) {
                        Some((_, acc)) => *acc += c * hi_c,
                        None => coeffs.push((v, c * hi_c)),
                    }
                }
            }
            coeffs.retain(|(_, c)| *c != q_int(0));
            rest.push(Row {
                coeffs,
                constant: hi.constant * lo_c + lo.constant * hi_c,
                strict: lo.strict || hi.strict,
            });
        }
    }
    rest
}

/// Whether the conjunction of atoms has a real solution.
pub fn feasible(atoms: &[Atom]) -> bool {
    let mut vars: BTreeSet<String> = BTreeSet::new();
    for a in atoms {
        vars.extend(a.lhs.vars());
    }
    let vars: Vec<String> = vars.into_iter().collect();
    let mut rows = Vec::new();
    for a in atoms {
        expr_rows(&a.lhs, &vars, a.op, &mut rows);
    }
    for v in 0..vars.len() {
        rows = eliminate(rows, v);
        rows.retain(|r| !r.is_constant() || violated(r).is_some());
        if rows.iter().any(|r| r.is_constant() && violated(r) == Some(true)) {
            return false;
        }
        // drop satisfied constant rows to keep the set small
        rows.retain(|r| !r.is_constant());
    }
    true
}

fn violated(r: &Row) -> Option<bool> {
    if !r.is_constant() {
        return None;
    }
    let sat = if r.strict {
        r.constant < q_int(0)
    } else {
        r.constant <= q_int(0)
    };
    Some(!sat)
}

pub fn predicates_disjoint(a: &Predicate, b: &Predicate) -> bool {
    let mut atoms = a.atoms.clone();
    atoms.extend(b.atoms.iter().cloned());
    !feasible(&atoms)
}

/// Whether `premise` entails the single atom `conclusion`.
pub fn entails(premise: &Predicate, conclusion: &Atom) -> bool {
    let negations: Vec<Atom> = match conclusion.op {
        Cmp::Lt => vec![Atom::new(conclusion.lhs.clone(), Cmp::Ge)],
        Cmp::Le => vec![Atom::new(conclusion.lhs.clone(), Cmp::Gt)],
        Cmp::Ge => vec![Atom::new(conclusion.lhs.clone(), Cmp::Lt)],
        Cmp::Gt => vec![Atom::new(conclusion.lhs.clone(), Cmp::Le)],
        Cmp::Eq => vec![
            Atom::new(conclusion.lhs.clone(), Cmp::Lt),
            Atom::new(conclusion.lhs.clone(), Cmp::Gt),
        ],
    };
    negations.iter().all(|neg| {
        let mut atoms = premise.atoms.clone();
        atoms.push(neg.clone());
        !feasible(&atoms)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::parse_q;

    fn le(v: &str, c: &str) -> Atom {
        Atom::cmp(Expr::var(v), Cmp::Le, Expr::constant(parse_q(c).unwrap()))
    }

    fn ge(v: &str, c: &str) -> Atom {
        Atom::cmp(Expr::var(v), Cmp::Ge, Expr::constant(parse_q(c).unwrap()))
    }

    #[test]
    fn half_lines_overlap() {
        // temp >= 20 and temp >= 19 overlap; temp <= 19 and temp >= 20 do not
        assert!(!predicates_disjoint(
            &Predicate::atom(ge("temp", "20")),
            &Predicate::atom(ge("temp", "19"))
        ));
        assert!(predicates_disjoint(
            &Predicate::atom(le("temp", "19")),
            &Predicate::atom(ge("temp", "20"))
        ));
    }

    #[test]
    fn boundary_sharing_is_overlap_for_closed_atoms() {
        assert!(!predicates_disjoint(
            &Predicate::atom(le("x", "1")),
            &Predicate::atom(ge("x", "1"))
        ));
        // strict on one side separates
        let lt = Atom::cmp(Expr::var("x"), Cmp::Lt, Expr::int(1));
        assert!(predicates_disjoint(
            &Predicate::atom(lt),
            &Predicate::atom(ge("x", "1"))
        ));
    }

    #[test]
    fn equalities_split() {
        let eq0 = Atom::cmp(Expr::var("age"), Cmp::Eq, Expr::int(0));
        let eq1 = Atom::cmp(Expr::var("age"), Cmp::Eq, Expr::int(1));
        assert!(predicates_disjoint(&Predicate::atom(eq0.clone()), &Predicate::atom(eq1)));
        assert!(!predicates_disjoint(&Predicate::atom(eq0.clone()), &Predicate::atom(eq0)));
    }

    #[test]
    fn multivariate_chains() {
        // x <= y, y <= z, z <= x - 1 infeasible
        let a = Atom::cmp(Expr::var("x"), Cmp::Le, Expr::var("y"));
        let b = Atom::cmp(Expr::var("y"), Cmp::Le, Expr::var("z"));
        let c = Atom::cmp(Expr::var("z"), Cmp::Le, Expr::var("x").sub(&Expr::int(1)));
        assert!(!feasible(&[a.clone(), b.clone(), c]));
        let c2 = Atom::cmp(Expr::var("z"), Cmp::Le, Expr::var("x"));
        assert!(feasible(&[a, b, c2]));
    }

    #[test]
    fn entailment() {
        let g = Predicate::atom(le("x", "5")).and(&Predicate::atom(ge("x", "3")));
        assert!(entails(&g, &le("x", "6")));
        assert!(!entails(&g, &le("x", "4")));
        assert!(entails(&g, &ge("x", "3")));
    }
}
