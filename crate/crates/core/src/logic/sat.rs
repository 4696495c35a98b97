//! Tseitin encoding and a small DPLL solver.
//!
//! Knowledge bases here are tiny (tens of formulas, a handful of atoms), so
//! the solver keeps to plain unit propagation by clause scanning and
//! chronological backtracking. Variables for atoms are allocated first in
//! name order and branched on first.

use std::collections::{BTreeMap, BTreeSet};

use super::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Lit(u32);

impl Lit {
    fn new(var: u32, positive: bool) -> Lit {
        Lit(var * 2 + u32::from(!positive))
    }
    fn var(self) -> usize {
        (self.0 / 2) as usize
    }
    fn positive(self) -> bool {
        self.0 & 1 == 0
    }
    fn neg(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Clause set over atom and auxiliary variables.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    atoms: BTreeMap<String, u32>,
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    falsum: Option<u32>,
}

impl Cnf {
    /// Empty clause set whose atom variables cover `atoms`.
    pub fn with_atoms<I, S>(atoms: I) -> Cnf
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sorted: BTreeSet<String> = atoms.into_iter().map(Into::into).collect();
        let mut cnf = Cnf::default();
        for a in sorted {
            cnf.atoms.insert(a, cnf.num_vars);
            cnf.num_vars += 1;
        }
        cnf
    }

    /// Clause set for the conjunction of `formulas`.
    pub fn from_formulas<'a, I>(formulas: I) -> Cnf
    where
        I: IntoIterator<Item = &'a Formula> + Clone,
    {
        let mut atoms = BTreeSet::new();
        for f in formulas.clone() {
            f.collect_atoms(&mut atoms);
        }
        let mut cnf = Cnf::with_atoms(atoms);
        for f in formulas {
            cnf.assert(f);
        }
        cnf
    }

    fn fresh(&mut self) -> u32 {
        self.num_vars += 1;
        self.num_vars - 1
    }

    fn atom_var(&mut self, name: &str) -> u32 {
        if let Some(&v) = self.atoms.get(name) {
            return v;
        }
        let v = self.fresh();
        self.atoms.insert(name.to_string(), v);
        v
    }

    /// Adds `f` as a constraint.
    pub fn assert(&mut self, f: &Formula) {
        match f {
            Formula::And(cs) => cs.iter().for_each(|c| self.assert(c)),
            Formula::Or(cs) => {
                let clause: Vec<Lit> = cs.iter().map(|c| self.encode(c)).collect();
                self.clauses.push(clause);
            }
            _ => {
                let l = self.encode(f);
                self.clauses.push(vec![l]);
            }
        }
    }

    /// Adds the negation of `f` as a constraint.
    pub fn assert_not(&mut self, f: &Formula) {
        let l = self.encode(f);
        self.clauses.push(vec![l.neg()]);
    }

    fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::Atom(a) => Lit::new(self.atom_var(a), true),
            Formula::False => {
                let v = match self.falsum {
                    Some(v) => v,
                    None => {
                        let v = self.fresh();
                        self.falsum = Some(v);
                        self.clauses.push(vec![Lit::new(v, false)]);
                        v
                    }
                };
                Lit::new(v, true)
            }
            Formula::Not(g) => self.encode(g).neg(),
            Formula::And(cs) | Formula::Or(cs) => {
                let conj = matches!(f, Formula::And(_));
                let lits: Vec<Lit> = cs.iter().map(|c| self.encode(c)).collect();
                let v = Lit::new(self.fresh(), true);
                // Encode v <-> AND(lits); the disjunction case is the dual.
                let (v, lits): (Lit, Vec<Lit>) =
                    if conj { (v, lits) } else { (v.neg(), lits.into_iter().map(Lit::neg).collect()) };
                let mut big = vec![v];
                for &l in &lits {
                    self.clauses.push(vec![v.neg(), l]);
                    big.push(l.neg());
                }
                self.clauses.push(big);
                if conj {
                    v
                } else {
                    v.neg()
                }
            }
            Formula::Imp(a, b) => {
                let a = self.encode(a);
                let b = self.encode(b);
                let v = Lit::new(self.fresh(), true);
                self.clauses.push(vec![v.neg(), a.neg(), b]);
                self.clauses.push(vec![v, a]);
                self.clauses.push(vec![v, b.neg()]);
                v
            }
            Formula::Iff(a, b) => {
                let a = self.encode(a);
                let b = self.encode(b);
                let v = Lit::new(self.fresh(), true);
                self.clauses.push(vec![v.neg(), a.neg(), b]);
                self.clauses.push(vec![v.neg(), a, b.neg()]);
                self.clauses.push(vec![v, a, b]);
                self.clauses.push(vec![v, a.neg(), b.neg()]);
                v
            }
        }
    }

    /// Satisfiability of the clause set.
    pub fn solve(&self) -> bool {
        self.solve_under(&[])
    }

    /// Satisfiability with the given atom literals forced. Atoms unknown to
    /// the clause set are unconstrained, so assumptions on them are dropped.
    pub fn solve_under(&self, assumptions: &[(&str, bool)]) -> bool {
        let mut assign: Vec<Option<bool>> = vec![None; self.num_vars as usize];
        for &(name, val) in assumptions {
            if let Some(&v) = self.atoms.get(name) {
                match assign[v as usize] {
                    Some(cur) if cur != val => return false,
                    _ => assign[v as usize] = Some(val),
                }
            }
        }
        Dpll { clauses: &self.clauses, assign }.run()
    }
}

struct Dpll<'a> {
    clauses: &'a [Vec<Lit>],
    assign: Vec<Option<bool>>,
}

impl Dpll<'_> {
    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var()].map(|b| b == l.positive())
    }

    /// Unit propagation to fixpoint. Returns false on conflict; assigned
    /// variables are appended to `trail`.
    fn propagate(&mut self, trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for clause in self.clauses {
                let mut unassigned = None;
                let mut n_unassigned = 0;
                let mut sat = false;
                for &l in clause {
                    match self.value(l) {
                        Some(true) => {
                            sat = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            n_unassigned += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if sat {
                    continue;
                }
                match (n_unassigned, unassigned) {
                    (0, _) => return false,
                    (1, Some(l)) => {
                        self.assign[l.var()] = Some(l.positive());
                        trail.push(l.var());
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn run(mut self) -> bool {
        self.search(0)
    }

    fn search(&mut self, from: usize) -> bool {
        let mut trail = Vec::new();
        if !self.propagate(&mut trail) {
            for v in trail {
                self.assign[v] = None;
            }
            return false;
        }
        let next = (from..self.assign.len()).find(|&v| self.assign[v].is_none());
        let Some(v) = next else {
            return true;
        };
        for val in [true, false] {
            self.assign[v] = Some(val);
            if self.search(v + 1) {
                return true;
            }
            self.assign[v] = None;
        }
        for v in trail {
            self.assign[v] = None;
        }
        false
    }
}
