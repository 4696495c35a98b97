//! Independent oracles for the integration tests: truth-table reasoning,
//! brute-force conflicts, diagnoses and hitting sets, and a seeded
//! generator of small random DPIs.

#![allow(dead_code)]

pub mod audit;

use std::collections::BTreeSet;

use kbdebug::dpi::{Dpi, IdSet, Requirement, TestCase};
use kbdebug::logic::{parse_formula, Formula};
use rand::seq::SliceRandom;
use rand::Rng;

pub const TABLE2_TEXT: &str = "\
[O]
A -> E
X | E -> F & Y & Z
F -> B
B -> X
Y -> ~A
B -> Z
Z -> G
[B]
G -> ~A
[N]
~A
[R]
consistency
";

pub const TABLE2_PROBS: &str = "\
A = 0.25
B = 0.01
E = 0.03
F = 0.05
G = 0.4
X = 0.1
Y = 0.6
Z = 0.6
IMP = 0.01
NOT = 0.25
AND = 0.05
OR = 0.05
";

pub fn table2() -> Dpi {
    Dpi::parse(TABLE2_TEXT).unwrap()
}

pub fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

pub fn ids(xs: &[usize]) -> IdSet {
    xs.iter().copied().collect()
}

/// Truth tables over a fixed atom list.
pub struct Tt {
    atoms: Vec<String>,
}

impl Tt {
    pub fn new<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Tt {
        let atoms: BTreeSet<String> = fs.into_iter().flat_map(|f| f.atoms()).collect();
        assert!(atoms.len() <= 16, "truth tables limited to 16 atoms");
        Tt { atoms: atoms.into_iter().collect() }
    }

    pub fn for_dpi(dpi: &Dpi, extra: &[Formula]) -> Tt {
        let all = dpi
            .kb()
            .iter()
            .chain(dpi.background())
            .chain(dpi.positive().iter().flat_map(|t| t.formulas()))
            .chain(dpi.negative().iter().flat_map(|t| t.formulas()))
            .chain(extra);
        Tt::new(all)
    }

    fn rows(&self) -> usize {
        1 << self.atoms.len()
    }

    fn holds(&self, f: &Formula, row: usize) -> bool {
        f.eval(&|a: &str| {
            let i = self.atoms.iter().position(|x| x == a).expect("atom in table");
            row >> i & 1 == 1
        })
    }

    /// Rows satisfying every formula.
    pub fn models(&self, fs: &[&Formula]) -> Vec<usize> {
        (0..self.rows()).filter(|&r| fs.iter().all(|f| self.holds(f, r))).collect()
    }

    pub fn consistent(&self, fs: &[&Formula]) -> bool {
        !self.models(fs).is_empty()
    }

    pub fn entails(&self, fs: &[&Formula], target: &Formula) -> bool {
        self.models(fs).iter().all(|&r| self.holds(target, r))
    }
}

fn kb_of<'a>(dpi: &'a Dpi, subset: &IdSet, extra: &'a [Formula]) -> Vec<&'a Formula> {
    subset
        .iter()
        .map(|&i| dpi.formula(i))
        .chain(extra)
        .chain(dpi.background())
        .chain(dpi.positive().iter().flat_map(|t| t.formulas()))
        .collect()
}

/// Validity of `subset ∪ extra` w.r.t. `dpi` by truth tables.
pub fn tt_valid(dpi: &Dpi, subset: &IdSet, extra: &[Formula]) -> bool {
    let tt = Tt::for_dpi(dpi, extra);
    let kb = kb_of(dpi, subset, extra);
    let models = tt.models(&kb);
    if models.is_empty() && dpi.requirements().contains(&Requirement::Consistency) {
        return false;
    }
    dpi.negative().iter().all(|tn| !models.iter().all(|&r| tn.formulas().iter().all(|g| tt.holds(g, r))))
}

/// `subset ∪ B ∪ U_P ⊨ targets` by truth tables.
pub fn tt_entails(dpi: &Dpi, subset: &IdSet, targets: &[Formula]) -> bool {
    let tt = Tt::for_dpi(dpi, targets);
    let kb = kb_of(dpi, subset, &[]);
    targets.iter().all(|t| tt.entails(&kb, t))
}

pub fn subsets(n: usize) -> impl Iterator<Item = IdSet> {
    (0u32..1 << n).map(move |m| (1..=n).filter(|i| m >> (i - 1) & 1 == 1).collect())
}

fn minimal(sets: Vec<IdSet>) -> BTreeSet<IdSet> {
    sets.iter().filter(|s| !sets.iter().any(|t| t != *s && t.is_subset(s))).cloned().collect()
}

/// All subset-minimal invalid subsets of `O`.
pub fn brute_min_conflicts(dpi: &Dpi) -> BTreeSet<IdSet> {
    minimal(subsets(dpi.len()).filter(|s| !tt_valid(dpi, s, &[])).collect())
}

/// All diagnoses, minimal or not.
pub fn brute_diagnoses(dpi: &Dpi) -> Vec<IdSet> {
    subsets(dpi.len()).filter(|d| tt_valid(dpi, &dpi.complement(d), &[])).collect()
}

pub fn brute_min_diagnoses(dpi: &Dpi) -> BTreeSet<IdSet> {
    minimal(brute_diagnoses(dpi))
}

/// Subset-minimal hitting sets of `family` over ids `1..=n`.
pub fn brute_min_hitting_sets(family: &BTreeSet<IdSet>, n: usize) -> BTreeSet<IdSet> {
    minimal(subsets(n).filter(|h| family.iter().all(|c| !c.is_disjoint(h))).collect())
}

pub const ATOMS: [&str; 6] = ["a", "b", "c", "d", "e", "g"];

pub fn random_formula(rng: &mut impl Rng, atoms: &[&str], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = Formula::atom(*atoms.choose(rng).unwrap());
        return if rng.gen_bool(0.3) { Formula::not(a) } else { a };
    }
    let sub = |rng: &mut _| random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(vec![sub(rng), sub(rng)]),
        2 => Formula::or(vec![sub(rng), sub(rng)]),
        3 => Formula::imp(sub(rng), sub(rng)),
        _ => Formula::iff(sub(rng), sub(rng)),
    }
}

fn random_literal(rng: &mut impl Rng, atoms: &[&str]) -> Formula {
    Formula::literal(atoms.choose(rng).unwrap(), rng.gen_bool(0.5))
}

/// An admissible DPI with at most `max_formulas` KB formulas over at most
/// six atoms whose KB is faulty.
pub fn random_dpi(rng: &mut impl Rng, max_formulas: usize) -> Dpi {
    loop {
        let n_atoms = rng.gen_range(2..=ATOMS.len());
        let atoms = &ATOMS[..n_atoms];
        let n = rng.gen_range(2..=max_formulas);
        let mut kb: Vec<Formula> = Vec::new();
        while kb.len() < n {
            let g = random_formula(rng, atoms, 2);
            if !kb.contains(&g) {
                kb.push(g);
            }
        }
        let background: Vec<Formula> =
            (0..rng.gen_range(0..=1)).map(|_| random_formula(rng, atoms, 1)).filter(|g| !kb.contains(g)).collect();
        let positive: Vec<TestCase> =
            (0..rng.gen_range(0..=1)).map(|_| TestCase::new(vec![random_literal(rng, atoms)]).unwrap()).collect();
        let negative: Vec<TestCase> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let g = if rng.gen_bool(0.6) { random_literal(rng, atoms) } else { random_formula(rng, atoms, 1) };
                TestCase::new(vec![g]).unwrap()
            })
            .collect();
        let mut req = BTreeSet::new();
        if rng.gen_bool(0.7) {
            req.insert(Requirement::Consistency);
        }
        let Ok(dpi) = Dpi::new(kb, background, positive, negative, req) else { continue };
        if tt_valid(&dpi, &IdSet::new(), &[]) && !tt_valid(&dpi, &dpi.all_ids(), &[]) {
            return dpi;
        }
    }
}
