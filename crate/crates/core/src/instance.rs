//! Bounded-occurrence E3LIN2 instances.
//!
//! A clause `(a, b, c, rhs)` asks for `x_a + x_b + x_c ≡ rhs (mod 2)`. With
//! spins `z_v = (-1)^{x_v}` the clause is satisfied exactly when
//! `sign · z_a z_b z_c = +1`, where `sign = (-1)^rhs`. The objective operator
//! drops the constant `m/2`: `C(z) = ½ Σ sign · z_a z_b z_c`.

use std::collections::HashSet;
use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// One parity equation on three distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub rhs: u8,
}

impl Clause {
    pub fn new(a: usize, b: usize, c: usize, rhs: u8) -> Self {
        Clause { a, b, c, rhs }
    }

    /// `+1` for `rhs = 0`, `-1` for `rhs = 1`.
    pub fn sign(&self) -> i32 {
        if self.rhs == 0 {
            1
        } else {
            -1
        }
    }

    pub fn vars(&self) -> [usize; 3] {
        [self.a, self.b, self.c]
    }

    pub fn contains(&self, v: usize) -> bool {
        self.a == v || self.b == v || self.c == v
    }

    /// Bitmask of the three variables in a basis index. Requires `c < 64`.
    pub fn mask(&self) -> u64 {
        (1u64 << self.a) | (1u64 << self.b) | (1u64 << self.c)
    }

    pub fn is_satisfied_by(&self, bits: &[bool]) -> bool {
        let parity = bits[self.a] as u8 ^ bits[self.b] as u8 ^ bits[self.c] as u8;
        parity == self.rhs
    }
}

/// A structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateTriple { first: usize, second: usize },
    UnsortedTriple { clause: usize },
    IndexOutOfRange { clause: usize, index: usize },
    BadRhs { clause: usize, rhs: u8 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateTriple { first, second } => {
                write!(f, "duplicate triple (clauses {first} and {second})")
            }
            Violation::UnsortedTriple { clause } => write!(f, "unsorted triple (clause {clause})"),
            Violation::IndexOutOfRange { clause, index } => {
                write!(f, "index {index} out of range (clause {clause})")
            }
            Violation::BadRhs { clause, rhs } => write!(f, "rhs {rhs} not in {{0,1}} (clause {clause})"),
        }
    }
}

/// Lists every violated structural invariant; empty iff `(n, clauses)` forms a valid instance.
pub fn validate(n: usize, clauses: &[Clause]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (i, cl) in clauses.iter().enumerate() {
        if !(cl.a < cl.b && cl.b < cl.c) {
            out.push(Violation::UnsortedTriple { clause: i });
        }
        for v in cl.vars() {
            if v >= n {
                out.push(Violation::IndexOutOfRange { clause: i, index: v });
            }
        }
        if cl.rhs > 1 {
            out.push(Violation::BadRhs { clause: i, rhs: cl.rhs });
        }
        let mut key = cl.vars();
        key.sort_unstable();
        if let Some(&first) = seen.get(&key) {
            out.push(Violation::DuplicateTriple { first, second: i });
        } else {
            seen.insert(key, i);
        }
    }
    out
}

/// A validated E3LIN2 instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    clauses: Vec<Clause>,
    occurrence: Vec<usize>,
    d_bound: usize,
}

impl Instance {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        let violations = validate(n, &clauses);
        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }
        let mut occurrence = vec![0usize; n];
        for cl in &clauses {
            for v in cl.vars() {
                occurrence[v] += 1;
            }
        }
        let d_bound = occurrence.iter().copied().max().unwrap_or(0).saturating_sub(1);
        Ok(Instance {
            n,
            clauses,
            occurrence,
            d_bound,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn occurrence(&self) -> &[usize] {
        &self.occurrence
    }

    /// Smallest `D` with every variable in at most `D + 1` clauses.
    pub fn d_bound(&self) -> usize {
        self.d_bound
    }

    pub fn triples(&self) -> Vec<[usize; 3]> {
        self.clauses.iter().map(Clause::vars).collect()
    }

    /// Same triples with new right-hand sides.
    pub fn with_rhs(&self, rhs: impl IntoIterator<Item = u8>) -> Result<Self> {
        let clauses: Vec<Clause> = self
            .clauses
            .iter()
            .zip(rhs)
            .map(|(cl, r)| Clause { rhs: r, ..*cl })
            .collect();
        if clauses.len() != self.clauses.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} right-hand sides, got {}",
                self.clauses.len(),
                clauses.len()
            )));
        }
        Instance::new(self.n, clauses)
    }

    /// Returns a copy with one more clause appended.
    pub fn with_clause(&self, clause: Clause) -> Result<Self> {
        let mut clauses = self.clauses.clone();
        clauses.push(clause);
        Instance::new(self.n, clauses)
    }

    pub fn satisfied_count(&self, assignment: &Assignment) -> Result<usize> {
        self.check_len(assignment)?;
        Ok(self
            .clauses
            .iter()
            .filter(|cl| cl.is_satisfied_by(&assignment.bits))
            .count())
    }

    /// `½ Σ sign · z_a z_b z_c`.
    pub fn objective_value(&self, assignment: &Assignment) -> Result<f64> {
        self.check_len(assignment)?;
        let twice: i64 = self
            .clauses
            .iter()
            .map(|cl| {
                let prod = assignment.spin(cl.a) * assignment.spin(cl.b) * assignment.spin(cl.c);
                i64::from(cl.sign() * prod)
            })
            .sum();
        Ok(0.5 * twice as f64)
    }

    /// Satisfied count for the assignment encoded by a basis index (bit `v` is `x_v`).
    pub fn satisfied_count_index(&self, index: u64) -> usize {
        self.clauses
            .iter()
            .filter(|cl| ((index & cl.mask()).count_ones() & 1) as u8 == cl.rhs)
            .count()
    }

    /// Same triples with each right-hand side redrawn uniformly and independently.
    pub fn resample_signs(&self, seed: u64) -> Instance {
        let mut rng = seeded(seed);
        let clauses = self
            .clauses
            .iter()
            .map(|cl| Clause {
                rhs: rng.random_bool(0.5) as u8,
                ..*cl
            })
            .collect();
        Instance {
            n: self.n,
            clauses,
            occurrence: self.occurrence.clone(),
            d_bound: self.d_bound,
        }
    }

    fn check_len(&self, assignment: &Assignment) -> Result<()> {
        if assignment.len() != self.n {
            return Err(Error::AssignmentLength {
                expected: self.n,
                got: assignment.len(),
            });
        }
        Ok(())
    }
}

/// A classical bit string `x ∈ {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Assignment { bits: vec![false; n] }
    }

    /// Little-endian decoding: bit `v` of `index` becomes `x_v`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Assignment {
            bits: (0..n).map(|v| (index >> v) & 1 == 1).collect(),
        }
    }

    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (v, &b)| acc | ((b as u64) << v))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn spin(&self, v: usize) -> i32 {
        if self.bits[v] {
            -1
        } else {
            1
        }
    }

    pub fn flipped(&self) -> Self {
        Assignment {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl fmt::Display for Assignment {
    /// Bits in variable order, `x_0` first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    UniformRandom,
    AllZeroRhs,
}

/// Random instance with `m` distinct triples and every variable in at most `d_bound + 1` clauses.
///
/// Triples are drawn by rejection sampling among variables with spare
/// capacity; a dead end restarts the draw. Gives up after `1000 · m`
/// attempts.
pub fn generate_random(n: usize, m: usize, d_bound: usize, sign_mode: SignMode, seed: u64) -> Result<Instance> {
    let cap = d_bound + 1;
    if 3 * m > n * cap {
        return Err(Error::Infeasible { n, m, d_bound });
    }
    let distinct_triples = if n >= 3 {
        (n as u128) * (n as u128 - 1) * (n as u128 - 2) / 6
    } else {
        0
    };
    if (m as u128) > distinct_triples {
        return Err(Error::InvalidParameter(format!(
            "{m} distinct triples requested but only {distinct_triples} exist on {n} variables"
        )));
    }

    let mut rng = seeded(seed);
    let budget = 1000 * m.max(1);
    let mut attempts = 0usize;
    let mut load = vec![0usize; n];
    let mut used: HashSet<[usize; 3]> = HashSet::with_capacity(m);
    let mut triples: Vec<[usize; 3]> = Vec::with_capacity(m);

    while triples.len() < m {
        attempts += 1;
        if attempts > budget {
            return Err(Error::RetryBudgetExhausted { attempts: budget });
        }
        let pool: Vec<usize> = (0..n).filter(|&v| load[v] < cap).collect();
        if pool.len() < 3 {
            load.iter_mut().for_each(|l| *l = 0);
            used.clear();
            triples.clear();
            continue;
        }
        let picked = sample(&mut rng, pool.len(), 3);
        let mut t = [pool[picked.index(0)], pool[picked.index(1)], pool[picked.index(2)]];
        t.sort_unstable();
        if !used.insert(t) {
            continue;
        }
        for v in t {
            load[v] += 1;
        }
        triples.push(t);
    }

    let clauses = triples
        .into_iter()
        .map(|[a, b, c]| {
            let rhs = match sign_mode {
                SignMode::UniformRandom => rng.random_bool(0.5) as u8,
                SignMode::AllZeroRhs => 0,
            };
            Clause::new(a, b, c, rhs)
        })
        .collect();
    Instance::new(n, clauses)
}

const HEADER: &str = "e3lin2";

/// Reads the text format: header `e3lin2 <n> <m>`, then `m` lines `<a> <b> <c> <rhs>`.
pub fn parse(text: &str) -> Result<Instance> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 3 || tokens[0] != HEADER {
        return Err(err(
            1,
            format!("malformed header {header:?}, expected \"{HEADER} <n> <m>\""),
        ));
    }
    let n: usize = tokens[1]
        .parse()
        .map_err(|_| err(1, format!("bad variable count {:?}", tokens[1])))?;
    let m: usize = tokens[2]
        .parse()
        .map_err(|_| err(1, format!("bad clause count {:?}", tokens[2])))?;

    let mut clauses = Vec::with_capacity(m);
    let mut seen = std::collections::HashMap::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if clauses.len() == m {
            return Err(err(line_no, format!("more than {m} clause lines")));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(line_no, format!("expected 4 fields, found {}", fields.len())));
        }
        let mut vals = [0usize; 4];
        for (slot, tok) in vals.iter_mut().zip(&fields) {
            *slot = tok.parse().map_err(|_| err(line_no, format!("bad token {tok:?}")))?;
        }
        let [a, b, c, rhs] = vals;
        if !(a < b && b < c) {
            return Err(err(line_no, "unsorted triple".into()));
        }
        if c >= n {
            return Err(err(line_no, format!("index {c} >= n = {n}")));
        }
        if rhs > 1 {
            return Err(err(line_no, format!("rhs {rhs} not in {{0,1}}")));
        }
        if let Some(prev) = seen.insert([a, b, c], line_no) {
            return Err(err(line_no, format!("duplicate triple (first on line {prev})")));
        }
        clauses.push(Clause::new(a, b, c, rhs as u8));
    }
    if clauses.len() != m {
        return Err(err(
            text.lines().count().max(1),
            format!("expected {m} clause lines, found {}", clauses.len()),
        ));
    }
    Instance::new(n, clauses)
}

/// Writes the text format read by [`parse`], clauses in stored order.
pub fn serialize(instance: &Instance) -> String {
    use std::fmt::Write;
    let mut out = format!("{HEADER} {} {}\n", instance.n(), instance.m());
    for cl in instance.clauses() {
        writeln!(out, "{} {} {} {}", cl.a, cl.b, cl.c, cl.rhs).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(rhs: u8) -> Instance {
        Instance::new(3, vec![Clause::new(0, 1, 2, rhs)]).unwrap()
    }

    #[test]
    fn validate_reports_duplicates() {
        let v = validate(3, &[Clause::new(0, 1, 2, 0), Clause::new(0, 1, 2, 1)]);
        assert_eq!(v, vec![Violation::DuplicateTriple { first: 0, second: 1 }]);
    }

    #[test]
    fn validate_reports_unsorted() {
        let v = validate(3, &[Clause::new(2, 1, 0, 0)]);
        assert_eq!(v, vec![Violation::UnsortedTriple { clause: 0 }]);
    }

    #[test]
    fn validate_accepts_well_formed() {
        let cls = [
            Clause::new(0, 1, 2, 0),
            Clause::new(1, 2, 3, 1),
            Clause::new(2, 3, 4, 0),
        ];
        assert!(validate(5, &cls).is_empty());
        let v = validate(4, &cls);
        assert_eq!(v, vec![Violation::IndexOutOfRange { clause: 2, index: 4 }]);
    }

    #[test]
    fn derived_occurrence_bound() {
        let inst = Instance::new(
            5,
            vec![
                Clause::new(0, 1, 2, 0),
                Clause::new(0, 3, 4, 1),
                Clause::new(0, 1, 3, 0),
            ],
        )
        .unwrap();
        assert_eq!(inst.occurrence(), &[3, 2, 1, 2, 1]);
        assert_eq!(inst.d_bound(), 2);
        assert_eq!(Instance::new(4, vec![]).unwrap().d_bound(), 0);
    }

    #[test]
    fn single_clause_counts() {
        let zero = Assignment::zeros(3);
        assert_eq!(single(0).satisfied_count(&zero).unwrap(), 1);
        assert_eq!(single(1).satisfied_count(&zero).unwrap(), 0);
        assert_eq!(single(0).objective_value(&zero).unwrap(), 0.5);
        assert_eq!(single(1).objective_value(&zero).unwrap(), -0.5);
        let empty = Instance::new(4, vec![]).unwrap();
        assert_eq!(empty.objective_value(&Assignment::zeros(4)).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            single(0).satisfied_count(&Assignment::zeros(2)),
            Err(Error::AssignmentLength { expected: 3, got: 2 })
        ));
        assert!(single(0).objective_value(&Assignment::zeros(4)).is_err());
    }

    #[test]
    fn index_encoding_is_little_endian() {
        let a = Assignment::from_index(0b101, 3);
        assert_eq!(a.bits(), &[true, false, true]);
        assert_eq!(a.to_index(), 5);
        assert_eq!(a.to_string(), "101");
    }

    #[test]
    fn generate_small_all_zero() {
        let inst = generate_random(6, 2, 1, SignMode::AllZeroRhs, 11).unwrap();
        assert_eq!(inst.m(), 2);
        assert!(inst.clauses().iter().all(|c| c.rhs == 0));
        assert!(inst.occurrence().iter().all(|&o| o <= 2));
    }

    #[test]
    fn generate_infeasible() {
        assert!(matches!(
            generate_random(4, 5, 0, SignMode::UniformRandom, 0),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn generate_is_deterministic() {
        let a = generate_random(30, 25, 3, SignMode::UniformRandom, 42).unwrap();
        let b = generate_random(30, 25, 3, SignMode::UniformRandom, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_random(30, 25, 3, SignMode::UniformRandom, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn resample_keeps_triples() {
        let inst = generate_random(20, 15, 2, SignMode::AllZeroRhs, 1).unwrap();
        let r = inst.resample_signs(9);
        assert_eq!(inst.triples(), r.triples());
        assert_eq!(r, inst.resample_signs(9));
        let empty = Instance::new(3, vec![]).unwrap();
        assert_eq!(empty.resample_signs(5), empty);
    }

    #[test]
    fn resample_single_clause_is_fair() {
        let inst = single(0);
        let ones = (0..10_000u64)
            .filter(|&s| inst.resample_signs(s).clauses()[0].rhs == 1)
            .count();
        let frac = ones as f64 / 10_000.0;
        // 4σ for Binomial(10000, 1/2) is 0.02
        assert!((0.47..=0.53).contains(&frac), "fraction {frac}");
    }

    #[test]
    fn parse_examples() {
        let inst = parse("e3lin2 3 1\n0 1 2 0\n").unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.clauses(), &[Clause::new(0, 1, 2, 0)]);

        let e = parse("e3lin2 3 1\n2 1 0 0\n").unwrap_err();
        assert_eq!(e.to_string(), "parse error, line 2: unsorted triple");
    }

    #[test]
    fn parse_errors_carry_lines() {
        let line_of = |text: &str| match parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("e3lin 3 1\n0 1 2 0\n"), 1);
        assert_eq!(line_of("e3lin2 3 x\n"), 1);
        assert_eq!(line_of("e3lin2 4 2\n0 1 2 0\n0 1 z 1\n"), 3);
        assert_eq!(line_of("e3lin2 4 2\n0 1 2 0\n0 1 2 1\n"), 3);
        assert_eq!(line_of("e3lin2 3 1\n0 1 3 0\n"), 2);
        assert_eq!(line_of("e3lin2 3 1\n0 1 2 2\n"), 2);
        assert_eq!(line_of("e3lin2 3 1\n0 1 2\n"), 2);
    }

    #[test]
    fn parse_rejects_wrong_clause_count() {
        assert!(parse("e3lin2 4 2\n0 1 2 0\n").is_err());
        assert!(parse("e3lin2 4 1\n0 1 2 0\n1 2 3 0\n").is_err());
    }

    #[test]
    fn serialize_is_exact() {
        let inst = Instance::new(4, vec![Clause::new(0, 1, 2, 1), Clause::new(1, 2, 3, 0)]).unwrap();
        assert_eq!(serialize(&inst), "e3lin2 4 2\n0 1 2 1\n1 2 3 0\n");
    }

    #[test]
    fn fifty_clause_round_trip() {
        let inst = generate_random(60, 50, 3, SignMode::UniformRandom, 5).unwrap();
        assert_eq!(parse(&serialize(&inst)).unwrap(), inst);
    }

    fn arb_instance() -> impl Strategy<Value = (Instance, Vec<bool>)> {
        (3usize..14, 0usize..20, 0usize..4, any::<u64>()).prop_filter_map("infeasible", |(n, m, d, seed)| {
            let inst = generate_random(n, m, d, SignMode::UniformRandom, seed).ok()?;
            let bits = (0..n).map(|v| (seed >> (v % 64)) & 1 == 1).collect();
            Some((inst, bits))
        })
    }

    proptest! {
        #[test]
        fn satisfied_is_half_m_plus_objective((inst, bits) in arb_instance()) {
            let a = Assignment::new(bits);
            let sat = inst.satisfied_count(&a).unwrap() as f64;
            let obj = inst.objective_value(&a).unwrap();
            prop_assert_eq!(sat, inst.m() as f64 / 2.0 + obj);
            prop_assert_eq!(inst.satisfied_count_index(a.to_index()), sat as usize);
        }

        #[test]
        fn global_flip_negates_objective((inst, bits) in arb_instance()) {
            let a = Assignment::new(bits);
            prop_assert_eq!(
                inst.objective_value(&a.flipped()).unwrap(),
                -inst.objective_value(&a).unwrap()
            );
        }

        #[test]
        fn generated_respects_bound(n in 3usize..40, m in 0usize..30, d in 0usize..5, seed: u64) {
            if let Ok(inst) = generate_random(n, m, d, SignMode::UniformRandom, seed) {
                prop_assert_eq!(inst.m(), m);
                prop_assert!(inst.d_bound() <= d);
                prop_assert!(validate(inst.n(), inst.clauses()).is_empty());
            }
        }

        #[test]
        fn parse_inverts_serialize((inst, _) in arb_instance()) {
            prop_assert_eq!(parse(&serialize(&inst)).unwrap(), inst);
        }
    }
}
