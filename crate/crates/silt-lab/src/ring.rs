//! Multigraded monomial quotient rings with monomial localization.
//!
//! A ring is `k[x_1..x_n][S^{-1}] / (m_1, ..., m_r)` where the `m_j` are
//! monomials and `S` is a set of inverted variables. Every multigraded
//! piece of such a ring is zero- or one-dimensional with a monomial basis,
//! which keeps all downstream homology computations exact and finite.

use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Coefficient field: exact rationals or a prime field.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Field {
    Q,
    Fp(u32),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => write!(f, "Q"),
            Field::Fp(p) => write!(f, "F{p}"),
        }
    }
}

/// A set of variable indices, stored as a bitmask (at most 64 variables).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct VarSet(pub u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn singleton(i: usize) -> VarSet {
        VarSet(1 << i)
    }

    pub fn full(n: usize) -> VarSet {
        if n == 0 {
            VarSet(0)
        } else {
            VarSet(u64::MAX >> (64 - n))
        }
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn insert(self, i: usize) -> VarSet {
        VarSet(self.0 | (1 << i))
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersect(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn minus(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn non_empty(self) -> bool {
        self.0 != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

/// Exponent vector of a monomial in the ambient polynomial variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn variable(n: usize, i: usize) -> Monomial {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn one(n: usize) -> Monomial {
        Monomial(vec![0; n])
    }

    pub fn support(&self) -> VarSet {
        let mut s = VarSet::EMPTY;
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                s = s.insert(i);
            }
        }
        s
    }

    pub fn is_variable(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.0.iter().enumerate() {
            match (e, found) {
                (0, _) => {}
                (1, None) => found = Some(i),
                _ => return None,
            }
        }
        found
    }

    pub fn degree(&self) -> Deg {
        self.0.iter().map(|&e| e as i64).collect()
    }

    /// `self` divides `x^u` relative to the inverted set `t`
    /// (only non-inverted coordinates constrain divisibility).
    pub fn divides_mod(&self, u: &[i64], t: VarSet) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, &e)| t.contains(i) || (e as i64) <= u[i])
    }

    /// Drops the part supported on `t` (the inverted variables act as units).
    pub fn strip(&self, t: VarSet) -> Monomial {
        Monomial(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &e)| if t.contains(i) { 0 } else { e })
                .collect(),
        )
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

/// A multidegree in `Z^n`.
pub type Deg = Vec<i64>;

pub fn deg_add(a: &[i64], b: &[i64]) -> Deg {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn deg_sub(a: &[i64], b: &[i64]) -> Deg {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("at most 64 variables are supported, got {0}")]
    TooManyVariables(usize),
    #[error("relation index {0} out of range")]
    BadRelation(usize),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// `k[x_1..x_n][S^{-1}] / (monomial relations)`.
///
/// Relations are kept reduced (no relation divides another) and never
/// mention inverted variables; localization strips inverted variables from
/// relations since they become units. A relation reducing to `1` makes the
/// ring zero, which is kept representable.
#[derive(Clone, PartialEq, Eq)]
pub struct MonomialRing {
    field: Field,
    vars: Vec<String>,
    relations: Vec<Monomial>,
    inverted: VarSet,
    is_zero: bool,
}

impl fmt::Debug for MonomialRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl MonomialRing {
    pub fn polynomial(field: Field, vars: &[&str]) -> MonomialRing {
        Self::new(field, vars, &[], &[]).expect("polynomial ring is valid")
    }

    /// `relations` are given as sparse exponent lists `(var, exp)`.
    pub fn new(
        field: Field,
        vars: &[&str],
        relations: &[&[(usize, u32)]],
        inverted: &[usize],
    ) -> Result<MonomialRing, RingError> {
        let n = vars.len();
        if n > 64 {
            return Err(RingError::TooManyVariables(n));
        }
        let mut inv = VarSet::EMPTY;
        for &i in inverted {
            if i >= n {
                return Err(RingError::BadRelation(i));
            }
            inv = inv.insert(i);
        }
        let mut rels = Vec::new();
        for r in relations {
            let mut e = vec![0u32; n];
            for &(i, x) in *r {
                if i >= n {
                    return Err(RingError::BadRelation(i));
                }
                e[i] += x;
            }
            rels.push(Monomial(e));
        }
        Ok(Self::assemble(
            field,
            vars.iter().map(|s| s.to_string()).collect(),
            rels,
            inv,
        ))
    }

    fn assemble(
        field: Field,
        vars: Vec<String>,
        relations: Vec<Monomial>,
        inverted: VarSet,
    ) -> MonomialRing {
        // strip inverted variables, then reduce
        let stripped: Vec<Monomial> = relations.iter().map(|m| m.strip(inverted)).collect();
        let is_zero = stripped.iter().any(|m| m.is_one());
        let mut reduced: Vec<Monomial> = Vec::new();
        if is_zero {
            reduced.push(Monomial::one(vars.len()));
        } else {
            let mut sorted = stripped;
            sorted.sort();
            sorted.dedup();
            for m in &sorted {
                if !sorted
                    .iter()
                    .any(|d| d != m && d.divides_mod(&m.degree(), VarSet::EMPTY))
                {
                    reduced.push(m.clone());
                }
            }
        }
        MonomialRing {
            field,
            vars,
            relations: reduced,
            inverted,
            is_zero,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_name(&self, i: usize) -> &str {
        &self.vars[i]
    }

    pub fn var_index(&self, name: &str) -> Result<usize, RingError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| RingError::UnknownVariable(name.to_string()))
    }

    pub fn relations(&self) -> &[Monomial] {
        &self.relations
    }

    pub fn inverted(&self) -> VarSet {
        self.inverted
    }

    pub fn is_zero_ring(&self) -> bool {
        self.is_zero
    }

    /// Further monomial localization: inverts the variables in `extra`.
    pub fn localize(&self, extra: VarSet) -> MonomialRing {
        MonomialRing::assemble(
            self.field,
            self.vars.clone(),
            self.relations.clone(),
            self.inverted.union(extra),
        )
    }

    /// Display name of the monomial prime with variable set `s`,
    /// e.g. `(x,y)`; the empty set prints as `(0)`.
    pub fn prime_name(&self, s: VarSet) -> String {
        if s.is_empty() {
            "(0)".to_string()
        } else {
            let names: Vec<&str> = s.iter().map(|i| self.vars[i].as_str()).collect();
            format!("({})", names.join(","))
        }
    }

    pub fn monomial_name(&self, m: &Monomial) -> String {
        if m.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.vars[i].clone()),
                _ => parts.push(format!("{}^{}", self.vars[i], e)),
            }
        }
        parts.join("*")
    }

    pub fn describe(&self) -> String {
        let mut s = format!("poly({}; {})", self.field, self.vars.join(","));
        if !self.relations.is_empty() && !self.is_zero {
            let rels: Vec<String> = self
                .relations
                .iter()
                .map(|m| self.monomial_name(m))
                .collect();
            s.push_str(&format!(" / ({})", rels.join(", ")));
        }
        if self.is_zero {
            s.push_str(" / (1) [zero ring]");
        }
        if self.inverted.non_empty() {
            let inv: Vec<&str> = self.inverted.iter().map(|i| self.vars[i].as_str()).collect();
            s.push_str(&format!(" [{} inverted]", inv.join(",")));
        }
        s
    }
}

pub type RingRef = Arc<MonomialRing>;
