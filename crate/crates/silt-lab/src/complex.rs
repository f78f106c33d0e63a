//! Finite cochain complexes of degreewise-computable multigraded modules.
//!
//! Components are formal direct sums of *atoms*: shifted copies of further
//! monomial localizations (and monomial quotients) of the ambient ring.
//! Differentials are degree-0 maps whose entries are `coeff · monomial`
//! multiplications, so every multigraded piece is a small exact matrix and
//! `d∘d = 0` can be checked degreewise.
//!
//! Homology is supported, up to recorded ray isomorphisms, on a finite
//! multidegree box computed from the atoms' generator shifts, relation
//! exponents, and inversion pattern; queries outside the box are answered
//! by clamping along the certified rays.

use crate::extint::ExtInt;
use crate::linalg::{quotient_representatives, rat, FieldOps, Mat, Rat};
use crate::ring::{deg_add, deg_sub, Deg, Monomial, RingRef, VarSet};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("Čech generators must be single variables, got `{0}`")]
    NonVariableGenerator(String),
    #[error("hom source must have free components; atom `{0}` is not free")]
    UnsupportedComponent(String),
    #[error("no support certificate for this complex")]
    NoCertificate,
    #[error("complexes live over different rings")]
    RingMismatch,
}

/// One summand `carrier(−shift)` of a component, where the carrier is the
/// ambient ring with extra inverted variables and extra monomial relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub shift: Deg,
    pub inverted: VarSet,
    pub extra_rels: Arc<Vec<Monomial>>,
    pub label: String,
}

impl Atom {
    fn free(shift: Deg, label: String) -> Atom {
        Atom {
            shift,
            inverted: VarSet::EMPTY,
            extra_rels: Arc::new(Vec::new()),
            label,
        }
    }

    fn is_free(&self) -> bool {
        self.inverted.is_empty() && self.extra_rels.is_empty()
    }
}

/// A formal finite direct sum of atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Module {
    pub atoms: Vec<Atom>,
}

/// One entry of a differential: the map `atom[from] → atom[to]` given by
/// multiplication with `coeff · x^mono`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapEntry {
    pub to: usize,
    pub from: usize,
    pub coeff: i64,
    pub mono: Monomial,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonoMap {
    pub entries: Vec<MapEntry>,
}

/// A finite cochain complex supported in degrees `[lo, lo + components - 1]`.
#[derive(Clone, Debug)]
pub struct Complex {
    ring: RingRef,
    lo: i64,
    components: Vec<Module>,
    diffs: Vec<MonoMap>,
    certified: bool,
}

/// Per-coordinate behavior of pieces outside the support box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayCert {
    /// All pieces on that side of the box vanish.
    Vanishes,
    /// Multiplication by the coordinate variable is an isomorphism of
    /// pieces; the boundary piece represents the whole ray.
    Stable,
}

/// A finite box such that every piece outside is either zero or isomorphic
/// to a boundary piece of the box along the recorded rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportBox {
    pub lo: Deg,
    pub hi: Deg,
    pub below: Vec<RayCert>,
    pub above: Vec<RayCert>,
}

impl SupportBox {
    pub fn clamp(&self, d: &[i64]) -> Deg {
        d.iter()
            .enumerate()
            .map(|(i, &x)| x.clamp(self.lo[i], self.hi[i]))
            .collect()
    }

    pub fn points(&self) -> Vec<Deg> {
        let mut out = vec![Vec::new()];
        for i in 0..self.lo.len() {
            let mut next = Vec::new();
            for p in &out {
                for v in self.lo[i]..=self.hi[i] {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }
}

/// Dimension and representative basis of one homology piece.
#[derive(Clone, Debug)]
pub struct HomologyPiece {
    pub dim: usize,
    /// Representatives as coefficient vectors over the labeled piece basis.
    pub basis: Vec<Vec<(String, Rat)>>,
    /// The same representatives as raw vectors over the piece basis.
    pub raw: Vec<Vec<Rat>>,
}

impl Complex {
    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.components.len() as i64 - 1
    }

    pub fn is_empty_complex(&self) -> bool {
        self.components.iter().all(|m| m.atoms.is_empty())
    }

    pub fn component(&self, i: i64) -> Option<&Module> {
        if i < self.lo {
            return None;
        }
        self.components.get((i - self.lo) as usize)
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Assembles a complex from raw parts. The result carries no support
    /// certificate: box-based queries will refuse it.
    pub fn from_parts(ring: RingRef, lo: i64, components: Vec<Module>, diffs: Vec<MonoMap>) -> Complex {
        Complex {
            ring,
            lo,
            components,
            diffs,
            certified: false,
        }
    }

    /// The ring itself, concentrated in degree 0.
    pub fn unit(ring: RingRef) -> Complex {
        let n = ring.num_vars();
        Complex {
            ring,
            lo: 0,
            components: vec![Module {
                atoms: vec![Atom::free(vec![0; n], "1".to_string())],
            }],
            diffs: vec![],
            certified: true,
        }
    }

    /// The residue field of the monomial prime with variable set `q`:
    /// kill the variables in `q`, invert the rest.
    pub fn residue_field(ring: RingRef, q: VarSet) -> Complex {
        let n = ring.num_vars();
        let rels: Vec<Monomial> = q.iter().map(|i| Monomial::variable(n, i)).collect();
        let name = ring.prime_name(q);
        Complex {
            components: vec![Module {
                atoms: vec![Atom {
                    shift: vec![0; n],
                    inverted: VarSet::full(n).minus(q),
                    extra_rels: Arc::new(rels),
                    label: format!("k{name}"),
                }],
            }],
            ring,
            lo: 0,
            diffs: vec![],
            certified: true,
        }
    }

    /// Koszul complex `K(gens)` in degrees `[-t, 0]`, with the tensor-order
    /// sign convention fixed by the generator list.
    pub fn koszul(ring: RingRef, gens: &[Monomial]) -> Complex {
        let n = ring.num_vars();
        let t = gens.len();
        let subsets_of = |k: usize| -> Vec<u64> {
            (0u64..(1 << t)).filter(|s| s.count_ones() as usize == k).collect()
        };
        let label = |s: u64| -> String {
            if s == 0 {
                "1".to_string()
            } else {
                let parts: Vec<String> = (0..t)
                    .filter(|j| s & (1 << j) != 0)
                    .map(|j| ring.monomial_name(&gens[j]))
                    .collect();
                format!("e[{}]", parts.join(","))
            }
        };
        let shift_of = |s: u64| -> Deg {
            let mut d = vec![0i64; n];
            for (j, g) in gens.iter().enumerate() {
                if s & (1 << j) != 0 {
                    d = deg_add(&d, &g.degree());
                }
            }
            d
        };
        let mut components = Vec::new();
        for k in (0..=t).rev() {
            let atoms = subsets_of(k)
                .into_iter()
                .map(|s| Atom::free(shift_of(s), label(s)))
                .collect();
            components.push(Module { atoms });
        }
        let mut diffs = Vec::new();
        for k in (1..=t).rev() {
            let src = subsets_of(k);
            let dst = subsets_of(k - 1);
            let mut entries = Vec::new();
            for (from, &s) in src.iter().enumerate() {
                for j in 0..t {
                    if s & (1 << j) == 0 {
                        continue;
                    }
                    let s2 = s & !(1 << j);
                    let to = dst.iter().position(|&x| x == s2).unwrap();
                    let sign = if (s & ((1 << j) - 1)).count_ones() % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    entries.push(MapEntry {
                        to,
                        from,
                        coeff: sign,
                        mono: gens[j].clone(),
                    });
                }
            }
            diffs.push(MonoMap { entries });
        }
        Complex {
            ring,
            lo: -(t as i64),
            components,
            diffs,
            certified: true,
        }
    }

    /// Extended Čech complex on variables, in degrees `[0, t]`.
    pub fn cech(ring: RingRef, gens: &[Monomial]) -> Result<Complex, ComplexError> {
        let mut vars = Vec::new();
        for g in gens {
            let v = g
                .is_variable()
                .ok_or_else(|| ComplexError::NonVariableGenerator(ring.monomial_name(g)))?;
            vars.push(v);
        }
        let n = ring.num_vars();
        let t = vars.len();
        let subsets_of = |k: usize| -> Vec<u64> {
            (0u64..(1 << t)).filter(|s| s.count_ones() as usize == k).collect()
        };
        let inv_of = |s: u64| -> VarSet {
            let mut inv = VarSet::EMPTY;
            for (j, &v) in vars.iter().enumerate() {
                if s & (1 << j) != 0 {
                    inv = inv.insert(v);
                }
            }
            inv
        };
        let label = |s: u64| -> String {
            if s == 0 {
                "R".to_string()
            } else {
                let parts: Vec<&str> = (0..t)
                    .filter(|j| s & (1 << j) != 0)
                    .map(|j| ring.var_name(vars[j]))
                    .collect();
                format!("R[{}^-1]", parts.join(","))
            }
        };
        let mut components = Vec::new();
        for k in 0..=t {
            let atoms = subsets_of(k)
                .into_iter()
                .map(|s| Atom {
                    shift: vec![0; n],
                    inverted: inv_of(s),
                    extra_rels: Arc::new(Vec::new()),
                    label: label(s),
                })
                .collect();
            components.push(Module { atoms });
        }
        let mut diffs = Vec::new();
        for k in 0..t {
            let src = subsets_of(k);
            let dst = subsets_of(k + 1);
            let mut entries = Vec::new();
            for (from, &s) in src.iter().enumerate() {
                for j in 0..t {
                    if s & (1 << j) != 0 {
                        continue;
                    }
                    let s2 = s | 1 << j;
                    let to = dst.iter().position(|&x| x == s2).unwrap();
                    let sign = if (s & ((1 << j) - 1)).count_ones() % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    entries.push(MapEntry {
                        to,
                        from,
                        coeff: sign,
                        mono: Monomial::one(n),
                    });
                }
            }
            diffs.push(MonoMap { entries });
        }
        Ok(Complex {
            ring,
            lo: 0,
            components,
            diffs,
            certified: true,
        })
    }

    /// `Σ^n X`, with `(ΣX)^i = X^{i+1}` and differential sign `(−1)^n`.
    pub fn shift(&self, n: i64) -> Complex {
        let sign = if n.rem_euclid(2) == 0 { 1 } else { -1 };
        let diffs = self
            .diffs
            .iter()
            .map(|m| MonoMap {
                entries: m
                    .entries
                    .iter()
                    .map(|e| MapEntry {
                        coeff: sign * e.coeff,
                        ..e.clone()
                    })
                    .collect(),
            })
            .collect();
        Complex {
            ring: self.ring.clone(),
            lo: self.lo - n,
            components: self.components.clone(),
            diffs,
            certified: self.certified,
        }
    }

    /// Adds extra inverted variables to every atom (tensoring with the
    /// monomial localization).
    pub fn localize(&self, extra: VarSet) -> Complex {
        let components = self
            .components
            .iter()
            .map(|m| Module {
                atoms: m
                    .atoms
                    .iter()
                    .map(|a| Atom {
                        inverted: a.inverted.union(extra),
                        ..a.clone()
                    })
                    .collect(),
            })
            .collect();
        Complex {
            ring: self.ring.clone(),
            lo: self.lo,
            components,
            diffs: self.diffs.clone(),
            certified: self.certified,
        }
    }

    /// Total complex of `self ⊗ other` with Koszul signs.
    pub fn tensor(&self, other: &Complex) -> Result<Complex, ComplexError> {
        if !Arc::ptr_eq(&self.ring, &other.ring) && *self.ring != *other.ring {
            return Err(ComplexError::RingMismatch);
        }
        if self.components.is_empty() || other.components.is_empty() {
            return Ok(Complex {
                ring: self.ring.clone(),
                lo: 0,
                components: vec![],
                diffs: vec![],
                certified: true,
            });
        }
        let lo = self.lo + other.lo;
        let hi = self.hi() + other.hi();
        let len = (hi - lo + 1) as usize;
        // index maps per total degree: (p, i, j) -> position
        let mut index: Vec<BTreeMap<(i64, usize, usize), usize>> = vec![BTreeMap::new(); len];
        let mut components: Vec<Module> = vec![Module::default(); len];
        for p in self.lo..=self.hi() {
            for q in other.lo..=other.hi() {
                let m = (p + q - lo) as usize;
                let xa = &self.component(p).unwrap().atoms;
                let ya = &other.component(q).unwrap().atoms;
                for (i, a) in xa.iter().enumerate() {
                    for (j, b) in ya.iter().enumerate() {
                        let mut rels: Vec<Monomial> = (*a.extra_rels).clone();
                        rels.extend((*b.extra_rels).iter().cloned());
                        let atom = Atom {
                            shift: deg_add(&a.shift, &b.shift),
                            inverted: a.inverted.union(b.inverted),
                            extra_rels: Arc::new(rels),
                            label: format!("{}⊗{}", a.label, b.label),
                        };
                        let pos = components[m].atoms.len();
                        components[m].atoms.push(atom);
                        index[m].insert((p, i, j), pos);
                    }
                }
            }
        }
        let mut diffs: Vec<MonoMap> = vec![MonoMap::default(); len.saturating_sub(1)];
        for p in self.lo..=self.hi() {
            for q in other.lo..=other.hi() {
                let m = (p + q - lo) as usize;
                if m + 1 >= len {
                    continue;
                }
                let xa = &self.component(p).unwrap().atoms;
                let ya = &other.component(q).unwrap().atoms;
                // d_X ⊗ id
                if let Some(dx) = self.diff(p) {
                    for e in &dx.entries {
                        for j in 0..ya.len() {
                            let from = index[m][&(p, e.from, j)];
                            let to = index[m + 1][&(p + 1, e.to, j)];
                            diffs[m].entries.push(MapEntry {
                                to,
                                from,
                                coeff: e.coeff,
                                mono: e.mono.clone(),
                            });
                        }
                    }
                }
                // (−1)^p id ⊗ d_Y
                if let Some(dy) = other.diff(q) {
                    let sign = if p.rem_euclid(2) == 0 { 1 } else { -1 };
                    for e in &dy.entries {
                        for i in 0..xa.len() {
                            let from = index[m][&(p, i, e.from)];
                            let to = index[m + 1][&(p, i, e.to)];
                            diffs[m].entries.push(MapEntry {
                                to,
                                from,
                                coeff: sign * e.coeff,
                                mono: e.mono.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(Complex {
            ring: self.ring.clone(),
            lo,
            components,
            diffs,
            certified: self.certified && other.certified,
        })
    }

    /// `Hom(P, X)` for a complex `P` with finite free components.
    pub fn hom_from_finite_free(p: &Complex, x: &Complex) -> Result<Complex, ComplexError> {
        if *p.ring != *x.ring {
            return Err(ComplexError::RingMismatch);
        }
        for m in &p.components {
            for a in &m.atoms {
                if !a.is_free() {
                    return Err(ComplexError::UnsupportedComponent(a.label.clone()));
                }
            }
        }
        if p.components.is_empty() || x.components.is_empty() {
            return Ok(Complex {
                ring: x.ring.clone(),
                lo: 0,
                components: vec![],
                diffs: vec![],
                certified: true,
            });
        }
        let lo = x.lo - p.hi();
        let hi = x.hi() - p.lo;
        let len = (hi - lo + 1) as usize;
        let mut index: Vec<BTreeMap<(i64, usize, usize), usize>> = vec![BTreeMap::new(); len];
        let mut components: Vec<Module> = vec![Module::default(); len];
        for nn in lo..=hi {
            let m = (nn - lo) as usize;
            for pp in p.lo..=p.hi() {
                let Some(xc) = x.component(pp + nn) else { continue };
                let pc = p.component(pp).unwrap();
                for (i, pa) in pc.atoms.iter().enumerate() {
                    for (j, xa) in xc.atoms.iter().enumerate() {
                        let atom = Atom {
                            shift: deg_sub(&xa.shift, &pa.shift),
                            inverted: xa.inverted,
                            extra_rels: xa.extra_rels.clone(),
                            label: format!("({})*⊗{}", pa.label, xa.label),
                        };
                        let pos = components[m].atoms.len();
                        components[m].atoms.push(atom);
                        index[m].insert((pp, i, j), pos);
                    }
                }
            }
        }
        let mut diffs: Vec<MonoMap> = vec![MonoMap::default(); len.saturating_sub(1)];
        for nn in lo..hi {
            let m = (nn - lo) as usize;
            let sign_pre = if nn.rem_euclid(2) == 0 { -1 } else { 1 }; // −(−1)^n
            for pp in p.lo..=p.hi() {
                // post-composition with d_X: Hom(P^p, X^{p+n}) → Hom(P^p, X^{p+n+1})
                if x.component(pp + nn).is_some() {
                    if let Some(dx) = x.diff(pp + nn) {
                        let pc = p.component(pp).unwrap();
                        for e in &dx.entries {
                            for i in 0..pc.atoms.len() {
                                let (Some(&from), Some(&to)) = (
                                    index[m].get(&(pp, i, e.from)),
                                    index[m + 1].get(&(pp, i, e.to)),
                                ) else {
                                    continue;
                                };
                                diffs[m].entries.push(MapEntry {
                                    to,
                                    from,
                                    coeff: e.coeff,
                                    mono: e.mono.clone(),
                                });
                            }
                        }
                    }
                }
                // pre-composition with d_P: Hom(P^{p+1}, X^{p+1+n}) → Hom(P^p, X^{p+n+1})
                if let Some(dp) = p.diff(pp) {
                    if let Some(xc) = x.component(pp + 1 + nn) {
                        for e in &dp.entries {
                            for j in 0..xc.atoms.len() {
                                let (Some(&from), Some(&to)) = (
                                    index[m].get(&(pp + 1, e.to, j)),
                                    index[m + 1].get(&(pp, e.from, j)),
                                ) else {
                                    continue;
                                };
                                diffs[m].entries.push(MapEntry {
                                    to,
                                    from,
                                    coeff: sign_pre * e.coeff,
                                    mono: e.mono.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(Complex {
            ring: x.ring.clone(),
            lo,
            components,
            diffs,
            certified: p.certified && x.certified,
        })
    }

    fn diff(&self, i: i64) -> Option<&MonoMap> {
        if i < self.lo {
            return None;
        }
        self.diffs.get((i - self.lo) as usize)
    }

    /// Whether the atom's piece at multidegree `d` is nonzero.
    fn atom_valid(&self, atom: &Atom, d: &[i64]) -> bool {
        let u = deg_sub(d, &atom.shift);
        let t = self.ring.inverted().union(atom.inverted);
        if !u
            .iter()
            .enumerate()
            .all(|(i, &x)| t.contains(i) || x >= 0)
        {
            return false;
        }
        for r in self.ring.relations().iter().chain(atom.extra_rels.iter()) {
            if r.strip(t).divides_mod(&u, t) {
                return false;
            }
        }
        true
    }

    /// Indices of atoms with nonzero piece at `d` in component `i`.
    pub fn piece_basis(&self, i: i64, d: &[i64]) -> Vec<usize> {
        match self.component(i) {
            None => vec![],
            Some(m) => (0..m.atoms.len())
                .filter(|&k| self.atom_valid(&m.atoms[k], d))
                .collect(),
        }
    }

    pub fn piece_dim(&self, i: i64, d: &[i64]) -> usize {
        self.piece_basis(i, d).len()
    }

    /// Matrix of `differential(i)` on the pieces at `d`.
    pub fn diff_matrix_at(&self, i: i64, d: &[i64], f: &FieldOps) -> Mat {
        let src = self.piece_basis(i, d);
        let dst = self.piece_basis(i + 1, d);
        let mut m = Mat::zeros(dst.len(), src.len());
        if let Some(map) = self.diff(i) {
            for e in &map.entries {
                let (Some(c), Some(r)) = (
                    src.iter().position(|&k| k == e.from),
                    dst.iter().position(|&k| k == e.to),
                ) else {
                    continue;
                };
                m.add_to(r, c, &rat(e.coeff), f);
            }
        }
        m
    }

    /// Homology dimension and representatives at `(i, d)`, with the query
    /// degree clamped along the certified rays when outside the box.
    pub fn homology(&self, i: i64, d: &[i64]) -> Result<HomologyPiece, ComplexError> {
        let b = self.support_box()?;
        let dc = b.clamp(d);
        Ok(self.homology_unclamped(i, &dc))
    }

    fn homology_unclamped(&self, i: i64, d: &[i64]) -> HomologyPiece {
        let f = FieldOps::new(self.ring.field());
        let out = self.diff_matrix_at(i, d, &f);
        let kernel = out.kernel_basis(&f);
        let dim_piece = self.piece_dim(i, d);
        let into = self.diff_matrix_at(i - 1, d, &f);
        let image: Vec<Vec<Rat>> = (0..into.cols).map(|c| {
            let col: Vec<Rat> = (0..into.rows).map(|r| into.get(r, c).clone()).collect();
            col
        })
        .collect();
        let reps = quotient_representatives(&image, &kernel, dim_piece, &f);
        let labels = self.piece_labels(i, d);
        let basis = reps
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(k, x)| (labels[k].clone(), x.clone()))
                    .collect()
            })
            .collect();
        HomologyPiece {
            dim: reps.len(),
            basis,
            raw: reps,
        }
    }

    fn piece_labels(&self, i: i64, d: &[i64]) -> Vec<String> {
        let Some(m) = self.component(i) else { return vec![] };
        self.piece_basis(i, d)
            .iter()
            .map(|&k| {
                let a = &m.atoms[k];
                let u = deg_sub(d, &a.shift);
                let mono = u
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e != 0)
                    .map(|(v, &e)| {
                        if e == 1 {
                            self.ring.var_name(v).to_string()
                        } else {
                            format!("{}^{}", self.ring.var_name(v), e)
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("*");
                if mono.is_empty() {
                    a.label.clone()
                } else {
                    format!("{}·{}", mono, a.label)
                }
            })
            .collect()
    }

    /// Certified multidegree support box with per-coordinate ray behavior.
    pub fn support_box(&self) -> Result<SupportBox, ComplexError> {
        if !self.certified {
            return Err(ComplexError::NoCertificate);
        }
        let n = self.ring.num_vars();
        let atoms: Vec<&Atom> = self.components.iter().flat_map(|m| m.atoms.iter()).collect();
        let mut lo = vec![0i64; n];
        let mut hi = vec![0i64; n];
        let mut below = vec![RayCert::Vanishes; n];
        let mut above = vec![RayCert::Stable; n];
        if atoms.is_empty() {
            return Ok(SupportBox {
                lo,
                hi,
                below: vec![RayCert::Vanishes; n],
                above: vec![RayCert::Vanishes; n],
            });
        }
        for i in 0..n {
            let inv_for = |a: &Atom| self.ring.inverted().union(a.inverted).contains(i);
            let non_inv: Vec<&&Atom> = atoms.iter().filter(|a| !inv_for(a)).collect();
            if non_inv.is_empty() {
                // pieces are independent of this coordinate
                lo[i] = 0;
                hi[i] = 0;
                below[i] = RayCert::Stable;
                above[i] = RayCert::Stable;
                continue;
            }
            let min_shift = non_inv.iter().map(|a| a.shift[i]).min().unwrap();
            let mixed = non_inv.len() < atoms.len();
            if mixed {
                lo[i] = min_shift - 1;
                below[i] = RayCert::Stable;
            } else {
                lo[i] = min_shift;
                below[i] = RayCert::Vanishes;
            }
            let mut h = i64::MIN;
            for a in &non_inv {
                let t = self.ring.inverted().union(a.inverted);
                let rel_cap = self
                    .ring
                    .relations()
                    .iter()
                    .chain(a.extra_rels.iter())
                    .map(|r| r.strip(t).0[i] as i64)
                    .max()
                    .unwrap_or(0)
                    .max(0);
                h = h.max(a.shift[i] + rel_cap);
            }
            hi[i] = h.max(lo[i]);
            above[i] = RayCert::Stable;
        }
        Ok(SupportBox {
            lo,
            hi,
            below,
            above,
        })
    }

    /// Cohomological degrees with nonzero homology somewhere on the box.
    pub fn nonzero_degrees(&self) -> Result<Vec<i64>, ComplexError> {
        self.nonzero_degrees_in(None)
    }

    /// Same, with an optional override box `[lo, hi]^n`.
    pub fn nonzero_degrees_in(
        &self,
        box_override: Option<(i64, i64)>,
    ) -> Result<Vec<i64>, ComplexError> {
        let b = match box_override {
            None => self.support_box()?,
            Some((lo, hi)) => {
                let n = self.ring.num_vars();
                SupportBox {
                    lo: vec![lo; n],
                    hi: vec![hi; n],
                    below: vec![RayCert::Stable; n],
                    above: vec![RayCert::Stable; n],
                }
            }
        };
        let pts = b.points();
        let mut out = Vec::new();
        for i in self.lo..=self.hi() {
            if pts.iter().any(|d| self.homology_unclamped(i, d).dim > 0) {
                out.push(i);
            }
        }
        Ok(out)
    }

    pub fn inf(&self) -> Result<ExtInt, ComplexError> {
        Ok(self
            .nonzero_degrees()?
            .first()
            .map(|&i| ExtInt::Fin(i))
            .unwrap_or(ExtInt::PosInf))
    }

    pub fn sup(&self) -> Result<ExtInt, ComplexError> {
        Ok(self
            .nonzero_degrees()?
            .last()
            .map(|&i| ExtInt::Fin(i))
            .unwrap_or(ExtInt::NegInf))
    }

    /// Checks `d∘d = 0` on every piece of the certified box.
    pub fn check_dd_zero(&self) -> Result<bool, ComplexError> {
        let b = self.support_box()?;
        let f = FieldOps::new(self.ring.field());
        for d in b.points() {
            for i in self.lo..self.hi() {
                let m1 = self.diff_matrix_at(i, &d, &f);
                let m2 = self.diff_matrix_at(i + 1, &d, &f);
                if m1.cols == 0 || m2.rows == 0 {
                    continue;
                }
                for c in 0..m1.cols {
                    let v = m1.column(c);
                    let w = m2.apply(&v, &f);
                    if w.iter().any(|x| !f.is_zero(x)) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// The matrix of the action of `x^mono` on the piece `(i, d) → (i, d + deg mono)`.
    /// The action maps each atom to itself; the product survives exactly
    /// when the target piece is valid.
    pub fn action_matrix(&self, i: i64, d: &[i64], mono: &Monomial) -> Mat {
        let d2 = deg_add(d, &mono.degree());
        let src = self.piece_basis(i, d);
        let dst = self.piece_basis(i, &d2);
        let mut m = Mat::zeros(dst.len(), src.len());
        for (c, &k) in src.iter().enumerate() {
            if let Some(r) = dst.iter().position(|&k2| k2 == k) {
                m.set(r, c, rat(1));
            }
        }
        m
    }
}
