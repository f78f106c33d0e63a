//! A terminating rewrite engine for the localization–completion calculus.
//!
//! Terms are built over a fixed window poset: torsion functors `Γ_V` at
//! up-sets, derived completions `Λ^p` at poset primes, localizations,
//! shifts, Hom and tensor, finite sums and products, adelic blocks
//! `A^W = ∏_{p∈W} Λ^p((−)_p)` at antichains, and opaque symbols. The
//! engine normalizes Hom-expressions between shifted local-cohomology
//! generators `Γ_p R_p` into adelic closed forms, or surfaces the stuck
//! subterm when the calculus has no closed form for it.
//!
//! Every rewrite strictly decreases a documented well-founded measure
//! (a product/sum interpretation of the constructors), so normalization
//! terminates; the engine records a trace of `(rule, position)` steps and
//! supports randomized redex selection for confluence testing.

use crate::extint::ExtInt;
use crate::poset::{FinitePoset, NodeId};
use crate::spfilt::SpFiltration;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

// Each shift node counts 1 plus its number of non-shift ancestors, so that
// merging, dropping, and moving shifts out of functor/Hom/tensor arguments
// all strictly decrease the sum.
fn shift_depth(t: &LocTerm, nonshift_above: u64) -> u64 {
    let is_shift = matches!(t, LocTerm::Shift(_, _));
    let own = if is_shift { 1 + nonshift_above } else { 0 };
    let below = nonshift_above + u64::from(!is_shift);
    own + t
        .children()
        .iter()
        .map(|c| shift_depth(c, below))
        .sum::<u64>()
}

// A unary functor layer that finite-sum aggregation can see through:
// all of these commute with finite direct sums.
#[derive(Clone, PartialEq, Eq, Debug)]
enum Wrap {
    Gamma(BTreeSet<NodeId>),
    LambdaSet(BTreeSet<NodeId>),
    Lambda(NodeId),
    Loc(NodeId),
    Copies(Cardinal),
    Shifted(i64),
}

fn peel(mut t: &LocTerm) -> (Vec<Wrap>, &LocTerm) {
    let mut chain = Vec::new();
    loop {
        match t {
            LocTerm::Gamma(v, inner) => {
                chain.push(Wrap::Gamma(v.clone()));
                t = inner;
            }
            LocTerm::LambdaSet(v, inner) => {
                chain.push(Wrap::LambdaSet(v.clone()));
                t = inner;
            }
            LocTerm::Lambda(p, inner) => {
                chain.push(Wrap::Lambda(*p));
                t = inner;
            }
            LocTerm::LocalizeAt(p, inner) => {
                chain.push(Wrap::Loc(*p));
                t = inner;
            }
            LocTerm::FreeCopies(k, inner) => {
                chain.push(Wrap::Copies(k.clone()));
                t = inner;
            }
            LocTerm::Shift(n, inner) => {
                chain.push(Wrap::Shifted(*n));
                t = inner;
            }
            other => return (chain, other),
        }
    }
}

fn wrap_back(chain: &[Wrap], core: LocTerm) -> LocTerm {
    chain.iter().rev().fold(core, |acc, w| match w {
        Wrap::Gamma(v) => LocTerm::Gamma(v.clone(), Box::new(acc)),
        Wrap::LambdaSet(v) => LocTerm::LambdaSet(v.clone(), Box::new(acc)),
        Wrap::Lambda(p) => LocTerm::Lambda(*p, Box::new(acc)),
        Wrap::Loc(p) => LocTerm::LocalizeAt(*p, Box::new(acc)),
        Wrap::Copies(k) => LocTerm::FreeCopies(k.clone(), Box::new(acc)),
        Wrap::Shifted(n) => LocTerm::Shift(*n, Box::new(acc)),
    })
}

fn rebuild_sum(xs: &[LocTerm], group: &[usize], replacement: LocTerm) -> LocTerm {
    let mut out: Vec<LocTerm> = Vec::new();
    let mut placed = false;
    for (j, y) in xs.iter().enumerate() {
        if group.contains(&j) {
            if !placed {
                out.push(replacement.clone());
                placed = true;
            }
        } else {
            out.push(y.clone());
        }
    }
    if out.len() == 1 {
        out.into_iter().next().unwrap()
    } else {
        LocTerm::Sum(out)
    }
}

/// Formal cardinal exponent for coproducts of copies.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Cardinal {
    One,
    Symbol(String),
}

impl Cardinal {
    fn mul(&self, other: &Cardinal) -> Cardinal {
        match (self, other) {
            (Cardinal::One, x) | (x, Cardinal::One) => x.clone(),
            (Cardinal::Symbol(a), Cardinal::Symbol(b)) => Cardinal::Symbol(format!("{a}·{b}")),
        }
    }
}

impl fmt::Display for Cardinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinal::One => write!(f, "1"),
            Cardinal::Symbol(s) => write!(f, "{s}"),
        }
    }
}

/// A symbolic term of the localization–completion calculus.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum LocTerm {
    Zero,
    Ring,
    Opaque(String),
    /// `t^(κ)` — a coproduct of `κ` copies.
    FreeCopies(Cardinal, Box<LocTerm>),
    /// Torsion functor `Γ_V` at a specialization-closed set of nodes.
    Gamma(BTreeSet<NodeId>, Box<LocTerm>),
    /// Colocalization `λ^V` at a specialization-closed set of nodes.
    LambdaSet(BTreeSet<NodeId>, Box<LocTerm>),
    /// Derived completion `Λ^p` at a poset prime.
    Lambda(NodeId, Box<LocTerm>),
    /// `(−) ⊗ R_p`.
    LocalizeAt(NodeId, Box<LocTerm>),
    Shift(i64, Box<LocTerm>),
    Hom(Box<LocTerm>, Box<LocTerm>),
    Tensor(Box<LocTerm>, Box<LocTerm>),
    Sum(Vec<LocTerm>),
    Prod(Vec<LocTerm>),
    /// Adelic block `A^W` at an antichain of nodes.
    Adelic(BTreeSet<NodeId>, Box<LocTerm>),
    /// The full filtration generator `⊕_p Σ^{f(p)} Γ_p R_p`.
    TPhi,
    /// One stratum `⊕_{f(p)=n} Σ^n Γ_p R_p`.
    TStratum(i64),
}

use LocTerm::*;

impl LocTerm {
    pub fn hom(s: LocTerm, t: LocTerm) -> LocTerm {
        Hom(Box::new(s), Box::new(t))
    }

    pub fn tensor(s: LocTerm, t: LocTerm) -> LocTerm {
        Tensor(Box::new(s), Box::new(t))
    }

    pub fn shift(n: i64, t: LocTerm) -> LocTerm {
        Shift(n, Box::new(t))
    }

    pub fn copies(k: Cardinal, t: LocTerm) -> LocTerm {
        FreeCopies(k, Box::new(t))
    }

    /// The local-cohomology generator `Γ_p R_p = Γ_{V(p)}((R)_p)`.
    pub fn gamma_rp(poset: &FinitePoset, p: NodeId) -> LocTerm {
        Gamma(
            poset.up_set(p),
            Box::new(LocalizeAt(p, Box::new(Ring))),
        )
    }

    fn children(&self) -> Vec<&LocTerm> {
        match self {
            Zero | Ring | Opaque(_) | TPhi | TStratum(_) => vec![],
            FreeCopies(_, t) | Gamma(_, t) | LambdaSet(_, t) | Lambda(_, t)
            | LocalizeAt(_, t) | Shift(_, t) | Adelic(_, t) => vec![t],
            Hom(s, t) | Tensor(s, t) => vec![s, t],
            Sum(xs) | Prod(xs) => xs.iter().collect(),
        }
    }

    fn replace_child(&self, idx: usize, new: LocTerm) -> LocTerm {
        let mut out = self.clone();
        match &mut out {
            FreeCopies(_, t) | Gamma(_, t) | LambdaSet(_, t) | Lambda(_, t)
            | LocalizeAt(_, t) | Shift(_, t) | Adelic(_, t) => {
                assert_eq!(idx, 0);
                **t = new;
            }
            Hom(s, t) | Tensor(s, t) => {
                if idx == 0 {
                    **s = new;
                } else {
                    **t = new;
                }
            }
            Sum(xs) | Prod(xs) => xs[idx] = new,
            _ => unreachable!("leaf has no children"),
        }
        out
    }

    pub fn subterm(&self, path: &[usize]) -> &LocTerm {
        match path.split_first() {
            None => self,
            Some((&i, rest)) => self.children()[i].subterm(rest),
        }
    }

    fn replace_at(&self, path: &[usize], new: LocTerm) -> LocTerm {
        match path.split_first() {
            None => new,
            Some((&i, rest)) => {
                let child = self.children()[i].replace_at(rest, new);
                self.replace_child(i, child)
            }
        }
    }

    fn contains_torsion_structure(&self) -> bool {
        match self {
            Gamma(_, _) | TPhi | TStratum(_) => true,
            _ => self
                .children()
                .iter()
                .any(|c| c.contains_torsion_structure()),
        }
    }

    /// Canonical shift placement and sum/product ordering: shifts are
    /// merged, moved out of functor and tensor arguments, distributed over
    /// sum members, and dropped when zero; then sums and products are
    /// sorted. Only isomorphism-preserving moves are performed.
    pub fn canonical(&self) -> LocTerm {
        let (n, t) = self.shift_free();
        t.attach_shift(n)
    }

    fn attach_shift(self, n: i64) -> LocTerm {
        if n == 0 || self == Zero {
            return self;
        }
        match self {
            Sum(xs) => {
                let mut parts: Vec<LocTerm> =
                    xs.into_iter().map(|x| x.attach_shift(n)).collect();
                parts.sort();
                Sum(parts)
            }
            Prod(xs) => {
                let mut parts: Vec<LocTerm> =
                    xs.into_iter().map(|x| x.attach_shift(n)).collect();
                parts.sort();
                Prod(parts)
            }
            Shift(m, u) => u.attach_shift(n + m),
            other => Shift(n, Box::new(other)),
        }
    }

    /// Returns `(n, u)` with `self ≅ Σ^n u`, `u` free of top-level shifts
    /// and canonical inside.
    fn shift_free(&self) -> (i64, LocTerm) {
        match self {
            Shift(n, inner) => {
                let (m, u) = inner.shift_free();
                (n + m, u)
            }
            Sum(xs) => {
                let mut parts: Vec<LocTerm> = xs
                    .iter()
                    .map(|x| {
                        let (n, u) = x.shift_free();
                        u.attach_shift(n)
                    })
                    .collect();
                parts.sort();
                (0, Sum(parts))
            }
            Prod(xs) => {
                let mut parts: Vec<LocTerm> = xs
                    .iter()
                    .map(|x| {
                        let (n, u) = x.shift_free();
                        u.attach_shift(n)
                    })
                    .collect();
                parts.sort();
                (0, Prod(parts))
            }
            FreeCopies(k, inner) => {
                let (n, u) = inner.shift_free();
                (n, FreeCopies(k.clone(), Box::new(u)))
            }
            Gamma(v, inner) => {
                let (n, u) = inner.shift_free();
                (n, Gamma(v.clone(), Box::new(u)))
            }
            LambdaSet(v, inner) => {
                let (n, u) = inner.shift_free();
                (n, LambdaSet(v.clone(), Box::new(u)))
            }
            Lambda(p, inner) => {
                let (n, u) = inner.shift_free();
                (n, Lambda(*p, Box::new(u)))
            }
            LocalizeAt(p, inner) => {
                let (n, u) = inner.shift_free();
                (n, LocalizeAt(*p, Box::new(u)))
            }
            Adelic(w, inner) => {
                let (n, u) = inner.shift_free();
                (n, Adelic(w.clone(), Box::new(u)))
            }
            Hom(s, t) => {
                let (a, us) = s.shift_free();
                let (b, ut) = t.shift_free();
                (b - a, LocTerm::hom(us, ut))
            }
            Tensor(s, t) => {
                let (a, us) = s.shift_free();
                let (b, ut) = t.shift_free();
                (a + b, LocTerm::tensor(us, ut))
            }
            leaf => (0, leaf.clone()),
        }
    }

    /// Human rendering with node names from the poset.
    pub fn render(&self, poset: &FinitePoset) -> String {
        let set = |w: &BTreeSet<NodeId>| -> String {
            let names: Vec<&str> = w.iter().map(|&p| poset.name(p)).collect();
            names.join(",")
        };
        match self {
            Zero => "0".to_string(),
            Ring => "R".to_string(),
            Opaque(s) => format!("opaque({s})"),
            FreeCopies(k, t) => format!("{}^({k})", t.render(poset)),
            Gamma(v, t) => format!("Γ_{{{}}}({})", set(v), t.render(poset)),
            LambdaSet(v, t) => format!("λ^{{{}}}({})", set(v), t.render(poset)),
            Lambda(p, t) => format!("Λ^{{{}}}({})", poset.name(*p), t.render(poset)),
            LocalizeAt(p, t) => format!("({})_{{{}}}", t.render(poset), poset.name(*p)),
            Shift(n, t) => format!("Σ^{n} {}", t.render(poset)),
            Hom(s, t) => format!("Hom({}, {})", s.render(poset), t.render(poset)),
            Tensor(s, t) => format!("({} ⊗ {})", s.render(poset), t.render(poset)),
            Sum(xs) => {
                if xs.is_empty() {
                    "⊕()".to_string()
                } else {
                    let parts: Vec<String> = xs.iter().map(|x| x.render(poset)).collect();
                    format!("({})", parts.join(" ⊕ "))
                }
            }
            Prod(xs) => {
                if xs.is_empty() {
                    "∏()".to_string()
                } else {
                    let parts: Vec<String> = xs.iter().map(|x| x.render(poset)).collect();
                    format!("({})", parts.join(" × "))
                }
            }
            Adelic(w, t) => format!("A^{{{}}}({})", set(w), t.render(poset)),
            TPhi => "TPhi".to_string(),
            TStratum(n) => format!("T({n})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocError {
    #[error("ill-formed term: {0}")]
    IllFormedTerm(String),
    #[error("the filtration is not a codimension filtration")]
    NotCodimension,
    #[error("term mentions the filtration generator but no filtration was supplied")]
    NeedsFiltration,
    #[error("the filtration is degenerate; the generator needs finite values")]
    DegenerateFiltration,
}

/// Identifier of a rewrite rule, used in traces.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuleId {
    ExpandTPhi,
    ExpandStratum,
    ZeroAbsorb,
    SumPrune,
    Flatten,
    ProdAsSum,
    CopiesOne,
    CopiesMul,
    CopiesSum,
    CopiesShift,
    ShiftZero,
    ShiftMerge,
    ShiftHomSource,
    ShiftHomTarget,
    TensorUnit,
    TensorLocalize,
    TensorGamma,
    TensorSum,
    TensorShift,
    HomSumSource,
    HomSumTarget,
    R1GammaAbsorb,
    R2TorsionCompletion,
    R3HomGammaUnit,
    R4ClosedColocal,
    R6Orthogonal,
    R7SelfCompletion,
    R8CoverStratum,
    FunctorDistribute,
    R9aAdelicFold,
    R9cAdelicFactor,
    R9bAdelicMerge,
    R9dAdelicShrink,
    R5HomCompletion,
}

impl RuleId {
    pub fn name(self) -> &'static str {
        use RuleId::*;
        match self {
            ExpandTPhi => "expand-tphi",
            ExpandStratum => "expand-stratum",
            ZeroAbsorb => "zero-absorb",
            SumPrune => "sum-prune",
            Flatten => "flatten",
            ProdAsSum => "prod-as-sum",
            CopiesOne => "copies-one",
            CopiesMul => "copies-mul",
            CopiesSum => "copies-sum",
            CopiesShift => "copies-shift",
            ShiftZero => "shift-zero",
            ShiftMerge => "shift-merge",
            ShiftHomSource => "shift-hom-source",
            ShiftHomTarget => "shift-hom-target",
            TensorUnit => "tensor-unit",
            TensorLocalize => "tensor-localize",
            TensorGamma => "tensor-gamma",
            TensorSum => "tensor-sum",
            TensorShift => "tensor-shift",
            HomSumSource => "hom-sum-source",
            HomSumTarget => "hom-sum-target",
            R1GammaAbsorb => "R1-gamma-absorb",
            R2TorsionCompletion => "R2-torsion-completion",
            R3HomGammaUnit => "R3-hom-gamma-unit",
            R4ClosedColocal => "R4-closed-colocalization",
            R6Orthogonal => "R6-orthogonal-vanish",
            R7SelfCompletion => "R7-self-completion",
            R8CoverStratum => "R8-cover-stratum",
            R9aAdelicFold => "R9a-adelic-fold",
            FunctorDistribute => "functor-distribute",
            R9cAdelicFactor => "R9c-adelic-factor",
            R9bAdelicMerge => "R9b-adelic-merge",
            R9dAdelicShrink => "R9d-adelic-shrink",
            R5HomCompletion => "R5-hom-completion",
        }
    }
}

/// The ordered rule set tried at each position, most specific first.
pub const RULE_ORDER: &[RuleId] = &[
    RuleId::ExpandTPhi,
    RuleId::ExpandStratum,
    RuleId::ZeroAbsorb,
    RuleId::SumPrune,
    RuleId::Flatten,
    RuleId::ProdAsSum,
    RuleId::CopiesOne,
    RuleId::CopiesMul,
    RuleId::CopiesSum,
    RuleId::CopiesShift,
    RuleId::ShiftZero,
    RuleId::ShiftMerge,
    RuleId::TensorUnit,
    RuleId::TensorLocalize,
    RuleId::TensorGamma,
    RuleId::TensorSum,
    RuleId::TensorShift,
    RuleId::ShiftHomSource,
    RuleId::ShiftHomTarget,
    RuleId::HomSumSource,
    RuleId::HomSumTarget,
    RuleId::R1GammaAbsorb,
    RuleId::R2TorsionCompletion,
    RuleId::R3HomGammaUnit,
    RuleId::R4ClosedColocal,
    RuleId::R6Orthogonal,
    RuleId::R7SelfCompletion,
    RuleId::R8CoverStratum,
    RuleId::FunctorDistribute,
    RuleId::R9aAdelicFold,
    RuleId::R9cAdelicFactor,
    RuleId::R9bAdelicMerge,
    RuleId::R9dAdelicShrink,
    RuleId::R5HomCompletion,
];

/// One line of the rule catalog, for reports.
pub struct RuleInfo {
    pub id: &'static str,
    pub summary: &'static str,
}

/// The ordered rule catalog with one-line summaries.
pub fn rules() -> Vec<RuleInfo> {
    RULE_ORDER
        .iter()
        .map(|r| RuleInfo {
            id: r.name(),
            summary: match r {
                RuleId::ExpandTPhi => "TPhi → ⊕_p Σ^{f(p)} Γ_p R_p",
                RuleId::ExpandStratum => "T(n) → ⊕_{f(p)=n} Σ^n Γ_p R_p",
                RuleId::ZeroAbsorb => "0 absorbs Hom, Tensor, functors, copies",
                RuleId::SumPrune => "drop 0 summands/factors; unwrap singletons; empty index set is 0",
                RuleId::Flatten => "flatten nested sums and products",
                RuleId::ProdAsSum => "finite products are biproducts: ∏ → ⊕",
                RuleId::CopiesOne => "t^(1) → t",
                RuleId::CopiesMul => "(t^(κ))^(μ) → t^(κ·μ)",
                RuleId::CopiesSum => "(⊕ t_i)^(κ) → ⊕ t_i^(κ)",
                RuleId::CopiesShift => "(Σ^n t)^(κ) → Σ^n (t^(κ))",
                RuleId::ShiftZero => "Σ^0 t → t",
                RuleId::ShiftMerge => "Σ^a Σ^b t → Σ^{a+b} t",
                RuleId::TensorUnit => "R ⊗ t → t, t ⊗ R → t",
                RuleId::TensorLocalize => "R_p ⊗ t → (t)_p",
                RuleId::TensorGamma => "Γ_V R ⊗ t → Γ_V t",
                RuleId::TensorSum => "tensor distributes over finite sums",
                RuleId::TensorShift => "shifts move out of tensor factors",
                RuleId::ShiftHomSource => "Hom(Σ^a s, t) → Σ^{-a} Hom(s, t)",
                RuleId::ShiftHomTarget => "Hom(s, Σ^b t) → Σ^b Hom(s, t)",
                RuleId::HomSumSource => "Hom(⊕ s_i, t) → ⊕ Hom(s_i, t)",
                RuleId::HomSumTarget => "Hom(s, ⊕ t_i) → ⊕ Hom(s, t_i)",
                RuleId::R1GammaAbsorb => "nested torsion: Γ_{V0} Γ_V → Γ_{V0} when V0 ⊆ V",
                RuleId::R2TorsionCompletion => "Γ_{V(p)} Λ^p → Γ_{V(p)}; Λ^p Γ_{V(p)} → Λ^p",
                RuleId::R3HomGammaUnit => "Hom(Γ_V R, t) → λ^V t",
                RuleId::R4ClosedColocal => "λ^{V(p)} → Λ^p",
                RuleId::R6Orthogonal => "Hom(Γ_p R_p, Γ_q R_q copies) → 0 unless p ≤ q",
                RuleId::R7SelfCompletion => "Hom(Γ_p R_p, (Γ_p R_p)^(κ)) → A^{p}(R^(κ))",
                RuleId::R8CoverStratum => {
                    "Hom(Γ_p R_p, (Γ_q R_q)^(κ)) → Σ^{-1} A^{p}A^{q}(R^(κ)) for covers p ⋖ q"
                }
                RuleId::R9aAdelicFold => "Λ^p (t)_p → A^{p} t",
                RuleId::FunctorDistribute => "F(⊕ t_i) → ⊕ F(t_i) for the additive functor heads Γ/λ/Λ/(−)_p",
                RuleId::R9cAdelicFactor => "⊕ A^W t_i → A^W (⊕ t_i)",
                RuleId::R9bAdelicMerge => "⊕ A^{W_i} t → A^{∪W_i} t for disjoint antichains",
                RuleId::R9dAdelicShrink => "A^{p} A^W → A^{p} A^{W ∩ V(p)}",
                RuleId::R5HomCompletion => "Hom(Γ_p R_p, t) → Λ^p Hom(R_p, t) for torsion-free t",
            },
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: RuleId,
    pub path: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalStatus {
    Resolved,
    /// No closed form exists, but the stuck Homs all start from minimal
    /// nodes, which makes the value a flat module.
    ResolvedFlat { note: String },
    Unresolved { subterm: LocTerm, reason: String },
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub term: LocTerm,
    pub trace: Vec<TraceStep>,
    pub status: NormalStatus,
    /// Whether the well-founded measure strictly decreased at every step.
    pub measure_monotone: bool,
}

/// Rewrite context: a poset, and a filtration for generator expansion.
pub struct Normalizer<'a> {
    poset: &'a Arc<FinitePoset>,
    phi: Option<&'a SpFiltration>,
}

impl<'a> Normalizer<'a> {
    pub fn new(poset: &'a Arc<FinitePoset>, phi: Option<&'a SpFiltration>) -> Normalizer<'a> {
        Normalizer { poset, phi }
    }

    /// Validates the structural term invariants: Γ/λ sets are up-sets,
    /// adelic sets are antichains, node ids are in range.
    pub fn validate(&self, t: &LocTerm) -> Result<(), LocError> {
        let check_nodes = |w: &BTreeSet<NodeId>| -> Result<(), LocError> {
            for &p in w {
                if p.0 >= self.poset.len() {
                    return Err(LocError::IllFormedTerm(format!(
                        "node id {} out of range",
                        p.0
                    )));
                }
            }
            Ok(())
        };
        match t {
            Gamma(v, inner) | LambdaSet(v, inner) => {
                check_nodes(v)?;
                if !self.poset.is_up_set(v) {
                    return Err(LocError::IllFormedTerm(
                        "torsion/colocalization set is not specialization closed".to_string(),
                    ));
                }
                self.validate(inner)
            }
            Adelic(w, inner) => {
                check_nodes(w)?;
                if !self.poset.is_antichain(w.iter()) {
                    return Err(LocError::IllFormedTerm(
                        "adelic index set is not an antichain".to_string(),
                    ));
                }
                self.validate(inner)
            }
            Lambda(p, inner) | LocalizeAt(p, inner) => {
                if p.0 >= self.poset.len() {
                    return Err(LocError::IllFormedTerm(format!(
                        "node id {} out of range",
                        p.0
                    )));
                }
                self.validate(inner)
            }
            TPhi | TStratum(_) if self.phi.is_none() => Err(LocError::NeedsFiltration),
            _ => t.children().into_iter().try_for_each(|c| self.validate(c)),
        }
    }

    /// The well-founded measure: a lexicographic triple. The first
    /// component is a shift-transparent product interpretation of the
    /// constructors; shift-moving rules keep it constant and strictly
    /// decrease the second (weighted shift depth); the Hom-completion
    /// fallback keeps both constant and strictly decreases the third
    /// (count of Homs out of a local-cohomology generator). Every rule
    /// application strictly decreases the triple.
    pub fn measure(&self, t: &LocTerm) -> (u64, u64, u64) {
        (self.weight(t), shift_depth(t, 1), self.generator_homs(t))
    }

    fn weight(&self, t: &LocTerm) -> u64 {
        let n = self.poset.len() as u64;
        match t {
            Zero | Ring | Opaque(_) => 2,
            TPhi | TStratum(_) => 11 * (n + 2) + 4,
            FreeCopies(_, t) => 2 * self.weight(t),
            Shift(_, t) => self.weight(t),
            Sum(xs) => xs.iter().map(|x| self.weight(x)).sum::<u64>() + 3,
            Prod(xs) => xs.iter().map(|x| self.weight(x)).sum::<u64>() + 4,
            Gamma(_, t) | Lambda(_, t) | LocalizeAt(_, t) => 2 * self.weight(t),
            LambdaSet(_, t) => 3 * self.weight(t),
            Adelic(w, t) => 2 * self.weight(t) + 2 * w.len() as u64,
            Hom(s, t) | Tensor(s, t) => self.weight(s).saturating_mul(self.weight(t)),
        }
    }

    fn generator_homs(&self, t: &LocTerm) -> u64 {
        let own = match t {
            Hom(s, _) if self.as_generator(s).is_some() => 1,
            _ => 0,
        };
        own + t
            .children()
            .iter()
            .map(|c| self.generator_homs(c))
            .sum::<u64>()
    }

    /// The canonical aggregation class of an adelic index set: all nodes
    /// must share one filtration value (or, without a filtration, one
    /// poset height). Classes are intrinsic per node, which keeps the
    /// sum-merging rules confluent under any redex order.
    fn merge_class(&self, w: &BTreeSet<NodeId>) -> Option<ExtInt> {
        let mut vals = w.iter().map(|&p| match self.phi {
            Some(phi) => phi.value(p),
            None => ExtInt::Fin(self.poset.height(p) as i64),
        });
        let first = vals.next()?;
        vals.all(|v| v == first).then_some(first)
    }

    /// Aggregation of nested adelic blocks inside a sum: children
    /// `C[A^W(A^{U_k} t)]` under a common additive wrapper chain `C`, with
    /// the same outer antichain `W`, the same innermost `t`, and `U_k` in
    /// one aggregation class combine into `C[A^W(A^{∪U_k} t)]` when the
    /// union is a disjoint antichain.
    fn try_adelic_factor(&self, t: &LocTerm) -> Option<LocTerm> {
        let Sum(xs) = t else { return None };
        for (i, x) in xs.iter().enumerate() {
            let (chain, core) = peel(x);
            let Adelic(w, inner) = core else { continue };
            let Adelic(u0, core_t) = &**inner else { continue };
            let Some(class) = self.merge_class(u0) else { continue };
            let mut group = Vec::new();
            let mut union: BTreeSet<NodeId> = BTreeSet::new();
            let mut total = 0usize;
            for (j, y) in xs.iter().enumerate() {
                let (chain2, core2) = peel(y);
                if chain2 != chain {
                    continue;
                }
                let Adelic(w2, inner2) = core2 else { continue };
                let Adelic(u2, core_t2) = &**inner2 else { continue };
                if w2 == w && core_t2 == core_t && self.merge_class(u2) == Some(class) {
                    group.push(j);
                    total += u2.len();
                    union.extend(u2.iter().copied());
                }
            }
            if group.len() < 2 || group[0] != i {
                continue;
            }
            if union.len() != total || !self.poset.is_antichain(union.iter()) {
                continue;
            }
            let merged = wrap_back(
                &chain,
                Adelic(w.clone(), Box::new(Adelic(union, core_t.clone()))),
            );
            return Some(rebuild_sum(xs, &group, merged));
        }
        None
    }

    /// Matches `Γ_p R_p` up to a formal-copies wrapper.
    fn as_generator(&self, t: &LocTerm) -> Option<(NodeId, Cardinal)> {
        match t {
            FreeCopies(k, inner) => {
                let (p, k2) = self.as_generator(inner)?;
                Some((p, k.mul(&k2)))
            }
            Gamma(v, inner) => match &**inner {
                LocalizeAt(p, r) if **r == Ring && *v == self.poset.up_set(*p) => {
                    Some((*p, Cardinal::One))
                }
                _ => None,
            },
            _ => None,
        }
    }

    fn principal_up_set(&self, v: &BTreeSet<NodeId>) -> Option<NodeId> {
        let mins: Vec<NodeId> = v
            .iter()
            .filter(|&&p| !v.iter().any(|&q| self.poset.lt(q, p)))
            .copied()
            .collect();
        match mins.as_slice() {
            [p] if *v == self.poset.up_set(*p) => Some(*p),
            _ => None,
        }
    }

    /// Attempts one rule at the root of `t`.
    fn try_rule(&self, rule: RuleId, t: &LocTerm) -> Option<LocTerm> {
        match rule {
            RuleId::ExpandTPhi => {
                if *t != TPhi {
                    return None;
                }
                let phi = self.phi?;
                let parts: Vec<LocTerm> = self
                    .poset
                    .nodes()
                    .map(|p| match phi.value(p) {
                        ExtInt::Fin(v) => {
                            Some(LocTerm::shift(v, LocTerm::gamma_rp(self.poset, p)))
                        }
                        _ => None,
                    })
                    .collect::<Option<_>>()?;
                Some(Sum(parts))
            }
            RuleId::ExpandStratum => match t {
                TStratum(v) => {
                    let phi = self.phi?;
                    let parts: Vec<LocTerm> = phi
                        .stratum(ExtInt::Fin(*v))
                        .into_iter()
                        .map(|p| LocTerm::shift(*v, LocTerm::gamma_rp(self.poset, p)))
                        .collect();
                    Some(Sum(parts))
                }
                _ => None,
            },
            RuleId::ZeroAbsorb => match t {
                Hom(s, t2) if **s == Zero || **t2 == Zero => Some(Zero),
                Tensor(s, t2) if **s == Zero || **t2 == Zero => Some(Zero),
                FreeCopies(_, z) | Gamma(_, z) | LambdaSet(_, z) | Lambda(_, z)
                | LocalizeAt(_, z) | Shift(_, z) | Adelic(_, z)
                    if **z == Zero =>
                {
                    Some(Zero)
                }
                Gamma(v, _) | LambdaSet(v, _) if v.is_empty() => Some(Zero),
                Adelic(w, _) if w.is_empty() => Some(Zero),
                _ => None,
            },
            RuleId::SumPrune => match t {
                Sum(xs) | Prod(xs) => {
                    if xs.contains(&Zero) {
                        let kept: Vec<LocTerm> =
                            xs.iter().filter(|x| **x != Zero).cloned().collect();
                        Some(match kept.len() {
                            0 => Zero,
                            1 => kept.into_iter().next().unwrap(),
                            _ => match t {
                                Sum(_) => Sum(kept),
                                _ => Prod(kept),
                            },
                        })
                    } else if xs.is_empty() {
                        Some(Zero)
                    } else if xs.len() == 1 {
                        Some(xs[0].clone())
                    } else {
                        None
                    }
                }
                _ => None,
            },
            RuleId::Flatten => match t {
                Sum(xs) if xs.iter().any(|x| matches!(x, Sum(_))) => {
                    let mut out = Vec::new();
                    for x in xs {
                        match x {
                            Sum(inner) => out.extend(inner.iter().cloned()),
                            other => out.push(other.clone()),
                        }
                    }
                    Some(Sum(out))
                }
                Prod(xs) if xs.iter().any(|x| matches!(x, Prod(_))) => {
                    let mut out = Vec::new();
                    for x in xs {
                        match x {
                            Prod(inner) => out.extend(inner.iter().cloned()),
                            other => out.push(other.clone()),
                        }
                    }
                    Some(Prod(out))
                }
                _ => None,
            },
            RuleId::ProdAsSum => match t {
                Prod(xs) if xs.len() >= 2 => Some(Sum(xs.clone())),
                _ => None,
            },
            RuleId::CopiesOne => match t {
                FreeCopies(Cardinal::One, inner) => Some((**inner).clone()),
                _ => None,
            },
            RuleId::CopiesMul => match t {
                FreeCopies(k, inner) => match &**inner {
                    FreeCopies(k2, inner2) => {
                        Some(LocTerm::copies(k.mul(k2), (**inner2).clone()))
                    }
                    _ => None,
                },
                _ => None,
            },
            RuleId::CopiesSum => match t {
                FreeCopies(k, inner) => match &**inner {
                    Sum(xs) => Some(Sum(
                        xs.iter()
                            .map(|x| LocTerm::copies(k.clone(), x.clone()))
                            .collect(),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::CopiesShift => match t {
                FreeCopies(k, inner) => match &**inner {
                    Shift(n, inner2) => Some(LocTerm::shift(
                        *n,
                        LocTerm::copies(k.clone(), (**inner2).clone()),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::ShiftZero => match t {
                Shift(0, inner) => Some((**inner).clone()),
                _ => None,
            },
            RuleId::ShiftMerge => match t {
                Shift(a, inner) => match &**inner {
                    Shift(b, inner2) => Some(LocTerm::shift(a + b, (**inner2).clone())),
                    _ => None,
                },
                _ => None,
            },
            RuleId::TensorUnit => match t {
                Tensor(s, t2) if **s == Ring => Some((**t2).clone()),
                Tensor(s, t2) if **t2 == Ring => Some((**s).clone()),
                _ => None,
            },
            RuleId::TensorLocalize => match t {
                Tensor(s, t2) => match (&**s, &**t2) {
                    (LocalizeAt(p, r), other) | (other, LocalizeAt(p, r)) if **r == Ring => {
                        Some(LocTerm::LocalizeAt(*p, Box::new(other.clone())))
                    }
                    _ => None,
                },
                _ => None,
            },
            RuleId::TensorGamma => match t {
                Tensor(s, t2) => match (&**s, &**t2) {
                    (Gamma(v, r), other) | (other, Gamma(v, r)) if **r == Ring => {
                        Some(Gamma(v.clone(), Box::new(other.clone())))
                    }
                    _ => None,
                },
                _ => None,
            },
            RuleId::TensorSum => match t {
                Tensor(s, t2) => match (&**s, &**t2) {
                    (Sum(xs), other) => Some(Sum(
                        xs.iter()
                            .map(|x| LocTerm::tensor(x.clone(), other.clone()))
                            .collect(),
                    )),
                    (other, Sum(xs)) => Some(Sum(
                        xs.iter()
                            .map(|x| LocTerm::tensor(other.clone(), x.clone()))
                            .collect(),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::TensorShift => match t {
                Tensor(s, t2) => match (&**s, &**t2) {
                    (Shift(n, inner), other) => Some(LocTerm::shift(
                        *n,
                        LocTerm::tensor((**inner).clone(), other.clone()),
                    )),
                    (other, Shift(n, inner)) => Some(LocTerm::shift(
                        *n,
                        LocTerm::tensor(other.clone(), (**inner).clone()),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::ShiftHomSource => match t {
                Hom(s, t2) => match &**s {
                    Shift(a, inner) => Some(LocTerm::shift(
                        -a,
                        LocTerm::hom((**inner).clone(), (**t2).clone()),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::ShiftHomTarget => match t {
                Hom(s, t2) => match &**t2 {
                    Shift(b, inner) => Some(LocTerm::shift(
                        *b,
                        LocTerm::hom((**s).clone(), (**inner).clone()),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::HomSumSource => match t {
                Hom(s, t2) => match &**s {
                    Sum(xs) => Some(Sum(
                        xs.iter()
                            .map(|x| LocTerm::hom(x.clone(), (**t2).clone()))
                            .collect(),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::HomSumTarget => match t {
                Hom(s, t2) => match &**t2 {
                    Sum(xs) => Some(Sum(
                        xs.iter()
                            .map(|x| LocTerm::hom((**s).clone(), x.clone()))
                            .collect(),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::R1GammaAbsorb => match t {
                Gamma(a, inner) => match &**inner {
                    Gamma(b, inner2) => {
                        if a.iter().all(|x| b.contains(x)) {
                            Some(Gamma(a.clone(), inner2.clone()))
                        } else if b.iter().all(|x| a.contains(x)) {
                            Some(Gamma(b.clone(), inner2.clone()))
                        } else {
                            None
                        }
                    }
                    _ => None,
                },
                _ => None,
            },
            RuleId::R2TorsionCompletion => match t {
                Gamma(v, inner) => match &**inner {
                    Lambda(p, inner2) if *v == self.poset.up_set(*p) => {
                        Some(Gamma(v.clone(), inner2.clone()))
                    }
                    _ => None,
                },
                Lambda(p, inner) => match &**inner {
                    Gamma(v, inner2) if *v == self.poset.up_set(*p) => {
                        Some(Lambda(*p, inner2.clone()))
                    }
                    _ => None,
                },
                _ => None,
            },
            RuleId::R3HomGammaUnit => match t {
                Hom(s, t2) => match &**s {
                    Gamma(v, r) if **r == Ring => {
                        Some(LambdaSet(v.clone(), t2.clone()))
                    }
                    _ => None,
                },
                _ => None,
            },
            RuleId::R4ClosedColocal => match t {
                LambdaSet(v, inner) => {
                    let p = self.principal_up_set(v)?;
                    Some(Lambda(p, inner.clone()))
                }
                _ => None,
            },
            RuleId::R6Orthogonal => match t {
                Hom(s, t2) => {
                    let (p, _) = self.as_generator(s)?;
                    let (q, _) = self.as_generator(t2)?;
                    if !self.poset.le(p, q) {
                        Some(Zero)
                    } else {
                        None
                    }
                }
                _ => None,
            },
            RuleId::R7SelfCompletion => match t {
                Hom(s, t2) => {
                    let (p, k) = self.as_generator(s)?;
                    if k != Cardinal::One {
                        return None;
                    }
                    let (q, kappa) = self.as_generator(t2)?;
                    if p == q {
                        Some(Adelic(
                            BTreeSet::from([p]),
                            Box::new(LocTerm::copies(kappa, Ring)),
                        ))
                    } else {
                        None
                    }
                }
                _ => None,
            },
            RuleId::R8CoverStratum => match t {
                Hom(s, t2) => {
                    let (p, k) = self.as_generator(s)?;
                    if k != Cardinal::One {
                        return None;
                    }
                    let (q, kappa) = self.as_generator(t2)?;
                    // the hypothesis: q is minimal above p
                    if self.poset.covers_of(p).contains(&q) {
                        Some(LocTerm::shift(
                            -1,
                            Adelic(
                                BTreeSet::from([p]),
                                Box::new(Adelic(
                                    BTreeSet::from([q]),
                                    Box::new(LocTerm::copies(kappa, Ring)),
                                )),
                            ),
                        ))
                    } else {
                        None
                    }
                }
                _ => None,
            },
            RuleId::R9aAdelicFold => match t {
                Lambda(p, inner) => match &**inner {
                    // a sum body still has a pending distribution step
                    LocalizeAt(q, inner2) if p == q && !matches!(&**inner2, Sum(_)) => {
                        Some(Adelic(BTreeSet::from([*p]), inner2.clone()))
                    }
                    _ => None,
                },
                _ => None,
            },
            RuleId::FunctorDistribute => match t {
                Gamma(v, inner) => match &**inner {
                    Sum(xs) => Some(Sum(
                        xs.iter()
                            .map(|x| Gamma(v.clone(), Box::new(x.clone())))
                            .collect(),
                    )),
                    _ => None,
                },
                LambdaSet(v, inner) => match &**inner {
                    Sum(xs) => Some(Sum(
                        xs.iter()
                            .map(|x| LambdaSet(v.clone(), Box::new(x.clone())))
                            .collect(),
                    )),
                    _ => None,
                },
                Lambda(p, inner) => match &**inner {
                    Sum(xs) => Some(Sum(
                        xs.iter()
                            .map(|x| Lambda(*p, Box::new(x.clone())))
                            .collect(),
                    )),
                    _ => None,
                },
                LocalizeAt(p, inner) => match &**inner {
                    Sum(xs) => Some(Sum(
                        xs.iter()
                            .map(|x| LocalizeAt(*p, Box::new(x.clone())))
                            .collect(),
                    )),
                    _ => None,
                },
                _ => None,
            },
            RuleId::R9cAdelicFactor => self.try_adelic_factor(t),
            RuleId::R9bAdelicMerge => match t {
                Sum(xs) => {
                    // merge ≥2 children `C[A^{W_k} t]` under a common
                    // additive wrapper chain `C` with identical non-nested
                    // inner term, one aggregation class, and disjoint index
                    // sets forming an antichain
                    for (i, x) in xs.iter().enumerate() {
                        let (chain, core) = peel(x);
                        let Adelic(w0, inner) = core else { continue };
                        if matches!(&**inner, Adelic(_, _)) {
                            continue;
                        }
                        let Some(class) = self.merge_class(w0) else {
                            continue;
                        };
                        let mut group = Vec::new();
                        let mut union: BTreeSet<NodeId> = BTreeSet::new();
                        let mut total = 0usize;
                        for (j, y) in xs.iter().enumerate() {
                            let (chain2, core2) = peel(y);
                            if chain2 != chain {
                                continue;
                            }
                            let Adelic(w2, inner2) = core2 else { continue };
                            if inner2 == inner && self.merge_class(w2) == Some(class) {
                                group.push(j);
                                total += w2.len();
                                union.extend(w2.iter().copied());
                            }
                        }
                        if group.len() < 2 || group[0] != i {
                            continue;
                        }
                        if union.len() != total || !self.poset.is_antichain(union.iter()) {
                            continue;
                        }
                        let merged = wrap_back(&chain, Adelic(union, inner.clone()));
                        return Some(rebuild_sum(xs, &group, merged));
                    }
                    None
                }
                _ => None,
            },
            RuleId::R9dAdelicShrink => match t {
                Adelic(w, inner) if w.len() == 1 => {
                    let p = *w.iter().next().unwrap();
                    match &**inner {
                        Adelic(w2, inner2) => {
                            let vp = self.poset.up_set(p);
                            let shrunk: BTreeSet<NodeId> =
                                w2.iter().filter(|q| vp.contains(q)).copied().collect();
                            if shrunk.len() < w2.len() {
                                Some(Adelic(
                                    w.clone(),
                                    Box::new(Adelic(shrunk, inner2.clone())),
                                ))
                            } else {
                                None
                            }
                        }
                        _ => None,
                    }
                }
                _ => None,
            },
            RuleId::R5HomCompletion => match t {
                Hom(s, t2) => {
                    let (p, k) = self.as_generator(s)?;
                    if k != Cardinal::One || t2.contains_torsion_structure() {
                        return None;
                    }
                    Some(Lambda(
                        p,
                        Box::new(LocTerm::hom(
                            LocTerm::LocalizeAt(p, Box::new(Ring)),
                            (**t2).clone(),
                        )),
                    ))
                }
                _ => None,
            },
        }
    }

    /// Innermost-leftmost redex, rules tried in priority order.
    fn find_redex(&self, t: &LocTerm, path: &mut Vec<usize>) -> Option<(Vec<usize>, RuleId)> {
        for (i, c) in t.children().into_iter().enumerate() {
            path.push(i);
            if let Some(found) = self.find_redex(c, path) {
                return Some(found);
            }
            path.pop();
        }
        for &rule in RULE_ORDER {
            if self.try_rule(rule, t).is_some() {
                return Some((path.clone(), rule));
            }
        }
        None
    }

    /// All redexes of the term (for randomized strategies).
    fn all_redexes(&self, t: &LocTerm, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, RuleId)>) {
        for (i, c) in t.children().into_iter().enumerate() {
            path.push(i);
            self.all_redexes(c, path, out);
            path.pop();
        }
        for &rule in RULE_ORDER {
            if self.try_rule(rule, t).is_some() {
                out.push((path.clone(), rule));
            }
        }
    }

    fn classify_result(&self, t: &LocTerm) -> NormalStatus {
        // collect stuck (non-normal-form) subterms
        fn scan<'t>(t: &'t LocTerm, out: &mut Vec<&'t LocTerm>) {
            match t {
                Zero | Ring | Opaque(_) => {}
                FreeCopies(_, inner) | Shift(_, inner) | Adelic(_, inner) => scan(inner, out),
                Sum(xs) | Prod(xs) => xs.iter().for_each(|x| scan(x, out)),
                other => out.push(other),
            }
        }
        let mut stuck = Vec::new();
        scan(t, &mut stuck);
        if stuck.is_empty() {
            return NormalStatus::Resolved;
        }
        // the dimension-two escape hatch: a stuck Hom out of a generator at
        // a minimal node, into generator material above it, is a flat
        // module even though no closed form exists
        let all_flat = stuck.iter().all(|s| match s {
            Hom(src, tgt) => {
                let Some((p, _)) = self.as_generator(src) else {
                    return false;
                };
                let Some((q, _)) = self.as_generator(tgt) else {
                    return false;
                };
                self.poset.height(p) == 0 && self.poset.le(p, q)
            }
            _ => false,
        });
        if all_flat {
            NormalStatus::ResolvedFlat {
                note: "every stuck Hom starts at a minimal node; the value is a flat module \
                       without an adelic closed form"
                    .to_string(),
            }
        } else {
            let sub = (*stuck[0]).clone();
            let reason = match &sub {
                Hom(src, tgt) => {
                    if let (Some((p, _)), Some((q, _))) =
                        (self.as_generator(src), self.as_generator(tgt))
                    {
                        format!(
                            "Hom between generators at `{}` ≤ `{}` spans non-adjacent strata; \
                             the cover-stratum rule requires a cover",
                            self.poset.name(p),
                            self.poset.name(q)
                        )
                    } else {
                        "no rewrite applies to this Hom".to_string()
                    }
                }
                LambdaSet(_, _) => {
                    "colocalization at a non-principal up-set has no closed form".to_string()
                }
                Gamma(_, _) => "torsion functor left unresolved".to_string(),
                Lambda(_, _) => "completion left unresolved".to_string(),
                LocalizeAt(_, _) => "localization without completion left unresolved".to_string(),
                Tensor(_, _) => "tensor left unresolved".to_string(),
                _ => "unresolved subterm".to_string(),
            };
            NormalStatus::Unresolved {
                subterm: sub,
                reason,
            }
        }
    }

    /// Deterministic innermost-leftmost normalization. Rewriting to a
    /// fixpoint alternates with the structural shift/sort
    /// canonicalization until both stabilize.
    pub fn normalize(&self, t: &LocTerm) -> Result<Normalized, LocError> {
        self.normalize_by(t, |nf, cur| {
            let mut path = Vec::new();
            nf.find_redex(cur, &mut path)
        })
    }

    /// Normalization with randomized redex selection; used for the
    /// confluence suite.
    pub fn normalize_random(
        &self,
        t: &LocTerm,
        rng: &mut crate::corpus::Rng,
    ) -> Result<Normalized, LocError> {
        use rand::Rng as _;
        self.normalize_by(t, |nf, cur| {
            let mut path = Vec::new();
            let mut redexes = Vec::new();
            nf.all_redexes(cur, &mut path, &mut redexes);
            if redexes.is_empty() {
                None
            } else {
                Some(redexes[rng.gen_range(0..redexes.len())].clone())
            }
        })
    }

    fn normalize_by(
        &self,
        t: &LocTerm,
        mut pick: impl FnMut(&Self, &LocTerm) -> Option<(Vec<usize>, RuleId)>,
    ) -> Result<Normalized, LocError> {
        self.validate(t)?;
        let mut cur = t.clone();
        let mut trace = Vec::new();
        let mut monotone = true;
        loop {
            // rewrite to a fixpoint, checking the measure per step
            while let Some((path, rule)) = pick(self, &cur) {
                let before = self.measure(&cur);
                let sub = cur.subterm(&path);
                let new_sub = self.try_rule(rule, sub).expect("redex applies");
                cur = cur.replace_at(&path, new_sub);
                if self.measure(&cur) >= before {
                    monotone = false;
                }
                trace.push(TraceStep { rule, path });
            }
            let canon = cur.canonical();
            if canon == cur {
                break;
            }
            cur = canon;
        }
        let status = self.classify_result(&cur);
        Ok(Normalized {
            term: cur,
            trace,
            status,
            measure_monotone: monotone,
        })
    }
}

/// One entry of the endomorphism-ring presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatrixEntry {
    Zero,
    Closed {
        term: LocTerm,
        /// Full-stratum form `A^{W_i} A^{W_j} R`: per-node cover sets in the
        /// normalized term are enlarged to the whole stratum, which is
        /// harmless because the outer completion kills the extra factors.
        aggregated: LocTerm,
        trace: Vec<TraceStep>,
    },
    Flat {
        term: LocTerm,
        note: String,
    },
    Unresolved {
        term: LocTerm,
        reason: String,
    },
}

/// Lower-triangular presentation of the endomorphism ring of the
/// filtration generator: entry `(row, col)` is the normalized
/// `Hom(T(col-stratum), T(row-stratum))`.
#[derive(Clone, Debug)]
pub struct RingPresentation {
    pub strata: Vec<(i64, Vec<NodeId>)>,
    pub entries: Vec<Vec<MatrixEntry>>,
}

impl RingPresentation {
    pub fn size(&self) -> usize {
        self.strata.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &MatrixEntry {
        &self.entries[row][col]
    }
}

/// Computes the triangular endomorphism-ring presentation of the
/// filtration generator for a codimension filtration.
pub fn end_ring_of_generator(
    poset: &Arc<FinitePoset>,
    phi: &SpFiltration,
) -> Result<RingPresentation, LocError> {
    if !phi.classify().codimension {
        return Err(LocError::NotCodimension);
    }
    let values = phi.finite_values();
    let strata: Vec<(i64, Vec<NodeId>)> = values
        .iter()
        .map(|&v| (v, phi.stratum(ExtInt::Fin(v))))
        .collect();
    let nf = Normalizer::new(poset, Some(phi));
    let mut entries = Vec::new();
    for (r, &(vr, _)) in strata.iter().enumerate() {
        let mut row = Vec::new();
        for (c, &(vc, _)) in strata.iter().enumerate() {
            if c > r {
                // descending strata: Hom(T(i), T(j)) = 0 for i > j
                let n = nf.normalize(&LocTerm::hom(TStratum(vc), TStratum(vr)))?;
                debug_assert_eq!(n.term, Zero);
                row.push(MatrixEntry::Zero);
                continue;
            }
            let n = nf.normalize(&LocTerm::hom(TStratum(vc), TStratum(vr)))?;
            match n.status {
                NormalStatus::Resolved => {
                    if n.term == Zero {
                        row.push(MatrixEntry::Zero);
                    } else {
                        let aggregated = aggregate_full_strata(&n.term, &strata, c, r);
                        row.push(MatrixEntry::Closed {
                            term: n.term,
                            aggregated,
                            trace: n.trace,
                        });
                    }
                }
                NormalStatus::ResolvedFlat { note } => row.push(MatrixEntry::Flat {
                    term: n.term,
                    note,
                }),
                NormalStatus::Unresolved { reason, .. } => row.push(MatrixEntry::Unresolved {
                    term: n.term,
                    reason,
                }),
            }
        }
        entries.push(row);
    }
    Ok(RingPresentation { strata, entries })
}

/// Rewrites the normalized entry into the printed full-stratum block form
/// `A^{W_col}(A^{W_row} R)` (diagonal: `A^{W} R`). The enlargement of each
/// inner cover set to the full stratum is justified by the completion at
/// the outer node killing all factors away from it.
fn aggregate_full_strata(
    term: &LocTerm,
    strata: &[(i64, Vec<NodeId>)],
    col: usize,
    row: usize,
) -> LocTerm {
    let w_col: BTreeSet<NodeId> = strata[col].1.iter().copied().collect();
    let w_row: BTreeSet<NodeId> = strata[row].1.iter().copied().collect();
    if col == row {
        return Adelic(w_col, Box::new(Ring));
    }
    let _ = term;
    Adelic(w_col, Box::new(Adelic(w_row, Box::new(Ring))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spfilt::canonical_filtrations;

    fn chain2() -> Arc<FinitePoset> {
        Arc::new(
            FinitePoset::new(
                vec!["p0".into(), "p1".into()],
                vec![("p0".into(), "p1".into())],
            )
            .unwrap(),
        )
    }

    fn chain3() -> Arc<FinitePoset> {
        Arc::new(
            FinitePoset::new(
                vec!["p0".into(), "p1".into(), "p2".into()],
                vec![("p0".into(), "p1".into()), ("p1".into(), "p2".into())],
            )
            .unwrap(),
        )
    }

    fn zwindow(primes: &[&str]) -> Arc<FinitePoset> {
        let mut names = vec!["(0)".to_string()];
        let mut covers = Vec::new();
        for p in primes {
            names.push(format!("({p})"));
            covers.push(("(0)".to_string(), format!("({p})")));
        }
        Arc::new(FinitePoset::new(names, covers).unwrap())
    }

    fn node(p: &Arc<FinitePoset>, name: &str) -> NodeId {
        p.node_by_name(name).unwrap()
    }

    #[test]
    fn r1_gamma_absorption() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let v0 = p.up_set(node(&p, "p1"));
        let v = p.up_set(node(&p, "p0"));
        let t = Gamma(v0.clone(), Box::new(Gamma(v, Box::new(Opaque("M".into())))));
        let n = nf.normalize(&t).unwrap();
        assert_eq!(n.term, Gamma(v0, Box::new(Opaque("M".into()))));
        assert!(n.trace.iter().any(|s| s.rule == RuleId::R1GammaAbsorb));
    }

    #[test]
    fn r2_torsion_completion_pair() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let top = node(&p, "p1");
        let v = p.up_set(top);
        let t = Gamma(
            v.clone(),
            Box::new(Lambda(top, Box::new(Opaque("M".into())))),
        );
        assert_eq!(
            nf.normalize(&t).unwrap().term,
            Gamma(v.clone(), Box::new(Opaque("M".into())))
        );
        let t = Lambda(top, Box::new(Gamma(v, Box::new(Opaque("M".into())))));
        assert_eq!(
            nf.normalize(&t).unwrap().term,
            Lambda(top, Box::new(Opaque("M".into())))
        );
    }

    #[test]
    fn r3_r4_colocalization_of_principal_up_set() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let top = node(&p, "p1");
        let v = p.up_set(top);
        let t = LocTerm::hom(
            Gamma(v, Box::new(Ring)),
            Opaque("M".into()),
        );
        let n = nf.normalize(&t).unwrap();
        assert_eq!(n.term, Lambda(top, Box::new(Opaque("M".into()))));
        assert!(n.trace.iter().any(|s| s.rule == RuleId::R3HomGammaUnit));
        assert!(n.trace.iter().any(|s| s.rule == RuleId::R4ClosedColocal));
    }

    #[test]
    fn r6_orthogonality_of_incomparable_generators() {
        let p = zwindow(&["2", "3"]);
        let nf = Normalizer::new(&p, None);
        let g2 = LocTerm::gamma_rp(&p, node(&p, "(2)"));
        let g3 = LocTerm::gamma_rp(&p, node(&p, "(3)"));
        let n = nf.normalize(&LocTerm::hom(g2, g3)).unwrap();
        assert_eq!(n.term, Zero);
    }

    #[test]
    fn r7_endomorphisms_are_completion() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let g = LocTerm::gamma_rp(&p, node(&p, "p0"));
        let n = nf.normalize(&LocTerm::hom(g.clone(), g)).unwrap();
        assert_eq!(
            n.term,
            Adelic(BTreeSet::from([node(&p, "p0")]), Box::new(Ring))
        );
        assert_eq!(n.status, NormalStatus::Resolved);
    }

    #[test]
    fn r7_with_formal_copies() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let g = LocTerm::gamma_rp(&p, node(&p, "p0"));
        let kappa = Cardinal::Symbol("κ".into());
        let t = LocTerm::hom(g.clone(), LocTerm::copies(kappa.clone(), g));
        let n = nf.normalize(&t).unwrap();
        assert_eq!(
            n.term,
            Adelic(
                BTreeSet::from([node(&p, "p0")]),
                Box::new(LocTerm::copies(kappa, Ring))
            )
        );
    }

    #[test]
    fn r8_cover_stratum_closed_form() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let g0 = LocTerm::gamma_rp(&p, node(&p, "p0"));
        let g1 = LocTerm::gamma_rp(&p, node(&p, "p1"));
        // Hom(Γ_p0 R_p0, Σ Γ_p1 R_p1) = A^{p0} A^{p1} R: the Σ cancels R8's Σ^{-1}
        let t = LocTerm::hom(g0, LocTerm::shift(1, g1));
        let n = nf.normalize(&t).unwrap();
        assert_eq!(
            n.term,
            Adelic(
                BTreeSet::from([node(&p, "p0")]),
                Box::new(Adelic(BTreeSet::from([node(&p, "p1")]), Box::new(Ring)))
            )
        );
    }

    #[test]
    fn hom_tphi_tphi_on_chain_gives_block_form() {
        let p = chain2();
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let nf = Normalizer::new(&p, Some(&phi));
        let n = nf.normalize(&LocTerm::hom(TPhi, TPhi)).unwrap();
        assert_eq!(n.status, NormalStatus::Resolved);
        let p0 = BTreeSet::from([node(&p, "p0")]);
        let p1 = BTreeSet::from([node(&p, "p1")]);
        let expect = Sum(vec![
            Adelic(p0.clone(), Box::new(Ring)),
            Adelic(p0, Box::new(Adelic(p1.clone(), Box::new(Ring)))),
            Adelic(p1, Box::new(Ring)),
        ])
        .canonical();
        assert_eq!(n.term, expect);
    }

    #[test]
    fn hom_descending_strata_vanishes() {
        let p = chain2();
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let nf = Normalizer::new(&p, Some(&phi));
        let n = nf
            .normalize(&LocTerm::hom(TStratum(1), TStratum(0)))
            .unwrap();
        assert_eq!(n.term, Zero);
        assert_eq!(n.status, NormalStatus::Resolved);
    }

    #[test]
    fn hom_skipping_a_stratum_is_flat_or_unresolved() {
        let p = chain3();
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let nf = Normalizer::new(&p, Some(&phi));
        let n = nf
            .normalize(&LocTerm::hom(TStratum(0), TStratum(2)))
            .unwrap();
        // p0 is minimal, so the non-adjacent Hom is flat without closed form
        assert!(matches!(n.status, NormalStatus::ResolvedFlat { .. }));

        // a non-minimal source yields a genuine Unresolved: use the chain
        // p0 < p1 < p2 < p3 and Hom(T(1), T(3))
        let p4 = Arc::new(
            FinitePoset::new(
                vec!["p0".into(), "p1".into(), "p2".into(), "p3".into()],
                vec![
                    ("p0".into(), "p1".into()),
                    ("p1".into(), "p2".into()),
                    ("p2".into(), "p3".into()),
                ],
            )
            .unwrap(),
        );
        let phi4 = canonical_filtrations(&p4).codimension.unwrap();
        let nf4 = Normalizer::new(&p4, Some(&phi4));
        let n = nf4
            .normalize(&LocTerm::hom(TStratum(1), TStratum(3)))
            .unwrap();
        match n.status {
            NormalStatus::Unresolved { reason, .. } => {
                assert!(reason.contains("non-adjacent"), "{reason}");
            }
            other => panic!("expected Unresolved, got {other:?}"),
        }
    }

    #[test]
    fn zero_absorption_through_everything() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let g = LocTerm::gamma_rp(&p, node(&p, "p0"));
        for t in [
            LocTerm::hom(Zero, g.clone()),
            LocTerm::hom(g.clone(), Zero),
            LocTerm::tensor(Zero, g.clone()),
            LocTerm::shift(3, Zero),
            Adelic(BTreeSet::from([node(&p, "p0")]), Box::new(Zero)),
            Sum(vec![]),
            LocTerm::copies(Cardinal::Symbol("κ".into()), Zero),
        ] {
            assert_eq!(nf.normalize(&t).unwrap().term, Zero);
        }
    }

    #[test]
    fn r5_fallback_on_opaque_target() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        let g = LocTerm::gamma_rp(&p, node(&p, "p1"));
        let n = nf
            .normalize(&LocTerm::hom(g, Opaque("M".into())))
            .unwrap();
        let top = node(&p, "p1");
        assert_eq!(
            n.term,
            Lambda(
                top,
                Box::new(LocTerm::hom(
                    LocalizeAt(top, Box::new(Ring)),
                    Opaque("M".into())
                ))
            )
        );
        // the residual completion-of-Hom has no closed form: surfaced
        assert!(matches!(n.status, NormalStatus::Unresolved { .. }));
        assert!(n.trace.iter().any(|s| s.rule == RuleId::R5HomCompletion));
    }

    #[test]
    fn idempotence_of_normalize() {
        let p = chain3();
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let nf = Normalizer::new(&p, Some(&phi));
        for t in [
            LocTerm::hom(TPhi, TPhi),
            LocTerm::hom(TStratum(0), TStratum(1)),
            LocTerm::hom(TStratum(0), TStratum(2)),
        ] {
            let once = nf.normalize(&t).unwrap();
            let twice = nf.normalize(&once.term).unwrap();
            assert_eq!(once.term, twice.term);
            assert!(twice.trace.is_empty(), "normal form had residual redexes");
        }
    }

    #[test]
    fn measure_decreases_along_every_run() {
        let p = chain3();
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let nf = Normalizer::new(&p, Some(&phi));
        for t in [
            LocTerm::hom(TPhi, TPhi),
            LocTerm::hom(TPhi, LocTerm::copies(Cardinal::Symbol("κ".into()), TPhi)),
            LocTerm::tensor(Ring, LocTerm::hom(TStratum(1), TStratum(2))),
        ] {
            let n = nf.normalize(&t).unwrap();
            assert!(n.measure_monotone, "measure failed to decrease for {t:?}");
        }
    }

    #[test]
    fn corpus_confluence_under_random_orders() {
        let mut rng = crate::corpus::rng(97);
        let p = chain3();
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let nf = Normalizer::new(&p, Some(&phi));
        let g0 = LocTerm::gamma_rp(&p, node(&p, "p0"));
        let corpus = vec![
            LocTerm::hom(TPhi, TPhi),
            LocTerm::hom(TStratum(0), TStratum(1)),
            LocTerm::hom(TStratum(2), TStratum(0)),
            LocTerm::hom(g0.clone(), Sum(vec![Opaque("M".into()), Opaque("N".into())])),
            LocTerm::tensor(
                LocTerm::shift(2, Ring),
                LocTerm::hom(TStratum(1), TStratum(1)),
            ),
        ];
        for t in corpus {
            let base = nf.normalize(&t).unwrap().term;
            for _ in 0..5 {
                let r = nf.normalize_random(&t, &mut rng).unwrap();
                assert_eq!(r.term, base, "confluence failed on {t:?}");
                assert!(r.measure_monotone);
            }
        }
    }

    fn random_term(
        rng: &mut crate::corpus::Rng,
        poset: &Arc<FinitePoset>,
        depth: usize,
    ) -> LocTerm {
        use rand::Rng as _;
        let node = |rng: &mut crate::corpus::Rng| NodeId(rng.gen_range(0..poset.len()));
        if depth == 0 || rng.gen_bool(0.25) {
            return match rng.gen_range(0..6) {
                0 => Ring,
                1 => Zero,
                2 => Opaque("M".into()),
                3 => TPhi,
                4 => TStratum(rng.gen_range(-1..3)),
                _ => LocTerm::gamma_rp(poset, node(rng)),
            };
        }
        match rng.gen_range(0..11) {
            0 => LocTerm::copies(
                if rng.gen_bool(0.5) {
                    Cardinal::One
                } else {
                    Cardinal::Symbol("κ".into())
                },
                random_term(rng, poset, depth - 1),
            ),
            1 => Gamma(
                poset.up_set(node(rng)),
                Box::new(random_term(rng, poset, depth - 1)),
            ),
            2 => LambdaSet(
                poset.up_set(node(rng)),
                Box::new(random_term(rng, poset, depth - 1)),
            ),
            3 => Lambda(node(rng), Box::new(random_term(rng, poset, depth - 1))),
            4 => LocalizeAt(node(rng), Box::new(random_term(rng, poset, depth - 1))),
            5 => LocTerm::shift(rng.gen_range(-2..3), random_term(rng, poset, depth - 1)),
            6 => LocTerm::hom(
                random_term(rng, poset, depth.saturating_sub(2)),
                random_term(rng, poset, depth.saturating_sub(2)),
            ),
            7 => LocTerm::tensor(
                random_term(rng, poset, depth.saturating_sub(2)),
                random_term(rng, poset, depth.saturating_sub(2)),
            ),
            8 => Sum((0..rng.gen_range(0..4))
                .map(|_| random_term(rng, poset, depth - 1))
                .collect()),
            9 => Prod((0..rng.gen_range(1..3))
                .map(|_| random_term(rng, poset, depth - 1))
                .collect()),
            _ => Adelic(
                BTreeSet::from([node(rng)]),
                Box::new(random_term(rng, poset, depth - 1)),
            ),
        }
    }

    #[test]
    fn termination_on_random_deep_terms() {
        // terms of depth ≤ 12 over posets of ≤ 10 nodes: normalization
        // halts with the measure strictly decreasing at every step
        let mut rng = crate::corpus::rng(0x7E12);
        for _ in 0..150 {
            let poset = Arc::new(crate::corpus::random_unique_min_poset(&mut rng, 10));
            let phi = canonical_filtrations(&poset).codimension;
            let nf = Normalizer::new(&poset, phi.as_ref());
            let term = random_term(&mut rng, &poset, 12);
            if nf.validate(&term).is_err() {
                continue;
            }
            let n = nf.normalize(&term).unwrap();
            assert!(n.measure_monotone, "measure violated on {term:?}");
            // idempotence of the normal form
            let again = nf.normalize(&n.term).unwrap();
            assert_eq!(again.term, n.term);
            assert!(again.trace.is_empty());
        }
    }

    #[test]
    fn confluence_on_random_deep_terms() {
        let mut rng = crate::corpus::rng(0x7E13);
        for _ in 0..120 {
            let poset = Arc::new(crate::corpus::random_unique_min_poset(&mut rng, 7));
            let phi = canonical_filtrations(&poset).codimension;
            let nf = Normalizer::new(&poset, phi.as_ref());
            let term = random_term(&mut rng, &poset, 8);
            if nf.validate(&term).is_err() {
                continue;
            }
            let base = nf.normalize(&term).unwrap().term;
            for _ in 0..5 {
                let r = nf.normalize_random(&term, &mut rng).unwrap();
                assert_eq!(r.term, base, "divergence on {term:?}");
            }
        }
    }

    #[test]
    fn end_ring_on_zwindow() {
        let p = zwindow(&["2", "3", "5"]);
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let pres = end_ring_of_generator(&p, &phi).unwrap();
        assert_eq!(pres.size(), 2);
        let generic: BTreeSet<NodeId> = [node(&p, "(0)")].into();
        let maxes: BTreeSet<NodeId> =
            ["(2)", "(3)", "(5)"].iter().map(|s| node(&p, s)).collect();
        match pres.entry(0, 0) {
            MatrixEntry::Closed { term, .. } => {
                assert_eq!(*term, Adelic(generic.clone(), Box::new(Ring)));
            }
            e => panic!("unexpected {e:?}"),
        }
        match pres.entry(1, 1) {
            MatrixEntry::Closed { term, .. } => {
                assert_eq!(*term, Adelic(maxes.clone(), Box::new(Ring)));
            }
            e => panic!("unexpected {e:?}"),
        }
        assert_eq!(*pres.entry(0, 1), MatrixEntry::Zero);
        match pres.entry(1, 0) {
            MatrixEntry::Closed { term, aggregated, .. } => {
                let expect = Adelic(
                    generic.clone(),
                    Box::new(Adelic(maxes.clone(), Box::new(Ring))),
                );
                assert_eq!(*term, expect);
                assert_eq!(*aggregated, expect);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn end_ring_on_antichain_is_single_block() {
        let p = Arc::new(
            FinitePoset::new(vec!["a".into(), "b".into()], vec![]).unwrap(),
        );
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let pres = end_ring_of_generator(&p, &phi).unwrap();
        assert_eq!(pres.size(), 1);
        let w: BTreeSet<NodeId> = p.nodes().collect();
        match pres.entry(0, 0) {
            MatrixEntry::Closed { term, .. } => {
                assert_eq!(*term, Adelic(w, Box::new(Ring)));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn end_ring_rejects_non_codimension() {
        let p = chain2();
        let phi = SpFiltration::from_function(
            p.clone(),
            vec![ExtInt::Fin(0), ExtInt::Fin(2)],
        )
        .unwrap();
        assert_eq!(
            end_ring_of_generator(&p, &phi).unwrap_err(),
            LocError::NotCodimension
        );
    }

    #[test]
    fn triangularity_zero_above_diagonal() {
        let p = chain3();
        let phi = canonical_filtrations(&p).codimension.unwrap();
        let pres = end_ring_of_generator(&p, &phi).unwrap();
        for r in 0..pres.size() {
            for c in 0..pres.size() {
                if c > r {
                    assert_eq!(*pres.entry(r, c), MatrixEntry::Zero);
                }
            }
        }
    }

    #[test]
    fn validation_rejects_bad_sets() {
        let p = chain2();
        let nf = Normalizer::new(&p, None);
        // {p0} is not an up-set (p1 above it is missing)
        let t = Gamma(BTreeSet::from([node(&p, "p0")]), Box::new(Ring));
        assert!(matches!(
            nf.validate(&t),
            Err(LocError::IllFormedTerm(_))
        ));
        // {p0, p1} is not an antichain
        let t = Adelic(
            [node(&p, "p0"), node(&p, "p1")].into(),
            Box::new(Ring),
        );
        assert!(matches!(
            nf.validate(&t),
            Err(LocError::IllFormedTerm(_))
        ));
        // TPhi without a filtration
        assert_eq!(
            nf.validate(&TPhi).unwrap_err(),
            LocError::NeedsFiltration
        );
    }
}
