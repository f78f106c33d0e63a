//! Sp-filtrations: the function/level-family bijection, classification
//! flags with witnesses, canonical filtrations, and pullbacks.
//!
//! ```bash
//! cargo run --example classify_filtration
//! ```

use silt_lab::extint::ExtInt;
use silt_lab::poset::FinitePoset;
use silt_lab::spfilt::{canonical_filtrations, OutsidePolicy, SpFiltration};
use std::collections::BTreeMap;
use std::sync::Arc;

fn main() {
    let chain = Arc::new(
        FinitePoset::new(
            vec!["p0".into(), "p1".into(), "p2".into()],
            vec![("p0".into(), "p1".into()), ("p1".into(), "p2".into())],
        )
        .unwrap(),
    );

    // the canonical encoding is the order-preserving function
    let phi = SpFiltration::from_function(
        chain.clone(),
        vec![ExtInt::Fin(0), ExtInt::Fin(2), ExtInt::Fin(3)],
    )
    .unwrap();
    println!("f = {:?}", phi.function());
    for n in -1..4 {
        let level: Vec<&str> = phi.level(n).iter().map(|&p| chain.name(p)).collect();
        println!("  Φ({n}) = {{{}}}", level.join(", "));
    }

    // classification: slice but not weak Cousin because of the gap at p0 ⋖ p1
    let flags = phi.classify();
    println!(
        "slice={} weak_cousin={} strong_cousin={} codimension={}",
        flags.slice, flags.weak_cousin, flags.strong_cousin, flags.codimension
    );
    for (flag, witness) in &flags.witnesses {
        println!("  witness for {flag}: {witness:?}");
    }

    // round trip through the level-family view
    let table = phi.level_table();
    let back = SpFiltration::from_levels(chain.clone(), &table, OutsidePolicy::All).unwrap();
    println!("level-family round trip identical: {}", back == phi);

    // a level table with the clamp policy produces sentinels
    let mut levels = BTreeMap::new();
    levels.insert(0, phi.level(0));
    let clamped = SpFiltration::from_levels(chain.clone(), &levels, OutsidePolicy::Clamp).unwrap();
    println!("clamped f = {:?}", clamped.function());

    // canonical filtrations: height always, codimension when solvable
    let canon = canonical_filtrations(&chain);
    println!("height filtration f = {:?}", canon.height.function());
    println!(
        "codimension filtration present: {}",
        canon.codimension.is_some()
    );

    // pullback along a two-sheeted cover with antichain fibers
    let double = Arc::new(
        FinitePoset::new(
            vec!["a0".into(), "a1".into(), "a2".into(), "b0".into(), "b1".into(), "b2".into()],
            vec![
                ("a0".into(), "a1".into()),
                ("a1".into(), "a2".into()),
                ("b0".into(), "b1".into()),
                ("b1".into(), "b2".into()),
            ],
        )
        .unwrap(),
    );
    let g = double
        .nodes()
        .map(|x| {
            let target = &double.name(x)[1..];
            (x, chain.node_by_name(&format!("p{target}")).unwrap())
        })
        .collect();
    let pulled = canon.height.pullback(double.clone(), &g).unwrap();
    println!(
        "pullback of the height filtration is slice: {}",
        pulled.classify().slice
    );
}
