//! The localization–completion rewrite engine: normalizing Hom-expressions
//! between shifted local-cohomology generators, and the triangular
//! endomorphism-ring presentation.
//!
//! ```bash
//! cargo run --example rewrite_end_ring
//! ```

use silt_lab::arith::{z_window_filtration, z_window_poset};
use silt_lab::loccalc::{end_ring_of_generator, LocTerm, MatrixEntry, Normalizer};
use silt_lab::poset::FinitePoset;
use silt_lab::spfilt::canonical_filtrations;
use std::sync::Arc;

fn main() {
    // a chain p0 ⋖ p1 with its codimension filtration
    let chain = Arc::new(
        FinitePoset::new(
            vec!["p0".into(), "p1".into()],
            vec![("p0".into(), "p1".into())],
        )
        .unwrap(),
    );
    let phi = canonical_filtrations(&chain).codimension.unwrap();
    let nf = Normalizer::new(&chain, Some(&phi));

    let term = LocTerm::hom(LocTerm::TPhi, LocTerm::TPhi);
    let n = nf.normalize(&term).unwrap();
    println!("normalize Hom(TPhi, TPhi) on the chain:");
    println!("  {}", n.term.render(&chain));
    println!("  {} rewrite steps, measure monotone: {}", n.trace.len(), n.measure_monotone);

    // descending strata vanish
    let zero = nf
        .normalize(&LocTerm::hom(LocTerm::TStratum(1), LocTerm::TStratum(0)))
        .unwrap();
    println!("normalize Hom(T(1), T(0)) = {}", zero.term.render(&chain));

    // a single endomorphism block is the completed local ring
    let g = LocTerm::gamma_rp(&chain, chain.node_by_name("p1").unwrap());
    let end = nf.normalize(&LocTerm::hom(g.clone(), g)).unwrap();
    println!("normalize End(Γ_p1 R_p1) = {}", end.term.render(&chain));

    // the triangular presentation over the integer window {2, 3, 5}
    let poset = z_window_poset(&[2, 3, 5]).unwrap();
    let phi = z_window_filtration(&poset);
    let pres = end_ring_of_generator(&poset, &phi).unwrap();
    println!("\nendomorphism matrix over the integer window {{2,3,5}}:");
    for r in 0..pres.size() {
        let row: Vec<String> = (0..pres.size())
            .map(|c| match pres.entry(r, c) {
                MatrixEntry::Zero => "0".to_string(),
                MatrixEntry::Closed { term, .. } => term.render(&poset),
                MatrixEntry::Flat { .. } => "[flat]".to_string(),
                MatrixEntry::Unresolved { .. } => "[unresolved]".to_string(),
            })
            .collect();
        println!("  [ {} ]", row.join("  |  "));
    }

    // non-adjacent strata have no closed form; the engine says so
    let chain3 = Arc::new(
        FinitePoset::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec![("q0".into(), "q1".into()), ("q1".into(), "q2".into())],
        )
        .unwrap(),
    );
    let phi3 = canonical_filtrations(&chain3).codimension.unwrap();
    let nf3 = Normalizer::new(&chain3, Some(&phi3));
    let skip = nf3
        .normalize(&LocTerm::hom(LocTerm::TStratum(0), LocTerm::TStratum(2)))
        .unwrap();
    println!("\nnormalize Hom(T(0), T(2)) on a 3-chain: {:?}", skip.status);
}
