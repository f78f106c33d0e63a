//! Windows of prime spectra as finite posets: monomial-prime windows of
//! quotient rings, heights, catenarity, and codimension-function solving.
//!
//! ```bash
//! cargo run --example spec_window
//! ```

use silt_lab::poset::{spec_window, FinitePoset};
use silt_lab::ring::{Field, MonomialRing};

fn main() {
    // the full Boolean lattice: window of a polynomial ring
    let plane = MonomialRing::polynomial(Field::Q, &["x", "y"]);
    let window = spec_window(&plane);
    println!("window of {}:", plane.describe());
    for p in window.nodes() {
        println!("  {} at window height {}", window.name(p), window.height(p));
    }

    // a quotient: only the monomial primes containing the relations remain
    let quotient = MonomialRing::new(
        Field::Q,
        &["x", "y", "z"],
        &[&[(0, 1), (1, 1)], &[(0, 1), (2, 1)]], // xy, xz
        &[],
    )
    .unwrap();
    let window = spec_window(&quotient);
    println!("\nwindow of {} ({} primes):", quotient.describe(), window.len());
    for p in window.nodes() {
        println!("  {}", window.name(p));
    }

    // codimension functions solve on catenary posets and normalize each
    // component's minimum to zero
    let model = FinitePoset::new(
        vec!["m0".into(), "a".into(), "b".into(), "c".into()],
        vec![
            ("m0".into(), "a".into()),
            ("m0".into(), "b".into()),
            ("b".into(), "c".into()),
        ],
    )
    .unwrap();
    println!("\n4-node model: catenary = {}", model.is_catenary().is_ok());
    let d = model.codimension_functions().unwrap();
    for p in model.nodes() {
        println!("  d({}) = {} (height {})", model.name(p), d.values[p.0], model.height(p));
    }

    // claimed covers that are not transitively reduced still support the
    // diagnostic checks; here the inconsistency surfaces as a witness
    let diamond = FinitePoset::from_claimed_covers(
        vec!["p".into(), "q".into(), "r".into()],
        vec![
            ("p".into(), "q".into()),
            ("p".into(), "r".into()),
            ("r".into(), "q".into()),
        ],
    )
    .unwrap();
    match diamond.is_catenary() {
        Ok(()) => println!("\ndiamond: catenary"),
        Err(w) => println!(
            "\ndiamond: not catenary — chains of lengths {} and {} between {} and {}",
            w.short_chain.len() - 1,
            w.long_chain.len() - 1,
            diamond.name(w.lower),
            diamond.name(w.upper),
        ),
    }
    println!(
        "diamond codimension solver: {:?}",
        diamond.codimension_functions().err().map(|e| e.to_string())
    );
}
