//! Aisle and coaisle membership tests: support bounds, depth bounds, and
//! the width test on shifted residue fields.
//!
//! ```bash
//! cargo run --example aisle_membership
//! ```

use silt_lab::complex::Complex;
use silt_lab::extint::ExtInt;
use silt_lab::invariants::{in_aisle_u, in_coaisle_v, in_y, Window};
use silt_lab::ring::{Field, MonomialRing};
use silt_lab::spfilt::canonical_filtrations;
use std::sync::Arc;

fn main() {
    let w = Window::new(Arc::new(MonomialRing::polynomial(Field::Q, &["x", "y"])));
    let phi = canonical_filtrations(w.poset()).height;
    let r = Complex::unit(w.ring().clone());

    println!("height filtration on the window of {}:", w.ring().describe());
    println!("  R in the support aisle: {}", in_aisle_u(&w, &r, &phi).unwrap());
    println!("  R in the depth coaisle: {}", in_coaisle_v(&w, &r, &phi).unwrap());
    println!("  R in the width aisle:   {}", in_y(&w, &r, &phi).unwrap());

    // the width aisle detects the exact shift at which a residue field
    // enters: the threshold is the filtration value of its prime
    println!("\nshifted residue fields (s = internal shift):");
    for q in w.poset().nodes() {
        let kq = Complex::residue_field(w.ring().clone(), w.poset().label(q).unwrap());
        let fq = phi.value(q);
        let mut threshold = None;
        for s in -4..=4 {
            if in_y(&w, &kq.shift(s), &phi).unwrap() {
                threshold = Some(s);
                break;
            }
        }
        println!(
            "  κ({}) enters at shift {:?}; f({}) = {}",
            w.poset().name(q),
            threshold,
            w.poset().name(q),
            fq
        );
        assert_eq!(threshold.map(ExtInt::Fin), Some(fq));
    }
}
