//! Depth and width by the Koszul route, cross-checked by the Čech route,
//! depth over specialization-closed sets, and the grade filtration.
//!
//! ```bash
//! cargo run --example depth_width
//! ```

use silt_lab::complex::Complex;
use silt_lab::invariants::{
    depth, depth_cech_route, depth_over_set, grade_filtration, width, Window,
};
use silt_lab::ring::{Field, Monomial, MonomialRing};
use std::collections::BTreeSet;
use std::sync::Arc;

fn main() {
    let w = Window::new(Arc::new(MonomialRing::polynomial(Field::Q, &["x", "y"])));
    let r = Complex::unit(w.ring().clone());
    let m = vec![Monomial::variable(2, 0), Monomial::variable(2, 1)];

    println!("over {}:", w.ring().describe());
    println!("  depth((x,y), R) = {}", depth(&r, &m).unwrap());
    println!("  depth via Čech  = {}", depth_cech_route(&r, &m).unwrap());
    println!("  width((x,y), R) = {}", width(&r, &m).unwrap());

    // shift laws
    let s = r.shift(1);
    println!("  depth on Σ R = {}", depth(&s, &m).unwrap());
    println!("  width on Σ R = {}", width(&s, &m).unwrap());

    // depth over an up-set of window primes is the minimum of local depths
    let all: BTreeSet<_> = w.poset().nodes().collect();
    let top: BTreeSet<_> = [w.poset().node_by_name("(x,y)").unwrap()].into();
    println!("  depth over {{(x,y)}} = {}", depth_over_set(&w, &r, &top).unwrap());
    println!("  depth over the window = {}", depth_over_set(&w, &r, &all).unwrap());
    println!(
        "  depth over ∅ = {}",
        depth_over_set(&w, &r, &BTreeSet::new()).unwrap()
    );

    // a non-Cohen-Macaulay quotient: grade drops strictly below height
    let q = Window::new(Arc::new(
        MonomialRing::new(Field::Q, &["x", "y"], &[&[(0, 2)], &[(0, 1), (1, 1)]], &[]).unwrap(),
    ));
    let g = grade_filtration(&q).unwrap();
    println!("\ngrade filtration of {}:", q.ring().describe());
    for p in q.poset().nodes() {
        println!(
            "  grade({}) = {} (window height {})",
            q.poset().name(p),
            g.value(p),
            q.poset().height(p)
        );
    }
    println!("  slice: {} (grade is not strictly increasing)", g.classify().slice);
}
