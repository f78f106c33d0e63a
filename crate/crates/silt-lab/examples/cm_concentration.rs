//! The Cohen–Macaulay concentration check: local cohomology of the local
//! proxy at a window prime should live in the single degree given by the
//! prime's window height.
//!
//! ```bash
//! cargo run --example cm_concentration
//! ```

use silt_lab::invariants::{cm_concentration, Window};
use silt_lab::ring::{Field, MonomialRing};
use std::sync::Arc;

fn main() {
    // polynomial rings pass at every window prime
    let w = Window::new(Arc::new(MonomialRing::polynomial(Field::Q, &["x", "y", "z"])));
    println!("{}:", w.ring().describe());
    for p in w.poset().nodes() {
        let rep = cm_concentration(&w, p).unwrap();
        println!(
            "  {}: degrees {:?} (window height {}) — concentrated: {}",
            rep.prime, rep.nonzero_degrees, rep.window_height, rep.concentrated
        );
    }

    // the quotient by (xy, xz) fails exactly at the top: depth 1 < dimension 2
    let q = Window::new(Arc::new(
        MonomialRing::new(
            Field::Q,
            &["x", "y", "z"],
            &[&[(0, 1), (1, 1)], &[(0, 1), (2, 1)]],
            &[],
        )
        .unwrap(),
    ));
    println!("\n{}:", q.ring().describe());
    for p in q.poset().nodes() {
        let rep = cm_concentration(&q, p).unwrap();
        println!(
            "  {}: degrees {:?} (window height {}) — concentrated: {}",
            rep.prime, rep.nonzero_degrees, rep.window_height, rep.concentrated
        );
    }
}
