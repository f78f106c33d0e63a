//! Truncated p-adic arithmetic and Prüfer endomorphism towers, plus the
//! numeric verification of the integer-window endomorphism matrix.
//!
//! ```bash
//! cargo run --example padic_towers
//! ```

use silt_lab::arith::{
    end_prufer, hom_orthogonality, verify_end_matrix_z, PruferTruncation, TruncatedPadic,
};

fn main() {
    // residue-tower arithmetic in Z/3^4
    let a = TruncatedPadic::new(3, 4, 35).unwrap();
    let b = TruncatedPadic::new(3, 4, 61).unwrap();
    println!("in Z/3^4: 35 + 61 = {}, 35 * 61 = {}", a.add(&b).rep, a.mul(&b).rep);
    println!("reduced to level 2: {}", a.mul(&b).reduce(2).rep);

    // Prüfer truncations: p^k kills everything, inclusions are injective
    let x = PruferTruncation::new(3, 2, 4).unwrap();
    println!("\n4/9 scaled by 9: {} (annihilated)", x.scale(9).num);
    println!("4/9 included into level 3: {}/27", x.include(3).unwrap().num);

    // endomorphism rings reproduce Z/p^k compatibly across levels
    for level in 1..=4 {
        let e = end_prufer(2, level).unwrap();
        println!(
            "End(Prüfer_2, level {level}): order {} — ring matches Z/2^{level}: {}",
            e.order(),
            e.matches_truncated_padic()
        );
    }

    // coprime torsion: all homs vanish
    println!("\nhoms between coprime Prüfer truncations:");
    for (p, q) in [(2u64, 3u64), (3, 5), (5, 2)] {
        println!("  |Hom({p}-Prüfer, {q}-Prüfer)| at level 4: {}", hom_orthogonality(p, q, 4).unwrap());
    }
    println!("  |Hom(3-Prüfer, 3-Prüfer)| at level 2: {}", hom_orthogonality(3, 3, 2).unwrap());

    // every checkable block of the endomorphism matrix at truncation level 4
    let report = verify_end_matrix_z(&[2, 3, 5], 4).unwrap();
    println!("\nendomorphism matrix over {{2,3,5}} at level 4:");
    for check in &report.checks {
        println!(
            "  {}: {} — {}",
            check.block,
            if check.matched { "matched" } else { "MISMATCH" },
            check.expected
        );
    }
    println!("all blocks matched: {}", report.all_matched());
}
