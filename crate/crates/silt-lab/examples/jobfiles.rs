//! Driving the library through the jobfile grammar: the same interface the
//! `silt-lab` binary exposes.
//!
//! ```bash
//! cargo run --example jobfiles
//! ```

use silt_lab::job::{parse_job, run, Options};

fn main() {
    let jobs = [
        (
            "classify the height filtration of k[x,y]",
            "[ring]\n\
             poly(Q; x, y)\n\
             [filtration]\n\
             f (0) = 0\n\
             f (x) = 1\n\
             f (y) = 1\n\
             f (x,y) = 2\n\
             [task]\n\
             classify\n",
        ),
        (
            "depth of the maximal ideal over the socle ring",
            "[ring]\n\
             poly(Q; x, y)\n\
             rel x^2\n\
             rel x*y\n\
             [task]\n\
             depth\n\
             ideal = x, y\n",
        ),
        (
            "endomorphism matrix over the integer window",
            "[ring]\n\
             Z primes = 2, 3\n\
             [task]\n\
             end-ring\n",
        ),
        (
            "rewrite trace for Hom(TPhi, TPhi) on a chain",
            "[poset]\n\
             node p0\n\
             node p1\n\
             cover p0 < p1\n\
             [task]\n\
             normalize\n\
             term = hom(TPhi, TPhi)\n",
        ),
    ];

    for (title, text) in jobs {
        println!("=== {title} ===");
        let job = parse_job(text).expect("jobfile parses");
        let report = run(&job, &Options::default()).expect("task succeeds");
        println!("{}", report.human);
        println!();
    }

    // the structured format is canonical: emit → parse → emit is stable
    let job = parse_job("[ring]\npoly(Q; x, y)\n[task]\ngrade-filtration\n").unwrap();
    let report = run(&job, &Options::default()).unwrap();
    let text = report.structured();
    let reparsed = silt_lab::report::parse_structured(&text).unwrap();
    assert_eq!(silt_lab::report::emit_structured(&reparsed), text);
    println!("=== structured output (round-trip stable) ===");
    print!("{text}");
}
