//! Timing probe: full short-vector enumeration of A5(C52) at norm 5.

use lattice_forge::enumeration::{enumerate_lattice, EnumOptions};
use lattice_forge::gf5;
use lattice_forge::lattice::construction_a;
use lattice_forge::reduction::Delta;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::time::Instant;

fn main() {
    let spec = gf5::c52_spec();
    let gen = gf5::four_negacirculant_generator(&spec).unwrap();
    let lat = construction_a(&gen).unwrap();
    let t0 = Instant::now();
    let (red, _) = lat.lll_reduced(Delta::DEFAULT);
    let g = red.gram_raw();
    let diag: Vec<String> = (0..red.n).map(|i| g[i][i].to_string()).collect();
    eprintln!("lll: {:?}, diag: {}", t0.elapsed(), diag.join(","));

    let t1 = Instant::now();
    let opts = EnumOptions {
        keep_vectors: true,
        ..EnumOptions::default()
    };
    let radius = BigRational::from_integer(BigInt::from(5));
    let report = enumerate_lattice(&lat, &radius, &opts).unwrap();
    eprintln!("enum: {:?}, nodes: {}", t1.elapsed(), report.nodes);
    for (k, c) in &report.counts {
        println!("norm {}/{}: {}", k, report.divisor, c);
    }
    let vs = report.vectors.as_ref().unwrap();
    let with5 = vs
        .iter()
        .filter(|v| v.num.iter().any(|&a| a.abs() == 5 * v.den))
        .count();
    println!("retained: {}, with a +-5 coordinate: {}", vs.len(), with5);
}
