//! Prints the enumeration radii analyze would use for A5(C52) and its
//! neighbors: LLL diagonal bounds and shadow representative norms.

use lattice_forge::gf5;
use lattice_forge::lattice::construction_a;
use lattice_forge::reduction::Delta;
use num_bigint::BigInt;
use num_rational::BigRational;

fn main() {
    let gen = gf5::four_negacirculant_generator(&gf5::c52_spec()).unwrap();
    let lattice = construction_a(&gen).unwrap();
    let (n1, n2) = lattice.neighbors().unwrap();
    for (name, l) in [("A5C", &lattice), ("N1", &n1), ("N2", &n2)] {
        let t0 = std::time::Instant::now();
        let (red, _) = l.enum_reduced(Delta::DEFAULT);
        let (_, bstar) = lattice_forge::reduction::gso_of_gram(&red.gram_raw());
        let prof: Vec<String> = bstar
            .iter()
            .map(|v| format!("{:.1}", lattice_forge::matrix::big_to_f64(v.numer()) / lattice_forge::matrix::big_to_f64(v.denom())))
            .collect();
        println!("{name}: reduction {:?}, gso profile {}", t0.elapsed(), prof.join(","));
        let g = red.gram_raw();
        let dmin = (0..red.n).map(|i| g[i][i].clone()).min().unwrap();
        let sd = l.shadow_decomposition().unwrap();
        let mut reps = Vec::new();
        for coset in [&sd.l1, &sd.l3] {
            let raw: BigInt = coset.shift_num.iter().map(|v| v * v).sum();
            let norm = BigRational::new(
                raw,
                &coset.shift_den * &coset.shift_den * BigInt::from(l.scale),
            );
            reps.push(norm.to_string());
        }
        println!(
            "{name}: diag_min_raw = {dmin} (norm {}), shadow rep norms = {reps:?}",
            BigRational::new(dmin.clone(), l.gram_divisor())
        );
    }
}
