use lattice_forge::gf5;
use lattice_forge::lattice::construction_a;
use lattice_forge::reduction::{gso_of_gram, Delta};
fn main() {
    let gen = gf5::four_negacirculant_generator(&gf5::c52_spec()).unwrap();
    let l = construction_a(&gen).unwrap();
    let (red, _) = l.lll_reduced(Delta::DEFAULT);
    let (_, b) = gso_of_gram(&red.gram_raw());
    let p: Vec<String> = b.iter().map(|v| format!("{:.2}", lattice_forge::matrix::big_to_f64(v.numer())/lattice_forge::matrix::big_to_f64(v.denom()))).collect();
    println!("{}", p.join(","));
}
