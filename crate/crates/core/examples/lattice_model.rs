//! Build the toy lattice, inspect its integrals, and round-trip the
//! integral file format.

use exspar::model::{dump_integrals, parse_integrals, IntegralClass, IntegralSet, ModelConfig};

fn main() -> exspar::Result<()> {
    let cfg = ModelConfig {
        dim: 2,
        n_sites: 4,
        r_c: 1.5,
        ..ModelConfig::default()
    };
    let ints = cfg.build_lattice()?;
    println!(
        "{} sites, {} orbitals ({} occupied), R_c = {}",
        ints.n_sites(),
        ints.n_orb(),
        ints.n_occ(),
        ints.r_c()
    );

    let (i, a) = (0, ints.n_occ());
    println!("f(hole 0) = {:.3}, f(particle 0) = {:.3}", ints.f(i, i), ints.f(a, a));
    println!("V(on-site exchange) = {:.4}, W = {:.4}", ints.v(a, i, i, a), ints.w(a, i, i, a));
    println!("Fock rebuilt from t and V deviates by {:.1e}", ints.fock_consistency());

    let mut counts = [0usize; 3];
    for (k, _, _) in ints.two_body_entries() {
        let [p, q, r, s] = k.map(|x| x as usize);
        counts[match IntegralSet::class_of(p, q, r, s) {
            IntegralClass::DensityDensity => 0,
            IntegralClass::ChargeDipole => 1,
            IntegralClass::DipoleDipole => 2,
        }] += 1;
    }
    println!("two-body orbits: {} density, {} charge-dipole, {} dipole-dipole", counts[0], counts[1], counts[2]);

    let text = dump_integrals(&ints);
    let back = parse_integrals(&text)?;
    assert_eq!(back.n_orb(), ints.n_orb());
    assert!((back.f(a, a) - ints.f(a, a)).abs() < 1e-12);
    println!("dump is {} lines and parses back", text.lines().count());

    let ring = ModelConfig { n_sites: 6, ..ModelConfig::default() }.build_crystal()?;
    println!("ring of 6: distance(0, 5) = {}", ring.distance(0, 5));
    Ok(())
}
