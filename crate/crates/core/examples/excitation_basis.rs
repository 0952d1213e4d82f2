//! Excitation strings: canonical ordering signs, compact keys, and the
//! map back to determinants.

use exspar::exbasis::{to_determinant, BasisSpec};

fn main() -> exspar::Result<()> {
    // three occupied and three virtual orbitals, up to double excitations
    let spec = BasisSpec::new(3, 3, 2, 1)?;
    println!("{} orbitals, {} bits per key", spec.n_orb(), spec.key_bits());
    for k in 0..=spec.m {
        println!("rank {k}: {} strings", spec.dimension(k));
    }

    // c†_3 c_0 c†_5 c_2 written out of order picks up a sign
    let (s, sign) = spec.canonicalize(&[0, 2], &[3, 5])?;
    println!("canonical form {s} with sign {sign:+}");

    let key = spec.encode(&s);
    assert_eq!(spec.decode(key)?, s);
    println!("key {key:#x} decodes back to {s}");

    let (det, phase) = to_determinant(&s, &spec)?;
    let occ: Vec<usize> = det.occupied().collect();
    println!("as a determinant: occupied {occ:?}, phase {phase:+}");

    let all = spec.strings(0..=spec.m);
    assert!(all.windows(2).all(|w| spec.encode(&w[0]) < spec.encode(&w[1])));
    println!("{} strings enumerated in key order", all.len());
    Ok(())
}
