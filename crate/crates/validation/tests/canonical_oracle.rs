mod common;

use std::f64::consts::FRAC_PI_4;

use lnnqec::gates::named;
use lnnqec::{canonical_invariants, u_d, CanonicalClass, Unitary2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_local(rng: &mut ChaCha8Rng) -> Unitary2 {
    Unitary2::zyz(
        rng.random_range(-3.2..3.2),
        rng.random_range(0.0..3.2),
        rng.random_range(-3.2..3.2),
    )
}

fn assert_close(lib: [f64; 3], brute: [f64; 3], what: &str) {
    for k in 0..3 {
        assert!(
            (lib[k] - brute[k]).abs() < 1e-6,
            "{what}: library {lib:?} vs brute force {brute:?}"
        );
    }
}

#[test]
fn standard_gates_match_brute_force() {
    let gates = [
        ("CNOT", named::cnot()),
        ("CZ", named::cz()),
        ("SWAP", named::swap()),
        ("CNOT*SWAP", named::cnot() * named::swap()),
    ];
    for (name, u) in gates {
        assert_close(
            canonical_invariants(&u).unwrap().as_array(),
            common::brute_force_class(&u),
            name,
        );
    }
}

#[test]
fn dressed_chamber_points_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..12 {
        // Near the identity the invariants flatten and the grid search loses
        // resolution, so stay clear of it.
        let a = rng.random_range(0.15..FRAC_PI_4);
        let b = rng.random_range(0.05..a);
        let c = rng.random_range(-b..b);
        let l = random_local(&mut rng).kron(&random_local(&mut rng));
        let r = random_local(&mut rng).kron(&random_local(&mut rng));
        let u = l * (u_d(a, b, c) * r);
        let lib = canonical_invariants(&u).unwrap();
        assert_close(lib.as_array(), common::brute_force_class(&u), "dressed point");
        assert!(lib.distance(&CanonicalClass::reduce(a, b, c)) < 1e-8);
    }
}

#[test]
fn makhlin_invariants_agree_for_equivalent_gates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = u_d(0.5, 0.3, 0.2);
    let g = common::makhlin(&u);
    let l = random_local(&mut rng).kron(&random_local(&mut rng));
    let h = common::makhlin(&(l * u));
    assert!((g.0 - h.0).norm() < 1e-12 && (g.1 - h.1).norm() < 1e-12);
    // Mirror images differ through G1.
    let m = common::makhlin(&u_d(0.5, 0.3, -0.2));
    assert!((g.0 - m.0).norm() > 1e-3);
}
