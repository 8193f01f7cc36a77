//! Brute-force canonical-class oracle shared by integration tests.
//!
//! Works only from Makhlin invariants and a grid search over the Weyl
//! chamber, without touching the library's eigen-decomposition path.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_4;

use lnnqec::{u_d, Unitary4, C64};
use nalgebra::Matrix4;

fn magic() -> Matrix4<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (C64::new(r, 0.0), C64::new(0.0, 0.0), C64::new(0.0, r));
    Matrix4::new(o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i)
}

/// `(G1, G2)`; equal for two gates iff they are locally equivalent.
pub fn makhlin(u: &Unitary4) -> (C64, C64) {
    let q = magic();
    let ub = q.adjoint() * u.matrix() * q;
    let m = ub.transpose() * ub;
    let det = u.matrix().determinant();
    let tr = m.trace();
    let tr2 = (m * m).trace();
    (tr * tr / (16.0 * det), (tr * tr - tr2) / (4.0 * det))
}

fn gap(a: (C64, C64), b: (C64, C64)) -> f64 {
    (a.0 - b.0).norm_sqr() + (a.1 - b.1).norm_sqr()
}

fn in_chamber(p: [f64; 3]) -> bool {
    let [a, b, c] = p;
    a <= FRAC_PI_4 + 1e-12 && b <= a + 1e-12 && c.abs() <= b + 1e-12 && b >= -1e-12
}

/// Chamber point whose `u_d` has the same invariants as `u`, by grid search
/// followed by pattern search over all 26 neighbour directions.
pub fn brute_force_class(u: &Unitary4) -> [f64; 3] {
    let target = makhlin(u);
    let n = 48;
    let h = FRAC_PI_4 / n as f64;
    let mut best = ([0.0; 3], f64::INFINITY);
    for i in 0..=n {
        for j in 0..=i {
            for k in -(j as i64)..=j as i64 {
                let p = [i as f64 * h, j as f64 * h, k as f64 * h];
                let g = gap(makhlin(&u_d(p[0], p[1], p[2])), target);
                if g < best.1 {
                    best = (p, g);
                }
            }
        }
    }
    let dirs: Vec<[f64; 3]> = (0..27)
        .map(|k| [(k % 3) as f64 - 1.0, ((k / 3) % 3) as f64 - 1.0, (k / 9) as f64 - 1.0])
        .filter(|d| d != &[0.0; 3])
        .collect();
    let mut step = h;
    while step > 1e-13 {
        let mut moved = false;
        for d in &dirs {
            let p = [
                best.0[0] + step * d[0],
                best.0[1] + step * d[1],
                best.0[2] + step * d[2],
            ];
            if !in_chamber(p) {
                continue;
            }
            let g = gap(makhlin(&u_d(p[0], p[1], p[2])), target);
            if g < best.1 {
                best = (p, g);
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    // On the a = pi/4 face, c and -c name the same class.
    if FRAC_PI_4 - best.0[0] < 1e-6 {
        best.0[2] = best.0[2].abs();
    }
    best.0
}
