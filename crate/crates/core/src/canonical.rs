//! Canonical (KAK) coordinates of two-qubit gates, local equivalence, and
//! synthesis of a target gate from repeated uses of a fixed interaction.
//!
//! Every two-qubit unitary can be written `(A ⊗ B) · u_d(a, b, c) · (C ⊗ D)`
//! with `u_d(a, b, c) = exp(i(a XX + b YY + c ZZ))`. The triple `(a, b, c)`
//! is unique once folded into the chamber
//! `pi/4 >= a >= b >= |c|`, with `c >= 0` whenever `a = pi/4`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::unitary::{c, Unitary2, Unitary4, C64, UNITARITY_TOL};

/// Snapping distance used when folding coordinates onto chamber faces.
const SNAP: f64 = 1e-9;

/// `exp(i(a XX + b YY + c ZZ))` in closed form.
pub fn u_d(a: f64, b: f64, cz: f64) -> Unitary4 {
    let ep = C64::from_polar(1.0, cz);
    let em = C64::from_polar(1.0, -cz);
    let (s1, c1) = (a - b).sin_cos();
    let (s2, c2) = (a + b).sin_cos();
    let i = c(0.0, 1.0);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = ep * c1;
    m[(3, 3)] = ep * c1;
    m[(0, 3)] = i * ep * s1;
    m[(3, 0)] = i * ep * s1;
    m[(1, 1)] = em * c2;
    m[(2, 2)] = em * c2;
    m[(1, 2)] = i * em * s2;
    m[(2, 1)] = i * em * s2;
    Unitary4::from_matrix_unchecked(m)
}

/// Chamber coordinates of a two-qubit gate's local-equivalence class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalClass {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
}

fn fold_quarter(x: f64) -> f64 {
    // Into (-pi/4, pi/4].
    let mut y = x - FRAC_PI_2 * (x / FRAC_PI_2).round();
    if (y + FRAC_PI_4).abs() < SNAP || (y - FRAC_PI_4).abs() < SNAP {
        y = FRAC_PI_4;
    }
    if y.abs() < 1e-13 {
        y = 0.0;
    }
    y
}

impl CanonicalClass {
    /// Folds arbitrary coordinates into the chamber.
    pub fn reduce(a: f64, b: f64, cz: f64) -> Self {
        let mut v = [fold_quarter(a), fold_quarter(b), fold_quarter(cz)];
        v.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
        let [mut a, mut b, mut cz] = v;
        if a < 0.0 {
            a = -a;
            cz = -cz;
        }
        if b < 0.0 {
            b = -b;
            cz = -cz;
        }
        if (a - FRAC_PI_4).abs() < SNAP {
            a = FRAC_PI_4;
            cz = cz.abs();
        }
        if cz == 0.0 {
            cz = 0.0; // drop a negative zero
        }
        Self {
            alpha_x: a,
            alpha_y: b,
            alpha_z: cz,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha_x, self.alpha_y, self.alpha_z]
    }

    /// Largest componentwise difference.
    pub fn distance(&self, other: &CanonicalClass) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_local(&self, tol: f64) -> bool {
        self.as_array().iter().all(|x| x.abs() <= tol)
    }
}

impl std::fmt::Display for CanonicalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            pi_fraction(self.alpha_x),
            pi_fraction(self.alpha_y),
            pi_fraction(self.alpha_z)
        )
    }
}

/// Renders an angle as a small multiple of pi when it is one.
pub fn pi_fraction(x: f64) -> String {
    if x.abs() < 1e-9 {
        return "0".into();
    }
    for den in [1u32, 2, 3, 4, 6, 8, 12, 16] {
        let k = x * f64::from(den) / PI;
        let kr = k.round();
        if kr != 0.0 && (k - kr).abs() < 1e-7 {
            let sign = if kr < 0.0 { "-" } else { "" };
            let num = kr.abs() as i64;
            let num = if num == 1 { String::new() } else { num.to_string() };
            return if den == 1 {
                format!("{sign}{num}pi")
            } else {
                format!("{sign}{num}pi/{den}")
            };
        }
    }
    format!("{x:.6}")
}

/// Columns are the magic basis states
/// `(|00>+|11>)/√2, i(|01>+|10>)/√2, (|01>-|10>)/√2, i(|00>-|11>)/√2`.
fn magic_basis() -> Matrix4<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (z, r, i) = (c(0.0, 0.0), c(h, 0.0), c(0.0, h));
    Matrix4::new(
        r, z, z, i, //
        z, i, r, z, //
        z, i, -r, z, //
        r, z, z, -i,
    )
}

/// Eigenvalues of a unitary symmetric matrix. Its real and imaginary parts
/// are commuting real symmetric matrices, so a generic real combination of
/// them has the shared orthogonal eigenbasis.
fn symmetric_unitary_eigenvalues(m: &Matrix4<C64>) -> [C64; 4] {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let mut best = ([c(0.0, 0.0); 4], f64::INFINITY);
    for (k1, k2) in [
        (1.0, 0.0),
        (0.7219, 0.4137),
        (0.3307, 0.9437),
        (0.8341, -0.5516),
        (0.1234, 0.5678),
    ] {
        let eig = SymmetricEigen::new(re * k1 + im * k2);
        let o = eig.eigenvectors.map(|x| c(x, 0.0));
        let d = o.transpose() * m * o;
        let off = (0..4)
            .flat_map(|r| (0..4).map(move |s| (r, s)))
            .filter(|(r, s)| r != s)
            .map(|(r, s)| d[(r, s)].norm())
            .fold(0.0, f64::max);
        let vals = [d[(0, 0)], d[(1, 1)], d[(2, 2)], d[(3, 3)]];
        if off < 1e-11 {
            return vals;
        }
        if off < best.1 {
            best = (vals, off);
        }
    }
    best.0
}

/// Chamber coordinates of `u`.
pub fn canonical_invariants(u: &Unitary4) -> Result<CanonicalClass> {
    let deviation = u.unitarity_deviation();
    if deviation > UNITARITY_TOL || !deviation.is_finite() {
        return Err(Error::NotUnitary { deviation });
    }
    let det = u.determinant();
    let su = u.matrix() / C64::from_polar(1.0, det.arg() / 4.0);
    let mb = magic_basis();
    let up = mb.adjoint() * su * mb;
    let m = up.transpose() * up;
    let lambdas = symmetric_unitary_eigenvalues(&m);

    // Each theta is one of a-b+c, a+b-c, -a-b-c, -a+b+c modulo pi, in some
    // order; any order is a chamber symmetry, but the four must sum to zero.
    let mut theta: Vec<f64> = lambdas.iter().map(|l| l.arg() / 2.0).collect();
    theta.sort_by(|x, y| y.total_cmp(x));
    let k = (theta.iter().sum::<f64>() / PI).round() as i64;
    if k > 0 {
        for t in theta.iter_mut().take(k as usize) {
            *t -= PI;
        }
    } else if k < 0 {
        for t in theta.iter_mut().rev().take((-k) as usize) {
            *t += PI;
        }
    }
    // Read theta as (a-b+c, a+b-c, -a-b-c, -a+b+c).
    let a = (theta[0] + theta[1]) / 2.0;
    let b = (theta[1] + theta[3]) / 2.0;
    let cz = (theta[0] + theta[3]) / 2.0;
    Ok(CanonicalClass::reduce(a, b, cz))
}

/// Whether `u` and `v` share chamber coordinates within `tol`.
pub fn is_locally_equivalent(u: &Unitary4, v: &Unitary4, tol: f64) -> Result<bool> {
    Ok(canonical_invariants(u)?.distance(&canonical_invariants(v)?) <= tol)
}

/// A synthesized circuit `L_k · G · L_(k-1) · ... · G · L_0`, where `G` is
/// the interaction and each `L_j = A_j ⊗ B_j`. `local_unitaries[0]` is `L_0`,
/// applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    pub layer_count: usize,
    pub local_unitaries: Vec<(Unitary2, Unitary2)>,
    pub residual_infidelity: f64,
}

impl SynthesisResult {
    /// Rebuilds the synthesized unitary from its parts.
    pub fn build(&self, interaction: &Unitary4) -> Unitary4 {
        build_from_locals(&self.local_unitaries, interaction)
    }
}

fn build_from_locals(locals: &[(Unitary2, Unitary2)], interaction: &Unitary4) -> Unitary4 {
    let mut acc = locals[0].0.kron(&locals[0].1);
    for (a, b) in &locals[1..] {
        acc = a.kron(b) * (interaction * &acc);
    }
    acc
}

/// Tuning knobs for [`synthesize_from_interaction`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisOptions {
    pub starts: usize,
    /// Objective evaluations allowed per start.
    pub budget: usize,
    pub seed: u64,
    /// A layer count is accepted once the residual drops below this.
    pub target_infidelity: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            starts: 16,
            budget: 20_000,
            seed: 0,
            target_infidelity: 1e-6,
        }
    }
}

type Locals = Vec<(Unitary2, Unitary2)>;

fn locals_from_params(x: &[f64]) -> Locals {
    x.chunks_exact(6)
        .map(|p| (Unitary2::zyz(p[0], p[1], p[2]), Unitary2::zyz(p[3], p[4], p[5])))
        .collect()
}

/// Smooth surrogate `1 - |tr(U† T)|^2 / 16`; shares its minimizers with the
/// phase-invariant infidelity.
fn surrogate(x: &[f64], interaction: &Unitary4, target: &Unitary4) -> f64 {
    let ov = build_from_locals(&locals_from_params(x), interaction).trace_overlap(target);
    1.0 - ov * ov
}

/// BFGS with central-difference gradients and backtracking line search.
/// Returns the best point found within `budget` objective evaluations.
fn bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: Vec<f64>, budget: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let h = 1e-6;
    let grad = |x: &[f64], evals: &mut usize, eval: &mut dyn FnMut(&[f64], &mut usize) -> f64| {
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = eval(&xp, evals);
            xp[i] = orig - h;
            let fm = eval(&xp, evals);
            xp[i] = orig;
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    };
    let identity = |n: usize| {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        m
    };

    let mut x = x0;
    let mut fx = eval(&x, &mut evals);
    let mut g = grad(&x, &mut evals, &mut eval);
    let mut hinv = identity(n);
    let mut fresh = true;
    while evals + 2 * n + 2 < budget && fx > 1e-15 {
        let d: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv = identity(n);
            if fresh {
                break;
            }
            fresh = true;
            continue;
        }
        let mut step = 1.0;
        let mut accepted = None;
        while evals < budget {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let fxn = eval(&xn, &mut evals);
            if fxn <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fxn));
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
        let Some((xn, fxn)) = accepted else {
            if fresh {
                break;
            }
            hinv = identity(n);
            fresh = true;
            continue;
        };
        if evals + 2 * n >= budget {
            x = xn;
            fx = fxn;
            break;
        }
        let gn = grad(&xn, &mut evals, &mut eval);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-18 {
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        x = xn;
        fx = fxn;
        g = gn;
        fresh = false;
    }
    (x, fx)
}

fn optimize_layers(
    target: &Unitary4,
    interaction: &Unitary4,
    layers: usize,
    opts: &SynthesisOptions,
) -> SynthesisResult {
    let dim = 6 * (layers + 1);
    let runs: Vec<(f64, usize, Locals)> = (0..opts.starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(((layers as u64) << 32) | start as u64);
            let x0: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
            let (x, _) = bfgs(|x| surrogate(x, interaction, target), x0, opts.budget);
            let locals = locals_from_params(&x);
            let residual = build_from_locals(&locals, interaction).phase_infidelity(target);
            (residual, start, locals)
        })
        .collect();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one start");
    SynthesisResult {
        layer_count: layers,
        local_unitaries: best.2,
        residual_infidelity: best.0,
    }
}

/// Finds the fewest uses (at most `max_layers`) of `interaction`, interleaved
/// with single-qubit layers, that reproduce `target` up to global phase.
/// If no layer count reaches `opts.target_infidelity`, the best circuit with
/// `max_layers` uses is returned.
pub fn synthesize_from_interaction(
    target: &Unitary4,
    interaction: &Unitary4,
    max_layers: usize,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    for u in [target, interaction] {
        let deviation = u.unitarity_deviation();
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
    }
    if max_layers == 0 {
        return Err(Error::InvalidParameter("max_layers must be at least 1".into()));
    }
    if opts.starts == 0 || opts.budget == 0 {
        return Err(Error::InvalidParameter(
            "synthesis needs at least one start and a positive budget".into(),
        ));
    }
    if canonical_invariants(interaction)?.is_local(1e-9) {
        return Err(Error::NonEntangling);
    }
    let first = if canonical_invariants(target)?.is_local(1e-9) {
        0
    } else {
        1
    };
    let mut last = None;
    for layers in first..=max_layers {
        let result = optimize_layers(target, interaction, layers, opts);
        if result.residual_infidelity < opts.target_infidelity {
            return Ok(result);
        }
        last = Some(result);
    }
    Ok(last.expect("loop runs at least once"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::named;

    fn random_local(rng: &mut ChaCha8Rng) -> Unitary2 {
        Unitary2::zyz(
            rng.random::<f64>() * 2.0 * PI,
            rng.random::<f64>() * PI,
            rng.random::<f64>() * 2.0 * PI,
        )
    }

    fn random_chamber_point(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let a = rng.random::<f64>() * FRAC_PI_4;
            let b = rng.random::<f64>() * FRAC_PI_4;
            let cz = (rng.random::<f64>() * 2.0 - 1.0) * FRAC_PI_4;
            if a >= b && b >= cz.abs() {
                return [a, b, cz];
            }
        }
    }

    fn assert_class(u: &Unitary4, expect: [f64; 3]) {
        let got = canonical_invariants(u).unwrap().as_array();
        for k in 0..3 {
            assert!((got[k] - expect[k]).abs() < 1e-9, "got {got:?}, expected {expect:?}");
        }
    }

    #[test]
    fn closed_form_matches_exponential() {
        // exp(i theta P) = cos(theta) I + i sin(theta) P for P squaring to I.
        let x = named::x();
        let y = named::y();
        let z = named::z();
        let (a, b, cz) = (0.31, -0.17, 0.52);
        let term = |p: Unitary4, t: f64| {
            Unitary4::from_matrix_unchecked(Matrix4::identity() * c(t.cos(), 0.0) + p.matrix() * c(0.0, t.sin()))
        };
        let expect = term(x.kron(&x), a) * term(y.kron(&y), b) * term(z.kron(&z), cz);
        let got = u_d(a, b, cz);
        assert!((got.matrix() - expect.matrix()).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn u_d_zero_is_identity() {
        assert_eq!(u_d(0.0, 0.0, 0.0), Unitary4::identity());
    }

    #[test]
    fn known_classes() {
        assert_class(&named::cnot(), [FRAC_PI_4, 0.0, 0.0]);
        assert_class(&named::swap(), [FRAC_PI_4, FRAC_PI_4, FRAC_PI_4]);
        assert_class(&named::cz(), [FRAC_PI_4, 0.0, 0.0]);
        assert_class(&u_d(PI / 8.0, PI / 8.0, 0.0), [PI / 8.0, PI / 8.0, 0.0]);
        assert_class(&(named::cnot() * named::swap()), [FRAC_PI_4, FRAC_PI_4, 0.0]);
        assert_class(&(named::swap() * named::cnot()), [FRAC_PI_4, FRAC_PI_4, 0.0]);
        assert_class(&Unitary4::identity(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn locals_have_trivial_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let u = random_local(&mut rng).kron(&random_local(&mut rng));
            assert!(canonical_invariants(&u).unwrap().is_local(1e-7));
        }
    }

    #[test]
    fn invariant_under_local_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p = random_chamber_point(&mut rng);
            let core = random_local(&mut rng).kron(&random_local(&mut rng))
                * u_d(p[0], p[1], p[2])
                * random_local(&mut rng).kron(&random_local(&mut rng));
            let dressed = random_local(&mut rng).kron(&random_local(&mut rng))
                * core
                * random_local(&mut rng).kron(&random_local(&mut rng));
            let d = canonical_invariants(&core)
                .unwrap()
                .distance(&canonical_invariants(&dressed).unwrap());
            assert!(d < 1e-8, "drift {d}");
        }
    }

    #[test]
    fn recovers_chamber_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let p = random_chamber_point(&mut rng);
            let got = canonical_invariants(&u_d(p[0], p[1], p[2])).unwrap();
            let want = CanonicalClass::reduce(p[0], p[1], p[2]);
            assert!(got.distance(&want) < 1e-8, "{p:?} -> {got:?}");
        }
    }

    #[test]
    fn reduce_handles_symmetries() {
        let base = CanonicalClass::reduce(0.5, 0.3, 0.1);
        for (a, b, cz) in [
            (0.3, 0.5, 0.1),
            (-0.5, 0.3, -0.1),
            (0.5 + FRAC_PI_2, 0.3, 0.1),
            (0.1, -0.3, -0.5),
        ] {
            assert!(CanonicalClass::reduce(a, b, cz).distance(&base) < 1e-12);
        }
        let mirror = CanonicalClass::reduce(0.5, 0.3, -0.1);
        assert!(mirror.distance(&base) > 0.1);
        let edge = CanonicalClass::reduce(FRAC_PI_4, 0.3, -0.1);
        assert_eq!(edge.alpha_z, 0.1);
        let wrapped = CanonicalClass::reduce(-FRAC_PI_4, 0.3, 0.1);
        assert_eq!(wrapped.alpha_x, FRAC_PI_4);
    }

    #[test]
    fn swap_like_core() {
        assert!(is_locally_equivalent(&u_d(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4), &named::swap(), 1e-9).unwrap());
        assert!(!is_locally_equivalent(&named::cnot(), &named::swap(), 1e-6).unwrap());
        assert!(!is_locally_equivalent(&(named::cnot() * named::swap()), &named::cnot(), 1e-6).unwrap());
    }

    #[test]
    fn rejects_non_unitary() {
        let m = Matrix4::from_element(c(0.5, 0.0));
        assert!(matches!(
            canonical_invariants(&Unitary4::from_matrix_unchecked(m)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn synthesis_single_layer_for_interaction_itself() {
        let g = u_d(PI / 8.0, PI / 8.0, 0.0);
        let r = synthesize_from_interaction(&g, &g, 3, &SynthesisOptions::default()).unwrap();
        assert_eq!(r.layer_count, 1);
        assert!(r.residual_infidelity < 1e-9);
    }

    #[test]
    fn synthesis_rejects_local_interaction() {
        let g = named::h().kron(&named::s());
        assert_eq!(
            synthesize_from_interaction(&named::cnot(), &g, 2, &SynthesisOptions::default()),
            Err(Error::NonEntangling)
        );
    }

    #[test]
    fn synthesis_result_rebuilds() {
        let g = u_d(PI / 8.0, PI / 8.0, 0.0);
        let opts = SynthesisOptions {
            starts: 4,
            budget: 3000,
            ..Default::default()
        };
        let r = synthesize_from_interaction(&named::cnot(), &g, 2, &opts).unwrap();
        let again = r.build(&g).phase_infidelity(&named::cnot());
        assert!((again - r.residual_infidelity).abs() < 1e-12);
        assert_eq!(r.local_unitaries.len(), r.layer_count + 1);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let g = u_d(PI / 8.0, PI / 8.0, 0.0);
        let opts = SynthesisOptions {
            starts: 4,
            budget: 2000,
            seed: 5,
            ..Default::default()
        };
        let a = synthesize_from_interaction(&named::swap(), &g, 2, &opts).unwrap();
        let b = synthesize_from_interaction(&named::swap(), &g, 2, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pi_fraction_formatting() {
        assert_eq!(pi_fraction(FRAC_PI_4), "pi/4");
        assert_eq!(pi_fraction(PI / 8.0), "pi/8");
        assert_eq!(pi_fraction(0.0), "0");
        assert_eq!(pi_fraction(-3.0 * PI / 8.0), "-3pi/8");
        assert_eq!(pi_fraction(0.1), "0.100000");
    }
}
