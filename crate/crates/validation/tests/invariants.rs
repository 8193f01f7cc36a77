//! Properties of the optimal-cycle search that are tied to the published
//! discrete-noise results.

use lnnqec::experiments::{epsilon_step, find_t_opt, reproduce_table2, Evaluator, REFERENCE_DISCRETE};
use lnnqec::pauli::OracleCurve;
use lnnqec::ErrorModel;

fn within_factor(x: f64, reference: f64, factor: f64) -> bool {
    x > 0.0 && x / reference <= factor && reference / x <= factor
}

/// t_wait values for total cycle lengths `lo..=hi`.
fn t_range(lo: u64, hi: u64) -> Vec<u64> {
    (lo - 14..=hi - 14).collect()
}

#[test]
fn optimum_is_interior_at_moderate_noise() {
    for p in [1e-2, 1e-3] {
        let r = find_t_opt(&ErrorModel::discrete(p).unwrap(), Evaluator::Oracle, &t_range(14, 200)).unwrap();
        assert!(
            r.t_total > 14 && r.t_total < 200,
            "p = {p}: minimum at grid end T = {}",
            r.t_total
        );
    }
}

#[test]
fn waiting_some_but_not_too_long_helps_at_p_1e2() {
    let curve = OracleCurve::standard(1e-2).unwrap();
    let e = |t_total: u64| epsilon_step(curve.epsilon_final(t_total - 14), t_total).unwrap();
    assert!(e(39) < e(14), "{} vs {}", e(39), e(14));
    assert!(e(39) < e(214), "{} vs {}", e(39), e(214));
}

#[test]
fn find_t_opt_examples() {
    let r = find_t_opt(
        &ErrorModel::discrete(1e-3).unwrap(),
        Evaluator::Oracle,
        &t_range(14, 200),
    )
    .unwrap();
    assert!(within_factor(r.t_total as f64, 50.0, 2.0), "T_opt {}", r.t_total);
    assert!(
        within_factor(r.epsilon_step, 8.4e-4, 2.0),
        "eps_step {}",
        r.epsilon_step
    );
    let r = find_t_opt(
        &ErrorModel::discrete(1e-2).unwrap(),
        Evaluator::Oracle,
        &t_range(14, 100),
    )
    .unwrap();
    assert!(within_factor(r.t_total as f64, 25.0, 2.0), "T_opt {}", r.t_total);
}

#[test]
fn first_discrete_row() {
    let row = &reproduce_table2(&[1e-2], Evaluator::Oracle).unwrap()[0];
    assert!(
        within_factor(row.record.t_total as f64, 25.0, 2.0),
        "T_opt {}",
        row.record.t_total
    );
    assert!(
        within_factor(row.record.epsilon_step, 1.7e-2, 2.0),
        "eps_step {}",
        row.record.epsilon_step
    );
}

#[test]
fn improvement_shrinks_with_p() {
    let ps: Vec<f64> = REFERENCE_DISCRETE.iter().map(|r| r.0).collect();
    let rows = reproduce_table2(&ps, Evaluator::Oracle).unwrap();
    for w in rows.windows(2) {
        assert!(
            w[1].improvement < w[0].improvement,
            "p {} -> {}: ratio {} -> {}",
            w[0].record.param,
            w[1].record.param,
            w[0].improvement,
            w[1].improvement
        );
    }
}
