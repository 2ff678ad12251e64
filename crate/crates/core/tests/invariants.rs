use proptest::prelude::*;

use villani_lmc::gibbs::{renyi2, tv_distance, w2_distance_1d, Grid, GridDensity};
use villani_lmc::nn::{ActivationSpec, DataBounds, Dataset, LossKind, ProblemSpec, WeightMatrix};
use villani_lmc::theory::radon_nikodym_bound;

const DIM: usize = 2;

fn problem(loss: LossKind, outer: Vec<f64>, rows: Vec<(Vec<f64>, f64)>, lambda: f64) -> ProblemSpec {
    let rows = match loss {
        LossKind::Mse => rows,
        LossKind::Bce => rows.into_iter().map(|(x, y)| (x, if y >= 0.0 { 1.0 } else { -1.0 })).collect(),
    };
    let act = if loss == LossKind::Mse { ActivationSpec::tanh() } else { ActivationSpec::sigmoid() };
    ProblemSpec::new(act, loss, outer, Dataset::from_rows(&rows).unwrap(), lambda, DataBounds::default()).unwrap()
}

fn case() -> impl Strategy<Value = (ProblemSpec, WeightMatrix)> {
    (1usize..5, 1usize..6, prop_oneof![Just(LossKind::Mse), Just(LossKind::Bce)], 0.1f64..5.0).prop_flat_map(
        |(p, n, loss, lambda)| {
            (
                prop::collection::vec(-2.0f64..2.0, p),
                prop::collection::vec((prop::collection::vec(-1.0f64..1.0, DIM), -2.0f64..2.0), n),
                prop::collection::vec(-3.0f64..3.0, p * DIM),
            )
                .prop_map(move |(outer, rows, w)| {
                    (problem(loss, outer, rows, lambda), WeightMatrix::from_vec(p, DIM, w).unwrap())
                })
        },
    )
}

fn masses(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n)
}

fn density(weights: Vec<f64>) -> GridDensity {
    let n = weights.len();
    GridDensity::from_weights(Grid::uniform_1d(-1.0, 1.0, n).unwrap(), weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences((spec, w) in case()) {
        let g = spec.gradient(&w).unwrap();
        let h = 1e-6;
        for k in 0..w.len() {
            let mut plus = w.clone();
            plus.as_mut_slice()[k] += h;
            let mut minus = w.clone();
            minus.as_mut_slice()[k] -= h;
            let fd = (spec.empirical_loss(&plus).unwrap() - spec.empirical_loss(&minus).unwrap()) / (2.0 * h);
            let exact = g.as_slice()[k];
            prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "k={k}: fd {fd} vs {exact}");
        }
    }

    #[test]
    fn losses_are_non_negative((spec, w) in case()) {
        prop_assert!(spec.data_loss(&w).unwrap() >= 0.0);
        prop_assert!(spec.empirical_loss(&w).unwrap() >= 0.0);
        for i in 0..spec.n() {
            prop_assert!(spec.example_loss(i, &w).unwrap() >= 0.0);
        }
    }

    #[test]
    fn regularizer_splits_off((spec, w) in case()) {
        let total = spec.empirical_loss(&w).unwrap();
        let parts = spec.data_loss(&w).unwrap() + spec.lambda() / 2.0 * w.frob_sq();
        prop_assert!((total - parts).abs() <= 1e-12 * (1.0 + total.abs()));
    }

    #[test]
    fn hidden_unit_permutation_is_an_equivariance((spec, w) in case(), shift in 0usize..4) {
        let p = spec.width();
        let perm: Vec<usize> = (0..p).map(|k| (k + shift) % p).collect();
        let outer: Vec<f64> = perm.iter().map(|&k| spec.outer()[k]).collect();
        let rows: Vec<(Vec<f64>, f64)> = (0..spec.n()).map(|i| (spec.data().x(i).to_vec(), spec.data().y(i))).collect();
        let permuted = problem(spec.loss_kind(), outer, rows, spec.lambda());
        let wp = WeightMatrix::from_fn(p, DIM, |k, j| w.row(perm[k])[j]);
        let (l, lp) = (spec.empirical_loss(&w).unwrap(), permuted.empirical_loss(&wp).unwrap());
        prop_assert!((l - lp).abs() <= 1e-12 * (1.0 + l.abs()));
        let (g, gp) = (spec.gradient(&w).unwrap(), permuted.gradient(&wp).unwrap());
        for (k, &src) in perm.iter().enumerate() {
            for j in 0..DIM {
                prop_assert!((gp.row(k)[j] - g.row(src)[j]).abs() <= 1e-12 * (1.0 + g.row(src)[j].abs()));
            }
        }
    }

    #[test]
    fn radon_nikodym_bound_is_at_least_one((spec, _) in case(), n in 1usize..1000, s in 0.01f64..10.0) {
        prop_assert!(radon_nikodym_bound(&spec, n, s).unwrap() >= 1.0);
    }

    #[test]
    fn tv_and_w2_are_symmetric((p, q) in (masses(24), masses(24))) {
        let (p, q) = (density(p), density(q));
        let tv = tv_distance(&p, &q).unwrap();
        prop_assert!((tv - tv_distance(&q, &p).unwrap()).abs() <= 1e-14);
        prop_assert!((0.0..=1.0).contains(&tv));
        let w2 = w2_distance_1d(&p, &q).unwrap();
        prop_assert!((w2 - w2_distance_1d(&q, &p).unwrap()).abs() <= 1e-12);
        prop_assert!(tv_distance(&p, &p).unwrap() == 0.0);
        prop_assert!(w2_distance_1d(&p, &p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn renyi_is_non_negative_and_vanishes_on_the_diagonal(p in masses(16), q in masses(16)) {
        let (p, q) = (density(p), density(q));
        prop_assert!(renyi2(&p, &q).unwrap() >= -1e-12);
        prop_assert!(renyi2(&p, &p).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn renyi_is_not_symmetric() {
    let p = density(vec![0.9, 0.1]);
    let q = density(vec![0.5, 0.5]);
    let (pq, qp) = (renyi2(&p, &q).unwrap(), renyi2(&q, &p).unwrap());
    // sum p^2/q = 1.64 and sum q^2/p = 0.25/0.9 + 0.25/0.1
    assert!((pq - 1.64f64.ln()).abs() < 1e-12);
    assert!((qp - (0.25 / 0.9 + 2.5f64).ln()).abs() < 1e-12);
    assert!((pq - qp).abs() > 0.5);
}
