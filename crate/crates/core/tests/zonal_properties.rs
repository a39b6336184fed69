use num::{BigInt, One, Zero};
use proptest::prelude::*;
use roy_core::partition::{lb_eigenvalue, partitions_of};
use roy_core::zonal::{
    e_product, kushner_g, lb_apply, zonal_at_identity, zonal_table, EPolynomial, ZonalStore, Q,
};
use roy_core::Partition;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn rows_are_laplace_beltrami_eigenfunctions() {
    for m in 1..=4 {
        for k in 0..=8 {
            let table = zonal_table(k, m);
            table.validate().unwrap();
            for kappa in partitions_of(k, m) {
                let row = table.row(&kappa).unwrap();
                let eig = Q::from_integer(lb_eigenvalue(&kappa, m).unwrap().into());
                let image = lb_apply(&row).unwrap();
                let mut scaled = EPolynomial::zero(m);
                for (mu, c) in row.terms() {
                    scaled.add_term(mu.clone(), c * &eig).unwrap();
                }
                assert_eq!(image, scaled, "kappa = {kappa}, m = {m}");
            }
        }
    }
}

fn rational() -> impl Strategy<Value = Q> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rows_sum_to_power_of_trace(k in 0u32..=10, spectrum in prop::collection::vec(rational(), 1..=5)) {
        let m = spectrum.len();
        let table = zonal_table(k, m);
        let total: Q = partitions_of(k, m)
            .iter()
            .map(|kappa| table.eval_exact(kappa, &spectrum).unwrap())
            .sum();
        let trace: Q = spectrum.iter().sum();
        let mut power = Q::one();
        for _ in 0..k {
            power *= &trace;
        }
        prop_assert_eq!(total, power);
    }

    #[test]
    fn eval_is_symmetric_in_the_spectrum(k in 1u32..=6, mut spectrum in prop::collection::vec(rational(), 2..=4), shift in 1usize..4) {
        let m = spectrum.len();
        let table = zonal_table(k, m);
        let before: Vec<Q> = partitions_of(k, m).iter().map(|p| table.eval_exact(p, &spectrum).unwrap()).collect();
        spectrum.rotate_left(shift % m);
        spectrum.swap(0, m - 1);
        let after: Vec<Q> = partitions_of(k, m).iter().map(|p| table.eval_exact(p, &spectrum).unwrap()).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn float_eval_tracks_exact_eval(k in 1u32..=6, spectrum in prop::collection::vec(rational(), 1..=4)) {
        let m = spectrum.len();
        let table = zonal_table(k, m);
        let xs: Vec<f64> = spectrum.iter().map(|r| num::ToPrimitive::to_f64(r).unwrap()).collect();
        for kappa in partitions_of(k, m) {
            let exact = num::ToPrimitive::to_f64(&table.eval_exact(&kappa, &spectrum).unwrap()).unwrap();
            let float = roy_core::zonal::zonal_eval(&kappa, &xs, &table).unwrap();
            prop_assert!((exact - float).abs() <= 1e-9 * (1.0 + exact.abs()), "{} {} {}", kappa, exact, float);
        }
    }
}

#[test]
fn value_at_identity_matches_closed_form() {
    for m in 1..=5 {
        let ones = vec![Q::one(); m];
        for k in 0..=6 {
            let table = zonal_table(k, m);
            for kappa in partitions_of(k, m) {
                assert_eq!(table.eval_exact(&kappa, &ones).unwrap(), zonal_at_identity(&kappa, m), "{kappa}, m = {m}");
            }
        }
    }
}

#[test]
fn worked_product_and_its_e_expansion() {
    let store = ZonalStore::in_memory();
    let two = Partition::from([2u32]);
    let three_two = Partition::from([3u32, 2]);
    let g = store.product(&two, &three_two, 2);
    let want: Vec<(Partition, Q)> = vec![(Partition::from([4u32, 3]), q(12, 35)), (Partition::from([5u32, 2]), q(99, 245))];
    assert_eq!(g.iter().map(|(p, c)| (p.clone(), c.clone())).collect::<Vec<_>>(), want);

    let left = zonal_table(2, 2).row(&two).unwrap();
    let right = zonal_table(5, 2).row(&three_two).unwrap();
    let product = e_product(&left, &right).unwrap();
    let mut expected = EPolynomial::zero(2);
    expected.add_term(Partition::from([5u32, 2]), q(48, 7)).unwrap();
    expected.add_term(Partition::from([4u32, 3]), q(-64, 7)).unwrap();
    assert_eq!(product, expected);
}

#[test]
fn closed_form_one_row_products_agree_with_basis_change() {
    let store = ZonalStore::in_memory();
    let m = 4;
    for k in 1..=5 {
        let row = Partition::row(k);
        for t in 0..=5 {
            for tau in partitions_of(t, m) {
                let g = store.product(&row, &tau, m);
                for delta in partitions_of(k + t, m) {
                    let expected = g.get(&delta).cloned().unwrap_or_else(Q::zero);
                    assert_eq!(kushner_g(k, &tau, &delta).unwrap(), expected, "k = {k}, tau = {tau}, delta = {delta}");
                }
            }
        }
    }
}

#[test]
fn products_are_symmetric_and_dimension_stable() {
    let store = ZonalStore::in_memory();
    for n in 2..=8 {
        for k in 1..n {
            for kappa in partitions_of(k, 4) {
                for tau in partitions_of(n - k, 4) {
                    let m_lo = kappa.len().max(tau.len());
                    let base = store.product(&kappa, &tau, m_lo);
                    assert_eq!(*base, *store.product(&tau, &kappa, m_lo), "{kappa} x {tau}");
                    for m in m_lo + 1..=5 {
                        let wider = store.product(&kappa, &tau, m);
                        for (delta, c) in wider.iter() {
                            if delta.len() <= m_lo {
                                assert_eq!(base.get(delta), Some(c), "{kappa} x {tau} at {delta}, m = {m}");
                            }
                        }
                        for (delta, c) in base.iter() {
                            assert_eq!(wider.get(delta), Some(c));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn product_identity_at_the_identity_matrix() {
    let store = ZonalStore::in_memory();
    for m in 1..=3 {
        for (k, t) in [(1, 1), (2, 3), (3, 3), (4, 2)] {
            for kappa in partitions_of(k, m) {
                for tau in partitions_of(t, m) {
                    let g = store.product(&kappa, &tau, m);
                    let lhs: Q = g.iter().map(|(d, c)| c * zonal_at_identity(d, m)).sum();
                    assert_eq!(lhs, zonal_at_identity(&kappa, m) * zonal_at_identity(&tau, m));
                }
            }
        }
    }
}
