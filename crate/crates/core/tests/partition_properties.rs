use std::cmp::Ordering;

use roy_core::partition::{dominance_leq, lb_eigenvalue, lex_compare, partitions_of};
use roy_core::Partition;

fn bounded_count(k: i64, m: i64) -> u64 {
    match (k, m) {
        (0, _) => 1,
        (k, _) if k < 0 => 0,
        (_, 0) => 0,
        (k, m) => bounded_count(k - m, m) + bounded_count(k, m - 1),
    }
}

#[test]
fn counts_follow_bounded_recurrence() {
    for k in 0..=12u32 {
        for m in 1..=6usize {
            assert_eq!(partitions_of(k, m).len() as u64, bounded_count(k.into(), m as i64), "k = {k}, m = {m}");
        }
    }
}

#[test]
fn enumeration_is_descending_lex_and_canonical() {
    for k in 1..=10 {
        let ps = partitions_of(k, k as usize);
        for w in ps.windows(2) {
            assert_eq!(lex_compare(&w[0], &w[1]).unwrap(), Ordering::Greater);
        }
        for p in &ps {
            assert_eq!(p.weight(), k);
            assert!(p.parts().iter().all(|&x| x > 0));
            assert_eq!(p.to_string().parse::<Partition>().unwrap(), *p);
            assert_eq!(p.conjugate().conjugate(), *p);
        }
    }
}

#[test]
fn lex_is_total_and_dominance_is_a_refined_partial_order() {
    for k in 1..=8 {
        let ps = partitions_of(k, k as usize);
        for a in &ps {
            assert!(dominance_leq(a, a).unwrap());
            for b in &ps {
                let ab = lex_compare(a, b).unwrap();
                assert_eq!(ab, lex_compare(b, a).unwrap().reverse());
                assert_eq!(ab == Ordering::Equal, a == b);
                let (le, ge) = (dominance_leq(a, b).unwrap(), dominance_leq(b, a).unwrap());
                if le && ge {
                    assert_eq!(a, b);
                }
                if le {
                    assert_ne!(ab, Ordering::Greater, "{a} below {b} in dominance but above in lex");
                }
                for c in &ps {
                    if le && dominance_leq(b, c).unwrap() {
                        assert!(dominance_leq(a, c).unwrap());
                    }
                }
            }
        }
    }
    let a = Partition::from([2u32, 2]);
    assert!(lex_compare(&a, &Partition::from([3u32])).is_err());
}

#[test]
fn lb_eigenvalue_strictly_increases_along_dominance() {
    for k in 1..=10 {
        let ps = partitions_of(k, 6);
        for kappa in &ps {
            for mu in &ps {
                if mu == kappa || !dominance_leq(mu, kappa).unwrap() {
                    continue;
                }
                for m in mu.len()..=6 {
                    assert!(lb_eigenvalue(kappa, m).unwrap() > lb_eigenvalue(mu, m).unwrap(), "{kappa} vs {mu}, m = {m}");
                }
            }
        }
    }
}
