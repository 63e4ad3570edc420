use proptest::prelude::*;

use valid_orderings::format::{format_group, format_subset, named_group, parse_group, parse_subset};
use valid_orderings::group::named;
use valid_orderings::orderings::check_valid;
use valid_orderings::{Error, Group, Subset};

fn small_groups() -> Vec<Group> {
    vec![
        Group::boolean_cube(3).unwrap(),
        Group::cyclic(12).unwrap(),
        named::symmetric(4).unwrap(),
        named::dihedral(5).unwrap(),
        named::quaternion().unwrap(),
        named::abelian(&[2, 6]).unwrap(),
    ]
}

#[test]
fn group_axioms_hold() {
    for g in small_groups() {
        let n = g.order();
        let e = g.identity();
        for a in 0..n {
            assert_eq!(g.mul(a, e), a);
            assert_eq!(g.mul(e, a), a);
            assert_eq!(g.mul(a, g.inv(a)), e);
            for b in 0..n {
                for c in 0..n {
                    assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                }
            }
        }
    }
}

#[test]
fn table_round_trip_keeps_the_group() {
    for g in small_groups() {
        let back = parse_group(&format_group(&g)).unwrap();
        assert_eq!(back.order(), g.order());
        assert_eq!(back.table_rows(), g.table_rows());
    }
}

#[test]
fn bad_tables_are_rejected() {
    assert!(matches!(Group::from_table(&[vec![0, 1], vec![1, 1]]), Err(Error::Input(_))));
    assert!(parse_group("group table 2\n0 1\n").is_err());
    assert!(parse_group("group torus 3\n").is_err());
    assert!(named_group("nonsense").is_err());
}

#[test]
fn named_groups_have_expected_orders() {
    for (name, order) in [("s3", 6), ("s4", 24), ("d6", 12), ("q8", 8), ("z2xz4", 8)] {
        assert_eq!(named_group(name).unwrap().order(), order, "{name}");
    }
    assert!(!named_group("s3").unwrap().is_abelian());
    assert!(named_group("z2xz4").unwrap().is_abelian());
}

#[test]
fn subgroups_of_s4_by_index() {
    let g = named::symmetric(4).unwrap();
    let subs = g.subgroups_up_to_index(2).unwrap();
    // S_4 itself and A_4
    assert_eq!(subs.iter().map(|h| h.order()).collect::<Vec<_>>(), vec![12, 24]);
}

proptest! {
    #[test]
    fn subset_text_round_trip(n in 1usize..9, bits in proptest::collection::vec(any::<bool>(), 256)) {
        let g = Group::boolean_cube(n).unwrap();
        let s = Subset::from_indices(1 << n, (0..1usize << n).filter(|&i| bits[i]));
        prop_assert_eq!(parse_subset(&g, &format_subset(&g, &s)).unwrap(), s);
    }

    #[test]
    fn quotient_lift_preserves_validity(n in 3usize..9, seed in any::<u64>()) {
        use rand::Rng as _;
        let g = Group::boolean_cube(n).unwrap();
        let mut r = valid_orderings::rng::rng(seed);
        let s = Subset::from_indices(1 << n, (1..1usize << n).filter(|_| r.gen_bool(0.15)));
        let sums: std::collections::HashSet<usize> = s.iter().flat_map(|a| s.iter().map(move |b| a ^ b)).collect();
        let Some(v) = (1..1usize << n).find(|v| !sums.contains(v)) else { return Ok(()) };
        let q = g.quotient_project(&s, v).unwrap();
        prop_assert_eq!(q.image.len(), s.len());
        // any valid ordering of the image lifts to a valid ordering of S
        if let Some(ord) = valid_orderings::orderings::greedy_order(&q.group, &q.image, seed, 16) {
            let lifted = q.lift_ordering(&ord).unwrap();
            prop_assert!(check_valid(&g, &lifted).valid);
        }
        for y in 0..q.group.order() {
            prop_assert_eq!(q.project(q.lift(y)), y);
        }
    }

    #[test]
    fn cyclic_spans_are_subgroups(m in 2usize..60, a in 0usize..60) {
        let g = Group::cyclic(m).unwrap();
        let h = g.span_of(&[a % m]);
        prop_assert_eq!(m % h.order(), 0);
        for x in h.elements() {
            for y in h.elements() {
                prop_assert!(h.contains(g.mul(x, y)));
            }
        }
    }
}
