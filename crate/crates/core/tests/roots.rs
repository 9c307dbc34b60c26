use lattice_mass::roots::{irreducibles, parse_root_system, sort_canonical};
use lattice_mass::{enumerate_root_systems, rep_count, Component, Filters, RootSystem};
use num_bigint::BigUint;
use proptest::prelude::*;

// number of ADE root systems of each rank, from ∏_c 1/(1 − x^rank(c))
fn rank_counts(max_rank: usize) -> Vec<u64> {
    let mut f = vec![0u64; max_rank + 1];
    f[0] = 1;
    for c in irreducibles(max_rank) {
        let r = c.rank();
        for i in r..=max_rank {
            f[i] += f[i - r];
        }
    }
    f
}

fn component() -> impl Strategy<Value = Component> {
    prop_oneof![
        (1u32..=12).prop_map(Component::A),
        (4u32..=12).prop_map(Component::D),
        (6u32..=8).prop_map(Component::E),
    ]
}

fn root_system() -> impl Strategy<Value = RootSystem> {
    prop::collection::vec(component(), 0..6).prop_map(RootSystem::from_components)
}

#[test]
fn irreducible_counts() {
    let irr = irreducibles(8);
    assert_eq!(irr.len(), 8 + 5 + 3);
    assert!(irr.iter().all(|c| c.rank() <= 8));
}

#[test]
fn enumeration_matches_generating_function() {
    let counts = rank_counts(24);
    for max_rank in [8, 16, 24] {
        let all = enumerate_root_systems(max_rank, 24, Filters::NONE);
        let want: u64 = counts[..=max_rank].iter().sum();
        assert_eq!(all.len() as u64, want, "rank ≤ {max_rank}");
        for (r, &n) in counts.iter().enumerate().take(max_rank + 1) {
            assert_eq!(all.iter().filter(|s| s.rank() == r).count() as u64, n);
        }
    }
}

#[test]
fn filters_only_remove() {
    let all = enumerate_root_systems(16, 16, Filters::NONE);
    let kept = enumerate_root_systems(16, 16, Filters::ALL);
    assert!(kept.len() < all.len());
    assert!(kept.iter().all(|r| all.contains(r)));
    assert!(kept.iter().filter(|r| r.rank() == 16).all(|r| r.is_square_det()));
}

#[test]
fn enumeration_is_canonically_sorted() {
    let all = enumerate_root_systems(12, 24, Filters::ALL);
    let mut sorted = all.clone();
    sort_canonical(&mut sorted);
    assert_eq!(all, sorted);
    assert!(all[0].is_empty());
}

#[test]
fn congruences_apply_in_dimension_32_only() {
    let r = parse_root_system("E8 A1").unwrap();
    assert!(!lattice_mass::roots::borcherds_filter(&r, 32));
    assert!(lattice_mass::roots::borcherds_filter(&r, 24));
    assert!(lattice_mass::roots::borcherds_filter(&parse_root_system("E8^4").unwrap(), 32));
}

#[test]
fn group_orders() {
    let w = |s: &str| parse_root_system(s).unwrap().weyl_order();
    let a = |s: &str| parse_root_system(s).unwrap().aut_order();
    assert_eq!(w("E8"), BigUint::from(696729600u64));
    assert_eq!(w("E7"), BigUint::from(2903040u64));
    assert_eq!(w("E6"), BigUint::from(51840u64));
    assert_eq!(w("D4"), BigUint::from(192u64));
    assert_eq!(w("A4"), BigUint::from(120u64));
    assert_eq!(a("D4"), BigUint::from(1152u64));
    assert_eq!(a("E6"), BigUint::from(103680u64));
    assert_eq!(a("A1^3"), BigUint::from(48u64));
    assert_eq!(a("A2^2"), BigUint::from(288u64));
    assert_eq!(w("0"), BigUint::from(1u64));
    assert_eq!(parse_root_system("A3 D5").unwrap().det(), BigUint::from(16u64));
    assert_eq!(parse_root_system("A24").unwrap().root_count(), 600);
}

#[test]
fn rejects_malformed() {
    for s in ["D3", "E9", "A0", "B2", "A1^", "A1^x", "E5"] {
        assert!(parse_root_system(s).is_err(), "{s}");
    }
}

#[test]
fn canonical_order_is_triangular() {
    let systems = enumerate_root_systems(8, 8, Filters::NONE);
    for (i, r) in systems.iter().enumerate() {
        assert_eq!(rep_count(r, r), r.aut_order(), "{r}");
        for s in &systems[..i] {
            assert_eq!(rep_count(r, s), BigUint::from(0u32), "{r} -> {s}");
        }
    }
}

proptest! {
    #[test]
    fn display_roundtrip(r in root_system()) {
        let text = r.to_string();
        prop_assert_eq!(parse_root_system(&text).unwrap(), r.clone());
        prop_assert_eq!(text.parse::<RootSystem>().unwrap(), r);
    }

    #[test]
    fn orders_multiply(r in root_system(), s in root_system()) {
        let u = r.union(&s);
        prop_assert_eq!(u.rank(), r.rank() + s.rank());
        prop_assert_eq!(u.det(), r.det() * s.det());
        prop_assert_eq!(u.weyl_order(), r.weyl_order() * s.weyl_order());
        prop_assert_eq!(u.root_count(), r.root_count() + s.root_count());
        prop_assert!(&u.aut_order() % (r.aut_order() * s.aut_order()) == BigUint::from(0u32));
    }

    #[test]
    fn gram_is_even_and_has_det(r in root_system()) {
        prop_assume!(r.rank() <= 12);
        let g = r.gram();
        prop_assert!(g.iter().enumerate().all(|(i, row)| row[i] == 2));
        let b = r.half_integral().unwrap();
        prop_assert_eq!(BigUint::try_from(b.gram_det()).unwrap(), r.det());
    }
}
