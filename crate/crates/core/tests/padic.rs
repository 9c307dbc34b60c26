use lattice_mass::padic::{
    chi_local, d_blocks, hasse_blocks, hasse_invariant, hilbert_symbol, i_blocks, i_p, jordan_decompose, local_invariants,
    HalfIntegralMatrix, LocalClass, Place,
};
use lattice_mass::scalar::rat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn gram_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=4).prop_flat_map(|n| {
        (prop::collection::vec(-3i64..=3, n * n), prop::collection::vec(-4i64..=4, n)).prop_map(move |(off, diag)| {
            let mut g = vec![vec![0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    g[i][j] = if i == j { 2 * diag[i] } else { off[i.min(j) * n + i.max(j)] };
                }
            }
            g
        })
    })
}

fn nonsingular(g: &[Vec<i64>]) -> Option<HalfIntegralMatrix> {
    let b = HalfIntegralMatrix::from_gram_i64(g).ok()?;
    (!b.det().is_zero()).then_some(b)
}

fn same_square_class(a: LocalClass, b: LocalClass, p: u64) -> bool {
    let m = if p == 2 { 8 } else { p };
    a.v == b.v && chi_local(LocalClass { v: 0, u: a.u * b.u % m }, p) == 1
}

fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (1i64..=200, 1i64..=60, any::<bool>()).prop_map(|(n, d, neg)| rat(if neg { -n } else { n }, d))
}

const PRIMES: [u64; 4] = [2, 3, 5, 7];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn jordan_preserves_invariants(g in gram_strategy()) {
        let Some(b) = nonsingular(&g) else { return Ok(()) };
        for p in PRIMES {
            let jd = jordan_decompose(&b, p).unwrap();
            prop_assert_eq!(jd.rank(), b.rank());
            prop_assert!(same_square_class(jd.det_class(), LocalClass::of(&b.det(), p), p), "det class at {}", p);
            prop_assert_eq!(hasse_blocks(jd.blocks(), p), hasse_invariant(&b, p).unwrap(), "hasse at {}", p);
            prop_assert_eq!(d_blocks(jd.blocks(), p), b.d_p(p), "d at {}", p);
            prop_assert_eq!(i_blocks(jd.blocks()), i_p(&b, p).unwrap(), "i at {}", p);
        }
    }

    #[test]
    fn hilbert_bilinear(a in nonzero_rational(), b in nonzero_rational(), c in nonzero_rational()) {
        for p in PRIMES {
            let place = Place::Finite(p);
            let lhs = hilbert_symbol(&a, &(&b * &c), place).unwrap();
            let rhs = hilbert_symbol(&a, &b, place).unwrap() * hilbert_symbol(&a, &c, place).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn hilbert_product_formula(a in nonzero_rational(), b in nonzero_rational()) {
        let mut primes: Vec<u64> = vec![2];
        for x in [a.numer(), a.denom(), b.numer(), b.denom()] {
            primes.extend(lattice_mass::padic::prime_divisors(x));
        }
        primes.sort_unstable();
        primes.dedup();
        let mut prod = hilbert_symbol(&a, &b, Place::Infinite).unwrap();
        for p in primes {
            prod *= hilbert_symbol(&a, &b, Place::Finite(p)).unwrap();
        }
        prop_assert_eq!(prod, 1);
    }

    #[test]
    fn xi_prime_identity(g in gram_strategy()) {
        let Some(b) = nonsingular(&g) else { return Ok(()) };
        for p in PRIMES {
            let inv = local_invariants(&b, p).unwrap();
            if let (Some(x), Some(xp)) = (inv.xi, inv.xi_prime) {
                prop_assert_eq!(xp, 1 + x - x * x);
            }
        }
    }

    #[test]
    fn unimodular_off_discriminant(g in gram_strategy()) {
        let Some(b) = nonsingular(&g) else { return Ok(()) };
        for p in [3u64, 5, 7, 11, 13] {
            if b.d_p(p) == 0 {
                let jd = jordan_decompose(&b, p).unwrap();
                prop_assert!(jd.blocks().iter().all(|blk| blk.exponent() == 0));
            }
        }
    }
}

#[test]
fn spec_examples() {
    let minus1 = rat(-1, 1);
    assert_eq!(hilbert_symbol(&minus1, &minus1, Place::Finite(2)).unwrap(), -1);
    assert_eq!(hilbert_symbol(&rat(3, 1), &rat(2, 1), Place::Finite(3)).unwrap(), -1);
    assert!(hilbert_symbol(&BigRational::zero(), &minus1, Place::Finite(3)).is_err());
    let e8 = HalfIntegralMatrix::from_gram_i64(&lattice_mass::Component::E(8).gram()).unwrap();
    for p in [2, 3, 5] {
        assert_eq!(hasse_invariant(&e8, p).unwrap(), 1);
    }
    let jd = jordan_decompose(&e8, 2).unwrap();
    assert_eq!(jd.blocks().len(), 4);
    assert!(jd.blocks().iter().all(|b| matches!(b, lattice_mass::padic::Block::H { e: 0 })));
    let empty = local_invariants(&HalfIntegralMatrix::empty(), 3).unwrap();
    assert_eq!((empty.xi, empty.xi_prime), (Some(1), Some(1)));
    let h = HalfIntegralMatrix::from_gram(vec![vec![BigInt::from(0), BigInt::from(1)], vec![BigInt::from(1), BigInt::from(0)]]).unwrap();
    assert_eq!(i_p(&h, 2).unwrap(), Some(-2));
    assert!(jordan_decompose(&e8, 4).is_err());
}
