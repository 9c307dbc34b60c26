use lattice_mass::reduce::{no_root_closed_form, ReduceError};
use lattice_mass::scalar::{format_decimal, rat, to_f64};
use lattice_mass::{class_lower_bound, reduce_masses, solve_masses, MassTable, OddMassTable, RootSystem, SolveOptions};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

static EVEN8: Lazy<MassTable> = Lazy::new(|| solve_masses(8, &SolveOptions::default()).unwrap());
static EVEN16: Lazy<MassTable> = Lazy::new(|| solve_masses(16, &SolveOptions::default()).unwrap());
static ODD16: Lazy<OddMassTable> = Lazy::new(|| reduce_masses(&EVEN16).unwrap());

fn rs(s: &str) -> RootSystem {
    s.parse().unwrap()
}

#[test]
fn empty_system_masses() {
    assert_eq!(ODD16.mass(0, &RootSystem::empty()), BigRational::one());
    for n in 1..=14 {
        assert_eq!(ODD16.reduced_mass(n, &RootSystem::empty()), BigRational::zero(), "n = {n}");
    }
    assert_eq!(ODD16.max_dim(), 14);
}

#[test]
fn small_odd_lattices() {
    // Z^n has mass 1/(2^n n!); E8 ⊕ Z and D12^+ appear at 9 and 12
    assert_eq!(ODD16.mass(3, &rs("Z^3")), rat(1, 48));
    assert_eq!(ODD16.reduced_mass(12, &rs("D12")), BigRational::new(BigInt::one(), BigInt::from(rs("D12").weyl_order())));
    assert_eq!(ODD16.mass(9, &rs("E8 Z")), rat(1, 2 * 696729600));
    // E8 itself is counted here; the bounds split it off
    assert_eq!(ODD16.reduced_mass(8, &rs("E8")), rat(1, 696729600));
    assert_eq!(ODD16.reduced_mass(14, &rs("E7^2")), rat(1, 2) / BigRational::from_integer(BigInt::from(rs("E7^2").aut_order())) * rat(2, 1));
}

#[test]
fn class_bounds_up_to_fourteen() {
    let want = [1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3, 4];
    for (i, &b) in want.iter().enumerate() {
        let n = i + 1;
        let rep = class_lower_bound(&ODD16, n, &[&EVEN8]).unwrap();
        assert_eq!(rep.beta, BigInt::from(b), "n = {n}");
        assert_eq!(rep.root_systems, b, "n = {n}");
    }
}

#[test]
fn total_odd_masses() {
    // published four-digit values; 1.551e-6 at n = 7 is 1/645120 = 1.5501e-6 rounded up
    let want = [
        0.5, 0.125, 2.083e-2, 2.604e-3, 2.604e-4, 2.170e-5, 1.551e-6, 9.688e-8, 6.100e-9, 4.485e-10, 4.213e-11, 5.267e-12,
        9.031e-13, 2.186e-13,
    ];
    for (i, w) in want.iter().enumerate() {
        let rep = class_lower_bound(&ODD16, i + 1, &[&EVEN8]).unwrap();
        let got = to_f64(&rep.mass);
        assert!((got - w).abs() <= 1e-3 * w, "n = {}: {}", i + 1, format_decimal(&rep.mass, 5));
    }
    assert_eq!(class_lower_bound(&ODD16, 7, &[&EVEN8]).unwrap().mass, rat(1, 645120));
}

#[test]
fn closed_forms_for_no_root_masses() {
    for n in 7..=14 {
        assert_eq!(no_root_closed_form(&EVEN16, n), ODD16.reduced_mass(n, &RootSystem::empty()), "n = {n}");
    }
}

#[test]
fn errors() {
    assert_eq!(class_lower_bound(&ODD16, 15, &[]), Err(ReduceError::BadDimension { n: 15, max: 14 }));
    assert_eq!(class_lower_bound(&ODD16, 0, &[]).unwrap_err(), ReduceError::BadDimension { n: 0, max: 14 });
    let partial = solve_masses(16, &SolveOptions { max_rank: Some(8), ..Default::default() }).unwrap();
    assert_eq!(reduce_masses(&partial).unwrap_err(), ReduceError::Incomplete);
}
