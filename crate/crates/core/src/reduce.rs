//! Odd unimodular lattices from norm-4 vectors v = r + s (r ⊥ s roots) of
//! even unimodular lattices: masses by root system, no-root masses, and
//! class-number lower bounds.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mass::MassTable;
use crate::roots::{Component, RootSystem};
use crate::scalar::format_rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("the even table must be a complete solve (max rank = dimension)")]
    Incomplete,
    #[error("no even table supplied for dimension {0}")]
    MissingEven(usize),
    #[error("dimension {n} is outside 1..={max}")]
    BadDimension { n: usize, max: usize },
    #[error("negative mass at dimension {n} for {root_system}: {mass}")]
    Negative { n: usize, root_system: String, mass: String },
    #[error("no-root mass at dimension {n} disagrees with its closed form: {got} vs {expected}")]
    ClosedForm { n: usize, got: String, expected: String },
    #[error("mass must be nonnegative")]
    NegativeInput,
}

/// Which norm-4 vector family produced a contribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// r and s from two different components.
    Pair,
    /// r, s in one A_n.
    A,
    /// r, s in one D_4.
    D4,
    /// D_n (n ≥ 5), v of shape (±1⁴, 0^{n−4}).
    DQuad,
    /// D_n (n ≥ 5), v of shape (±2, 0^{n−1}).
    DPair,
    E6,
    E7,
    E8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub source: RootSystem,
    pub rule: Rule,
    pub mass: BigRational,
}

/// Masses m_n(R) of odd unimodular lattices with minimal norm 2 (R free of
/// Z), kept as per-source summands; Z-augmented systems are derived on
/// demand.
#[derive(Clone, Debug, Default)]
pub struct OddMassTable {
    pub base_dim: u32,
    pub entries: BTreeMap<(usize, RootSystem), Vec<Summand>>,
}

impl OddMassTable {
    pub fn max_dim(&self) -> usize {
        self.base_dim as usize - 2
    }

    /// m_n(R) for a minimal-norm-2 system R.
    pub fn reduced_mass(&self, n: usize, r: &RootSystem) -> BigRational {
        self.entries.get(&(n, r.clone())).map_or_else(BigRational::zero, |v| sum(v.iter().map(|s| &s.mass)))
    }

    /// m_n(R) for any R; Z^j ⊕ R′ has mass m_{n−j}(R′)/(2^j j!).
    pub fn mass(&self, n: usize, r: &RootSystem) -> BigRational {
        let j = r.z_count() as usize;
        if j > n {
            return BigRational::zero();
        }
        let core = strip_z(r);
        let m = if n == j && core.is_empty() { BigRational::one() } else { self.reduced_mass(n - j, &core) };
        m / BigRational::from_integer(BigInt::from(z_order(j)))
    }

    /// (dimension, system, mass) for every nonzero minimal-norm-2 entry.
    pub fn rows(&self) -> Vec<(usize, RootSystem, BigRational)> {
        self.entries
            .iter()
            .map(|((n, r), v)| (*n, r.clone(), sum(v.iter().map(|s| &s.mass))))
            .filter(|(_, _, m)| !m.is_zero())
            .collect()
    }
}

fn sum<'a>(it: impl Iterator<Item = &'a BigRational>) -> BigRational {
    it.fold(BigRational::zero(), |a, b| a + b)
}

fn strip_z(r: &RootSystem) -> RootSystem {
    RootSystem::from_components(r.components().filter(|c| *c != Component::Z))
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |a, i| a * i)
}

/// 2^j·j!, the order of the signed permutations of Z^j.
fn z_order(j: usize) -> BigUint {
    (BigUint::one() << j) * factorial(j)
}

fn a_sys(n: i64) -> RootSystem {
    if n <= 0 {
        RootSystem::empty()
    } else {
        RootSystem::single(Component::A(n as u32))
    }
}

fn d_sys(n: i64) -> RootSystem {
    match n {
        i64::MIN..=1 => RootSystem::empty(),
        2 => RootSystem::from_components([Component::A(1); 2]),
        3 => RootSystem::single(Component::A(3)),
        _ => RootSystem::single(Component::D(n as u32)),
    }
}

/// R̂: what remains of a component after removing the span of one root
/// paired with a root elsewhere.
fn hat(c: Component) -> RootSystem {
    match c {
        Component::A(n) => a_sys(n as i64 - 2),
        Component::D(4) => RootSystem::from_components([Component::A(1); 3]),
        // roots of D_n orthogonal to e1+e2: ±(e1−e2) and D_{n−2}
        Component::D(n) => {
            let rest = d_sys(n as i64 - 2);
            RootSystem::from_components(rest.components().chain([Component::A(1)]))
        }
        Component::E(6) => RootSystem::single(Component::A(5)),
        Component::E(7) => RootSystem::single(Component::D(6)),
        Component::E(_) => RootSystem::single(Component::E(7)),
        Component::Z => unreachable!("even lattices have no Z components"),
    }
}

/// Norm-4 vectors inside a single component: (rule, #v, R̃, 8k − reduced dim).
fn inner_rules(c: Component) -> Vec<(Rule, u64, RootSystem, usize)> {
    let binom = |n: u64, k: u64| -> u64 {
        if n < k {
            0
        } else {
            (0..k).fold(1, |a, i| a * (n - i) / (i + 1))
        }
    };
    match c {
        Component::A(n) if n >= 3 => vec![(Rule::A, 6 * binom(n as u64 + 1, 4), a_sys(n as i64 - 4), 3)],
        Component::A(_) => vec![],
        Component::D(4) => vec![(Rule::D4, 24, RootSystem::empty(), 4)],
        Component::D(n) => vec![
            (Rule::DQuad, 16 * binom(n as u64, 4), d_sys(n as i64 - 4), 4),
            (Rule::DPair, 2 * n as u64, RootSystem::empty(), n as usize),
        ],
        Component::E(6) => vec![(Rule::E6, 270, RootSystem::empty(), 5)],
        Component::E(7) => vec![(Rule::E7, 756, RootSystem::single(Component::A(1)), 6)],
        Component::E(_) => vec![(Rule::E8, 2160, RootSystem::empty(), 8)],
        Component::Z => vec![],
    }
}

/// Per-orbit normalisation: a reduced lattice of dimension 8k−1−κ has
/// |Aut| = 2|Aut(Λ)| / (c(v)·2^κ κ!).
fn orbit_factor(kappa: usize) -> BigUint {
    (BigUint::one() << (kappa - 1)) * factorial(kappa)
}

fn add(t: &mut OddMassTable, n: usize, r: RootSystem, source: &RootSystem, rule: Rule, mass: BigRational) {
    let v = t.entries.entry((n, r)).or_default();
    match v.iter_mut().find(|s| s.rule == rule && &s.source == source) {
        Some(s) => s.mass += mass,
        None => v.push(Summand { source: source.clone(), rule, mass }),
    }
}

/// Masses of odd unimodular lattices of minimal norm 2 in dimensions
/// ≤ 8k−2 obtained from a complete even table in dimension 8k.
pub fn reduce_masses(even: &MassTable) -> Result<OddMassTable, ReduceError> {
    if !even.is_complete() {
        return Err(ReduceError::Incomplete);
    }
    let top = even.dim as usize;
    let mut t = OddMassTable { base_dim: even.dim, entries: BTreeMap::new() };
    let q = |x: u64| BigRational::from_integer(BigInt::from(x));
    for (r, m) in even.nonzero() {
        let parts = r.parts();
        // Case 1: roots from two different component instances.
        for (i, &(c1, m1)) in parts.iter().enumerate() {
            for &(c2, m2) in &parts[i..] {
                let pairs = if c1 == c2 { m1 as u64 * (m1 as u64 - 1) / 2 } else { m1 as u64 * m2 as u64 };
                if pairs == 0 {
                    continue;
                }
                let target = r.without(c1).without(c2).union(&hat(c1)).union(&hat(c2));
                let v = pairs * c1.root_count() * c2.root_count();
                add(&mut t, top - 2, target, r, Rule::Pair, m * q(v));
            }
        }
        // Case 2: both roots in one component.
        for &(c, mult) in parts {
            for (rule, v, tilde, drop) in inner_rules(c) {
                if v == 0 || drop > top {
                    continue;
                }
                let n = top - drop;
                let kappa = top - 1 - n;
                let target = r.without(c).union(&tilde);
                let w = BigRational::from_integer(BigInt::from(orbit_factor(kappa)));
                add(&mut t, n, target, r, rule, m * q(v * mult as u64) * w);
            }
        }
    }
    for ((n, r), v) in &t.entries {
        for s in v {
            if s.mass.is_negative() {
                return Err(ReduceError::Negative { n: *n, root_system: r.to_string(), mass: format_rational(&s.mass) });
            }
        }
    }
    Ok(t)
}

fn weyl(r: &str) -> BigRational {
    let r: RootSystem = r.parse().expect("static root system");
    BigRational::from_integer(BigInt::from(r.weyl_order()))
}

/// Closed forms for m_n(∅) in terms of even masses, n = 8k−9 ..= 8k−2
/// (including even lattices when 8 | n).
pub fn no_root_closed_form(even: &MassTable, n: usize) -> BigRational {
    let top = even.dim as usize;
    let m = |s: &str| even.mass_of(&s.parse().expect("static root system")).cloned().unwrap_or_else(BigRational::zero);
    let term = |s: &str| m(s) * weyl(s);
    let d = |j: usize| format!("D{j}");
    match top - n {
        8 => term("D8") + term("E8"),
        5 => term("D5") + term("E6"),
        4 => m("D4") * weyl("D4") * BigRational::from_integer(3.into()) + term("D5"),
        3 => term("A3") + term("A4"),
        2 => term("A1^2") + term("A1 A2") + term("A2^2"),
        j if j >= 6 => term(&d(j)),
        _ => BigRational::zero(),
    }
}

/// m_n(∅) for n = 8k−9 ..= 8k−2 via the reduction, each checked against
/// its closed form.
pub fn no_root_masses(even: &MassTable) -> Result<BTreeMap<usize, BigRational>, ReduceError> {
    let odd = reduce_masses(even)?;
    let top = even.dim as usize;
    let mut out = BTreeMap::new();
    for n in top.saturating_sub(9)..=top - 2 {
        let got = odd.reduced_mass(n, &RootSystem::empty());
        let expected = no_root_closed_form(even, n);
        if got != expected {
            return Err(ReduceError::ClosedForm { n, got: format_rational(&got), expected: format_rational(&expected) });
        }
        out.insert(n, got);
    }
    Ok(out)
}

pub const NORM4_IN_MINIMAL_31: u64 = 146880;

/// Vectors of norm ≡ 0 mod 4 in the shadow-free count for n ≡ 0 mod 8:
/// 2^{n−1} + 2^{n/2−1}.
pub fn milgram_count(n: u32) -> BigUint {
    (BigUint::one() << (n - 1)) + (BigUint::one() << (n / 2 - 1))
}

/// Lower bound on m_31(∅) from a dimension-32 no-root mass.
pub fn bound_dim31(m32_noroots: &BigRational) -> BigRational {
    m32_noroots * BigRational::new(BigInt::from(NORM4_IN_MINIMAL_31), BigInt::from(2))
}

/// Lower bound on the odd part of m_32(∅).
pub fn bound_dim32_odd(m32_noroots: &BigRational) -> BigRational {
    let neighbours = BigInt::from(milgram_count(32)) - BigInt::from(NORM4_IN_MINIMAL_31 / 2) - 1;
    m32_noroots * BigRational::new(neighbours, BigInt::from(2))
}

/// w′(R): |W(R)| if −1 lies in the reflection group and R spans the
/// lattice, 2|W(R)| otherwise. Z^j contributes its signed permutations.
pub fn w_prime(r: &RootSystem, n: usize) -> BigUint {
    let w = r.weyl_order();
    let minus_one = r.parts().iter().all(|&(c, _)| match c {
        Component::A(1) | Component::E(7) | Component::E(8) | Component::Z => true,
        Component::D(k) => k % 2 == 0,
        _ => false,
    });
    if r.rank() == n && minus_one {
        w
    } else {
        w * 2u32
    }
}

/// ⟨q + a/b⟩ = q, q+1, q+2 for a = 0, a = 1, a > 1: a lower bound on the
/// number of classes of total mass x when each has |Aut| dividing x's
/// denominator structure.
pub fn mod_ceiling(x: &BigRational) -> Result<BigInt, ReduceError> {
    if x.is_negative() {
        return Err(ReduceError::NegativeInput);
    }
    let (q, a) = x.numer().div_rem(x.denom());
    let frac = BigRational::new(a, x.denom().clone());
    Ok(if frac.is_zero() {
        q
    } else if frac.numer().is_one() {
        q + 1
    } else {
        q + 2
    })
}

/// Σ⟨m(R)·w′(R)⟩ over an even table.
pub fn class_bound_even(even: &MassTable) -> BigInt {
    even.nonzero()
        .map(|(r, m)| {
            let w = BigRational::from_integer(BigInt::from(w_prime(r, even.dim as usize)));
            mod_ceiling(&(m * w)).expect("masses are nonnegative")
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub n: usize,
    /// Lower bound β_n on the number of classes of odd lattices.
    pub beta: BigInt,
    /// Number of root systems (Z components allowed) of positive odd mass.
    pub root_systems: usize,
    /// Total mass of the odd lattices counted.
    pub mass: BigRational,
}

/// Class-number lower bound for odd unimodular lattices of dimension n,
/// each source summand bounded separately. `even_lower` must hold
/// complete even tables for every dimension 8j with 8 ≤ 8j < 8k−8 (the
/// empty dimension-0 lattice is built in); their masses are removed so
/// that only odd lattices are counted.
pub fn class_lower_bound(odd: &OddMassTable, n: usize, even_lower: &[&MassTable]) -> Result<BoundReport, ReduceError> {
    let top = odd.base_dim as usize;
    if n == 0 || n > top - 2 {
        return Err(ReduceError::BadDimension { n, max: top - 2 });
    }
    let even_mass = |n0: usize, r: &RootSystem| -> Result<BigRational, ReduceError> {
        if n0 == 0 {
            return Ok(if r.is_empty() { BigRational::one() } else { BigRational::zero() });
        }
        let t = even_lower.iter().find(|t| t.dim as usize == n0 && t.is_complete()).ok_or(ReduceError::MissingEven(n0))?;
        Ok(t.mass_of(r).cloned().unwrap_or_else(BigRational::zero))
    };
    let mut beta = BigInt::zero();
    let mut count = 0;
    let mut total = BigRational::zero();
    let mut groups: Vec<(usize, RootSystem, Vec<BigRational>)> = Vec::new();
    for ((n0, r), summands) in &odd.entries {
        if *n0 > n {
            continue;
        }
        // Only an unaugmented lattice of dimension 8j can be even.
        let parity_split = *n0 == n && n % 8 == 0;
        let mut vals = Vec::new();
        for s in summands {
            let mut m = s.mass.clone();
            if parity_split && n == top - 8 && s.rule == Rule::E8 {
                continue;
            }
            if parity_split && n < top - 8 && s.rule == Rule::DPair {
                m -= even_mass(n, r)?;
                if m.is_negative() {
                    return Err(ReduceError::Negative { n, root_system: r.to_string(), mass: format_rational(&m) });
                }
            }
            vals.push(m);
        }
        groups.push((*n0, r.clone(), vals));
    }
    for (n0, r, vals) in groups {
        let j = n - n0;
        let full = r.with_many(Component::Z, j as u32);
        let zj = BigRational::from_integer(BigInt::from(z_order(j)));
        let scale = BigRational::from_integer(BigInt::from(w_prime(&full, n))) / &zj;
        let mut positive = false;
        for m in vals {
            if m.is_zero() {
                continue;
            }
            positive = true;
            total += &m / &zj;
            beta += mod_ceiling(&(m * &scale))?;
        }
        if positive {
            count += 1;
        }
    }
    Ok(BoundReport { n, beta, root_systems: count, mass: total })
}
