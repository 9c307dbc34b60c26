//! Root systems as canonical multisets of irreducible components
//! (A_n, D_n, E_6/7/8, and Z for odd-lattice bookkeeping).

use std::cmp::Reverse;
use std::fmt;
use std::str::FromStr;

use dashmap::DashMap;
use num_bigint::BigUint;
use num_traits::One;
use once_cell::sync::Lazy;
use thiserror::Error;

use crate::padic::{jordan_decompose, HalfIntegralMatrix, JordanDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootSystemError {
    #[error("malformed root-system token {0:?}")]
    Malformed(String),
    #[error("component {0} out of range")]
    OutOfRange(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    A(u32),
    D(u32),
    E(u32),
    Z,
}

impl Component {
    pub fn validate(self) -> Result<Self, RootSystemError> {
        let ok = match self {
            Component::A(n) => n >= 1,
            Component::D(n) => n >= 4,
            Component::E(n) => (6..=8).contains(&n),
            Component::Z => true,
        };
        if ok {
            Ok(self)
        } else {
            Err(RootSystemError::OutOfRange(self.to_string()))
        }
    }

    pub fn rank(self) -> usize {
        match self {
            Component::A(n) | Component::D(n) | Component::E(n) => n as usize,
            Component::Z => 1,
        }
    }

    pub fn det(self) -> u64 {
        match self {
            Component::A(n) => n as u64 + 1,
            Component::D(_) => 4,
            Component::E(6) => 3,
            Component::E(7) => 2,
            Component::E(_) | Component::Z => 1,
        }
    }

    pub fn root_count(self) -> u64 {
        match self {
            Component::A(n) => n as u64 * (n as u64 + 1),
            Component::D(n) => 2 * n as u64 * (n as u64 - 1),
            Component::E(6) => 72,
            Component::E(7) => 126,
            Component::E(_) => 240,
            Component::Z => 2,
        }
    }

    pub fn weyl_order(self) -> BigUint {
        match self {
            Component::A(n) => factorial(n as u64 + 1),
            Component::D(n) => (BigUint::one() << (n - 1)) * factorial(n as u64),
            Component::E(6) => BigUint::from(51840u32),
            Component::E(7) => BigUint::from(2903040u32),
            Component::E(_) => BigUint::from(696729600u32),
            Component::Z => BigUint::from(2u32),
        }
    }

    pub fn aut_order(self) -> BigUint {
        match self {
            Component::A(1) => BigUint::from(2u32),
            Component::A(n) => factorial(n as u64 + 1) * 2u32,
            Component::D(4) => BigUint::from(1152u32),
            Component::D(n) => (BigUint::one() << n) * factorial(n as u64),
            Component::E(6) => BigUint::from(103680u32),
            Component::E(7) => BigUint::from(2903040u32),
            Component::E(_) => BigUint::from(696729600u32),
            Component::Z => BigUint::from(2u32),
        }
    }

    /// Gram matrix of the simple roots (Bourbaki numbering for E).
    pub fn gram(self) -> Vec<Vec<i64>> {
        let n = self.rank();
        let mut g = vec![vec![0i64; n]; n];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |a: usize, b: usize| {
            g[a][b] = -1;
            g[b][a] = -1;
        };
        match self {
            Component::A(_) => (0..n - 1).for_each(|i| link(i, i + 1)),
            Component::D(_) => {
                (0..n - 2).for_each(|i| link(i, i + 1));
                link(n - 3, n - 1);
            }
            Component::E(_) => {
                for (a, b) in [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)] {
                    if a < n && b < n {
                        link(a, b);
                    }
                }
            }
            Component::Z => return vec![vec![1]],
        }
        g
    }

    pub fn jordan(self, p: u64) -> JordanDecomposition {
        static CACHE: Lazy<DashMap<(Component, u64), JordanDecomposition>> = Lazy::new(DashMap::new);
        if let Some(j) = CACHE.get(&(self, p)) {
            return j.clone();
        }
        let b = HalfIntegralMatrix::from_gram_i64(&self.gram()).expect("Z has no half-integral form");
        let j = jordan_decompose(&b, p).expect("root lattices are nonsingular");
        CACHE.insert((self, p), j.clone());
        j
    }
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |a, i| a * i)
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::A(n) => write!(f, "A{n}"),
            Component::D(n) => write!(f, "D{n}"),
            Component::E(n) => write!(f, "E{n}"),
            Component::Z => write!(f, "Z"),
        }
    }
}

impl FromStr for Component {
    type Err = RootSystemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RootSystemError::Malformed(s.to_string());
        if s == "Z" {
            return Ok(Component::Z);
        }
        let (head, idx) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        let n: u32 = idx.parse().map_err(|_| bad())?;
        let c = match head {
            "A" => Component::A(n),
            "D" => Component::D(n),
            "E" => Component::E(n),
            _ => return Err(bad()),
        };
        c.validate()
    }
}

/// Canonically sorted multiset of components (component, multiplicity).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RootSystem {
    comps: Vec<(Component, u32)>,
}

impl RootSystem {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_components(it: impl IntoIterator<Item = Component>) -> Self {
        let mut v: Vec<Component> = it.into_iter().collect();
        v.sort_unstable();
        let mut comps: Vec<(Component, u32)> = Vec::new();
        for c in v {
            match comps.last_mut() {
                Some((d, m)) if *d == c => *m += 1,
                _ => comps.push((c, 1)),
            }
        }
        Self { comps }
    }

    pub fn single(c: Component) -> Self {
        Self { comps: vec![(c, 1)] }
    }

    /// (component, multiplicity) pairs in canonical order.
    pub fn parts(&self) -> &[(Component, u32)] {
        &self.comps
    }

    pub fn components(&self) -> impl Iterator<Item = Component> + '_ {
        self.comps.iter().flat_map(|&(c, m)| std::iter::repeat(c).take(m as usize))
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn multiplicity(&self, c: Component) -> u32 {
        self.comps.iter().find(|(d, _)| *d == c).map_or(0, |&(_, m)| m)
    }

    pub fn count(&self) -> u32 {
        self.comps.iter().map(|&(_, m)| m).sum()
    }

    pub fn rank(&self) -> usize {
        self.comps.iter().map(|&(c, m)| c.rank() * m as usize).sum()
    }

    pub fn det(&self) -> BigUint {
        self.comps.iter().fold(BigUint::one(), |a, &(c, m)| a * BigUint::from(c.det()).pow(m))
    }

    pub fn root_count(&self) -> u64 {
        self.comps.iter().map(|&(c, m)| c.root_count() * m as u64).sum()
    }

    pub fn weyl_order(&self) -> BigUint {
        // Z^j contributes its signed-permutation group 2^j·j!
        self.comps.iter().fold(BigUint::one(), |a, &(c, m)| match c {
            Component::Z => a * (BigUint::one() << m) * factorial(m as u64),
            _ => a * c.weyl_order().pow(m),
        })
    }

    pub fn aut_order(&self) -> BigUint {
        self.comps.iter().fold(BigUint::one(), |a, &(c, m)| a * c.aut_order().pow(m) * factorial(m as u64))
    }

    pub fn z_count(&self) -> u32 {
        self.multiplicity(Component::Z)
    }

    pub fn has_z(&self) -> bool {
        self.z_count() > 0
    }

    pub fn with(&self, c: Component) -> Self {
        self.with_many(c, 1)
    }

    pub fn with_many(&self, c: Component, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let mut comps = self.comps.clone();
        match comps.binary_search_by(|(d, _)| d.cmp(&c)) {
            Ok(i) => comps[i].1 += k,
            Err(i) => comps.insert(i, (c, k)),
        }
        Self { comps }
    }

    pub fn union(&self, other: &Self) -> Self {
        other.comps.iter().fold(self.clone(), |acc, &(c, m)| acc.with_many(c, m))
    }

    /// Removes one copy of `c`; panics if absent.
    pub fn without(&self, c: Component) -> Self {
        let mut comps = self.comps.clone();
        let i = comps.iter().position(|(d, _)| *d == c).expect("component not present");
        if comps[i].1 == 1 {
            comps.remove(i);
        } else {
            comps[i].1 -= 1;
        }
        Self { comps }
    }

    /// Gram matrix of the simple roots, block diagonal.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let n = self.rank();
        let mut g = vec![vec![0; n]; n];
        let mut off = 0;
        for c in self.components() {
            let b = c.gram();
            for (i, row) in b.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    g[off + i][off + j] = x;
                }
            }
            off += b.len();
        }
        g
    }

    pub fn half_integral(&self) -> Option<HalfIntegralMatrix> {
        if self.has_z() {
            return None;
        }
        HalfIntegralMatrix::from_gram_i64(&self.gram()).ok()
    }

    /// Jordan form at p assembled from cached per-component forms.
    pub fn jordan(&self, p: u64) -> JordanDecomposition {
        let parts: Vec<JordanDecomposition> = self.components().map(|c| c.jordan(p)).collect();
        JordanDecomposition::direct_sum(p, parts.iter())
    }

    pub fn is_square_det(&self) -> bool {
        let d = self.det();
        let r = d.sqrt();
        &r * &r == d
    }
}

impl fmt::Display for RootSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, m)) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *m == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}^{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for RootSystem {
    type Err = RootSystemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "0" || s == "∅" {
            return Ok(Self::empty());
        }
        let mut out = Vec::new();
        for tok in s.split_whitespace() {
            let (base, mult) = match tok.split_once('^') {
                Some((b, m)) => (b, m.parse::<u32>().map_err(|_| RootSystemError::Malformed(tok.into()))?),
                None => (tok, 1),
            };
            if mult == 0 {
                return Err(RootSystemError::Malformed(tok.into()));
            }
            let c: Component = base.parse()?;
            out.extend(std::iter::repeat(c).take(mult as usize));
        }
        Ok(Self::from_components(out))
    }
}

pub fn parse_root_system(text: &str) -> Result<RootSystem, RootSystemError> {
    text.parse()
}

/// Which a-priori eliminations to apply during enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Filters {
    /// Borcherds' root-count congruences (dimension 32 only).
    pub congruences: bool,
    /// Drop full-rank systems whose determinant is not a square.
    pub square_det: bool,
}

impl Filters {
    pub const ALL: Filters = Filters { congruences: true, square_det: true };
    pub const NONE: Filters = Filters { congruences: false, square_det: false };
}

/// Borcherds' congruences for root systems of 32-dimensional even
/// unimodular lattices; other dimensions always pass.
pub fn borcherds_filter(r: &RootSystem, dim: u32) -> bool {
    if dim != 32 {
        return true;
    }
    let roots = r.root_count();
    let has = |c| r.multiplicity(c) > 0;
    let rules: [(bool, u64); 7] = [
        (has(Component::E(8)), 24),
        (has(Component::E(7)), 12),
        (has(Component::E(6)), 6),
        (has(Component::D(6)), 4),
        (has(Component::D(7)), 8),
        (has(Component::D(8)), 8),
        (r.parts().iter().any(|(c, _)| matches!(c, Component::D(n) if *n > 8)), 16),
    ];
    rules.iter().all(|&(applies, m)| !applies || roots % m == 0)
}

pub fn irreducibles(max_rank: usize) -> Vec<Component> {
    let m = max_rank as u32;
    let mut v: Vec<Component> = (1..=m).map(Component::A).collect();
    v.extend((4..=m).map(Component::D));
    v.extend((6..=m.min(8)).map(Component::E));
    v
}

/// Canonical enumeration order: rank ascending, determinant descending,
/// canonical string ascending.
pub fn sort_canonical(v: &mut Vec<RootSystem>) {
    let mut keyed: Vec<_> = v.drain(..).map(|r| ((r.rank(), Reverse(r.det()), r.to_string()), r)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    v.extend(keyed.into_iter().map(|(_, r)| r));
}

/// All root systems without Z of rank ≤ max_rank, in canonical order.
pub fn enumerate_root_systems(max_rank: usize, dim: u32, filters: Filters) -> Vec<RootSystem> {
    let irr = irreducibles(max_rank);
    let mut out = Vec::new();
    let mut cur: Vec<Component> = Vec::new();
    fn rec(irr: &[Component], start: usize, rem: usize, cur: &mut Vec<Component>, out: &mut Vec<RootSystem>) {
        out.push(RootSystem::from_components(cur.iter().copied()));
        for i in start..irr.len() {
            if irr[i].rank() <= rem {
                cur.push(irr[i]);
                rec(irr, i, rem - irr[i].rank(), cur, out);
                cur.pop();
            }
        }
    }
    rec(&irr, 0, max_rank, &mut cur, &mut out);
    out.retain(|r| {
        (!filters.congruences || borcherds_filter(r, dim))
            && (!filters.square_det || r.rank() != dim as usize || r.is_square_det())
    });
    sort_canonical(&mut out);
    out
}
