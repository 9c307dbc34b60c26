//! Half-integral matrices and their local invariants: Jordan decompositions
//! over Z_p, Hilbert symbols, Hasse invariants and the symbols χ_p, ξ_p,
//! η_p, δ_p, d_p, i_p used by the local-density recursion.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::{int, kronecker_symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not half-integral (2B must be integral with even diagonal)")]
    NotHalfIntegral,
    #[error("matrix is singular")]
    Singular,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("Hilbert symbol of zero")]
    ZeroArgument,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// ord_p of a nonzero integer.
pub fn ord(x: &BigInt, p: u64) -> i64 {
    assert!(!x.is_zero(), "ord of zero");
    let pb = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

pub fn ord_q(x: &BigRational, p: u64) -> i64 {
    ord(x.numer(), p) - ord(x.denom(), p)
}

/// Unit part of x (x / p^ord) reduced mod m, where gcd(m, p-part) is fine
/// because the unit part is a p-adic unit.
fn unit_residue(x: &BigRational, p: u64, m: u64) -> u64 {
    let v = ord_q(x, p);
    let pb = BigInt::from(p);
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    if v > 0 {
        n /= pb.pow(v as u32);
    } else if v < 0 {
        d /= pb.pow((-v) as u32);
    }
    let mb = BigInt::from(m);
    let n = n.mod_floor(&mb).to_u64().unwrap();
    let d = d.mod_floor(&mb).to_u64().unwrap();
    (n as u128 * mod_inverse(d, m) as u128 % m as u128) as u64
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let e = num_integer::Integer::extended_gcd(&(a as i128), &(m as i128));
    assert!(e.gcd == 1, "not invertible");
    e.x.rem_euclid(m as i128) as u64
}

fn legendre(a: u64, p: u64) -> i8 {
    kronecker_symbol((a % p) as i64, p as i64)
}

/// Least positive quadratic non-residue mod an odd prime.
pub fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| legendre(a, p) == -1).expect("odd prime")
}

/// A p-adic number up to unit squares: p^v · u with u a unit residue
/// (mod 8 for p = 2, mod p otherwise).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalClass {
    pub v: i64,
    pub u: u64,
}

impl LocalClass {
    pub fn of(x: &BigRational, p: u64) -> Self {
        let m = if p == 2 { 8 } else { p };
        Self { v: ord_q(x, p), u: unit_residue(x, p, m) }
    }

    fn modulus(p: u64) -> u64 {
        if p == 2 {
            8
        } else {
            p
        }
    }

    pub fn mul(self, o: Self, p: u64) -> Self {
        let m = Self::modulus(p);
        Self { v: self.v + o.v, u: (self.u as u128 * o.u as u128 % m as u128) as u64 }
    }

    pub fn neg(self, p: u64) -> Self {
        let m = Self::modulus(p);
        Self { v: self.v, u: (m - self.u % m) % m }
    }
}

/// (a, b)_p on local classes.
pub fn hilbert_local(a: LocalClass, b: LocalClass, p: u64) -> i8 {
    if p == 2 {
        let eps = |x: u64| ((x % 8 - 1) / 2) % 2;
        let om = |x: u64| ((x % 8) * (x % 8) - 1) / 8 % 2;
        let e = eps(a.u) * eps(b.u) + (a.v.rem_euclid(2) as u64) * om(b.u) + (b.v.rem_euclid(2) as u64) * om(a.u);
        if e % 2 == 1 {
            -1
        } else {
            1
        }
    } else {
        let mut r: i8 = 1;
        if (a.v * b.v).rem_euclid(2) == 1 && (p - 1) / 2 % 2 == 1 {
            r = -r;
        }
        if b.v.rem_euclid(2) == 1 {
            r *= legendre(a.u, p);
        }
        if a.v.rem_euclid(2) == 1 {
            r *= legendre(b.u, p);
        }
        r
    }
}

/// Place of Q: a finite prime or the real place.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Finite(u64),
    Infinite,
}

pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: Place) -> Result<i8, PadicError> {
    if a.is_zero() || b.is_zero() {
        return Err(PadicError::ZeroArgument);
    }
    match place {
        Place::Infinite => Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Finite(p) => {
            if !is_prime(p) {
                return Err(PadicError::NotPrime(p));
            }
            Ok(hilbert_local(LocalClass::of(a, p), LocalClass::of(b, p), p))
        }
    }
}

/// χ_p on a local class.
pub fn chi_local(x: LocalClass, p: u64) -> i8 {
    if x.v.rem_euclid(2) == 1 {
        return 0;
    }
    if p == 2 {
        match x.u % 8 {
            1 => 1,
            5 => -1,
            _ => 0,
        }
    } else {
        legendre(x.u, p)
    }
}

pub fn chi_p(a: &BigRational, p: u64) -> i8 {
    assert!(!a.is_zero());
    chi_local(LocalClass::of(a, p), p)
}

/// Symmetric matrix B with 2B integral and even on the diagonal; stored as 2B.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfIntegralMatrix {
    twice: Vec<Vec<BigInt>>,
}

impl HalfIntegralMatrix {
    /// From an even Gram matrix N; B = N/2.
    pub fn from_gram(rows: Vec<Vec<BigInt>>) -> Result<Self, PadicError> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(PadicError::NotSymmetric);
            }
            for j in 0..n {
                if rows[j][i] != r[j] {
                    return Err(PadicError::NotSymmetric);
                }
            }
            if r[i].is_odd() {
                return Err(PadicError::NotHalfIntegral);
            }
        }
        Ok(Self { twice: rows })
    }

    pub fn from_gram_i64(rows: &[Vec<i64>]) -> Result<Self, PadicError> {
        Self::from_gram(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    /// From the entries of B itself.
    pub fn from_entries(rows: &[Vec<BigRational>]) -> Result<Self, PadicError> {
        let two = int(2);
        let mut g = Vec::with_capacity(rows.len());
        for r in rows {
            let mut gr = Vec::with_capacity(r.len());
            for x in r {
                let y = x * &two;
                if !y.is_integer() {
                    return Err(PadicError::NotHalfIntegral);
                }
                gr.push(y.to_integer());
            }
            g.push(gr);
        }
        Self::from_gram(g)
    }

    pub fn empty() -> Self {
        Self { twice: vec![] }
    }

    pub fn rank(&self) -> usize {
        self.twice.len()
    }

    /// The even integral matrix 2B.
    pub fn gram(&self) -> &[Vec<BigInt>] {
        &self.twice
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.twice[i][j].clone(), BigInt::from(2))
    }

    pub fn entries(&self) -> Vec<Vec<BigRational>> {
        (0..self.rank()).map(|i| (0..self.rank()).map(|j| self.entry(i, j)).collect()).collect()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.rank(), other.rank());
        let mut g = vec![vec![BigInt::zero(); a + b]; a + b];
        for i in 0..a {
            for j in 0..a {
                g[i][j] = self.twice[i][j].clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                g[a + i][a + j] = other.twice[i][j].clone();
            }
        }
        Self { twice: g }
    }

    /// det(2B), by fraction-free elimination.
    pub fn gram_det(&self) -> BigInt {
        bareiss_det(&self.twice)
    }

    pub fn det(&self) -> BigRational {
        BigRational::new(self.gram_det(), BigInt::one() << self.rank())
    }

    /// D(B) = 2^(2⌊n/2⌋)·det B (an integer).
    pub fn discriminant(&self) -> BigInt {
        let n = self.rank();
        let d = self.det() * int(BigInt::one() << (2 * (n / 2)));
        assert!(d.is_integer());
        d.to_integer()
    }

    /// d_p(B) = ord_p D(B).
    pub fn d_p(&self, p: u64) -> i64 {
        ord(&self.discriminant(), p)
    }

    pub fn inverse(&self) -> Option<Vec<Vec<BigRational>>> {
        let n = self.rank();
        let mut m: Vec<Vec<BigRational>> = self.entries();
        let mut inv: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
        for c in 0..n {
            let piv = (c..n).find(|&r| !m[r][c].is_zero())?;
            m.swap(c, piv);
            inv.swap(c, piv);
            let f = m[c][c].recip();
            for j in 0..n {
                m[c][j] = &m[c][j] * &f;
                inv[c][j] = &inv[c][j] * &f;
            }
            for r in 0..n {
                if r != c && !m[r][c].is_zero() {
                    let g = m[r][c].clone();
                    for j in 0..n {
                        let t = &m[c][j] * &g;
                        m[r][j] -= t;
                        let t = &inv[c][j] * &g;
                        inv[r][j] -= t;
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.rational_diagonal().is_ok_and(|d| d.iter().all(|x| x.is_positive()))
    }

    /// A rational diagonalization of B (congruent over Q).
    pub fn rational_diagonal(&self) -> Result<Vec<BigRational>, PadicError> {
        let mut m = self.entries();
        let mut out = Vec::with_capacity(m.len());
        while !m.is_empty() {
            let n = m.len();
            let piv = match (0..n).find(|&i| !m[i][i].is_zero()) {
                Some(i) => i,
                None => {
                    // isotropic diagonal: x_i ← x_i + x_j with B_ij ≠ 0
                    let (i, j) = (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .find(|&(i, j)| i != j && !m[i][j].is_zero())
                        .ok_or(PadicError::Singular)?;
                    add_row_col(&mut m, i, j);
                    i
                }
            };
            let a = m[piv][piv].clone();
            let rest: Vec<usize> = (0..n).filter(|&k| k != piv).collect();
            let next = rest
                .iter()
                .map(|&r| rest.iter().map(|&c| &m[r][c] - &m[r][piv] * &m[piv][c] / &a).collect())
                .collect();
            out.push(a);
            m = next;
        }
        Ok(out)
    }
}

fn add_row_col(m: &mut [Vec<BigRational>], i: usize, j: usize) {
    let n = m.len();
    for k in 0..n {
        let t = m[j][k].clone();
        m[i][k] += t;
    }
    for k in 0..n {
        let t = m[k][j].clone();
        m[k][i] += t;
    }
}

fn bareiss_det(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// A Jordan constituent of B over Z_p (in terms of B, not 2B).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    /// p^e·u, u a unit residue (mod 8 at p = 2; 1 or ε for odd p).
    Unit { e: i64, u: u64 },
    /// 2^e·H, H = (0 1/2; 1/2 0).
    H { e: i64 },
    /// 2^e·Y, Y = (1 1/2; 1/2 1).
    Y { e: i64 },
}

impl Block {
    pub fn exponent(&self) -> i64 {
        match *self {
            Block::Unit { e, .. } | Block::H { e } | Block::Y { e } => e,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Block::Unit { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Block::Unit { .. })
    }

    /// Same block at another scale.
    pub fn with_exponent(&self, e: i64) -> Block {
        match *self {
            Block::Unit { u, .. } => Block::Unit { e, u },
            Block::H { .. } => Block::H { e },
            Block::Y { .. } => Block::Y { e },
        }
    }

    fn det(&self, p: u64) -> LocalClass {
        match *self {
            Block::Unit { e, u } => LocalClass { v: e, u },
            // det(2^e H) = −4^e/4, det(2^e Y) = 3·4^e/4
            Block::H { e } => LocalClass { v: 2 * e - 2, u: LocalClass::modulus(p) - 1 },
            Block::Y { e } => LocalClass { v: 2 * e - 2, u: 3 },
        }
    }

    /// Rational diagonal entries (2^e H ≅ ⟨2^e, −2^e⟩, 2^e Y ≅ ⟨2^e, 3·2^e⟩).
    fn diagonal(&self, p: u64) -> Vec<LocalClass> {
        match *self {
            Block::Unit { e, u } => vec![LocalClass { v: e, u }],
            Block::H { e } => vec![LocalClass { v: e, u: 1 }, LocalClass { v: e, u: LocalClass::modulus(p) - 1 }],
            Block::Y { e } => vec![LocalClass { v: e, u: 1 }, LocalClass { v: e, u: 3 }],
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Unit { e, u } => write!(f, "{u}·p^{e}"),
            Block::H { e } => write!(f, "2^{e}·H"),
            Block::Y { e } => write!(f, "2^{e}·Y"),
        }
    }
}

/// Normalized Jordan form: blocks by non-increasing exponent; within an
/// exponent the (at most two, at p = 2) units come first, then H's, then
/// at most one Y.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanDecomposition {
    p: u64,
    blocks: Vec<Block>,
}

impl JordanDecomposition {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub fn from_blocks(p: u64, blocks: Vec<Block>) -> Self {
        Self { p, blocks: normalize(p, blocks) }
    }

    /// Jordan form of an orthogonal sum.
    pub fn direct_sum<'a>(p: u64, parts: impl IntoIterator<Item = &'a JordanDecomposition>) -> Self {
        let blocks = parts.into_iter().flat_map(|j| j.blocks.iter().copied()).collect();
        Self::from_blocks(p, blocks)
    }

    pub fn rank(&self) -> usize {
        rank(&self.blocks)
    }

    pub fn det_class(&self) -> LocalClass {
        det_class(&self.blocks, self.p)
    }
}

pub fn jordan_decompose(b: &HalfIntegralMatrix, p: u64) -> Result<JordanDecomposition, PadicError> {
    if !is_prime(p) {
        return Err(PadicError::NotPrime(p));
    }
    if b.rank() > 0 && b.gram_det().is_zero() {
        return Err(PadicError::Singular);
    }
    Ok(JordanDecomposition::from_blocks(p, raw_jordan(b.gram(), p)))
}

// Diagonalize G = 2B over Z_(p), pivoting on minimal valuation.
fn raw_jordan(g: &[Vec<BigInt>], p: u64) -> Vec<Block> {
    let mut m: Vec<Vec<BigRational>> =
        g.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let mut blocks = Vec::new();
    let eps = if p == 2 { 0 } else { least_nonresidue(p) };
    while !m.is_empty() {
        let n = m.len();
        let val = |x: &BigRational| if x.is_zero() { i64::MAX } else { ord_q(x, p) };
        let mut best = (i64::MAX, 0, 0);
        for i in 0..n {
            let v = val(&m[i][i]);
            if v < best.0 {
                best = (v, i, i);
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = val(&m[i][j]);
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (v, i, j) = best;
        assert!(v < i64::MAX, "singular form in Jordan decomposition");
        if i != j && p != 2 {
            add_row_col(&mut m, i, j);
        }
        if i == j || p != 2 {
            let a = m[i][i].clone();
            let rest: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            let next = rest
                .iter()
                .map(|&r| rest.iter().map(|&c| &m[r][c] - &m[r][i] * &m[i][c] / &a).collect())
                .collect();
            if p == 2 {
                blocks.push(Block::Unit { e: v - 1, u: unit_residue(&a, 2, 8) });
            } else {
                // entry of B is a/2
                let half = &a / int(2);
                let u = if legendre(unit_residue(&half, p, p), p) == 1 { 1 } else { eps };
                blocks.push(Block::Unit { e: v, u });
            }
            m = next;
        } else {
            let (a, b, c) = (m[i][i].clone(), m[i][j].clone(), m[j][j].clone());
            let det = &a * &c - &b * &b;
            let rest: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            let next = rest
                .iter()
                .map(|&r| {
                    rest.iter()
                        .map(|&s| {
                            let (x0, x1) = (&m[r][i], &m[r][j]);
                            let (y0, y1) = (&m[i][s], &m[j][s]);
                            let t = (x0 * &c * y0 - x0 * &b * y1 - x1 * &b * y0 + x1 * &a * y1) / &det;
                            &m[r][s] - t
                        })
                        .collect()
                })
                .collect();
            let d8 = unit_residue(&det, 2, 8);
            blocks.push(if d8 == 7 { Block::H { e: v } } else { Block::Y { e: v } });
            m = next;
        }
    }
    blocks
}

pub fn normalize(p: u64, blocks: Vec<Block>) -> Vec<Block> {
    use std::collections::BTreeMap;
    let mut out = Vec::with_capacity(blocks.len());
    if p != 2 {
        let eps = least_nonresidue(p);
        let mut by: BTreeMap<i64, (usize, i8)> = BTreeMap::new();
        for b in blocks {
            let Block::Unit { e, u } = b else { panic!("H/Y block at odd prime") };
            let ent = by.entry(e).or_insert((0, 1));
            ent.0 += 1;
            ent.1 *= legendre(u, p);
        }
        for (&e, &(c, s)) in by.iter().rev() {
            for _ in 1..c {
                out.push(Block::Unit { e, u: 1 });
            }
            out.push(Block::Unit { e, u: if s == 1 { 1 } else { eps } });
        }
        return out;
    }
    let mut units: BTreeMap<i64, Vec<u64>> = BTreeMap::new();
    let mut hs: BTreeMap<i64, usize> = BTreeMap::new();
    let mut ys: BTreeMap<i64, usize> = BTreeMap::new();
    for b in blocks {
        match b {
            Block::Unit { e, u } => units.entry(e).or_default().push(u % 8),
            Block::H { e } => *hs.entry(e).or_default() += 1,
            Block::Y { e } => *ys.entry(e).or_default() += 1,
        }
    }
    // ⟨a,b,c⟩ ≅ ⟨a+b+c⟩ ⊥ 2K, K = H or Y by the determinant
    let mut changed = true;
    while changed {
        changed = false;
        let keys: Vec<i64> = units.keys().copied().collect();
        for e in keys {
            let us = units.get_mut(&e).unwrap();
            while us.len() >= 3 {
                let c = us.pop().unwrap();
                let b = us.pop().unwrap();
                let a = us.pop().unwrap();
                let s = (a + b + c) % 8;
                let t = a * b * c * s % 8;
                us.push(s);
                if t == 7 {
                    *hs.entry(e + 1).or_default() += 1;
                } else {
                    debug_assert_eq!(t, 3);
                    *ys.entry(e + 1).or_default() += 1;
                }
                changed = true;
            }
        }
    }
    let mut exps: Vec<i64> = units.keys().chain(hs.keys()).chain(ys.keys()).copied().collect();
    exps.sort_unstable();
    exps.dedup();
    for &e in exps.iter().rev() {
        if let Some(us) = units.get(&e) {
            let mut us = us.clone();
            us.sort_unstable();
            out.extend(us.into_iter().map(|u| Block::Unit { e, u }));
        }
        let h = hs.get(&e).copied().unwrap_or(0);
        let y = ys.get(&e).copied().unwrap_or(0);
        let ny = y % 2; // Y ⊥ Y ≅ H ⊥ H
        out.extend(std::iter::repeat(Block::H { e }).take(h + y - ny));
        if ny == 1 {
            out.push(Block::Y { e });
        }
    }
    out
}

// ---- invariants of block lists ----

pub fn rank(blocks: &[Block]) -> usize {
    blocks.iter().map(Block::rank).sum()
}

pub fn det_class(blocks: &[Block], p: u64) -> LocalClass {
    blocks.iter().fold(LocalClass { v: 0, u: 1 }, |acc, b| acc.mul(b.det(p), p))
}

/// Hasse invariant ∏_{i<j} (a_i, a_j)_p over the block diagonalization.
pub fn hasse_blocks(blocks: &[Block], p: u64) -> i8 {
    let d: Vec<LocalClass> = blocks.iter().flat_map(|b| b.diagonal(p)).collect();
    let mut h = 1;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            h *= hilbert_local(d[i], d[j], p);
        }
    }
    h
}

/// Kitaoka's Hasse invariant ∏_{i≤j} (a_i, a_j)_p = h_{i<j}·(det, −1)_p.
pub fn hasse_kitaoka(blocks: &[Block], p: u64) -> i8 {
    let det = det_class(blocks, p);
    hasse_blocks(blocks, p) * hilbert_local(det, LocalClass { v: 0, u: 1 }.neg(p), p)
}

/// d_p = ord_p D(B).
pub fn d_blocks(blocks: &[Block], p: u64) -> i64 {
    let n = rank(blocks) as i64;
    det_class(blocks, p).v + if p == 2 { 2 * (n / 2) } else { 0 }
}

pub fn delta_blocks(blocks: &[Block], p: u64) -> i64 {
    let n = rank(blocks);
    let d = d_blocks(blocks, p);
    if n % 2 == 0 {
        2 * (d + 1 - if p == 2 { 1 } else { 0 }).div_euclid(2)
    } else {
        d
    }
}

/// ξ_p = χ_p((−1)^(n/2) det B), even rank only; 1 for the empty form.
pub fn xi_blocks(blocks: &[Block], p: u64) -> i8 {
    let n = rank(blocks);
    if n == 0 {
        return 1;
    }
    assert!(n % 2 == 0, "ξ_p needs even rank");
    let mut d = det_class(blocks, p);
    if (n / 2) % 2 == 1 {
        d = d.neg(p);
    }
    chi_local(d, p)
}

pub fn xi_prime_blocks(blocks: &[Block], p: u64) -> i8 {
    let x = xi_blocks(blocks, p);
    1 + x - x * x
}

/// η_p = h_p(B)·(det B, (−1)^((n−1)/2) det B)_p·(−1,−1)_p^((n²−1)/8), odd rank
/// only, with h_p in Kitaoka's convention.
pub fn eta_blocks(blocks: &[Block], p: u64) -> i8 {
    let n = rank(blocks);
    if n == 0 {
        return 1;
    }
    assert!(n % 2 == 1, "η_p needs odd rank");
    let d = det_class(blocks, p);
    let d2 = if ((n - 1) / 2) % 2 == 1 { d.neg(p) } else { d };
    let mut r = hasse_kitaoka(blocks, p) * hilbert_local(d, d2, p);
    if ((n * n - 1) / 8) % 2 == 1 && p == 2 {
        let m1 = LocalClass { v: 0, u: 7 };
        r *= hilbert_local(m1, m1, 2);
    }
    r
}

/// i_p from the blocks: least t with p^t·B^{-1} half-integral.
pub fn i_blocks(blocks: &[Block]) -> Option<i64> {
    blocks
        .iter()
        .map(|b| match *b {
            Block::Unit { e, .. } => e,
            Block::H { e } | Block::Y { e } => e - 2,
        })
        .max()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalInvariants {
    pub p: u64,
    /// ξ_p (even rank only).
    pub xi: Option<i8>,
    pub xi_prime: Option<i8>,
    /// η_p (odd rank only).
    pub eta: Option<i8>,
    pub delta: i64,
    pub d: i64,
    /// None for the empty matrix.
    pub i: Option<i64>,
}

pub fn hasse_invariant(b: &HalfIntegralMatrix, p: u64) -> Result<i8, PadicError> {
    if !is_prime(p) {
        return Err(PadicError::NotPrime(p));
    }
    let d = b.rational_diagonal()?;
    let mut h = 1;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            h *= hilbert_local(LocalClass::of(&d[i], p), LocalClass::of(&d[j], p), p);
        }
    }
    Ok(h)
}

/// i_p computed from B^{-1} directly.
pub fn i_p(b: &HalfIntegralMatrix, p: u64) -> Result<Option<i64>, PadicError> {
    if b.rank() == 0 {
        return Ok(None);
    }
    let inv = b.inverse().ok_or(PadicError::Singular)?;
    let n = b.rank();
    let mut t = i64::MIN;
    for i in 0..n {
        for j in 0..n {
            let x = &inv[i][j];
            if x.is_zero() {
                continue;
            }
            // diagonal must be integral, off-diagonal in ½Z
            let need = if i == j { -ord_q(x, p) } else { -ord_q(&(x * int(2)), p) };
            t = t.max(need);
        }
    }
    Ok(Some(t))
}

pub fn local_invariants(b: &HalfIntegralMatrix, p: u64) -> Result<LocalInvariants, PadicError> {
    let jd = jordan_decompose(b, p)?;
    let bl = jd.blocks();
    let n = b.rank();
    let (xi, xi_prime, eta) = if n % 2 == 0 {
        (Some(xi_blocks(bl, p)), Some(xi_prime_blocks(bl, p)), None)
    } else {
        (None, None, Some(eta_blocks(bl, p)))
    };
    Ok(LocalInvariants { p, xi, xi_prime, eta, delta: delta_blocks(bl, p), d: b.d_p(p), i: i_p(b, p)? })
}

/// Primes dividing a nonzero integer, by trial division.
pub fn prime_divisors(x: &BigInt) -> Vec<u64> {
    let mut x = x.abs();
    let mut out = Vec::new();
    let mut q = 2u64;
    while BigInt::from(q) * BigInt::from(q) <= x {
        let qb = BigInt::from(q);
        if (&x % &qb).is_zero() {
            out.push(q);
            while (&x % &qb).is_zero() {
                x /= &qb;
            }
        }
        q += if q == 2 { 1 } else { 2 };
        assert!(q < 100_000_000, "discriminant too large to factor");
    }
    if x > BigInt::one() {
        out.push(x.to_u64().expect("prime factor exceeds u64"));
    }
    out
}
