//! Local factors F_p(B;X) of the Siegel series via Katsurada's recursion,
//! the series b(B,k), Eisenstein coefficients c_{n,k}(B) and the genus
//! average a(N) = ε·c_{n,4k}(N/2).

use std::collections::HashMap;

use dashmap::DashMap;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use thiserror::Error;

use crate::padic::{
    d_blocks, delta_blocks, eta_blocks, hasse_kitaoka, hilbert_local, i_blocks, jordan_decompose, prime_divisors,
    rank, xi_blocks, xi_prime_blocks, Block, HalfIntegralMatrix, JordanDecomposition, LocalClass, PadicError,
};
use crate::roots::RootSystem;
use crate::scalar::{gamma_half, int, l_value, zeta_value, AnalyticScalar, DirichletCharacter, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiegelError {
    #[error("recursion precondition violated: {0}")]
    Precondition(String),
    #[error("zero denominator at X = {0}")]
    ZeroDenominator(BigRational),
    #[error("transcendental factors did not cancel: {0}")]
    Impure(String),
    #[error("rank {rank} too large for weight {weight}")]
    RankTooLarge { rank: usize, weight: u32 },
    #[error("weight {0} must be even")]
    OddWeight(u32),
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension {0} is not a positive multiple of 8")]
    BadDimension(u32),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

type Key = (u64, Vec<Block>, BigRational);

static NODE_CACHE: Lazy<DashMap<Key, BigRational>> = Lazy::new(DashMap::new);

/// Number of cached F-node values (shared by every computation in the process).
pub fn node_cache_len() -> usize {
    NODE_CACHE.len()
}

pub fn clear_node_cache() {
    NODE_CACHE.clear();
    VALUE_CACHE.clear();
}

// F_p(B; p^{-k}) keyed by (p, Jordan blocks, d_p, k).
type ValueKey = (u64, Vec<Block>, i64, i64);
static VALUE_CACHE: Lazy<DashMap<ValueKey, BigRational>> = Lazy::new(DashMap::new);

fn f_value(jd: &JordanDecomposition, d: i64, k: i64) -> Result<BigRational, SiegelError> {
    let key = (jd.p(), jd.blocks().to_vec(), d, k);
    if let Some(v) = VALUE_CACHE.get(&key) {
        return Ok(v.clone());
    }
    let nodes = nodes_of_blocks(jd, d)?;
    let w = node_weights(jd.p(), d.max(0), k);
    let v = nodes.iter().zip(w.iter()).fold(BigRational::zero(), |a, ((_, y), c)| a + y * c);
    VALUE_CACHE.insert(key, v.clone());
    Ok(v)
}

type Weights = std::sync::Arc<Vec<BigRational>>;
static WEIGHTS: Lazy<DashMap<(u64, i64, i64), Weights>> = Lazy::new(DashMap::new);

// Lagrange weights c_i with P(p^{-k}) = Σ c_i P(p^i) for deg P ≤ d:
// c_i = p^{-kd} ∏_{j≠i} (1 − p^{k+j}) / ∏_{j≠i} (p^i − p^j), in integers.
fn node_weights(p: u64, d: i64, k: i64) -> std::sync::Arc<Vec<BigRational>> {
    if let Some(w) = WEIGHTS.get(&(p, d, k)) {
        return w.clone();
    }
    let pw = |e: i64| BigInt::from(p).pow(e as u32);
    let lin: Vec<BigInt> = (0..=d).map(|j| BigInt::one() - pw(k + j)).collect();
    let scale = pw(k * d);
    let w: Vec<BigRational> = (0..=d)
        .map(|i| {
            let (mut num, mut den) = (BigInt::one(), scale.clone());
            for j in (0..=d).filter(|&j| j != i) {
                num *= &lin[j as usize];
                den *= pw(i) - pw(j);
            }
            BigRational::new(num, den)
        })
        .collect();
    let w = std::sync::Arc::new(w);
    WEIGHTS.insert((p, d, k), w.clone());
    w
}

enum Memo {
    Shared,
    Local(HashMap<(Vec<Block>, BigRational), BigRational>),
}

struct Recursion {
    p: u64,
    memo: Memo,
}

fn powi(x: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

fn pow2(k: i64) -> BigRational {
    powi(&int(2), k)
}

fn sign(k: i64) -> BigRational {
    if k.rem_euclid(2) == 1 {
        int(-1)
    } else {
        int(1)
    }
}

fn half(v: i64) -> Result<i64, SiegelError> {
    if v % 2 != 0 {
        return Err(SiegelError::Precondition(format!("odd exponent {v} under a square root")));
    }
    Ok(v / 2)
}

fn checked_div(num: BigRational, den: BigRational, x: &BigRational) -> Result<BigRational, SiegelError> {
    if den.is_zero() {
        return Err(SiegelError::ZeroDenominator(x.clone()));
    }
    Ok(num / den)
}

impl Recursion {
    fn get(&self, bl: &[Block], x: &BigRational) -> Option<BigRational> {
        match &self.memo {
            Memo::Shared => NODE_CACHE.get(&(self.p, bl.to_vec(), x.clone())).map(|v| v.clone()),
            Memo::Local(m) => m.get(&(bl.to_vec(), x.clone())).cloned(),
        }
    }

    fn put(&mut self, bl: &[Block], x: &BigRational, v: &BigRational) {
        match &mut self.memo {
            Memo::Shared => {
                NODE_CACHE.insert((self.p, bl.to_vec(), x.clone()), v.clone());
            }
            Memo::Local(m) => {
                m.insert((bl.to_vec(), x.clone()), v.clone());
            }
        }
    }

    fn eval(&mut self, bl: &[Block], x: &BigRational) -> Result<BigRational, SiegelError> {
        if bl.is_empty() {
            return Ok(BigRational::one());
        }
        if let Some(v) = self.get(bl, x) {
            return Ok(v);
        }
        let p = self.p;
        let two_unit_top = bl.len() > 1 && bl[0].is_unit() && bl[1].is_unit() && bl[1].exponent() == bl[0].exponent();
        let r = if p != 2 || (bl[0].is_unit() && !two_unit_top) {
            self.peel_one(bl, x)?
        } else {
            self.peel_two(bl, x)?
        };
        self.put(bl, x, &r);
        Ok(r)
    }

    // Two-term recursion: peel one diagonal entry b_1 (any p).
    fn peel_one(&mut self, bl: &[Block], x: &BigRational) -> Result<BigRational, SiegelError> {
        let p = self.p;
        let pq = int(p);
        let n = rank(bl) as i64;
        let b2 = &bl[1..];
        if let Some(i2) = i_blocks(b2) {
            let need = i2 - 1 + if p == 2 { 2 } else { 0 };
            if bl[0].exponent() < need {
                return Err(SiegelError::Precondition(format!("ord(b1) = {} < {need}", bl[0].exponent())));
            }
        }
        let dl = delta_blocks(bl, p);
        let dlt = delta_blocks(b2, p);
        let one = BigRational::one();
        let (c1, c0) = if n % 2 == 0 {
            let xi = xi_blocks(bl, p) as i64;
            let xip = xi_prime_blocks(bl, p) as i64;
            let eta = eta_blocks(b2, p) as i64;
            let den = &one - powi(&pq, n + 1) * x * x;
            let c1 = checked_div(&one - powi(&pq, n / 2) * int(xi) * x, den.clone(), x)?;
            let c0 = checked_div(
                sign(xi + 1)
                    * int(xip * eta)
                    * (&one - powi(&pq, n / 2 + 1) * int(xi) * x)
                    * powi(&(powi(&pq, n / 2) * x), dl - dlt + xi * xi)
                    * powi(&pq, half(dl)?),
                den,
                x,
            )?;
            (c1, c0)
        } else {
            let xt = xi_blocks(b2, p) as i64;
            let xtp = xi_prime_blocks(b2, p) as i64;
            let eta = eta_blocks(bl, p) as i64;
            let den = &one - powi(&pq, (n + 1) / 2) * int(xt) * x;
            let c1 = checked_div(one.clone(), den.clone(), x)?;
            let c0 = checked_div(
                sign(xt)
                    * int(xtp * eta)
                    * powi(&(powi(&pq, (n - 1) / 2) * x), dl - dlt + 2 - xt * xt)
                    * powi(&pq, half(2 * dl - dlt + 2)?),
                den,
                x,
            )?;
            (c1, c0)
        };
        let f1 = self.eval(b2, &(&pq * x))?;
        let f0 = self.eval(b2, x)?;
        Ok(c1 * f1 + c0 * f0)
    }

    // Four-term recursion at p = 2: peel 2^m(u1 ⊥ u2) or 2^m·K.
    fn peel_two(&mut self, bl: &[Block], x: &BigRational) -> Result<BigRational, SiegelError> {
        let n = rank(bl) as i64;
        let m = bl[0].exponent();
        let (pair, b2): (bool, &[Block]) = if bl[0].is_unit() { (true, &bl[2..]) } else { (false, &bl[1..]) };
        if let Some(i2) = i_blocks(b2) {
            if m < i2 + 1 {
                return Err(SiegelError::Precondition(format!("m = {m} < i(B2) + 1 = {}", i2 + 1)));
            }
        }
        // 2^m ⊥ B2
        let mut aug = vec![Block::Unit { e: m, u: 1 }];
        aug.extend_from_slice(b2);
        let dl = delta_blocks(bl, 2);
        let dlt = delta_blocks(&aug, 2);
        let dlh = delta_blocks(b2, 2);
        let one = BigRational::one();
        let two = int(2);

        type Coef = Box<dyn Fn(&BigRational) -> Result<BigRational, SiegelError>>;
        let (c11, c10, c21, c20): (Coef, Coef, Coef, Coef);
        if n % 2 == 0 {
            let sigma = if (pair && d_blocks(bl, 2) % 2 == 1) || (!pair && xi_blocks(b2, 2) == 0) {
                half(2 * dlt - dl - dlh + 2)?
            } else {
                0
            };
            let xi = xi_blocks(bl, 2) as i64;
            let xip = xi_prime_blocks(bl, 2) as i64;
            let xh = xi_blocks(b2, 2) as i64;
            let xhp = xi_prime_blocks(b2, 2) as i64;
            let eta = if pair && d_blocks(b2, 2) % 2 == 0 {
                let Block::Unit { u, .. } = bl[1] else { unreachable!() };
                let mut t = vec![Block::Unit { e: m, u }];
                t.extend_from_slice(b2);
                eta_blocks(&t, 2) as i64
            } else if !pair && xh != 0 {
                eta_tilde_k(b2, m, n) as i64
            } else {
                1
            };
            let ex10 = half(dl)?;
            let ex20 = half(2 * dlt - dlh + 2 - 2 * sigma)?;
            let (o1, o2, o3, o4) = (one.clone(), one.clone(), one.clone(), one.clone());
            c11 = Box::new(move |x| {
                checked_div(&o1 - pow2(n / 2) * int(xi) * x, &o1 - pow2(n + 1) * x * x, x)
            });
            c10 = Box::new(move |x| {
                checked_div(
                    sign(xi + 1)
                        * int(xip * eta)
                        * (&o2 - pow2(n / 2 + 1) * int(xi) * x)
                        * powi(&(pow2(n / 2) * x), dl - dlt + xi * xi + sigma)
                        * pow2(ex10),
                    &o2 - pow2(n + 1) * x * x,
                    x,
                )
            });
            c21 = Box::new(move |x| checked_div(o3.clone(), &o3 - pow2(n / 2) * int(xh) * x, x));
            c20 = Box::new(move |x| {
                checked_div(
                    sign(xh)
                        * int(xhp * eta)
                        * powi(&(pow2((n - 2) / 2) * x), dlt - dlh + 2 - xh * xh - sigma)
                        * pow2(ex20),
                    &o4 - pow2(n / 2) * int(xh) * x,
                    x,
                )
            });
        } else {
            let odd_aug = d_blocks(&aug, 2) % 2 == 0;
            let sigma = if !pair && odd_aug { 2 } else { 0 };
            let xt: i64 = if !pair && odd_aug { 1 } else { 0 };
            let eta = eta_blocks(bl, 2) as i64;
            let eta_h = eta_blocks(b2, 2) as i64;
            let ex10 = half(2 * dl - dlt + 2 + sigma)?;
            let ex20 = half(dlt - sigma)?;
            let (o1, o2, o3, o4) = (one.clone(), one.clone(), one.clone(), one.clone());
            c11 = Box::new(move |x| checked_div(o1.clone(), &o1 - pow2((n + 1) / 2) * int(xt) * x, x));
            c10 = Box::new(move |x| {
                checked_div(
                    sign(xt) * int(eta) * powi(&(pow2((n - 1) / 2) * x), dl - dlt + 2 - xt * xt + sigma) * pow2(ex10),
                    &o2 - pow2((n + 1) / 2) * int(xt) * x,
                    x,
                )
            });
            c21 = Box::new(move |x| {
                checked_div(&o3 - pow2((n - 1) / 2) * int(xt) * x, &o3 - pow2(n) * x * x, x)
            });
            c20 = Box::new(move |x| {
                checked_div(
                    sign(xt + 1)
                        * int(eta_h)
                        * (&o4 - pow2((n + 1) / 2) * int(xt) * x)
                        * powi(&(pow2((n - 1) / 2) * x), dlt - dlh + xt * xt - sigma)
                        * pow2(ex20),
                    &o4 - pow2(n) * x * x,
                    x,
                )
            });
        }
        let x2 = &two * x;
        let x4 = &two * &x2;
        let f4 = self.eval(b2, &x4)?;
        let f2 = self.eval(b2, &x2)?;
        let f1 = self.eval(b2, x)?;
        let (a11, a10) = (c11(x)?, c10(x)?);
        Ok(&a11 * c21(&x2)? * f4 + &a11 * c20(&x2)? * &f2 + &a10 * c21(x)? * f2 + a10 * c20(x)? * f1)
    }
}

// η̃ for the K-peel at even rank: (−1)^(((n−1)²−1)/8)·h(B2)·(2^m, (−1)^((n−2)/2) det B2)_2.
fn eta_tilde_k(b2: &[Block], m: i64, n: i64) -> i8 {
    let mut d = crate::padic::det_class(b2, 2);
    if ((n - 2) / 2) % 2 == 1 {
        d = d.neg(2);
    }
    let s = if (((n - 1) * (n - 1) - 1) / 8) % 2 == 1 { -1 } else { 1 };
    s * hasse_kitaoka(b2, 2) * hilbert_local(LocalClass { v: m, u: 1 }, d, 2)
}

/// F_p(B;X) by direct recursion at an arbitrary X (errors on a zero denominator).
pub fn f_p_direct(jd: &JordanDecomposition, x: &BigRational) -> Result<BigRational, SiegelError> {
    let mut r = Recursion { p: jd.p(), memo: Memo::Local(HashMap::new()) };
    r.eval(jd.blocks(), x)
}

/// Node values (p^j, F_p(B;p^j)) for j = 0..=d.
pub fn nodes_of_blocks(jd: &JordanDecomposition, d: i64) -> Result<Vec<(BigRational, BigRational)>, SiegelError> {
    let p = jd.p();
    let mut r = Recursion { p, memo: Memo::Shared };
    (0..=d.max(0))
        .map(|j| {
            let x = powi(&int(p), j);
            let v = r.eval(jd.blocks(), &x)?;
            Ok((x, v))
        })
        .collect()
}

pub fn f_p_at_nodes(b: &HalfIntegralMatrix, p: u64) -> Result<Vec<(BigRational, BigRational)>, SiegelError> {
    let jd = jordan_decompose(b, p)?;
    nodes_of_blocks(&jd, b.d_p(p))
}

pub fn lagrange_eval(nodes: &[(BigRational, BigRational)], x: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    for (i, (xi, yi)) in nodes.iter().enumerate() {
        let mut t = yi.clone();
        for (j, (xj, _)) in nodes.iter().enumerate() {
            if i != j {
                t = t * (x - xj) / (xi - xj);
            }
        }
        total += t;
    }
    total
}

/// Monomial coefficients of the interpolating polynomial.
pub fn lagrange_coefficients(nodes: &[(BigRational, BigRational)]) -> Vec<BigRational> {
    let n = nodes.len();
    let mut out = vec![BigRational::zero(); n];
    for (i, (xi, yi)) in nodes.iter().enumerate() {
        let mut basis = vec![BigRational::one()];
        let mut den = BigRational::one();
        for (j, (xj, _)) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * xj;
            }
            basis = next;
            den *= xi - xj;
        }
        let f = yi / den;
        for (k, c) in basis.iter().enumerate() {
            out[k] += c * &f;
        }
    }
    while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    out
}

pub fn f_p_eval(b: &HalfIntegralMatrix, p: u64, x: &BigRational) -> Result<BigRational, SiegelError> {
    Ok(lagrange_eval(&f_p_at_nodes(b, p)?, x))
}

/// Coefficients of F_p(B;X), lowest degree first.
pub fn f_p_polynomial(b: &HalfIntegralMatrix, p: u64) -> Result<Vec<BigRational>, SiegelError> {
    Ok(lagrange_coefficients(&f_p_at_nodes(b, p)?))
}

/// Data needed for the analytic part: rank, det B, and a Jordan form per
/// prime dividing D(B).
pub struct LocalData {
    pub rank: usize,
    pub det: BigRational,
    pub locals: Vec<(JordanDecomposition, i64)>,
}

impl LocalData {
    pub fn of_matrix(b: &HalfIntegralMatrix) -> Result<Self, SiegelError> {
        let det = b.det();
        if b.rank() > 0 && det.is_zero() {
            return Err(PadicError::Singular.into());
        }
        let disc = b.discriminant();
        let mut locals = Vec::new();
        if b.rank() > 0 {
            for p in prime_divisors(&disc) {
                locals.push((jordan_decompose(b, p)?, b.d_p(p)));
            }
        }
        Ok(Self { rank: b.rank(), det, locals })
    }

    pub fn discriminant(&self) -> BigInt {
        let d = &self.det * int(BigInt::one() << (2 * (self.rank / 2)));
        d.to_integer()
    }
}

type ScalarCache = Lazy<DashMap<(i64, i64), AnalyticScalar>>;

static ZETA_PART: ScalarCache = Lazy::new(DashMap::new);
static GAMMA_PART: ScalarCache = Lazy::new(DashMap::new);
static L_PART: ScalarCache = Lazy::new(DashMap::new);

fn cached(cache: &ScalarCache, key: (i64, i64), f: impl FnOnce() -> Result<AnalyticScalar, SiegelError>) -> Result<AnalyticScalar, SiegelError> {
    if let Some(v) = cache.get(&key) {
        return Ok(v.clone());
    }
    let v = f()?;
    cache.insert(key, v.clone());
    Ok(v)
}

// [ζ(k) ∏_{i≤n/2} ζ(2k−2i)]^{-1}
fn zeta_part(n: i64, k: i64) -> Result<AnalyticScalar, SiegelError> {
    cached(&ZETA_PART, (n, k), || {
        let mut z = zeta_value(k)?;
        for i in 1..=n / 2 {
            z = &z * &zeta_value(2 * k - 2 * i)?;
        }
        Ok(AnalyticScalar::one() / z)
    })
}

// (−1)^{nk/2} 2^{n(2k−n+1)/2} ∏_{i=2k−n+1}^{2k} π^{i/2}/Γ(i/2)
fn gamma_part(n: i64, k: i64) -> Result<AnalyticScalar, SiegelError> {
    cached(&GAMMA_PART, (n, k), || {
        let mut val = AnalyticScalar::rational(sign(n * k / 2) * pow2(n * (2 * k - n + 1) / 2));
        for i in (2 * k - n + 1)..=(2 * k) {
            val = &val * &(AnalyticScalar::pi_pow_half(i) / gamma_half(i as u64));
        }
        Ok(val)
    })
}

fn l_part(s: i64, chi: DirichletCharacter) -> Result<AnalyticScalar, SiegelError> {
    cached(&L_PART, (s, chi.disc()), || Ok(l_value(s, chi)?))
}

/// b(B,k) = [ζ(k) ∏ ζ(2k−2i)]^{-1} ∏_p F_p(B;p^{-k}) · L(k−n/2, χ_B) (n even).
pub fn siegel_series_b_local(data: &LocalData, k: u32) -> Result<AnalyticScalar, SiegelError> {
    let n = data.rank;
    let k = k as i64;
    if n == 0 {
        return Ok(AnalyticScalar::one());
    }
    let mut f = BigRational::one();
    for (jd, d) in &data.locals {
        f *= f_value(jd, *d, k)?;
    }
    let mut val = &zeta_part(n as i64, k)? * &AnalyticScalar::rational(f);
    if n % 2 == 0 {
        let mut d = data.discriminant();
        if (n / 2) % 2 == 1 {
            d = -d;
        }
        let chi = DirichletCharacter::of_discriminant(&d);
        val = &val * &l_part(k - n as i64 / 2, chi)?;
    }
    Ok(val)
}

pub fn siegel_series_b(b: &HalfIntegralMatrix, k: u32) -> Result<AnalyticScalar, SiegelError> {
    siegel_series_b_local(&LocalData::of_matrix(b)?, k)
}

pub fn eisenstein_coefficient_local(data: &LocalData, k: u32) -> Result<BigRational, SiegelError> {
    let n = data.rank as i64;
    if k % 2 == 1 {
        return Err(SiegelError::OddWeight(k));
    }
    if n == 0 {
        return Ok(BigRational::one());
    }
    let kk = k as i64;
    if n > 2 * kk {
        return Err(SiegelError::RankTooLarge { rank: n as usize, weight: k });
    }
    if !data.det.is_positive() {
        return Err(SiegelError::NotPositiveDefinite);
    }
    let mut val = gamma_part(n, kk)?;
    // (det B)^((2k−n−1)/2)
    let e2 = 2 * kk - n - 1;
    let det = &data.det;
    val = &val * &AnalyticScalar::rational(powi(det, e2.div_euclid(2)));
    if e2.rem_euclid(2) == 1 {
        // √(r/s) = √(rs)/s
        let rs: BigUint = (det.numer() * det.denom()).to_biguint().unwrap();
        val = &val * &AnalyticScalar::new(int(det.denom().clone()).recip(), rs, 0);
    }
    val = &val * &siegel_series_b_local(data, k)?;
    val.to_rational().ok_or_else(|| SiegelError::Impure(val.to_string()))
}

pub fn eisenstein_coefficient(b: &HalfIntegralMatrix, k: u32) -> Result<BigRational, SiegelError> {
    if !b.is_positive_definite() {
        return Err(SiegelError::NotPositiveDefinite);
    }
    eisenstein_coefficient_local(&LocalData::of_matrix(b)?, k)
}

fn epsilon(n: usize, dim: u32) -> BigRational {
    let d = dim as usize;
    if d > 1 && (n + 1 == d || n == d) {
        BigRational::new(BigInt::one(), BigInt::from(2))
    } else {
        BigRational::one()
    }
}

fn check_dim(dim: u32) -> Result<(), SiegelError> {
    if dim == 0 || dim % 8 != 0 {
        return Err(SiegelError::BadDimension(dim));
    }
    Ok(())
}

/// a(N) for an even Gram matrix N, in the genus of even unimodular lattices of
/// dimension `dim`.
pub fn a_average_gram(gram: &HalfIntegralMatrix, dim: u32) -> Result<BigRational, SiegelError> {
    check_dim(dim)?;
    if !gram.is_positive_definite() {
        return Err(SiegelError::NotPositiveDefinite);
    }
    let data = LocalData::of_matrix(gram)?;
    if data.rank > dim as usize {
        return Err(SiegelError::RankTooLarge { rank: data.rank, weight: dim / 2 });
    }
    Ok(epsilon(data.rank, dim) * eisenstein_coefficient_local(&data, dim / 2)?)
}

/// a(R) for a root lattice, using per-component Jordan forms.
pub fn a_average(r: &RootSystem, dim: u32) -> Result<BigRational, SiegelError> {
    check_dim(dim)?;
    let n = r.rank();
    if n > dim as usize {
        return Err(SiegelError::RankTooLarge { rank: n, weight: dim / 2 });
    }
    if r.has_z() {
        return Err(SiegelError::Padic(PadicError::NotHalfIntegral));
    }
    let gram_det = BigInt::from(r.det());
    let det = BigRational::new(gram_det, BigInt::one() << n);
    let disc = (&det * int(BigInt::one() << (2 * (n / 2)))).to_integer();
    let mut locals = Vec::new();
    if n > 0 {
        for p in prime_divisors(&disc) {
            let d = crate::padic::ord(&disc, p);
            locals.push((r.jordan(p), d));
        }
    }
    let data = LocalData { rank: n, det, locals };
    Ok(epsilon(n, dim) * eisenstein_coefficient_local(&data, dim / 2)?)
}

/// σ_k(m).
pub fn divisor_sigma(m: u64, k: u32) -> BigInt {
    (1..=m).filter(|d| m % d == 0).map(|d| BigInt::from(d).pow(k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn one_by_one(b: i64) -> HalfIntegralMatrix {
        HalfIntegralMatrix::from_gram_i64(&[vec![2 * b]]).unwrap()
    }

    #[test]
    fn f2_of_small_forms() {
        let v = f_p_polynomial(&one_by_one(1), 2).unwrap();
        assert_eq!(v, vec![int(1)]);
        assert_eq!(f_p_polynomial(&one_by_one(2), 2).unwrap(), vec![int(1), int(2)]);
        assert_eq!(f_p_polynomial(&one_by_one(4), 2).unwrap(), vec![int(1), int(2), int(4)]);
        assert_eq!(f_p_eval(&one_by_one(2), 2, &rat(1, 16)).unwrap(), rat(9, 8));
        assert_eq!(f_p_eval(&one_by_one(4), 2, &rat(1, 16)).unwrap(), rat(73, 64));
    }

    #[test]
    fn small_coefficients() {
        assert_eq!(eisenstein_coefficient(&one_by_one(1), 4).unwrap(), int(240));
        assert_eq!(eisenstein_coefficient(&one_by_one(2), 4).unwrap(), int(2160));
        let b1 = siegel_series_b(&one_by_one(1), 4).unwrap();
        assert_eq!((b1.coeff().clone(), b1.pi_half_power()), (int(90), -8));
        let b2 = siegel_series_b(&one_by_one(2), 4).unwrap();
        assert_eq!(b2.coeff(), &(int(90) * rat(9, 8)));
    }

    #[test]
    fn root_lattice_coefficients() {
        let a1: RootSystem = "A1".parse().unwrap();
        let a2: RootSystem = "A2".parse().unwrap();
        assert_eq!(a_average(&a1, 8).unwrap(), int(240));
        assert_eq!(a_average(&a2, 8).unwrap(), int(13440));
        assert_eq!(a_average(&a1, 24).unwrap(), rat(65520, 691));
        assert_eq!(a_average(&RootSystem::empty(), 24).unwrap(), int(1));
        assert!(a_average(&a1, 12).is_err());
    }
}
