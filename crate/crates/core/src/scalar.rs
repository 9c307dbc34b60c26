//! Exact rationals and the special values that feed the Eisenstein
//! coefficients: Bernoulli numbers, ζ at even integers, Γ at half-integers
//! and quadratic Dirichlet L-values. Transcendental parts are tracked as a
//! surd √d and a power of √π so that they can be cancelled exactly.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use parking_lot::RwLock;
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("zeta({0}) is not an exact value of the supported form")]
    UnsupportedZeta(i64),
    #[error("L({s}, chi_{disc}) requested with mismatched parity")]
    ParityMismatch { s: i64, disc: i64 },
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Formats a rational as `num/den` (or just `num` for integers).
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Decimal rendering with `sig` significant digits, for display only.
pub fn format_decimal(q: &BigRational, sig: usize) -> String {
    if q.is_zero() {
        return "0".into();
    }
    let neg = q.is_negative();
    let mut n = q.numer().abs();
    let mut d = q.denom().clone();
    // scale so that n/d lies in [1, 10)
    let mut exp: i64 = n.to_string().len() as i64 - d.to_string().len() as i64;
    let ten = BigInt::from(10);
    if exp >= 0 {
        d *= ten.pow(exp as u32);
    } else {
        n *= ten.pow((-exp) as u32);
    }
    if n < d {
        n *= &ten;
        exp -= 1;
    }
    let scaled = n * ten.pow(sig as u32 - 1);
    let (mut digits, rem) = scaled.div_rem(&d);
    if rem * 2 >= d {
        digits += 1;
    }
    let mut ds = digits.to_string();
    if ds.len() > sig {
        ds.truncate(sig);
        exp += 1;
    }
    let (head, tail) = ds.split_at(1);
    let tail = tail.trim_end_matches('0');
    let mantissa = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
    let sign = if neg { "-" } else { "" };
    if (-5..15).contains(&exp) {
        let f: f64 = format!("{mantissa}e{exp}").parse().unwrap();
        let s = format!("{sign}{}", trim_float(f, sig));
        return s;
    }
    format!("{sign}{mantissa}e{exp}")
}

fn trim_float(f: f64, sig: usize) -> String {
    let mag = if f == 0.0 { 0 } else { f.abs().log10().floor() as i64 };
    let decimals = (sig as i64 - 1 - mag).max(0) as usize;
    let s = format!("{f:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    // go through a scaled quotient so huge numerators/denominators survive
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64 - 60;
    let (num, den) = if shift > 0 {
        (n.clone(), d << shift as usize)
    } else {
        (n << (-shift) as usize, d.clone())
    };
    let quo = (num / den).to_f64().unwrap_or(f64::NAN);
    quo * 2f64.powi(shift as i32)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

static BERNOULLI: Lazy<RwLock<Vec<BigRational>>> = Lazy::new(|| RwLock::new(vec![BigRational::one()]));

/// B_i with the convention B_1 = −1/2.
pub fn bernoulli(i: usize) -> BigRational {
    if let Some(b) = BERNOULLI.read().get(i) {
        return b.clone();
    }
    let mut table = BERNOULLI.write();
    while table.len() <= i {
        let m = table.len() as u64;
        let mut s = BigRational::zero();
        let mut c = BigInt::one(); // C(m+1, j)
        for (j, b) in table.iter().enumerate() {
            if !b.is_zero() {
                s += b * BigRational::from_integer(c.clone());
            }
            c = c * (m + 1 - j as u64) / (j as u64 + 1);
        }
        table.push(-s / int(m + 1));
    }
    table[i].clone()
}

/// Value `coeff · √surd · π^(pi_half_power/2)` with `surd` squarefree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyticScalar {
    coeff: BigRational,
    surd: BigUint,
    pi_half_power: i64,
}

impl AnalyticScalar {
    pub fn new(coeff: BigRational, surd: BigUint, pi_half_power: i64) -> Self {
        if coeff.is_zero() || surd.is_zero() {
            return Self::zero();
        }
        let (r, s) = squarefree_split(&surd);
        Self { coeff: coeff * BigRational::from_integer(r.into()), surd: s, pi_half_power }.normalized()
    }

    pub fn rational(q: BigRational) -> Self {
        Self { coeff: q, surd: BigUint::one(), pi_half_power: 0 }.normalized()
    }

    pub fn zero() -> Self {
        Self { coeff: BigRational::zero(), surd: BigUint::one(), pi_half_power: 0 }
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    /// π^(h/2).
    pub fn pi_pow_half(h: i64) -> Self {
        Self { coeff: BigRational::one(), surd: BigUint::one(), pi_half_power: h }
    }

    /// √n for a positive integer n.
    pub fn sqrt(n: &BigUint) -> Self {
        Self::new(BigRational::one(), n.clone(), 0)
    }

    fn normalized(self) -> Self {
        if self.coeff.is_zero() {
            Self::zero()
        } else {
            self
        }
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn surd(&self) -> &BigUint {
        &self.surd
    }

    pub fn pi_half_power(&self) -> i64 {
        self.pi_half_power
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_one() && self.pi_half_power == 0
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coeff.clone())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let d = BigRational::from_integer(self.surd.clone().into());
        Some(Self {
            coeff: (&self.coeff * d).recip(),
            surd: self.surd.clone(),
            pi_half_power: -self.pi_half_power,
        })
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.coeff)
            * self.surd.to_f64().unwrap_or(f64::NAN).sqrt()
            * std::f64::consts::PI.powf(self.pi_half_power as f64 / 2.0)
    }
}

impl fmt::Display for AnalyticScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.coeff))?;
        if !self.surd.is_one() {
            write!(f, "·√{}", self.surd)?;
        }
        if self.pi_half_power != 0 {
            write!(f, "·π^({}/2)", self.pi_half_power)?;
        }
        Ok(())
    }
}

impl Mul for &AnalyticScalar {
    type Output = AnalyticScalar;
    fn mul(self, rhs: &AnalyticScalar) -> AnalyticScalar {
        if self.is_zero() || rhs.is_zero() {
            return AnalyticScalar::zero();
        }
        // √a·√b = g·√((a/g)(b/g)); the cofactor is squarefree when a, b are
        let g = self.surd.gcd(&rhs.surd);
        let surd = (&self.surd / &g) * (&rhs.surd / &g);
        AnalyticScalar {
            coeff: &self.coeff * &rhs.coeff * BigRational::from_integer(g.into()),
            surd,
            pi_half_power: self.pi_half_power + rhs.pi_half_power,
        }
    }
}

impl Mul for AnalyticScalar {
    type Output = AnalyticScalar;
    fn mul(self, rhs: AnalyticScalar) -> AnalyticScalar {
        &self * &rhs
    }
}

impl Div for &AnalyticScalar {
    type Output = AnalyticScalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &AnalyticScalar) -> AnalyticScalar {
        self * &rhs.recip().expect("division by zero AnalyticScalar")
    }
}

impl Div for AnalyticScalar {
    type Output = AnalyticScalar;
    fn div(self, rhs: AnalyticScalar) -> AnalyticScalar {
        &self / &rhs
    }
}

/// Splits n = r²·s with s squarefree. Trial division; any cofactor left
/// after the trial bound is treated as squarefree unless it is a square.
pub fn squarefree_split(n: &BigUint) -> (BigUint, BigUint) {
    let mut rest = n.clone();
    let mut root = BigUint::one();
    let mut sf = BigUint::one();
    if rest.is_zero() {
        return (BigUint::zero(), BigUint::zero());
    }
    let mut p = 2u64;
    while p < 1_000_000 {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            root *= pb.pow(e / 2);
            if e % 2 == 1 {
                sf *= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let s = rest.sqrt();
    if &s * &s == rest {
        root *= s;
    } else {
        sf *= rest;
    }
    (root, sf)
}

/// ζ(s) for even s ≥ 0.
pub fn zeta_value(s: i64) -> Result<AnalyticScalar, ScalarError> {
    if s < 0 || s % 2 != 0 {
        return Err(ScalarError::UnsupportedZeta(s));
    }
    if s == 0 {
        return Ok(AnalyticScalar::rational(rat(-1, 2)));
    }
    let m = s / 2;
    let sign = if m % 2 == 1 { 1 } else { -1 };
    let c = bernoulli(s as usize) * int(sign) * int(BigInt::one() << (s as usize))
        / BigRational::from_integer(factorial(s as u64) * 2);
    Ok(AnalyticScalar { coeff: c, surd: BigUint::one(), pi_half_power: 2 * s })
}

/// Γ(i/2) for i ≥ 1.
pub fn gamma_half(i: u64) -> AnalyticScalar {
    assert!(i >= 1, "gamma_half needs a positive argument");
    if i % 2 == 0 {
        AnalyticScalar::rational(BigRational::from_integer(factorial(i / 2 - 1)))
    } else {
        // Γ(i/2) = (i−2)!! / 2^((i−1)/2) · √π
        let mut df = BigInt::one();
        let mut t = i as i64 - 2;
        while t > 0 {
            df *= t;
            t -= 2;
        }
        let c = BigRational::new(df, BigInt::one() << ((i - 1) / 2) as usize);
        AnalyticScalar { coeff: c, surd: BigUint::one(), pi_half_power: 1 }
    }
}

/// Kronecker symbol (d/n).
pub fn kronecker_symbol(d: i64, n: i64) -> i8 {
    let mut a = d as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut r: i8 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            r = -r;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= v;
        if v % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            r = -r;
        }
    }
    // Jacobi symbol (a/n), n odd positive
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                r = -r;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            r = -r;
        }
        a %= n;
    }
    if n == 1 {
        r
    } else {
        0
    }
}

/// Quadratic character given by a fundamental discriminant (or 1 for the
/// trivial character).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirichletCharacter {
    disc: i64,
}

impl DirichletCharacter {
    pub fn trivial() -> Self {
        Self { disc: 1 }
    }

    pub fn new(disc: i64) -> Result<Self, ScalarError> {
        if disc == 1 || is_fundamental(disc) {
            Ok(Self { disc })
        } else {
            Err(ScalarError::NotFundamental(disc))
        }
    }

    /// Character of the fundamental discriminant attached to a nonzero integer
    /// (its squarefree kernel, times 4 unless ≡ 1 mod 4).
    pub fn of_discriminant(d: &BigInt) -> Self {
        assert!(!d.is_zero());
        let (_, s) = squarefree_split(d.magnitude());
        let mut s = BigInt::from(s);
        if d.is_negative() {
            s = -s;
        }
        if s.mod_floor(&BigInt::from(4)) != BigInt::one() {
            s *= 4;
        }
        Self { disc: s.to_i64().expect("fundamental discriminant exceeds i64") }
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn conductor(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn is_trivial(&self) -> bool {
        self.disc == 1
    }

    pub fn is_even(&self) -> bool {
        self.disc > 0
    }

    pub fn value(&self, n: i64) -> i8 {
        kronecker_symbol(self.disc, n)
    }
}

fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let sf = |m: i64| {
        let (r, _) = squarefree_split(&BigUint::from(m.unsigned_abs()));
        r.is_one()
    };
    match d.rem_euclid(4) {
        1 => sf(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && sf(m)
        }
        _ => false,
    }
}

static GEN_BERNOULLI: Lazy<RwLock<HashMap<(u32, i64), BigRational>>> = Lazy::new(Default::default);

/// B_{m,χ} = f^(m−1) Σ_{a=1..f} χ(a) B_m(a/f).
pub fn generalized_bernoulli(m: u32, chi: DirichletCharacter) -> BigRational {
    assert!(m >= 1);
    if let Some(v) = GEN_BERNOULLI.read().get(&(m, chi.disc)) {
        return v.clone();
    }
    let f = chi.conductor();
    // power sums S_e = Σ χ(a) a^e, e = 0..m
    let mut sums = vec![BigInt::zero(); m as usize + 1];
    for a in 1..=f {
        let c = chi.value(a as i64);
        if c == 0 {
            continue;
        }
        let mut pw = BigInt::one();
        for s in sums.iter_mut() {
            if c > 0 {
                *s += &pw;
            } else {
                *s -= &pw;
            }
            pw *= a;
        }
    }
    // B_m(x) = Σ_j C(m,j) B_j x^(m−j)  ⇒  B_{m,χ} = Σ_j C(m,j) B_j f^(j−1) S_{m−j}
    let mut total = BigRational::zero();
    let fr = int(f);
    for j in 0..=m {
        let b = bernoulli(j as usize);
        if b.is_zero() {
            continue;
        }
        let fp = if j == 0 { fr.recip() } else { num_traits::pow(fr.clone(), j as usize - 1) };
        total += b * int(binomial(m as u64, j as u64)) * fp * int(sums[(m - j) as usize].clone());
    }
    GEN_BERNOULLI.write().insert((m, chi.disc), total.clone());
    total
}

/// L(s, χ) for s ≥ 0, via B_{s,χ} and the functional equation.
pub fn l_value(s: i64, chi: DirichletCharacter) -> Result<AnalyticScalar, ScalarError> {
    if chi.is_trivial() {
        return zeta_value(s);
    }
    if s < 0 {
        return Err(ScalarError::ParityMismatch { s, disc: chi.disc });
    }
    if s == 0 {
        return Ok(AnalyticScalar::rational(-generalized_bernoulli(1, chi)));
    }
    let delta = if chi.is_even() { 0 } else { 1 };
    if (s - delta) % 2 != 0 {
        return Err(ScalarError::ParityMismatch { s, disc: chi.disc });
    }
    // L(s,χ) = (−1)^(1+(s−δ)/2) √f (2π)^s B_{s,χ} / (2 f^s s!)
    let sign = if (1 + (s - delta) / 2) % 2 == 0 { 1 } else { -1 };
    let f = chi.conductor();
    let c = generalized_bernoulli(s as u32, chi) * int(sign) * int(BigInt::one() << (s as usize - 1))
        / (int(BigInt::from(f).pow(s as u32)) * int(factorial(s as u64)));
    Ok(&AnalyticScalar::new(c, BigUint::one(), 2 * s) * &AnalyticScalar::sqrt(&BigUint::from(f)))
}
