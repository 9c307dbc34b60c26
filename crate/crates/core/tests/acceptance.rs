// One PASS/FAIL line per acceptance criterion, written straight to stdout so
// the report shows even under output capture. The dimension-32 criterion only runs against a finished
// table: set LATTICE_MASS_CACHE to a directory holding mass-32.json (as
// written by `lattice-mass mass --dim 32 --cache DIR`).

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use lattice_mass::embed::{rep_count_bruteforce, rep_count_in_order};
use lattice_mass::padic::{d_blocks, hasse_blocks, hasse_invariant, hilbert_symbol, prime_divisors, Place};
use lattice_mass::reduce::{class_bound_even, no_root_masses};
use lattice_mass::scalar::{format_rational, int, rat};
use lattice_mass::siegel::{divisor_sigma, f_p_direct, f_p_eval};
use lattice_mass::table::mass_table_from_json;
use lattice_mass::{
    a_average, a_average_gram, class_lower_bound, enumerate_root_systems, genus_mass, jordan_decompose, reduce_masses, rep_count,
    solve_masses, verify_total, Component, Filters, HalfIntegralMatrix, MassTable, RootSystem, SolveOptions,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

type Outcome = Result<String, String>;

static EVEN8: Lazy<MassTable> = Lazy::new(|| solve_masses(8, &SolveOptions::default()).unwrap());
static EVEN16: Lazy<MassTable> = Lazy::new(|| solve_masses(16, &SolveOptions::default()).unwrap());
static EVEN24: Lazy<MassTable> = Lazy::new(|| solve_masses(24, &SolveOptions::default()).unwrap());

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rs(s: &str) -> RootSystem {
    s.parse().unwrap()
}

fn half(g: &[Vec<i64>]) -> HalfIntegralMatrix {
    HalfIntegralMatrix::from_gram_i64(g).unwrap()
}

// print! is captured by the test harness; a direct write is not.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn run(id: u32, title: &str, limit: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let secs = start.elapsed();
    let res = match (res, limit) {
        (Ok(_), Some(l)) if secs > l => Err(format!("took {:.1}s, limit {}s", secs.as_secs_f64(), l.as_secs())),
        (r, _) => r,
    };
    let ok = res.is_ok();
    let detail = res.unwrap_or_else(|e| e);
    report(&format!("criterion {id}: {} — {title} [{detail}] ({:.1}s)", if ok { "PASS" } else { "FAIL" }, secs.as_secs_f64()));
    ok
}

fn degree_one_oracle() -> Outcome {
    let one = |m: u64| half(&[vec![2 * m as i64]]);
    for m in 1..=20 {
        ensure!(a_average_gram(&one(m), 8).unwrap() == int(divisor_sigma(m, 3) * 240), "dim 8, m = {m}");
    }
    for m in 1..=5 {
        ensure!(a_average_gram(&one(m), 24).unwrap() == int(divisor_sigma(m, 11) * 65520) / int(691), "dim 24, m = {m}");
    }
    Ok("a((m)) = 240σ₃(m), m ≤ 20; (65520/691)σ₁₁(m), m ≤ 5".into())
}

fn dim8_cross_check() -> Outcome {
    let systems = enumerate_root_systems(8, 8, Filters::NONE);
    let e8 = rs("E8");
    for r in &systems {
        let analytic = a_average(r, 8).map_err(|e| format!("{r}: {e}"))?;
        let combinatorial = int(BigInt::from(rep_count(r, &e8)));
        ensure!(analytic == combinatorial, "{r}: a = {} but r(E8, R) = {}", format_rational(&analytic), format_rational(&combinatorial));
    }
    Ok(format!("{} root systems", systems.len()))
}

fn small_solves() -> Outcome {
    let nz8: Vec<_> = EVEN8.nonzero().collect();
    ensure!(nz8.len() == 1 && nz8[0].0 == &rs("E8") && nz8[0].1 == &rat(1, 696729600), "dim 8: {nz8:?}");
    ensure!(verify_total(&EVEN16).is_empty(), "dim 16 total: {:?}", verify_total(&EVEN16));
    ensure!(EVEN16.total == genus_mass(16).unwrap(), "dim 16 genus mass");
    let bound = class_bound_even(&EVEN16);
    ensure!(bound == BigInt::from(2), "dim 16 class bound {bound}");
    Ok(format!("m(E8) = 1/696729600; dim 16: {} classes, Σm = {}", EVEN16.nonzero().count(), lattice_mass::scalar::format_decimal(&EVEN16.total, 4)))
}

fn niemeier() -> Outcome {
    let t = &*EVEN24;
    let nz: Vec<_> = t.nonzero().collect();
    let full = nz.iter().filter(|(r, _)| r.rank() == 24).count();
    // 23 Niemeier lattices with full-rank root systems plus the Leech lattice
    ensure!(full == 23 && nz.len() == 24, "{} nonzero masses, {} of rank 24", nz.len(), full);
    ensure!(t.mass_of(&RootSystem::empty()) == Some(&rat(1, 8315553613086720000)), "Leech mass");
    ensure!(verify_total(t).is_empty(), "{:?}", verify_total(t));
    let bound = class_bound_even(t);
    ensure!(bound == BigInt::from(24), "class bound {bound}");
    Ok(format!("{} systems, 23 of rank 24 + ∅, Σm = genus mass, bound 24", t.entries.len()))
}

fn reduction_from_24() -> Outcome {
    let odd = reduce_masses(&EVEN24).map_err(|e| e.to_string())?;
    ensure!(odd.mass(0, &RootSystem::empty()).is_one(), "m_0(∅)");
    for n in 1..=22 {
        ensure!(odd.reduced_mass(n, &RootSystem::empty()).is_zero(), "m_{n}(∅) ≠ 0");
    }
    let want = [1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3, 4, 5, 6, 9, 13, 16, 28, 40, 68];
    for (i, &b) in want.iter().enumerate() {
        let n = i + 1;
        let rep = class_lower_bound(&odd, n, &[&EVEN8, &EVEN16]).map_err(|e| e.to_string())?;
        ensure!(rep.beta == BigInt::from(b) && rep.root_systems == b, "n = {n}: β = {}, r = {}", rep.beta, rep.root_systems);
    }
    Ok("β_n = r_n for n ≤ 22, ending 9, 13, 16, 28, 40, 68".into())
}

fn property_suites() -> Outcome {
    let mut grams = Vec::new();
    for a in 1..=4i64 {
        grams.push(vec![vec![2 * a]]);
        for b in -3..=3i64 {
            for c in 1..=4i64 {
                grams.push(vec![vec![2 * a, b], vec![b, 2 * c]]);
            }
        }
    }
    grams.push(Component::A(3).gram());
    grams.push(Component::D(5).gram());
    grams.push(vec![vec![2, 1, 0], vec![1, 4, 1], vec![0, 1, 6]]);
    let mut checks = 0;
    for g in grams.iter().map(|g| half(g)).filter(|b| b.is_positive_definite()) {
        for p in [2u64, 3, 5, 7] {
            let jd = jordan_decompose(&g, p).unwrap();
            ensure!(hasse_blocks(jd.blocks(), p) == hasse_invariant(&g, p).unwrap(), "hasse {:?} at {p}", g.gram());
            ensure!(d_blocks(jd.blocks(), p) == g.d_p(p), "d_p {:?} at {p}", g.gram());
            if g.d_p(p) == 0 {
                ensure!(f_p_eval(&g, p, &rat(7, 3)).unwrap().is_one(), "F_p ≢ 1 off support");
            } else {
                ensure!(f_p_eval(&g, p, &BigRational::zero()).unwrap().is_one(), "F_p(0) ≠ 1");
                for x in [rat(2, 1), rat(5, 7), int(BigInt::from(p * p)), rat(11, 4)] {
                    if let Ok(v) = f_p_direct(&jd, &x) {
                        ensure!(f_p_eval(&g, p, &x).unwrap() == v, "interpolation at {x}");
                    }
                }
            }
            checks += 1;
        }
    }
    let qs: Vec<BigRational> = [-12, -7, -3, -2, -1, 1, 2, 3, 5, 6, 10, 15, 18].iter().map(|&n| rat(n, 1)).chain([rat(3, 4), rat(-5, 9)]).collect();
    for a in &qs {
        for b in &qs {
            let mut primes = vec![2u64];
            for x in [a.numer(), a.denom(), b.numer(), b.denom()] {
                primes.extend(prime_divisors(x));
            }
            primes.sort_unstable();
            primes.dedup();
            let prod: i8 = primes.iter().map(|&p| hilbert_symbol(a, b, Place::Finite(p)).unwrap()).product::<i8>()
                * hilbert_symbol(a, b, Place::Infinite).unwrap();
            ensure!(prod == 1, "product formula for ({a}, {b})");
            for c in &qs {
                for p in [2u64, 3, 5] {
                    let lhs = hilbert_symbol(a, &(b * c), Place::Finite(p)).unwrap();
                    let rhs = hilbert_symbol(a, b, Place::Finite(p)).unwrap() * hilbert_symbol(a, c, Place::Finite(p)).unwrap();
                    ensure!(lhs == rhs, "bilinearity ({a}, {b}·{c})_{p}");
                }
            }
        }
    }
    let small = enumerate_root_systems(6, 8, Filters::NONE);
    for t in small.iter().filter(|t| t.rank() >= 5) {
        for s in small.iter().filter(|s| s.rank() <= 4) {
            ensure!(rep_count(s, t) == rep_count_bruteforce(s, t), "brute force {s} -> {t}");
        }
    }
    for (src, tgt) in [("A1 A2 D4", "E8 D8"), ("A3 A1 A2", "E7 A9"), ("D4 A1^2 A2", "D10 E6")] {
        let comps: Vec<Component> = rs(src).components().collect();
        let target = rs(tgt);
        let want = rep_count(&rs(src), &target);
        let mut rev = comps.clone();
        rev.reverse();
        ensure!(rep_count_in_order(&comps, &target) == want && rep_count_in_order(&rev, &target) == want, "shuffle {src} -> {tgt}");
    }
    let corpus = enumerate_root_systems(16, 24, Filters::NONE);
    for r in &corpus {
        a_average(r, 24).map_err(|e| format!("{r}: {e}"))?;
    }
    Ok(format!("{checks} local checks, {} corpus coefficients rational", corpus.len()))
}

fn dim32_table() -> Option<MassTable> {
    let dir = PathBuf::from(std::env::var_os("LATTICE_MASS_CACHE")?);
    let t = mass_table_from_json(&std::fs::read_to_string(dir.join("mass-32.json")).ok()?).ok()?;
    (t.dim == 32 && t.is_complete()).then_some(t)
}

// m(R)·w(R) for the rank ≤ 4 rows of the published dimension-32 table
const DIM32_SPOT: [(&str, &str); 13] = [
    ("0", "1310037331282023326658917/238863431761920000"),
    ("A1", "111536168182433/5677056"),
    ("A1^2", "72024731351193941/1857945600"),
    ("A2", "1327104974887/2939328"),
    ("A1^3", "6904800898075/124416"),
    ("A1 A2", "977951251237/445440"),
    ("A3", "329127961/74240"),
    ("A1^4", "30223371257980501/471859200"),
    ("A1^2 A2", "19867101805/3456"),
    ("A2^2", "1772535692573/42598400"),
    ("A1 A3", "21073837/768"),
    ("A4", "8397751/384000"),
    ("D4", "35841940559/157212057600"),
];

fn spot_check(t: &MassTable) -> Result<(), String> {
    for (r, want) in DIM32_SPOT {
        let r = rs(r);
        let got = t.mass_of(&r).cloned().unwrap_or_else(BigRational::zero) * int(BigInt::from(r.weyl_order()));
        ensure!(format_rational(&got) == want, "m({r})·w = {} ≠ {want}", format_rational(&got));
    }
    Ok(())
}

fn dim32(t: &MassTable) -> Outcome {
    spot_check(t)?;
    let nz = t.nonzero().count();
    let full = t.nonzero().filter(|(r, _)| r.rank() == 32).count();
    ensure!(nz == 13218 && full == 143, "{nz} nonzero, {full} of rank 32");
    ensure!(verify_total(t).is_empty(), "{:?}", verify_total(t));
    let bound = class_bound_even(t);
    ensure!(bound == BigInt::from(1162109024u64), "even class bound {bound}");
    let no_roots = no_root_masses(t).map_err(|e| e.to_string())?;
    let leech = EVEN24.mass_of(&RootSystem::empty()).unwrap().clone();
    let table4 = [
        (23, "1/84610842624000"),
        (24, "1/1002795171840"),
        (25, "0"),
        (26, "1/18720000"),
        (27, "206867/1585059840"),
        (28, "17924389897/26202009600"),
        (29, "49612728929/11136000"),
        (30, "7180069576834562839/175111372800"),
    ];
    for (n, want) in table4 {
        // the published value at 24 counts odd lattices only
        let got = if n == 24 { &no_roots[&n] - &leech } else { no_roots[&n].clone() };
        ensure!(format_rational(&got) == want, "m_{n}(∅) = {}", format_rational(&got));
    }
    let odd = reduce_masses(t).map_err(|e| e.to_string())?;
    let mut wrong = Vec::new();
    for (n, want) in [(28usize, 327972u64), (30, 20169641025)] {
        let rep = class_lower_bound(&odd, n, &[&EVEN8, &EVEN16, &EVEN24]).map_err(|e| e.to_string())?;
        if rep.beta != BigInt::from(want) {
            wrong.push(format!("β_{n} = {}, expected {want}", rep.beta));
        }
    }
    ensure!(wrong.is_empty(), "{}", wrong.join("; "));
    Ok("13218 classes, 143 of rank 32, bound 1162109024, no-root masses 23..30, β_28, β_30".into())
}

#[test]
fn acceptance() {
    let mut ok = true;
    ok &= run(1, "degree-1 Eisenstein oracle", Some(Duration::from_secs(1)), degree_one_oracle);
    ok &= run(2, "dimension-8 analytic vs combinatorial", Some(Duration::from_secs(60)), dim8_cross_check);
    ok &= run(3, "dimension-8 and 16 solves", Some(Duration::from_secs(300)), small_solves);
    ok &= run(4, "dimension-24 solve", Some(Duration::from_secs(7200)), niemeier);
    ok &= run(5, "reduction from dimension 24", Some(Duration::from_secs(600)), reduction_from_24);
    ok &= run(6, "property suites", None, property_suites);
    match dim32_table() {
        Some(t) => ok &= run(7, "dimension-32 solve", None, || dim32(&t)),
        None => report("criterion 7: NOT RUN — dimension-32 solve [no finished table under LATTICE_MASS_CACHE]"),
    }
    assert!(ok, "acceptance criteria failed");
}

// Resumable dimension-32 solve against LATTICE_MASS_CACHE/checkpoint-32.json,
// then the rank ≤ 4 spot checks.
#[test]
#[ignore = "long run: needs LATTICE_MASS_CACHE and hours of CPU"]
fn dim32_resumable() {
    let dir = PathBuf::from(std::env::var_os("LATTICE_MASS_CACHE").expect("set LATTICE_MASS_CACHE"));
    std::fs::create_dir_all(&dir).unwrap();
    let opts = SolveOptions { checkpoint: Some(dir.join("checkpoint-32.json")), checkpoint_every: 200, ..Default::default() };
    let t = solve_masses(32, &opts).unwrap();
    std::fs::write(dir.join("mass-32.json"), lattice_mass::table::mass_table_to_json(&t, true)).unwrap();
    spot_check(&t).unwrap();
}
