//! Counting root-system embeddings r(target, source): the number of
//! isometric maps of the source root lattice into the target that send
//! roots to roots.

use std::collections::HashSet;

use dashmap::DashMap;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

use crate::roots::{Component, RootSystem};

fn binom(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1u64, |a, i| a * (n - i) as u64 / (i + 1) as u64)
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

fn sys(s: &str) -> RootSystem {
    s.parse().expect("static root system")
}

/// Orbits of embeddings of irreducible `s` into irreducible `t` under
/// Aut(s) × W(t): (orbit count / |Aut(s)|, orthogonal complement).
fn orbits(s: Component, t: Component) -> Vec<(u64, RootSystem)> {
    use Component::*;
    match (s, t) {
        (A(i), A(j)) if i <= j => vec![(binom(j as i64 + 1, i as i64 + 1), a_sys(j as i64 - i as i64 - 1))],
        (A(1), D(j)) => vec![(2 * binom(j as i64, 2), sys("A1").union(&d_sys(j as i64 - 2)))],
        (A(3), D(j)) => vec![(8 * binom(j as i64, 4), d_sys(j as i64 - 4)), (binom(j as i64, 3), d_sys(j as i64 - 3))],
        (A(i), D(j)) if j > i => vec![((1u64 << i) * binom(j as i64, i as i64 + 1), d_sys(j as i64 - i as i64 - 1))],
        (D(i), D(j)) if i <= j => vec![(binom(j as i64, i as i64), d_sys(j as i64 - i as i64))],
        (_, E(6)) => {
            let row: &[(Component, u64, &str)] = &[
                (A(1), 36, "A5"),
                (A(2), 120, "A2^2"),
                (A(3), 270, "A1^2"),
                (A(4), 216, "A1"),
                (A(5), 36, "A1"),
                (D(4), 45, "0"),
                (D(5), 27, "0"),
                (E(6), 1, "0"),
            ];
            pick(row, s)
        }
        (_, E(7)) => {
            let row: &[(Component, u64, &str)] = &[
                (A(1), 63, "D6"),
                (A(2), 336, "A5"),
                (A(3), 1260, "A1 A3"),
                (A(4), 2016, "A2"),
                (A(5), 336, "A2"),
                (A(5), 1008, "A1"),
                (A(6), 288, "0"),
                (A(7), 36, "0"),
                (D(4), 315, "A1^3"),
                (D(5), 378, "A1"),
                (D(6), 63, "A1"),
                (E(6), 28, "0"),
                (E(7), 1, "0"),
            ];
            pick(row, s)
        }
        (_, E(8)) => {
            let row: &[(Component, u64, &str)] = &[
                (A(1), 120, "E7"),
                (A(2), 1120, "E6"),
                (A(3), 7560, "D5"),
                (A(4), 24192, "A4"),
                (A(5), 40320, "A1 A2"),
                (A(6), 34560, "A1"),
                (A(7), 4320, "A1"),
                (A(7), 8640, "0"),
                (A(8), 960, "0"),
                (D(4), 3150, "D4"),
                (D(5), 7560, "A3"),
                (D(6), 3780, "A1^2"),
                (D(7), 1080, "0"),
                (D(8), 135, "0"),
                (E(6), 1120, "A2"),
                (E(7), 120, "A1"),
                (E(8), 1, "0"),
            ];
            pick(row, s)
        }
        _ => Vec::new(),
    }
}

fn pick(row: &[(Component, u64, &str)], s: Component) -> Vec<(u64, RootSystem)> {
    row.iter().filter(|(c, _, _)| *c == s).map(|&(_, n, r)| (n, sys(r))).collect()
}

/// Embeddings of irreducible `s` into irreducible `t`, split by the
/// isomorphism type of the orthogonal complement: (count, complement).
pub fn emb_irreducible(s: Component, t: Component) -> Vec<(BigUint, RootSystem)> {
    type Images = Vec<(BigUint, RootSystem)>;
    static CACHE: Lazy<DashMap<(Component, Component), Images>> = Lazy::new(DashMap::new);
    if let Some(v) = CACHE.get(&(s, t)) {
        return v.clone();
    }
    let aut = s.aut_order();
    let v: Vec<(BigUint, RootSystem)> =
        orbits(s, t).into_iter().filter(|(n, _)| *n > 0).map(|(n, c)| (&aut * n, c)).collect();
    CACHE.insert((s, t), v.clone());
    v
}

/// Memoised embedding counter; the memo is dropped wholesale once it
/// exceeds `capacity` entries.
pub struct RepCounter {
    memo: DashMap<(RootSystem, RootSystem), BigUint>,
    capacity: usize,
}

impl Default for RepCounter {
    fn default() -> Self {
        Self::with_capacity(1 << 21)
    }
}

impl RepCounter {
    pub fn with_capacity(capacity: usize) -> Self {
        Self { memo: DashMap::new(), capacity }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear(&self) {
        self.memo.clear();
    }

    /// r(target, source).
    pub fn count(&self, source: &RootSystem, target: &RootSystem) -> BigUint {
        if source.is_empty() {
            return BigUint::one();
        }
        if source.has_z() || target.has_z() {
            return self.count_with_z(source, target);
        }
        if source.rank() > target.rank() || source.root_count() > target.root_count() {
            return BigUint::zero();
        }
        let key = (source.clone(), target.clone());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let s = source.parts().last().expect("nonempty").0;
        let rest = source.without(s);
        let mut total = BigUint::zero();
        for &(t, mult) in target.parts() {
            for (n, comp) in emb_irreducible(s, t) {
                let sub = self.count(&rest, &target.without(t).union(&comp));
                if !sub.is_zero() {
                    total += n * mult * sub;
                }
            }
        }
        if self.memo.len() >= self.capacity {
            self.memo.clear();
        }
        self.memo.insert(key, total.clone());
        total
    }

    // Z components only embed into Z components (norm-1 vectors), one
    // orbit each: 2 signs times an injective choice of target copy.
    fn count_with_z(&self, source: &RootSystem, target: &RootSystem) -> BigUint {
        let (zs, zt) = (source.z_count() as u64, target.z_count() as u64);
        if zs > zt {
            return BigUint::zero();
        }
        let strip = |r: &RootSystem| RootSystem::from_components(r.components().filter(|c| *c != Component::Z));
        let falling = (zt - zs + 1..=zt).fold(BigUint::one(), |a, i| a * i);
        (BigUint::one() << zs) * falling * self.count(&strip(source), &strip(target))
    }
}

/// r(target, source) peeling the source components in the given order
/// (last first), without memoisation.
pub fn rep_count_in_order(source: &[Component], target: &RootSystem) -> BigUint {
    let Some((&s, rest)) = source.split_last() else {
        return BigUint::one();
    };
    let mut total = BigUint::zero();
    for &(t, mult) in target.parts() {
        for (n, comp) in emb_irreducible(s, t) {
            let sub = rep_count_in_order(rest, &target.without(t).union(&comp));
            total += n * mult * sub;
        }
    }
    total
}

static GLOBAL: Lazy<RepCounter> = Lazy::new(RepCounter::default);

/// r(target, source) using a process-wide memo.
pub fn rep_count(source: &RootSystem, target: &RootSystem) -> BigUint {
    GLOBAL.count(source, target)
}

/// All roots (norm-2 vectors) of a root lattice, in simple-root
/// coordinates, by closing the simple roots under reflections.
pub fn roots_of(gram: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = gram.len();
    let ip = |a: &[i64], b: &[i64]| -> i64 {
        (0..n).map(|i| (0..n).map(|j| a[i] * gram[i][j] * b[j]).sum::<i64>()).sum()
    };
    let simple: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut stack: Vec<Vec<i64>> = Vec::new();
    for s in &simple {
        for v in [s.clone(), s.iter().map(|x| -x).collect()] {
            if seen.insert(v.clone()) {
                stack.push(v);
            }
        }
    }
    while let Some(v) = stack.pop() {
        for s in &simple {
            let c = ip(&v, s);
            if c != 0 {
                let w: Vec<i64> = v.iter().zip(s).map(|(a, b)| a - c * b).collect();
                if seen.insert(w.clone()) {
                    stack.push(w);
                }
            }
        }
    }
    let mut out: Vec<Vec<i64>> = seen.into_iter().collect();
    out.sort();
    out
}

/// Direct count of root-to-root isometric embeddings by backtracking over
/// images of the simple roots; only practical for small ranks.
pub fn rep_count_bruteforce(source: &RootSystem, target: &RootSystem) -> BigUint {
    let gs = source.gram();
    let gt = target.gram();
    let roots = roots_of(&gt);
    let n = gt.len();
    let ip = |a: &[i64], b: &[i64]| -> i64 {
        (0..n).map(|i| (0..n).map(|j| a[i] * gt[i][j] * b[j]).sum::<i64>()).sum()
    };
    let table: Vec<Vec<i64>> = roots.iter().map(|a| roots.iter().map(|b| ip(a, b)).collect()).collect();
    fn rec(k: usize, gs: &[Vec<i64>], table: &[Vec<i64>], chosen: &mut Vec<usize>) -> u64 {
        if k == gs.len() {
            return 1;
        }
        let mut total = 0;
        for i in 0..table.len() {
            if chosen.iter().enumerate().all(|(j, &c)| table[c][i] == gs[j][k]) {
                chosen.push(i);
                total += rec(k + 1, gs, table, chosen);
                chosen.pop();
            }
        }
        total
    }
    BigUint::from(rec(0, &gs, &table, &mut Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> RootSystem {
        s.parse().unwrap()
    }

    #[test]
    fn table_counts() {
        assert_eq!(rep_count(&r("A1^2"), &r("E8")), BigUint::from(30240u32));
        assert_eq!(rep_count(&r("A1"), &r("E8")), BigUint::from(240u32));
        assert_eq!(rep_count(&r("E8"), &r("E8")), BigUint::from(696729600u32));
        assert_eq!(rep_count(&r("A1"), &r("D5")), BigUint::from(40u32));
        assert_eq!(rep_count(&r("0"), &r("D5")), BigUint::one());
        assert_eq!(rep_count(&r("A2"), &r("A1^5")), BigUint::zero());
    }

    #[test]
    fn roots_closure() {
        for (s, n) in [("A3", 12), ("D4", 24), ("E6", 72), ("A1 A2", 8)] {
            assert_eq!(roots_of(&r(s).gram()).len(), n, "{s}");
        }
    }

    #[test]
    fn brute_force_agrees_on_small_targets() {
        for t in ["A4", "D4", "D5", "A2 A3", "A1^2 D4"] {
            for s in ["A1", "A1^2", "A2", "A1^3", "A3", "A1 A2", "D4"] {
                assert_eq!(rep_count(&r(s), &r(t)), rep_count_bruteforce(&r(s), &r(t)), "{s} -> {t}");
            }
        }
    }
}
