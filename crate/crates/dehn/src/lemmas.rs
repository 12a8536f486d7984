//! Brute-force oracles for the arithmetic lemmas. Each check is
//! independent of the algebraic code path it audits and returns a report
//! instead of panicking, so the CLI can print them.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alexander::{equivalent_up_to_unit, twist_knot_alexander};
use crate::homology::{first_homology, null_homologous_slope, smith_normal_form, Matrix, SurgeryDiagram};
use crate::slope::{
    enumerate_bounded_distance, find_pair_maps, make_slope, unique_max_pair, BasisMap, ExtRational, Slope,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub detail: String,
}

impl LemmaReport {
    fn new(name: &str, checked: usize, failure: Option<String>, ok: String) -> Self {
        LemmaReport {
            name: name.to_string(),
            passed: failure.is_none(),
            checked,
            detail: failure.unwrap_or(ok),
        }
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Primes just below `2^31`, largest first.
fn residue_primes(count: usize) -> Vec<u64> {
    (1u64..1 << 31).rev().filter(|n| is_prime(*n)).take(count).collect()
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn det_mod(m: &Matrix<i64>, p: u64) -> u64 {
    let n = m.rows();
    let mut a: Vec<Vec<u64>> = (0..n)
        .map(|i| m.row(i).iter().map(|x| x.rem_euclid(p as i64) as u64).collect())
        .collect();
    let mut det = 1u64;
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i][k] != 0) else {
            return 0;
        };
        if piv != k {
            a.swap(piv, k);
            det = (p - det) % p;
        }
        det = det * a[k][k] % p;
        let inv = pow_mod(a[k][k], p - 2, p);
        for i in k + 1..n {
            let f = a[i][k] * inv % p;
            for j in k..n {
                a[i][j] = (a[i][j] + p - f * a[k][j] % p) % p;
            }
        }
    }
    det
}

/// `|det m| = 1`, decided by residues modulo enough primes to beat the
/// Hadamard bound. Independent of the Bareiss code in `homology`.
pub fn is_unimodular(m: &Matrix<i64>) -> bool {
    if m.rows() != m.cols() {
        return false;
    }
    // bits of prod ||row||, rounded up, plus one for the sign window
    let mut bits = 1u32;
    for i in 0..m.rows() {
        let norm_sq = m
            .row(i)
            .iter()
            .try_fold(0u128, |acc, x| acc.checked_add((*x as i128 * *x as i128) as u128));
        let Some(norm_sq) = norm_sq else { return false };
        bits += (128 - norm_sq.leading_zeros()).div_ceil(2);
    }
    let primes = residue_primes((bits as usize).div_ceil(30));
    let residues: Vec<(u64, u64)> = primes.iter().map(|&p| (p, det_mod(m, p))).collect();
    residues.iter().all(|(_, r)| *r == 1) || residues.iter().all(|(p, r)| *r == p - 1)
}

fn delta(a: &Slope<i64>, b: &Slope<i64>) -> i64 {
    (a.p() * b.q() - b.p() * a.q()).abs()
}

/// The canonical distance-4 pair has six slopes within distance 4 of both,
/// and every subset with maximal distance 4 realizes it by a single pair.
pub fn distance_four_uniqueness() -> LemmaReport {
    let (c1, c2) = (make_slope(1i64, 0).unwrap(), make_slope(1i64, 4).unwrap());
    let found = enumerate_bounded_distance(&c1, &c2, 4).unwrap();
    let mut window = BTreeSet::new();
    for p in -40i64..=40 {
        for q in 0..=40 {
            if let Ok(s) = make_slope(p, q) {
                if delta(&s, &c1) <= 4 && delta(&s, &c2) <= 4 {
                    window.insert(s);
                }
            }
        }
    }
    if found != window || found.len() != 6 {
        return LemmaReport::new(
            "distance-4 uniqueness",
            1,
            Some(format!("enumeration gave {} slopes, window gave {}", found.len(), window.len())),
            String::new(),
        );
    }
    let slopes: Vec<_> = found.into_iter().collect();
    let mut checked = 0;
    for mask in 0u32..1 << slopes.len() {
        let subset: Vec<_> = (0..slopes.len()).filter(|i| mask >> i & 1 == 1).map(|i| slopes[i]).collect();
        let mut max = 0;
        let mut count = 0;
        for (i, a) in subset.iter().enumerate() {
            for b in &subset[i + 1..] {
                let d = delta(a, b);
                if d > max {
                    (max, count) = (d, 1);
                } else if d == max {
                    count += 1;
                }
            }
        }
        if max != 4 {
            continue;
        }
        checked += 1;
        let pair = unique_max_pair(&subset).unwrap().unwrap();
        if count != 1 || !pair.unique || pair.delta != 4 {
            return LemmaReport::new(
                "distance-4 uniqueness",
                checked,
                Some(format!("subset {subset:?} has {count} pairs at distance 4")),
                String::new(),
            );
        }
    }
    LemmaReport::new(
        "distance-4 uniqueness",
        checked,
        None,
        format!("6 slopes; {checked} subsets with maximum 4, each with one realizing pair"),
    )
}

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> BasisMap<i64> {
    let gens = [
        BasisMap::new(0i64, -1, 1, 0).unwrap(),
        BasisMap::new(1i64, 1, 0, 1).unwrap(),
        BasisMap::new(1i64, -1, 0, 1).unwrap(),
        BasisMap::new(-1i64, 0, 0, 1).unwrap(),
    ];
    (0..len).fold(BasisMap::identity(), |acc, _| {
        acc.compose(&gens[rng.gen_range(0..gens.len())]).unwrap()
    })
}

/// `find_pair_maps` returns two classes, both carry the pair correctly, and a
/// search over all matrices with entries in `[-10, 10]` finds nothing else.
pub fn pair_map_count(instances: usize, seed: u64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut both_seen = 0;
    for k in 0..instances {
        let a = 2 * rng.gen_range(-2i64..=1) + 1;
        let base = (make_slope(1i64, 0).unwrap(), make_slope(a, 4).unwrap());
        let (lp, lq) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let phi = random_word(&mut rng, lp);
        let psi = random_word(&mut rng, lq);
        let (c1, c2) = (phi.apply(&base.0).unwrap(), phi.apply(&base.1).unwrap());
        let (mut d1, mut d2) = (psi.apply(&base.0).unwrap(), psi.apply(&base.1).unwrap());
        if rng.gen() {
            std::mem::swap(&mut d1, &mut d2);
        }
        let maps = find_pair_maps(&c1, &c2, &d1, &d2).unwrap();
        let target = BTreeSet::from([d1, d2]);
        let carries = |m: &BasisMap<i64>| {
            BTreeSet::from([m.apply(&c1).unwrap(), m.apply(&c2).unwrap()]) == target
        };
        if maps.len() != 2 || maps[0] == maps[1] || !maps.iter().all(carries) {
            return LemmaReport::new(
                "distance-4 pair maps",
                k,
                Some(format!("instance {k}: {maps:?}")),
                String::new(),
            );
        }
        let mut seen = BTreeSet::new();
        for p in -10i64..=10 {
            for q in -10i64..=10 {
                for r in -10i64..=10 {
                    for s in -10i64..=10 {
                        let det = p * s - q * r;
                        if det != 1 && det != -1 {
                            continue;
                        }
                        let m = BasisMap::new(p, q, r, s).unwrap();
                        if carries(&m) {
                            seen.insert(m.matrix());
                        }
                    }
                }
            }
        }
        let returned: BTreeSet<_> = maps.iter().map(|m| m.matrix()).collect();
        if !seen.is_subset(&returned) {
            return LemmaReport::new(
                "distance-4 pair maps",
                k,
                Some(format!("instance {k}: search found an extra class among {seen:?}")),
                String::new(),
            );
        }
        if seen.len() == 2 {
            both_seen += 1;
        }
    }
    LemmaReport::new(
        "distance-4 pair maps",
        instances,
        None,
        format!("{instances} instances, exactly 2 classes each; search recovered both in {both_seen}"),
    )
}

/// Twist-knot polynomials for `0 < |m| <= bound` are pairwise inequivalent
/// and each is symmetric.
pub fn alexander_distinctness(bound: i64) -> LemmaReport {
    let polys: Vec<_> = (-bound..=bound)
        .filter(|m| *m != 0)
        .map(|m| (m, twist_knot_alexander(m).unwrap()))
        .collect();
    let mut checked = 0;
    for (i, (m, f)) in polys.iter().enumerate() {
        if !equivalent_up_to_unit(f, &f.reversed()) {
            return LemmaReport::new("twist Alexander distinctness", checked, Some(format!("m = {m} not symmetric")), String::new());
        }
        for (n, g) in &polys[i + 1..] {
            checked += 1;
            if equivalent_up_to_unit(f, g) {
                return LemmaReport::new(
                    "twist Alexander distinctness",
                    checked,
                    Some(format!("m = {m} and n = {n} agree up to a unit")),
                    String::new(),
                );
            }
        }
    }
    LemmaReport::new(
        "twist Alexander distinctness",
        checked,
        None,
        format!("{checked} pairs with 0 < |m|, |n| <= {bound} distinct; all symmetric"),
    )
}

fn random_diagram(rng: &mut ChaCha8Rng) -> SurgeryDiagram<i64> {
    let n = rng.gen_range(1..=4);
    let mut lk = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = rng.gen_range(-3..=3);
            lk[i][j] = x;
            lk[j][i] = x;
        }
    }
    let fill = (0..n)
        .map(|i| {
            (i + 1 < n).then(|| {
                ExtRational::new(rng.gen_range(-9i64..=9), rng.gen_range(1i64..=5)).unwrap()
            })
        })
        .collect();
    SurgeryDiagram::new(lk, fill).unwrap()
}

/// Filling the null-homologous slope keeps `b_1`; any other slope drops it
/// by one.
pub fn betti_drop(instances: usize, seed: u64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes_checked = 0;
    for k in 0..instances {
        let d = random_diagram(&mut rng);
        let i = d.components() - 1;
        let b = first_homology(&d).unwrap().betti();
        let Some(c0) = null_homologous_slope(&d, i).unwrap() else {
            return LemmaReport::new("betti drop", k, Some(format!("no null slope for {d:?}")), String::new());
        };
        for p in -6i64..=6 {
            for q in 0..=6i64 {
                let Ok(c) = make_slope(p, q) else { continue };
                let filled = d.with_fill(i, Some(crate::slope::to_rational(&c))).unwrap();
                let fb = first_homology(&filled).unwrap().betti();
                let want = if c == c0 { b } else { b - 1 };
                slopes_checked += 1;
                if fb != want {
                    return LemmaReport::new(
                        "betti drop",
                        k,
                        Some(format!("{d:?} filled along {c}: b1 {fb}, expected {want}")),
                        String::new(),
                    );
                }
            }
        }
    }
    LemmaReport::new(
        "betti drop",
        instances,
        None,
        format!("{instances} diagrams, {slopes_checked} fillings"),
    )
}

/// `U M V = S` (checked in 128 bits), unimodular `U` and `V`, divisibility
/// chain, on random matrices up to 6x6 with entries in `[-9, 9]`.
pub fn smith_triples(count: usize, seed: u64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wide = |x: &Matrix<i64>| {
        Matrix::<i128>::from_rows(x.to_rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect())
    };
    for k in 0..count {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let m = Matrix::with_shape(r, c, (0..r * c).map(|_| rng.gen_range(-9i64..=9)).collect());
        let fail = |why: &str| {
            LemmaReport::new("smith normal form", k, Some(format!("{why} for {:?}", m.to_rows())), String::new())
        };
        let Ok(snf) = smith_normal_form(&m) else {
            return fail("overflow");
        };
        let Ok(prod) = wide(&snf.u).mul(&wide(&m)).and_then(|x| x.mul(&wide(&snf.v))) else {
            return fail("overflow in check");
        };
        if prod != wide(&snf.s) {
            return fail("U M V != S");
        }
        if !is_unimodular(&snf.u) || !is_unimodular(&snf.v) {
            return fail("transform not unimodular");
        }
        let off_diag = (0..r).any(|i| (0..c).any(|j| i != j && snf.s[(i, j)] != 0));
        let diag = snf.diagonal();
        let chain = diag.windows(2).all(|w| {
            w[0] >= 0 && w[1] >= 0 && if w[0] == 0 { w[1] == 0 } else { w[1] % w[0] == 0 }
        }) && diag.iter().all(|d| *d >= 0);
        if off_diag || !chain {
            return fail("not in Smith form");
        }
    }
    LemmaReport::new("smith normal form", count, None, format!("{count} random matrices up to 6x6"))
}

pub fn run_all() -> Vec<LemmaReport> {
    vec![
        distance_four_uniqueness(),
        pair_map_count(100, 1),
        alexander_distinctness(50),
        betti_drop(50, 2),
        smith_triples(1000, 3),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_determinant() {
        let id = Matrix::<i64>::identity(4);
        assert!(is_unimodular(&id));
        let swap = Matrix::from_rows(vec![vec![0i64, 1], vec![1, 0]]);
        assert!(is_unimodular(&swap));
        let two = Matrix::from_rows(vec![vec![2i64, 0], vec![0, 1]]);
        assert!(!is_unimodular(&two));
        let big = Matrix::from_rows(vec![vec![1_000_000_001i64, 1_000_000_000], vec![1, 1]]);
        assert!(is_unimodular(&big));
        let sing = Matrix::from_rows(vec![vec![3i64, 6], vec![1, 2]]);
        assert!(!is_unimodular(&sing));
    }

    #[test]
    fn primes_are_prime() {
        let ps = residue_primes(3);
        assert_eq!(ps[0], 2_147_483_647);
        assert!(ps.iter().all(|p| is_prime(*p)));
    }

    #[test]
    fn all_lemmas_pass() {
        for report in run_all() {
            assert!(report.passed, "{}: {}", report.name, report.detail);
        }
    }
}
