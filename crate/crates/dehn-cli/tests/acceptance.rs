//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p dehn-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use dehn::catalog::{builtin_paper_catalog, Catalog, ManifoldProfile};
use dehn::engine::{Engine, MatchOptions, RigidityVerdict, Status};
use dehn::homology::{first_homology, null_homologous_slope, AbelianGroup, SurgeryDiagram};
use dehn::lemmas::{self, LemmaReport};
use dehn::slope::{self, ExtRational, Slope};
use dehn_cli::run_capture;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn r(p: i64, q: i64) -> ExtRational<i64> {
    ExtRational::new(p, q).unwrap()
}

fn s(p: i64, q: i64) -> Slope<i64> {
    slope::from_rational(&r(p, q))
}

fn group(t: &str) -> AbelianGroup<i64> {
    t.parse().unwrap()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn profile(cat: &Catalog, id: &str) -> ManifoldProfile {
    cat.resolve(id).unwrap().profile().unwrap().clone()
}

/// 3/10 two-bridge link (linking number 3) with m-1/2 on the first component.
fn l_diagram(m: i64) -> SurgeryDiagram<i64> {
    SurgeryDiagram::uniform(vec![Some(r(2 * m - 1, 2)), None], 3)
}

/// L_B: three components pairwise linked twice, filled 0 and p/q.
fn lb_diagram(p: i64, q: i64) -> SurgeryDiagram<i64> {
    SurgeryDiagram::uniform(vec![Some(r(0, 1)), Some(r(p, q)), None], 2)
}

fn reduced_grid() -> impl Iterator<Item = (i64, i64)> {
    (-20i64..=20).flat_map(|p| (1i64..=20).map(move |q| (p, q))).filter(|&(p, q)| gcd(p, q) == 1)
}

fn delta_values() -> Outcome {
    let d = |a: Slope<i64>, b: Slope<i64>| a.delta(&b).unwrap();
    ensure(d(s(-4, 1), s(4, 1)) == 8, || "Δ(-4,4) != 8".into())?;
    ensure(d(s(0, 1), s(4, 1)) == 4, || "Δ(0,4) != 4".into())?;
    ensure(d(s(-2, 1), s(2, 1)) == 4, || "Δ(-2,2) != 4".into())?;
    let mut n_checked = 3;
    for n in (-10i64..=10).filter(|n| !(-1..=1).contains(n)) {
        let got = d(s(2 - 9 * n, 1), s(-2 - 9 * n, 1));
        ensure(got == 4, || format!("J pair at n={n}: {got}"))?;
        n_checked += 1;
    }
    for n in (-10i64..=10).filter(|&n| n != 0) {
        let got = d(s(25 * n - 9, 1), s(50 * n - 13, 2));
        ensure(got == 5, || format!("EM pair at n={n}: {got}"))?;
        n_checked += 1;
    }
    let (code, out, _) = run_capture(&["slope", "delta", "-4", "4"]);
    ensure(code == 0 && out.trim() == "8", || format!("cli `slope delta -4 4`: {code} {out:?}"))?;
    let (code, out, _) = run_capture(&["slope", "delta", "2", "2"]);
    ensure(code == 0 && out.trim() == "0", || format!("cli `slope delta 2 2`: {code} {out:?}"))?;
    Ok(format!("{n_checked} distances exact, cli agrees"))
}

fn homology_table() -> Outcome {
    let mut checked = 0;
    for n in -30i64..=30 {
        let want = if (2 * n - 1) % 3 == 0 { group("Z+Z/3") } else { group("Z") };
        let got = first_homology(&l_diagram(n)).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("H1(L({n}-1/2)) = {got}, expected {want}"))?;
        checked += 1;
    }
    for (p, q) in reduced_grid() {
        let want = if p % 2 == 0 { group("Z+Z/2+Z/2") } else { group("Z+Z/2") };
        let got = first_homology(&lb_diagram(p, q)).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("H1(L_B(0,{p}/{q})) = {got}, expected {want}"))?;
        checked += 1;
    }
    Ok(format!("{checked} diagrams"))
}

fn null_slopes() -> Outcome {
    let mut checked = 0;
    // twist knots as 1/n surgery on one Whitehead link component
    for n in (-10i64..=10).filter(|&n| n != 0) {
        let d = SurgeryDiagram::uniform(vec![Some(r(1, n)), None], 0);
        let got = null_homologous_slope(&d, 1).map_err(|e| e.to_string())?;
        ensure(got == Some(s(0, 1)), || format!("knot 1/{n}: {got:?}"))?;
        checked += 1;
    }
    for m in -30i64..=30 {
        let got = null_homologous_slope(&l_diagram(m), 1).map_err(|e| e.to_string())?;
        let want = s(18, 2 * m - 1);
        ensure(got == Some(want), || format!("L({m}-1/2): {got:?}, expected 18/{}", 2 * m - 1))?;
        checked += 1;
    }
    for (p, q) in reduced_grid() {
        let got = null_homologous_slope(&lb_diagram(p, q), 2).map_err(|e| e.to_string())?;
        let want = s(4 * q - p, q);
        ensure(got == Some(want), || format!("L_B(0,{p}/{q}): {got:?}, expected 4-r"))?;
        checked += 1;
    }
    Ok(format!("{checked} boundary kernels"))
}

fn lemma(report: LemmaReport) -> Outcome {
    let line = format!("{} ({} checked): {}", report.name, report.checked, report.detail);
    if report.passed {
        Ok(line)
    } else {
        Err(line)
    }
}

fn verify_all() -> Outcome {
    const EXPECTED: &[&str] = &[
        "W(-2)", "W(5/2)", "W(-4)", "W(-1)", "W(5)", "M1", "M2", "M3", "M14", "Berge", "L_B(0)", "L_B(0,1)",
        "L_B(0,2)", "L_B(0,3)", "L_B(0,-1)", "L(-1/2)", "L(1/2)", "L(3/2)", "L(-7/2)", "K_-1", "K_2", "K_3", "J_2",
        "J_-2", "J_3", "EM(1)", "EM(2)", "EM(-1)",
    ];
    let mut covered: Vec<&str> = Engine::covered_targets().to_vec();
    covered.sort();
    let mut expected = EXPECTED.to_vec();
    expected.sort();
    ensure(covered == expected, || format!("covered targets differ: {covered:?}"))?;

    let (code, out, err) = run_capture(&["--format", "json", "rigidity", "verify", "--all"]);
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let verdicts: Vec<RigidityVerdict> = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    ensure(verdicts.len() == EXPECTED.len(), || format!("{} verdicts", verdicts.len()))?;
    let cat = builtin_paper_catalog();
    let mut steps = 0;
    for v in &verdicts {
        // K_-1 is catalogued as W(-1); survivors use the canonical id
        let canonical = cat.resolve(&v.target).map_err(|e| e.to_string())?.manifold_id();
        let canonical = canonical.unwrap_or_else(|| v.target.clone());
        ensure(v.status == Status::Rigid, || format!("{}: {}", v.target, v.status))?;
        ensure(v.survivors.iter().any(|c| c.contains(&canonical)), || {
            format!("{}: target not among survivors", v.target)
        })?;
        ensure(!v.trace.is_empty(), || format!("{}: empty trace", v.target))?;
        for t in &v.trace {
            ensure(!t.citation.trim().is_empty(), || format!("{}: step `{}` uncited", v.target, t.rule))?;
        }
        for e in &v.eliminated {
            ensure(!e.citation.trim().is_empty(), || format!("{}: elimination of {} uncited", v.target, e.id))?;
        }
        steps += v.trace.len();
    }
    let (code, out, _) = run_capture(&["rigidity", "verify", "W(5/2)"]);
    ensure(code == 0 && out.trim_end().ends_with("status: rigid"), || {
        format!("`rigidity verify W(5/2)` exit {code}")
    })?;
    Ok(format!("{} targets rigid, {steps} cited trace steps", verdicts.len()))
}

fn negative_controls() -> Outcome {
    let cat = builtin_paper_catalog();
    let e = Engine::new(&cat);
    let err = |x: dehn::engine::EngineError| x.to_string();
    let mut pairs = 0;
    let links = ["M1", "M2", "M14"];
    for a in links {
        for b in links.into_iter().filter(|&b| b != a) {
            let v = e.distinguish_candidates(&[a], &profile(&cat, b), b).map_err(err)?;
            ensure(v.eliminated.iter().any(|x| x.id == a), || format!("{a} not separated from {b}"))?;
            pairs += 1;
        }
    }
    for m in [-4i64, -3, -2, 2, 3, 4] {
        for n in [-4i64, -3, -2, 2, 3, 4] {
            let (k, j) = (format!("K_{m}"), format!("J_{n}"));
            for (c, t) in [(&k, &j), (&j, &k)] {
                let v = e.distinguish_candidates(&[c.as_str()], &profile(&cat, t), t).map_err(err)?;
                ensure(v.eliminated.iter().any(|x| &x.id == c) && v.status != Status::Rigid, || {
                    format!("{c} not separated from {t}")
                })?;
                pairs += 1;
            }
        }
    }
    let l_ids: Vec<(i64, String)> = (-6i64..=6).map(|n| (n, format!("L({}/2)", 2 * n - 1))).collect();
    for (m, a) in &l_ids {
        for (n, b) in &l_ids {
            let matches = e
                .match_dehn_fillings(&profile(&cat, a), &profile(&cat, b), MatchOptions::default())
                .map_err(err)?;
            let same = (2 * m - 1).abs() == (2 * n - 1).abs();
            ensure(matches.is_empty() != same, || {
                format!("{a} vs {b}: {} matches", matches.len())
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs behave as controls"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 delta values", delta_values),
        ("2 homology table", homology_table),
        ("3 null-homologous slopes", null_slopes),
        ("4 distance-4 uniqueness", || lemma(lemmas::distance_four_uniqueness())),
        ("5 pair-map count", || lemma(lemmas::pair_map_count(100, 0x5eed))),
        ("6 Alexander distinctness", || lemma(lemmas::alexander_distinctness(50))),
        ("7 Betti drop", || lemma(lemmas::betti_drop(50, 0xbe77))),
        ("8 Smith normal form", || lemma(lemmas::smith_triples(1000, 0x5317))),
        ("9 verify --all", verify_all),
        ("10 negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail}");
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
