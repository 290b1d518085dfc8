//! Acceptance criteria, one status line each.
//!
//! Expected values are pinned here rather than read from the catalog files.
//! Set `PI_WITH_DEGREE7=1` to run the degree-7 criterion.

use std::time::Instant;

use anyhow::{ensure, Result};
use pi_cli::suite::{model_noncentral, sign_rule_agreement};
use pi_core::algebra::SuperAlgebra;
use pi_core::catalog::{catalog_algebra, catalog_names, catalog_target};
use pi_core::codim::{check_expr, codimensions, CodimConfig, Method, Provenance, Target, Verdict};
use pi_core::exponents::{delta_exponent_bounds, pi_exponent};
use pi_core::linalg::RatSpace;
use pi_core::poly::{tideal_multilinear_span, Expr, GeneralPoly, SpanMode};
use pi_core::witnesses::{certify_delta_gt_two, Route};

/// Largest degree computed exhaustively over the rationals.
const EXACT_MAX_N: usize = 5;
const MODULAR_PRIMES: usize = 2;
const STABILIZATION_WINDOW: usize = 3;
const SIGN_RULE_TRIALS: usize = 200;
const WITNESS_DEGREE_CAP: usize = 8;

enum Status {
    Pass,
    Fail,
    Skipped,
    Refuted,
}

fn cfg_for(n: usize) -> CodimConfig {
    let method = if n <= EXACT_MAX_N { Method::Exact } else { Method::Modular };
    CodimConfig { method, primes: MODULAR_PRIMES, window: STABILIZATION_WINDOW, ..Default::default() }
}

fn modular_sound(p: &Provenance) -> bool {
    match p {
        Provenance::Exact => true,
        Provenance::Modular { primes, agree, stabilized, .. } => primes.len() == MODULAR_PRIMES && *agree && *stabilized,
    }
}

fn target(name: &str) -> Result<Target> {
    Ok(catalog_target(name)?.0)
}

fn unit(a: &SuperAlgebra) -> Vec<pi_core::linalg::Q> {
    a.unit().expect("unital").clone()
}

fn exponent_table() -> Result<(Status, String)> {
    let table: [(&str, usize, Option<usize>, &[&str]); 11] = [
        ("A_1", 4, Some(4), &["[x1,x2][x3,x4]+[x3,x4][x1,x2]"]),
        ("A_2", 4, Some(4), &["[[x1,x2],[x3,x4]]"]),
        ("A_3", 3, Some(3), &[]),
        ("A_4", 3, Some(3), &[]),
        ("A_5", 3, Some(3), &[]),
        ("A_6", 3, Some(3), &[]),
        ("A_7", 3, Some(3), &[]),
        ("A_8", 3, Some(3), &[]),
        ("A_9", 3, Some(3), &[]),
        ("UT_2", 2, None, &[]),
        ("G", 2, None, &[]),
    ];
    let mut bad = Vec::new();
    for (name, exp, delta, extra) in table {
        let t = target(name)?;
        let got = pi_exponent(t.algebra())?.max_admissible_dim;
        if got != exp {
            bad.push(format!("exp({name}) = {got}, want {exp}"));
        }
        if let Some(d) = delta {
            let w: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
            let r = delta_exponent_bounds(&t, &w, WITNESS_DEGREE_CAP)?;
            if (r.delta_lower, r.delta_upper) != (d, d) {
                bad.push(format!("exp^δ({name}) ∈ [{}, {}], want {d}", r.delta_lower, r.delta_upper));
            }
        }
    }
    Ok(if bad.is_empty() {
        (Status::Pass, "exp = exp^δ = 4 for A_1, A_2; 3 for A_3..A_9; exp = 2 for UT_2 and G".into())
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn center_table() -> Result<(Status, String)> {
    let mut bad = Vec::new();
    let rows: [(&str, &[&str], &[&str]); 5] = [
        ("A_3", &["1", "e14"], &[]),
        ("A_4", &["e15"], &[]),
        ("A_5", &["1", "u13"], &[]),
        ("A_8", &["1", "e14"], &[]),
        ("A_9", &["1"], &["e14"]),
    ];
    for (name, even, odd) in rows {
        let t = target(name)?;
        let a = t.algebra();
        let span = |xs: &[&str]| -> Result<RatSpace> {
            let vs = xs
                .iter()
                .map(|s| if *s == "1" { Ok(unit(a)) } else { a.parse_element(s) })
                .collect::<pi_core::Result<Vec<_>>>()?;
            Ok(RatSpace::spanned_by(a.dim(), vs.iter()))
        };
        let z = t.centers();
        if !z[0].equals(&span(even)?) || !z[1].equals(&span(odd)?) {
            bad.push(name);
        }
    }
    Ok(if bad.is_empty() {
        (Status::Pass, "Z(A_3)=<1,e14> Z(A_4)=<e15> Z(A_5)=<1,u13> Z(A_8)=<1,e14> Z(A_9)=<1>+<e14>_odd".into())
    } else {
        (Status::Fail, format!("mismatch for {}", bad.join(", ")))
    })
}

fn proper_central_witnesses() -> Result<(Status, String)> {
    let cfg = CodimConfig::default();
    let printed: [(&str, &str, Option<&str>); 5] = [
        ("A_3", "[x1,x2][x3,x4][x5,x6]", Some("e14")),
        ("A_4", "[x1,x2][x3,x4][x5,x6][x7,x8]", Some("e15")),
        ("A_5", "[[x1,x2,x3][x4,x5,x6],x7]", None),
        ("A_8", "[x1,x2,x3][x4,x5,x6]", None),
        ("A_9", "[x1,x2,x3][x4,x5,x6]", None),
    ];
    let mut bad = Vec::new();
    for (name, poly, value) in printed {
        let t = target(name)?;
        let c = check_expr(&t, &Expr::parse(poly)?, &cfg)?;
        let value_ok = match (value, &c.witness) {
            (Some(v), Some(w)) => t.algebra().parse_element(v)? == w.value,
            (Some(_), None) => false,
            (None, _) => true,
        };
        if c.verdict != Verdict::ProperCentral || !value_ok {
            bad.push(format!("{poly} on {name}: {:?}", c.verdict));
        }
    }
    let disputed: [(&str, &str, &str); 2] = [
        ("A_6", "[x1,x2][x3,x4][x5,x6,x7]", "[x1,x2][x3,x4,x5][x6,x7,x8]"),
        ("A_7", "[x1,x2,x3][x4,x5][x6,x7]", "[x1,x2,x3][x4,x5,x6][x7,x8]"),
    ];
    let mut refuted = Vec::new();
    for (name, poly, replacement) in disputed {
        let t = target(name)?;
        let e = Expr::parse(poly)?;
        let c = check_expr(&t, &e, &cfg)?;
        match (c.verdict, &c.witness) {
            (Verdict::ProperCentral, _) => {}
            (Verdict::NonCentral, Some(w)) if model_noncentral(t.algebra(), &e, &w.vectors)? => {
                refuted.push(format!("{poly} on {name} gives {} at [{}]", w.value_text, w.elements.join("; ")));
            }
            (v, _) => bad.push(format!("{poly} on {name}: {v:?} without a confirmed evaluation")),
        }
        let r = check_expr(&t, &Expr::parse(replacement)?, &cfg)?;
        if r.verdict != Verdict::ProperCentral {
            bad.push(format!("replacement {replacement} on {name}: {:?}", r.verdict));
        }
    }
    Ok(if !bad.is_empty() {
        (Status::Fail, bad.join("; "))
    } else if refuted.is_empty() {
        (Status::Pass, "all six printed witnesses proper central, values e14 and e15 reproduced".into())
    } else {
        (
            Status::Refuted,
            format!(
                "{} of 6 printed witnesses proper central (e14, e15 reproduced); non-central evaluations confirmed in the truncated Grassmann model: {}; degree-8 replacements are proper central",
                6 - refuted.len(),
                refuted.join(" | ")
            ),
        )
    })
}

fn ut2_codimensions() -> Result<(Status, String)> {
    let t = target("UT_2")?;
    let mut bad = Vec::new();
    for n in 1..=6 {
        let r = codimensions(&t, n, &cfg_for(n))?.result;
        let oracle = (1i64 << (n - 1)) * (n as i64 - 2) + 2;
        if r.c_n_delta != 0 || r.c_n != r.c_n_z + r.c_n_delta || r.c_n as i64 != oracle || !modular_sound(&r.provenance) {
            bad.push(format!("n={n}: {r}"));
        }
    }
    Ok(if bad.is_empty() {
        (Status::Pass, "c_n^δ(UT_2)=0 and c_n = 2^(n-1)(n-2)+2 = c_n^z + c_n^δ for n=1..6 (n=6 on two primes)".into())
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn tideal_equals_identities(name: &str, generator: &str, degrees: &[usize]) -> Result<Vec<String>> {
    let t = target(name)?;
    let g = GeneralPoly::parse(generator)?;
    let mut bad = Vec::new();
    for &n in degrees {
        let cfg = cfg_for(n);
        let c = codimensions(&t, n, &cfg)?;
        let span = tideal_multilinear_span(std::slice::from_ref(&g), n, SpanMode::Reduced);
        let dims: Vec<usize> = if n <= EXACT_MAX_N {
            vec![span.dim_exact(cfg.fields()[0])]
        } else {
            cfg.fields().into_iter().map(|f| span.dim_mod(f)).collect()
        };
        let inside = span.vectors.iter().all(|v| c.identities.contains_sparse(v));
        if !inside || dims.iter().any(|&d| d != c.identities.dim()) || !modular_sound(&c.result.provenance) {
            bad.push(format!("{name} n={n}: dim Id={} T-ideal {dims:?} contained={inside}", c.identities.dim()));
        }
    }
    Ok(bad)
}

fn lemma_c1_c2() -> Result<(Status, String)> {
    let mut bad = tideal_equals_identities("C_1", "[x1,x2,x3]x4", &[4, 5, 6])?;
    bad.extend(tideal_equals_identities("C_2", "x1[x2,x3,x4]", &[4, 5, 6])?);
    Ok(if bad.is_empty() {
        (Status::Pass, "P_n ∩ Id(C_1) = P_n ∩ <[x1,x2,x3]x4>_T and the C_2 analogue, n=4,5 exact, n=6 on two primes".into())
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn degree_seven() -> Result<(Status, String)> {
    if std::env::var("PI_WITH_DEGREE7").as_deref() != Ok("1") {
        return Ok((Status::Skipped, "set PI_WITH_DEGREE7=1 to run".into()));
    }
    let mut bad = tideal_equals_identities("A_6", "x1[x2,x3][x4,x5,x6]x7", &[7])?;
    bad.extend(tideal_equals_identities("A_7", "x1[x2,x3,x4][x5,x6]x7", &[7])?);
    Ok(if bad.is_empty() {
        (Status::Pass, "dim P_7 ∩ <generator>_T = 5040 - c_7 for A_6 and A_7, stabilized on two primes".into())
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn graded_variants() -> Result<(Status, String)> {
    let mut bad = Vec::new();
    for fam in [["A_6", "A_6^1", "A_6^2", "A_6^3"], ["A_7", "A_7^1", "A_7^2", "A_7^3"]] {
        for n in 1..=6 {
            let cfg = cfg_for(n);
            let base = codimensions(&target(fam[0])?, n, &cfg)?.identities;
            for v in &fam[1..] {
                if !base.equals(&codimensions(&target(v)?, n, &cfg)?.identities)? {
                    bad.push(format!("{v} differs from {} at n={n}", fam[0]));
                }
            }
        }
    }
    Ok(if bad.is_empty() {
        (Status::Pass, "identity spaces of A_6, A_6^1..3 coincide for n ≤ 6, likewise for A_7".into())
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn membership_table() -> Result<(Status, String)> {
    let all = ["A_1", "A_2", "A_3", "A_4", "A_5", "A_6", "A_7", "A_8", "A_9"];
    let upper = &all[2..];
    let rows: Vec<(&str, Vec<&str>, Vec<&str>)> = vec![
        ("St_4", vec!["A_1"], upper.to_vec()),
        ("[[x1,x2]^2,x3]", vec!["A_1"], vec!["A_2"]),
        ("[[x1,x2],[x3,x4],x5]", vec!["A_2"], [&["A_1"][..], upper].concat()),
        ("[x1,x2][x3,x4][x5,x6][x7,x8]", vec!["A_3"], upper.iter().copied().filter(|&a| a != "A_3").collect()),
        ("x1[x2,x3][x4,x5][x6,x7]x8", vec!["A_4"], upper.iter().copied().filter(|&a| a != "A_4").collect()),
        ("[x1,x2,x3][x4,x5][x6,x7,x8]", vec!["A_5"], upper.iter().copied().filter(|&a| a != "A_5").collect()),
        ("x1[x2,x3][x4,x5,x6]x7", vec!["A_6"], upper.iter().copied().filter(|&a| a != "A_6").collect()),
        ("x1[x2,x3,x4][x5,x6]x7", vec!["A_7"], upper.iter().copied().filter(|&a| a != "A_7").collect()),
    ];
    let cfg = CodimConfig::default();
    let mut bad = Vec::new();
    let mut count = 0;
    for (poly, members, others) in &rows {
        let e = Expr::parse(poly)?;
        for (names, want) in [(members, true), (others, false)] {
            for name in names.iter() {
                count += 1;
                let c = check_expr(&target(name)?, &e, &cfg)?;
                let ok = if want { c.is_identity() && c.exact } else { !c.is_identity() && (c.exact || c.witness.is_some()) };
                if !ok {
                    bad.push(format!("{poly} on {name}: {:?}", c.verdict));
                }
            }
        }
    }
    Ok(if bad.is_empty() {
        (Status::Pass, format!("{count} memberships and non-memberships confirmed"))
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn witness_certifier() -> Result<(Status, String)> {
    let expect: [(&str, Option<&str>, Option<&str>, usize); 15] = [
        ("A_1", None, Some("A_1"), 0),
        ("A_2", None, Some("A_2"), 0),
        ("A_3", Some("L4.1"), Some("A_3"), 9),
        ("A_4", Some("L4.2"), Some("A_4"), 13),
        ("A_5", Some("L4.3"), Some("A_5"), 9),
        ("A_6", Some("L4.4"), Some("A_6"), 12),
        ("A_7", Some("L4.5"), Some("A_7"), 12),
        ("A_8", Some("L4.6"), Some("A_8"), 8),
        ("A_9", Some("L4.6"), Some("A_9"), 8),
        ("A_6^2", Some("L4.4"), Some("A_6^2"), 12),
        ("A_7^1", Some("L4.5"), Some("A_7^1"), 12),
        ("D", None, None, 0),
        ("D_0", None, None, 0),
        ("F", None, None, 0),
        ("G", None, None, 0),
    ];
    let mut bad = Vec::new();
    for (name, lemma, tgt, dim) in expect {
        let (b, _) = catalog_algebra(name)?;
        let c = certify_delta_gt_two(&b, 6)?;
        let ok = match (&c.route, lemma) {
            (Some(Route::Pattern { found, realization }), Some(l)) => {
                let checks = &realization.report.checks;
                let independent = checks.iter().any(|(n, ok)| *ok && n.contains("independent modulo the kernel"));
                let ids = checks.iter().filter(|(n, _)| n.contains("Id-space")).count() == 4;
                found.lemma.id() == l
                    && Some(realization.target.as_str()) == tgt
                    && realization.quotient.dim() == dim
                    && realization.passed()
                    && independent
                    && ids
            }
            (Some(Route::Block(s)), None) => Some(s.target) == tgt,
            (None, None) => tgt.is_none() && c.interval.is_some_and(|(_, hi)| hi <= 2),
            _ => false,
        };
        if !ok {
            bad.push(c.to_string());
        }
    }
    Ok(if bad.is_empty() {
        (Status::Pass, "L4.1-L4.6 realized on their own algebras with coset bases and Id-spaces (n ≤ 4) verified; no witness on D, D_0, F, G".into())
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn oracle_equivalences() -> Result<(Status, String)> {
    let mut bad = Vec::new();
    for name in catalog_names() {
        let (_, e) = catalog_algebra(name)?;
        if e.envelope {
            let (agree, total) = sign_rule_agreement(name, SIGN_RULE_TRIALS, 0x5151)?;
            if agree != total {
                bad.push(format!("sign rule on {name}: {agree}/{total}"));
            }
        }
        let t = target(name)?;
        for n in 1..=4 {
            let ex = codimensions(&t, n, &CodimConfig { method: Method::Exact, ..Default::default() })?;
            let md = codimensions(&t, n, &CodimConfig { method: Method::Modular, ..Default::default() })?;
            if !(ex.identities.equals(&md.identities)? && ex.central.equals(&md.central)?) {
                bad.push(format!("exact/modular on {name} n={n}"));
            }
        }
    }
    let f = CodimConfig::default().fields()[0];
    for g in ["[x1,x2,x3]x4", "x1[x2,x3,x4]", "[x1,x2][x3,x4]", "St_4"] {
        let p = Expr::parse(g)?.expand();
        for n in 4..=5 {
            let r = tideal_multilinear_span(std::slice::from_ref(&p), n, SpanMode::Reduced);
            let full = tideal_multilinear_span(std::slice::from_ref(&p), n, SpanMode::Full);
            ensure!(full.generated >= r.generated, "full enumeration is smaller than the reduced one");
            if r.dim_exact(f) != full.dim_exact(f) {
                bad.push(format!("reduced/full span for {g} at n={n}"));
            }
        }
    }
    Ok(if bad.is_empty() {
        (Status::Pass, format!("sign rule = truncated model ({SIGN_RULE_TRIALS} trials per envelope), exact = modular for n ≤ 4, reduced = full spans at n = 4, 5"))
    } else {
        (Status::Fail, bad.join("; "))
    })
}

fn main() {
    type Criterion = fn() -> Result<(Status, String)>;
    let criteria: [(u8, &str, Criterion); 10] = [
        (1, "exponent table", exponent_table),
        (2, "center table", center_table),
        (3, "proper central witnesses", proper_central_witnesses),
        (4, "UT_2 proper central codimensions", ut2_codimensions),
        (5, "C_1 and C_2 identities", lemma_c1_c2),
        (6, "degree-7 identities of A_6 and A_7", degree_seven),
        (7, "graded variants of A_6 and A_7", graded_variants),
        (8, "membership table", membership_table),
        (9, "witness certifier", witness_certifier),
        (10, "oracle equivalences", oracle_equivalences),
    ];
    let mut failed = 0;
    for (id, title, run) in criteria {
        let t0 = Instant::now();
        let (status, detail) = run().unwrap_or_else(|e| (Status::Fail, format!("error: {e:#}")));
        let label = match status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skipped => "SKIPPED",
            Status::Refuted => "REFUTED",
        };
        println!("criterion {id:>2} [{label}] {title} ({:.1}s): {detail}", t0.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
