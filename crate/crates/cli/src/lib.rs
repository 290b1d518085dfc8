//! Report-producing front ends shared by the `piwb` binary and its tests.

pub mod cache;
pub mod suite;

use std::path::Path;

use anyhow::{bail, Context, Result};
use pi_core::algebra::SuperAlgebra;
use pi_core::catalog::{catalog_algebra, catalog_names};
use pi_core::codim::{check_expr, codimensions, CodimConfig, Method, Target, Verdict};
use pi_core::definition::{build_structured_algebra, parse_definition, AlgebraDefinition};
use pi_core::exponents::delta_exponent_bounds;
use pi_core::poly::Expr;
use pi_core::witnesses::{certify_delta_gt_two, Route};

/// An algebra resolved from the catalog or a user definition document.
pub struct Resolved {
    pub algebra: SuperAlgebra,
    pub definition: AlgebraDefinition,
    pub envelope: bool,
    /// Definition text, hashed into cache keys.
    pub source: String,
}

impl Resolved {
    pub fn target(&self) -> Target {
        Target::new(self.algebra.clone(), self.envelope)
    }

    pub fn name(&self) -> &str {
        &self.definition.name
    }
}

/// Looks `name` up in the user document first, then in the catalog.
pub fn resolve(name: Option<&str>, define: Option<&Path>) -> Result<Resolved> {
    if let Some(path) = define {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let def = parse_definition(&text)?;
        if name.is_none_or(|n| n == def.name) {
            let algebra = build_structured_algebra(&def)?;
            return Ok(Resolved { algebra, envelope: def.envelope, definition: def, source: text });
        }
    }
    let Some(name) = name else { bail!("no algebra given; catalog: {}", catalog_names().join(", ")) };
    let (algebra, entry) = catalog_algebra(name)?;
    Ok(Resolved { algebra, envelope: entry.envelope, definition: entry.definition, source: entry.source.to_string() })
}

pub fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    let parse = |x: &str| x.trim().parse::<usize>().with_context(|| format!("bad degree {x:?}"));
    let out: Vec<usize> = match s.split_once("..") {
        Some((a, b)) => {
            let hi = b.strip_prefix('=').unwrap_or(b);
            (parse(a)?..=parse(hi)?).collect()
        }
        None => s.split(',').map(parse).collect::<Result<_>>()?,
    };
    if out.is_empty() || out.contains(&0) {
        bail!("degree range {s:?} is empty or contains 0");
    }
    Ok(out)
}

pub fn parse_method(s: &str) -> Result<Method> {
    Ok(match s {
        "auto" => Method::Auto,
        "exact" => Method::Exact,
        "modular" => Method::Modular,
        _ => bail!("mode must be exact, modular or auto"),
    })
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Identity => "identity",
        Verdict::ProperCentral => "proper_central",
        Verdict::NonCentral => "non_central",
    }
}

/// Verdict line plus a structured record.
pub fn cmd_check(r: &Resolved, poly: &str, cfg: &CodimConfig) -> Result<String> {
    let e = Expr::parse(poly)?;
    let c = check_expr(&r.target(), &e, cfg)?;
    let v = verdict_name(c.verdict);
    let mut out = match (&c.witness, c.verdict) {
        (Some(w), Verdict::ProperCentral) => format!("{v}, witness value {}\n", w.value_text),
        (Some(w), Verdict::NonCentral) => format!("{v}, non-central value {}\n", w.value_text),
        _ => format!("{v}\n"),
    };
    out += &format!("algebra={} polynomial={poly} verdict={v} exact={} method={:?}", r.name(), c.exact, c.method);
    if let Some(w) = &c.witness {
        out += &format!(" substitution=[{}] value={} value_parity={}", w.elements.join("; "), w.value_text, w.parity);
    }
    out.push('\n');
    Ok(out)
}

pub fn cmd_codim(r: &Resolved, degrees: &[usize], cfg: &CodimConfig) -> Result<String> {
    let t = r.target();
    let mut out = String::new();
    for &n in degrees {
        let c = codimensions(&t, n, cfg)?;
        out += &format!("algebra={} {}\n", r.name(), c.result);
    }
    Ok(out)
}

pub fn cmd_exponent(r: &Resolved, witnesses: &[String], degree_cap: usize) -> Result<String> {
    let t = r.target();
    let b = t.algebra();
    let mut lib: Vec<String> = witnesses.to_vec();
    if let Some(e) = &r.definition.expected {
        lib.extend(e.proper_central.iter().cloned());
    }
    let res = delta_exponent_bounds(&t, &lib, degree_cap)?;
    let delta = if res.delta_certified() {
        format!("exp^δ = {} (certified)", res.delta_lower)
    } else {
        format!("exp^δ ∈ [{}, {}]", res.delta_lower, res.delta_upper)
    };
    let mut out = format!("exp = {}, {delta}\n", res.max_admissible_dim);
    let path: Vec<String> = res.path_factors().iter().map(|v| b.format(v)).collect();
    out += &format!(
        "algebra={} exp={} delta_lower={} delta_upper={} best_subset={:?} radical_path=[{}] path_product={}",
        r.name(),
        res.max_admissible_dim,
        res.delta_lower,
        res.delta_upper,
        res.best_subset,
        path.join(" · "),
        b.format(&res.path_product)
    );
    if let Some(w) = &res.delta_witness {
        out += &format!(
            " witness={} substitution=[{}] value={} blocks={:?}",
            w.polynomial,
            w.assignment.join("; "),
            w.value,
            w.blocks
        );
    }
    out.push('\n');
    Ok(out)
}

pub fn cmd_certify(r: &Resolved, degree_cap: usize) -> Result<String> {
    let b = &r.algebra;
    let c = certify_delta_gt_two(b, degree_cap)?;
    let mut out = format!("{c}\n");
    if let Some(Route::Pattern { found, realization }) = &c.route {
        let ids: Vec<String> = found.idempotents.iter().map(|v| b.format(v)).collect();
        let js: Vec<String> = found.radical_elements.iter().map(|(v, p)| format!("{}:{p}", b.format(v))).collect();
        out += &format!(
            "idempotents=[{}] radical_elements=[{}] nonzero_product={}\n",
            ids.join("; "),
            js.join("; "),
            b.format(&found.nonzero_product)
        );
        for (name, ok) in &realization.report.checks {
            out += &format!("  {} {name}\n", if *ok { "ok  " } else { "FAIL" });
        }
        for a in &realization.alternatives {
            out += &format!("  alternative target={} swap={:?} choice={:?}: {}\n", a.target, a.swap, a.choice, a.reason);
        }
    }
    Ok(out)
}

/// Builds a user definition and prints its structure.
pub fn cmd_define(r: &Resolved) -> Result<String> {
    let a = &r.algebra;
    let odd = a.parities().iter().filter(|&&p| p == 1).count();
    let mut out = format!(
        "algebra={} dim={} even={} odd={} envelope={}\n",
        r.name(),
        a.dim(),
        a.dim() - odd,
        odd,
        r.envelope
    );
    out += &format!("basis={}\n", a.labels().join(", "));
    let z = r.target().centers();
    let fmt = |s: &pi_core::linalg::RatSpace| s.basis().iter().map(|v| a.format(v)).collect::<Vec<_>>().join(", ");
    out += &format!("center_even=[{}] center_odd=[{}]\n", fmt(&z[0]), fmt(&z[1]));
    match a.wedderburn() {
        Some(w) => {
            let rep = a.verify_wedderburn(w);
            let kinds: Vec<String> = w.blocks.iter().map(|b| b.kind.name()).collect();
            out += &format!(
                "wedderburn blocks=[{}] radical_dim={} verified={}\n",
                kinds.join(", "),
                w.radical.len(),
                rep.passed()
            );
            if let Some(f) = rep.failure {
                bail!("Wedderburn data rejected: {f}");
            }
        }
        None => out += "wedderburn none\n",
    }
    Ok(out)
}
