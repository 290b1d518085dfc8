//! Idempotent and radical patterns that place one of the minimal algebras
//! `A_3, ..., A_9` in the variety of `G(B)`, realized as graded quotients.
//!
//! A pattern fixes block idempotents `e_i`, the odd element `ce_2` of an
//! `F + cF` block when present, and homogeneous radical elements `j_k`. The
//! subalgebra `B̄` generated by the listed words is mapped onto the target's
//! matrix presentation; the map is checked through its graph
//! `Γ = <(g, φ(g))> ⊆ B ⊕ T`, which is well defined exactly when
//! `Γ ∩ (0 ⊕ T) = 0`.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::algebra::{verify_wedderburn, BlockKind, CheckReport, SuperAlgebra, WedderburnData};
use crate::catalog::catalog_target;
use crate::codim::{check_expr, identity_space, CodimConfig, Method, Target, Verdict};
use crate::definition::parse_combination;
use crate::error::{Error, Result};
use crate::exponents::{delta_exponent_bounds, extract_path};
use crate::linalg::{is_zero, rank, solve_combination, unit_vec, RatSpace, Q};
use crate::poly::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lemma {
    L41,
    L42,
    L43,
    L44,
    L45,
    L46,
}

pub const ALL_LEMMAS: [Lemma; 6] = [Lemma::L41, Lemma::L42, Lemma::L43, Lemma::L44, Lemma::L45, Lemma::L46];

struct Template {
    idempotents: usize,
    /// `e_2` must be the unit of an `F + cF` block.
    graded_e2: bool,
    pattern: &'static str,
    /// Generating words with their admissible images in the target.
    generators: &'static [(&'static str, &'static [&'static str])],
    kernel: Option<&'static [&'static str]>,
    basis: &'static [&'static str],
    targets: &'static [&'static str],
    /// Index transpositions of the target presentation that may be applied.
    swaps: &'static [(usize, usize)],
    /// Generator parities must match image parities.
    graded: bool,
}

const L41: Template = Template {
    idempotents: 3,
    graded_e2: false,
    pattern: "e1j1e2j2e3j3e1",
    generators: &[
        ("e1", &["e11+e44"]),
        ("e2", &["e22"]),
        ("e3", &["e33"]),
        ("e1j1e2", &["e12"]),
        ("e2j2e3", &["e23"]),
        ("e3j3e1", &["e34"]),
    ],
    kernel: Some(&["e3j3e1j1e2"]),
    basis: &["e1", "e2", "e3", "e1j1e2", "e2j2e3", "e3j3e1", "e1j1e2j2e3", "e2j2e3j3e1", "e1j1e2j2e3j3e1"],
    targets: &["A_3"],
    swaps: &[],
    graded: false,
};

const L42: Template = Template {
    idempotents: 3,
    graded_e2: false,
    pattern: "j1e1j2e2j3e3j4",
    generators: &[
        ("e1", &["e22"]),
        ("e2", &["e33"]),
        ("e3", &["e44"]),
        ("j1e1", &["e12"]),
        ("e1j2e2", &["e23"]),
        ("e2j3e3", &["e34"]),
        ("e3j4", &["e45"]),
    ],
    kernel: Some(&["e3j4e1", "e3j4e2", "e3j4e3", "e3j4j1e1", "e3j1e1", "e2j1e1", "e1j1e1"]),
    basis: &[
        "e1",
        "e2",
        "e3",
        "j1e1",
        "e1j2e2",
        "e2j3e3",
        "e3j4",
        "j1e1j2e2",
        "e1j2e2j3e3",
        "e2j3e3j4",
        "j1e1j2e2j3e3",
        "e1j2e2j3e3j4",
        "j1e1j2e2j3e3j4",
    ],
    targets: &["A_4"],
    swaps: &[],
    graded: false,
};

const L43: Template = Template {
    idempotents: 2,
    graded_e2: true,
    pattern: "e2j2e1j1e2",
    generators: &[
        ("e1", &["e33+e44"]),
        ("e2", &["e11+e22+e55+e66"]),
        ("ce2", &["e12+e21+e56+e65"]),
        ("e1j1e2", &["e35+e46", "e36+e45"]),
        ("e2j2e1", &["e13+e24", "e14+e23"]),
    ],
    kernel: Some(&["e1j1e2j2e1", "e1j1ce2j2e1"]),
    basis: &["e1", "e2", "ce2", "e1j1e2", "e2j2e1", "e1j1ce2", "ce2j2e1", "e2j2e1j1e2", "ce2j2e1j1e2"],
    targets: &["A_5"],
    swaps: &[],
    graded: true,
};

const L44: Template = Template {
    idempotents: 2,
    graded_e2: true,
    pattern: "j1e1j2e2j3",
    generators: &[
        ("e1", &["e22"]),
        ("e2", &["e33+e44"]),
        ("ce2", &["e34+e43"]),
        ("j1e1", &["e12"]),
        ("e1j2e2", &["e23"]),
        ("e2j3", &["e35"]),
    ],
    kernel: None,
    basis: &[
        "e1", "e2", "ce2", "j1e1", "e1j2e2", "e2j3", "j1e1j2e2", "j1e1j2ce2", "j1e1j2e2j3", "e1j2ce2", "e1j2e2j3", "ce2j3",
    ],
    targets: &["A_6", "A_6^1", "A_6^2", "A_6^3"],
    swaps: &[(3, 4)],
    graded: true,
};

const L45: Template = Template {
    idempotents: 2,
    graded_e2: true,
    pattern: "j1e2j2e1j3",
    generators: &[
        ("e1", &["e44"]),
        ("e2", &["e22+e33"]),
        ("ce2", &["e23+e32"]),
        ("j1e2", &["e12"]),
        ("e2j2e1", &["e24"]),
        ("e1j3", &["e45"]),
    ],
    kernel: None,
    basis: &[
        "e1", "e2", "ce2", "j1e2", "e2j2e1", "e1j3", "j1ce2", "j1e2j2e1", "j1e2j2e1j3", "ce2j2e1", "e2j2e1j3", "ce2j2e1j3",
    ],
    targets: &["A_7", "A_7^1", "A_7^2", "A_7^3"],
    swaps: &[(2, 3)],
    graded: true,
};

const L46: Template = Template {
    idempotents: 2,
    graded_e2: true,
    pattern: "e1j1e2j2e1",
    generators: &[
        ("e1", &["e11+e44"]),
        ("e2", &["e22+e33"]),
        ("ce2", &["e23+e32"]),
        ("e1j1e2", &["e12"]),
        ("e2j2e1", &["e24"]),
    ],
    kernel: Some(&["e2j2e1j1e2", "e1j1ce2j2e1"]),
    basis: &["e1", "e2", "ce2", "e1j1e2", "e2j2e1", "e1j1ce2", "ce2j2e1", "e1j1e2j2e1"],
    targets: &["A_8", "A_9"],
    swaps: &[(2, 3)],
    graded: true,
};

impl Lemma {
    fn spec(self) -> &'static Template {
        match self {
            Lemma::L41 => &L41,
            Lemma::L42 => &L42,
            Lemma::L43 => &L43,
            Lemma::L44 => &L44,
            Lemma::L45 => &L45,
            Lemma::L46 => &L46,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Lemma::L41 => "L4.1",
            Lemma::L42 => "L4.2",
            Lemma::L43 => "L4.3",
            Lemma::L44 => "L4.4",
            Lemma::L45 => "L4.5",
            Lemma::L46 => "L4.6",
        }
    }

    /// The word whose value must be nonzero.
    pub fn pattern(self) -> &'static str {
        self.spec().pattern
    }

    /// Catalog algebras the realized quotient may be isomorphic to.
    pub fn targets(self) -> &'static [&'static str] {
        self.spec().targets
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sym {
    E(usize),
    Ce2,
    J(usize),
}

fn tokens(word: &str) -> Result<Vec<Sym>> {
    let b = word.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let bad = || Error::Pattern(format!("bad pattern word {word:?}"));
    while i < b.len() {
        let (sym, step) = match b[i] {
            b'c' if b.get(i + 1) == Some(&b'e') && b.get(i + 2) == Some(&b'2') => (Sym::Ce2, 3),
            b'e' | b'j' => {
                let d = b.get(i + 1).filter(|c| c.is_ascii_digit()).ok_or_else(bad)?;
                let k = (d - b'0') as usize;
                if k == 0 {
                    return Err(bad());
                }
                (if b[i] == b'e' { Sym::E(k) } else { Sym::J(k) }, 2)
            }
            _ => return Err(bad()),
        };
        out.push(sym);
        i += step;
    }
    Ok(out)
}

/// A detected pattern with concrete realizing elements.
#[derive(Clone, Debug)]
pub struct PatternMatch {
    pub lemma: Lemma,
    /// Wedderburn block of `e_1, e_2, ...`.
    pub blocks: Vec<usize>,
    pub idempotents: Vec<Vec<Q>>,
    /// `ce_2`, present when `e_2` is the unit of an `F + cF` block.
    pub odd_generator: Option<Vec<Q>>,
    /// `j_1, j_2, ...` with their parities.
    pub radical_elements: Vec<(Vec<Q>, u8)>,
    pub target: String,
    pub nonzero_product: Vec<Q>,
}

impl PatternMatch {
    fn value(&self, b: &SuperAlgebra, sym: Sym) -> Result<Vec<Q>> {
        let missing = || Error::Pattern(format!("{} has no element for {sym:?}", self.lemma));
        Ok(match sym {
            Sym::E(i) => self.idempotents.get(i - 1).ok_or_else(missing)?.clone(),
            Sym::Ce2 => self.odd_generator.clone().ok_or_else(missing)?,
            Sym::J(k) => self.radical_elements.get(k - 1).ok_or_else(missing)?.0.clone(),
        })
        .map(|v| {
            debug_assert_eq!(v.len(), b.dim());
            v
        })
    }

    /// Value of a word in the pattern's symbols.
    pub fn evaluate(&self, b: &SuperAlgebra, word: &str) -> Result<Vec<Q>> {
        let vals = tokens(word)?.into_iter().map(|s| self.value(b, s)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Vec<Q>> = vals.iter().collect();
        Ok(b.mul_all(&refs))
    }

    /// Re-checks the defining product, idempotents and parities.
    pub fn validate(&self, b: &SuperAlgebra) -> Result<()> {
        let spec = self.lemma.spec();
        let fail = |m: String| Err(Error::Pattern(format!("{}: {m}", self.lemma)));
        if self.idempotents.len() != spec.idempotents {
            return fail(format!("expected {} idempotents", spec.idempotents));
        }
        for (i, e) in self.idempotents.iter().enumerate() {
            if is_zero(e) || b.mul(e, e) != *e || b.homogeneous_parity(e)? != Some(0) {
                return fail(format!("e{} is not a nonzero even idempotent", i + 1));
            }
            for (k, f) in self.idempotents.iter().enumerate() {
                if i != k && !is_zero(&b.mul(e, f)) {
                    return fail(format!("e{} e{} != 0", i + 1, k + 1));
                }
            }
        }
        if spec.graded_e2 {
            let w = b.wedderburn().ok_or_else(|| Error::Wedderburn("missing".into()))?;
            let blk = &w.blocks[self.blocks[1]];
            if !matches!(blk.kind, BlockKind::FPlusCF | BlockKind::MkPlusCMk { k: 1 }) {
                return fail("e2 is not in an F + cF block".into());
            }
            let c = self.odd_generator.as_ref().ok_or_else(|| Error::Pattern("missing ce2".into()))?;
            if b.homogeneous_parity(c)? != Some(1) || b.mul(c, c) != self.idempotents[1] {
                return fail("ce2 is not an odd square root of e2".into());
            }
        }
        for (k, (j, p)) in self.radical_elements.iter().enumerate() {
            if b.homogeneous_parity(j)? != Some(*p) {
                return fail(format!("j{} does not have parity {p}", k + 1));
            }
        }
        let v = self.evaluate(b, spec.pattern)?;
        if is_zero(&v) || v != self.nonzero_product {
            return fail(format!("{} does not evaluate to the recorded nonzero product", spec.pattern));
        }
        Ok(())
    }

    pub fn describe(&self, b: &SuperAlgebra) -> String {
        let mut s = format!("{} target {}:", self.lemma, self.target);
        for (i, e) in self.idempotents.iter().enumerate() {
            s += &format!(" e{}={}", i + 1, b.format(e));
        }
        if let Some(c) = &self.odd_generator {
            s += &format!(" ce2={}", b.format(c));
        }
        for (k, (j, p)) in self.radical_elements.iter().enumerate() {
            s += &format!(" j{}={} (parity {p})", k + 1, b.format(j));
        }
        s += &format!(" {}={}", self.lemma.pattern(), b.format(&self.nonzero_product));
        s
    }
}

fn verified(b: &SuperAlgebra) -> Result<&WedderburnData> {
    let w = b.wedderburn().ok_or_else(|| Error::Wedderburn(format!("{} has no Wedderburn data", b.name())))?;
    if let Some(f) = verify_wedderburn(b, w).failure {
        return Err(Error::Wedderburn(f));
    }
    Ok(w)
}

fn is_field_block(k: &BlockKind) -> bool {
    matches!(k, BlockKind::F | BlockKind::Mkl { k: 1, l: 0 })
}

fn is_graded_field_block(k: &BlockKind) -> bool {
    matches!(k, BlockKind::FPlusCF | BlockKind::MkPlusCMk { k: 1 })
}

fn ordered_choices(pool: &[usize], len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(pool: &[usize], len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for &p in pool {
            if !cur.contains(&p) {
                cur.push(p);
                rec(pool, len, cur, out);
                cur.pop();
            }
        }
    }
    rec(pool, len, &mut Vec::new(), &mut out);
    out
}

/// All lemma patterns realizable with the block idempotents of `b`.
///
/// Blocks other than `F` and `F + cF` are ignored here; see [`short_circuits`].
pub fn detect_patterns(b: &SuperAlgebra) -> Result<Vec<PatternMatch>> {
    let w = verified(b)?;
    let units: Vec<Vec<Q>> = w.blocks.iter().map(|x| x.unit()).collect();
    let small: Vec<usize> =
        (0..w.blocks.len()).filter(|&i| is_field_block(&w.blocks[i].kind) || is_graded_field_block(&w.blocks[i].kind)).collect();
    let mut jp = [RatSpace::new(b.dim()), RatSpace::new(b.dim())];
    for j in &w.radical {
        if let Some(p) = b.homogeneous_parity(j)? {
            jp[p as usize].insert(j);
        }
    }
    let mut out = Vec::new();
    for lemma in ALL_LEMMAS {
        let spec = lemma.spec();
        let toks = tokens(spec.pattern)?;
        let nj = toks.iter().filter(|t| matches!(t, Sym::J(_))).count();
        for tuple in ordered_choices(&small, spec.idempotents) {
            if spec.graded_e2 && !is_graded_field_block(&w.blocks[tuple[1]].kind) {
                continue;
            }
            for mask in 0..1u32 << nj {
                let par = |k: usize| ((mask >> (k - 1)) & 1) as usize;
                let factors: Vec<RatSpace> = toks
                    .iter()
                    .map(|t| match *t {
                        Sym::E(i) => RatSpace::spanned_by(b.dim(), [&units[tuple[i - 1]]]),
                        Sym::J(k) => jp[par(k)].clone(),
                        Sym::Ce2 => unreachable!("patterns use idempotents only"),
                    })
                    .collect();
                if factors.iter().any(|f| f.dim() == 0) {
                    continue;
                }
                let Some(path) = extract_path(b, &factors) else { continue };
                let mut radical = vec![(Vec::new(), 0u8); nj];
                for (t, v) in toks.iter().zip(&path) {
                    if let Sym::J(k) = *t {
                        radical[k - 1] = (v.clone(), par(k) as u8);
                    }
                }
                let refs: Vec<&Vec<Q>> = path.iter().collect();
                let product = b.mul_all(&refs);
                let target = match lemma {
                    Lemma::L46 if radical[0].1 != radical[1].1 => "A_9",
                    _ => spec.targets[0],
                };
                let odd_generator = if spec.graded_e2 { w.blocks[tuple[1]].odd_generator().cloned() } else { None };
                out.push(PatternMatch {
                    lemma,
                    idempotents: tuple.iter().map(|&i| units[i].clone()).collect(),
                    blocks: tuple.clone(),
                    odd_generator,
                    radical_elements: radical,
                    target: target.to_string(),
                    nonzero_product: product,
                });
            }
        }
    }
    Ok(out)
}

/// A large simple block forcing `A_1` or `A_2` directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortCircuit {
    pub block: usize,
    pub kind: BlockKind,
    pub target: &'static str,
}

pub fn short_circuits(b: &SuperAlgebra) -> Result<Vec<ShortCircuit>> {
    let w = verified(b)?;
    let mut out = Vec::new();
    for (i, blk) in w.blocks.iter().enumerate() {
        let target = match blk.kind {
            BlockKind::Mkl { l, .. } if l > 0 => Some("A_2"),
            BlockKind::Mkl { k, .. } if k >= 2 => Some("A_1"),
            BlockKind::MkPlusCMk { k } if k >= 2 => Some("A_1"),
            _ => None,
        };
        if let Some(target) = target {
            out.push(ShortCircuit { block: i, kind: blk.kind.clone(), target });
        }
    }
    Ok(out)
}

/// One candidate image assignment tried during realization.
#[derive(Clone, Debug)]
pub struct Alternative {
    pub target: String,
    pub swap: Option<(usize, usize)>,
    /// Index of the image chosen for each generator.
    pub choice: Vec<usize>,
    pub accepted: bool,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub lemma: Lemma,
    pub target: String,
    pub subalgebra: SuperAlgebra,
    pub quotient: SuperAlgebra,
    pub kernel_dim: usize,
    pub alternatives: Vec<Alternative>,
    pub report: CheckReport,
}

impl Realization {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

fn swap_entries(s: &str, swap: Option<(usize, usize)>) -> Result<String> {
    let Some((a, b)) = swap else { return Ok(s.to_string()) };
    let mv = |i: usize| if i == a { b } else if i == b { a } else { i };
    let mut out = String::new();
    for (sym, c) in parse_combination(s)? {
        let d = sym.as_bytes();
        if d.len() != 3 || d[0] != b'e' {
            return Err(Error::Pattern(format!("image term {sym:?} is not a matrix unit")));
        }
        let (i, j) = (mv((d[1] - b'0') as usize), mv((d[2] - b'0') as usize));
        let sign = if c.is_negative() { "-" } else { "+" };
        out += &format!("{sign}{}*e{i}{j}", c.abs());
    }
    Ok(out)
}

fn cartesian(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out.into_iter().flat_map(|p| (0..s).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

/// Subalgebra of `B ⊕ T` generated by the pairs.
fn graph(b: &SuperAlgebra, t: &SuperAlgebra, pairs: &[(Vec<Q>, Vec<Q>)]) -> RatSpace {
    let db = b.dim();
    let join = |x: &[Q], y: &[Q]| [x, y].concat();
    let mut s = RatSpace::new(db + t.dim());
    let mut queue = Vec::new();
    for (x, y) in pairs {
        let v = join(x, y);
        if s.insert(&v) {
            queue.push(v);
        }
    }
    while let Some(v) = queue.pop() {
        let (x, y) = v.split_at(db);
        for (gx, gy) in pairs {
            let w = join(&b.mul(x, gx), &t.mul(y, gy));
            if s.insert(&w) {
                queue.push(w);
            }
        }
    }
    s
}

struct GraphData {
    gamma: RatSpace,
    sub: RatSpace,
    kernel: RatSpace,
    image_dim: usize,
}

fn graph_data(b: &SuperAlgebra, t: &SuperAlgebra, pairs: &[(Vec<Q>, Vec<Q>)]) -> GraphData {
    let db = b.dim();
    let gamma = graph(b, t, pairs);
    let xs: Vec<Vec<Q>> = gamma.basis().iter().map(|v| v[..db].to_vec()).collect();
    let ys: Vec<Vec<Q>> = gamma.basis().iter().map(|v| v[db..].to_vec()).collect();
    let sub = RatSpace::spanned_by(db, xs.iter());
    let image_dim = rank(&ys);
    let left: Vec<Vec<Q>> = (0..db).map(|i| unit_vec(db + t.dim(), i)).collect();
    let cap = gamma.intersection(&RatSpace::spanned_by(db + t.dim(), left.iter()));
    let kernel = RatSpace::spanned_by(db, cap.basis().iter().map(|v| v[..db].to_vec()).collect::<Vec<_>>().iter());
    GraphData { gamma, sub, kernel, image_dim }
}

/// `φ(x)` for `x` in the projection of the graph.
fn apply_graph(g: &GraphData, db: usize, x: &[Q]) -> Option<Vec<Q>> {
    let xs: Vec<Vec<Q>> = g.gamma.basis().iter().map(|v| v[..db].to_vec()).collect();
    let c = solve_combination(&xs, x)?;
    let dt = g.gamma.len() - db;
    let mut y = vec![Q::zero(); dt];
    for (ci, v) in c.iter().zip(g.gamma.basis()) {
        for (o, a) in y.iter_mut().zip(&v[db..]) {
            *o += ci * a;
        }
    }
    Some(y)
}

fn exact_cfg() -> CodimConfig {
    CodimConfig { method: Method::Exact, ..Default::default() }
}

/// Builds `B̄`, the kernel and the quotient for a match, then verifies the
/// coset basis, the isomorphism with the target and its identities.
pub fn realize_pattern(b: &SuperAlgebra, m: &PatternMatch) -> Result<Realization> {
    m.validate(b)?;
    let spec = m.lemma.spec();
    let gens: Vec<Vec<Q>> = spec.generators.iter().map(|(w, _)| m.evaluate(b, w)).collect::<Result<_>>()?;
    let gen_par: Vec<Option<u8>> = gens.iter().map(|g| b.homogeneous_parity(g)).collect::<Result<_>>()?;
    let sizes: Vec<usize> = spec.generators.iter().map(|(_, imgs)| imgs.len()).collect();
    let mut alternatives = Vec::new();
    let mut chosen: Option<(String, Target, GraphData)> = None;
    for &name in spec.targets {
        let (target, _) = catalog_target(name)?;
        let t = target.algebra();
        for swap in std::iter::once(None).chain(spec.swaps.iter().copied().map(Some)) {
            for choice in cartesian(&sizes) {
                let mut alt = Alternative { target: name.to_string(), swap, choice: choice.clone(), accepted: false, reason: String::new() };
                let mut images = Vec::new();
                for (k, &c) in choice.iter().enumerate() {
                    let s = swap_entries(spec.generators[k].1[c], swap)?;
                    match t.parse_element(&s) {
                        Ok(v) => images.push(v),
                        Err(_) => {
                            alt.reason = format!("image of {} outside {name}", spec.generators[k].0);
                            break;
                        }
                    }
                }
                if images.len() == gens.len() && spec.graded {
                    for (k, img) in images.iter().enumerate() {
                        if let Some(p) = gen_par[k] {
                            if t.homogeneous_parity(img)? != Some(p) {
                                alt.reason = format!("parity of {} differs from its image", spec.generators[k].0);
                                break;
                            }
                        }
                    }
                }
                if alt.reason.is_empty() {
                    let pairs: Vec<(Vec<Q>, Vec<Q>)> = gens.iter().cloned().zip(images).collect();
                    let g = graph_data(b, t, &pairs);
                    if g.sub.dim() != g.gamma.dim() {
                        alt.reason = "generator assignment does not extend to a homomorphism".into();
                    } else if g.image_dim != t.dim() {
                        alt.reason = format!("image has dimension {} of {}", g.image_dim, t.dim());
                    } else {
                        alt.accepted = true;
                        alt.reason = "accepted".into();
                        if chosen.is_none() {
                            chosen = Some((name.to_string(), target.clone(), g));
                        }
                    }
                }
                alternatives.push(alt);
            }
        }
    }
    let Some((tname, target, g)) = chosen else {
        return Err(Error::Pattern(format!("{}: no image assignment yields a surjective homomorphism", m.lemma)));
    };
    let t = target.algebra();
    let mut rep = CheckReport::new();
    let db = b.dim();
    let generated = b.generated_subalgebra(&gens);
    rep.record(format!("generated subalgebra has dimension {}", generated.dim()), generated.equals(&g.sub));
    rep.record(
        format!("dim B̄ - dim I = {} - {} equals dim {tname} = {}", g.sub.dim(), g.kernel.dim(), t.dim()),
        g.sub.dim() - g.kernel.dim() == t.dim(),
    );
    if let Some(kw) = spec.kernel {
        let kv: Vec<Vec<Q>> = kw.iter().map(|w| m.evaluate(b, w)).collect::<Result<_>>()?;
        let ideal = b.ideal_in(&g.sub, &kv);
        rep.record(format!("ideal generated by {} is the kernel", kw.join(", ")), ideal.equals(&g.kernel));
    }
    let reps: Vec<Vec<Q>> = spec.basis.iter().map(|w| m.evaluate(b, w)).collect::<Result<_>>()?;
    rep.record(format!("coset basis has {} = dim {tname} elements", reps.len()), reps.len() == t.dim());
    let mut all = reps.clone();
    all.extend(g.kernel.basis().iter().cloned());
    rep.record("coset basis is independent modulo the kernel", rank(&all) == all.len());
    rep.record("coset basis and kernel span B̄", RatSpace::spanned_by(db, all.iter()).equals(&g.sub));
    let sub_basis = g.sub.basis().to_vec();
    let sub_labels: Vec<String> = (1..=sub_basis.len()).map(|i| format!("b{i}")).collect();
    let subalgebra = b.quotient_on(&format!("{}-sub", b.name()), &sub_basis, &RatSpace::new(db), sub_labels)?;
    let labels: Vec<String> = spec.basis.iter().map(|s| s.to_string()).collect();
    let quotient = match b.quotient_on(&format!("{}/{}", b.name(), m.lemma), &reps, &g.kernel, labels) {
        Ok(q) => q,
        Err(e) => {
            rep.record(format!("quotient structure constants: {e}"), false);
            return Ok(Realization {
                lemma: m.lemma,
                target: tname,
                quotient: subalgebra.clone(),
                subalgebra,
                kernel_dim: g.kernel.dim(),
                alternatives,
                report: rep,
            });
        }
    };
    let psi: Vec<Vec<Q>> = reps.iter().map(|r| apply_graph(&g, db, r).expect("representatives lie in B̄")).collect();
    rep.record("images of the coset basis form a basis of the target", rank(&psi) == t.dim());
    let mut hom = true;
    for a in 0..reps.len() {
        for c in 0..reps.len() {
            let lhs = t.mul(&psi[a], &psi[c]);
            let mut rhs = vec![Q::zero(); t.dim()];
            for (k, x) in quotient.basis_product(a, c) {
                for (o, y) in rhs.iter_mut().zip(&psi[*k]) {
                    *o += x * y;
                }
            }
            hom &= lhs == rhs;
        }
    }
    rep.record(format!("quotient structure constants match {tname}"), hom);
    if spec.graded {
        let ok = (0..reps.len()).all(|k| matches!(t.homogeneous_parity(&psi[k]), Ok(Some(p)) if p == quotient.parity(k)));
        rep.record("quotient grading matches the target grading", ok);
    }
    let qt = Target::envelope(quotient.clone());
    let trivially = quotient.is_trivially_graded();
    for n in 1..=4 {
        let a = identity_space(&qt, n, &exact_cfg())?;
        let z = identity_space(&target, n, &exact_cfg())?;
        if spec.graded || trivially {
            rep.record(format!("Id-spaces of G(quotient) and {tname} agree at n={n}"), a.equals(&z)?);
        } else {
            rep.record(format!("Id-space of G(quotient) inside that of {tname} at n={n}"), a.is_subspace_of(&z)?);
        }
    }
    let family = spec.targets[0];
    let witness_src = {
        let (_, e) = catalog_target(&tname)?;
        match e.expected.proper_central.first() {
            Some(w) => Some(w.clone()),
            None => catalog_target(family)?.1.expected.proper_central.first().cloned(),
        }
    };
    if let Some(w) = witness_src {
        let c = check_expr(&qt, &Expr::parse(&w)?, &exact_cfg())?;
        rep.record(format!("{w} is proper central on G(quotient)"), c.verdict == Verdict::ProperCentral);
    }
    Ok(Realization { lemma: m.lemma, target: tname, subalgebra, quotient, kernel_dim: g.kernel.dim(), alternatives, report: rep })
}

#[derive(Clone, Debug)]
pub enum Route {
    Block(ShortCircuit),
    Pattern { found: Box<PatternMatch>, realization: Box<Realization> },
}

#[derive(Clone, Debug)]
pub struct DeltaCertificate {
    pub algebra: String,
    pub route: Option<Route>,
    /// Bounds for the proper central exponent when no route was found.
    pub interval: Option<(usize, usize)>,
    pub matches_tried: usize,
}

impl DeltaCertificate {
    pub fn certified(&self) -> bool {
        self.route.is_some()
    }

    pub fn target(&self) -> Option<&str> {
        match self.route.as_ref()? {
            Route::Block(s) => Some(s.target),
            Route::Pattern { realization, .. } => Some(&realization.target),
        }
    }
}

/// `exp^δ(G(B)) > 2` via a short circuit or a realized pattern; otherwise
/// reports the exponent interval without concluding anything.
pub fn certify_delta_gt_two(b: &SuperAlgebra, degree_cap: usize) -> Result<DeltaCertificate> {
    let name = b.name().to_string();
    if let Some(s) = short_circuits(b)?.into_iter().next() {
        return Ok(DeltaCertificate { algebra: name, route: Some(Route::Block(s)), interval: None, matches_tried: 0 });
    }
    let matches = detect_patterns(b)?;
    let mut tried = 0;
    for m in matches {
        tried += 1;
        let Ok(r) = realize_pattern(b, &m) else { continue };
        if r.passed() {
            return Ok(DeltaCertificate {
                algebra: name,
                route: Some(Route::Pattern { found: Box::new(m), realization: Box::new(r) }),
                interval: None,
                matches_tried: tried,
            });
        }
    }
    let bounds = delta_exponent_bounds(&Target::envelope(b.clone()), &[], degree_cap)?;
    Ok(DeltaCertificate { algebra: name, route: None, interval: Some((bounds.delta_lower, bounds.delta_upper)), matches_tried: tried })
}

impl fmt::Display for DeltaCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.route {
            Some(Route::Block(s)) => write!(
                f,
                "algebra={} verdict=certified route=block block={} kind={} target={}",
                self.algebra,
                s.block,
                s.kind.name(),
                s.target
            ),
            Some(Route::Pattern { found, realization }) => write!(
                f,
                "algebra={} verdict=certified lemma={} target={} kernel_dim={} checks_passed={}/{}",
                self.algebra,
                found.lemma,
                realization.target,
                realization.kernel_dim,
                realization.report.checks.iter().filter(|c| c.1).count(),
                realization.report.checks.len()
            ),
            None => {
                let (lo, hi) = self.interval.unwrap_or((0, 0));
                write!(f, "algebra={} verdict=no_witness_found interval=[{lo},{hi}] matches_tried={}", self.algebra, self.matches_tried)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_algebra;

    fn base(name: &str) -> SuperAlgebra {
        catalog_algebra(name).unwrap().0
    }

    #[test]
    fn word_tokens() {
        assert_eq!(tokens("e1j1ce2j2e1").unwrap(), vec![Sym::E(1), Sym::J(1), Sym::Ce2, Sym::J(2), Sym::E(1)]);
        assert!(tokens("e1x").is_err());
    }

    #[test]
    fn a3_has_its_cycle() {
        let b = base("A_3");
        let ms = detect_patterns(&b).unwrap();
        let m = ms.iter().find(|m| m.lemma == Lemma::L41).expect("L4.1 match");
        assert_eq!(m.target, "A_3");
        let js: Vec<String> = m.radical_elements.iter().map(|(j, _)| b.format(j)).collect();
        assert_eq!(js, ["e12", "e23", "e34"]);
        assert_eq!(b.format(&m.nonzero_product), "e14");
        // direct product of the matrix units
        let e = |s: &str| b.parse_element(s).unwrap();
        assert_eq!(b.mul_all(&[&e("e12"), &e("e23"), &e("e34")]), e("e14"));
    }

    #[test]
    fn a3_realizes_with_nine_dimensional_quotient() {
        let b = base("A_3");
        let m = detect_patterns(&b).unwrap().into_iter().find(|m| m.lemma == Lemma::L41).unwrap();
        let r = realize_pattern(&b, &m).unwrap();
        assert!(r.passed(), "{:?}", r.report);
        assert_eq!(r.quotient.dim(), 9);
        assert_eq!(r.kernel_dim, 0);
        assert_eq!(r.target, "A_3");
    }

    #[test]
    fn semisimple_and_two_block_inputs_have_no_patterns() {
        for name in ["A_1", "F", "G", "D", "D_0", "UT_2"] {
            assert!(detect_patterns(&base(name)).unwrap().is_empty(), "{name}");
        }
    }

    #[test]
    fn large_blocks_short_circuit() {
        assert_eq!(short_circuits(&base("A_2")).unwrap()[0].target, "A_2");
        assert_eq!(short_circuits(&base("A_1")).unwrap()[0].target, "A_1");
        assert!(short_circuits(&base("A_3")).unwrap().is_empty());
    }

    #[test]
    fn every_minimal_algebra_certifies_itself() {
        let expect = [
            ("A_3", Lemma::L41, "A_3"),
            ("A_4", Lemma::L42, "A_4"),
            ("A_5", Lemma::L43, "A_5"),
            ("A_6", Lemma::L44, "A_6"),
            ("A_7", Lemma::L45, "A_7"),
            ("A_8", Lemma::L46, "A_8"),
            ("A_9", Lemma::L46, "A_9"),
            ("A_6^2", Lemma::L44, "A_6^2"),
            ("A_7^3", Lemma::L45, "A_7^3"),
        ];
        for (name, lemma, target) in expect {
            let c = certify_delta_gt_two(&base(name), 6).unwrap();
            match &c.route {
                Some(Route::Pattern { found, realization }) => {
                    assert_eq!(found.lemma, lemma, "{name}");
                    assert_eq!(realization.target, target, "{name}");
                    assert_eq!(realization.quotient.dim(), base(target).dim(), "{name}");
                }
                other => panic!("{name}: {other:?}"),
            }
        }
    }

    #[test]
    fn all_four_parity_cases_of_a5_realize() {
        let b = base("A_5");
        let ms = detect_patterns(&b).unwrap();
        assert_eq!(ms.len(), 4);
        for m in &ms {
            let r = realize_pattern(&b, m).unwrap();
            assert!(r.passed(), "{}", m.describe(&b));
            assert_eq!(r.alternatives.iter().filter(|a| a.accepted).count(), 1);
        }
    }

    #[test]
    fn small_exponent_inputs_report_an_interval() {
        let c = certify_delta_gt_two(&base("D"), 6).unwrap();
        assert!(!c.certified());
        assert_eq!(c.interval, Some((2, 2)));
        assert!(c.to_string().contains("no_witness_found"));
    }

    #[test]
    fn tampered_match_is_rejected() {
        let b = base("A_3");
        let mut m = detect_patterns(&b).unwrap().into_iter().next().unwrap();
        m.radical_elements[1].0 = b.parse_element("e24").unwrap();
        assert!(m.validate(&b).is_err());
    }
}
