//! Algebra definition documents (TOML) and matrix-unit presentations.
//!
//! ```toml
//! name = "A_3"
//! [ambient]
//! type = "ut_blocks"
//! sizes = [1, 1, 1, 1]
//! grading = [0, 0, 0, 0]
//! constraints = ["a11=a44"]
//! [wedderburn]
//! radical = "complement"
//! [[wedderburn.blocks]]
//! kind = "F"
//! basis = ["e11+e44"]
//! ```

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::algebra::{BlockKind, MatrixShape, Product, SimpleBlock, SuperAlgebra, WedderburnData};
use crate::error::{Error, Result};
use crate::linalg::{zero_vec, Q};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDefinition {
    pub name: String,
    #[serde(default)]
    pub envelope: bool,
    #[serde(default)]
    pub description: String,
    pub ambient: Ambient,
    #[serde(default)]
    pub wedderburn: Option<WedderburnSpec>,
    #[serde(default)]
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Ambient {
    UtBlocks {
        sizes: Vec<usize>,
        #[serde(default)]
        grading: Option<Vec<u8>>,
        #[serde(default)]
        constraints: Vec<String>,
        /// Optional display labels, one per basis class.
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    StructureConstants {
        #[serde(default)]
        dim: Option<usize>,
        labels: Vec<String>,
        parity: Vec<u8>,
        /// Triples `[left, right, value]`; unlisted products are zero.
        #[serde(default)]
        products: Vec<[String; 3]>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedderburnSpec {
    pub radical: RadicalSpec,
    #[serde(default)]
    pub blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RadicalSpec {
    /// `"complement"`: every basis element not used by a block.
    Keyword(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub kind: String,
    pub basis: Vec<String>,
}

/// Values a catalog entry promises; every field is re-derived by tests.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub exp: Option<usize>,
    pub exp_delta: Option<usize>,
    /// Center (plain algebras) or its even part `Z_0` (envelopes).
    pub center: Option<Vec<String>>,
    /// Odd part `Z_1` of the envelope center.
    pub center_odd: Option<Vec<String>>,
    #[serde(default)]
    pub proper_central: Vec<String>,
    /// Printed evaluation values, aligned with `proper_central`.
    #[serde(default)]
    pub witness_values: Vec<String>,
    #[serde(default)]
    pub identities: Vec<String>,
    #[serde(default)]
    pub non_identities: Vec<String>,
}

pub fn parse_definition(text: &str) -> Result<AlgebraDefinition> {
    toml::from_str(text).map_err(|e| Error::Definition(e.to_string()))
}

/// Builds the algebra described by a definition document, including its
/// Wedderburn data when present.
pub fn build_structured_algebra(def: &AlgebraDefinition) -> Result<SuperAlgebra> {
    let alg = match &def.ambient {
        Ambient::UtBlocks { sizes, grading, constraints, labels } => {
            let n: usize = sizes.iter().sum();
            let g = grading.clone().unwrap_or_else(|| vec![0; n]);
            let alg = build_presentation(&def.name, sizes, &g, constraints)?;
            match labels {
                Some(l) => alg.relabeled(l.clone())?,
                None => alg,
            }
        }
        Ambient::StructureConstants { dim, labels, parity, products } => {
            if let Some(d) = dim {
                if *d != labels.len() {
                    return Err(Error::DimensionMismatch { expected: *d, got: labels.len() });
                }
            }
            build_from_products(&def.name, labels, parity, products)?
        }
    };
    match &def.wedderburn {
        None => Ok(alg),
        Some(w) => {
            let data = wedderburn_from_spec(&alg, w)?;
            Ok(alg.with_wedderburn(data))
        }
    }
}

pub fn wedderburn_from_spec(alg: &SuperAlgebra, w: &WedderburnSpec) -> Result<WedderburnData> {
    let mut blocks = Vec::new();
    for b in &w.blocks {
        let kind = BlockKind::parse(&b.kind)?;
        let basis = b.basis.iter().map(|s| parse_element(alg, s)).collect::<Result<Vec<_>>>()?;
        blocks.push(SimpleBlock { kind, basis });
    }
    let radical = match &w.radical {
        RadicalSpec::Keyword(k) if k == "complement" => {
            let mut used = vec![false; alg.dim()];
            for b in &blocks {
                for v in &b.basis {
                    for (i, c) in v.iter().enumerate() {
                        if !c.is_zero() {
                            used[i] = true;
                        }
                    }
                }
            }
            (0..alg.dim()).filter(|&i| !used[i]).map(|i| alg.basis(i)).collect()
        }
        RadicalSpec::Keyword(k) => return Err(Error::Definition(format!("unknown radical keyword {k:?}"))),
        RadicalSpec::List(l) => l.iter().map(|s| parse_element(alg, s)).collect::<Result<Vec<_>>>()?,
    };
    Ok(WedderburnData { blocks, radical })
}

/// `UT(d_1, ..., d_m)` with the elementary grading `parity(e_ij) = h_i + h_j`.
pub fn build_ut_block_algebra(sizes: &[usize], grading: &[u8]) -> Result<SuperAlgebra> {
    let name = format!(
        "UT({})_({})",
        sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
        grading.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    );
    build_presentation(&name, sizes, grading, &[])
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn parse_entry(s: &str, n: usize) -> Result<(usize, usize)> {
    let bad = || Error::Definition(format!("bad matrix entry {s:?}"));
    let t = s.trim();
    let body = t.strip_prefix('a').or_else(|| t.strip_prefix('e')).ok_or_else(bad)?;
    let (i, j) = if let Some(inner) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
        let mut it = inner.split(',');
        let i: usize = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let j: usize = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        (i, j)
    } else {
        let b = body.as_bytes();
        if b.len() != 2 || !b.iter().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        ((b[0] - b'0') as usize, (b[1] - b'0') as usize)
    };
    if i == 0 || j == 0 || i > n || j > n {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

fn entry_label(i: usize, j: usize) -> String {
    if i < 9 && j < 9 {
        format!("e{}{}", i + 1, j + 1)
    } else {
        format!("e[{},{}]", i + 1, j + 1)
    }
}

/// Matrix-unit presentation inside `UT(sizes)` with entry constraints.
pub fn build_presentation(name: &str, sizes: &[usize], grading: &[u8], constraints: &[String]) -> Result<SuperAlgebra> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return Err(Error::EmptyAlgebra);
    }
    if grading.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: grading.len() });
    }
    if grading.iter().any(|&g| g > 1) {
        return Err(Error::Definition("grading entries must be 0 or 1".into()));
    }
    let mut block_of = Vec::with_capacity(n);
    for (b, &s) in sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat(b).take(s));
    }
    let allowed = |i: usize, j: usize| block_of[i] <= block_of[j];
    let idx = |i: usize, j: usize| i * n + j;
    let mut dsu = Dsu((0..n * n).collect());
    let mut zero = vec![false; n * n];
    for c in constraints {
        let parts: Vec<&str> = c.split('=').map(str::trim).collect();
        if parts.len() < 2 {
            return Err(Error::Definition(format!("constraint {c:?} has no '='")));
        }
        let mut entries = Vec::new();
        let mut is_zero = false;
        for p in &parts {
            if *p == "0" {
                is_zero = true;
                continue;
            }
            let (i, j) = parse_entry(p, n)?;
            if !allowed(i, j) {
                return Err(Error::Definition(format!("entry {p} lies below the block diagonal")));
            }
            entries.push(idx(i, j));
        }
        for w in entries.windows(2) {
            dsu.union(w[0], w[1]);
        }
        if is_zero {
            for &e in &entries {
                zero[e] = true;
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut root_zero: HashMap<usize, bool> = HashMap::new();
    for i in 0..n {
        for j in 0..n {
            if !allowed(i, j) {
                continue;
            }
            let r = dsu.find(idx(i, j));
            members.entry(r).or_default().push((i, j));
            *root_zero.entry(r).or_insert(false) |= zero[idx(i, j)];
        }
    }
    let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
    for (r, mut m) in members {
        if root_zero[&r] {
            continue;
        }
        m.sort();
        let p0 = grading[m[0].0] ^ grading[m[0].1];
        if m.iter().any(|&(i, j)| grading[i] ^ grading[j] != p0) {
            let l: Vec<String> = m.iter().map(|&(i, j)| entry_label(i, j)).collect();
            return Err(Error::MixedParity(l.join("+")));
        }
        classes.push(m);
    }
    if classes.is_empty() {
        return Err(Error::EmptyAlgebra);
    }
    classes.sort_by_key(|m| {
        let diag = m.iter().any(|&(i, j)| i == j);
        (!diag, m[0])
    });
    let mut class_of: HashMap<(usize, usize), usize> = HashMap::new();
    for (c, m) in classes.iter().enumerate() {
        for &e in m {
            class_of.insert(e, c);
        }
    }
    let labels: Vec<String> = classes
        .iter()
        .map(|m| m.iter().map(|&(i, j)| entry_label(i, j)).collect::<Vec<_>>().join("+"))
        .collect();
    let parity: Vec<u8> = classes.iter().map(|m| grading[m[0].0] ^ grading[m[0].1]).collect();
    let d = classes.len();
    let mut table: Vec<Vec<Product>> = vec![vec![Vec::new(); d]; d];
    for a in 0..d {
        for b in 0..d {
            let mut prod: BTreeMap<(usize, usize), i64> = BTreeMap::new();
            for &(i, j) in &classes[a] {
                for &(j2, l) in &classes[b] {
                    if j == j2 {
                        *prod.entry((i, l)).or_insert(0) += 1;
                    }
                }
            }
            prod.retain(|_, v| *v != 0);
            let mut coords: BTreeMap<usize, i64> = BTreeMap::new();
            for (&e, &v) in &prod {
                let Some(&c) = class_of.get(&e) else {
                    return Err(Error::NotClosed(format!("{}*{} has entry {}", labels[a], labels[b], entry_label(e.0, e.1))));
                };
                match coords.get(&c) {
                    Some(&w) if w != v => {
                        return Err(Error::NotClosed(format!("{}*{} is not constant on {}", labels[a], labels[b], labels[c])));
                    }
                    _ => {
                        coords.insert(c, v);
                    }
                }
            }
            for (&c, &v) in &coords {
                if classes[c].iter().any(|e| !prod.contains_key(e)) {
                    return Err(Error::NotClosed(format!("{}*{} misses part of {}", labels[a], labels[b], labels[c])));
                }
                table[a][b].push((c, Q::from_integer(BigInt::from(v))));
            }
        }
    }
    let alg = SuperAlgebra::from_table(name, labels, parity, table)?;
    Ok(alg.with_shape(MatrixShape { size: n, classes }))
}

fn build_from_products(name: &str, labels: &[String], parity: &[u8], products: &[[String; 3]]) -> Result<SuperAlgebra> {
    let d = labels.len();
    let index = |s: &str| {
        labels
            .iter()
            .position(|l| l == s.trim())
            .ok_or_else(|| Error::Definition(format!("unknown basis label {s:?}")))
    };
    let mut table: Vec<Vec<Product>> = vec![vec![Vec::new(); d]; d];
    for [l, r, v] in products {
        let (i, j) = (index(l)?, index(r)?);
        let terms = parse_combination(v)?;
        let mut out: Product = Vec::new();
        for (sym, c) in terms {
            out.push((index(&sym)?, c));
        }
        table[i][j].extend(out);
    }
    SuperAlgebra::from_table(name, labels.to_vec(), parity.to_vec(), table)
}

/// Parses `"e11+e44"`, `"2*e12 - 1/2*e[10,11]"` or label combinations.
pub fn parse_element(alg: &SuperAlgebra, s: &str) -> Result<Vec<Q>> {
    let d = alg.dim();
    if let Some(i) = alg.labels().iter().position(|l| l == s.trim()) {
        return Ok(crate::linalg::unit_vec(d, i));
    }
    let terms = parse_combination(s)?;
    let all_labels = terms.iter().all(|(sym, _)| alg.labels().iter().any(|l| l == sym));
    let shape = if all_labels { None } else { alg.shape() };
    let Some(shape) = shape else {
        let mut v = zero_vec(d);
        for (sym, c) in terms {
            let i = alg
                .labels()
                .iter()
                .position(|l| *l == sym)
                .ok_or_else(|| Error::Parse { offset: 0, message: format!("unknown label {sym:?}") })?;
            v[i] += c;
        }
        return Ok(v);
    };
    let mut entries: BTreeMap<(usize, usize), Q> = BTreeMap::new();
    for (sym, c) in &terms {
        let e = parse_entry(sym, shape.size).map_err(|_| Error::Parse { offset: 0, message: format!("unknown symbol {sym:?}") })?;
        *entries.entry(e).or_insert_with(Q::zero) += c;
    }
    entries.retain(|_, v| !v.is_zero());
    let mut v = zero_vec(d);
    for (k, class) in shape.classes.iter().enumerate() {
        let first = entries.get(&class[0]).cloned().unwrap_or_else(Q::zero);
        for e in class {
            if entries.get(e).cloned().unwrap_or_else(Q::zero) != first {
                return Err(Error::Parse { offset: 0, message: format!("{s:?} is not in the algebra (class {})", alg.labels()[k]) });
            }
        }
        v[k] = first;
    }
    for e in entries.keys() {
        if !shape.classes.iter().any(|c| c.contains(e)) {
            return Err(Error::Parse { offset: 0, message: format!("{s:?} uses an entry outside the algebra") });
        }
    }
    Ok(v)
}

/// Splits a linear combination into `(symbol, coefficient)` pairs.
pub fn parse_combination(s: &str) -> Result<Vec<(String, Q)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let out = parse_sum(&chars, &mut pos)?;
    skip_ws(&chars, &mut pos);
    if pos != chars.len() {
        return Err(Error::Parse { offset: pos, message: format!("unexpected {:?}", chars[pos]) });
    }
    Ok(out)
}

fn skip_ws(c: &[char], pos: &mut usize) {
    while *pos < c.len() && c[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_sum(c: &[char], pos: &mut usize) -> Result<Vec<(String, Q)>> {
    let mut out = Vec::new();
    let mut first = true;
    loop {
        skip_ws(c, pos);
        let mut sign = Q::one();
        if *pos < c.len() && (c[*pos] == '+' || c[*pos] == '-') {
            if c[*pos] == '-' {
                sign = -sign;
            }
            *pos += 1;
        } else if !first {
            break;
        }
        first = false;
        skip_ws(c, pos);
        let coef = parse_rational(c, pos)?.unwrap_or_else(Q::one);
        skip_ws(c, pos);
        if *pos < c.len() && c[*pos] == '*' {
            *pos += 1;
            skip_ws(c, pos);
        }
        let factor = &sign * &coef;
        if *pos < c.len() && c[*pos] == '(' {
            *pos += 1;
            let inner = parse_sum(c, pos)?;
            skip_ws(c, pos);
            if *pos >= c.len() || c[*pos] != ')' {
                return Err(Error::Parse { offset: *pos, message: "missing ')'".into() });
            }
            *pos += 1;
            out.extend(inner.into_iter().map(|(s, v)| (s, v * &factor)));
        } else if *pos < c.len() && c[*pos].is_ascii_alphabetic() {
            let start = *pos;
            *pos += 1;
            while *pos < c.len() && (c[*pos].is_ascii_alphanumeric() || c[*pos] == '_') {
                *pos += 1;
            }
            if *pos < c.len() && c[*pos] == '[' {
                while *pos < c.len() && c[*pos] != ']' {
                    *pos += 1;
                }
                *pos += 1;
            }
            out.push((c[start..*pos].iter().collect(), factor));
        } else {
            return Err(Error::Parse { offset: *pos, message: "expected a symbol".into() });
        }
    }
    Ok(out)
}

fn parse_rational(c: &[char], pos: &mut usize) -> Result<Option<Q>> {
    let start = *pos;
    while *pos < c.len() && c[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Ok(None);
    }
    let num: BigInt = c[start..*pos].iter().collect::<String>().parse().expect("digits");
    if *pos < c.len() && c[*pos] == '/' {
        *pos += 1;
        let s2 = *pos;
        while *pos < c.len() && c[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == s2 {
            return Err(Error::Parse { offset: *pos, message: "missing denominator".into() });
        }
        let den: BigInt = c[s2..*pos].iter().collect::<String>().parse().expect("digits");
        if den.is_zero() {
            return Err(Error::Parse { offset: *pos, message: "zero denominator".into() });
        }
        return Ok(Some(Q::new(num, den)));
    }
    Ok(Some(Q::from_integer(num)))
}
