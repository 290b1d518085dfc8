//! PI exponent from admissible block tuples, and bounds for the proper
//! central exponent from explicit central polynomials.
//!
//! A tuple of distinct simple blocks `(B_1, ..., B_k)` is admissible when
//! `B_1 J B_2 J ... J B_k ≠ 0`; the exponent of `G(B)` is the largest total
//! dimension of an admissible tuple. Single blocks always count.

use crate::algebra::{verify_wedderburn, SuperAlgebra, WedderburnData};
use crate::codim::{check_expr, check_tree, evaluation_catalog, CodimConfig, Target, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{is_zero, RatSpace, Q};
use crate::poly::Expr;

/// Catalog evaluation lists larger than this are abandoned.
pub const CATALOG_CAP: usize = 20_000;

/// An evaluation certifying a lower bound for the proper central exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaWitness {
    pub polynomial: String,
    /// Element substituted for each variable, in variable order.
    pub assignment: Vec<String>,
    pub value: String,
    pub blocks: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct AdmissibleResult {
    pub max_admissible_dim: usize,
    /// Ordered block indices of an optimal admissible tuple.
    pub best_subset: Vec<usize>,
    /// Block elements `b_1, ..., b_k` of the realizing product.
    pub block_elements: Vec<Vec<Q>>,
    /// Radical elements `j_1, ..., j_{k-1}` with `b_1 j_1 b_2 ... j_{k-1} b_k ≠ 0`.
    pub radical_path: Vec<Vec<Q>>,
    pub path_product: Vec<Q>,
    pub delta_lower: usize,
    pub delta_upper: usize,
    pub delta_witness: Option<DeltaWitness>,
}

impl AdmissibleResult {
    pub fn delta_certified(&self) -> bool {
        self.delta_lower == self.delta_upper
    }

    /// Interleaves block elements and radical elements in product order.
    pub fn path_factors(&self) -> Vec<Vec<Q>> {
        let mut out = Vec::new();
        for (i, b) in self.block_elements.iter().enumerate() {
            if i > 0 {
                out.push(self.radical_path[i - 1].clone());
            }
            out.push(b.clone());
        }
        out
    }
}

fn wedderburn(b: &SuperAlgebra) -> Result<&WedderburnData> {
    let w = b.wedderburn().ok_or_else(|| Error::Wedderburn(format!("{} has no Wedderburn data", b.name())))?;
    let rep = verify_wedderburn(b, w);
    if let Some(f) = rep.failure {
        return Err(Error::Wedderburn(f));
    }
    Ok(w)
}

fn block_space(b: &SuperAlgebra, w: &WedderburnData, i: usize) -> RatSpace {
    RatSpace::spanned_by(b.dim(), w.blocks[i].basis.iter())
}

/// `B_{t_1} J B_{t_2} ... J B_{t_k}` as a subspace.
fn chain_space(b: &SuperAlgebra, blocks: &[RatSpace], j: &RatSpace, tuple: &[usize]) -> RatSpace {
    let mut s = blocks[tuple[0]].clone();
    for &t in &tuple[1..] {
        if s.dim() == 0 {
            break;
        }
        s = b.span_product(&s, j);
        s = b.span_product(&s, &blocks[t]);
    }
    s
}

/// Ordered tuples of distinct indices from `0..m`, all lengths.
fn ordered_tuples(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for i in 0..m {
            if !cur.contains(&i) {
                cur.push(i);
                rec(m, cur, out);
                cur.pop();
            }
        }
    }
    rec(m, &mut cur, &mut out);
    out
}

/// Whether `B_{t_1} J ... J B_{t_k} ≠ 0`.
pub fn is_admissible(b: &SuperAlgebra, tuple: &[usize]) -> Result<bool> {
    let w = wedderburn(b)?;
    if tuple.is_empty() || tuple.iter().any(|&t| t >= w.blocks.len()) {
        return Err(Error::Definition("block index out of range".into()));
    }
    let blocks: Vec<RatSpace> = (0..w.blocks.len()).map(|i| block_space(b, w, i)).collect();
    let j = RatSpace::spanned_by(b.dim(), w.radical.iter());
    Ok(chain_space(b, &blocks, &j, tuple).dim() > 0)
}

/// Picks basis elements `x_1, ..., x_m` from the factor spaces so that their
/// product is nonzero, given that the product of the spaces is nonzero.
pub(crate) fn extract_path(b: &SuperAlgebra, factors: &[RatSpace]) -> Option<Vec<Vec<Q>>> {
    let m = factors.len();
    // suffix[h] = factors[h] * ... * factors[m-1]
    let mut suffix: Vec<RatSpace> = vec![RatSpace::new(b.dim()); m + 1];
    for h in (0..m).rev() {
        suffix[h] = if h == m - 1 { factors[h].clone() } else { b.span_product(&factors[h], &suffix[h + 1]) };
    }
    if suffix[0].dim() == 0 {
        return None;
    }
    let mut prefix: Option<Vec<Q>> = None;
    let mut chosen = Vec::new();
    for h in 0..m {
        let pick = factors[h].basis().iter().find(|x| {
            let p = match &prefix {
                None => (*x).clone(),
                Some(pv) => b.mul(pv, x),
            };
            if is_zero(&p) {
                return false;
            }
            if h + 1 == m {
                return true;
            }
            suffix[h + 1].basis().iter().any(|s| !is_zero(&b.mul(&p, s)))
        })?;
        prefix = Some(match &prefix {
            None => pick.clone(),
            Some(pv) => b.mul(pv, pick),
        });
        chosen.push(pick.clone());
    }
    Some(chosen)
}

/// The exponent part of [`AdmissibleResult`]; delta fields are zero.
pub fn pi_exponent(b: &SuperAlgebra) -> Result<AdmissibleResult> {
    let w = wedderburn(b)?;
    let m = w.blocks.len();
    if m == 0 {
        return Err(Error::Wedderburn("no simple blocks".into()));
    }
    let blocks: Vec<RatSpace> = (0..m).map(|i| block_space(b, w, i)).collect();
    let j = RatSpace::spanned_by(b.dim(), w.radical.iter());
    let mut best: Option<(usize, Vec<usize>)> = None;
    for t in ordered_tuples(m) {
        let dim: usize = t.iter().map(|&i| w.blocks[i].dim()).sum();
        if best.as_ref().is_some_and(|(d, _)| *d >= dim) {
            continue;
        }
        if t.len() == 1 || chain_space(b, &blocks, &j, &t).dim() > 0 {
            best = Some((dim, t));
        }
    }
    let (dim, tuple) = best.expect("single blocks are admissible");
    let mut factors = Vec::new();
    for (i, &t) in tuple.iter().enumerate() {
        if i > 0 {
            factors.push(j.clone());
        }
        factors.push(blocks[t].clone());
    }
    let path = extract_path(b, &factors).ok_or_else(|| Error::Wedderburn("admissible tuple without realizing path".into()))?;
    let refs: Vec<&Vec<Q>> = path.iter().collect();
    let product = b.mul_all(&refs);
    let block_elements = path.iter().step_by(2).cloned().collect();
    let radical_path = path.iter().skip(1).step_by(2).cloned().collect();
    Ok(AdmissibleResult {
        max_admissible_dim: dim,
        best_subset: tuple,
        block_elements,
        radical_path,
        path_product: product,
        delta_lower: 0,
        delta_upper: dim,
        delta_witness: None,
    })
}

/// Compositions of `total` into parts 2 and 3.
fn compositions(total: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for part in [2, 3] {
        if part <= total {
            for mut rest in compositions(total - part) {
                rest.insert(0, part);
                out.push(rest);
            }
        }
    }
    out
}

fn commutator_product(parts: &[usize]) -> String {
    let mut v = 1;
    let mut s = String::new();
    for &p in parts {
        let vars: Vec<String> = (v..v + p).map(|i| format!("x{i}")).collect();
        s.push_str(&format!("[{}]", vars.join(",")));
        v += p;
    }
    s
}

/// `x1`, products of long commutators of lengths 2 and 3, and those products
/// bracketed with one extra variable, all of degree at most `degree_cap`.
pub fn default_witness_library(degree_cap: usize) -> Vec<String> {
    let mut out = vec!["x1".to_string()];
    for deg in 2..=degree_cap {
        for c in compositions(deg) {
            out.push(commutator_product(&c));
        }
    }
    for deg in 2..degree_cap {
        for c in compositions(deg) {
            out.push(format!("[{},x{}]", commutator_product(&c), deg + 1));
        }
    }
    out
}

/// Lower bound for the proper central exponent of `target` from witnesses,
/// upper bound from the admissible maximum of its base algebra.
///
/// Product/commutator trees are scanned over all block substitutions; other
/// polynomials contribute the blocks met by the single evaluation found.
pub fn delta_exponent_bounds(target: &Target, witnesses: &[String], degree_cap: usize) -> Result<AdmissibleResult> {
    let b = target.algebra();
    let mut res = pi_exponent(b)?;
    let w = wedderburn(b)?;
    let block_dims: Vec<usize> = w.blocks.iter().map(|x| x.dim()).collect();
    let spaces: Vec<RatSpace> = (0..w.blocks.len()).map(|i| block_space(b, w, i)).collect();
    let radical = RatSpace::spanned_by(b.dim(), w.radical.iter());
    let mut all: Vec<String> = default_witness_library(degree_cap);
    all.extend(witnesses.iter().cloned());
    let basis = target.substitution_basis();
    for s in &all {
        let e = Expr::parse(s)?;
        let Some(tree) = e.as_tree() else {
            let check = check_expr(target, &e, &CodimConfig::default())?;
            let Some(wit) = check.witness.filter(|_| check.verdict == Verdict::ProperCentral) else { continue };
            let mut chosen = Vec::new();
            let mut attributable = !wit.vectors.is_empty();
            for v in &wit.vectors {
                match spaces.iter().position(|sp| sp.contains(v)) {
                    Some(i) if !chosen.contains(&i) => chosen.push(i),
                    Some(_) => {}
                    None => attributable &= radical.contains(v),
                }
            }
            chosen.sort();
            let dim: usize = chosen.iter().map(|&i| block_dims[i]).sum();
            if attributable && dim > res.delta_lower {
                res.delta_lower = dim;
                res.delta_witness = Some(DeltaWitness {
                    polynomial: s.clone(),
                    assignment: wit.elements.clone(),
                    value: wit.value_text.clone(),
                    blocks: chosen,
                });
            }
            if res.delta_lower == res.delta_upper {
                break;
            }
            continue;
        };
        if tree.degree() > degree_cap && !witnesses.contains(s) {
            continue;
        }
        if check_tree(target, &tree, 0).verdict != Verdict::ProperCentral {
            continue;
        }
        let Some(entries) = evaluation_catalog(target, &tree, CATALOG_CAP) else {
            continue;
        };
        for entry in entries {
            let chosen: Vec<usize> = (0..block_dims.len()).filter(|&i| entry.blocks >> i & 1 == 1).collect();
            let dim: usize = chosen.iter().map(|&i| block_dims[i]).sum();
            if dim > res.delta_lower {
                let mut asg = entry.assignment.clone();
                asg.sort();
                res.delta_lower = dim;
                res.delta_witness = Some(DeltaWitness {
                    polynomial: s.clone(),
                    assignment: asg.iter().map(|&(_, i)| basis[i].label.clone()).collect(),
                    value: b.format(&entry.value),
                    blocks: chosen,
                });
            }
        }
        if res.delta_lower == res.delta_upper {
            break;
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{BlockKind, SimpleBlock};
    use crate::definition::build_presentation;
    use crate::linalg::unit_vec;

    fn with_blocks(a: SuperAlgebra, blocks: Vec<(BlockKind, Vec<Vec<Q>>)>, radical: Vec<Vec<Q>>) -> SuperAlgebra {
        let w = WedderburnData { blocks: blocks.into_iter().map(|(kind, basis)| SimpleBlock { kind, basis }).collect(), radical };
        a.with_wedderburn(w)
    }

    fn ut(n: usize, constraints: &[&str]) -> SuperAlgebra {
        let c: Vec<String> = constraints.iter().map(|s| s.to_string()).collect();
        build_presentation("UT", &vec![1; n], &vec![0; n], &c).unwrap()
    }

    fn coords(a: &SuperAlgebra, s: &str) -> Vec<Q> {
        a.parse_element(s).unwrap()
    }

    fn ut2() -> SuperAlgebra {
        let a = ut(2, &[]);
        let b1 = coords(&a, "e11");
        let b2 = coords(&a, "e22");
        let r = coords(&a, "e12");
        with_blocks(a, vec![(BlockKind::F, vec![b1]), (BlockKind::F, vec![b2])], vec![r])
    }

    #[test]
    fn ut2_exponent_two() {
        let a = ut2();
        let r = pi_exponent(&a).unwrap();
        assert_eq!(r.max_admissible_dim, 2);
        assert!(!is_zero(&r.path_product));
        assert!(is_admissible(&a, &[0, 1]).unwrap());
        assert!(!is_admissible(&a, &[1, 0]).unwrap());
        let d = delta_exponent_bounds(&Target::plain(a), &[], 6).unwrap();
        assert_eq!(d.delta_lower, 0);
        assert_eq!(d.delta_upper, 2);
    }

    #[test]
    fn field_is_one() {
        let a = SuperAlgebra::from_table("F", vec!["1".into()], vec![0], vec![vec![vec![(0, Q::from_integer(1.into()))]]]).unwrap();
        let a = with_blocks(a, vec![(BlockKind::F, vec![unit_vec(1, 0)])], vec![]);
        let r = delta_exponent_bounds(&Target::plain(a), &[], 4).unwrap();
        assert_eq!((r.max_admissible_dim, r.delta_lower), (1, 1));
        assert!(r.delta_certified());
    }

    #[test]
    fn d_has_two_dimensional_witness() {
        let a = ut(3, &["a11=a33"]);
        let outer = coords(&a, "e11+e33");
        let mid = coords(&a, "e22");
        let rad = vec![coords(&a, "e12"), coords(&a, "e23"), coords(&a, "e13")];
        let a = with_blocks(a, vec![(BlockKind::F, vec![outer]), (BlockKind::F, vec![mid])], rad);
        let r = delta_exponent_bounds(&Target::plain(a), &["[x1,x2][x3,x4]".into()], 4).unwrap();
        assert_eq!(r.max_admissible_dim, 2);
        assert!(r.delta_lower >= 2);
    }

    #[test]
    fn library_shapes() {
        let lib = default_witness_library(7);
        for s in ["[x1,x2][x3,x4][x5,x6]", "[x1,x2][x3,x4][x5,x6,x7]", "[x1,x2,x3][x4,x5][x6,x7]", "[[x1,x2,x3][x4,x5,x6],x7]", "[x1,x2,x3][x4,x5,x6]"] {
            assert!(lib.contains(&s.to_string()), "{s}");
        }
        assert!(lib.iter().all(|s| Expr::parse(s).unwrap().as_tree().is_some()));
    }

    #[test]
    fn tuples_cover_orderings() {
        assert_eq!(ordered_tuples(3).len(), 3 + 6 + 6);
    }
}
