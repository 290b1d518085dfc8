//! Truncated Grassmann algebras, truncated envelope models and the sign rule.
//!
//! Substituting `x_i -> g_i ⊗ b_i` with `g_i` a fresh generator for odd `b_i`
//! (and `1` for even ones) turns a monomial `x_σ(1)…x_σ(n)` into
//! `±g ⊗ b_σ(1)…b_σ(n)`, the sign being the parity of the inversions of `σ`
//! among odd variables.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::algebra::{Product, SuperAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{zero_vec, Q};
use crate::poly::MultilinearPoly;

/// `Λ(e_1, …, e_k)` on subset monomials encoded as bitmasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrassmannTruncated {
    k: usize,
}

impl GrassmannTruncated {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > 24 {
            return Err(Error::ResourceCap(format!("Grassmann truncation {k} outside 1..=24")));
        }
        Ok(GrassmannTruncated { k })
    }

    pub fn generators(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn parity(mask: u32) -> u8 {
        (mask.count_ones() & 1) as u8
    }

    /// `e_S e_T = sign · e_{S∪T}`, or `None` when `S` and `T` meet.
    pub fn monomial_product(s: u32, t: u32) -> Option<(bool, u32)> {
        if s & t != 0 {
            return None;
        }
        // moving each generator of T leftwards past the larger ones of S
        let mut swaps = 0u32;
        let mut rest = t;
        while rest != 0 {
            let i = rest.trailing_zeros();
            swaps += (s >> (i + 1)).count_ones();
            rest &= rest - 1;
        }
        Some((swaps & 1 == 1, s | t))
    }

    pub fn label(mask: u32) -> String {
        if mask == 0 {
            return "1".into();
        }
        (0..32).filter(|i| mask >> i & 1 == 1).map(|i| format!("e{}", i + 1)).collect()
    }

    pub fn multiply(&self, u: &[Q], v: &[Q]) -> Vec<Q> {
        let mut out = zero_vec(self.dim());
        for (s, a) in u.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (t, b) in v.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                if let Some((neg, m)) = Self::monomial_product(s as u32, t as u32) {
                    let c = a * b;
                    if neg {
                        out[m as usize] -= c;
                    } else {
                        out[m as usize] += c;
                    }
                }
            }
        }
        out
    }

    /// The Grassmann algebra itself as a superalgebra on `2^k` monomials.
    pub fn as_superalgebra(&self) -> SuperAlgebra {
        let d = self.dim();
        let labels = (0..d as u32).map(Self::label).collect();
        let parity = (0..d as u32).map(Self::parity).collect();
        let table = (0..d as u32)
            .map(|s| {
                (0..d as u32)
                    .map(|t| match Self::monomial_product(s, t) {
                        Some((neg, m)) => vec![(m as usize, if neg { -Q::one() } else { Q::one() })],
                        None => Vec::new(),
                    })
                    .collect()
            })
            .collect();
        let mut unit = zero_vec(d);
        unit[0] = Q::one();
        SuperAlgebra::from_table_trusted(&format!("G_{}", self.k), labels, parity, table, Some(unit))
    }
}

pub fn build_truncated_grassmann(k: usize) -> Result<GrassmannTruncated> {
    GrassmannTruncated::new(k)
}

/// `(G_k^(0) ⊗ B^(0)) ⊕ (G_k^(1) ⊗ B^(1))` as a trivially graded algebra.
#[derive(Clone, Debug)]
pub struct EnvelopeModel {
    pub algebra: SuperAlgebra,
    /// `(mask, base index)` of every basis element.
    pub factors: Vec<(u32, usize)>,
    pub truncation: usize,
    index: HashMap<(u32, usize), usize>,
    base_dim: usize,
}

impl EnvelopeModel {
    pub fn index_of(&self, mask: u32, b: usize) -> Option<usize> {
        self.index.get(&(mask, b)).copied()
    }

    /// Coordinates of `e_S ⊗ v`; `v` must have parity `|S| mod 2`.
    pub fn embed(&self, mask: u32, v: &[Q]) -> Result<Vec<Q>> {
        let mut out = zero_vec(self.algebra.dim());
        for (b, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let i = self.index_of(mask, b).ok_or(Error::ParityMismatch { index: b })?;
            out[i] = c.clone();
        }
        Ok(out)
    }

    /// The `B`-coefficient of `e_S` in a model element.
    pub fn extract(&self, mask: u32, w: &[Q]) -> Vec<Q> {
        let mut out = zero_vec(self.base_dim);
        for (i, c) in w.iter().enumerate() {
            let (m, b) = self.factors[i];
            if m == mask {
                out[b] = c.clone();
            }
        }
        out
    }
}

pub fn build_envelope_model(base: &SuperAlgebra, k: usize) -> Result<EnvelopeModel> {
    let g = GrassmannTruncated::new(k)?;
    let d = base.dim();
    let mut factors = Vec::new();
    for mask in 0..g.dim() as u32 {
        for b in 0..d {
            if GrassmannTruncated::parity(mask) == base.parity(b) {
                factors.push((mask, b));
            }
        }
    }
    let index: HashMap<(u32, usize), usize> = factors.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let m = factors.len();
    let mut table: Vec<Vec<Product>> = vec![vec![Vec::new(); m]; m];
    for (i, &(s, a)) in factors.iter().enumerate() {
        for (j, &(t, b)) in factors.iter().enumerate() {
            let Some((neg, u)) = GrassmannTruncated::monomial_product(s, t) else { continue };
            let p = base.basis_product(a, b);
            table[i][j] = p
                .iter()
                .map(|(c, x)| (index[&(u, *c)], if neg { -x.clone() } else { x.clone() }))
                .collect();
        }
    }
    let labels = factors
        .iter()
        .map(|&(s, b)| format!("{}⊗{}", GrassmannTruncated::label(s), base.labels()[b]))
        .collect();
    let unit = base.unit().map(|u| {
        let mut w = zero_vec(m);
        for (b, c) in u.iter().enumerate() {
            if !c.is_zero() {
                w[index[&(0, b)]] = c.clone();
            }
        }
        w
    });
    let algebra =
        SuperAlgebra::from_table_trusted(&format!("G_{k}({})", base.name()), labels, vec![0; m], table, unit);
    Ok(EnvelopeModel { algebra, factors, truncation: k, index, base_dim: d })
}

/// How degree-`n` computations in `G(B)` are carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeMode {
    SignRule,
    TruncatedModel,
}

#[derive(Clone, Debug)]
pub struct EnvelopeContext {
    pub base: SuperAlgebra,
    pub truncation: usize,
    pub mode: EnvelopeMode,
}

impl EnvelopeContext {
    pub fn new(base: SuperAlgebra, truncation: usize) -> Self {
        EnvelopeContext { base, truncation, mode: EnvelopeMode::SignRule }
    }

    pub fn with_mode(mut self, mode: EnvelopeMode) -> Self {
        self.mode = mode;
        self
    }

    /// Fails unless the truncation covers degree `n`.
    pub fn require(&self, n: usize) -> Result<()> {
        if self.truncation < n {
            return Err(Error::ResourceCap(format!("truncation {} below degree {n}", self.truncation)));
        }
        Ok(())
    }
}

/// Inversions of `word` among the variables flagged odd.
pub fn inv_odd(word: &[u32], parities: &[u8]) -> usize {
    let odd: Vec<u32> = word.iter().copied().filter(|&v| parities[(v - 1) as usize] == 1).collect();
    let mut inv = 0;
    for i in 0..odd.len() {
        for j in i + 1..odd.len() {
            if odd[i] > odd[j] {
                inv += 1;
            }
        }
    }
    inv
}

/// `Σ_σ c_σ (−1)^{inv_odd(σ,p)} b_σ(1)…b_σ(n)`.
pub fn sign_rule_evaluate(ctx: &EnvelopeContext, f: &MultilinearPoly, parities: &[u8], elements: &[Vec<Q>]) -> Result<Vec<Q>> {
    let n = f.degree();
    if parities.len() != n || elements.len() != n {
        return Err(Error::DegreeMismatch { poly: n, args: elements.len().min(parities.len()) });
    }
    ctx.require(n)?;
    let b = &ctx.base;
    for (i, (e, &p)) in elements.iter().zip(parities).enumerate() {
        if e.len() != b.dim() {
            return Err(Error::DimensionMismatch { expected: b.dim(), got: e.len() });
        }
        match b.homogeneous_parity(e)? {
            Some(q) if q != p => return Err(Error::ParityMismatch { index: i }),
            _ => {}
        }
    }
    let mut out = zero_vec(b.dim());
    for (w, c) in f.terms() {
        let factors: Vec<&Vec<Q>> = w.iter().map(|&v| &elements[(v - 1) as usize]).collect();
        let val = b.mul_all(&factors);
        let c = if inv_odd(w, parities) % 2 == 1 { -c.clone() } else { c.clone() };
        for (o, x) in out.iter_mut().zip(val) {
            if !x.is_zero() {
                *o += &c * x;
            }
        }
    }
    Ok(out)
}

/// Whether `g ⊗ value` is central in `G(B)` for a Grassmann monomial `g` of
/// parity `value_parity`.
///
/// A value outside `B^(value_parity)` cannot carry that Grassmann factor in the
/// envelope, so it is reported as not central.
pub fn envelope_center_test(ctx: &EnvelopeContext, value_parity: u8, value: &[Q]) -> Result<bool> {
    let b = &ctx.base;
    if value.len() != b.dim() {
        return Err(Error::DimensionMismatch { expected: b.dim(), got: value.len() });
    }
    match b.homogeneous_parity(value)? {
        None => Ok(true),
        Some(p) if p != value_parity => Ok(false),
        Some(_) => Ok(b.super_commutes(value_parity, value)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::{build_presentation, build_ut_block_algebra};
    use crate::linalg::{is_zero, q, unit_vec};
    use proptest::prelude::*;

    fn m11() -> SuperAlgebra {
        build_ut_block_algebra(&[2], &[0, 1]).unwrap()
    }

    #[test]
    fn anticommuting_generators() {
        let g = GrassmannTruncated::new(2).unwrap();
        assert_eq!(g.dim(), 4);
        let e1 = unit_vec(4, 1);
        let e2 = unit_vec(4, 2);
        let a = g.multiply(&e1, &e2);
        let b = g.multiply(&e2, &e1);
        assert_eq!(a, b.iter().map(|x| -x).collect::<Vec<_>>());
        assert!(is_zero(&g.multiply(&e1, &e1)));
        assert_eq!(a[3], q(1));
    }

    #[test]
    fn single_generator() {
        let g = GrassmannTruncated::new(1).unwrap().as_superalgebra();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.basis_of_parity(1), vec![1]);
        assert!(is_zero(&g.mul(&g.basis(1), &g.basis(1))));
    }

    #[test]
    fn shared_generator_kills_product() {
        assert_eq!(GrassmannTruncated::monomial_product(0b011, 0b110), None);
    }

    #[test]
    fn model_dimensions() {
        let b = m11();
        assert_eq!(build_envelope_model(&b, 3).unwrap().algebra.dim(), 16);
        let fcf = build_presentation("FcF", &[2], &[0, 1], &["a11=a22".into(), "a12=a21".into()]).unwrap();
        assert_eq!(build_envelope_model(&fcf, 2).unwrap().algebra.dim(), 4);
        // direct enumeration of matching pairs
        for k in 1..5 {
            let m = build_envelope_model(&b, k).unwrap();
            let count = (0..1u32 << k)
                .flat_map(|s| (0..b.dim()).map(move |i| (s, i)))
                .filter(|&(s, i)| GrassmannTruncated::parity(s) == b.parity(i))
                .count();
            assert_eq!(m.algebra.dim(), count);
        }
    }

    #[test]
    fn grassmann_model_is_associative() {
        let g = GrassmannTruncated::new(3).unwrap().as_superalgebra();
        let rebuilt =
            SuperAlgebra::from_table("G3", g.labels().to_vec(), g.parities().to_vec(), g.table().to_vec()).unwrap();
        assert_eq!(rebuilt.unit(), g.unit());
    }

    #[test]
    fn commutator_of_odd_pair_doubles() {
        let b = m11();
        let ctx = EnvelopeContext::new(b.clone(), 2);
        let f = MultilinearPoly::parse("[x1,x2]").unwrap();
        let odd = b.basis(b.labels().iter().position(|l| l == "e12").unwrap());
        let v = sign_rule_evaluate(&ctx, &f, &[1, 1], &[odd.clone(), odd.clone()]).unwrap();
        let sq = b.mul(&odd, &odd);
        assert_eq!(v, sq.iter().map(|x| x * q(2)).collect::<Vec<_>>());
        let m = build_envelope_model(&b, 2).unwrap();
        let x1 = m.embed(0b01, &odd).unwrap();
        let x2 = m.embed(0b10, &odd).unwrap();
        let w = crate::linalg::sub(&m.algebra.mul(&x1, &x2), &m.algebra.mul(&x2, &x1));
        assert_eq!(m.extract(0b11, &w), v);
    }

    #[test]
    fn even_substitutions_carry_no_signs() {
        let b = m11();
        let ctx = EnvelopeContext::new(b.clone(), 3);
        let f = MultilinearPoly::parse("x1x2x3 - 2x3x1x2").unwrap();
        let e = |s: &str| b.basis(b.labels().iter().position(|l| l == s).unwrap());
        let els = vec![e("e11"), e("e11"), e("e22")];
        let v = sign_rule_evaluate(&ctx, &f, &[0, 0, 0], &els).unwrap();
        let plain = crate::linalg::sub(
            &b.mul_all(&[&els[0], &els[1], &els[2]]),
            &crate::linalg::scale(&b.mul_all(&[&els[2], &els[0], &els[1]]), &q(2)),
        );
        assert_eq!(v, plain);
    }

    #[test]
    fn parity_mismatch_is_rejected() {
        let b = m11();
        let ctx = EnvelopeContext::new(b.clone(), 2);
        let f = MultilinearPoly::parse("x1x2").unwrap();
        let odd = b.basis(b.basis_of_parity(1)[0]);
        assert!(sign_rule_evaluate(&ctx, &f, &[0, 0], &[odd.clone(), odd]).is_err());
        assert!(sign_rule_evaluate(&EnvelopeContext::new(b.clone(), 1), &f, &[0, 0], &[b.basis(0), b.basis(0)]).is_err());
    }

    #[test]
    fn unit_is_envelope_central() {
        let b = m11();
        let ctx = EnvelopeContext::new(b.clone(), 2);
        assert!(envelope_center_test(&ctx, 0, b.unit().unwrap()).unwrap());
        assert!(!envelope_center_test(&ctx, 0, &b.basis(0)).unwrap());
        let mixed = crate::linalg::add(&b.basis(0), &b.basis(b.basis_of_parity(1)[0]));
        assert!(envelope_center_test(&ctx, 0, &mixed).is_err());
    }

    /// Model-side check: `g ⊗ v` against `1 ⊗ b` and `e_fresh ⊗ b`.
    fn model_central(b: &SuperAlgebra, q_: u8, v: &[Q]) -> bool {
        let m = build_envelope_model(b, 3).unwrap();
        let g = if q_ == 1 { 0b001 } else { 0b011 };
        let Ok(x) = m.embed(g, v) else { return false };
        (0..b.dim()).all(|i| {
            let mask = if b.parity(i) == 1 { 0b100 } else { 0 };
            let y = m.embed(mask, &b.basis(i)).unwrap();
            m.algebra.mul(&x, &y) == m.algebra.mul(&y, &x)
        })
    }

    #[test]
    fn center_test_matches_model() {
        let b = m11();
        let ctx = EnvelopeContext::new(b.clone(), 3);
        for i in 0..b.dim() {
            let v = b.basis(i);
            let p = b.parity(i);
            assert_eq!(envelope_center_test(&ctx, p, &v).unwrap(), model_central(&b, p, &v), "{}", b.labels()[i]);
        }
        let u = b.unit().unwrap().clone();
        assert!(model_central(&b, 0, &u));
    }

    proptest! {
        #[test]
        fn monomial_product_matches_wedge_sign(s in 0u32..64, t in 0u32..64) {
            // oracle: sort the concatenated generator list by adjacent swaps
            let r = GrassmannTruncated::monomial_product(s, t);
            if s & t != 0 {
                prop_assert!(r.is_none());
            } else {
                let mut seq: Vec<u32> = (0..6).filter(|i| s >> i & 1 == 1).collect();
                seq.extend((0..6).filter(|i| t >> i & 1 == 1));
                let mut swaps = 0;
                for i in 0..seq.len() {
                    for j in 0..seq.len() - 1 - i {
                        if seq[j] > seq[j + 1] {
                            seq.swap(j, j + 1);
                            swaps += 1;
                        }
                    }
                }
                prop_assert_eq!(r, Some((swaps % 2 == 1, s | t)));
            }
        }

        #[test]
        fn inv_odd_ignores_even_variables(w in Just((1..=6u32).collect::<Vec<u32>>()).prop_shuffle()) {
            let all_even = [0u8; 6];
            prop_assert_eq!(inv_odd(&w, &all_even), 0);
            let all_odd = [1u8; 6];
            let inv = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).filter(|&(i, j)| w[i] > w[j]).count();
            prop_assert_eq!(inv_odd(&w, &all_odd), inv);
        }
    }
}
