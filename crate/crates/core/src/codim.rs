//! Multilinear codimensions and evaluation tests.
//!
//! A [`Target`] is either an algebra `A` or its Grassmann envelope `G(A)`.
//! Identities of the envelope are read off `A` through the sign rule: the
//! monomial `x_w` evaluated on `g_i ⊗ a_i` picks up `(-1)^{inv_odd(w)}`.
//!
//! Codimensions are column ranks. For every substitution the values of all
//! `n!` monomials form a vector in `A ⊗ Q^{n!}`; each coordinate of `A` gives
//! a column, and the multilinear identities are exactly the polynomials
//! orthogonal to every column. Projecting values onto a complement of the
//! center gives the central polynomials the same way.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::SuperAlgebra;
use crate::error::{Error, Result};
use crate::field::{Lazy, PrimeField};
use crate::linalg::{dot_u64, is_zero, nullspace, to_mod, to_primitive, unit_vec, zero_vec, ModEchelon, RatSpace, Q};
use crate::poly::{factorial, multilinearize, Expr, MultilinearPoly, Tree};

/// An algebra, or the Grassmann envelope of a superalgebra.
#[derive(Clone, Debug)]
pub struct Target {
    algebra: SuperAlgebra,
    envelope: bool,
}

/// Basis element used in substitutions, tagged with the Wedderburn blocks it
/// belongs to (empty mask for the radical).
#[derive(Clone, Debug)]
pub struct SubstitutionElement {
    pub vector: Vec<Q>,
    pub parity: u8,
    pub blocks: u32,
    pub label: String,
}

impl Target {
    pub fn plain(algebra: SuperAlgebra) -> Self {
        Target { algebra, envelope: false }
    }

    pub fn envelope(algebra: SuperAlgebra) -> Self {
        Target { algebra, envelope: true }
    }

    pub fn new(algebra: SuperAlgebra, envelope: bool) -> Self {
        Target { algebra, envelope }
    }

    pub fn algebra(&self) -> &SuperAlgebra {
        &self.algebra
    }

    pub fn is_envelope(&self) -> bool {
        self.envelope
    }

    /// Whether evaluation needs the sign rule.
    pub fn signed(&self) -> bool {
        self.envelope && !self.algebra.is_trivially_graded()
    }

    pub fn name(&self) -> String {
        if self.envelope {
            format!("G({})", self.algebra.name())
        } else {
            self.algebra.name().to_string()
        }
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Parity of basis element `i` as seen by evaluation.
    pub fn parity(&self, i: usize) -> u8 {
        if self.signed() {
            self.algebra.parity(i)
        } else {
            0
        }
    }

    /// `[Z_0, Z_1]`: values of parity `q` are central iff they lie in `Z_q`.
    pub fn centers(&self) -> [RatSpace; 2] {
        let d = self.dim();
        if self.signed() {
            [
                RatSpace::spanned_by(d, self.algebra.super_center(0).iter()),
                RatSpace::spanned_by(d, self.algebra.super_center(1).iter()),
            ]
        } else {
            [RatSpace::spanned_by(d, self.algebra.center().iter()), RatSpace::new(d)]
        }
    }

    /// Homogeneous basis adapted to the Wedderburn decomposition when one is
    /// attached, otherwise the structure basis.
    pub fn substitution_basis(&self) -> Vec<SubstitutionElement> {
        let a = &self.algebra;
        let d = a.dim();
        if let Some(w) = a.wedderburn() {
            let mut out = Vec::new();
            let mut ok = true;
            for (bi, block) in w.blocks.iter().enumerate() {
                for v in &block.basis {
                    match a.homogeneous_parity(v) {
                        Ok(Some(p)) => out.push(self.element(v.clone(), p, 1 << bi)),
                        _ => ok = false,
                    }
                }
            }
            for v in &w.radical {
                match a.homogeneous_parity(v) {
                    Ok(Some(p)) => out.push(self.element(v.clone(), p, 0)),
                    _ => ok = false,
                }
            }
            if ok && out.len() == d {
                return out;
            }
        }
        (0..d).map(|i| self.element(unit_vec(d, i), a.parity(i), 0)).collect()
    }

    fn element(&self, vector: Vec<Q>, parity: u8, blocks: u32) -> SubstitutionElement {
        let label = self.algebra.format(&vector);
        SubstitutionElement { vector, parity: if self.signed() { parity } else { 0 }, blocks, label }
    }

    /// Parity vectors admitting a nonzero homogeneous substitution.
    fn parity_vectors(&self, n: usize) -> Vec<u32> {
        if !self.signed() {
            return vec![0];
        }
        let has = [!self.algebra.basis_of_parity(0).is_empty(), !self.algebra.basis_of_parity(1).is_empty()];
        (0..1u32 << n)
            .filter(|m| (0..n).all(|i| has[((m >> i) & 1) as usize]))
            .collect()
    }
}

/// Exact projection onto a complement of a subspace, with integer arithmetic.
///
/// `apply(v) = den·v - Σ v[piv_k]·rows_k` where `rows_k / den` is the reduced
/// echelon basis; the result vanishes iff `v` lies in the subspace.
#[derive(Clone, Debug)]
struct Projector {
    pivots: Vec<usize>,
    rows: Vec<Vec<i128>>,
    den: i128,
    basis: Vec<Vec<Q>>,
}

impl Projector {
    fn new(space: &RatSpace) -> Self {
        let mut l = BigInt::one();
        for row in space.basis() {
            for x in row {
                l = l.lcm(x.denom());
            }
        }
        let lq = Q::from_integer(l.clone());
        let rows = space
            .basis()
            .iter()
            .map(|r| r.iter().map(|x| (x * &lq).to_integer().to_i128().expect("center basis fits in i128")).collect())
            .collect();
        Projector {
            pivots: space.pivots().to_vec(),
            rows,
            den: l.to_i128().expect("denominator fits"),
            basis: space.basis().to_vec(),
        }
    }

    fn apply(&self, v: &[i128], out: &mut [i128]) {
        for (o, &x) in out.iter_mut().zip(v) {
            *o = x * self.den;
        }
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o -= c * r;
                }
            }
        }
    }

    fn modular(&self, f: &PrimeField) -> ModProjector {
        ModProjector {
            pivots: self.pivots.clone(),
            rows: self.basis.iter().map(|r| to_mod(f, r).expect("center basis reduces mod p")).collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct ModProjector {
    pivots: Vec<usize>,
    rows: Vec<Vec<u64>>,
}

impl ModProjector {
    fn apply(&self, f: &PrimeField, v: &[u64], out: &mut [u64]) {
        out.copy_from_slice(v);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                let m = f.neg(c);
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = f.add(*o, f.mul(m, r));
                }
            }
        }
    }
}

/// Reversed-word trie: node at depth `k` stands for a suffix of length `k`.
#[derive(Clone, Debug)]
struct SuffixTrie {
    n: usize,
    children: Vec<u32>,
}

impl SuffixTrie {
    const NONE: u32 = u32::MAX;

    fn new(p: &MultilinearPoly) -> Self {
        let n = p.degree();
        let mut t = SuffixTrie { n, children: vec![Self::NONE; n] };
        for w in p.terms().keys() {
            let mut node = 0usize;
            for &v in w.iter().rev() {
                let slot = node * n + (v - 1) as usize;
                if t.children[slot] == Self::NONE {
                    let id = t.children.len() / n;
                    t.children[slot] = id as u32;
                    t.children.extend(std::iter::repeat(Self::NONE).take(n));
                }
                node = t.children[slot] as usize;
            }
        }
        t
    }

    #[inline]
    fn child(&self, node: u32, var: usize) -> u32 {
        self.children[node as usize * self.n + var]
    }
}

#[inline]
fn below(a: usize) -> u32 {
    (1u32 << a) - 1
}

type IntTable = Vec<Vec<Vec<(usize, i128)>>>;

/// Depth-first evaluation of every monomial on a fixed tuple of basis
/// elements, building words from the right so shared suffixes are computed
/// once.
struct IntWalk<'a> {
    n: usize,
    d: usize,
    table: &'a IntTable,
    fact: Vec<usize>,
    trie: Option<&'a SuffixTrie>,
}

impl<'a> IntWalk<'a> {
    fn new(n: usize, d: usize, table: &'a IntTable, trie: Option<&'a SuffixTrie>) -> Self {
        IntWalk { n, d, table, fact: (0..=n).map(factorial).collect(), trie }
    }

    /// Calls `leaf(rank, negate, value)` for every monomial with a nonzero value.
    fn run(&self, tuple: &[usize], odd: u32, stack: &mut [Vec<i128>], leaf: &mut dyn FnMut(usize, bool, &[i128])) {
        for a in 0..self.n {
            let node = match self.trie {
                Some(t) => {
                    let c = t.child(0, a);
                    if c == SuffixTrie::NONE {
                        continue;
                    }
                    c
                }
                None => 0,
            };
            stack[0].iter_mut().for_each(|x| *x = 0);
            stack[0][tuple[a]] = 1;
            let oddused = if odd >> a & 1 == 1 { 1 << a } else { 0 };
            self.dfs(tuple, odd, 1, 1 << a, oddused, 0, false, node, stack, leaf);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        tuple: &[usize],
        odd: u32,
        depth: usize,
        used: u32,
        oddused: u32,
        rank: usize,
        neg: bool,
        node: u32,
        stack: &mut [Vec<i128>],
        leaf: &mut dyn FnMut(usize, bool, &[i128]),
    ) {
        if depth == self.n {
            leaf(rank, neg, &stack[depth - 1]);
            return;
        }
        for a in 0..self.n {
            if used >> a & 1 == 1 {
                continue;
            }
            let next = match self.trie {
                Some(t) => {
                    let c = t.child(node, a);
                    if c == SuffixTrie::NONE {
                        continue;
                    }
                    c
                }
                None => 0,
            };
            let (head, tail) = stack.split_at_mut(depth);
            let prev = &head[depth - 1];
            let out = &mut tail[0];
            out.iter_mut().for_each(|x| *x = 0);
            let row = &self.table[tuple[a]];
            let mut nonzero = false;
            for j in 0..self.d {
                let c = prev[j];
                if c == 0 {
                    continue;
                }
                for &(t, e) in &row[j] {
                    out[t] += e * c;
                    nonzero = true;
                }
            }
            if !nonzero || out.iter().all(|&x| x == 0) {
                continue;
            }
            let r = rank + (used & below(a)).count_ones() as usize * self.fact[depth];
            let flip = odd >> a & 1 == 1 && (oddused & below(a)).count_ones() % 2 == 1;
            let ou = if odd >> a & 1 == 1 { oddused | 1 << a } else { oddused };
            self.dfs(tuple, odd, depth + 1, used | 1 << a, ou, r, neg ^ flip, next, stack, leaf);
        }
    }
}

/// The same walk over random elements modulo `p`; `mats[a]` is left
/// multiplication by the element substituted for `x_{a+1}`, row-major.
struct ModWalk<'a> {
    n: usize,
    d: usize,
    f: PrimeField,
    lazy: Lazy,
    fact: Vec<usize>,
    trie: Option<&'a SuffixTrie>,
}

impl<'a> ModWalk<'a> {
    fn new(n: usize, d: usize, f: PrimeField, trie: Option<&'a SuffixTrie>) -> Self {
        ModWalk { n, d, f, lazy: Lazy::new(&f), fact: (0..=n).map(factorial).collect(), trie }
    }

    fn run(&self, xs: &[Vec<u64>], mats: &[Vec<u64>], odd: u32, stack: &mut [Vec<u64>], leaf: &mut dyn FnMut(usize, bool, &[u64])) {
        for a in 0..self.n {
            let node = match self.trie {
                Some(t) => {
                    let c = t.child(0, a);
                    if c == SuffixTrie::NONE {
                        continue;
                    }
                    c
                }
                None => 0,
            };
            if xs[a].iter().all(|&x| x == 0) {
                continue;
            }
            stack[0].copy_from_slice(&xs[a]);
            let oddused = if odd >> a & 1 == 1 { 1 << a } else { 0 };
            self.dfs(mats, odd, 1, 1 << a, oddused, 0, false, node, stack, leaf);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        mats: &[Vec<u64>],
        odd: u32,
        depth: usize,
        used: u32,
        oddused: u32,
        rank: usize,
        neg: bool,
        node: u32,
        stack: &mut [Vec<u64>],
        leaf: &mut dyn FnMut(usize, bool, &[u64]),
    ) {
        if depth == self.n {
            leaf(rank, neg, &stack[depth - 1]);
            return;
        }
        let d = self.d;
        for a in 0..self.n {
            if used >> a & 1 == 1 {
                continue;
            }
            let next = match self.trie {
                Some(t) => {
                    let c = t.child(node, a);
                    if c == SuffixTrie::NONE {
                        continue;
                    }
                    c
                }
                None => 0,
            };
            let (head, tail) = stack.split_at_mut(depth);
            let prev = &head[depth - 1];
            let out = &mut tail[0];
            let m = &mats[a];
            let mut any = false;
            for k in 0..d {
                let row = &m[k * d..(k + 1) * d];
                let mut acc = 0u64;
                for (&x, &y) in row.iter().zip(prev.iter()) {
                    acc = self.lazy.fold(acc + x * y);
                }
                let v = self.f.reduce(acc);
                out[k] = v;
                any |= v != 0;
            }
            if !any {
                continue;
            }
            let r = rank + (used & below(a)).count_ones() as usize * self.fact[depth];
            let flip = odd >> a & 1 == 1 && (oddused & below(a)).count_ones() % 2 == 1;
            let ou = if odd >> a & 1 == 1 { oddused | 1 << a } else { oddused };
            self.dfs(mats, odd, depth + 1, used | 1 << a, ou, r, neg ^ flip, next, stack, leaf);
        }
    }
}

/// Rank accumulator that switches to a cheap randomized rejection test once
/// most offered columns turn out dependent.
struct ModAccumulator {
    ech: ModEchelon,
    lazy: Lazy,
    probe: Option<Vec<u64>>,
    history: u32,
    rng: ChaCha8Rng,
}

impl ModAccumulator {
    fn new(field: PrimeField, len: usize, seed: u64) -> Self {
        ModAccumulator {
            ech: ModEchelon::new(field, len),
            lazy: Lazy::new(&field),
            probe: None,
            history: u32::MAX,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn rank(&self) -> usize {
        self.ech.rank()
    }

    fn full(&self) -> bool {
        self.ech.rank() == self.ech.len()
    }

    fn offer(&mut self, col: &[u64]) -> bool {
        if self.full() {
            return false;
        }
        if self.history.count_ones() < 16 {
            if self.probe.is_none() {
                self.probe = Some(self.ech.probe(&mut self.rng));
            }
            let y = self.probe.as_ref().expect("probe");
            if dot_u64(&self.ech.field(), &self.lazy, y, col) == 0 {
                self.history <<= 1;
                return false;
            }
        }
        let grew = self.ech.insert(col);
        if grew {
            self.probe = None;
        }
        self.history = self.history << 1 | grew as u32;
        grew
    }
}

type SparseCol = Vec<(u32, i128)>;

/// Exact column rank: pivots are chosen modulo `p`, then the rational left
/// kernel of the pivot block is verified against every column.
struct ExactAccumulator {
    rows: usize,
    field: PrimeField,
    modacc: ModAccumulator,
    pivots: Vec<SparseCol>,
    kernel: Vec<Vec<BigInt>>,
    small: Vec<Option<Vec<i128>>>,
    failures: Vec<SparseCol>,
}

impl ExactAccumulator {
    fn new(field: PrimeField, rows: usize, seed: u64) -> Self {
        ExactAccumulator {
            rows,
            field,
            modacc: ModAccumulator::new(field, rows, seed),
            pivots: Vec::new(),
            kernel: Vec::new(),
            small: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn offer(&mut self, col: &[(u32, i128)]) {
        if self.modacc.full() {
            return;
        }
        let mut dense = vec![0u64; self.rows];
        for &(r, c) in col {
            dense[r as usize] = self.field.from_i128(c);
        }
        if self.modacc.offer(&dense) {
            self.pivots.push(col.to_vec());
        }
    }

    fn compute_kernel(&mut self) {
        let block: Vec<Vec<Q>> = self
            .pivots
            .iter()
            .map(|c| {
                let mut v = zero_vec(self.rows);
                for &(r, x) in c {
                    v[r as usize] = Q::from_integer(BigInt::from(x));
                }
                v
            })
            .collect();
        self.kernel = nullspace(&block, self.rows).iter().map(|k| to_primitive(k)).collect();
        self.small = self.kernel.iter().map(|k| k.iter().map(|x| x.to_i128()).collect()).collect();
    }

    fn verify(&mut self, col: &[(u32, i128)]) {
        if self.failures.len() >= 16 || self.kernel.is_empty() {
            return;
        }
        for (y, ys) in self.kernel.iter().zip(&self.small) {
            if !annihilates(y, ys, col) {
                self.failures.push(col.to_vec());
                return;
            }
        }
    }

    /// Absorbs failed columns; true when the kernel was already correct.
    fn settle(&mut self) -> bool {
        if self.failures.is_empty() {
            return true;
        }
        self.pivots.append(&mut self.failures);
        self.compute_kernel();
        false
    }

    fn rank(&self) -> usize {
        self.rows - self.kernel.len()
    }
}

fn annihilates(y: &[BigInt], ys: &Option<Vec<i128>>, col: &[(u32, i128)]) -> bool {
    if let Some(ys) = ys {
        let mut acc = 0i128;
        let mut ok = true;
        for &(r, c) in col {
            match ys[r as usize].checked_mul(c).and_then(|t| acc.checked_add(t)) {
                Some(s) => acc = s,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return acc == 0;
        }
    }
    let mut acc = BigInt::zero();
    for &(r, c) in col {
        acc += &y[r as usize] * BigInt::from(c);
    }
    acc.is_zero()
}

/// Evaluation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exact when the exhaustive work estimate fits, modular otherwise.
    Auto,
    Exact,
    Modular,
}

#[derive(Clone, Debug)]
pub struct CodimConfig {
    pub method: Method,
    /// Number of independent primes for modular runs.
    pub primes: usize,
    /// A batch holds `batch_factor · n!` columns.
    pub batch_factor: usize,
    /// Consecutive batches without rank growth before stopping.
    pub window: usize,
    /// Bound on `d^n` times the number of words explored per tuple.
    pub exhaustive_cap: u64,
    pub max_degree: usize,
    pub max_batches: usize,
    pub seed: u64,
}

impl Default for CodimConfig {
    fn default() -> Self {
        CodimConfig {
            method: Method::Auto,
            primes: 2,
            batch_factor: 4,
            window: 3,
            exhaustive_cap: 400_000_000,
            max_degree: 7,
            max_batches: 400,
            seed: 0x5eed_c0d1,
        }
    }
}

impl CodimConfig {
    /// The primes used by modular runs; a function of the seed alone.
    pub fn fields(&self) -> Vec<PrimeField> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out: Vec<PrimeField> = Vec::new();
        while out.len() < self.primes.max(1) {
            let f = PrimeField::random(&mut rng);
            if !out.contains(&f) {
                out.push(f);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Modular { primes: Vec<u64>, samples: usize, agree: bool, stabilized: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodimResult {
    pub n: usize,
    /// `dim P_n / (P_n ∩ Id)`.
    pub c_n: usize,
    /// `dim P_n / (P_n ∩ Id^z)`.
    pub c_n_z: usize,
    /// `c_n - c_n^z`, the dimension of proper central polynomials modulo identities.
    pub c_n_delta: usize,
    pub provenance: Provenance,
}

impl CodimResult {
    pub fn certified(&self) -> bool {
        matches!(self.provenance, Provenance::Exact)
    }

    pub fn method_name(&self) -> &'static str {
        match self.provenance {
            Provenance::Exact => "exact",
            Provenance::Modular { .. } => "modular",
        }
    }
}

impl std::fmt::Display for CodimResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={} c_n={} c_n_z={} c_n_delta={} method={}", self.n, self.c_n, self.c_n_z, self.c_n_delta, self.method_name())?;
        match &self.provenance {
            Provenance::Exact => write!(f, " primes=- samples=- certified=true"),
            Provenance::Modular { primes, samples, agree, stabilized } => {
                let ps: Vec<String> = primes.iter().map(|p| p.to_string()).collect();
                write!(f, " primes={} samples={} certified=false agree={} stabilized={}", ps.join(","), samples, agree, stabilized)
            }
        }
    }
}

/// A subspace of `P_n`, stored exactly or through the column spaces it
/// annihilates modulo several primes.
#[derive(Clone, Debug)]
pub struct PolySpace {
    n: usize,
    exact: Option<RatSpace>,
    columns: Vec<ModEchelon>,
}

impl PolySpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        match &self.exact {
            Some(s) => s.dim(),
            None => factorial(self.n) - self.columns[0].rank(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_space(&self) -> Option<&RatSpace> {
        self.exact.as_ref()
    }

    pub fn contains(&self, f: &MultilinearPoly) -> bool {
        if f.degree() != self.n {
            return false;
        }
        self.contains_dense(&f.dense())
    }

    pub fn contains_dense(&self, v: &[Q]) -> bool {
        if let Some(s) = &self.exact {
            return s.contains(v);
        }
        self.columns.iter().all(|e| {
            let f = e.field();
            let Some(y) = to_mod(&f, v) else { return false };
            let lazy = Lazy::new(&f);
            e.basis().iter().all(|b| {
                let bb: Vec<u64> = b.iter().map(|&x| x as u64).collect();
                dot_u64(&f, &lazy, &y, &bb) == 0
            })
        })
    }

    pub fn contains_sparse(&self, v: &[(usize, i64)]) -> bool {
        let mut d = zero_vec(factorial(self.n));
        for &(i, c) in v {
            d[i] = Q::from_integer(BigInt::from(c));
        }
        self.contains_dense(&d)
    }

    /// `self ⊆ other`; modular spaces must share their primes.
    pub fn is_subspace_of(&self, other: &PolySpace) -> Result<bool> {
        if self.n != other.n {
            return Ok(false);
        }
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return Ok(b.contains_space(a));
        }
        let fa: Vec<PrimeField> = self.columns.iter().map(|e| e.field()).collect();
        let fb: Vec<PrimeField> = other.columns.iter().map(|e| e.field()).collect();
        if fa != fb {
            return Err(Error::Definition("modular spaces computed over different primes".into()));
        }
        Ok(self.columns.iter().zip(&other.columns).all(|(a, b)| a.contains_space(b)))
    }

    pub fn equals(&self, other: &PolySpace) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.is_subspace_of(other)? && other.is_subspace_of(self)?)
    }
}

/// Codimension data together with the identity and central spaces.
#[derive(Clone, Debug)]
pub struct Codimensions {
    pub result: CodimResult,
    pub identities: PolySpace,
    pub central: PolySpace,
}

/// Words explored per tuple by the right-to-left walk without pruning.
fn walk_nodes(n: usize) -> u64 {
    (1..=n).map(|k| (factorial(n) / factorial(n - k)) as u64).sum()
}

fn exhaustive_work(d: usize, n: usize) -> u64 {
    (d as u64).saturating_pow(n as u32).saturating_mul(walk_nodes(n))
}

/// `c_n`, `c_n^z` and `c_n^δ` with the corresponding polynomial spaces.
pub fn codimensions(target: &Target, n: usize, cfg: &CodimConfig) -> Result<Codimensions> {
    if n == 0 {
        return Err(Error::Definition("degree must be positive".into()));
    }
    if n > cfg.max_degree || n > 12 {
        return Err(Error::ResourceCap(format!("degree {n} exceeds the configured maximum {}", cfg.max_degree)));
    }
    let work = exhaustive_work(target.dim(), n);
    let exact = match cfg.method {
        Method::Auto => n <= 5 && work <= cfg.exhaustive_cap,
        Method::Exact => {
            if work > cfg.exhaustive_cap.saturating_mul(10) {
                return Err(Error::ResourceCap(format!("exhaustive evaluation needs about {work} steps")));
            }
            true
        }
        Method::Modular => false,
    };
    if exact {
        exact_codimensions(target, n, cfg)
    } else {
        modular_codimensions(target, n, cfg)
    }
}

pub fn identity_space(target: &Target, n: usize, cfg: &CodimConfig) -> Result<PolySpace> {
    Ok(codimensions(target, n, cfg)?.identities)
}

pub fn central_space(target: &Target, n: usize, cfg: &CodimConfig) -> Result<PolySpace> {
    Ok(codimensions(target, n, cfg)?.central)
}

fn for_each_tuple(d: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0usize; n];
    loop {
        f(&t);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            t[i] += 1;
            if t[i] < d {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

fn exact_codimensions(target: &Target, n: usize, cfg: &CodimConfig) -> Result<Codimensions> {
    let a = target.algebra();
    let d = a.dim();
    let rows = factorial(n);
    let (table, _) = a.integer_table();
    let centers = target.centers();
    let proj = [Projector::new(&centers[0]), Projector::new(&centers[1])];
    let parity: Vec<u8> = (0..d).map(|i| target.parity(i)).collect();
    let fields = cfg.fields();
    let field = fields[0];
    let mut plain = ExactAccumulator::new(field, rows, cfg.seed ^ 1);
    let mut central = ExactAccumulator::new(field, rows, cfg.seed ^ 2);
    let walk = IntWalk::new(n, d, &table, None);
    let mut stack = vec![vec![0i128; d]; n];
    let mut cols: Vec<SparseCol> = vec![Vec::new(); d];
    let mut zcols: Vec<SparseCol> = vec![Vec::new(); d];
    let mut scratch = vec![0i128; d];

    let mut pass = |plain: &mut ExactAccumulator, central: &mut ExactAccumulator, verify: bool| {
        for_each_tuple(d, n, |tuple| {
            let mut odd = 0u32;
            let mut q = 0u8;
            for (i, &b) in tuple.iter().enumerate() {
                if parity[b] == 1 {
                    odd |= 1 << i;
                    q ^= 1;
                }
            }
            let pj = &proj[q as usize];
            cols.iter_mut().for_each(|c| c.clear());
            zcols.iter_mut().for_each(|c| c.clear());
            walk.run(tuple, odd, &mut stack, &mut |rank, neg, v| {
                pj.apply(v, &mut scratch);
                for t in 0..d {
                    if v[t] != 0 {
                        cols[t].push((rank as u32, if neg { -v[t] } else { v[t] }));
                    }
                    if scratch[t] != 0 {
                        zcols[t].push((rank as u32, if neg { -scratch[t] } else { scratch[t] }));
                    }
                }
            });
            for t in 0..d {
                if !cols[t].is_empty() {
                    if verify {
                        plain.verify(&cols[t]);
                    } else {
                        plain.offer(&cols[t]);
                    }
                }
                if !zcols[t].is_empty() {
                    if verify {
                        central.verify(&zcols[t]);
                    } else {
                        central.offer(&zcols[t]);
                    }
                }
            }
        });
    };
    pass(&mut plain, &mut central, false);
    plain.compute_kernel();
    central.compute_kernel();
    loop {
        if plain.kernel.is_empty() && central.kernel.is_empty() {
            break;
        }
        pass(&mut plain, &mut central, true);
        let a_ok = plain.settle();
        let b_ok = central.settle();
        if a_ok && b_ok {
            break;
        }
    }
    let c_n = plain.rank();
    let c_n_z = central.rank();
    let to_space = |acc: &ExactAccumulator| {
        let vs: Vec<Vec<Q>> = acc
            .kernel
            .iter()
            .map(|k| k.iter().map(|x| Q::from_integer(x.clone())).collect())
            .collect();
        let columns = fields
            .iter()
            .map(|f| {
                let mut e = ModEchelon::new(*f, rows);
                for c in &acc.pivots {
                    let mut dense = vec![0u64; rows];
                    for &(r, x) in c {
                        dense[r as usize] = f.from_i128(x);
                    }
                    e.insert(&dense);
                }
                e
            })
            .collect();
        PolySpace { n, exact: Some(RatSpace::spanned_by(rows, vs.iter())), columns }
    };
    Ok(Codimensions {
        result: CodimResult { n, c_n, c_n_z, c_n_delta: c_n - c_n_z, provenance: Provenance::Exact },
        identities: to_space(&plain),
        central: to_space(&central),
    })
}

/// Random homogeneous elements with the given parity mask, and their left
/// multiplication matrices.
fn random_substitution(
    target: &Target,
    lmul: &[Vec<Vec<u64>>],
    f: &PrimeField,
    n: usize,
    mask: u32,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    let d = target.dim();
    let mut xs = Vec::with_capacity(n);
    let mut mats = Vec::with_capacity(n);
    for i in 0..n {
        let want = (mask >> i & 1) as u8;
        let x: Vec<u64> = (0..d)
            .map(|j| if target.parity(j) == want { rng.gen_range(0..f.p()) } else { 0 })
            .collect();
        let mut m = vec![0u64; d * d];
        for (bi, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for k in 0..d {
                for j in 0..d {
                    let l = lmul[bi][k][j];
                    if l != 0 {
                        m[k * d + j] = f.add(m[k * d + j], f.mul(c, l));
                    }
                }
            }
        }
        xs.push(x);
        mats.push(m);
    }
    (xs, mats)
}

struct PrimeRun {
    plain: ModAccumulator,
    central: ModAccumulator,
    samples: usize,
    stabilized: bool,
}

fn modular_run(target: &Target, n: usize, cfg: &CodimConfig, f: PrimeField, seed: u64) -> PrimeRun {
    let d = target.dim();
    let rows = factorial(n);
    let lmul = target.algebra().left_mult_mod(&f);
    let centers = target.centers();
    let proj = [Projector::new(&centers[0]).modular(&f), Projector::new(&centers[1]).modular(&f)];
    let masks = target.parity_vectors(n);
    let walk = ModWalk::new(n, d, f, None);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plain = ModAccumulator::new(f, rows, seed ^ 0x11);
    let mut central = ModAccumulator::new(f, rows, seed ^ 0x22);
    let mut stack = vec![vec![0u64; d]; n];
    let mut cols = vec![vec![0u64; rows]; d];
    let mut zcols = vec![vec![0u64; rows]; d];
    let mut scratch = vec![0u64; d];
    let per_batch = (cfg.batch_factor * rows).div_ceil(d).max(1);
    let mut samples = 0usize;
    let mut quiet = 0usize;
    let mut stabilized = false;
    for _ in 0..cfg.max_batches {
        let before = (plain.rank(), central.rank());
        for _ in 0..per_batch {
            let mask = masks[samples % masks.len()];
            samples += 1;
            let q = (mask.count_ones() % 2) as usize;
            let (xs, mats) = random_substitution(target, &lmul, &f, n, mask, &mut rng);
            cols.iter_mut().for_each(|c| c.iter_mut().for_each(|x| *x = 0));
            zcols.iter_mut().for_each(|c| c.iter_mut().for_each(|x| *x = 0));
            let pj = &proj[q];
            walk.run(&xs, &mats, mask, &mut stack, &mut |rank, neg, v| {
                pj.apply(&f, v, &mut scratch);
                for t in 0..d {
                    cols[t][rank] = if neg { f.neg(v[t]) } else { v[t] };
                    zcols[t][rank] = if neg { f.neg(scratch[t]) } else { scratch[t] };
                }
            });
            for t in 0..d {
                if cols[t].iter().any(|&x| x != 0) {
                    plain.offer(&cols[t]);
                }
                if zcols[t].iter().any(|&x| x != 0) {
                    central.offer(&zcols[t]);
                }
            }
            if plain.full() && central.full() {
                break;
            }
        }
        if plain.full() && central.full() {
            stabilized = true;
            break;
        }
        if (plain.rank(), central.rank()) == before {
            quiet += 1;
            if quiet >= cfg.window {
                stabilized = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    PrimeRun { plain, central, samples, stabilized }
}

fn modular_codimensions(target: &Target, n: usize, cfg: &CodimConfig) -> Result<Codimensions> {
    let fields = cfg.fields();
    let runs: Vec<PrimeRun> = fields
        .iter()
        .enumerate()
        .map(|(i, f)| modular_run(target, n, cfg, *f, cfg.seed.wrapping_add(0x9e37_79b9 * (i as u64 + 1))))
        .collect();
    let c_n = runs[0].plain.rank();
    let c_n_z = runs[0].central.rank();
    let agree = runs.iter().all(|r| r.plain.rank() == c_n && r.central.rank() == c_n_z);
    let provenance = Provenance::Modular {
        primes: fields.iter().map(|f| f.p()).collect(),
        samples: runs.iter().map(|r| r.samples).sum(),
        agree,
        stabilized: runs.iter().all(|r| r.stabilized),
    };
    let mut plain_cols = Vec::new();
    let mut central_cols = Vec::new();
    for r in runs {
        plain_cols.push(r.plain.ech);
        central_cols.push(r.central.ech);
    }
    Ok(Codimensions {
        result: CodimResult { n, c_n, c_n_z, c_n_delta: c_n.saturating_sub(c_n_z), provenance },
        identities: PolySpace { n, exact: None, columns: plain_cols },
        central: PolySpace { n, exact: None, columns: central_cols },
    })
}

/// Span of values of a tree polynomial, split by parity of the value.
pub fn value_spaces(target: &Target, tree: &Tree) -> [RatSpace; 2] {
    let a = target.algebra();
    let d = a.dim();
    match tree {
        Tree::Leaf(_) => {
            if target.signed() {
                let even: Vec<Vec<Q>> = a.basis_of_parity(0).into_iter().map(|i| unit_vec(d, i)).collect();
                let odd: Vec<Vec<Q>> = a.basis_of_parity(1).into_iter().map(|i| unit_vec(d, i)).collect();
                [RatSpace::spanned_by(d, even.iter()), RatSpace::spanned_by(d, odd.iter())]
            } else {
                let all: Vec<Vec<Q>> = (0..d).map(|i| unit_vec(d, i)).collect();
                [RatSpace::spanned_by(d, all.iter()), RatSpace::new(d)]
            }
        }
        Tree::Product(cs) | Tree::Commutator(cs) => {
            let commutator = matches!(tree, Tree::Commutator(_));
            let mut acc = value_spaces(target, &cs[0]);
            for c in &cs[1..] {
                let rhs = value_spaces(target, c);
                let mut out = [RatSpace::new(d), RatSpace::new(d)];
                for pa in 0..2usize {
                    for pb in 0..2usize {
                        for x in acc[pa].basis() {
                            for y in rhs[pb].basis() {
                                let xy = a.mul(x, y);
                                let v = if commutator {
                                    let yx = a.mul(y, x);
                                    if target.signed() && pa & pb == 1 {
                                        crate::linalg::add(&xy, &yx)
                                    } else {
                                        crate::linalg::sub(&xy, &yx)
                                    }
                                } else {
                                    xy
                                };
                                out[pa ^ pb].insert(&v);
                            }
                        }
                    }
                }
                acc = out;
            }
            acc
        }
    }
}

/// One evaluation of a tree on substitution-basis elements.
#[derive(Clone, Debug)]
pub struct EvaluationRecord {
    pub parity: u8,
    pub value: Vec<Q>,
    /// `(variable, index into the substitution basis)`.
    pub assignment: Vec<(u32, usize)>,
    /// Union of the Wedderburn block masks used.
    pub blocks: u32,
}

fn catalog_key(parity: u8, v: &[Q], blocks: u32) -> (u8, Vec<Q>, u32) {
    let lead = v.iter().find(|x| !x.is_zero()).map(|x| x.abs()).unwrap_or_else(Q::one);
    (parity, v.iter().map(|x| x / &lead).collect(), blocks)
}

/// Distinct nonzero values of a tree over substitution-basis tuples, up to
/// positive scalars and keyed by the blocks touched. `None` when some
/// intermediate list would exceed `cap`.
pub fn evaluation_catalog(target: &Target, tree: &Tree, cap: usize) -> Option<Vec<EvaluationRecord>> {
    let basis = target.substitution_basis();
    catalog_rec(target, &basis, tree, cap)
}

fn catalog_rec(target: &Target, basis: &[SubstitutionElement], tree: &Tree, cap: usize) -> Option<Vec<EvaluationRecord>> {
    let a = target.algebra();
    match tree {
        Tree::Leaf(v) => Some(
            basis
                .iter()
                .enumerate()
                .map(|(i, e)| EvaluationRecord { parity: e.parity, value: e.vector.clone(), assignment: vec![(*v, i)], blocks: e.blocks })
                .collect(),
        ),
        Tree::Product(cs) | Tree::Commutator(cs) => {
            let commutator = matches!(tree, Tree::Commutator(_));
            let mut acc = catalog_rec(target, basis, &cs[0], cap)?;
            for c in &cs[1..] {
                let rhs = catalog_rec(target, basis, c, cap)?;
                let mut seen: HashMap<(u8, Vec<Q>, u32), ()> = HashMap::new();
                let mut out = Vec::new();
                for x in &acc {
                    for y in &rhs {
                        let xy = a.mul(&x.value, &y.value);
                        let v = if commutator {
                            let yx = a.mul(&y.value, &x.value);
                            if target.signed() && x.parity & y.parity == 1 {
                                crate::linalg::add(&xy, &yx)
                            } else {
                                crate::linalg::sub(&xy, &yx)
                            }
                        } else {
                            xy
                        };
                        if is_zero(&v) {
                            continue;
                        }
                        let parity = x.parity ^ y.parity;
                        let blocks = x.blocks | y.blocks;
                        if seen.insert(catalog_key(parity, &v, blocks), ()).is_none() {
                            if out.len() >= cap {
                                return None;
                            }
                            let mut assignment = x.assignment.clone();
                            assignment.extend(y.assignment.iter().copied());
                            out.push(EvaluationRecord { parity, value: v, assignment, blocks });
                        }
                    }
                }
                acc = out;
            }
            Some(acc)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Identity,
    ProperCentral,
    NonCentral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMethod {
    /// Value spaces of a product/commutator tree.
    Tree,
    /// Every tuple of basis elements.
    Exhaustive,
    /// Random substitutions modulo primes; only refutations are certain.
    Sampled,
}

/// A substitution and the value it produces.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Element substituted for `x1, x2, ...`, formatted.
    pub elements: Vec<String>,
    /// Coordinates of the substituted elements; empty for sampled refutations.
    pub vectors: Vec<Vec<Q>>,
    pub value: Vec<Q>,
    pub value_text: String,
    pub parity: u8,
}

#[derive(Clone, Debug)]
pub struct PolyCheck {
    pub verdict: Verdict,
    pub exact: bool,
    pub method: CheckMethod,
    /// A nonzero central value for proper central polynomials, a
    /// non-central value otherwise.
    pub witness: Option<Witness>,
}

impl PolyCheck {
    pub fn is_identity(&self) -> bool {
        self.verdict == Verdict::Identity
    }

    pub fn is_proper_central(&self) -> bool {
        self.verdict == Verdict::ProperCentral
    }
}

fn entry_witness(target: &Target, basis: &[SubstitutionElement], e: &EvaluationRecord) -> Witness {
    let mut asg = e.assignment.clone();
    asg.sort();
    Witness {
        elements: asg.iter().map(|&(_, i)| basis[i].label.clone()).collect(),
        vectors: asg.iter().map(|&(_, i)| basis[i].vector.clone()).collect(),
        value: e.value.clone(),
        value_text: target.algebra().format(&e.value),
        parity: e.parity,
    }
}

fn support(v: &[Q]) -> usize {
    v.iter().filter(|x| !x.is_zero()).count()
}

fn renumber_tree(t: &Tree, map: &HashMap<u32, u32>) -> Tree {
    match t {
        Tree::Leaf(v) => Tree::Leaf(map[v]),
        Tree::Product(cs) => Tree::Product(cs.iter().map(|c| renumber_tree(c, map)).collect()),
        Tree::Commutator(cs) => Tree::Commutator(cs.iter().map(|c| renumber_tree(c, map)).collect()),
    }
}

/// Exact verdict for a product/commutator tree.
pub fn check_tree(target: &Target, tree: &Tree, catalog_cap: usize) -> PolyCheck {
    let mut vars = tree.variables();
    vars.sort();
    let map: HashMap<u32, u32> = vars.iter().enumerate().map(|(i, &v)| (v, i as u32 + 1)).collect();
    let tree = renumber_tree(tree, &map);
    let vs = value_spaces(target, &tree);
    if vs[0].dim() == 0 && vs[1].dim() == 0 {
        return PolyCheck { verdict: Verdict::Identity, exact: true, method: CheckMethod::Tree, witness: None };
    }
    let z = target.centers();
    let central = z[0].contains_space(&vs[0]) && z[1].contains_space(&vs[1]);
    let verdict = if central { Verdict::ProperCentral } else { Verdict::NonCentral };
    let basis = target.substitution_basis();
    let witness = catalog_rec(target, &basis, &tree, catalog_cap).and_then(|entries| {
        let pick = entries
            .iter()
            .filter(|e| central || !z[e.parity as usize].contains(&e.value))
            .min_by_key(|e| {
                let lead_neg = e.value.iter().find(|x| !x.is_zero()).map(|x| x.is_negative()).unwrap_or(false);
                (support(&e.value), lead_neg, e.blocks.count_ones())
            })?;
        Some(entry_witness(target, &basis, pick))
    });
    PolyCheck { verdict, exact: true, method: CheckMethod::Tree, witness }
}

/// Verdict for a single multilinear polynomial.
pub fn check_multilinear(target: &Target, f: &MultilinearPoly, cfg: &CodimConfig) -> Result<PolyCheck> {
    let n = f.degree();
    if n == 0 || n > 31 {
        return Err(Error::Definition(format!("unsupported degree {n}")));
    }
    if f.is_zero() {
        return Ok(PolyCheck { verdict: Verdict::Identity, exact: true, method: CheckMethod::Exhaustive, witness: None });
    }
    let trie = SuffixTrie::new(f);
    let words = f.terms().len() as u64 * n as u64;
    let work = (target.dim() as u64).saturating_pow(n as u32).saturating_mul(words.min(walk_nodes(n.min(12))));
    if cfg.method != Method::Modular && work <= cfg.exhaustive_cap {
        Ok(exhaustive_check(target, f, &trie))
    } else {
        Ok(sampled_check(target, f, &trie, cfg))
    }
}

fn integer_coefficients(f: &MultilinearPoly) -> Vec<i128> {
    let mut l = BigInt::one();
    for c in f.terms().values() {
        l = l.lcm(c.denom());
    }
    let lq = Q::from_integer(l);
    let mut out = vec![0i128; factorial(f.degree())];
    for (r, c) in f.sparse() {
        out[r] = (c * &lq).to_integer().to_i128().expect("coefficient fits in i128");
    }
    out
}

fn exhaustive_check(target: &Target, f: &MultilinearPoly, trie: &SuffixTrie) -> PolyCheck {
    let a = target.algebra();
    let d = a.dim();
    let n = f.degree();
    let (table, scale) = a.integer_table();
    let coeffs = integer_coefficients(f);
    let z = target.centers();
    let proj = [Projector::new(&z[0]), Projector::new(&z[1])];
    let walk = IntWalk::new(n, d, &table, Some(trie));
    let mut stack = vec![vec![0i128; d]; n];
    let mut value = vec![0i128; d];
    let mut scratch = vec![0i128; d];
    let mut nonzero: Option<(Vec<usize>, Vec<i128>, u8)> = None;
    let mut noncentral: Option<(Vec<usize>, Vec<i128>, u8)> = None;
    let mut t = vec![0usize; n];
    'outer: loop {
        let mut odd = 0u32;
        let mut q = 0u8;
        for (i, &b) in t.iter().enumerate() {
            if target.parity(b) == 1 {
                odd |= 1 << i;
                q ^= 1;
            }
        }
        value.iter_mut().for_each(|x| *x = 0);
        walk.run(&t, odd, &mut stack, &mut |rank, neg, v| {
            let c = if neg { -coeffs[rank] } else { coeffs[rank] };
            for (o, &x) in value.iter_mut().zip(v) {
                *o += c * x;
            }
        });
        if value.iter().any(|&x| x != 0) {
            if nonzero.is_none() {
                nonzero = Some((t.clone(), value.clone(), q));
            }
            proj[q as usize].apply(&value, &mut scratch);
            if scratch.iter().any(|&x| x != 0) {
                noncentral = Some((t.clone(), value.clone(), q));
                break 'outer;
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                break 'outer;
            }
            t[i] += 1;
            if t[i] < d {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
    let denom = Q::from_integer(BigInt::from(scale).pow(n as u32 - 1));
    let to_witness = |(tuple, v, q): (Vec<usize>, Vec<i128>, u8)| {
        let value: Vec<Q> = v.iter().map(|&x| Q::from_integer(BigInt::from(x)) / &denom).collect();
        Witness {
            elements: tuple.iter().map(|&b| a.labels()[b].clone()).collect(),
            vectors: tuple.iter().map(|&b| a.basis(b)).collect(),
            value_text: a.format(&value),
            value,
            parity: q,
        }
    };
    let (verdict, witness) = match (noncentral, nonzero) {
        (Some(w), _) => (Verdict::NonCentral, Some(to_witness(w))),
        (None, Some(w)) => (Verdict::ProperCentral, Some(to_witness(w))),
        (None, None) => (Verdict::Identity, None),
    };
    PolyCheck { verdict, exact: true, method: CheckMethod::Exhaustive, witness }
}

fn sampled_check(target: &Target, f: &MultilinearPoly, trie: &SuffixTrie, cfg: &CodimConfig) -> PolyCheck {
    let d = target.dim();
    let n = f.degree();
    let masks = target.parity_vectors(n);
    let rounds = (4 * masks.len()).clamp(32, 512);
    let mut nonzero: Option<Witness> = None;
    for (pi, field) in cfg.fields().into_iter().enumerate() {
        let lmul = target.algebra().left_mult_mod(&field);
        let z = target.centers();
        let proj = [Projector::new(&z[0]).modular(&field), Projector::new(&z[1]).modular(&field)];
        let coeffs: Vec<u64> = {
            let mut c = vec![0u64; factorial(n)];
            for (r, x) in f.sparse() {
                c[r] = field.from_rational(&x).unwrap_or(0);
            }
            c
        };
        let walk = ModWalk::new(n, d, field, Some(trie));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0xabc0 + pi as u64));
        let mut stack = vec![vec![0u64; d]; n];
        let mut scratch = vec![0u64; d];
        for s in 0..rounds {
            let mask = masks[s % masks.len()];
            let q = (mask.count_ones() % 2) as u8;
            let (xs, mats) = random_substitution(target, &lmul, &field, n, mask, &mut rng);
            let mut value = vec![0u64; d];
            walk.run(&xs, &mats, mask, &mut stack, &mut |rank, neg, v| {
                let c = if neg { field.neg(coeffs[rank]) } else { coeffs[rank] };
                if c != 0 {
                    for (o, &x) in value.iter_mut().zip(v) {
                        *o = field.add(*o, field.mul(c, x));
                    }
                }
            });
            if value.iter().all(|&x| x == 0) {
                continue;
            }
            let witness = Witness {
                elements: xs.iter().map(|x| format!("random element mod {} ({} nonzero coordinates)", field.p(), x.iter().filter(|&&c| c != 0).count())).collect(),
                vectors: Vec::new(),
                value: value.iter().map(|&x| Q::from_integer(BigInt::from(field.lift(x)))).collect(),
                value_text: format!("nonzero mod {}", field.p()),
                parity: q,
            };
            proj[q as usize].apply(&field, &value, &mut scratch);
            if scratch.iter().any(|&x| x != 0) {
                return PolyCheck { verdict: Verdict::NonCentral, exact: true, method: CheckMethod::Sampled, witness: Some(witness) };
            }
            if nonzero.is_none() {
                nonzero = Some(witness);
            }
        }
    }
    match nonzero {
        Some(w) => PolyCheck { verdict: Verdict::ProperCentral, exact: false, method: CheckMethod::Sampled, witness: Some(w) },
        None => PolyCheck { verdict: Verdict::Identity, exact: false, method: CheckMethod::Sampled, witness: None },
    }
}

/// Verdict for an arbitrary polynomial expression.
///
/// Trees go through value spaces. Anything else is split into the full
/// linearizations of its multihomogeneous components, which generate the
/// same T-space in characteristic zero.
pub fn check_expr(target: &Target, e: &Expr, cfg: &CodimConfig) -> Result<PolyCheck> {
    if let Some(t) = e.as_tree() {
        return Ok(check_tree(target, &t, 200_000));
    }
    let g = e.expand();
    if g.is_zero() {
        return Ok(PolyCheck { verdict: Verdict::Identity, exact: true, method: CheckMethod::Exhaustive, witness: None });
    }
    if g.terms().keys().any(|w| w.is_empty()) {
        return Err(Error::Definition("polynomial has a constant term".into()));
    }
    let mut outcome = PolyCheck { verdict: Verdict::Identity, exact: true, method: CheckMethod::Exhaustive, witness: None };
    for m in multilinearize(&g) {
        let c = check_multilinear(target, &m, cfg)?;
        outcome.exact &= c.exact;
        if c.method == CheckMethod::Sampled {
            outcome.method = CheckMethod::Sampled;
        }
        match c.verdict {
            Verdict::NonCentral => {
                return Ok(PolyCheck { verdict: Verdict::NonCentral, exact: c.exact, method: c.method, witness: c.witness });
            }
            Verdict::ProperCentral if outcome.verdict == Verdict::Identity => {
                outcome.verdict = Verdict::ProperCentral;
                outcome.witness = c.witness;
            }
            _ => {}
        }
    }
    Ok(outcome)
}

pub fn is_identity(target: &Target, e: &Expr, cfg: &CodimConfig) -> Result<bool> {
    Ok(check_expr(target, e, cfg)?.is_identity())
}

pub fn is_proper_central(target: &Target, e: &Expr, cfg: &CodimConfig) -> Result<bool> {
    Ok(check_expr(target, e, cfg)?.is_proper_central())
}

/// Codimension data for degrees `1..=max_n`.
pub fn codimension_sequence(target: &Target, max_n: usize, cfg: &CodimConfig) -> Result<Vec<CodimResult>> {
    (1..=max_n).map(|n| codimensions(target, n, cfg).map(|c| c.result)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::build_presentation;
    use crate::grassmann::build_envelope_model;
    use crate::linalg::rank;
    use crate::poly::{all_perms, perm_rank, standard_polynomial};

    fn ut(n: usize) -> SuperAlgebra {
        build_presentation("UT", &vec![1; n], &vec![0; n], &[]).unwrap()
    }

    fn m2() -> SuperAlgebra {
        build_presentation("M2", &[2], &[0, 0], &[]).unwrap()
    }

    fn m11() -> SuperAlgebra {
        build_presentation("M11", &[2], &[0, 1], &[]).unwrap()
    }

    fn fcf() -> SuperAlgebra {
        build_presentation("FcF", &[2], &[0, 1], &["a11=a22".to_string(), "a12=a21".to_string()]).unwrap()
    }

    /// Naive rank of the evaluation matrix over Q, all basis tuples, with
    /// explicit sign and central projection.
    fn naive(target: &Target, n: usize) -> (usize, usize) {
        let a = target.algebra();
        let d = a.dim();
        let perms = all_perms(n);
        let z = target.centers();
        let mut plain_cols: Vec<Vec<Q>> = Vec::new();
        let mut central_cols: Vec<Vec<Q>> = Vec::new();
        for_each_tuple(d, n, |t| {
            let els: Vec<Vec<Q>> = t.iter().map(|&b| unit_vec(d, b)).collect();
            let par: Vec<u8> = t.iter().map(|&b| target.parity(b)).collect();
            let q = par.iter().fold(0, |x, y| x ^ y) as usize;
            let mut block = vec![zero_vec(factorial(n)); d];
            let mut zblock = vec![zero_vec(factorial(n)); d];
            for w in &perms {
                let fs: Vec<&Vec<Q>> = w.iter().map(|&v| &els[(v - 1) as usize]).collect();
                let mut v = a.mul_all(&fs);
                let sign = crate::grassmann::inv_odd(w, &par) % 2 == 1;
                if sign {
                    v = v.iter().map(|x| -x.clone()).collect();
                }
                let r = z[q].reduce(&v);
                for k in 0..d {
                    block[k][perm_rank(w)] = v[k].clone();
                    zblock[k][perm_rank(w)] = r[k].clone();
                }
            }
            plain_cols.extend(block);
            central_cols.extend(zblock);
        });
        (rank(&plain_cols), rank(&central_cols))
    }

    fn exact_cfg() -> CodimConfig {
        CodimConfig { method: Method::Exact, ..CodimConfig::default() }
    }

    fn modular_cfg() -> CodimConfig {
        CodimConfig { method: Method::Modular, ..CodimConfig::default() }
    }

    #[test]
    fn ut2_codimensions_match_closed_form() {
        let t = Target::plain(ut(2));
        for n in 1..=5 {
            let c = codimensions(&t, n, &exact_cfg()).unwrap().result;
            assert_eq!(c.c_n + (1 << n), (1 << (n - 1)) * n + 2, "n={n}");
        }
    }

    #[test]
    fn grassmann_codimensions_are_powers_of_two() {
        let t = Target::envelope(fcf());
        for n in 1..=5 {
            let c = codimensions(&t, n, &exact_cfg()).unwrap().result;
            assert_eq!(c.c_n, 1 << (n - 1), "n={n}");
            let m = codimensions(&t, n, &modular_cfg()).unwrap().result;
            assert_eq!(m.c_n, c.c_n);
            assert_eq!(m.c_n_z, c.c_n_z);
        }
    }

    #[test]
    fn naive_oracle_agrees() {
        let cases = [
            (Target::plain(ut(2)), 4),
            (Target::plain(m2()), 3),
            (Target::plain(ut(3)), 3),
            (Target::envelope(m11()), 3),
            (Target::envelope(fcf()), 4),
        ];
        for (t, n) in cases {
            for k in 1..=n {
                let (p, z) = naive(&t, k);
                let c = codimensions(&t, k, &exact_cfg()).unwrap().result;
                assert_eq!((c.c_n, c.c_n_z), (p, z), "{} n={k}", t.name());
                let m = codimensions(&t, k, &modular_cfg()).unwrap().result;
                assert_eq!((m.c_n, m.c_n_z), (p, z), "{} n={k} modular", t.name());
            }
        }
    }

    #[test]
    fn envelope_agrees_with_truncated_model() {
        let base = m11();
        let model = build_envelope_model(&base, 3).unwrap();
        let direct = Target::plain(model.algebra.clone());
        let signed = Target::envelope(base);
        for n in 1..=3 {
            let a = codimensions(&direct, n, &modular_cfg()).unwrap().result;
            let b = codimensions(&signed, n, &exact_cfg()).unwrap().result;
            assert_eq!(a.c_n, b.c_n, "n={n}");
        }
    }

    #[test]
    fn m2_standard_polynomial() {
        let t = Target::plain(m2());
        let s4 = standard_polynomial(4);
        let ids = identity_space(&t, 4, &exact_cfg()).unwrap();
        assert!(ids.contains(&s4));
        assert_eq!(ids.dim(), 1);
        let c = check_multilinear(&t, &s4, &exact_cfg()).unwrap();
        assert!(c.is_identity() && c.exact);
        let s3 = standard_polynomial(3);
        assert_eq!(check_multilinear(&t, &s3, &exact_cfg()).unwrap().verdict, Verdict::NonCentral);
        let sampled = check_multilinear(&t, &s3, &modular_cfg()).unwrap();
        assert_eq!(sampled.verdict, Verdict::NonCentral);
        assert!(sampled.exact);
    }

    #[test]
    fn m2_central_polynomial() {
        let t = Target::plain(m2());
        let e = Expr::parse("[x1,x2]^2").unwrap();
        let c = check_expr(&t, &e, &exact_cfg()).unwrap();
        assert_eq!(c.verdict, Verdict::ProperCentral);
        let e = Expr::parse("[[x1,x2]^2,x3]").unwrap();
        assert!(is_identity(&t, &e, &exact_cfg()).unwrap());
        let r = codimensions(&t, 4, &exact_cfg()).unwrap().result;
        assert!(r.c_n_delta > 0);
    }

    #[test]
    fn tree_method_matches_exhaustive() {
        let targets = [Target::plain(ut(3)), Target::plain(m2()), Target::envelope(m11())];
        for t in &targets {
            for s in ["[x1,x2][x3,x4]", "[x1,x2,x3]", "[x1,x2][x3,x4][x5,x6]", "x1[x2,x3]x4", "[[x1,x2],[x3,x4]]"] {
                let e = Expr::parse(s).unwrap();
                let tree = e.as_tree().unwrap();
                let a = check_tree(t, &tree, 100_000);
                let m = MultilinearPoly::from_general(&e.expand()).unwrap();
                let b = check_multilinear(t, &m, &exact_cfg()).unwrap();
                assert_eq!(a.verdict, b.verdict, "{} {s}", t.name());
            }
        }
    }

    #[test]
    fn ut4_product_of_commutators_witness() {
        let a = build_presentation("A3", &[1; 4], &[0; 4], &["a11=a44".to_string()]);
        let a = a.map_err(|e| e.to_string()).unwrap();
        let t = Target::plain(a);
        let e = Expr::parse("[x1,x2][x3,x4][x5,x6]").unwrap();
        let c = check_expr(&t, &e, &CodimConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::ProperCentral);
        let w = c.witness.unwrap();
        assert_eq!(w.value_text, "e14");
    }

    #[test]
    fn spaces_compare() {
        let t = Target::plain(ut(2));
        let a = identity_space(&t, 4, &exact_cfg()).unwrap();
        let b = identity_space(&t, 4, &modular_cfg()).unwrap();
        assert_eq!(a.dim(), b.dim());
        assert!(a.equals(&b).unwrap());
        let f = MultilinearPoly::parse("[x1,x2][x3,x4]").unwrap();
        assert!(a.contains(&f), "exact");
        assert!(b.contains(&f), "modular");
    }

    #[test]
    fn degree_cap() {
        let t = Target::plain(ut(2));
        assert!(matches!(codimensions(&t, 9, &CodimConfig::default()), Err(Error::ResourceCap(_))));
    }
}
