//! Free-algebra polynomials: parsing, expansion, multilinearization and the
//! multilinear part of T-ideals.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! sum     := ['+' | '-'] product (('+' | '-') product)*
//! product := factor (['*'] factor)*
//! factor  := atom ['^' digits]
//! atom    := digits ['/' digits] | 'x' digits | 'St' ['_'] digits
//!          | '[' sum (',' sum)+ ']' | '(' sum ')'
//! ```
//!
//! Long commutators are left-normed: `[a,b,c] = [[a,b],c]`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{exact_column_space, ExactColumnSpace, SparseModEchelon, Q};

pub type Word = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(u32),
    Scalar(Q),
    Sum(Vec<Expr>),
    Neg(Box<Expr>),
    Product(Vec<Expr>),
    Commutator(Vec<Expr>),
    Power(Box<Expr>, u32),
    Standard(u32),
}

/// Product/commutator tree over pairwise distinct variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Leaf(u32),
    Product(Vec<Tree>),
    Commutator(Vec<Tree>),
}

impl Tree {
    pub fn variables(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<u32>) {
        match self {
            Tree::Leaf(v) => out.push(*v),
            Tree::Product(c) | Tree::Commutator(c) => c.iter().for_each(|t| t.collect(out)),
        }
    }

    pub fn degree(&self) -> usize {
        self.variables().len()
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(v) => write!(f, "x{v}"),
            Tree::Product(c) => c.iter().try_for_each(|t| write!(f, "{t}")),
            Tree::Commutator(c) => {
                write!(f, "[")?;
                for (i, t) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr> {
        let mut p = Parser { c: s.chars().collect(), pos: 0 };
        let e = p.sum()?;
        p.ws();
        if p.pos != p.c.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    pub fn expand(&self) -> GeneralPoly {
        match self {
            Expr::Var(v) => GeneralPoly::monomial(vec![*v], Q::one()),
            Expr::Scalar(c) => GeneralPoly::monomial(Vec::new(), c.clone()),
            Expr::Sum(ts) => ts.iter().fold(GeneralPoly::zero(), |acc, t| acc.add(&t.expand())),
            Expr::Neg(t) => t.expand().scale(&-Q::one()),
            Expr::Product(fs) => fs.iter().fold(GeneralPoly::one(), |acc, t| acc.mul(&t.expand())),
            Expr::Commutator(args) => {
                let mut acc = args[0].expand();
                for a in &args[1..] {
                    acc = acc.commutator(&a.expand());
                }
                acc
            }
            Expr::Power(t, k) => {
                let base = t.expand();
                (0..*k).fold(GeneralPoly::one(), |acc, _| acc.mul(&base))
            }
            Expr::Standard(k) => standard_polynomial(*k as usize).to_general(),
        }
    }

    /// Product/commutator tree with distinct variables, if the expression has
    /// that shape (nonzero scalar factors and signs are dropped).
    pub fn as_tree(&self) -> Option<Tree> {
        let t = self.tree_inner()?;
        let vars = t.variables();
        let set: BTreeSet<u32> = vars.iter().copied().collect();
        (set.len() == vars.len()).then_some(t)
    }

    fn tree_inner(&self) -> Option<Tree> {
        match self {
            Expr::Var(v) => Some(Tree::Leaf(*v)),
            Expr::Neg(t) => t.tree_inner(),
            Expr::Sum(ts) if ts.len() == 1 => ts[0].tree_inner(),
            Expr::Power(t, 1) => t.tree_inner(),
            Expr::Product(fs) => {
                let mut kids = Vec::new();
                for f in fs {
                    match f {
                        Expr::Scalar(c) if !c.is_zero() => {}
                        _ => kids.push(f.tree_inner()?),
                    }
                }
                match kids.len() {
                    0 => None,
                    1 => kids.pop(),
                    _ => Some(Tree::Product(kids)),
                }
            }
            Expr::Commutator(args) => Some(Tree::Commutator(args.iter().map(|a| a.tree_inner()).collect::<Option<_>>()?)),
            _ => None,
        }
    }
}

struct Parser {
    c: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, m: &str) -> Error {
        Error::Parse { offset: self.pos, message: m.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.c.len() && self.c[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.c.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<u64> {
        let start = self.pos;
        while self.pos < self.c.len() && self.c[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.c[start..self.pos].iter().collect::<String>().parse().ok()
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    false
                }
                Some('-') => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                _ => break,
            };
            first = false;
            let t = self.product()?;
            terms.push(if neg { Expr::Neg(Box::new(t)) } else { t });
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn product(&mut self) -> Result<Expr> {
        let mut fs = vec![self.factor()?];
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    fs.push(self.factor()?);
                }
                Some(c) if c == 'x' || c == 'S' || c == '[' || c == '(' || c.is_ascii_digit() => fs.push(self.factor()?),
                _ => break,
            }
        }
        Ok(if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Product(fs) })
    }

    fn factor(&mut self) -> Result<Expr> {
        let a = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.ws();
            let k = self.digits().ok_or_else(|| self.err("expected exponent"))?;
            return Ok(Expr::Power(Box::new(a), k as u32));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                let v = self.digits().ok_or_else(|| self.err("expected variable index"))?;
                if v == 0 {
                    return Err(self.err("variables are numbered from 1"));
                }
                Ok(Expr::Var(v as u32))
            }
            Some('S') => {
                if self.c.get(self.pos + 1) != Some(&'t') {
                    return Err(self.err("expected St<k>"));
                }
                self.pos += 2;
                if self.c.get(self.pos) == Some(&'_') {
                    self.pos += 1;
                }
                let k = self.digits().ok_or_else(|| self.err("expected St degree"))?;
                if k == 0 {
                    return Err(self.err("St0 is undefined"));
                }
                Ok(Expr::Standard(k as u32))
            }
            Some('[') => {
                self.pos += 1;
                let mut args = vec![self.sum()?];
                while self.peek() == Some(',') {
                    self.pos += 1;
                    args.push(self.sum()?);
                }
                if self.peek() != Some(']') {
                    return Err(self.err("expected ']'"));
                }
                self.pos += 1;
                if args.len() < 2 {
                    return Err(self.err("commutator needs at least two arguments"));
                }
                Ok(Expr::Commutator(args))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.digits().unwrap();
                let mut v = Q::from_integer(BigInt::from(n));
                if self.c.get(self.pos) == Some(&'/') {
                    self.pos += 1;
                    let d = self.digits().ok_or_else(|| self.err("expected denominator"))?;
                    if d == 0 {
                        return Err(self.err("zero denominator"));
                    }
                    v /= Q::from_integer(BigInt::from(d));
                }
                Ok(Expr::Scalar(v))
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

/// Rational combination of words; repeated variables allowed.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GeneralPoly {
    terms: BTreeMap<Word, Q>,
}

impl GeneralPoly {
    pub fn zero() -> Self {
        GeneralPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(Vec::new(), Q::one())
    }

    pub fn monomial(w: Word, c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(Expr::parse(s)?.expand())
    }

    pub fn add_term(&mut self, w: Word, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(w.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Word, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut r = Self::zero();
        for (w, x) in &self.terms {
            r.add_term(w.clone(), x * c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                r.add_term(w, c1 * c2);
            }
        }
        r
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn variables(&self) -> BTreeSet<u32> {
        self.terms.keys().flat_map(|w| w.iter().copied()).collect()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Whether every word is a permutation of `1..=n` for a single `n`.
    pub fn is_multilinear(&self) -> bool {
        let n = self.degree();
        self.terms.keys().all(|w| w.len() == n && is_permutation_word(w))
    }
}

impl fmt::Display for GeneralPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i > 0 {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            } else if neg {
                write!(f, "-")?;
            }
            let a = c.abs();
            if !a.is_one() || w.is_empty() {
                write!(f, "{a}")?;
            }
            for v in w {
                write!(f, "x{v}")?;
            }
        }
        Ok(())
    }
}

fn is_permutation_word(w: &[u32]) -> bool {
    let n = w.len() as u32;
    let mut seen = vec![false; w.len()];
    w.iter().all(|&v| {
        if v == 0 || v > n || seen[(v - 1) as usize] {
            return false;
        }
        seen[(v - 1) as usize] = true;
        true
    })
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lexicographic rank of a permutation word of `1..=n`.
pub fn perm_rank(w: &[u32]) -> usize {
    let n = w.len();
    let mut r = 0;
    for i in 0..n {
        let smaller = w[i + 1..].iter().filter(|&&x| x < w[i]).count();
        r = r * (n - i) + smaller;
    }
    r
}

pub fn perm_unrank(n: usize, mut r: usize) -> Word {
    let mut avail: Vec<u32> = (1..=n as u32).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let f = factorial(n - 1 - i);
        let k = r / f;
        r %= f;
        out.push(avail.remove(k));
    }
    out
}

/// All permutations of `1..=n` in lexicographic order.
pub fn all_perms(n: usize) -> Vec<Word> {
    (0..factorial(n)).map(|r| perm_unrank(n, r)).collect()
}

/// Multilinear polynomial in `x1..xn`, keyed by permutation words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearPoly {
    n: usize,
    coeffs: BTreeMap<Word, Q>,
}

impl MultilinearPoly {
    pub fn new(n: usize) -> Self {
        MultilinearPoly { n, coeffs: BTreeMap::new() }
    }

    pub fn from_general(g: &GeneralPoly) -> Result<Self> {
        if !g.is_multilinear() {
            return Err(Error::Parse { offset: 0, message: "polynomial is not multilinear in x1..xn".into() });
        }
        let mut m = MultilinearPoly::new(g.degree());
        for (w, c) in g.terms() {
            m.add_term(w.clone(), c.clone());
        }
        Ok(m)
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::from_general(&GeneralPoly::parse(s)?)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, w: Word, c: Q) {
        debug_assert!(w.len() == self.n && is_permutation_word(&w));
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(w.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&w);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Word, Q> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_general(&self) -> GeneralPoly {
        let mut g = GeneralPoly::zero();
        for (w, c) in &self.coeffs {
            g.add_term(w.clone(), c.clone());
        }
        g
    }

    /// Coefficient vector indexed by lexicographic permutation rank.
    pub fn dense(&self) -> Vec<Q> {
        let mut v = vec![Q::zero(); factorial(self.n)];
        for (w, c) in &self.coeffs {
            v[perm_rank(w)] = c.clone();
        }
        v
    }

    pub fn sparse(&self) -> Vec<(usize, Q)> {
        let mut v: Vec<(usize, Q)> = self.coeffs.iter().map(|(w, c)| (perm_rank(w), c.clone())).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    pub fn from_dense(n: usize, v: &[Q]) -> Self {
        let mut m = MultilinearPoly::new(n);
        for (r, c) in v.iter().enumerate() {
            if !c.is_zero() {
                m.add_term(perm_unrank(n, r), c.clone());
            }
        }
        m
    }

    /// Substitutes `x_i -> x_{perm[i-1]}`.
    pub fn rename(&self, perm: &[u32]) -> Self {
        let mut m = MultilinearPoly::new(self.n);
        for (w, c) in &self.coeffs {
            m.add_term(w.iter().map(|&v| perm[(v - 1) as usize]).collect(), c.clone());
        }
        m
    }

    /// Multiplies on the right by the next variable `x_{n+1}`.
    pub fn times_next(&self) -> Self {
        let mut m = MultilinearPoly::new(self.n + 1);
        for (w, c) in &self.coeffs {
            let mut w2 = w.clone();
            w2.push(self.n as u32 + 1);
            m.add_term(w2, c.clone());
        }
        m
    }
}

impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_general().fmt(f)
    }
}

/// `St_k = sum_sigma sgn(sigma) x_sigma(1) ... x_sigma(k)`.
pub fn standard_polynomial(k: usize) -> MultilinearPoly {
    let mut m = MultilinearPoly::new(k);
    for w in all_perms(k) {
        let inv = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| w[i] > w[j]).count();
        m.add_term(w, if inv % 2 == 0 { Q::one() } else { -Q::one() });
    }
    m
}

/// Full linearizations of the multihomogeneous components of `f`.
///
/// A variable of degree `d` is replaced by `d` fresh variables in every
/// possible order; fresh variables are numbered by (original variable, copy).
pub fn multilinearize(f: &GeneralPoly) -> Vec<MultilinearPoly> {
    let mut components: BTreeMap<Vec<(u32, usize)>, GeneralPoly> = BTreeMap::new();
    for (w, c) in f.terms() {
        let mut deg: BTreeMap<u32, usize> = BTreeMap::new();
        for &v in w {
            *deg.entry(v).or_insert(0) += 1;
        }
        components.entry(deg.into_iter().collect()).or_default().add_term(w.clone(), c.clone());
    }
    let mut out = Vec::new();
    for (degs, comp) in components {
        let n: usize = degs.iter().map(|d| d.1).sum();
        let mut offset = BTreeMap::new();
        let mut acc = 0u32;
        for &(v, d) in &degs {
            offset.insert(v, acc);
            acc += d as u32;
        }
        let mut m = MultilinearPoly::new(n);
        for (w, c) in comp.terms() {
            // positions of each variable inside the word
            let mut slots: Vec<Vec<usize>> = Vec::new();
            for &(v, _) in &degs {
                slots.push(w.iter().enumerate().filter(|(_, &x)| x == v).map(|(i, _)| i).collect());
            }
            let mut word = vec![0u32; n];
            fill_copies(&degs, &offset, &slots, 0, &mut word, &mut |wd| m.add_term(wd.to_vec(), c.clone()));
        }
        if !m.is_zero() {
            out.push(m);
        }
    }
    out
}

fn fill_copies(
    degs: &[(u32, usize)],
    offset: &BTreeMap<u32, u32>,
    slots: &[Vec<usize>],
    k: usize,
    word: &mut Vec<u32>,
    emit: &mut dyn FnMut(&[u32]),
) {
    if k == degs.len() {
        emit(word);
        return;
    }
    let (v, d) = degs[k];
    let base = offset[&v];
    for p in all_perms(d) {
        for (slot, &copy) in slots[k].iter().zip(&p) {
            word[*slot] = base + copy;
        }
        fill_copies(degs, offset, slots, k + 1, word, emit);
    }
}

/// Enumeration strategy for [`tideal_multilinear_span`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanMode {
    /// Every ordering of the border monomials.
    Full,
    /// Border monomials in increasing variable order only.
    Reduced,
}

/// Spanning set of `P_n ∩ <generators>_T` as sparse integer vectors over the
/// permutation basis.
#[derive(Clone, Debug)]
pub struct TIdealSpan {
    pub n: usize,
    pub mode: SpanMode,
    pub vectors: Vec<Vec<(usize, i64)>>,
    /// Elements generated before deduplication.
    pub generated: usize,
}

impl TIdealSpan {
    pub fn dim_exact(&self, field: PrimeField) -> usize {
        self.exact(field).rank
    }

    pub fn exact(&self, field: PrimeField) -> ExactColumnSpace {
        let rows = factorial(self.n);
        let cols = self.vectors.iter().map(|v| {
            let mut d = vec![0i128; rows];
            for &(i, c) in v {
                d[i] = c as i128;
            }
            d
        });
        exact_column_space(rows, cols, field)
    }

    pub fn echelon(&self, field: PrimeField) -> SparseModEchelon {
        let mut e = SparseModEchelon::new(field, factorial(self.n));
        for v in &self.vectors {
            let s: Vec<(usize, u64)> = v.iter().map(|&(i, c)| (i, field.from_i64(c))).collect();
            e.insert(&s);
        }
        e
    }

    pub fn dim_mod(&self, field: PrimeField) -> usize {
        self.echelon(field).rank()
    }
}

fn integer_sparse(m: &MultilinearPoly) -> Vec<(usize, i64)> {
    let mut l = BigInt::one();
    for c in m.terms().values() {
        l = l.lcm(c.denom());
    }
    let lq = Q::from_integer(l);
    m.sparse()
        .into_iter()
        .map(|(i, c)| (i, (c * &lq).to_integer().to_i64().expect("coefficient fits in i64")))
        .collect()
}

fn primitive(mut v: Vec<(usize, i64)>) -> Vec<(usize, i64)> {
    v.sort_by_key(|e| e.0);
    let mut g = 0i64;
    for &(_, c) in &v {
        g = g.gcd(&c);
    }
    if g == 0 {
        return v;
    }
    if v[0].1 < 0 {
        g = -g;
    }
    v.into_iter().map(|(i, c)| (i, c / g)).collect()
}

/// Compositions of `n` into `parts` parts with `mins[i]` lower bounds.
fn compositions(n: usize, mins: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rest: usize, mins: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if mins.len() == cur.len() {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let lo = mins[cur.len()];
        let tail: usize = mins[cur.len() + 1..].iter().sum();
        if rest < lo + tail {
            return;
        }
        for x in lo..=rest - tail {
            cur.push(x);
            rec(rest - x, mins, cur, out);
            cur.pop();
        }
    }
    rec(n, mins, &mut cur, &mut out);
    out
}

/// Elements `w0 g(m_1, ..., m_d) w1` of `P_n` for every multilinearized
/// generator `g`, deduplicated up to scalars.
pub fn tideal_multilinear_span(generators: &[GeneralPoly], n: usize, mode: SpanMode) -> TIdealSpan {
    let mut lin: Vec<(MultilinearPoly, Vec<(Word, i64)>)> = Vec::new();
    for g in generators {
        for m in multilinearize(g) {
            let ints = integer_sparse(&m);
            let terms: Vec<(Word, i64)> = ints.into_iter().map(|(r, c)| (perm_unrank(m.degree(), r), c)).collect();
            lin.push((m, terms));
        }
    }
    let perms = all_perms(n);
    let mut seen: HashSet<Vec<(usize, i64)>> = HashSet::new();
    let mut vectors = Vec::new();
    let mut generated = 0;
    for (g, terms) in &lin {
        let d = g.degree();
        if d > n || d == 0 {
            continue;
        }
        let mut mins = vec![0usize];
        mins.extend(std::iter::repeat(1).take(d));
        mins.push(0);
        let comps = compositions(n, &mins);
        for p in &perms {
            for comp in &comps {
                let mut cuts = Vec::with_capacity(comp.len() + 1);
                let mut acc = 0;
                cuts.push(0);
                for &c in comp {
                    acc += c;
                    cuts.push(acc);
                }
                let w0 = &p[cuts[0]..cuts[1]];
                let w1 = &p[cuts[d + 1]..cuts[d + 2]];
                if mode == SpanMode::Reduced && !(is_increasing(w0) && is_increasing(w1)) {
                    continue;
                }
                generated += 1;
                let mut v: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
                for (tw, c) in terms {
                    let mut word: Word = Vec::with_capacity(n);
                    word.extend_from_slice(w0);
                    for &y in tw {
                        word.extend_from_slice(&p[cuts[y as usize]..cuts[y as usize + 1]]);
                    }
                    word.extend_from_slice(w1);
                    v.push((perm_rank(&word), *c));
                }
                let v = primitive(v);
                if seen.insert(v.clone()) {
                    vectors.push(v);
                }
            }
        }
    }
    TIdealSpan { n, mode, vectors, generated }
}

fn is_increasing(w: &[u32]) -> bool {
    w.windows(2).all(|x| x[0] < x[1])
}

/// Outcome of one congruence check modulo `<[x1,x2,x3]x4>_T`.
#[derive(Clone, Debug)]
pub struct RewriteEntry {
    pub name: String,
    pub polynomial: String,
    pub member: bool,
    /// `Some(true)` when membership is claimed, `None` when only reported.
    pub claimed: Option<bool>,
}

/// Checks the two congruences `[x1,x2]x3x4 ≡ x3[x1,x2]x4` and
/// `[x1,x2][x3,x4]x5 + [x1,x3][x2,x4]x5 ≡ 0` modulo the consequences of
/// `[x1,x2,x3]x4`, padding with trailing variables up to degree `n`.
pub fn rewrite_check(n: usize, field: PrimeField) -> Result<Vec<RewriteEntry>> {
    if !(4..=5).contains(&n) {
        return Err(Error::ResourceCap(format!("rewrite check runs at degree 4 or 5, got {n}")));
    }
    let gen = GeneralPoly::parse("[x1,x2,x3]x4")?;
    let span = tideal_multilinear_span(&[gen], n, SpanMode::Reduced).exact(field);
    let pad = |s: &str| -> Result<MultilinearPoly> {
        let mut m = MultilinearPoly::parse(s)?;
        while m.degree() < n {
            m = m.times_next();
        }
        Ok(m)
    };
    let mut out = Vec::new();
    let mut push = |name: &str, s: &str, claimed: Option<bool>| -> Result<()> {
        let m = pad(s)?;
        if m.degree() != n {
            return Ok(());
        }
        out.push(RewriteEntry { name: name.into(), polynomial: m.to_string(), member: span.contains(&m.dense()), claimed });
        Ok(())
    };
    push("commutator slides past a middle variable", "[x1,x2]x3x4 - x3[x1,x2]x4", Some(true))?;
    push("commutator pair antisymmetry", "[x1,x2][x3,x4]x5 + [x1,x3][x2,x4]x5", Some(true))?;
    push("commutator moved to the end", "[x1,x2]x3x4 - x3x4[x1,x2]", None)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use proptest::prelude::*;

    fn gp(s: &str) -> GeneralPoly {
        GeneralPoly::parse(s).unwrap()
    }

    #[test]
    fn left_normed_triple_commutator() {
        let p = gp("[x1,x2,x3]");
        let want = gp("x1x2x3 - x2x1x3 - x3x1x2 + x3x2x1");
        assert_eq!(p, want);
        assert_eq!(p, gp("[[x1,x2],x3]"));
    }

    #[test]
    fn product_of_commutators_has_four_words() {
        let p = gp("[x1,x2][x3,x4]");
        assert_eq!(p.len(), 4);
        assert_eq!(p, gp("x1x2x3x4 - x1x2x4x3 - x2x1x3x4 + x2x1x4x3"));
    }

    #[test]
    fn standard_polynomial_terms() {
        let s = gp("St4");
        assert_eq!(s.len(), 24);
        assert!(s.terms().values().all(|c| c.abs().is_one()));
        assert_eq!(gp("St_2"), gp("[x1,x2]"));
    }

    #[test]
    fn parse_errors() {
        assert!(GeneralPoly::parse("[x1]").is_err());
        assert!(GeneralPoly::parse("x0").is_err());
        assert!(GeneralPoly::parse("[x1,x2").is_err());
        assert!(GeneralPoly::parse("x1 +").is_err());
        assert!(GeneralPoly::parse("x1)").is_err());
    }

    #[test]
    fn scalars_and_powers() {
        assert_eq!(gp("2x1 - 1/2 x1"), GeneralPoly::monomial(vec![1], Q::new(3.into(), 2.into())));
        assert_eq!(gp("x1^2"), gp("x1x1"));
        assert_eq!(gp("(x1+x2)^2").len(), 4);
    }

    #[test]
    fn tree_detection() {
        assert!(Expr::parse("x1[x2,x3][x4,x5,x6]x7").unwrap().as_tree().is_some());
        assert!(Expr::parse("[[x1,x2,x3][x4,x5,x6],x7]").unwrap().as_tree().is_some());
        assert!(Expr::parse("[x1,x1]").unwrap().as_tree().is_none());
        assert!(Expr::parse("St4").unwrap().as_tree().is_none());
        assert!(Expr::parse("[[x1,x2]^2,x3]").unwrap().as_tree().is_none());
    }

    #[test]
    fn ranks_follow_lexicographic_order() {
        let ps = all_perms(4);
        assert_eq!(ps[0], vec![1, 2, 3, 4]);
        assert_eq!(ps[23], vec![4, 3, 2, 1]);
        for (i, p) in ps.iter().enumerate() {
            assert_eq!(perm_rank(p), i);
        }
        let mut sorted = ps.clone();
        sorted.sort();
        assert_eq!(sorted, ps);
    }

    #[test]
    fn square_polarizes() {
        let ms = multilinearize(&gp("x1^2"));
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].to_general(), gp("x1x2 + x2x1"));
    }

    #[test]
    fn multilinear_input_is_fixed() {
        let f = gp("[x1,x2]x3");
        let ms = multilinearize(&f);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].to_general(), f);
    }

    #[test]
    fn squared_commutator_bracket_linearizes_to_degree_five() {
        let ms = multilinearize(&gp("[[x1,x2]^2,x3]"));
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].degree(), 5);
        // oracle: polarize symbolically by substituting sums and keeping the
        // multilinear part
        let sub = gp("[[x1+x2,x3+x4]^2,x5]");
        let mut want = MultilinearPoly::new(5);
        for (w, c) in sub.terms() {
            if is_permutation_word(w) && w.len() == 5 {
                want.add_term(w.clone(), c.clone());
            }
        }
        assert_eq!(ms[0], want);
        assert!(ms[0].terms().keys().all(|w| is_permutation_word(w)));
    }

    #[test]
    fn mixed_degrees_split_into_components() {
        let ms = multilinearize(&gp("x1x1x2 + x2x3"));
        assert_eq!(ms.len(), 2);
        let degs: Vec<usize> = ms.iter().map(|m| m.degree()).collect();
        assert!(degs.contains(&3) && degs.contains(&2));
    }

    #[test]
    fn generator_above_degree_gives_zero_span() {
        let s = tideal_multilinear_span(&[gp("[x1,x2,x3]x4")], 3, SpanMode::Full);
        assert!(s.vectors.is_empty());
    }

    #[test]
    fn rewrite_congruences_hold() {
        let f = PrimeField::new(1073741827);
        for n in [4, 5] {
            for e in rewrite_check(n, f).unwrap() {
                if e.claimed == Some(true) {
                    assert!(e.member, "{} at n={n}", e.name);
                }
            }
        }
    }

    #[test]
    fn dense_roundtrip() {
        let m = MultilinearPoly::parse("[x1,x2][x3,x4] + 3x4x3x2x1").unwrap();
        assert_eq!(MultilinearPoly::from_dense(4, &m.dense()), m);
        assert_eq!(m.terms().get(&vec![4, 3, 2, 1]).unwrap(), &q(3));
    }

    proptest! {
        #[test]
        fn unrank_inverts_rank(n in 1usize..7, seed in any::<u64>()) {
            let r = (seed as usize) % factorial(n);
            prop_assert_eq!(perm_rank(&perm_unrank(n, r)), r);
        }

        #[test]
        fn nested_commutator_expansion(a in 1u32..5, b in 1u32..5, c in 1u32..5, d in 1u32..5) {
            let nested = gp(&format!("[[x{a},x{b}],[x{c},x{d}]]"));
            let direct = gp(&format!("x{a}x{b}x{c}x{d} - x{b}x{a}x{c}x{d} - x{a}x{b}x{d}x{c} + x{b}x{a}x{d}x{c} - x{c}x{d}x{a}x{b} + x{c}x{d}x{b}x{a} + x{d}x{c}x{a}x{b} - x{d}x{c}x{b}x{a}"));
            prop_assert_eq!(nested, direct);
        }

        #[test]
        fn linearization_is_symmetric_in_copies(k in 2usize..4) {
            // x1^k x2: copies of x1 are x1..xk, x2 becomes x_{k+1}
            let f = gp(&format!("x1^{k}x2"));
            let ms = multilinearize(&f);
            prop_assert_eq!(ms.len(), 1);
            let m = &ms[0];
            prop_assert_eq!(m.degree(), k + 1);
            for p in all_perms(k) {
                let mut full: Vec<u32> = p.clone();
                full.push(k as u32 + 1);
                prop_assert_eq!(&m.rename(&full), m);
            }
        }
    }
}
