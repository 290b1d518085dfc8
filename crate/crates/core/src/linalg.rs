//! Exact and modular linear algebra.
//!
//! Small algebra-level problems (centers, subspace products, quotients) run over
//! `BigRational`. Evaluation matrices with up to `n!` rows run modulo word-sized
//! primes, and [`exact_column_space`] certifies exact ranks by checking a rational
//! left kernel against every column.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::field::{Lazy, PrimeField};

pub type Q = BigRational;

pub fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn zero_vec(n: usize) -> Vec<Q> {
    vec![Q::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Q> {
    let mut v = zero_vec(n);
    v[i] = Q::one();
    v
}

pub fn is_zero(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn add_scaled(acc: &mut [Q], c: &Q, v: &[Q]) {
    if c.is_zero() {
        return;
    }
    for (a, b) in acc.iter_mut().zip(v) {
        if !b.is_zero() {
            *a += c * b;
        }
    }
}

pub fn scale(v: &[Q], c: &Q) -> Vec<Q> {
    v.iter().map(|x| x * c).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Subspace of `Q^len` kept as a reduced row echelon basis.
#[derive(Clone, Debug)]
pub struct RatSpace {
    len: usize,
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl RatSpace {
    pub fn new(len: usize) -> Self {
        RatSpace { len, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn spanned_by<'a, I: IntoIterator<Item = &'a Vec<Q>>>(len: usize, vs: I) -> Self {
        let mut s = RatSpace::new(len);
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after eliminating every pivot coordinate.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !r[p].is_zero() {
                let c = -r[p].clone();
                add_scaled(&mut r, &c, row);
            }
        }
        r
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        is_zero(&self.reduce(v))
    }

    pub fn insert(&mut self, v: &[Q]) -> bool {
        assert_eq!(v.len(), self.len);
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].recip();
        r = scale(&r, &inv);
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let c = -row[p].clone();
                add_scaled(row, &c, &r);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, r);
        true
    }

    pub fn contains_space(&self, other: &RatSpace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    pub fn equals(&self, other: &RatSpace) -> bool {
        self.dim() == other.dim() && self.contains_space(other)
    }

    pub fn sum(&self, other: &RatSpace) -> RatSpace {
        let mut s = self.clone();
        for v in &other.rows {
            s.insert(v);
        }
        s
    }

    pub fn intersection(&self, other: &RatSpace) -> RatSpace {
        // x = a·A = b·B  <=>  (a, -b) in the left kernel of [A; B]
        let mut rows: Vec<Vec<Q>> = self.rows.clone();
        rows.extend(other.rows.iter().map(|r| r.iter().map(|x| -x.clone()).collect()));
        let k = left_kernel(&rows, self.len);
        let mut out = RatSpace::new(self.len);
        for y in k {
            let mut v = zero_vec(self.len);
            for (c, row) in y.iter().zip(&self.rows) {
                add_scaled(&mut v, c, row);
            }
            out.insert(&v);
        }
        out
    }
}

/// Basis of `{x : M x = 0}` for `M` given by rows of length `ncols`.
pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let space = RatSpace::spanned_by(ncols, rows.iter());
    let free: Vec<usize> = (0..ncols).filter(|c| !space.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = zero_vec(ncols);
            x[f] = Q::one();
            for (row, &p) in space.rows.iter().zip(&space.pivots) {
                x[p] = -row[f].clone();
            }
            x
        })
        .collect()
}

/// Basis of `{y : y·rows = 0}`.
pub fn left_kernel(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let m = rows.len();
    let cols: Vec<Vec<Q>> = (0..ncols).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
    nullspace(&cols, m)
}

/// Coefficients expressing `target` in the span of `vectors`, if possible.
pub fn solve_combination(vectors: &[Vec<Q>], target: &[Q]) -> Option<Vec<Q>> {
    let len = target.len();
    let k = vectors.len();
    // columns are the vectors, augmented with -target
    let mut rows: Vec<Vec<Q>> = (0..len)
        .map(|i| {
            let mut r: Vec<Q> = vectors.iter().map(|v| v[i].clone()).collect();
            r.push(-target[i].clone());
            r
        })
        .collect();
    rows.retain(|r| !is_zero(r));
    let ns = nullspace(&rows, k + 1);
    let pick = ns.into_iter().find(|x| !x[k].is_zero())?;
    let inv = pick[k].recip();
    Some(pick[..k].iter().map(|x| x * &inv).collect())
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    RatSpace::spanned_by(first.len(), rows.iter()).dim()
}

/// Incremental column space over `F_p`, with pivot-ordered echelon vectors.
///
/// Vector `k` is zero at pivots `0..k` and one at its own pivot. Reduction runs
/// with deferred reduction, so a full pass costs one multiply-add per entry
/// per basis vector.
#[derive(Clone, Debug)]
pub struct ModEchelon {
    field: PrimeField,
    lazy: Lazy,
    len: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    is_pivot: Vec<bool>,
}

impl ModEchelon {
    pub fn new(field: PrimeField, len: usize) -> Self {
        ModEchelon {
            field,
            lazy: Lazy::new(&field),
            len,
            basis: Vec::new(),
            pivots: Vec::new(),
            is_pivot: vec![false; len],
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        debug_assert_eq!(v.len(), self.len);
        let f = self.field;
        let lazy = self.lazy;
        let mut acc: Vec<u64> = v.to_vec();
        for (b, &piv) in self.basis.iter().zip(&self.pivots) {
            let c = f.reduce(acc[piv]);
            if c == 0 {
                continue;
            }
            let m = (f.p() - c) as u32 as u64;
            for (a, &x) in acc.iter_mut().zip(b.iter()) {
                *a = lazy.fold(*a + m * x as u64);
            }
        }
        for a in acc.iter_mut() {
            *a = f.reduce(*a);
        }
        acc
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v` (entries already reduced) and reports whether the rank grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let f = self.field;
        let inv = f.inv(r[p]);
        for x in r.iter_mut() {
            *x = f.mul(*x, inv);
        }
        self.pivots.push(p);
        self.is_pivot[p] = true;
        self.basis.push(r.into_iter().map(|x| x as u32).collect());
        true
    }

    /// Random vector orthogonal to every basis vector; a nonzero dot product
    /// with a candidate proves the candidate lies outside the span.
    pub fn probe<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let f = self.field;
        let mut y: Vec<u64> = (0..self.len)
            .map(|i| if self.is_pivot[i] { 0 } else { rng.gen_range(0..f.p()) })
            .collect();
        for k in (0..self.basis.len()).rev() {
            let piv = self.pivots[k];
            y[piv] = 0;
            let s = dot(&f, &self.lazy, &y, &self.basis[k]);
            y[piv] = f.neg(s);
        }
        y
    }

    /// Basis of the annihilator of the column space.
    pub fn left_kernel(&self) -> Vec<Vec<u64>> {
        let f = self.field;
        (0..self.len)
            .filter(|&i| !self.is_pivot[i])
            .map(|i| {
                let mut y = vec![0u64; self.len];
                y[i] = 1;
                for k in (0..self.basis.len()).rev() {
                    let piv = self.pivots[k];
                    let s = dot(&f, &self.lazy, &y, &self.basis[k]);
                    y[piv] = f.neg(s);
                }
                y
            })
            .collect()
    }

    pub fn contains_space(&self, other: &ModEchelon) -> bool {
        other.basis.iter().all(|b| {
            let v: Vec<u64> = b.iter().map(|&x| x as u64).collect();
            self.contains(&v)
        })
    }

    pub fn equals(&self, other: &ModEchelon) -> bool {
        self.rank() == other.rank() && self.contains_space(other)
    }
}

pub fn dot(f: &PrimeField, lazy: &Lazy, y: &[u64], b: &[u32]) -> u64 {
    let mut acc = 0u64;
    for (&a, &x) in y.iter().zip(b) {
        acc = lazy.fold(acc + a * x as u64);
    }
    f.reduce(acc)
}

pub fn dot_u64(f: &PrimeField, lazy: &Lazy, y: &[u64], b: &[u64]) -> u64 {
    let mut acc = 0u64;
    for (&a, &x) in y.iter().zip(b) {
        acc = lazy.fold(acc + a * x);
    }
    f.reduce(acc)
}

/// Sparse incremental row space over `F_p`, for very sparse spanning sets.
#[derive(Clone)]
pub struct SparseModEchelon {
    field: PrimeField,
    len: usize,
    rows: HashMap<usize, Vec<(usize, u64)>>,
    scratch: Vec<u64>,
}

impl SparseModEchelon {
    pub fn new(field: PrimeField, len: usize) -> Self {
        SparseModEchelon { field, len, rows: HashMap::new(), scratch: vec![0; len] }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    fn reduce_scratch(&mut self, start: usize) {
        let f = self.field;
        for i in start..self.len {
            let c = self.scratch[i];
            if c == 0 {
                continue;
            }
            if let Some(row) = self.rows.get(&i) {
                let m = f.neg(c);
                for &(j, x) in row {
                    self.scratch[j] = f.add(self.scratch[j], f.mul(m, x));
                }
            }
        }
    }

    /// Adds a sparse vector; returns true when the rank grew.
    pub fn insert(&mut self, v: &[(usize, u64)]) -> bool {
        let Some(start) = v.iter().map(|e| e.0).min() else { return false };
        for &(i, x) in v {
            self.scratch[i] = self.field.add(self.scratch[i], x);
        }
        self.reduce_scratch(start);
        let mut out: Vec<(usize, u64)> = Vec::new();
        for i in start..self.len {
            if self.scratch[i] != 0 {
                out.push((i, self.scratch[i]));
                self.scratch[i] = 0;
            }
        }
        let Some(&(lead, c)) = out.first() else { return false };
        let inv = self.field.inv(c);
        for e in out.iter_mut() {
            e.1 = self.field.mul(e.1, inv);
        }
        self.rows.insert(lead, out);
        true
    }

    pub fn contains(&mut self, v: &[(usize, u64)]) -> bool {
        let Some(start) = v.iter().map(|e| e.0).min() else { return true };
        for &(i, x) in v {
            self.scratch[i] = self.field.add(self.scratch[i], x);
        }
        self.reduce_scratch(start);
        let mut zero = true;
        for i in start..self.len {
            if self.scratch[i] != 0 {
                zero = false;
                self.scratch[i] = 0;
            }
        }
        zero
    }
}

/// Exact column space of an integer matrix with `rows` rows.
#[derive(Clone, Debug)]
pub struct ExactColumnSpace {
    pub rows: usize,
    pub rank: usize,
    /// Primitive integer basis of the left kernel `{y : y·col = 0}`.
    pub kernel: Vec<Vec<BigInt>>,
    /// Distinct nonzero columns examined.
    pub distinct_columns: usize,
}

impl ExactColumnSpace {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    /// Whether `v` lies in the column space.
    pub fn contains(&self, v: &[Q]) -> bool {
        self.kernel.iter().all(|y| {
            let mut s = Q::zero();
            for (a, b) in y.iter().zip(v) {
                if !b.is_zero() && !a.is_zero() {
                    s += Q::from_integer(a.clone()) * b;
                }
            }
            s.is_zero()
        })
    }

    pub fn kernel_space(&self) -> RatSpace {
        let vs: Vec<Vec<Q>> = self
            .kernel
            .iter()
            .map(|k| k.iter().map(|x| Q::from_integer(x.clone())).collect())
            .collect();
        RatSpace::spanned_by(self.rows, vs.iter())
    }
}

fn normalize_column(mut c: Vec<i128>) -> Option<Vec<i128>> {
    let first = c.iter().position(|&x| x != 0)?;
    let mut g = 0i128;
    for &x in &c {
        g = g.gcd(&x);
    }
    let s = if c[first] < 0 { -g } else { g };
    for x in c.iter_mut() {
        *x /= s;
    }
    Some(c)
}

pub fn to_primitive(v: &[Q]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

fn annihilates_exact(y: &[BigInt], y_small: &Option<Vec<i128>>, col: &[i128]) -> bool {
    if let Some(ys) = y_small {
        let mut acc: i128 = 0;
        let mut overflow = false;
        for (&a, &b) in ys.iter().zip(col) {
            if b == 0 || a == 0 {
                continue;
            }
            match a.checked_mul(b).and_then(|t| acc.checked_add(t)) {
                Some(s) => acc = s,
                None => {
                    overflow = true;
                    break;
                }
            }
        }
        if !overflow {
            return acc == 0;
        }
    }
    let mut acc = BigInt::zero();
    for (a, &b) in y.iter().zip(col) {
        if b != 0 {
            acc += a * BigInt::from(b);
        }
    }
    acc.is_zero()
}

/// Exact rank and left kernel of the matrix whose columns are `columns`.
///
/// Pivot columns are chosen modulo a prime (independence mod p implies
/// independence over Q); the rational left kernel of the pivot block is then
/// checked against every column, and any column it fails to annihilate joins
/// the pivots before repeating.
pub fn exact_column_space<I>(rows: usize, columns: I, field: PrimeField) -> ExactColumnSpace
where
    I: IntoIterator<Item = Vec<i128>>,
{
    let mut seen: HashSet<Vec<i128>> = HashSet::new();
    let mut distinct: Vec<Vec<i128>> = Vec::new();
    for c in columns {
        assert_eq!(c.len(), rows);
        if let Some(n) = normalize_column(c) {
            if seen.insert(n.clone()) {
                distinct.push(n);
            }
        }
    }
    let mut ech = ModEchelon::new(field, rows);
    let mut pivot_cols: Vec<usize> = Vec::new();
    for (idx, c) in distinct.iter().enumerate() {
        let v: Vec<u64> = c.iter().map(|&x| field.from_i128(x)).collect();
        if ech.insert(&v) {
            pivot_cols.push(idx);
            if ech.rank() == rows {
                break;
            }
        }
    }
    loop {
        let block: Vec<Vec<Q>> = pivot_cols
            .iter()
            .map(|&i| distinct[i].iter().map(|&x| Q::from_integer(BigInt::from(x))).collect())
            .collect();
        // left kernel of the rows x |pivots| block = nullspace of its transpose
        let kernel: Vec<Vec<BigInt>> = nullspace(&block, rows).iter().map(|k| to_primitive(k)).collect();
        let small: Vec<Option<Vec<i128>>> = kernel
            .iter()
            .map(|k| k.iter().map(|x| x.to_i128()).collect::<Option<Vec<i128>>>())
            .collect();
        let mut extra: Vec<usize> = Vec::new();
        let pivot_set: HashSet<usize> = pivot_cols.iter().copied().collect();
        for (idx, c) in distinct.iter().enumerate() {
            if pivot_set.contains(&idx) {
                continue;
            }
            let ok = kernel.iter().zip(&small).all(|(y, ys)| annihilates_exact(y, ys, c));
            if !ok {
                extra.push(idx);
                break;
            }
        }
        if extra.is_empty() {
            return ExactColumnSpace { rows, rank: pivot_cols.len(), kernel, distinct_columns: distinct.len() };
        }
        pivot_cols.extend(extra);
    }
}

/// Converts a rational vector to residues, `None` if a denominator vanishes.
pub fn to_mod(f: &PrimeField, v: &[Q]) -> Option<Vec<u64>> {
    v.iter().map(|x| f.from_rational(x)).collect()
}
