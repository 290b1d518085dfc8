//! Finite-dimensional superalgebras given by structure constants.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{self, add_scaled, is_zero, q, solve_combination, unit_vec, zero_vec, RatSpace, Q};

/// Sparse product of two basis elements.
pub type Product = Vec<(usize, Q)>;

/// Kind of a simple graded block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockKind {
    F,
    FPlusCF,
    /// `M_{k,l}(F)`: matrices of size `k+l` with elementary grading `(0^k, 1^l)`.
    Mkl { k: usize, l: usize },
    /// `M_k(F) + c M_k(F)` with `c` odd, central and `c^2 = 1`.
    MkPlusCMk { k: usize },
}

impl BlockKind {
    pub fn parse(s: &str) -> Result<BlockKind> {
        let t = s.trim();
        match t {
            "F" => return Ok(BlockKind::F),
            "F_plus_cF" | "F+cF" => return Ok(BlockKind::FPlusCF),
            _ => {}
        }
        let bad = || Error::Definition(format!("unknown block kind {t:?}"));
        if let Some(rest) = t.strip_prefix("M_") {
            if let Some(k) = rest.strip_suffix("_plus_cM") {
                return Ok(BlockKind::MkPlusCMk { k: k.parse().map_err(|_| bad())? });
            }
            let mut it = rest.split(',');
            let k = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let l = match it.next() {
                Some(x) => x.trim().parse().map_err(|_| bad())?,
                None => 0,
            };
            return Ok(BlockKind::Mkl { k, l });
        }
        Err(bad())
    }

    pub fn name(&self) -> String {
        match self {
            BlockKind::F => "F".into(),
            BlockKind::FPlusCF => "F_plus_cF".into(),
            BlockKind::Mkl { k, l } => format!("M_{k},{l}"),
            BlockKind::MkPlusCMk { k } => format!("M_{k}_plus_cM"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BlockKind::F => 1,
            BlockKind::FPlusCF => 2,
            BlockKind::Mkl { k, l } => (k + l) * (k + l),
            BlockKind::MkPlusCMk { k } => 2 * k * k,
        }
    }

    /// Reference model: parities, structure constants and unit coordinates.
    pub fn reference(&self) -> (Vec<u8>, Vec<Vec<Product>>, Vec<Q>) {
        match *self {
            BlockKind::F => (vec![0], vec![vec![vec![(0, Q::one())]]], vec![Q::one()]),
            BlockKind::FPlusCF => {
                let t = vec![
                    vec![vec![(0, Q::one())], vec![(1, Q::one())]],
                    vec![vec![(1, Q::one())], vec![(0, Q::one())]],
                ];
                (vec![0, 1], t, vec![Q::one(), Q::zero()])
            }
            BlockKind::Mkl { k, l } => {
                let n = k + l;
                let h = |i: usize| u8::from(i >= k);
                let idx = |i: usize, j: usize| i * n + j;
                let mut t = vec![vec![Vec::new(); n * n]; n * n];
                let mut par = vec![0; n * n];
                let mut unit = zero_vec(n * n);
                for i in 0..n {
                    unit[idx(i, i)] = Q::one();
                    for j in 0..n {
                        par[idx(i, j)] = h(i) ^ h(j);
                        for l2 in 0..n {
                            t[idx(i, j)][idx(j, l2)] = vec![(idx(i, l2), Q::one())];
                        }
                    }
                }
                (par, t, unit)
            }
            BlockKind::MkPlusCMk { k } => {
                let m = k * k;
                let idx = |c: usize, i: usize, j: usize| c * m + i * k + j;
                let mut t = vec![vec![Vec::new(); 2 * m]; 2 * m];
                let mut par = vec![0; 2 * m];
                let mut unit = zero_vec(2 * m);
                for i in 0..k {
                    unit[idx(0, i, i)] = Q::one();
                }
                for a in 0..2 {
                    for i in 0..k {
                        for j in 0..k {
                            par[idx(a, i, j)] = a as u8;
                            for b in 0..2 {
                                for l2 in 0..k {
                                    t[idx(a, i, j)][idx(b, j, l2)] = vec![(idx((a + b) % 2, i, l2), Q::one())];
                                }
                            }
                        }
                    }
                }
                (par, t, unit)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimpleBlock {
    pub kind: BlockKind,
    pub basis: Vec<Vec<Q>>,
}

impl SimpleBlock {
    /// Identity element of the block in ambient coordinates.
    pub fn unit(&self) -> Vec<Q> {
        let (_, _, u) = self.kind.reference();
        let mut v = zero_vec(self.basis[0].len());
        for (c, b) in u.iter().zip(&self.basis) {
            add_scaled(&mut v, c, b);
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The odd element `c` of an `F + cF` block.
    pub fn odd_generator(&self) -> Option<&Vec<Q>> {
        match self.kind {
            BlockKind::FPlusCF => self.basis.get(1),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WedderburnData {
    pub blocks: Vec<SimpleBlock>,
    pub radical: Vec<Vec<Q>>,
}

/// Matrix-unit description of the basis, when the algebra came from a
/// presentation.
#[derive(Clone, Debug)]
pub struct MatrixShape {
    pub size: usize,
    /// Entries `(row, col)` (0-based) summed by each basis element.
    pub classes: Vec<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug)]
pub struct SuperAlgebra {
    name: String,
    labels: Vec<String>,
    parity: Vec<u8>,
    table: Vec<Vec<Product>>,
    unit: Option<Vec<Q>>,
    wedderburn: Option<WedderburnData>,
    shape: Option<MatrixShape>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub checks: Vec<(String, bool)>,
    pub failure: Option<String>,
}

impl CheckReport {
    pub fn new() -> Self {
        CheckReport { checks: Vec::new(), failure: None }
    }

    pub fn record(&mut self, name: impl Into<String>, ok: bool) -> bool {
        let name = name.into();
        if !ok && self.failure.is_none() {
            self.failure = Some(name.clone());
        }
        self.checks.push((name, ok));
        ok
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl Default for CheckReport {
    fn default() -> Self {
        Self::new()
    }
}

impl SuperAlgebra {
    /// Builds and validates an algebra from sparse structure constants.
    pub fn from_table(name: &str, labels: Vec<String>, parity: Vec<u8>, table: Vec<Vec<Product>>) -> Result<Self> {
        let d = labels.len();
        if d == 0 {
            return Err(Error::EmptyAlgebra);
        }
        if parity.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: parity.len() });
        }
        if table.len() != d || table.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: table.len() });
        }
        let table: Vec<Vec<Product>> = table
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|p| {
                        let mut v = zero_vec(d);
                        for (k, c) in p {
                            v[k] += c;
                        }
                        v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect()
                    })
                    .collect()
            })
            .collect();
        let mut alg = SuperAlgebra {
            name: name.to_string(),
            labels,
            parity,
            table,
            unit: None,
            wedderburn: None,
            shape: None,
        };
        alg.check_grading()?;
        alg.check_associative()?;
        alg.unit = alg.find_unit();
        Ok(alg)
    }

    /// Skips the associativity scan and unit search; for tables associative
    /// by construction (tensor products of checked algebras).
    pub fn from_table_trusted(
        name: &str,
        labels: Vec<String>,
        parity: Vec<u8>,
        table: Vec<Vec<Product>>,
        unit: Option<Vec<Q>>,
    ) -> Self {
        SuperAlgebra { name: name.to_string(), labels, parity, table, unit, wedderburn: None, shape: None }
    }

    /// Replaces the basis labels.
    pub fn relabeled(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_wedderburn(mut self, w: WedderburnData) -> Self {
        self.wedderburn = Some(w);
        self
    }

    pub fn with_shape(mut self, s: MatrixShape) -> Self {
        self.shape = Some(s);
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parity(&self, i: usize) -> u8 {
        self.parity[i]
    }

    pub fn parities(&self) -> &[u8] {
        &self.parity
    }

    pub fn is_trivially_graded(&self) -> bool {
        self.parity.iter().all(|&p| p == 0)
    }

    pub fn unit(&self) -> Option<&Vec<Q>> {
        self.unit.as_ref()
    }

    pub fn wedderburn(&self) -> Option<&WedderburnData> {
        self.wedderburn.as_ref()
    }

    pub fn shape(&self) -> Option<&MatrixShape> {
        self.shape.as_ref()
    }

    pub fn table(&self) -> &[Vec<Product>] {
        &self.table
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &Product {
        &self.table[i][j]
    }

    pub fn basis(&self, i: usize) -> Vec<Q> {
        unit_vec(self.dim(), i)
    }

    /// Indices of basis elements with the given parity.
    pub fn basis_of_parity(&self, p: u8) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.parity[i] == p).collect()
    }

    pub fn multiply(&self, u: &[Q], v: &[Q]) -> Result<Vec<Q>> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: u.len() });
        }
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        Ok(self.mul(u, v))
    }

    /// Bilinear product; panics on length mismatch.
    pub fn mul(&self, u: &[Q], v: &[Q]) -> Vec<Q> {
        let d = self.dim();
        let mut out = zero_vec(d);
        for (i, a) in u.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in v.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in &self.table[i][j] {
                    out[*k] += &ab * c;
                }
            }
        }
        out
    }

    pub fn mul_all(&self, factors: &[&Vec<Q>]) -> Vec<Q> {
        let mut acc = factors[0].clone();
        for f in &factors[1..] {
            acc = self.mul(&acc, f);
        }
        acc
    }

    /// `uv - (-1)^{pq} vu` for homogeneous `u`, `v` of parities `p`, `q`.
    pub fn supercommutator(&self, u: &[Q], p: u8, v: &[Q], q_: u8) -> Vec<Q> {
        let uv = self.mul(u, v);
        let vu = self.mul(v, u);
        if p & q_ == 1 {
            linalg::add(&uv, &vu)
        } else {
            linalg::sub(&uv, &vu)
        }
    }

    /// Parity of a nonzero homogeneous vector; `Ok(None)` for zero.
    pub fn homogeneous_parity(&self, v: &[Q]) -> Result<Option<u8>> {
        let mut seen: Option<u8> = None;
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match seen {
                None => seen = Some(self.parity[i]),
                Some(p) if p != self.parity[i] => return Err(Error::NotHomogeneous),
                _ => {}
            }
        }
        Ok(seen)
    }

    fn check_grading(&self) -> Result<()> {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let p = self.parity[i] ^ self.parity[j];
                if self.table[i][j].iter().any(|(k, _)| self.parity[*k] != p) {
                    return Err(Error::GradingNotMultiplicative(self.labels[i].clone(), self.labels[j].clone(), p));
                }
            }
        }
        Ok(())
    }

    fn check_associative(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                let ij = &self.table[i][j];
                for k in 0..d {
                    let mut left = zero_vec(d);
                    for (m, c) in ij {
                        for (t, e) in &self.table[*m][k] {
                            left[*t] += c * e;
                        }
                    }
                    let mut right = zero_vec(d);
                    for (m, c) in &self.table[j][k] {
                        for (t, e) in &self.table[i][*m] {
                            right[*t] += c * e;
                        }
                    }
                    if left != right {
                        return Err(Error::NotAssociative(
                            self.labels[i].clone(),
                            self.labels[j].clone(),
                            self.labels[k].clone(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn find_unit(&self) -> Option<Vec<Q>> {
        // u·e_j = e_j and e_j·u = e_j for all j, linear in u
        let d = self.dim();
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for j in 0..d {
            for side in 0..2 {
                for t in 0..d {
                    let mut r = zero_vec(d + 1);
                    for i in 0..d {
                        let prod = if side == 0 { &self.table[i][j] } else { &self.table[j][i] };
                        if let Some((_, c)) = prod.iter().find(|(k, _)| *k == t) {
                            r[i] = c.clone();
                        }
                    }
                    r[d] = if t == j { -Q::one() } else { Q::zero() };
                    if !is_zero(&r) {
                        rows.push(r);
                    }
                }
            }
        }
        let ns = linalg::nullspace(&rows, d + 1);
        let pick = ns.into_iter().find(|x| !x[d].is_zero())?;
        let inv = pick[d].recip();
        Some(pick[..d].iter().map(|x| x * &inv).collect())
    }

    /// Basis of the graded center `Z(A)`, each vector homogeneous.
    pub fn center(&self) -> Vec<Vec<Q>> {
        let mut out = self.commutant(0, false);
        out.extend(self.commutant(1, false));
        out
    }

    /// `Z_q = {v in B^(q) : v b = (-1)^{q p(b)} b v}`; `G^(q) ⊗ Z_q` is the
    /// parity-`q` part of the center of the Grassmann envelope.
    pub fn super_center(&self, q_: u8) -> Vec<Vec<Q>> {
        self.commutant(q_, true)
    }

    fn commutant(&self, q_: u8, signed: bool) -> Vec<Vec<Q>> {
        let idx = self.basis_of_parity(q_);
        if idx.is_empty() {
            return Vec::new();
        }
        let d = self.dim();
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for b in 0..d {
            let sign_minus = signed && (q_ & self.parity[b]) == 1;
            for t in 0..d {
                let mut r = zero_vec(idx.len());
                for (col, &i) in idx.iter().enumerate() {
                    let vb = coeff(&self.table[i][b], t);
                    let bv = coeff(&self.table[b][i], t);
                    r[col] = if sign_minus { vb + bv } else { vb - bv };
                }
                if !is_zero(&r) {
                    rows.push(r);
                }
            }
        }
        linalg::nullspace(&rows, idx.len())
            .into_iter()
            .map(|x| {
                let mut v = zero_vec(d);
                for (col, &i) in idx.iter().enumerate() {
                    v[i] = x[col].clone();
                }
                v
            })
            .collect()
    }

    pub fn is_central(&self, v: &[Q]) -> bool {
        (0..self.dim()).all(|b| {
            let e = self.basis(b);
            self.mul(v, &e) == self.mul(&e, v)
        })
    }

    /// `v b = (-1)^{q p(b)} b v` for every basis element `b`.
    pub fn super_commutes(&self, q_: u8, v: &[Q]) -> bool {
        (0..self.dim()).all(|b| {
            let e = self.basis(b);
            let vb = self.mul(v, &e);
            let bv = self.mul(&e, v);
            if q_ & self.parity[b] == 1 {
                is_zero(&linalg::add(&vb, &bv))
            } else {
                vb == bv
            }
        })
    }

    /// Span of `{u v : u in U, v in V}`.
    pub fn span_product(&self, u: &RatSpace, v: &RatSpace) -> RatSpace {
        let mut s = RatSpace::new(self.dim());
        for a in u.basis() {
            for b in v.basis() {
                s.insert(&self.mul(a, b));
            }
        }
        s
    }

    /// Smallest subalgebra containing `gens`.
    pub fn generated_subalgebra(&self, gens: &[Vec<Q>]) -> RatSpace {
        let mut s = RatSpace::spanned_by(self.dim(), gens.iter());
        loop {
            let basis = s.basis().to_vec();
            let mut grew = false;
            for a in &basis {
                for b in &basis {
                    grew |= s.insert(&self.mul(a, b));
                }
            }
            if !grew {
                return s;
            }
        }
    }

    /// Two-sided ideal of the subalgebra `sub` generated by `gens`.
    pub fn ideal_in(&self, sub: &RatSpace, gens: &[Vec<Q>]) -> RatSpace {
        let mut s = RatSpace::spanned_by(self.dim(), gens.iter());
        loop {
            let basis = s.basis().to_vec();
            let mut grew = false;
            for a in &basis {
                for b in sub.basis() {
                    grew |= s.insert(&self.mul(a, b));
                    grew |= s.insert(&self.mul(b, a));
                }
            }
            if !grew {
                return s;
            }
        }
    }

    /// `(span(reps) + I) / I` in the coset basis `reps`; `I` must be an ideal
    /// of that span and the representatives homogeneous.
    pub fn quotient_on(&self, name: &str, reps: &[Vec<Q>], ideal: &RatSpace, labels: Vec<String>) -> Result<SuperAlgebra> {
        let m = reps.len();
        let mut cols: Vec<Vec<Q>> = reps.to_vec();
        cols.extend(ideal.basis().iter().cloned());
        if linalg::rank(&cols) != cols.len() {
            return Err(Error::NotClosed("representatives are dependent modulo the ideal".into()));
        }
        let mut parity = Vec::with_capacity(m);
        for (i, r) in reps.iter().enumerate() {
            match self.homogeneous_parity(r)? {
                Some(p) => parity.push(p),
                None => return Err(Error::NotClosed(format!("representative {i} is zero"))),
            }
        }
        let mut table: Vec<Vec<Product>> = vec![vec![Vec::new(); m]; m];
        for a in 0..m {
            for b in 0..m {
                let p = self.mul(&reps[a], &reps[b]);
                let c = coordinates(&cols, &p)
                    .ok_or_else(|| Error::NotClosed(format!("{} * {} leaves the span", labels[a], labels[b])))?;
                table[a][b] = c.into_iter().take(m).enumerate().filter(|(_, x)| !x.is_zero()).collect();
            }
        }
        SuperAlgebra::from_table(name, labels, parity, table)
    }

    /// Structure constants scaled to integers: returns the table times `scale`.
    pub fn integer_table(&self) -> (Vec<Vec<Vec<(usize, i128)>>>, i128) {
        let mut l = BigInt::one();
        for row in &self.table {
            for p in row {
                for (_, c) in p {
                    l = l.lcm(c.denom());
                }
            }
        }
        let lq = Q::from_integer(l.clone());
        let t = self
            .table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| {
                        p.iter()
                            .map(|(k, c)| (*k, (c * &lq).to_integer().to_i128().expect("structure constant fits in i128")))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        (t, l.to_i128().expect("denominator fits"))
    }

    /// Dense left-multiplication matrices `L_i[t][j] = coeff of e_t in e_i e_j`
    /// reduced modulo `f`.
    pub fn left_mult_mod(&self, f: &PrimeField) -> Vec<Vec<Vec<u64>>> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut m = vec![vec![0u64; d]; d];
                for j in 0..d {
                    for (t, c) in &self.table[i][j] {
                        m[*t][j] = f.from_rational(c).expect("denominator invertible mod p");
                    }
                }
                m
            })
            .collect()
    }

    /// Human-readable linear combination of basis labels.
    pub fn format(&self, v: &[Q]) -> String {
        format_combination(v, &self.labels)
    }

    /// Parses a linear combination of labels or matrix units.
    pub fn parse_element(&self, s: &str) -> Result<Vec<Q>> {
        crate::definition::parse_element(self, s)
    }

    pub fn span(&self, vectors: &[Vec<Q>]) -> RatSpace {
        RatSpace::spanned_by(self.dim(), vectors.iter())
    }

    /// Checks the claimed Wedderburn data and names the first violated property.
    pub fn verify_wedderburn(&self, data: &WedderburnData) -> CheckReport {
        verify_wedderburn(self, data)
    }
}

fn coeff(p: &Product, t: usize) -> Q {
    p.iter().find(|(k, _)| *k == t).map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
}

pub fn format_combination(v: &[Q], labels: &[String]) -> String {
    let mut s = String::new();
    for (c, l) in v.iter().zip(labels) {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { "-" } else { "+" });
        }
        if !a.is_one() {
            let _ = write!(s, "{a}*");
        }
        let wrap = l.contains('+') || l.contains('-');
        if wrap && (!a.is_one() || v.iter().filter(|x| !x.is_zero()).count() > 1) {
            let _ = write!(s, "({l})");
        } else {
            s.push_str(l);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

pub fn verify_wedderburn(alg: &SuperAlgebra, data: &WedderburnData) -> CheckReport {
    let mut rep = CheckReport::new();
    let d = alg.dim();
    let mut units: Vec<Vec<Q>> = Vec::new();
    for (bi, block) in data.blocks.iter().enumerate() {
        let (par, table, unit) = block.kind.reference();
        if !rep.record(format!("block {bi} has {} basis vectors", par.len()), block.basis.len() == par.len()) {
            return rep;
        }
        let homog = block
            .basis
            .iter()
            .zip(&par)
            .all(|(b, &p)| b.len() == d && matches!(alg.homogeneous_parity(b), Ok(Some(x)) if x == p));
        if !rep.record(format!("block {bi} basis homogeneous with reference parities"), homog) {
            return rep;
        }
        let mut matches = true;
        'outer: for i in 0..par.len() {
            for j in 0..par.len() {
                let got = alg.mul(&block.basis[i], &block.basis[j]);
                let mut want = zero_vec(d);
                for (k, c) in &table[i][j] {
                    add_scaled(&mut want, c, &block.basis[*k]);
                }
                if got != want {
                    matches = false;
                    break 'outer;
                }
            }
        }
        if !rep.record(format!("block {bi} structure constants match {}", block.kind.name()), matches) {
            return rep;
        }
        let mut u = zero_vec(d);
        for (c, b) in unit.iter().zip(&block.basis) {
            add_scaled(&mut u, c, b);
        }
        units.push(u);
    }
    let mut orth = true;
    for i in 0..units.len() {
        for j in 0..units.len() {
            if i != j && !is_zero(&alg.mul(&units[i], &units[j])) {
                orth = false;
            }
        }
    }
    if !rep.record("block idempotents orthogonal", orth) {
        return rep;
    }
    let rad = RatSpace::spanned_by(d, data.radical.iter());
    let homog = data.radical.iter().all(|v| alg.homogeneous_parity(v).is_ok());
    if !rep.record("radical basis homogeneous", homog) {
        return rep;
    }
    let mut ideal = true;
    for j in rad.basis() {
        for b in 0..d {
            let e = alg.basis(b);
            if !rad.contains(&alg.mul(j, &e)) || !rad.contains(&alg.mul(&e, j)) {
                ideal = false;
            }
        }
    }
    if !rep.record("radical is a two-sided ideal", ideal) {
        return rep;
    }
    let mut power = rad.clone();
    let mut steps = 1;
    while power.dim() > 0 && steps <= d {
        power = alg.span_product(&power, &rad);
        steps += 1;
    }
    if !rep.record("radical is nilpotent", power.dim() == 0) {
        return rep;
    }
    let mut all: Vec<Vec<Q>> = data.blocks.iter().flat_map(|b| b.basis.iter().cloned()).collect();
    all.extend(data.radical.iter().cloned());
    let r = linalg::rank(&all);
    rep.record("blocks and radical form a direct sum equal to the algebra", all.len() == d && r == d);
    rep
}

/// Coordinates of `v` with respect to independent `basis` vectors.
pub fn coordinates(basis: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    if is_zero(v) {
        return Some(zero_vec(basis.len()));
    }
    solve_combination(basis, v)
}

pub fn q_vec(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&x| q(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_dim_with(c_sq: i64) -> Result<SuperAlgebra> {
        let one = |k: usize| vec![(k, Q::one())];
        let t = vec![vec![one(0), one(1)], vec![one(1), vec![(0, q(c_sq))]]];
        SuperAlgebra::from_table("t", vec!["u".into(), "c".into()], vec![0, 1], t)
    }

    #[test]
    fn f_plus_cf_has_unit_and_center() {
        let a = two_dim_with(1).unwrap();
        assert_eq!(a.unit().unwrap(), &q_vec(&[1, 0]));
        assert_eq!(a.center().len(), 2);
        // c anticommutes with itself in the super sense: c c + c c != 0
        assert_eq!(a.super_center(1).len(), 0);
        assert_eq!(a.super_center(0).len(), 1);
    }

    #[test]
    fn non_associative_table_is_rejected() {
        // e0 e1 = e2, e1 e2 = e0, everything else zero: (e0 e1) e2 = e2 e2 = 0,
        // e0 (e1 e2) = e0 e0 = 0; then (e1 e2) e1 = e0 e1 = e2 but e1 (e2 e1) = 0.
        let one = |k: usize| vec![(k, Q::one())];
        let mut t = vec![vec![Vec::new(); 3]; 3];
        t[0][1] = one(2);
        t[1][2] = one(0);
        let r = SuperAlgebra::from_table("bad", vec!["a".into(), "b".into(), "c".into()], vec![0; 3], t);
        assert!(matches!(r, Err(Error::NotAssociative(..))));
    }

    #[test]
    fn grading_violation_is_rejected() {
        let one = |k: usize| vec![(k, Q::one())];
        let t = vec![vec![one(0), one(1)], vec![one(1), one(1)]];
        let r = SuperAlgebra::from_table("bad", vec!["u".into(), "c".into()], vec![0, 1], t);
        assert!(matches!(r, Err(Error::GradingNotMultiplicative(..))));
    }

    #[test]
    fn reference_models_are_associative() {
        for kind in [
            BlockKind::F,
            BlockKind::FPlusCF,
            BlockKind::Mkl { k: 2, l: 0 },
            BlockKind::Mkl { k: 1, l: 1 },
            BlockKind::Mkl { k: 2, l: 1 },
            BlockKind::MkPlusCMk { k: 2 },
        ] {
            let (par, t, unit) = kind.reference();
            let labels = (0..par.len()).map(|i| format!("b{i}")).collect();
            let a = SuperAlgebra::from_table("ref", labels, par, t).unwrap();
            assert_eq!(a.dim(), kind.dim());
            assert_eq!(a.unit().unwrap(), &unit);
        }
    }

    #[test]
    fn block_kind_names_roundtrip() {
        for kind in [BlockKind::F, BlockKind::FPlusCF, BlockKind::Mkl { k: 1, l: 1 }, BlockKind::MkPlusCMk { k: 2 }] {
            assert_eq!(BlockKind::parse(&kind.name()).unwrap(), kind);
        }
    }

    #[test]
    fn formatting_combinations() {
        let labels: Vec<String> = vec!["e11+e44".into(), "e12".into()];
        assert_eq!(format_combination(&q_vec(&[1, 0]), &labels), "e11+e44");
        assert_eq!(format_combination(&q_vec(&[1, -2]), &labels), "(e11+e44)-2*e12");
        assert_eq!(format_combination(&q_vec(&[0, 0]), &labels), "0");
    }
}
