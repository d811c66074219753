//! Exact Smith normal form of sparse integer matrices.
//!
//! Elimination uses arbitrary-precision integers with minimal-absolute-value
//! pivoting (ties broken by fill estimate, then by index) and can track any
//! of the four transforms U, U^-1, V, V^-1 with U * A * V = S. The matrices
//! here are boundary operators and small pairing/linking matrices, so the
//! sparse row/column-index representation keeps the oracle runs tractable.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Sparse integer matrix with a row-major value store and a column index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseIntMat {
    nrows: usize,
    ncols: usize,
    rows: Vec<BTreeMap<u32, BigInt>>,
    cols: Vec<BTreeSet<u32>>,
}

impl SparseIntMat {
    pub fn zero(nrows: usize, ncols: usize) -> SparseIntMat {
        SparseIntMat {
            nrows,
            ncols,
            rows: vec![BTreeMap::new(); nrows],
            cols: vec![BTreeSet::new(); ncols],
        }
    }

    pub fn identity(n: usize) -> SparseIntMat {
        let mut m = SparseIntMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, i64)]) -> SparseIntMat {
        let mut m = SparseIntMat::zero(nrows, ncols);
        for &(r, c, v) in triplets {
            let cur = m.get(r, c) + v;
            m.set(r, c, cur);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        self.rows[r].get(&(c as u32)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        if v.is_zero() {
            if self.rows[r].remove(&(c as u32)).is_some() {
                self.cols[c].remove(&(r as u32));
            }
        } else {
            self.rows[r].insert(c as u32, v);
            self.cols[c].insert(r as u32);
        }
    }

    pub fn row(&self, r: usize) -> &BTreeMap<u32, BigInt> {
        &self.rows[r]
    }

    pub fn col_rows(&self, c: usize) -> &BTreeSet<u32> {
        &self.cols[c]
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.rows[r].len()
    }
    pub fn col_nnz(&self, c: usize) -> usize {
        self.cols[c].len()
    }

    /// row[to] += q * row[from]
    pub fn add_row_multiple(&mut self, to: usize, from: usize, q: &BigInt) {
        if q.is_zero() || to == from {
            return;
        }
        let src: Vec<(u32, BigInt)> = self.rows[from].iter().map(|(c, v)| (*c, v * q)).collect();
        for (c, dv) in src {
            let cur = self.rows[to].get(&c).cloned().unwrap_or_else(BigInt::zero) + dv;
            self.set(to, c as usize, cur);
        }
    }

    /// col[to] += q * col[from]
    pub fn add_col_multiple(&mut self, to: usize, from: usize, q: &BigInt) {
        if q.is_zero() || to == from {
            return;
        }
        let src: Vec<(u32, BigInt)> = self.cols[from]
            .iter()
            .map(|&r| (r, &self.rows[r as usize][&(from as u32)] * q))
            .collect();
        for (r, dv) in src {
            let cur = self.get(r as usize, to) + dv;
            self.set(r as usize, to, cur);
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        // columns present in exactly one of the rows change their index entry
        let cols_a: Vec<u32> = self.rows[a].keys().copied().collect();
        let cols_b: Vec<u32> = self.rows[b].keys().copied().collect();
        for &c in &cols_a {
            if !self.rows[b].contains_key(&c) {
                self.cols[c as usize].remove(&(a as u32));
                self.cols[c as usize].insert(b as u32);
            }
        }
        for &c in &cols_b {
            if !self.rows[a].contains_key(&c) {
                self.cols[c as usize].remove(&(b as u32));
                self.cols[c as usize].insert(a as u32);
            }
        }
        self.rows.swap(a, b);
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let rows_a: Vec<u32> = self.cols[a].iter().copied().collect();
        let rows_b: Vec<u32> = self.cols[b].iter().copied().collect();
        let mut va = Vec::with_capacity(rows_a.len());
        for &r in &rows_a {
            va.push((r, self.rows[r as usize].remove(&(a as u32)).unwrap()));
        }
        let mut vb = Vec::with_capacity(rows_b.len());
        for &r in &rows_b {
            vb.push((r, self.rows[r as usize].remove(&(b as u32)).unwrap()));
        }
        for &r in &rows_a {
            self.cols[a].remove(&r);
        }
        for &r in &rows_b {
            self.cols[b].remove(&r);
        }
        for (r, v) in va {
            self.rows[r as usize].insert(b as u32, v);
            self.cols[b].insert(r);
        }
        for (r, v) in vb {
            self.rows[r as usize].insert(a as u32, v);
            self.cols[a].insert(r);
        }
    }

    pub fn negate_row(&mut self, r: usize) {
        for v in self.rows[r].values_mut() {
            *v = -(&*v);
        }
    }

    pub fn negate_col(&mut self, c: usize) {
        let rows: Vec<u32> = self.cols[c].iter().copied().collect();
        for r in rows {
            let v = self.rows[r as usize].get_mut(&(c as u32)).unwrap();
            *v = -(&*v);
        }
    }

    /// Matrix product, sparse times sparse.
    pub fn mul(&self, other: &SparseIntMat) -> SparseIntMat {
        assert_eq!(self.ncols, other.nrows);
        let mut out = SparseIntMat::zero(self.nrows, other.ncols);
        for r in 0..self.nrows {
            let mut acc: BTreeMap<u32, BigInt> = BTreeMap::new();
            for (&k, v) in &self.rows[r] {
                for (&c, w) in &other.rows[k as usize] {
                    let slot = acc.entry(c).or_insert_with(BigInt::zero);
                    *slot += v * w;
                }
            }
            for (c, v) in acc {
                if !v.is_zero() {
                    out.rows[r].insert(c, v);
                    out.cols[c as usize].insert(r as u32);
                }
            }
        }
        out
    }

    /// Columns `lo..hi` as a new matrix.
    pub fn column_block(&self, lo: usize, hi: usize) -> SparseIntMat {
        let mut out = SparseIntMat::zero(self.nrows, hi - lo);
        for r in 0..self.nrows {
            for (&c, v) in self.rows[r].range(lo as u32..hi as u32) {
                out.set(r, c as usize - lo, v.clone());
            }
        }
        out
    }

    /// Rows `lo..hi` as a new matrix.
    pub fn row_block(&self, lo: usize, hi: usize) -> SparseIntMat {
        let mut out = SparseIntMat::zero(hi - lo, self.ncols);
        for r in lo..hi {
            for (&c, v) in &self.rows[r] {
                out.set(r - lo, c as usize, v.clone());
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseIntMat {
        let mut out = SparseIntMat::zero(self.ncols, self.nrows);
        for r in 0..self.nrows {
            for (&c, v) in &self.rows[r] {
                out.set(c as usize, r, v.clone());
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        for r in 0..self.nrows {
            if self.rows[r].len() != 1 {
                return false;
            }
            match self.rows[r].get(&(r as u32)) {
                Some(v) if v.is_one() => {}
                _ => return false,
            }
        }
        true
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination; meant for the
/// small matrices that show up in pairing and unimodularity checks.
pub fn determinant(m: &SparseIntMat) -> BigInt {
    assert_eq!(m.nrows(), m.ncols());
    let n = m.nrows();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|r| (0..n).map(|c| m.get(r, c)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !a[r][k].is_zero());
            match swap {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = &num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Which transforms to track: `[U, U^-1, V, V^-1]`.
pub type SnfFlags = [bool; 4];

/// `U * A * V = S` with S diagonal under a divisibility chain.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub nrows: usize,
    pub ncols: usize,
    /// nonzero invariant factors, each dividing the next
    pub factors: Vec<BigInt>,
    pub u: Option<SparseIntMat>,
    pub u_inv: Option<SparseIntMat>,
    pub v: Option<SparseIntMat>,
    pub v_inv: Option<SparseIntMat>,
}

impl SnfDecomposition {
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// S as a sparse matrix.
    pub fn s_matrix(&self) -> SparseIntMat {
        let mut s = SparseIntMat::zero(self.nrows, self.ncols);
        for (i, f) in self.factors.iter().enumerate() {
            s.set(i, i, f.clone());
        }
        s
    }
}

struct SnfCalc {
    a: SparseIntMat,
    u: Option<SparseIntMat>,
    u_inv: Option<SparseIntMat>,
    v: Option<SparseIntMat>,
    v_inv: Option<SparseIntMat>,
}

impl SnfCalc {
    fn new(a: SparseIntMat, flags: SnfFlags) -> SnfCalc {
        let (m, n) = (a.nrows(), a.ncols());
        SnfCalc {
            a,
            u: flags[0].then(|| SparseIntMat::identity(m)),
            u_inv: flags[1].then(|| SparseIntMat::identity(m)),
            v: flags[2].then(|| SparseIntMat::identity(n)),
            v_inv: flags[3].then(|| SparseIntMat::identity(n)),
        }
    }

    // row[to] += q * row[from] on A; U tracks the op, U^-1 the inverse op
    fn row_op(&mut self, to: usize, from: usize, q: &BigInt) {
        self.a.add_row_multiple(to, from, q);
        if let Some(u) = &mut self.u {
            u.add_row_multiple(to, from, q);
        }
        if let Some(ui) = &mut self.u_inv {
            ui.add_col_multiple(from, to, &-q);
        }
    }

    fn col_op(&mut self, to: usize, from: usize, q: &BigInt) {
        self.a.add_col_multiple(to, from, q);
        if let Some(v) = &mut self.v {
            v.add_col_multiple(to, from, q);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.add_row_multiple(from, to, &-q);
        }
    }

    fn swap_rows(&mut self, x: usize, y: usize) {
        self.a.swap_rows(x, y);
        if let Some(u) = &mut self.u {
            u.swap_rows(x, y);
        }
        if let Some(ui) = &mut self.u_inv {
            ui.swap_cols(x, y);
        }
    }

    fn swap_cols(&mut self, x: usize, y: usize) {
        self.a.swap_cols(x, y);
        if let Some(v) = &mut self.v {
            v.swap_cols(x, y);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.swap_rows(x, y);
        }
    }

    fn negate_row(&mut self, r: usize) {
        self.a.negate_row(r);
        if let Some(u) = &mut self.u {
            u.negate_row(r);
        }
        if let Some(ui) = &mut self.u_inv {
            ui.negate_col(r);
        }
    }

    /// Reduce row and column of the pivot at (k, k) until the pivot is the
    /// only nonzero entry there. The pivot magnitude strictly decreases on
    /// every retry, so this terminates.
    fn clear_pivot(&mut self, k: usize) {
        'outer: loop {
            // column first
            let rows: Vec<u32> = self
                .a
                .col_rows(k)
                .iter()
                .copied()
                .filter(|&r| r as usize != k)
                .collect();
            for r in rows {
                let p = self.a.get(k, k);
                let val = self.a.get(r as usize, k);
                if val.is_zero() {
                    continue;
                }
                let q = div_nearest(&val, &p);
                self.row_op(r as usize, k, &-q);
                if !self.a.get(r as usize, k).is_zero() {
                    // remainder strictly smaller than the pivot: promote it
                    self.swap_rows(r as usize, k);
                    continue 'outer;
                }
            }
            let cols: Vec<u32> = self.a.row(k).keys().copied().filter(|&c| c as usize != k).collect();
            for c in cols {
                let p = self.a.get(k, k);
                let val = self.a.get(k, c as usize);
                if val.is_zero() {
                    continue;
                }
                let q = div_nearest(&val, &p);
                self.col_op(c as usize, k, &-q);
                if !self.a.get(k, c as usize).is_zero() {
                    self.swap_cols(c as usize, k);
                    continue 'outer;
                }
            }
            if self.a.col_nnz(k) <= 1 && self.a.row_nnz(k) <= 1 {
                return;
            }
        }
    }

    /// Pick a pivot in the active submatrix (rows and cols >= k): smallest
    /// magnitude first, then least fill, then lowest indices.
    fn select_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(BigInt, usize, usize, usize)> = None; // (|v|, fill, r, c)
        // rows ordered by sparsity; scanning a bounded slate of the
        // sparsest rows keeps selection cheap while staying deterministic
        let mut by_nnz: Vec<(usize, usize)> = (k..self.a.nrows())
            .filter(|&r| self.a.row_nnz(r) > 0)
            .map(|r| (self.a.row_nnz(r), r))
            .collect();
        if by_nnz.is_empty() {
            return None;
        }
        by_nnz.sort_unstable();
        let slate = 24.min(by_nnz.len());
        let mut have_unit = false;
        for &(rn, r) in &by_nnz[..slate] {
            for (&c, v) in self.a.row(r) {
                let c = c as usize;
                debug_assert!(c >= k);
                let mag = v.abs();
                let fill = (rn - 1) * (self.a.col_nnz(c) - 1);
                let cand = (mag, fill, r, c);
                let better = match &best {
                    None => true,
                    Some(b) => (&cand.0, cand.1, cand.2, cand.3) < (&b.0, b.1, b.2, b.3),
                };
                if better {
                    have_unit = cand.0.is_one();
                    best = Some(cand);
                }
            }
            if have_unit && rn > by_nnz[0].0 {
                break;
            }
        }
        // if no unit pivot among the slate, fall back to a full scan so the
        // magnitude-first rule stays global
        if !have_unit && by_nnz.len() > slate {
            for &(rn, r) in &by_nnz[slate..] {
                for (&c, v) in self.a.row(r) {
                    let c = c as usize;
                    let mag = v.abs();
                    let fill = (rn - 1) * (self.a.col_nnz(c) - 1);
                    let cand = (mag, fill, r, c);
                    let better = match &best {
                        None => true,
                        Some(b) => (&cand.0, cand.1, cand.2, cand.3) < (&b.0, b.1, b.2, b.3),
                    };
                    if better {
                        best = Some(cand);
                    }
                }
            }
        }
        best.map(|(_, _, r, c)| (r, c))
    }

    fn process(&mut self) -> usize {
        let mut k = 0;
        while let Some((r, c)) = self.select_pivot(k) {
            self.swap_rows(r, k);
            self.swap_cols(c, k);
            self.clear_pivot(k);
            k += 1;
        }
        // positive diagonal
        for i in 0..k {
            if self.a.get(i, i).is_negative() {
                self.negate_row(i);
            }
        }
        // divisibility chain
        loop {
            let mut fixed = true;
            for i in 0..k.saturating_sub(1) {
                let d0 = self.a.get(i, i);
                let d1 = self.a.get(i + 1, i + 1);
                if (&d1 % &d0).is_zero() {
                    continue;
                }
                fixed = false;
                // push the second factor into the pivot's row and re-reduce
                self.row_op(i, i + 1, &BigInt::one());
                self.clear_pivot(i);
                if self.a.get(i, i).is_negative() {
                    self.negate_row(i);
                }
                if self.a.get(i + 1, i + 1).is_negative() {
                    self.negate_row(i + 1);
                }
            }
            if fixed {
                break;
            }
        }
        k
    }
}

fn div_nearest(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    if r.is_zero() {
        return q;
    }
    // round toward the nearest multiple to keep remainders small
    let two_r = r.abs() * 2;
    if two_r > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

/// Smith normal form with the requested transforms.
pub fn snf(a: &SparseIntMat, flags: SnfFlags) -> SnfDecomposition {
    let mut calc = SnfCalc::new(a.clone(), flags);
    let rank = calc.process();
    let factors = (0..rank).map(|i| calc.a.get(i, i)).collect();
    SnfDecomposition {
        nrows: a.nrows(),
        ncols: a.ncols(),
        factors,
        u: calc.u,
        u_inv: calc.u_inv,
        v: calc.v,
        v_inv: calc.v_inv,
    }
}

/// Rank-only Smith normal form.
pub fn snf_rank(a: &SparseIntMat) -> usize {
    snf(a, [false; 4]).rank()
}
