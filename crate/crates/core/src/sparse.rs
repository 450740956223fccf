//! Compressed sparse row matrices and direct solvers for symmetric positive
//! definite systems: a multifrontal supernodal Cholesky factorization and a
//! row-by-row LDLᵀ used as its reference. Fill is kept down with a geometric
//! nested-dissection ordering driven by the point coordinates behind each row.

use alloc::vec::Vec;

use crate::math::{self, Vec3};

/// Sparse matrix in CSR form with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = alloc::vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&alloc::vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self {
            n_rows: d.len(),
            n_cols: d.len(),
            row_ptr: (0..=d.len()).collect(),
            col_idx: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `(column, value)` pairs stored in row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Stored value at `(r, c)`, zero if not in the pattern.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn has_entry(&self, r: usize, c: usize) -> bool {
        self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
            .binary_search(&c)
            .is_ok()
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    /// Largest `|A_ij − A_ji|`, or `None` if the patterns differ.
    pub fn asymmetry(&self) -> Option<f64> {
        if self.n_rows != self.n_cols {
            return None;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                if !self.has_entry(c, r) {
                    return None;
                }
                worst = worst.max(crate::math::abs(v - self.get(c, r)));
            }
        }
        Some(worst)
    }

    /// Multiplies row `r` by `s[r]`.
    pub fn scale_rows(&self, s: &[f64]) -> Self {
        assert_eq!(s.len(), self.n_rows);
        let mut out = self.clone();
        for r in 0..self.n_rows {
            for v in &mut out.values[self.row_ptr[r]..self.row_ptr[r + 1]] {
                *v *= s[r];
            }
        }
        out
    }

    /// Entrywise product with a matrix of identical pattern.
    pub fn hadamard(&self, other: &CsrMatrix) -> Option<Self> {
        if !self.same_pattern(other) {
            return None;
        }
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v *= *w;
        }
        Some(out)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = alloc::vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = alloc::vec![0usize; self.nnz()];
        let mut values = alloc::vec![0.0; self.nnz()];
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                let k = next[c];
                col_idx[k] = r;
                values[k] = v;
                next[c] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `AᵀA + diag(d)`. The diagonal is always part of the pattern.
    pub fn gram_plus_diagonal(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.n_cols);
        let at = self.transpose();
        let n = self.n_cols;
        let mut acc = alloc::vec![0.0; n];
        let mut mark = alloc::vec![usize::MAX; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut row_ptr = alloc::vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            cols.clear();
            mark[i] = i;
            cols.push(i);
            acc[i] = d[i];
            for (k, a_ki) in at.row(i) {
                for (j, a_kj) in self.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        cols.push(j);
                        acc[j] = 0.0;
                    }
                    acc[j] += a_ki * a_kj;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Fill-reducing ordering by recursive coordinate bisection with vertex
/// separators taken from the matrix graph.
///
/// Returns `perm` with `perm[k]` = original index eliminated at step `k`.
pub fn nested_dissection(pattern: &CsrMatrix, coords: &[Vec3]) -> Vec<usize> {
    assert_eq!(pattern.n_rows(), coords.len());
    let n = coords.len();
    let mut order = Vec::with_capacity(n);
    let mut side = alloc::vec![0u32; n];
    let mut epoch = 0u32;
    dissect(pattern, coords, (0..n).collect(), &mut order, &mut side, &mut epoch);
    order
}

const DISSECTION_LEAF: usize = 64;

fn dissect(
    pattern: &CsrMatrix,
    coords: &[Vec3],
    mut verts: Vec<usize>,
    order: &mut Vec<usize>,
    side: &mut [u32],
    epoch: &mut u32,
) {
    if verts.len() <= DISSECTION_LEAF {
        order.extend_from_slice(&verts);
        return;
    }
    let (mut lo, mut hi) = (coords[verts[0]], coords[verts[0]]);
    for &v in &verts {
        lo = lo.min(coords[v]);
        hi = hi.max(coords[v]);
    }
    let ext = hi - lo;
    let axis = if ext[0] >= ext[1] && ext[0] >= ext[2] {
        0
    } else if ext[1] >= ext[2] {
        1
    } else {
        2
    };
    let mid = verts.len() / 2;
    verts.select_nth_unstable_by(mid, |&a, &b| coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b)));
    let right: Vec<usize> = verts[mid..].to_vec();
    let mut left: Vec<usize> = verts[..mid].to_vec();
    drop(verts);

    *epoch += 1;
    let tag = *epoch;
    for &v in &right {
        side[v] = tag;
    }
    let mut separator = Vec::new();
    left.retain(|&v| {
        let touches = pattern.row(v).any(|(c, _)| side[c] == tag);
        if touches {
            separator.push(v);
        }
        !touches
    });
    left.sort_unstable();
    let mut right = right;
    right.sort_unstable();
    dissect(pattern, coords, left, order, side, epoch);
    dissect(pattern, coords, right, order, side, epoch);
    order.extend_from_slice(&separator);
}

const NONE: usize = usize::MAX;

/// Elimination tree and strictly-lower column counts of `P·A·Pᵀ`.
fn etree_counts(matrix: &CsrMatrix, perm: &[usize], inv_perm: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = perm.len();
    let mut parent = alloc::vec![NONE; n];
    let mut flag = alloc::vec![NONE; n];
    let mut lnz = alloc::vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        for (c, _) in matrix.row(perm[k]) {
            let mut i = inv_perm[c];
            if i < k {
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
    }
    (parent, lnz)
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = alloc::vec![0usize; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Postorder of a forest given by `parent`, children in ascending order.
fn postorder(parent: &[usize]) -> Vec<usize> {
    let n = parent.len();
    let mut head = alloc::vec![NONE; n];
    let mut next = alloc::vec![NONE; n];
    for j in (0..n).rev() {
        if parent[j] != NONE {
            next[j] = head[parent[j]];
            head[parent[j]] = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut stack = Vec::new();
    for root in (0..n).filter(|&j| parent[j] == NONE) {
        stack.push(root);
        while let Some(&top) = stack.last() {
            let child = head[top];
            if child == NONE {
                stack.pop();
                order.push(top);
            } else {
                head[top] = next[child];
                stack.push(child);
            }
        }
    }
    order
}

/// Symbolic analysis of a symmetric pattern under a fixed ordering.
#[derive(Debug, Clone)]
pub struct LdlSymbolic {
    n: usize,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
}

impl LdlSymbolic {
    /// `matrix` must be square with a symmetric pattern.
    pub fn analyze(matrix: &CsrMatrix, perm: Vec<usize>) -> Self {
        let n = matrix.n_rows();
        assert_eq!(perm.len(), n);
        let inv_perm = inverse(&perm);
        let (parent, lnz) = etree_counts(matrix, &perm, &inv_perm);
        let mut col_ptr = alloc::vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        Self {
            n,
            perm,
            inv_perm,
            parent,
            col_ptr,
        }
    }

    /// Number of strictly-lower nonzeros in the factor.
    pub fn factor_nnz(&self) -> usize {
        self.col_ptr[self.n]
    }
}

/// Failure of the numeric factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    /// Original row index of the failing pivot.
    pub row: usize,
    pub pivot: f64,
}

/// Numeric `P·A·Pᵀ = L·D·Lᵀ` factor, computed one row at a time. Simple and
/// allocation-light; [`CholeskyFactor`] is much faster on large systems.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    symbolic: LdlSymbolic,
    row_idx: Vec<usize>,
    l_values: Vec<f64>,
    diag: Vec<f64>,
}

impl LdlFactor {
    pub fn factor(symbolic: &LdlSymbolic, matrix: &CsrMatrix) -> Result<Self, NotPositiveDefinite> {
        let n = symbolic.n;
        assert_eq!(matrix.n_rows(), n);
        let nnz = symbolic.factor_nnz();
        let mut row_idx = alloc::vec![0usize; nnz];
        let mut l_values = alloc::vec![0.0; nnz];
        let mut diag = alloc::vec![0.0; n];
        let mut y = alloc::vec![0.0; n];
        let mut pattern = alloc::vec![0usize; n];
        let mut flag = alloc::vec![NONE; n];
        let mut lnz = alloc::vec![0usize; n];
        let (perm, inv_perm, parent, col_ptr) = (
            &symbolic.perm,
            &symbolic.inv_perm,
            &symbolic.parent,
            &symbolic.col_ptr,
        );
        for k in 0..n {
            y[k] = 0.0;
            let mut top = n;
            flag[k] = k;
            for (c, v) in matrix.row(perm[k]) {
                let mut i = inv_perm[c];
                if i <= k {
                    y[i] += v;
                    let mut len = 0;
                    while flag[i] != k {
                        pattern[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                    while len > 0 {
                        top -= 1;
                        len -= 1;
                        pattern[top] = pattern[len];
                    }
                }
            }
            diag[k] = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let start = col_ptr[i];
                let end = start + lnz[i];
                for p in start..end {
                    y[row_idx[p]] -= l_values[p] * yi;
                }
                let l_ki = yi / diag[i];
                diag[k] -= l_ki * yi;
                row_idx[end] = k;
                l_values[end] = l_ki;
                lnz[i] += 1;
            }
            if !(diag[k] > 0.0) || !diag[k].is_finite() {
                return Err(NotPositiveDefinite {
                    row: perm[k],
                    pivot: diag[k],
                });
            }
        }
        Ok(Self {
            symbolic: symbolic.clone(),
            row_idx,
            l_values,
            diag,
        })
    }

    /// Solves `A·x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let s = &self.symbolic;
        let n = s.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = s.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                x[self.row_idx[p]] -= self.l_values[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= self.diag[j];
        }
        for j in (0..n).rev() {
            let mut xj = x[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                xj -= self.l_values[p] * x[self.row_idx[p]];
            }
            x[j] = xj;
        }
        for (k, &p) in s.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }
}


/// Supernodal symbolic analysis for [`CholeskyFactor`].
#[derive(Debug, Clone)]
pub struct CholeskySymbolic {
    n: usize,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    /// Supernode `s` owns pivots `start[s]..start[s + 1]`.
    start: Vec<usize>,
    /// Sorted off-block row indices of each supernode.
    rows: Vec<Vec<usize>>,
    children: Vec<usize>,
    /// Offset of each supernode's dense block in the value array.
    offset: Vec<usize>,
}

/// Greatest share of explicit zeros a merged supernode may carry, by width.
fn relaxed_zero_share(width: usize) -> f64 {
    match width {
        0..=4 => 1.0,
        5..=16 => 0.8,
        17..=48 => 0.1,
        _ => 0.05,
    }
}

impl CholeskySymbolic {
    /// `matrix` must be square with a symmetric pattern. The ordering is
    /// refined by an elimination-tree postorder, which keeps its fill.
    pub fn analyze(matrix: &CsrMatrix, perm: Vec<usize>) -> Self {
        let n = matrix.n_rows();
        assert_eq!(perm.len(), n);
        let inv = inverse(&perm);
        let (parent, _) = etree_counts(matrix, &perm, &inv);
        let perm: Vec<usize> = postorder(&parent).into_iter().map(|k| perm[k]).collect();
        let inv_perm = inverse(&perm);
        let (parent, lnz) = etree_counts(matrix, &perm, &inv_perm);

        // relaxed supernodes along parent chains j -> j + 1
        let mut start = alloc::vec![0usize];
        let mut ideal = 0usize;
        for j in 0..n {
            let f = *start.last().expect("nonempty");
            if j > f && parent[j - 1] == j {
                let width = j - f + 1;
                let stored = width * (width + 1) / 2 + width * lnz[j];
                let candidate_ideal = ideal + lnz[j] + 1;
                let exact = lnz[j - 1] == lnz[j] + 1;
                let zeros = (stored - candidate_ideal) as f64 / stored as f64;
                if exact || zeros <= relaxed_zero_share(width) {
                    ideal = candidate_ideal;
                    continue;
                }
            }
            if j > f {
                start.push(j);
            }
            ideal = lnz[j] + 1;
        }
        start.push(n);
        let nsup = start.len() - 1;
        let mut owner = alloc::vec![0usize; n];
        for s in 0..nsup {
            for c in start[s]..start[s + 1] {
                owner[c] = s;
            }
        }

        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(nsup);
        let mut children = alloc::vec![0usize; nsup];
        let mut child_lists: Vec<Vec<usize>> = alloc::vec![Vec::new(); nsup];
        let mut mark = alloc::vec![NONE; n];
        for s in 0..nsup {
            let (f, l) = (start[s], start[s + 1] - 1);
            let mut r = Vec::new();
            for c in f..=l {
                for (i, _) in matrix.row(perm[c]) {
                    let k = inv_perm[i];
                    if k > l && mark[k] != s {
                        mark[k] = s;
                        r.push(k);
                    }
                }
            }
            for &child in &child_lists[s] {
                for &k in &rows[child] {
                    if k > l && mark[k] != s {
                        mark[k] = s;
                        r.push(k);
                    }
                }
            }
            r.sort_unstable();
            children[s] = child_lists[s].len();
            if parent[l] != NONE {
                child_lists[owner[parent[l]]].push(s);
            }
            rows.push(r);
        }
        let mut offset = Vec::with_capacity(nsup + 1);
        offset.push(0);
        for s in 0..nsup {
            let ns = start[s + 1] - start[s];
            offset.push(offset[s] + ns * (ns + rows[s].len()));
        }
        Self {
            n,
            perm,
            inv_perm,
            start,
            rows,
            children,
            offset,
        }
    }

    pub fn supernodes(&self) -> usize {
        self.start.len() - 1
    }

    /// Stored factor entries, explicit zeros included.
    pub fn stored_entries(&self) -> usize {
        *self.offset.last().expect("nonempty")
    }
}

/// Numeric `P·A·Pᵀ = L·Lᵀ` factor built with the multifrontal method: every
/// supernode is factored as a dense frontal matrix and passes a dense update
/// to its parent.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    symbolic: CholeskySymbolic,
    /// Column-major `(ns + rows) × ns` block per supernode.
    values: Vec<f64>,
}

impl CholeskyFactor {
    pub fn factor(symbolic: &CholeskySymbolic, matrix: &CsrMatrix) -> Result<Self, NotPositiveDefinite> {
        let sym = symbolic;
        let n = sym.n;
        assert_eq!(matrix.n_rows(), n);
        let mut values = alloc::vec![0.0; sym.stored_entries()];
        let mut map = alloc::vec![NONE; n];
        let mut updates: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut front: Vec<f64> = Vec::new();
        let mut local: Vec<usize> = Vec::new();
        for s in 0..sym.supernodes() {
            let (f, end) = (sym.start[s], sym.start[s + 1]);
            let ns = end - f;
            let rows = &sym.rows[s];
            let r = rows.len();
            let m = ns + r;
            for c in 0..ns {
                map[f + c] = c;
            }
            for (a, &g) in rows.iter().enumerate() {
                map[g] = ns + a;
            }
            front.clear();
            front.resize(m * m, 0.0);
            for c in f..end {
                let col = (c - f) * m;
                for (i, v) in matrix.row(sym.perm[c]) {
                    let k = sym.inv_perm[i];
                    if k >= c {
                        front[col + map[k]] += v;
                    }
                }
            }
            for _ in 0..sym.children[s] {
                let (child, u) = updates.pop().expect("child update precedes its parent");
                let crow = &sym.rows[child];
                let rc = crow.len();
                local.clear();
                local.extend(crow.iter().map(|&g| map[g]));
                for b in 0..rc {
                    let col = local[b] * m;
                    let src = &u[b * rc..(b + 1) * rc];
                    for a in b..rc {
                        front[col + local[a]] += src[a];
                    }
                }
            }

            for j in 0..ns {
                let d = front[j * m + j];
                if !(d > 0.0) || !d.is_finite() {
                    return Err(NotPositiveDefinite {
                        row: sym.perm[f + j],
                        pivot: d,
                    });
                }
                let ljj = math::sqrt(d);
                let inv = 1.0 / ljj;
                front[j * m + j] = ljj;
                for v in &mut front[j * m + j + 1..(j + 1) * m] {
                    *v *= inv;
                }
                let (done, rest) = front.split_at_mut((j + 1) * m);
                let lj = &done[j * m..];
                for k in j + 1..ns {
                    let lkj = lj[k];
                    if lkj != 0.0 {
                        for (x, y) in rest[(k - j - 1) * m + k..(k - j) * m].iter_mut().zip(&lj[k..]) {
                            *x -= lkj * y;
                        }
                    }
                }
            }

            if r > 0 {
                let mut u = alloc::vec![0.0; r * r];
                for b in 0..r {
                    let gb = ns + b;
                    let dst = &mut u[b * r + b..(b + 1) * r];
                    dst.copy_from_slice(&front[gb * m + gb..(gb + 1) * m]);
                    for j in 0..ns {
                        let lbj = front[j * m + gb];
                        if lbj != 0.0 {
                            for (x, y) in dst.iter_mut().zip(&front[j * m + gb..(j + 1) * m]) {
                                *x -= lbj * y;
                            }
                        }
                    }
                }
                updates.push((s, u));
            }
            values[sym.offset[s]..sym.offset[s + 1]].copy_from_slice(&front[..ns * m]);
        }
        Ok(Self {
            symbolic: sym.clone(),
            values,
        })
    }

    /// Solves `A·x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let sym = &self.symbolic;
        assert_eq!(b.len(), sym.n);
        let mut x: Vec<f64> = sym.perm.iter().map(|&p| b[p]).collect();
        for s in 0..sym.supernodes() {
            let (f, ns, rows) = (sym.start[s], sym.start[s + 1] - sym.start[s], &sym.rows[s]);
            let m = ns + rows.len();
            let blk = &self.values[sym.offset[s]..sym.offset[s + 1]];
            for j in 0..ns {
                let col = &blk[j * m..(j + 1) * m];
                let xj = x[f + j] / col[j];
                x[f + j] = xj;
                for i in j + 1..ns {
                    x[f + i] -= col[i] * xj;
                }
                for (a, &g) in rows.iter().enumerate() {
                    x[g] -= col[ns + a] * xj;
                }
            }
        }
        for s in (0..sym.supernodes()).rev() {
            let (f, ns, rows) = (sym.start[s], sym.start[s + 1] - sym.start[s], &sym.rows[s]);
            let m = ns + rows.len();
            let blk = &self.values[sym.offset[s]..sym.offset[s + 1]];
            for j in (0..ns).rev() {
                let col = &blk[j * m..(j + 1) * m];
                let mut v = x[f + j];
                for i in j + 1..ns {
                    v -= col[i] * x[f + i];
                }
                for (a, &g) in rows.iter().enumerate() {
                    v -= col[ns + a] * x[g];
                }
                x[f + j] = v / col[j];
            }
        }
        for (k, &p) in sym.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }
}
