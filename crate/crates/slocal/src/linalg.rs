//! Sparse exact linear algebra over arbitrary-precision rationals.
//!
//! Fixed subspaces, quotient algebras, integral solving and certificate
//! searches all reduce to the row-echelon routines here. Pivoting is
//! deterministic (first nonzero column, rows kept sorted by pivot), so every
//! derived basis and structure constant is reproducible run to run. The
//! reduced row echelon form is canonical for a row space, which also makes
//! incremental span building agree with batch elimination.

use num_traits::Zero;

use crate::{Error, Esc, Rat, Result};

/// Sparse vector: strictly increasing indices, no stored zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default, Hash, PartialOrd, Ord)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(usize, Rat)>,
}

impl SparseVec {
    /// The zero vector of the given dimension.
    pub fn zero(dim: usize) -> Self {
        SparseVec { dim, entries: Vec::new() }
    }

    /// Standard basis vector `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim, "unit index {i} out of range {dim}");
        SparseVec { dim, entries: vec![(i, Rat::from_integer(1.into()))] }
    }

    /// Build from arbitrary (index, coefficient) pairs; duplicates are summed,
    /// zeros dropped, indices validated against `dim`.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, Rat)>) -> Self {
        let mut v: Vec<(usize, Rat)> = entries.into_iter().collect();
        v.sort_by_key(|(i, _)| *i);
        let mut out: Vec<(usize, Rat)> = Vec::with_capacity(v.len());
        for (i, c) in v {
            assert!(i < dim, "index {i} out of range {dim}");
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        SparseVec { dim, entries: out }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of stored (nonzero) entries.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Coefficient at index `i` (zero if absent).
    pub fn get(&self, i: usize) -> Rat {
        self.coeff(i).cloned().unwrap_or_else(|| Rat::zero())
    }

    pub fn coeff(&self, i: usize) -> Option<&Rat> {
        self.entries
            .binary_search_by_key(&i, |(j, _)| *j)
            .ok()
            .map(|k| &self.entries[k].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    /// Index of the first nonzero entry.
    pub fn leading_index(&self) -> Option<usize> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn scale(&self, c: &Rat) -> SparseVec {
        if c.is_zero() {
            return SparseVec::zero(self.dim);
        }
        SparseVec {
            dim: self.dim,
            entries: self.entries.iter().map(|(i, a)| (*i, a * c)).collect(),
        }
    }

    pub fn neg(&self) -> SparseVec {
        SparseVec {
            dim: self.dim,
            entries: self.entries.iter().map(|(i, a)| (*i, -a)).collect(),
        }
    }

    /// `self + c * other`, merging sorted supports.
    pub fn add_scaled(&self, other: &SparseVec, c: &Rat) -> SparseVec {
        assert_eq!(self.dim, other.dim, "add_scaled dimension mismatch");
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, y * c));
                        b.next();
                    } else {
                        let s = x.clone() + y * c;
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, y * c));
                    b.next();
                }
                (None, None) => break,
            }
        }
        SparseVec { dim: self.dim, entries: out }
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        self.add_scaled(other, &Rat::from_integer(1.into()))
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.add_scaled(other, &Rat::from_integer((-1).into()))
    }

    /// Dot product with another vector of the same dimension.
    pub fn dot(&self, other: &SparseVec) -> Rat {
        assert_eq!(self.dim, other.dim, "dot dimension mismatch");
        let mut acc = Rat::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some((i, x)), Some((j, y))) = (a.peek(), b.peek()) {
            if i < j {
                a.next();
            } else if j < i {
                b.next();
            } else {
                acc += x.clone() * y.clone();
                a.next();
                b.next();
            }
        }
        acc
    }

    /// Re-index entries through `f`, producing a vector of dimension `dim`.
    pub fn map_indices(&self, dim: usize, mut f: impl FnMut(usize) -> usize) -> SparseVec {
        SparseVec::from_entries(dim, self.entries.iter().map(|(i, c)| (f(*i), c.clone())))
    }

    /// Dense coordinate list (mostly for tests and display).
    pub fn densify(&self) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim];
        for (i, c) in &self.entries {
            out[*i] = c.clone();
        }
        out
    }
}

/// Accumulator for building sparse vectors out of many scaled contributions
/// without repeated merge costs.
#[derive(Default)]
pub(crate) struct VecBuilder {
    dim: usize,
    terms: std::collections::BTreeMap<usize, Rat>,
}

impl VecBuilder {
    pub fn new(dim: usize) -> Self {
        VecBuilder { dim, terms: Default::default() }
    }

    pub fn add_scaled(&mut self, v: &SparseVec, c: &Rat) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(v.dim, self.dim);
        for (i, a) in v.iter() {
            let slot = self.terms.entry(i).or_insert_with(Rat::zero);
            *slot += a * c;
        }
    }

    pub fn add_term(&mut self, i: usize, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(i).or_insert_with(Rat::zero);
        *slot += c;
    }

    pub fn build(self) -> SparseVec {
        SparseVec {
            dim: self.dim,
            entries: self.terms.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

/// Column-major matrix: `cols[j]` is the image of the j-th basis vector.
pub type ColMat = Vec<SparseVec>;

/// Apply a column-major matrix to a vector.
pub fn mat_apply(cols: &[SparseVec], v: &SparseVec) -> SparseVec {
    let out_dim = cols.first().map(|c| c.dim()).unwrap_or(0);
    let mut acc = VecBuilder::new(out_dim);
    for (j, c) in v.iter() {
        acc.add_scaled(&cols[j], c);
    }
    acc.build()
}

/// Apply a matrix whose columns may be unavailable (truncated away).
pub(crate) fn mat_apply_opt(cols: &[Option<SparseVec>], out_dim: usize, v: &SparseVec) -> std::result::Result<SparseVec, Esc> {
    let mut acc = VecBuilder::new(out_dim);
    for (j, c) in v.iter() {
        match &cols[j] {
            Some(col) => acc.add_scaled(col, c),
            None => return Err(Esc),
        }
    }
    Ok(acc.build())
}

/// Compose two column-major matrices: `(a ∘ b)(v) = a(b(v))`.
pub fn mat_mul(a: &[SparseVec], b: &[SparseVec]) -> ColMat {
    b.iter().map(|col| mat_apply(a, col)).collect()
}

pub fn mat_identity(dim: usize) -> ColMat {
    (0..dim).map(|i| SparseVec::unit(dim, i)).collect()
}

/// Row space in reduced row echelon form.
///
/// Invariants: rows sorted by pivot column, each pivot entry is 1, pivot
/// columns are zero in every other row, no zero rows stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    rows: Vec<SparseVec>,
    pivot_cols: Vec<usize>,
}

impl Subspace {
    pub fn empty(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, rows: Vec::new(), pivot_cols: Vec::new() }
    }

    /// Reduced row echelon span of the given rows.
    pub fn from_rows<'a>(ambient_dim: usize, rows: impl IntoIterator<Item = &'a SparseVec>) -> Self {
        let mut s = Subspace::empty(ambient_dim);
        for r in rows {
            s.insert(r);
        }
        s
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    /// Columns without a pivot, ascending: the standard complement basis.
    pub fn complement_cols(&self) -> Vec<usize> {
        let mut piv = self.pivot_cols.iter().peekable();
        let mut out = Vec::with_capacity(self.ambient_dim - self.rank());
        for j in 0..self.ambient_dim {
            if piv.peek() == Some(&&j) {
                piv.next();
            } else {
                out.push(j);
            }
        }
        out
    }

    /// Eliminate `v` against the echelon rows; the residual is supported on
    /// non-pivot columns only.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        assert_eq!(v.dim(), self.ambient_dim, "reduce dimension mismatch");
        let mut w = v.clone();
        for (k, row) in self.rows.iter().enumerate() {
            let c = w.get(self.pivot_cols[k]);
            if !c.is_zero() {
                w = w.add_scaled(row, &(-c));
            }
        }
        w
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Coefficients of `v` with respect to the echelon rows, if `v` lies in
    /// the span. Because pivots are normalized and exclusive, these are just
    /// the pivot-column coordinates of `v`.
    pub fn coords_in_rows(&self, v: &SparseVec) -> Option<SparseVec> {
        if !self.contains(v) {
            return None;
        }
        Some(SparseVec::from_entries(
            self.rows.len(),
            self.pivot_cols
                .iter()
                .enumerate()
                .map(|(k, p)| (k, v.get(*p))),
        ))
    }

    /// Insert a vector into the span; returns true when the rank grew.
    /// Maintains the reduced echelon invariants incrementally.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let w = self.reduce(v);
        let Some(p) = w.leading_index() else {
            return false;
        };
        let lead = w.get(p);
        let w = w.scale(&(Rat::from_integer(1.into()) / lead));
        // Clear the new pivot column from existing rows.
        for row in &mut self.rows {
            let c = row.get(p);
            if !c.is_zero() {
                *row = row.add_scaled(&w, &(-c));
            }
        }
        let at = self.pivot_cols.partition_point(|q| *q < p);
        self.pivot_cols.insert(at, p);
        self.rows.insert(at, w);
        true
    }

    /// Span equality (canonical forms are comparable directly).
    pub fn same_span_as(&self, other: &Subspace) -> bool {
        self == other
    }
}

/// Row echelon span of `rows`, plus (when `rhs` is given) one exact
/// expression of `rhs` as a linear combination of the input vectors.
///
/// The solution vector has one coordinate per input vector; free
/// coefficients are set to zero, which makes the answer deterministic.
/// Errors with [`Error::Inconsistent`] when `rhs` lies outside the span.
pub fn rref_solve(rows: &[SparseVec], rhs: Option<&SparseVec>) -> Result<(Subspace, Option<SparseVec>)> {
    let ambient = match rows.first() {
        Some(r) => r.dim(),
        None => rhs.map(|r| r.dim()).unwrap_or(0),
    };
    for r in rows {
        if r.dim() != ambient {
            return Err(Error::DimensionMismatch(format!(
                "row dimension {} differs from {}",
                r.dim(),
                ambient
            )));
        }
    }
    let span = Subspace::from_rows(ambient, rows.iter());
    let solution = match rhs {
        None => None,
        Some(rhs) => {
            if rhs.dim() != ambient {
                return Err(Error::DimensionMismatch(format!(
                    "rhs dimension {} differs from {}",
                    rhs.dim(),
                    ambient
                )));
            }
            Some(express_in(rows, rhs)?)
        }
    };
    Ok((span, solution))
}

/// Express `rhs` as a combination of `vectors` (transpose solve). Gaussian
/// elimination on the augmented system with deterministic pivoting; free
/// variables are zero.
fn express_in(vectors: &[SparseVec], rhs: &SparseVec) -> Result<SparseVec> {
    let n = vectors.len();
    let ambient = rhs.dim();
    // Augmented rows over coordinates: row r = (v_0[r], ..., v_{n-1}[r] | rhs[r]).
    let mut rows: Vec<(SparseVec, Rat)> = (0..ambient)
        .map(|r| {
            (
                SparseVec::from_entries(n, vectors.iter().enumerate().map(|(j, v)| (j, v.get(r)))),
                rhs.get(r),
            )
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row index, column)
    let mut used = vec![false; ambient];
    for col in 0..n {
        let Some(r) = (0..ambient).find(|&r| !used[r] && !rows[r].0.get(col).is_zero()) else {
            continue;
        };
        used[r] = true;
        let lead = rows[r].0.get(col);
        let inv = Rat::from_integer(1.into()) / lead;
        rows[r].0 = rows[r].0.scale(&inv);
        rows[r].1 = rows[r].1.clone() * inv;
        let (pivot_vec, pivot_rhs) = rows[r].clone();
        for (q, row) in rows.iter_mut().enumerate() {
            if q == r {
                continue;
            }
            let c = row.0.get(col);
            if !c.is_zero() {
                row.0 = row.0.add_scaled(&pivot_vec, &(-c.clone()));
                row.1 = row.1.clone() - c * pivot_rhs.clone();
            }
        }
        pivots.push((r, col));
    }
    // Unused rows must have zero rhs, otherwise the system is inconsistent.
    for (r, row) in rows.iter().enumerate() {
        if !used[r] && !row.1.is_zero() {
            return Err(Error::Inconsistent);
        }
    }
    Ok(SparseVec::from_entries(
        n,
        pivots.into_iter().map(|(r, col)| (col, rows[r].1.clone())),
    ))
}

/// Canonical basis of the solution space of the homogeneous system
/// `rows · x = 0` (each row is one equation). One basis vector per free
/// column, ascending; pivot coordinates filled from the echelon rows.
pub fn nullspace(ambient: usize, rows: &[SparseVec]) -> Vec<SparseVec> {
    let span = Subspace::from_rows(ambient, rows.iter());
    let mut out = Vec::new();
    for free in span.complement_cols() {
        let mut entries = vec![(free, Rat::from_integer(1.into()))];
        for (k, p) in span.pivot_cols().iter().enumerate() {
            let c = span.rows()[k].get(free);
            if !c.is_zero() {
                entries.push((*p, -c));
            }
        }
        out.push(SparseVec::from_entries(ambient, entries));
    }
    out
}

/// Coordinates of the class `[v]` in the quotient `k^ambient / sub`, written
/// in the basis of non-pivot standard basis vectors (ascending).
pub fn quotient_coords(ambient_dim: usize, sub: &Subspace, v: &SparseVec) -> Result<SparseVec> {
    if sub.ambient_dim() != ambient_dim || v.dim() != ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "quotient ambient {} vs subspace {} vs vector {}",
            ambient_dim,
            sub.ambient_dim(),
            v.dim()
        )));
    }
    let residual = sub.reduce(v);
    let comp = sub.complement_cols();
    let pos: std::collections::BTreeMap<usize, usize> =
        comp.iter().enumerate().map(|(k, j)| (*j, k)).collect();
    Ok(SparseVec::from_entries(
        comp.len(),
        residual.iter().map(|(i, c)| (pos[&i], c.clone())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};
    use proptest::prelude::*;

    fn sv(dim: usize, entries: &[(usize, i64)]) -> SparseVec {
        SparseVec::from_entries(dim, entries.iter().map(|(i, c)| (*i, rat_int(*c))))
    }

    #[test]
    fn solve_identity_rows() {
        let rows = vec![sv(2, &[(0, 1)]), sv(2, &[(1, 1)])];
        let rhs = sv(2, &[(0, 3), (1, 5)]);
        let (span, sol) = rref_solve(&rows, Some(&rhs)).unwrap();
        assert_eq!(span.rank(), 2);
        assert_eq!(sol.unwrap(), sv(2, &[(0, 3), (1, 5)]));
    }

    #[test]
    fn solve_single_row_scaling() {
        let rows = vec![sv(2, &[(0, 2), (1, 4)])];
        let rhs = sv(2, &[(0, 1), (1, 2)]);
        let (span, sol) = rref_solve(&rows, Some(&rhs)).unwrap();
        assert_eq!(span.rank(), 1);
        let sol = sol.unwrap();
        assert_eq!(sol.dim(), 1);
        assert_eq!(sol.get(0), rat(1, 2));
        // Reconstruction: sum_i x_i v_i = rhs.
        let mut acc = SparseVec::zero(2);
        for (i, c) in sol.iter() {
            acc = acc.add_scaled(&rows[i], c);
        }
        assert_eq!(acc, rhs);
    }

    #[test]
    fn solve_inconsistent() {
        let rows = vec![sv(2, &[(0, 1)])];
        let rhs = sv(2, &[(1, 1)]);
        assert_eq!(rref_solve(&rows, Some(&rhs)).unwrap_err(), Error::Inconsistent);
    }

    #[test]
    fn integral_system_for_order_two_group() {
        // Group algebra of Z/2 with basis (e, g): the equation g·t = t for
        // t = (t0, t1) says (t1, t0) = (t0, t1), i.e. t0 - t1 = 0. Solving by
        // hand gives span{(1, 1)}, normalized to (1/2, 1/2) by t0 + t1 = 1.
        let eqs = vec![sv(2, &[(0, 1), (1, -1)])];
        let basis = nullspace(2, &eqs);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], sv(2, &[(0, 1), (1, 1)]));
    }

    #[test]
    fn quotient_example() {
        let sub = Subspace::from_rows(3, [&sv(3, &[(0, 1), (1, 1)])].into_iter());
        let v = sv(3, &[(0, 2), (2, 1)]);
        let q = quotient_coords(3, &sub, &v).unwrap();
        // Complement basis {e1, e2}: class coordinates (-2, 1).
        assert_eq!(q, sv(2, &[(0, -2), (1, 1)]));
    }

    #[test]
    fn quotient_invariance_under_subspace_shift() {
        let sub = Subspace::from_rows(3, [&sv(3, &[(0, 1), (1, 1)])].into_iter());
        let v = sv(3, &[(0, 2), (2, 1)]);
        let shifted = v.add_scaled(&sv(3, &[(0, 1), (1, 1)]), &rat_int(7));
        assert_eq!(
            quotient_coords(3, &sub, &v).unwrap(),
            quotient_coords(3, &sub, &shifted).unwrap()
        );
    }

    #[test]
    fn nullspace_of_full_rank_system_is_trivial() {
        let eqs = vec![sv(2, &[(0, 1)]), sv(2, &[(1, 1)])];
        assert!(nullspace(2, &eqs).is_empty());
    }

    #[test]
    fn incremental_insert_matches_batch() {
        let rows = vec![
            sv(4, &[(0, 2), (2, 1)]),
            sv(4, &[(0, 1), (1, 1), (2, 3)]),
            sv(4, &[(1, 2), (2, 5), (3, 1)]),
        ];
        let batch = Subspace::from_rows(4, rows.iter());
        let mut inc = Subspace::empty(4);
        for r in rows.iter().rev() {
            inc.insert(r);
        }
        assert!(batch.same_span_as(&inc));
    }

    fn arb_vec(dim: usize) -> impl Strategy<Value = SparseVec> {
        proptest::collection::vec((0..dim, -4i64..=4), 0..=dim)
            .prop_map(move |entries| {
                SparseVec::from_entries(dim, entries.into_iter().map(|(i, c)| (i, rat_int(c))))
            })
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(rows in proptest::collection::vec(arb_vec(5), 0..6)) {
            let first = Subspace::from_rows(5, rows.iter());
            let again = Subspace::from_rows(5, first.rows().iter());
            prop_assert!(first.same_span_as(&again));
        }

        #[test]
        fn solve_recheck(rows in proptest::collection::vec(arb_vec(4), 1..5),
                         coeffs in proptest::collection::vec(-3i64..=3, 1..5)) {
            // Build an rhs guaranteed to lie in the span, solve, reconstruct.
            let mut rhs = SparseVec::zero(4);
            for (r, c) in rows.iter().zip(coeffs.iter()) {
                rhs = rhs.add_scaled(r, &rat_int(*c));
            }
            let (_, sol) = rref_solve(&rows, Some(&rhs)).unwrap();
            let sol = sol.unwrap();
            let mut acc = SparseVec::zero(4);
            for (i, c) in sol.iter() {
                acc = acc.add_scaled(&rows[i], c);
            }
            prop_assert_eq!(acc, rhs);
        }

        #[test]
        fn quotient_kills_subspace(rows in proptest::collection::vec(arb_vec(4), 1..4)) {
            let sub = Subspace::from_rows(4, rows.iter());
            for r in &rows {
                let q = quotient_coords(4, &sub, r).unwrap();
                prop_assert!(q.is_zero());
            }
        }
    }
}
