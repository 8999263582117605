//! Finite-dimensional truncations of field algebras.
//!
//! A [`FieldAlgebra`] stores, for every ordered pair of basis elements, the
//! full list of mode products `a_n b` that stay inside a kept degree window,
//! together with exact bookkeeping of which modes are known to vanish and
//! which escaped the truncation. Every identity checker downstream consumes
//! only this data and the escape marks, so no computation ever confuses a
//! truncated-away coefficient with zero.

pub mod consequences;
pub mod eval;
pub mod locality;
pub mod suite;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::formal::factorial;
use crate::linalg::{SparseVec, VecBuilder};
use crate::{Esc, Rat};

/// Classification of a single degree under the truncation contract.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DegClass {
    /// Inside the kept window: values at this degree are stored exactly.
    Kept,
    /// Outside the full support of the grading: values here are exactly zero.
    KnownZero,
    /// Inside the full support but outside the kept window: unknowable.
    Escaped,
}

/// Degree window of a truncated carrier.
///
/// `kept_min ..= kept_max` is the range of degrees actually represented.
/// `full_min` / `full_max` bound the degrees the untruncated object can have
/// at all (`None` = unbounded on that side); degrees outside the full range
/// are exactly zero rather than unknown.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DegreeBounds {
    pub kept_min: i64,
    pub kept_max: i64,
    pub full_min: Option<i64>,
    pub full_max: Option<i64>,
}

impl DegreeBounds {
    pub fn classify(&self, deg: i64) -> DegClass {
        if deg >= self.kept_min && deg <= self.kept_max {
            DegClass::Kept
        } else if self.full_min.is_some_and(|m| deg < m) || self.full_max.is_some_and(|m| deg > m) {
            DegClass::KnownZero
        } else {
            DegClass::Escaped
        }
    }
}

/// All mode products `a_n b` for one ordered basis pair `(a, b)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PairRow {
    /// Known nonzero products, keyed by the mode index `n`.
    entries: BTreeMap<i64, SparseVec>,
    /// Every mode with `n >= zero_from` is exactly zero.
    zero_from: i64,
    /// Inclusive mode intervals hidden by the truncation
    /// (`None` = unbounded on that side); disjoint from `n >= zero_from`.
    escapes: Vec<(Option<i64>, Option<i64>)>,
}

impl PairRow {
    pub fn new(
        entries: BTreeMap<i64, SparseVec>,
        zero_from: i64,
        escapes: Vec<(Option<i64>, Option<i64>)>,
    ) -> Self {
        for n in entries.keys() {
            assert!(*n < zero_from, "stored entry at a mode declared zero");
        }
        PairRow { entries, zero_from, escapes }
    }

    /// Row for the pair of two zero-interacting elements.
    pub fn vanishing() -> Self {
        PairRow { entries: BTreeMap::new(), zero_from: i64::MIN / 4, escapes: Vec::new() }
    }

    /// Build a row for homogeneous `a, b` with `deg a + deg b = deg_sum`
    /// under the graded mode law `deg(a_n b) = deg_sum - n - 1`.
    ///
    /// `f(n)` supplies the product for modes whose result degree is kept;
    /// modes outside the full support become exact zeros, the remainder is
    /// recorded as escaped. `zero_from` is the caller's (possibly sharper)
    /// vanishing bound.
    pub fn graded(
        bounds: &DegreeBounds,
        deg_sum: i64,
        zero_from: i64,
        mut f: impl FnMut(i64) -> SparseVec,
    ) -> Self {
        match PairRow::graded_res(bounds, deg_sum, zero_from, |n| {
            Ok::<SparseVec, std::convert::Infallible>(f(n))
        }) {
            Ok(row) => row,
            Err(e) => match e {},
        }
    }

    /// Fallible variant of [`PairRow::graded`]: the first error from `f`
    /// aborts the build.
    pub fn graded_res<E>(
        bounds: &DegreeBounds,
        deg_sum: i64,
        zero_from: i64,
        mut f: impl FnMut(i64) -> std::result::Result<SparseVec, E>,
    ) -> std::result::Result<Self, E> {
        // Result degree d = deg_sum - n - 1 decreases as n grows.
        let n_of_deg = |d: i64| deg_sum - d - 1;
        let n_lo_kept = n_of_deg(bounds.kept_max);
        let n_hi_kept = n_of_deg(bounds.kept_min);
        let mut entries = BTreeMap::new();
        for n in n_lo_kept..=n_hi_kept.min(zero_from - 1) {
            let v = f(n)?;
            if !v.is_zero() {
                entries.insert(n, v);
            }
        }
        let mut escapes = Vec::new();
        // Low modes: degrees above the kept window but within full support.
        let low_hi = n_lo_kept - 1;
        match bounds.full_max {
            Some(fm) => {
                let low_lo = n_of_deg(fm);
                if low_lo <= low_hi.min(zero_from - 1) {
                    escapes.push((Some(low_lo), Some(low_hi.min(zero_from - 1))));
                }
            }
            None => {
                if low_hi <= zero_from - 1 {
                    escapes.push((None, Some(low_hi.min(zero_from - 1))));
                } else {
                    escapes.push((None, Some(zero_from - 1)));
                }
            }
        }
        // High modes: degrees below the kept window but within full support.
        let high_lo = n_hi_kept + 1;
        if high_lo <= zero_from - 1 {
            match bounds.full_min {
                Some(fm) => {
                    let high_hi = n_of_deg(fm);
                    if high_lo <= high_hi {
                        escapes.push((Some(high_lo), Some(high_hi.min(zero_from - 1))));
                    }
                }
                None => {
                    escapes.push((Some(high_lo), Some(zero_from - 1)));
                }
            }
        }
        escapes.retain(|(lo, hi)| match (lo, hi) {
            (Some(a), Some(b)) => a <= b,
            _ => true,
        });
        Ok(PairRow { entries, zero_from, escapes })
    }

    /// Assemble a row whose modes are linear in finitely many base rows:
    /// the derived mode at `n` is knowable wherever every base row is, so
    /// the base escape intervals (clipped below `zero_from`, then merged
    /// into canonical form) carry over verbatim instead of being
    /// re-derived from degree arithmetic — base rows sharper than their
    /// degree pattern stay sharp. `eval(n)` is called exactly at the
    /// knowable candidate modes (the union of the base rows' stored entry
    /// modes) and its nonzero values become the entries.
    pub fn derived(
        zero_from: i64,
        base_rows: &[&PairRow],
        mut eval: impl FnMut(i64) -> SparseVec,
    ) -> Self {
        let mut clipped: Vec<(Option<i64>, Option<i64>)> = Vec::new();
        for r in base_rows {
            for &(lo, hi) in &r.escapes {
                let hi = hi.map_or(zero_from - 1, |h| h.min(zero_from - 1));
                if lo.map_or(false, |l| l > hi) {
                    continue;
                }
                clipped.push((lo, Some(hi)));
            }
        }
        clipped.sort_by_key(|(lo, hi)| (lo.unwrap_or(i64::MIN), hi.unwrap_or(i64::MAX)));
        let mut escapes: Vec<(Option<i64>, Option<i64>)> = Vec::new();
        for (lo, hi) in clipped {
            let hi_v = hi.expect("clipped intervals are bounded above");
            if let Some(last) = escapes.last_mut() {
                let last_hi = last.1.expect("clipped intervals are bounded above");
                if lo.map_or(i64::MIN, |l| l) <= last_hi.saturating_add(1) {
                    if hi_v > last_hi {
                        last.1 = Some(hi_v);
                    }
                    continue;
                }
            }
            escapes.push((lo, hi));
        }

        let hidden = |n: i64| {
            escapes
                .iter()
                .any(|(lo, hi)| lo.map_or(true, |l| n >= l) && hi.map_or(true, |h| n <= h))
        };
        let modes: BTreeSet<i64> =
            base_rows.iter().flat_map(|r| r.entries.keys().copied()).collect();
        let mut entries = BTreeMap::new();
        for n in modes {
            if n >= zero_from || hidden(n) {
                continue;
            }
            let v = eval(n);
            if !v.is_zero() {
                entries.insert(n, v);
            }
        }
        PairRow { entries, zero_from, escapes }
    }

    pub fn zero_from(&self) -> i64 {
        self.zero_from
    }

    pub fn is_escaped(&self, n: i64) -> bool {
        if n >= self.zero_from {
            return false;
        }
        self.escapes.iter().any(|(lo, hi)| {
            lo.map_or(true, |l| n >= l) && hi.map_or(true, |h| n <= h)
        })
    }

    /// The product at mode `n`, a zero vector when known to vanish, or an
    /// escape when the truncation hides it.
    pub fn entry(&self, n: i64, dim: usize) -> Result<SparseVec, Esc> {
        if n >= self.zero_from {
            return Ok(SparseVec::zero(dim));
        }
        if self.is_escaped(n) {
            return Err(Esc);
        }
        Ok(self
            .entries
            .get(&n)
            .cloned()
            .unwrap_or_else(|| SparseVec::zero(dim)))
    }

    pub fn known_entries(&self) -> impl Iterator<Item = (i64, &SparseVec)> {
        self.entries.iter().map(|(n, v)| (*n, v))
    }
}

/// Exchange hints: for a basis pair `(a, b)`, candidate pairs
/// `(a^i, b^i)` with `(z-w)^N Y(a,z) Y(b,w) = (z-w)^N sum_i Y(b^i,w) Y(a^i,z)`.
pub type ExchangeHints = BTreeMap<(usize, usize), Vec<(SparseVec, SparseVec)>>;

/// A truncated field algebra on a labelled, integer-graded basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FieldAlgebra {
    name: String,
    labels: Vec<String>,
    degrees: Vec<i64>,
    bounds: DegreeBounds,
    vacuum: SparseVec,
    rows: Vec<Vec<PairRow>>,
    /// Translation `s(u) = u_{-2} vacuum`; `None` when it escaped the window.
    s_map: Vec<Option<SparseVec>>,
    exchange_hints: ExchangeHints,
}

impl FieldAlgebra {
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        degrees: Vec<i64>,
        bounds: DegreeBounds,
        vacuum: SparseVec,
        rows: Vec<Vec<PairRow>>,
    ) -> Self {
        let dim = labels.len();
        assert_eq!(degrees.len(), dim);
        assert_eq!(vacuum.dim(), dim);
        assert_eq!(rows.len(), dim);
        assert!(rows.iter().all(|r| r.len() == dim));
        let mut alg = FieldAlgebra {
            name: name.into(),
            labels,
            degrees,
            bounds,
            vacuum,
            rows,
            s_map: Vec::new(),
            exchange_hints: BTreeMap::new(),
        };
        let vacuum = alg.vacuum.clone();
        let s_map: Vec<Option<SparseVec>> = (0..dim)
            .map(|u| {
                let mut acc = VecBuilder::new(dim);
                for (vb, c) in vacuum.iter() {
                    match alg.rows[u][vb].entry(-2, dim) {
                        Ok(v) => acc.add_scaled(&v, c),
                        Err(Esc) => return None,
                    }
                }
                Some(acc.build())
            })
            .collect();
        alg.s_map = s_map;
        alg
    }

    pub fn with_exchange_hints(mut self, hints: ExchangeHints) -> Self {
        self.exchange_hints = hints;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn deg(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    /// Degree of a homogeneous vector (`None` for zero or mixed vectors).
    pub fn deg_vec(&self, v: &SparseVec) -> Option<i64> {
        let mut deg = None;
        for (i, _) in v.iter() {
            match deg {
                None => deg = Some(self.degrees[i]),
                Some(d) if d == self.degrees[i] => {}
                _ => return None,
            }
        }
        deg
    }

    pub fn bounds(&self) -> &DegreeBounds {
        &self.bounds
    }

    pub fn vacuum(&self) -> &SparseVec {
        &self.vacuum
    }

    pub fn row(&self, a: usize, b: usize) -> &PairRow {
        &self.rows[a][b]
    }

    /// Basis-pair mode product `a_n b`.
    pub fn mode_basis(&self, a: usize, n: i64, b: usize) -> Result<SparseVec, Esc> {
        self.rows[a][b].entry(n, self.dim())
    }

    /// Bilinear mode product `a_n b` for arbitrary vectors.
    pub fn mode(&self, a: &SparseVec, n: i64, b: &SparseVec) -> Result<SparseVec, Esc> {
        self.act(a, n, b)
    }

    /// Translation applied to a basis element (`None` = escaped).
    pub fn s_basis(&self, i: usize) -> Option<&SparseVec> {
        self.s_map[i].as_ref()
    }

    pub fn apply_s(&self, v: &SparseVec) -> Result<SparseVec, Esc> {
        let mut acc = VecBuilder::new(self.dim());
        for (i, c) in v.iter() {
            match &self.s_map[i] {
                Some(si) => acc.add_scaled(si, c),
                None => return Err(Esc),
            }
        }
        Ok(acc.build())
    }

    /// Divided power `s^l / l!` applied to `v`.
    pub fn apply_s_divided(&self, l: u32, v: &SparseVec) -> Result<SparseVec, Esc> {
        let mut w = v.clone();
        for _ in 0..l {
            w = self.apply_s(&w)?;
        }
        Ok(w.scale(&(Rat::one() / factorial(l))))
    }

    pub fn exchange_hints(&self) -> &ExchangeHints {
        &self.exchange_hints
    }

    pub fn hint_for(&self, a: usize, b: usize) -> Option<&Vec<(SparseVec, SparseVec)>> {
        self.exchange_hints.get(&(a, b))
    }

    /// Render a carrier vector with basis labels, deterministically.
    pub fn fmt_vec(&self, v: &SparseVec) -> String {
        fmt_with_labels(v, &self.labels)
    }

    /// Index of the basis element with the given label.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Render a vector over a labelled basis, e.g. `3/2 a[1,1] - b`.
pub fn fmt_with_labels(v: &SparseVec, labels: &[String]) -> String {
    use std::fmt::Write;
    if v.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (i, c)) in v.iter().enumerate() {
        let neg = c < &Rat::zero();
        let mag = if neg { -c } else { c.clone() };
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mag.is_one() {
            let _ = write!(out, "{}", labels[i]);
        } else {
            let _ = write!(out, "{} {}", mag, labels[i]);
        }
    }
    out
}

/// Uniform access to mode actions, shared by the algebra acting on itself
/// and by modules over it. All identity checkers are written against this
/// trait so the same code verifies algebra and module laws.
pub trait Modes {
    /// Dimension of the carrier being acted on.
    fn target_dim(&self) -> usize;
    /// The acting field algebra.
    fn algebra(&self) -> &FieldAlgebra;
    /// `a_n x` for basis indices `a` (algebra) and `x` (carrier).
    fn act_basis(&self, a: usize, n: i64, x: usize) -> Result<SparseVec, Esc>;
    /// Bound with `a_n x = 0` for all `n >= bound` on the given basis pair.
    fn zero_from_basis(&self, a: usize, x: usize) -> i64;

    /// Bilinear extension of the mode action.
    fn act(&self, a: &SparseVec, n: i64, x: &SparseVec) -> Result<SparseVec, Esc> {
        let mut acc = VecBuilder::new(self.target_dim());
        for (ai, ca) in a.iter() {
            for (xi, cx) in x.iter() {
                let v = self.act_basis(ai, n, xi)?;
                acc.add_scaled(&v, &(ca * cx));
            }
        }
        Ok(acc.build())
    }

    /// Vanishing bound for vectors: `a_n x = 0` for all `n >=` the result.
    /// `None` when one side is the zero vector (every mode vanishes).
    fn zero_from(&self, a: &SparseVec, x: &SparseVec) -> Option<i64> {
        let mut bound = None;
        for (ai, _) in a.iter() {
            for (xi, _) in x.iter() {
                let z = self.zero_from_basis(ai, xi);
                bound = Some(bound.map_or(z, |b: i64| b.max(z)));
            }
        }
        bound
    }
}

impl Modes for FieldAlgebra {
    fn target_dim(&self) -> usize {
        self.dim()
    }

    fn algebra(&self) -> &FieldAlgebra {
        self
    }

    fn act_basis(&self, a: usize, n: i64, x: usize) -> Result<SparseVec, Esc> {
        self.rows[a][x].entry(n, self.dim())
    }

    fn zero_from_basis(&self, a: usize, x: usize) -> i64 {
        self.rows[a][x].zero_from()
    }
}

/// Deterministic sample of basis triples for law checking, capped by the
/// absolute degrees of the factors to keep runtimes bounded.
#[derive(Clone, Copy, Debug)]
pub struct TripleSampler {
    /// Cap on `|deg a| + |deg b|`.
    pub max_pair: i64,
    /// Cap on `|deg a| + |deg b| + |deg c|`.
    pub max_total: i64,
}

impl Default for TripleSampler {
    fn default() -> Self {
        TripleSampler { max_pair: 4, max_total: 7 }
    }
}

impl TripleSampler {
    pub fn pairs(&self, alg: &FieldAlgebra) -> Vec<(usize, usize)> {
        let d = alg.dim();
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                if alg.deg(a).abs() + alg.deg(b).abs() <= self.max_pair {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn triples(&self, alg: &FieldAlgebra) -> Vec<(usize, usize, usize)> {
        let d = alg.dim();
        let mut out = Vec::new();
        for (a, b) in self.pairs(alg) {
            for c in 0..d {
                if alg.deg(a).abs() + alg.deg(b).abs() + alg.deg(c).abs() <= self.max_total {
                    out.push((a, b, c));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat_int;

    #[test]
    fn degree_classification() {
        let b = DegreeBounds { kept_min: 0, kept_max: 4, full_min: Some(0), full_max: None };
        assert_eq!(b.classify(2), DegClass::Kept);
        assert_eq!(b.classify(-1), DegClass::KnownZero);
        assert_eq!(b.classify(5), DegClass::Escaped);

        let c = DegreeBounds { kept_min: -3, kept_max: 0, full_min: None, full_max: Some(0) };
        assert_eq!(c.classify(-2), DegClass::Kept);
        assert_eq!(c.classify(1), DegClass::KnownZero);
        assert_eq!(c.classify(-4), DegClass::Escaped);
    }

    #[test]
    fn graded_row_one_sided_truncation() {
        // Weights bounded below by 0, kept window [0, 4], deg_sum = 3,
        // vanishing from mode 3 onward: modes -2..=2 are kept
        // (degrees 4..=0), modes below -2 escape, modes >= 3 are zero.
        let bounds = DegreeBounds { kept_min: 0, kept_max: 4, full_min: Some(0), full_max: None };
        let row = PairRow::graded(&bounds, 3, 3, |n| {
            SparseVec::from_entries(1, [(0, rat_int(n + 10))])
        });
        assert_eq!(row.entry(0, 1).unwrap(), SparseVec::from_entries(1, [(0, rat_int(10))]));
        assert_eq!(row.entry(2, 1).unwrap(), SparseVec::from_entries(1, [(0, rat_int(12))]));
        assert!(row.entry(-2, 1).is_ok());
        assert!(row.entry(-3, 1).is_err());
        assert!(row.entry(-100, 1).is_err());
        assert!(row.entry(3, 1).unwrap().is_zero());
        assert!(row.entry(50, 1).unwrap().is_zero());
    }

    #[test]
    fn graded_row_negative_grading() {
        // Degrees bounded above by 0, kept window [-4, 0], deg_sum = -3,
        // zero from mode 0: modes -1 down to -2 kept (degrees -2, -1... ),
        // modes below escape only when the degree rises past kept_max? No:
        // here low modes have high (less negative) degree capped by full_max,
        // high modes have degree below kept_min and escape until zero_from.
        let bounds = DegreeBounds { kept_min: -4, kept_max: 0, full_min: None, full_max: Some(0) };
        let row = PairRow::graded(&bounds, -3, 0, |n| {
            SparseVec::from_entries(1, [(0, rat_int(n))])
        });
        // deg(a_n b) = -3 - n - 1 = -4 - n; kept needs -4 <= -4 - n <= 0,
        // i.e. -4 <= n <= 0, intersected with n < 0: modes -4..=-1 kept.
        assert!(row.entry(-1, 1).is_ok());
        assert!(row.entry(-4, 1).is_ok());
        // n = -5: deg = 1 > full_max: exact zero.
        assert!(row.entry(-5, 1).unwrap().is_zero());
        // n >= 0: declared zero.
        assert!(row.entry(0, 1).unwrap().is_zero());
        // No escaped modes in this configuration: high modes are cut by
        // zero_from before leaving the kept window.
        assert!(row.entry(-2, 1).is_ok());
    }

    #[test]
    fn graded_row_deep_negative_degree_escapes() {
        // Same bounds, deg_sum = -6 (two degree -3 elements, window depth 4):
        // deg(a_n b) = -7 - n; kept needs -4 <= -7 - n <= 0: -7 <= n <= -3.
        // Modes -2, -1 have degrees -5, -6 inside full support but below the
        // kept window: escaped. Mode -8 has degree 1 > full_max: zero.
        let bounds = DegreeBounds { kept_min: -4, kept_max: 0, full_min: None, full_max: Some(0) };
        let row = PairRow::graded(&bounds, -6, 0, |_| SparseVec::zero(1));
        assert!(row.entry(-3, 1).is_ok());
        assert!(row.entry(-2, 1).is_err());
        assert!(row.entry(-1, 1).is_err());
        assert!(row.entry(0, 1).unwrap().is_zero());
        assert!(row.entry(-8, 1).unwrap().is_zero());
    }

    #[test]
    fn vector_formatting() {
        let labels: Vec<String> = vec!["u".into(), "v".into()];
        let v = SparseVec::from_entries(2, [(0, rat_int(1)), (1, rat_int(-2))]);
        assert_eq!(fmt_with_labels(&v, &labels), "u - 2 v");
        assert_eq!(fmt_with_labels(&SparseVec::zero(2), &labels), "0");
        let w = SparseVec::from_entries(2, [(0, rat_int(-1))]);
        assert_eq!(fmt_with_labels(&w, &labels), "-u");
    }
}
