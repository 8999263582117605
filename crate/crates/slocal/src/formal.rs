//! Formal-calculus kernel: generalized binomials, the formal delta
//! distribution, the two one-sided expansions of `(z-w)^n`, truncated scalar
//! Laurent series, and finite coefficient windows for two-variable
//! vector-valued series.
//!
//! A [`BiWindow`] stores the coefficients of a series `X(z,w)` on a finite
//! exponent rectangle; points lost to the carrier truncation are marked
//! unknown rather than silently zeroed. Window comparison only ever counts a
//! point as checked when both sides are known, so a verdict built on top of
//! these comparisons cannot mistake truncation for agreement.

use num_traits::{One, Signed, Zero};

use crate::{rat_int, Rat};

/// `k!` as an exact rational.
pub fn factorial(k: u32) -> Rat {
    let mut acc = Rat::one();
    for t in 1..=k as i64 {
        acc *= rat_int(t);
    }
    acc
}

/// Generalized binomial coefficient with rational upper argument:
/// `binom(n, k) = n (n-1) ... (n-k+1) / k!` for `k >= 0`, and `0` for `k < 0`.
pub fn binom_rat(n: &Rat, k: i64) -> Rat {
    if k < 0 {
        return Rat::zero();
    }
    let mut acc = Rat::one();
    for t in 0..k {
        acc *= n - rat_int(t);
    }
    acc / factorial(k as u32)
}

/// Generalized binomial with integer upper argument (which may be negative).
pub fn binom_int(n: i64, k: i64) -> Rat {
    binom_rat(&rat_int(n), k)
}

/// Coefficient of `z^i w^j` in the formal delta `sum_n z^(-n-1) w^n`:
/// `1` on the anti-diagonal `i + j = -1`, else `0`.
pub fn delta_coeff(i: i64, j: i64) -> Rat {
    if i + j == -1 {
        Rat::one()
    } else {
        Rat::zero()
    }
}

/// Coefficient of `z^i w^j` in `(z-w)^n` expanded with nonnegative powers of
/// `w` (the `|z| > |w|` region). Supported on `i + j = n`, `j >= 0`, with
/// value `binom(n, j) (-1)^j`; valid for every integer `n`.
pub fn expand_zw_coeff(n: i64, i: i64, j: i64) -> Rat {
    if j < 0 || i + j != n {
        return Rat::zero();
    }
    let b = binom_int(n, j);
    if j % 2 == 0 {
        b
    } else {
        -b
    }
}

/// Coefficient of `z^i w^j` in `(z-w)^n` expanded with nonnegative powers of
/// `z` (the `|w| > |z|` region). Supported on `i + j = n`, `i >= 0`, with
/// value `(-1)^(n+i) binom(n, i)`.
pub fn expand_wz_coeff(n: i64, i: i64, j: i64) -> Rat {
    if i < 0 || i + j != n {
        return Rat::zero();
    }
    let b = binom_int(n, i);
    if (n + i) % 2 == 0 {
        b
    } else {
        -b
    }
}

/// Scalar Laurent series with an explicit knowledge window.
///
/// Coefficients live at exponents `lowest + k` for `k < coeffs.len()`;
/// exponents below `lowest` are known to be zero. When `exact` is set the
/// series terminates (a Laurent polynomial) and every higher coefficient is
/// zero; otherwise coefficients at and above `known_top()` are unknown.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScalarSeries {
    lowest: i64,
    coeffs: Vec<Rat>,
    exact: bool,
}

impl ScalarSeries {
    pub fn new(lowest: i64, coeffs: Vec<Rat>, exact: bool) -> Self {
        let mut s = ScalarSeries { lowest, coeffs, exact };
        s.normalize();
        s
    }

    /// The zero Laurent polynomial.
    pub fn zero() -> Self {
        ScalarSeries { lowest: 0, coeffs: Vec::new(), exact: true }
    }

    /// `c * z^k` as an exact series.
    pub fn monomial(k: i64, c: Rat) -> Self {
        ScalarSeries::new(k, vec![c], true)
    }

    pub fn one() -> Self {
        ScalarSeries::monomial(0, Rat::one())
    }

    /// Truncated exponential `sum_{n<order} (c z)^n / n!`, known below `order`.
    pub fn exp(c: &Rat, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order);
        let mut term = Rat::one();
        for n in 0..order {
            if n > 0 {
                term = term * c / rat_int(n as i64);
            }
            coeffs.push(term.clone());
        }
        ScalarSeries::new(0, coeffs, false)
    }

    fn normalize(&mut self) {
        // Leading zeros are known-zero either way; fold them into `lowest`.
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lowest += lead as i64;
        }
        if self.exact {
            while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                self.coeffs.pop();
            }
        }
        if self.coeffs.is_empty() && self.exact {
            self.lowest = 0;
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn is_zero(&self) -> bool {
        self.exact && self.coeffs.is_empty()
    }

    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    /// First unknown exponent (`None` when the series is exact).
    pub fn known_top(&self) -> Option<i64> {
        if self.exact {
            None
        } else {
            Some(self.lowest + self.coeffs.len() as i64)
        }
    }

    /// Coefficient at exponent `e`; `None` when `e` is beyond the knowledge
    /// window of a truncated series.
    pub fn coeff(&self, e: i64) -> Option<Rat> {
        if e < self.lowest {
            return Some(Rat::zero());
        }
        let k = (e - self.lowest) as usize;
        if k < self.coeffs.len() {
            Some(self.coeffs[k].clone())
        } else if self.exact {
            Some(Rat::zero())
        } else {
            None
        }
    }

    /// Known (exponent, coefficient) pairs, including explicit zeros.
    pub fn iter_known(&self) -> impl Iterator<Item = (i64, &Rat)> {
        let lo = self.lowest;
        self.coeffs.iter().enumerate().map(move |(k, c)| (lo + k as i64, c))
    }

    /// Residue: the coefficient at exponent `-1`.
    pub fn residue(&self) -> Option<Rat> {
        self.coeff(-1)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        ScalarSeries::new(self.lowest, self.coeffs.iter().map(|a| a * c).collect(), self.exact)
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut s = self.clone();
        if !s.is_zero() {
            s.lowest += k;
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lowest = self.lowest.min(other.lowest);
        let exact = self.exact && other.exact;
        let top = match (self.known_top(), other.known_top()) {
            (None, None) => {
                (self.lowest + self.coeffs.len() as i64).max(other.lowest + other.coeffs.len() as i64)
            }
            (Some(t), None) | (None, Some(t)) => t,
            (Some(a), Some(b)) => a.min(b),
        };
        let coeffs = (lowest..top)
            .map(|e| self.coeff(e).unwrap_or_else(Rat::zero) + other.coeff(e).unwrap_or_else(Rat::zero))
            .collect();
        ScalarSeries::new(lowest, coeffs, exact)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return ScalarSeries::zero();
        }
        let lowest = self.lowest + other.lowest;
        let exact = self.exact && other.exact;
        // Unknown tail of one factor first pollutes the product at its top
        // exponent plus the other factor's lowest exponent.
        let top = match (self.known_top(), other.known_top()) {
            (None, None) => {
                self.lowest + self.coeffs.len() as i64 + other.lowest + other.coeffs.len() as i64 - 1
            }
            (Some(t), None) => t + other.lowest,
            (None, Some(t)) => t + self.lowest,
            (Some(a), Some(b)) => (a + other.lowest).min(b + self.lowest),
        };
        let mut coeffs = vec![Rat::zero(); (top - lowest).max(0) as usize];
        for (ea, ca) in self.iter_known() {
            if ca.is_zero() {
                continue;
            }
            for (eb, cb) in other.iter_known() {
                let e = ea + eb;
                if e < top {
                    coeffs[(e - lowest) as usize] += ca * cb;
                }
            }
        }
        ScalarSeries::new(lowest, coeffs, exact)
    }

    /// Multiplicative inverse; requires a nonzero leading coefficient.
    /// Exact only when the input is a monomial; otherwise the relative
    /// knowledge window of the input is preserved.
    pub fn inverse(&self) -> Option<Self> {
        let a0 = self.coeffs.first()?.clone();
        if a0.is_zero() {
            return None;
        }
        let rel = self.coeffs.len();
        let inv0 = Rat::one() / a0.clone();
        let mut out = vec![Rat::zero(); rel];
        out[0] = inv0.clone();
        for m in 1..rel {
            let mut acc = Rat::zero();
            for t in 1..=m {
                acc += self.coeffs[t].clone() * out[m - t].clone();
            }
            out[m] = -inv0.clone() * acc;
        }
        let exact = self.exact && rel == 1;
        Some(ScalarSeries::new(-self.lowest, out, exact))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        self.divided_derivative(1)
    }

    /// Divided-power derivative: sends `z^e` to `binom(e, j) z^(e-j)`.
    pub fn divided_derivative(&self, j: u32) -> Self {
        let coeffs = self
            .iter_known()
            .map(|(e, c)| binom_int(e, j as i64) * c)
            .collect();
        ScalarSeries::new(self.lowest - j as i64, coeffs, self.exact)
    }

    /// Substitute `z -> -z`: the coefficient at exponent `e` picks up `(-1)^e`.
    pub fn compose_neg(&self) -> Self {
        let coeffs = self
            .iter_known()
            .map(|(e, c)| if e.rem_euclid(2) == 0 { c.clone() } else { -c })
            .collect();
        ScalarSeries::new(self.lowest, coeffs, self.exact)
    }

    /// Forget everything at exponent `top` and above (turns exact into
    /// truncated when information is actually dropped).
    pub fn truncate_known_top(&self, top: i64) -> Self {
        if self.known_top().is_some_and(|t| t <= top) {
            return self.clone();
        }
        let coeffs = (self.lowest..top)
            .map(|e| self.coeff(e).unwrap_or_else(Rat::zero))
            .collect();
        ScalarSeries::new(self.lowest, coeffs, false)
    }

    /// Dense coefficient vector on `[lo, hi]`; `None` if any point is unknown.
    pub fn window_coeffs(&self, lo: i64, hi: i64) -> Option<Vec<Rat>> {
        (lo..=hi).map(|e| self.coeff(e)).collect()
    }
}

/// Inclusive exponent rectangle for two-variable windows.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WindowSpec {
    pub i_min: i64,
    pub i_max: i64,
    pub j_min: i64,
    pub j_max: i64,
}

impl WindowSpec {
    pub fn new(i_min: i64, i_max: i64, j_min: i64, j_max: i64) -> Self {
        WindowSpec { i_min, i_max, j_min, j_max }
    }

    /// The square `[-r, r] x [-r, r]`.
    pub fn square(r: i64) -> Self {
        WindowSpec::new(-r, r, -r, r)
    }

    pub fn is_empty(&self) -> bool {
        self.i_min > self.i_max || self.j_min > self.j_max
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= self.i_min && i <= self.i_max && j >= self.j_min && j <= self.j_max
    }

    pub fn intersect(&self, other: &WindowSpec) -> WindowSpec {
        WindowSpec {
            i_min: self.i_min.max(other.i_min),
            i_max: self.i_max.min(other.i_max),
            j_min: self.j_min.max(other.j_min),
            j_max: self.j_max.min(other.j_max),
        }
    }

    /// Window on which `(z-w)^n * X` is determined by `X` known on `self`:
    /// both lower edges move up by `n`.
    pub fn shrink_for_power(&self, n: i64) -> WindowSpec {
        WindowSpec {
            i_min: self.i_min + n,
            i_max: self.i_max,
            j_min: self.j_min + n,
            j_max: self.j_max,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (i64, i64)> {
        let s = *self;
        (s.i_min..=s.i_max).flat_map(move |i| (s.j_min..=s.j_max).map(move |j| (i, j)))
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            ((self.i_max - self.i_min + 1) * (self.j_max - self.j_min + 1)) as usize
        }
    }
}

/// Finite coefficient table of a two-variable series on a [`WindowSpec`].
/// `None` entries mark coefficients that escaped the carrier truncation and
/// are therefore unknown (never treated as zero).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BiWindow<T> {
    spec: WindowSpec,
    values: Vec<Option<T>>,
}

impl<T: Clone + PartialEq> BiWindow<T> {
    pub fn from_fn(spec: WindowSpec, mut f: impl FnMut(i64, i64) -> Option<T>) -> Self {
        let values = spec.points().map(|(i, j)| f(i, j)).collect();
        BiWindow { spec, values }
    }

    pub fn spec(&self) -> WindowSpec {
        self.spec
    }

    fn idx(&self, i: i64, j: i64) -> usize {
        let ncols = (self.spec.j_max - self.spec.j_min + 1) as usize;
        (i - self.spec.i_min) as usize * ncols + (j - self.spec.j_min) as usize
    }

    /// `Some(None)` = inside window but unknown; `None` = outside window.
    pub fn get(&self, i: i64, j: i64) -> Option<&Option<T>> {
        if self.spec.contains(i, j) {
            Some(&self.values[self.idx(i, j)])
        } else {
            None
        }
    }

    pub fn known_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn unknown_count(&self) -> usize {
        self.values.len() - self.known_count()
    }

    /// Pointwise comparison on the intersection of the two windows. A point
    /// counts as checked only when both sides are known; otherwise it is
    /// skipped. Every mismatch is reported with its coordinates.
    pub fn compare(&self, other: &BiWindow<T>) -> WindowCompare<T> {
        let common = self.spec.intersect(&other.spec);
        let mut out = WindowCompare { checked: 0, skipped: 0, mismatches: Vec::new() };
        if common.is_empty() {
            return out;
        }
        for (i, j) in common.points() {
            match (&self.values[self.idx(i, j)], &other.values[other.idx(i, j)]) {
                (Some(a), Some(b)) => {
                    if a == b {
                        out.checked += 1;
                    } else {
                        out.mismatches.push(PointMismatch {
                            i,
                            j,
                            left: a.clone(),
                            right: b.clone(),
                        });
                    }
                }
                _ => out.skipped += 1,
            }
        }
        out
    }

    pub fn map<U: Clone + PartialEq>(&self, mut f: impl FnMut(&T) -> Option<U>) -> BiWindow<U> {
        BiWindow {
            spec: self.spec,
            values: self.values.iter().map(|v| v.as_ref().and_then(&mut f)).collect(),
        }
    }
}

/// Linear combinations with unknown-propagation, used to transform windows.
pub trait WindowValue: Clone + PartialEq {
    fn lin_comb(terms: &[(Rat, &Self)]) -> Self;
}

impl WindowValue for crate::linalg::SparseVec {
    fn lin_comb(terms: &[(Rat, &Self)]) -> Self {
        let dim = terms.first().map(|(_, v)| v.dim()).unwrap_or(0);
        let mut acc = crate::linalg::SparseVec::zero(dim);
        for (c, v) in terms {
            acc = acc.add_scaled(v, c);
        }
        acc
    }
}

impl WindowValue for Rat {
    fn lin_comb(terms: &[(Rat, &Self)]) -> Self {
        let mut acc = Rat::zero();
        for (c, v) in terms {
            acc += c * *v;
        }
        acc
    }
}

impl<T: WindowValue> BiWindow<T> {
    /// Coefficient table of `(z-w)^n * X` for `n >= 0`, computed from this
    /// table alone. Sound only on the shrunken window
    /// `[i_min+n, i_max] x [j_min+n, j_max]`; a point is unknown if any of
    /// the contributing points of `X` is unknown.
    pub fn mul_zw_pow(&self, n: i64) -> BiWindow<T> {
        assert!(n >= 0, "mul_zw_pow requires a nonnegative power");
        self.binomial_transform(n, true)
    }

    /// Coefficient table of `(z+w)^n * X` for `n >= 0` (no alternating
    /// signs), with the same shrunken-window soundness as [`mul_zw_pow`].
    pub fn mul_sum_pow(&self, n: i64) -> BiWindow<T> {
        assert!(n >= 0, "mul_sum_pow requires a nonnegative power");
        self.binomial_transform(n, false)
    }

    /// Coefficient table of `p(z-w) * X` for an exact polynomial `p` in
    /// nonnegative powers of `(z-w)`; sound on the window shrunk by the top
    /// exponent of `p`.
    pub fn mul_zw_poly(&self, p: &ScalarSeries) -> BiWindow<T> {
        assert!(p.is_exact(), "window multiplication needs an exact polynomial");
        assert!(p.is_zero() || p.lowest() >= 0, "negative powers of (z-w) are not window-safe");
        let top = p.iter_known().map(|(e, _)| e).max().unwrap_or(0);
        let spec = self.spec.shrink_for_power(top);
        BiWindow::from_fn(spec, |ii, jj| {
            let mut terms: Vec<(Rat, &T)> = Vec::new();
            for (k, ck) in p.iter_known() {
                if ck.is_zero() {
                    continue;
                }
                for t in 0..=k {
                    let c = binom_int(k, t) * if t % 2 == 0 { ck.clone() } else { -ck.clone() };
                    if c.is_zero() {
                        continue;
                    }
                    match self.get(ii - k + t, jj - t) {
                        Some(Some(v)) => terms.push((c, v)),
                        _ => return None,
                    }
                }
            }
            Some(T::lin_comb(&terms))
        })
    }

    /// Pointwise sum on the intersection of the two windows; a point is
    /// unknown if it is unknown on either side.
    pub fn zip_add(&self, other: &BiWindow<T>) -> BiWindow<T> {
        let spec = self.spec.intersect(&other.spec);
        BiWindow::from_fn(spec, |i, j| match (self.get(i, j), other.get(i, j)) {
            (Some(Some(a)), Some(Some(b))) => {
                Some(T::lin_comb(&[(Rat::one(), a), (Rat::one(), b)]))
            }
            _ => None,
        })
    }

    fn binomial_transform(&self, n: i64, alternating: bool) -> BiWindow<T> {
        let spec = self.spec.shrink_for_power(n);
        BiWindow::from_fn(spec, |ii, jj| {
            let mut terms: Vec<(Rat, &T)> = Vec::with_capacity((n + 1) as usize);
            for t in 0..=n {
                let c = binom_int(n, t);
                let c = if alternating && t % 2 != 0 { -c } else { c };
                if c.is_zero() {
                    continue;
                }
                match self.get(ii - n + t, jj - t) {
                    Some(Some(v)) => terms.push((c, v)),
                    _ => return None,
                }
            }
            Some(T::lin_comb(&terms))
        })
    }
}

/// Outcome of a pointwise window comparison.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WindowCompare<T> {
    pub checked: usize,
    pub skipped: usize,
    pub mismatches: Vec<PointMismatch<T>>,
}

impl<T> WindowCompare<T> {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// One disagreeing coefficient, with both computed values.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointMismatch<T> {
    pub i: i64,
    pub j: i64,
    pub left: T,
    pub right: T,
}

/// `(-1)^k` for any integer `k`.
pub fn neg_one_pow(k: i64) -> Rat {
    if k.rem_euclid(2) == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

/// Absolute value of a rational (used for deterministic witness formatting).
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseVec;
    use crate::{rat, rat_int};
    use proptest::prelude::*;

    #[test]
    fn binomials() {
        assert_eq!(binom_int(5, 2), rat_int(10));
        assert_eq!(binom_int(3, 5), rat_int(0));
        assert_eq!(binom_int(-1, 3), rat_int(-1));
        assert_eq!(binom_int(-2, 2), rat_int(3));
        assert_eq!(binom_int(7, 0), rat_int(1));
        assert_eq!(binom_int(0, 0), rat_int(1));
        assert_eq!(binom_rat(&rat(1, 2), 2), rat(-1, 8));
        assert_eq!(binom_int(4, -1), rat_int(0));
    }

    #[test]
    fn expansion_square() {
        // (z-w)^2 = z^2 - 2 z w + w^2.
        assert_eq!(expand_zw_coeff(2, 2, 0), rat_int(1));
        assert_eq!(expand_zw_coeff(2, 1, 1), rat_int(-2));
        assert_eq!(expand_zw_coeff(2, 0, 2), rat_int(1));
        assert_eq!(expand_zw_coeff(2, 3, -1), rat_int(0));
        assert_eq!(expand_zw_coeff(2, 2, 1), rat_int(0));
    }

    #[test]
    fn expansion_inverse_geometric() {
        // (z-w)^{-1} in |z|>|w| is sum_{k>=0} z^{-1-k} w^k.
        for k in 0..6 {
            assert_eq!(expand_zw_coeff(-1, -1 - k, k), rat_int(1));
        }
        assert_eq!(expand_zw_coeff(-1, 0, -1), rat_int(0));
    }

    #[test]
    fn expansions_agree_for_nonnegative_powers() {
        for n in 0..4 {
            for i in -3..6 {
                for j in -3..6 {
                    assert_eq!(expand_zw_coeff(n, i, j), expand_wz_coeff(n, i, j), "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn delta_is_difference_of_inverse_expansions() {
        for i in -6..6 {
            for j in -6..6 {
                let lhs = expand_zw_coeff(-1, i, j) - expand_wz_coeff(-1, i, j);
                assert_eq!(lhs, delta_coeff(i, j), "i={i} j={j}");
            }
        }
    }

    #[test]
    fn expansion_product_law() {
        // Coefficientwise: expand(m) * expand(n) = expand(m+n) in the same
        // region, checked by convolving over the w-degree split.
        for (m, n) in [(2i64, -1i64), (-1, -1), (3, -2), (-2, 1)] {
            for i in -6..6 {
                for j in 0..6 {
                    let mut conv = Rat::zero();
                    for j1 in 0..=j {
                        for i1 in -8..=8 {
                            conv += expand_zw_coeff(m, i1, j1) * expand_zw_coeff(n, i - i1, j - j1);
                        }
                    }
                    assert_eq!(conv, expand_zw_coeff(m + n, i, j), "m={m} n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn series_exp_ode_to_order_eight() {
        let c = rat(3, 2);
        let e = ScalarSeries::exp(&c, 9);
        let lhs = e.derivative();
        let rhs = e.scale(&c);
        for k in 0..8 {
            assert_eq!(lhs.coeff(k), rhs.coeff(k), "order {k}");
        }
    }

    #[test]
    fn series_exp_multiplicative_inverse() {
        let c = rat_int(2);
        let e = ScalarSeries::exp(&c, 8);
        let en = ScalarSeries::exp(&(-c), 8);
        let prod = e.mul(&en);
        assert_eq!(prod.coeff(0), Some(rat_int(1)));
        for k in 1..7 {
            assert_eq!(prod.coeff(k), Some(rat_int(0)), "order {k}");
        }
    }

    #[test]
    fn series_geometric_inverse() {
        // (1 - z)^{-1} = 1 + z + z^2 + ...
        let one_minus_z = ScalarSeries::new(0, vec![rat_int(1), rat_int(-1), rat_int(0), rat_int(0), rat_int(0)], false);
        let inv = one_minus_z.inverse().unwrap();
        for k in 0..5 {
            assert_eq!(inv.coeff(k), Some(rat_int(1)), "order {k}");
        }
        assert_eq!(inv.coeff(5), None);
    }

    #[test]
    fn series_bernoulli_numerators() {
        // z / (e^z - 1) = 1 - z/2 + z^2/12 + 0 z^3 - z^4/720 + ...
        let e = ScalarSeries::exp(&rat_int(1), 8);
        let em1 = e.sub(&ScalarSeries::one());
        let f = ScalarSeries::monomial(1, rat_int(1)).mul(&em1.inverse().unwrap());
        assert_eq!(f.coeff(0), Some(rat_int(1)));
        assert_eq!(f.coeff(1), Some(rat(-1, 2)));
        assert_eq!(f.coeff(2), Some(rat(1, 12)));
        assert_eq!(f.coeff(3), Some(rat_int(0)));
        assert_eq!(f.coeff(4), Some(rat(-1, 720)));
    }

    #[test]
    fn series_bernoulli_plus_convention() {
        // z / (1 - e^{-z}) = 1 + z/2 + z^2/12 + 0 z^3 - z^4/720 + ...
        let em = ScalarSeries::exp(&rat_int(-1), 8);
        let den = ScalarSeries::one().sub(&em);
        let f = ScalarSeries::monomial(1, rat_int(1)).mul(&den.inverse().unwrap());
        assert_eq!(f.coeff(0), Some(rat_int(1)));
        assert_eq!(f.coeff(1), Some(rat(1, 2)));
        assert_eq!(f.coeff(2), Some(rat(1, 12)));
        assert_eq!(f.coeff(3), Some(rat_int(0)));
        assert_eq!(f.coeff(4), Some(rat(-1, 720)));
    }

    #[test]
    fn series_residue_of_derivative_vanishes() {
        let s = ScalarSeries::new(-3, (0..7).map(rat_int).collect(), true);
        assert_eq!(s.derivative().residue(), Some(rat_int(0)));
    }

    #[test]
    fn series_divided_derivative_on_negative_exponent() {
        // d^(2)/dz^2 of z^{-1} = binom(-1,2) z^{-3} = z^{-3}.
        let s = ScalarSeries::monomial(-1, rat_int(1)).divided_derivative(2);
        assert_eq!(s.coeff(-3), Some(rat_int(1)));
        assert_eq!(s.lowest(), -3);
    }

    #[test]
    fn series_compose_neg() {
        let s = ScalarSeries::new(-1, vec![rat_int(1), rat_int(1), rat_int(1)], true);
        let t = s.compose_neg();
        assert_eq!(t.coeff(-1), Some(rat_int(-1)));
        assert_eq!(t.coeff(0), Some(rat_int(1)));
        assert_eq!(t.coeff(1), Some(rat_int(-1)));
    }

    #[test]
    fn series_mul_knowledge_window() {
        // Truncated factor known below z^3 times z^(-2) is known below z^1.
        let a = ScalarSeries::new(0, vec![rat_int(1), rat_int(1), rat_int(1)], false);
        let b = ScalarSeries::monomial(-2, rat_int(1));
        let p = a.mul(&b);
        assert_eq!(p.known_top(), Some(1));
        assert_eq!(p.coeff(-2), Some(rat_int(1)));
        assert_eq!(p.coeff(1), None);
    }

    fn point_mass(i0: i64, j0: i64, spec: WindowSpec) -> BiWindow<SparseVec> {
        BiWindow::from_fn(spec, |i, j| {
            Some(if i == i0 && j == j0 {
                SparseVec::unit(1, 0)
            } else {
                SparseVec::zero(1)
            })
        })
    }

    #[test]
    fn window_power_multiplication() {
        let spec = WindowSpec::square(3);
        let x = point_mass(-1, -1, spec);
        let t = x.mul_zw_pow(1);
        assert_eq!(t.spec(), WindowSpec::new(-2, 3, -2, 3));
        // (z-w) * z^{-1} w^{-1} = w^{-1} - z^{-1}: support at (0,-1) and (-1,0).
        assert_eq!(t.get(0, -1), Some(&Some(SparseVec::unit(1, 0))));
        assert_eq!(t.get(-1, 0), Some(&Some(SparseVec::unit(1, 0).neg())));
        assert_eq!(t.get(0, 0), Some(&Some(SparseVec::zero(1))));
        assert_eq!(t.get(-2, -2), Some(&Some(SparseVec::zero(1))));
    }

    #[test]
    fn window_compare_reports_witness_and_skips_unknowns() {
        let spec = WindowSpec::square(1);
        let a = point_mass(0, 0, spec);
        let b = BiWindow::from_fn(spec, |i, j| {
            if i == 1 && j == 1 {
                None // unknown point
            } else if i == 0 && j == 0 {
                Some(SparseVec::unit(1, 0).scale(&rat_int(2)))
            } else {
                Some(SparseVec::zero(1))
            }
        });
        let cmp = a.compare(&b);
        assert_eq!(cmp.skipped, 1);
        assert_eq!(cmp.checked, 7);
        assert_eq!(cmp.mismatches.len(), 1);
        let m = &cmp.mismatches[0];
        assert_eq!((m.i, m.j), (0, 0));
        assert_eq!(m.left, SparseVec::unit(1, 0));
        assert_eq!(m.right, SparseVec::unit(1, 0).scale(&rat_int(2)));
    }

    proptest! {
        #[test]
        fn pascal_rule_holds_for_rational_upper_argument(p in -12i64..=12, q in 1i64..=6, k in 0i64..=8) {
            let n = rat(p, q);
            let lhs = binom_rat(&n, k);
            let prev = n.clone() - rat_int(1);
            let rhs = binom_rat(&prev, k - 1) + binom_rat(&prev, k);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn expansion_rows_sum_to_binomial_value_at_one(n in -5i64..=5, j in 0i64..=10) {
            // Coefficient at w-degree j in (z-w)^n equals binom(n,j)(-1)^j z^{n-j}.
            let c = expand_zw_coeff(n, n - j, j);
            let expect = binom_int(n, j) * neg_one_pow(j);
            prop_assert_eq!(c, expect);
        }

        #[test]
        fn series_add_commutes(a in proptest::collection::vec(-4i64..=4, 1..6),
                               b in proptest::collection::vec(-4i64..=4, 1..6),
                               la in -3i64..=3, lb in -3i64..=3) {
            let sa = ScalarSeries::new(la, a.into_iter().map(rat_int).collect(), true);
            let sb = ScalarSeries::new(lb, b.into_iter().map(rat_int).collect(), true);
            prop_assert_eq!(sa.add(&sb), sb.add(&sa));
        }

        #[test]
        fn series_mul_matches_coefficient_convolution(
            a in proptest::collection::vec(-3i64..=3, 1..5),
            b in proptest::collection::vec(-3i64..=3, 1..5)) {
            let sa = ScalarSeries::new(-1, a.iter().copied().map(rat_int).collect(), true);
            let sb = ScalarSeries::new(-2, b.iter().copied().map(rat_int).collect(), true);
            let p = sa.mul(&sb);
            for e in -6..8i64 {
                let mut conv = Rat::zero();
                for (ea, ca) in sa.iter_known() {
                    if let Some(cb) = sb.coeff(e - ea) {
                        conv += ca * cb;
                    }
                }
                prop_assert_eq!(p.coeff(e).unwrap(), conv);
            }
        }
    }
}
