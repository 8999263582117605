//! Coefficient evaluators for products of fields.
//!
//! Everything here is a finite exact computation: infinite-looking sums are
//! cut off by the stored vanishing bounds, and any appeal to a truncated-away
//! product surfaces as an unknown (`None`) window entry rather than a wrong
//! zero. Evaluators are generic over [`Modes`], so the same code drives
//! algebra-on-itself checks and module checks.

use num_traits::Zero;

use crate::fieldalg::{FieldAlgebra, Modes};
use crate::formal::{binom_int, neg_one_pow, BiWindow, WindowSpec};
use crate::linalg::{SparseVec, VecBuilder};
use crate::{Esc, Rat};

/// `a_{-i-1} (b_{-j-1} c)`: the coefficient of `z^i w^j` in
/// `Y(a,z) Y(b,w) c`.
pub fn ab_point<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    i: i64,
    j: i64,
) -> Result<SparseVec, Esc> {
    let inner = md.act(b, -j - 1, c)?;
    md.act(a, -i - 1, &inner)
}

/// `b_{-j-1} (a_{-i-1} c)`: the coefficient of `z^i w^j` in
/// `Y(b,w) Y(a,z) c`.
pub fn ba_point<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    i: i64,
    j: i64,
) -> Result<SparseVec, Esc> {
    let inner = md.act(a, -i - 1, c)?;
    md.act(b, -j - 1, &inner)
}

/// Window of `Y(a,z) Y(b,w) c` coefficients.
pub fn ab_window<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    spec: WindowSpec,
) -> BiWindow<SparseVec> {
    BiWindow::from_fn(spec, |i, j| ab_point(md, a, b, c, i, j).ok())
}

/// Window of `Y(b,w) Y(a,z) c` coefficients.
pub fn ba_window<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    spec: WindowSpec,
) -> BiWindow<SparseVec> {
    BiWindow::from_fn(spec, |i, j| ba_point(md, a, b, c, i, j).ok())
}

/// Window of `sum_t Y(b^t, w) Y(a^t, z) c` for exchange pairs
/// `(a^t, b^t)`.
pub fn exchange_window<M: Modes>(
    md: &M,
    pairs: &[(SparseVec, SparseVec)],
    c: &SparseVec,
    spec: WindowSpec,
) -> BiWindow<SparseVec> {
    BiWindow::from_fn(spec, |i, j| {
        let mut acc = VecBuilder::new(md.target_dim());
        for (at, bt) in pairs {
            match ba_point(md, at, bt, c, i, j) {
                Ok(v) => acc.add_scaled(&v, &Rat::from_integer(1.into())),
                Err(Esc) => return None,
            }
        }
        Some(acc.build())
    })
}

/// Coefficient of `x^I w^J` in `Y(a, x+w) Y(b, w) c`, where negative powers
/// of `x+w` are expanded with nonnegative powers of `w`. The sum over the
/// outer mode terminates because the inner mode rises as it falls.
pub fn assoc_lhs_point<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    i: i64,
    j: i64,
) -> Result<SparseVec, Esc> {
    let mut acc = VecBuilder::new(md.target_dim());
    let Some(zf_bc) = md.zero_from(b, c) else {
        return Ok(acc.build());
    };
    // Terms a_m (b_p c) with p = -m - i - j - 2 and the expansion weight
    // binom(-m-1, -m-1-i) on z^... the exponent bookkeeping: m <= -i-1 and
    // p < zf_bc bounds the loop on both ends.
    let mut m = -i - 1;
    loop {
        let p = -m - i - j - 2;
        if p >= zf_bc {
            break;
        }
        let coeff = binom_int(-m - 1, -m - 1 - i);
        if !coeff.is_zero() {
            let inner = md.act(b, p, c)?;
            let outer = md.act(a, m, &inner)?;
            acc.add_scaled(&outer, &coeff);
        }
        m -= 1;
    }
    Ok(acc.build())
}

/// Coefficient of `x^I w^J` in `Y(Y(a,x) b, w) c`.
pub fn assoc_rhs_point<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    i: i64,
    j: i64,
) -> Result<SparseVec, Esc> {
    let ab = md.algebra().mode(a, -i - 1, b)?;
    md.act(&ab, -j - 1, c)
}

pub fn assoc_lhs_window<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    spec: WindowSpec,
) -> BiWindow<SparseVec> {
    BiWindow::from_fn(spec, |i, j| assoc_lhs_point(md, a, b, c, i, j).ok())
}

pub fn assoc_rhs_window<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    spec: WindowSpec,
) -> BiWindow<SparseVec> {
    BiWindow::from_fn(spec, |i, j| assoc_rhs_point(md, a, b, c, i, j).ok())
}

/// Opposite-orientation mode product
/// `a^op_n b = sum_{l >= 0} (-1)^(n+l+1) s^(l) (b_{n+l} a)`, where `s^(l)`
/// is the divided power of the translation map.
pub fn op_mode(alg: &FieldAlgebra, a: &SparseVec, n: i64, b: &SparseVec) -> Result<SparseVec, Esc> {
    let mut acc = VecBuilder::new(alg.dim());
    let Some(zf_ba) = alg.zero_from(b, a) else {
        return Ok(acc.build());
    };
    let mut l: i64 = 0;
    while n + l < zf_ba {
        let prod = alg.mode(b, n + l, a)?;
        if !prod.is_zero() {
            let v = alg.apply_s_divided(l as u32, &prod)?;
            acc.add_scaled(&v, &neg_one_pow(n + l + 1));
        }
        l += 1;
    }
    Ok(acc.build())
}

/// The general mode identity relating all three pairings of `a, b, c`:
/// for integers `(q, m, n)`,
/// `sum_{t>=0} binom(q,t) (a_{n+t} b)_{q+m-t} c`
/// `  = sum_{t>=0} (-1)^t binom(n,t) [ a_{q+n-t} (b_{m+t} c)`
/// `                                   - (-1)^n b_{n+m-t} (a_{q+t} c) ]`.
/// All three sums terminate by the stored vanishing bounds.
pub fn cross_bracket_point<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    q: i64,
    m: i64,
    n: i64,
) -> Result<(SparseVec, SparseVec), Esc> {
    let alg = md.algebra();
    let dim = md.target_dim();

    let mut lhs = VecBuilder::new(dim);
    if let Some(zf_ab) = alg.zero_from(a, b) {
        let mut t = 0;
        while n + t < zf_ab {
            let coeff = binom_int(q, t);
            if !coeff.is_zero() {
                let ab = alg.mode(a, n + t, b)?;
                let v = md.act(&ab, q + m - t, c)?;
                lhs.add_scaled(&v, &coeff);
            }
            t += 1;
        }
    }

    let mut rhs = VecBuilder::new(dim);
    if let Some(zf_bc) = md.zero_from(b, c) {
        let mut t = 0;
        while m + t < zf_bc {
            let coeff = binom_int(n, t) * neg_one_pow(t);
            if !coeff.is_zero() {
                let inner = md.act(b, m + t, c)?;
                let v = md.act(a, q + n - t, &inner)?;
                rhs.add_scaled(&v, &coeff);
            }
            t += 1;
        }
    }
    if let Some(zf_ac) = md.zero_from(a, c) {
        let mut t = 0;
        while q + t < zf_ac {
            let coeff = binom_int(n, t) * neg_one_pow(t + n + 1);
            if !coeff.is_zero() {
                let inner = md.act(a, q + t, c)?;
                let v = md.act(b, n + m - t, &inner)?;
                rhs.add_scaled(&v, &coeff);
            }
            t += 1;
        }
    }
    Ok((lhs.build(), rhs.build()))
}

/// Residue-extraction formula for a single product mode: `(a_n b)_m c`
/// equals the `q = 0` case of the general identity, i.e.
/// `sum_t (-1)^t binom(n,t) [a_{n-t}(b_{m+t}c) - (-1)^n b_{n+m-t}(a_t c)]`.
pub fn residue_mode_point<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    n: i64,
    m: i64,
) -> Result<(SparseVec, SparseVec), Esc> {
    let alg = md.algebra();
    let ab = alg.mode(a, n, b)?;
    let lhs = md.act(&ab, m, c)?;
    let (_, rhs) = cross_bracket_point(md, a, b, c, 0, m, n)?;
    Ok((lhs, rhs))
}

/// Reconstruction of a negative product mode from the two-sided normal
/// ordering: for `n = -mm - 1 < 0`,
/// `(a_{-mm-1} b)_p c = sum_{j <= -mm-1} binom(-j-1, mm) a_j (b_{p-j-mm-1} c)`
/// `                  + sum_{j >= -mm} binom(-j-1, mm) b_{p-j-mm-1} (a_j c)`.
pub fn normal_order_point<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    mm: i64,
    p: i64,
) -> Result<SparseVec, Esc> {
    assert!(mm >= 0);
    let dim = md.target_dim();
    let mut acc = VecBuilder::new(dim);
    if let Some(zf_bc) = md.zero_from(b, c) {
        // Creation half: j runs downward, the inner mode runs upward.
        let mut j = -mm - 1;
        loop {
            let k = p - j - mm - 1;
            if k >= zf_bc {
                break;
            }
            let coeff = binom_int(-j - 1, mm);
            if !coeff.is_zero() {
                let inner = md.act(b, k, c)?;
                let v = md.act(a, j, &inner)?;
                acc.add_scaled(&v, &coeff);
            }
            j -= 1;
        }
    }
    if let Some(zf_ac) = md.zero_from(a, c) {
        let mut j = -mm;
        while j < zf_ac {
            let coeff = binom_int(-j - 1, mm);
            if !coeff.is_zero() {
                let inner = md.act(a, j, c)?;
                let v = md.act(b, p - j - mm - 1, &inner)?;
                acc.add_scaled(&v, &coeff);
            }
            j += 1;
        }
    }
    Ok(acc.build())
}

/// Commutator window: the coefficient table of
/// `Y(a,z) Y(b,w) c - Y(b,w) Y(a,z) c`.
pub fn commutator_window<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    spec: WindowSpec,
) -> BiWindow<SparseVec> {
    BiWindow::from_fn(spec, |i, j| {
        let abv = ab_point(md, a, b, c, i, j).ok()?;
        let bav = ba_point(md, a, b, c, i, j).ok()?;
        Some(abv.sub(&bav))
    })
}

/// Delta-derivative expansion window: the coefficient table of
/// `sum_{jj >= 0} Y(a_jj b, w) c * (jj-th divided delta derivative)`, which
/// at `(z^I, w^J)` is `sum_jj binom(-I-1, jj) (a_jj b)_{-I-J-jj-2} c`.
pub fn delta_expansion_window<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    spec: WindowSpec,
) -> BiWindow<SparseVec> {
    let alg = md.algebra();
    let dim = md.target_dim();
    BiWindow::from_fn(spec, |i, j| {
        let mut acc = VecBuilder::new(dim);
        let Some(zf_ab) = alg.zero_from(a, b) else {
            return Some(acc.build());
        };
        for jj in 0..zf_ab.max(0) {
            let coeff = binom_int(-i - 1, jj);
            if coeff.is_zero() {
                continue;
            }
            let ab = alg.mode(a, jj, b).ok()?;
            let v = md.act(&ab, -i - j - jj - 2, c).ok()?;
            acc.add_scaled(&v, &coeff);
        }
        Some(acc.build())
    })
}
