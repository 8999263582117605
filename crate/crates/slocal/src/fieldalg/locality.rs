//! Locality and exchange-locality certificates.
//!
//! A certificate for an ordered pair `(a, b)` asserts that for some order
//! `n >= 0`, `(z-w)^n Y(a,z) Y(b,w)` equals `(z-w)^n` times either the
//! swapped product (plain locality), a finite sum of swapped products over
//! exchange pairs, or such a sum with polynomial coefficients in `(z-w)`.
//! Certificates are never taken on faith: they carry the window comparisons
//! that verified them, with per-point checked/skipped accounting.

use num_traits::Zero;

use crate::fieldalg::eval::{ab_window, ba_window, exchange_window};
use crate::fieldalg::{FieldAlgebra, Modes};
use crate::formal::{BiWindow, ScalarSeries, WindowSpec};
use crate::linalg::{rref_solve, SparseVec};
use crate::report::{Check, CheckSet, Verdict};
use crate::{Error, Result};

/// What kind of exchange relation a certificate asserts.
#[derive(Clone, Debug)]
pub enum LocalityKind {
    /// `(z-w)^n Y(a,z)Y(b,w) = (z-w)^n Y(b,w)Y(a,z)`.
    Local { order: i64 },
    /// `(z-w)^n Y(a,z)Y(b,w) = (z-w)^n sum_t Y(b^t,w)Y(a^t,z)`.
    SLocal { order: i64, pairs: Vec<(SparseVec, SparseVec)> },
    /// `(z-w)^n Y(a,z)Y(b,w) = sum_t p_t(z-w) (z-w)^n Y(b^t,w)Y(a^t,z)`
    /// with exact polynomial coefficients `p_t`.
    WeakSLocal { order: i64, terms: Vec<(ScalarSeries, SparseVec, SparseVec)> },
}

impl LocalityKind {
    pub fn order(&self) -> i64 {
        match self {
            LocalityKind::Local { order } => *order,
            LocalityKind::SLocal { order, .. } => *order,
            LocalityKind::WeakSLocal { order, .. } => *order,
        }
    }
}

/// A verified exchange relation for one ordered pair of states.
#[derive(Clone, Debug)]
pub struct LocalityCertificate {
    pub a: SparseVec,
    pub b: SparseVec,
    pub kind: LocalityKind,
    /// The comparisons that established the relation.
    pub checks: CheckSet,
}

impl LocalityCertificate {
    pub fn order(&self) -> i64 {
        self.kind.order()
    }

    pub fn verdict(&self) -> Verdict {
        self.checks.verdict()
    }
}

/// Compare `(z-w)^n Y(a,z)Y(b,w)c` with `(z-w)^n Y(b,w)Y(a,z)c` on the
/// window (both sides shrunk by `n`).
pub fn local_check<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    c: &SparseVec,
    n: i64,
    spec: WindowSpec,
    subject: &str,
    fmt: impl Fn(&SparseVec) -> String,
) -> Check {
    let lhs = ab_window(md, a, b, c, spec).mul_zw_pow(n);
    let rhs = ba_window(md, a, b, c, spec).mul_zw_pow(n);
    Check::from_compare("locality", &format!("{subject}, order {n}"), &lhs.compare(&rhs), |v| {
        fmt(v)
    })
}

/// Compare `(z-w)^n Y(a,z)Y(b,w)c` with the exchange sum
/// `(z-w)^n sum_t Y(b^t,w)Y(a^t,z)c`.
pub fn s_local_check<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    pairs: &[(SparseVec, SparseVec)],
    c: &SparseVec,
    n: i64,
    spec: WindowSpec,
    subject: &str,
    fmt: impl Fn(&SparseVec) -> String,
) -> Check {
    let lhs = ab_window(md, a, b, c, spec).mul_zw_pow(n);
    let rhs = exchange_window(md, pairs, c, spec).mul_zw_pow(n);
    Check::from_compare(
        "s_locality",
        &format!("{subject}, order {n}, {} exchange pair(s)", pairs.len()),
        &lhs.compare(&rhs),
        |v| fmt(v),
    )
}

/// Compare `(z-w)^n Y(a,z)Y(b,w)c` with
/// `sum_t p_t(z-w) (z-w)^n Y(b^t,w)Y(a^t,z)c`, the exchange relation with
/// polynomial coefficients.
pub fn weak_s_local_check<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    terms: &[(ScalarSeries, SparseVec, SparseVec)],
    c: &SparseVec,
    n: i64,
    spec: WindowSpec,
    subject: &str,
    fmt: impl Fn(&SparseVec) -> String,
) -> Check {
    let lhs = ab_window(md, a, b, c, spec).mul_zw_pow(n);
    let mut rhs: Option<BiWindow<SparseVec>> = None;
    for (p, at, bt) in terms {
        let w = ba_window(md, at, bt, c, spec).mul_zw_poly(&p.shift(n));
        rhs = Some(match rhs {
            None => w,
            Some(acc) => acc.zip_add(&w),
        });
    }
    let zero_dim = md.target_dim();
    let rhs = rhs.unwrap_or_else(|| {
        BiWindow::from_fn(spec.shrink_for_power(n), |_, _| Some(SparseVec::zero(zero_dim)))
    });
    Check::from_compare(
        "s_locality.weak",
        &format!("{subject}, order {n}, {} term(s)", terms.len()),
        &lhs.compare(&rhs),
        |v| fmt(v),
    )
}

/// Smallest order `n <= nmax` at which plain locality verifies on every
/// sample vector, together with the verifying comparisons.
pub fn find_locality_order<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    samples: &[SparseVec],
    nmax: i64,
    spec: WindowSpec,
    subject: &str,
    fmt: impl Fn(&SparseVec) -> String,
) -> Option<(i64, CheckSet)> {
    for n in 0..=nmax {
        let mut set = CheckSet::new();
        for c in samples {
            set.push(local_check(md, a, b, c, n, spec, subject, &fmt));
        }
        if set.verdict().is_pass() {
            return Some((n, set));
        }
    }
    None
}

fn try_pairs<M: Modes>(
    md: &M,
    a: &SparseVec,
    b: &SparseVec,
    pairs: &[(SparseVec, SparseVec)],
    samples: &[SparseVec],
    nmax: i64,
    spec: WindowSpec,
    subject: &str,
    fmt: impl Fn(&SparseVec) -> String + Copy,
) -> Option<(i64, CheckSet)> {
    for n in 0..=nmax {
        let mut set = CheckSet::new();
        for c in samples {
            set.push(s_local_check(md, a, b, pairs, c, n, spec, subject, fmt));
        }
        if set.verdict().is_pass() {
            return Some((n, set));
        }
    }
    None
}

/// Solve for exchange pairs at a fixed order: find coefficients `x_{uv}`
/// over grading-compatible basis pairs `(u, v)` such that
/// `(z-w)^n Y(a,z)Y(b,w)c = (z-w)^n sum x_{uv} Y(v,w)Y(u,z)c` on every
/// usable window point of every sample. Points where any side escapes are
/// excluded from the fit (and re-verification reports them as skipped).
/// The exchange pairs live in the acting algebra; the samples `c` live in
/// whatever carrier `md` acts on.
fn solve_exchange<M: Modes>(
    md: &M,
    a: usize,
    b: usize,
    samples: &[SparseVec],
    n: i64,
    spec: WindowSpec,
) -> Option<Vec<(SparseVec, SparseVec)>> {
    let alg = md.algebra();
    let d = alg.dim();
    let deg_sum = alg.deg(a) + alg.deg(b);
    let candidates: Vec<(usize, usize)> = (0..d)
        .flat_map(|u| (0..d).map(move |v| (u, v)))
        .filter(|(u, v)| alg.deg(*u) + alg.deg(*v) == deg_sum)
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let ea = SparseVec::unit(d, a);
    let eb = SparseVec::unit(d, b);

    // Collect target and candidate windows per sample, then keep only the
    // points where everything is computable.
    let shrunk = spec.shrink_for_power(n);
    let mut usable: Vec<(usize, i64, i64)> = Vec::new();
    let mut targets: Vec<BiWindow<SparseVec>> = Vec::new();
    let mut cand_windows: Vec<Vec<BiWindow<SparseVec>>> = Vec::new();
    for (ci, c) in samples.iter().enumerate() {
        let t = ab_window(md, &ea, &eb, c, spec).mul_zw_pow(n);
        let cws: Vec<BiWindow<SparseVec>> = candidates
            .iter()
            .map(|(u, v)| {
                let eu = SparseVec::unit(d, *u);
                let ev = SparseVec::unit(d, *v);
                ba_window(md, &eu, &ev, c, spec).mul_zw_pow(n)
            })
            .collect();
        for (i, j) in shrunk.points() {
            let t_known = matches!(t.get(i, j), Some(Some(_)));
            let all_known = cws.iter().all(|w| matches!(w.get(i, j), Some(Some(_))));
            if t_known && all_known {
                usable.push((ci, i, j));
            }
        }
        targets.push(t);
        cand_windows.push(cws);
    }
    if usable.is_empty() {
        return None;
    }

    // Flatten into one long coordinate vector per candidate.
    let point_dim = md.target_dim();
    let total = usable.len() * point_dim;
    let flatten = |per_sample: &dyn Fn(usize, i64, i64) -> SparseVec| -> SparseVec {
        SparseVec::from_entries(
            total,
            usable.iter().enumerate().flat_map(|(k, (ci, i, j))| {
                per_sample(*ci, *i, *j)
                    .iter()
                    .map(|(coord, val)| (k * point_dim + coord, val.clone()))
                    .collect::<Vec<_>>()
            }),
        )
    };
    let rows: Vec<SparseVec> = (0..candidates.len())
        .map(|t| {
            flatten(&|ci, i, j| match cand_windows[ci][t].get(i, j) {
                Some(Some(v)) => v.clone(),
                _ => unreachable!("usable points are computable"),
            })
        })
        .collect();
    let rhs = flatten(&|ci, i, j| match targets[ci].get(i, j) {
        Some(Some(v)) => v.clone(),
        _ => unreachable!("usable points are computable"),
    });
    let (_, sol) = rref_solve(&rows, Some(&rhs)).ok()?;
    let sol = sol?;
    let pairs: Vec<(SparseVec, SparseVec)> = sol
        .iter()
        .filter(|(_, coef)| !coef.is_zero())
        .map(|(t, coef)| {
            let (u, v) = candidates[t];
            (SparseVec::unit(d, u).scale(coef), SparseVec::unit(d, v))
        })
        .collect();
    Some(pairs)
}

/// Find a minimal-order exchange certificate for the ordered basis pair
/// `(a, b)` of the acting algebra, with sample states taken from whatever
/// carrier `md` acts on: plain locality first, then the algebra's exchange
/// hints, then a linear solve for exchange pairs. Whatever is found is
/// re-verified by direct window comparison before being returned.
pub fn find_s_locality_for<M: Modes>(
    md: &M,
    a: usize,
    b: usize,
    samples: &[SparseVec],
    nmax: i64,
    spec: WindowSpec,
    subject: &str,
    fmt: impl Fn(&SparseVec) -> String + Copy,
) -> Result<LocalityCertificate> {
    let alg = md.algebra();
    let d = alg.dim();
    let ea = SparseVec::unit(d, a);
    let eb = SparseVec::unit(d, b);

    let identity = vec![(ea.clone(), eb.clone())];
    if let Some((order, checks)) =
        try_pairs(md, &ea, &eb, &identity, samples, nmax, spec, subject, fmt)
    {
        return Ok(LocalityCertificate { a: ea, b: eb, kind: LocalityKind::Local { order }, checks });
    }

    if let Some(hint) = alg.hint_for(a, b) {
        if let Some((order, checks)) =
            try_pairs(md, &ea, &eb, hint, samples, nmax, spec, subject, fmt)
        {
            return Ok(LocalityCertificate {
                a: ea,
                b: eb,
                kind: LocalityKind::SLocal { order, pairs: hint.clone() },
                checks,
            });
        }
    }

    for n in 0..=nmax {
        if let Some(pairs) = solve_exchange(md, a, b, samples, n, spec) {
            let mut checks = CheckSet::new();
            for c in samples {
                checks.push(s_local_check(md, &ea, &eb, &pairs, c, n, spec, subject, fmt));
            }
            if checks.verdict().is_pass() {
                return Ok(LocalityCertificate {
                    a: ea,
                    b: eb,
                    kind: LocalityKind::SLocal { order: n, pairs },
                    checks,
                });
            }
        }
    }

    Err(Error::NoCertificate(format!(
        "no exchange relation of order <= {nmax} verifies for {subject} on the given window"
    )))
}

/// [`find_s_locality_for`] with the algebra acting on itself.
pub fn find_s_locality(
    alg: &FieldAlgebra,
    a: usize,
    b: usize,
    samples: &[SparseVec],
    nmax: i64,
    spec: WindowSpec,
) -> Result<LocalityCertificate> {
    let subject = format!("({}, {}) in {}", alg.label(a), alg.label(b), alg.name());
    find_s_locality_for(alg, a, b, samples, nmax, spec, &subject, |v| alg.fmt_vec(v))
}
