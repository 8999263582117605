//! Batched law verification for a truncated field algebra.
//!
//! The suite runs the vacuum and translation laws plus, depending on the
//! claimed structure, weak associativity (all structures), skew-symmetry,
//! product-mode reconstruction, the general mode identity and the commutator
//! delta expansion (honest vertex structures only — exchange-twisted
//! structures deliberately skip the laws they do not claim).

use crate::fieldalg::consequences::{
    commutator_delta_check, cross_bracket_check, product_reconstruction_check,
    skew_symmetry_check, weak_assoc_check,
};
use crate::fieldalg::{FieldAlgebra, Modes, TripleSampler};
use crate::formal::WindowSpec;
use crate::linalg::SparseVec;
use crate::report::{Check, CheckSet, Witness};

/// Which family of laws the carrier claims to satisfy.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SuiteKind {
    /// Vacuum, translation, weak associativity only.
    FieldAlgebra,
    /// As above; exchange relations are certified separately.
    SLocalVertex,
    /// Full vertex laws including skew-symmetry and commutators.
    Vertex,
}

/// Suite tuning: sampling caps, comparison window, mode sweep depth.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub kind: SuiteKind,
    pub sampler: TripleSampler,
    pub spec: WindowSpec,
    /// Lower end of explicit mode sweeps (upper ends come from the stored
    /// vanishing bounds).
    pub mode_lo: i64,
}

impl SuiteConfig {
    pub fn new(kind: SuiteKind) -> Self {
        SuiteConfig { kind, sampler: TripleSampler::default(), spec: WindowSpec::square(3), mode_lo: -4 }
    }
}

fn eq_check(
    rule: &str,
    subject: &str,
    location: String,
    lhs: Result<SparseVec, crate::Esc>,
    rhs: Result<SparseVec, crate::Esc>,
    fmt: impl Fn(&SparseVec) -> String,
) -> Check {
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => {
            if l == r {
                Check::pass(rule, subject, 1, 0)
            } else {
                Check::fail(
                    rule,
                    subject,
                    0,
                    0,
                    Witness { location, left: fmt(&l), right: fmt(&r) },
                )
            }
        }
        _ => Check::inconclusive(rule, subject, 1),
    }
}

/// Vacuum laws for a single basis element: creation (`a_{-1} vac = a`),
/// annihilation (`a_n vac = 0` for `n >= 0`), the vacuum field acting as
/// the identity at mode `-1` and as zero elsewhere, and `s(vac) = 0`.
pub fn vacuum_checks(alg: &FieldAlgebra, a: usize, set: &mut CheckSet) {
    let d = alg.dim();
    let ea = SparseVec::unit(d, a);
    let vac = alg.vacuum().clone();
    let subject = format!("{} in {}", alg.label(a), alg.name());
    let fmt = |v: &SparseVec| alg.fmt_vec(v);

    set.push(eq_check(
        "vacuum.create",
        &subject,
        "mode -1 on the vacuum".into(),
        alg.mode(&ea, -1, &vac),
        Ok(ea.clone()),
        fmt,
    ));

    if let Some(zf) = alg.zero_from(&ea, &vac) {
        let mut checked = 0;
        let mut bad: Option<(i64, SparseVec)> = None;
        for n in 0..zf.max(0) {
            match alg.mode(&ea, n, &vac) {
                Ok(v) if v.is_zero() => checked += 1,
                Ok(v) => {
                    bad = Some((n, v));
                    break;
                }
                Err(_) => {}
            }
        }
        match bad {
            Some((n, v)) => set.push(Check::fail(
                "vacuum.annihilate",
                &subject,
                checked,
                0,
                Witness {
                    location: format!("mode n = {n} on the vacuum"),
                    left: alg.fmt_vec(&v),
                    right: "0".into(),
                },
            )),
            None => set.push(Check::pass("vacuum.annihilate", &subject, checked.max(1), 0)),
        }
    }

    // The vacuum field is the identity: vac_n a = [n = -1] a.
    let lo = -3;
    let hi = alg.zero_from(&vac, &ea).unwrap_or(0);
    let mut checked = 0;
    let mut skipped = 0;
    let mut witness = None;
    for n in lo..=hi {
        match alg.mode(&vac, n, &ea) {
            Err(_) => skipped += 1,
            Ok(v) => {
                let expect = if n == -1 { ea.clone() } else { SparseVec::zero(d) };
                if v == expect {
                    checked += 1;
                } else {
                    witness = Some(Witness {
                        location: format!("vacuum mode n = {n}"),
                        left: alg.fmt_vec(&v),
                        right: alg.fmt_vec(&expect),
                    });
                    break;
                }
            }
        }
    }
    set.push(match witness {
        Some(w) => Check::fail("vacuum.identity_field", &subject, checked, skipped, w),
        None if checked > 0 => Check::pass("vacuum.identity_field", &subject, checked, skipped),
        None => Check::inconclusive("vacuum.identity_field", &subject, skipped),
    });
}

/// Translation laws on a pair: `(sa)_n b = -n a_{n-1} b` and the Leibniz
/// rule `s(a_n b) = (sa)_n b + a_n (sb)`.
pub fn translation_checks(alg: &FieldAlgebra, a: usize, b: usize, mode_lo: i64, set: &mut CheckSet) {
    let d = alg.dim();
    let ea = SparseVec::unit(d, a);
    let eb = SparseVec::unit(d, b);
    let subject = format!("({}, {}) in {}", alg.label(a), alg.label(b), alg.name());
    let fmt = |v: &SparseVec| alg.fmt_vec(v);
    let Some(sa) = alg.s_basis(a).cloned() else {
        set.push(Check::inconclusive("translation.derivative_field", &subject, 1));
        return;
    };
    let hi = alg.zero_from(&ea, &eb).unwrap_or(0) + 1;

    let mut checked = 0;
    let mut skipped = 0;
    let mut witness = None;
    for n in mode_lo..=hi {
        let lhs = alg.mode(&sa, n, &eb);
        let rhs = alg
            .mode(&ea, n - 1, &eb)
            .map(|v| v.scale(&crate::rat_int(-n)));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                if l == r {
                    checked += 1;
                } else {
                    witness = Some(Witness {
                        location: format!("mode n = {n}"),
                        left: fmt(&l),
                        right: fmt(&r),
                    });
                    break;
                }
            }
            _ => skipped += 1,
        }
    }
    set.push(match witness {
        Some(w) => Check::fail("translation.derivative_field", &subject, checked, skipped, w),
        None if checked > 0 => Check::pass("translation.derivative_field", &subject, checked, skipped),
        None => Check::inconclusive("translation.derivative_field", &subject, skipped),
    });

    let mut checked = 0;
    let mut skipped = 0;
    let mut witness = None;
    for n in mode_lo..=hi {
        let lhs = alg.mode(&ea, n, &eb).and_then(|v| alg.apply_s(&v));
        let rhs = (|| {
            let t1 = alg.mode(&sa, n, &eb)?;
            let sb = match alg.s_basis(b) {
                Some(sb) => sb.clone(),
                None => return Err(crate::Esc),
            };
            let t2 = alg.mode(&ea, n, &sb)?;
            Ok(t1.add(&t2))
        })();
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                if l == r {
                    checked += 1;
                } else {
                    witness = Some(Witness {
                        location: format!("mode n = {n}"),
                        left: fmt(&l),
                        right: fmt(&r),
                    });
                    break;
                }
            }
            _ => skipped += 1,
        }
    }
    set.push(match witness {
        Some(w) => Check::fail("translation.leibniz", &subject, checked, skipped, w),
        None if checked > 0 => Check::pass("translation.leibniz", &subject, checked, skipped),
        None => Check::inconclusive("translation.leibniz", &subject, skipped),
    });
}

/// Run the full law suite over deterministic samples.
pub fn run_suite(alg: &FieldAlgebra, cfg: &SuiteConfig) -> CheckSet {
    let mut set = CheckSet::new();
    let d = alg.dim();

    for a in 0..d {
        vacuum_checks(alg, a, &mut set);
    }

    let pairs = cfg.sampler.pairs(alg);
    let triples = cfg.sampler.triples(alg);

    for (a, b) in &pairs {
        translation_checks(alg, *a, *b, cfg.mode_lo, &mut set);
    }

    for (a, b, c) in &triples {
        let ea = SparseVec::unit(d, *a);
        let eb = SparseVec::unit(d, *b);
        let ec = SparseVec::unit(d, *c);
        let subject = format!(
            "({}, {}, {}) in {}",
            alg.label(*a),
            alg.label(*b),
            alg.label(*c),
            alg.name()
        );
        set.push(weak_assoc_check(alg, &ea, &eb, &ec, None, cfg.spec, &subject, |v| {
            alg.fmt_vec(v)
        }));
    }

    if cfg.kind == SuiteKind::Vertex {
        for (a, b) in &pairs {
            let ea = SparseVec::unit(d, *a);
            let eb = SparseVec::unit(d, *b);
            let subject =
                format!("({}, {}) in {}", alg.label(*a), alg.label(*b), alg.name());
            let hi = alg.zero_from(&ea, &eb).unwrap_or(0) + 1;
            set.push(skew_symmetry_check(alg, &ea, &eb, cfg.mode_lo, hi, &subject));
        }
        for (a, b, c) in &triples {
            let ea = SparseVec::unit(d, *a);
            let eb = SparseVec::unit(d, *b);
            let ec = SparseVec::unit(d, *c);
            let subject = format!(
                "({}, {}, {}) in {}",
                alg.label(*a),
                alg.label(*b),
                alg.label(*c),
                alg.name()
            );
            let probe = [(0, 0, 0), (1, 0, -1), (-1, 1, 0), (2, -1, -2), (0, -1, 1)];
            set.push(cross_bracket_check(alg, &ea, &eb, &ec, &probe, &subject, |v| {
                alg.fmt_vec(v)
            }));
            for c in product_reconstruction_check(
                alg,
                &ea,
                &eb,
                &ec,
                &[-2, -1, 0, 1],
                -3,
                3,
                &subject,
                |v| alg.fmt_vec(v),
            ) {
                set.push(c);
            }
            set.push(commutator_delta_check(alg, &ea, &eb, &ec, cfg.spec, &subject, |v| {
                alg.fmt_vec(v)
            }));
        }
    }

    set
}
