//! Associative quotients of truncated field algebras by residue products.
//!
//! A pole profile `f` (simple pole at the origin, residue 1) and its
//! derivative `g = ∂f` define bilinear residue products
//! `a ⊛_f b = Res_z f(z) Y(a,z) b` and `a ⊛_g b = Res_z g(z) Y(a,z) b`.
//! Quotienting the carrier by the span of all `g`-products turns the
//! `f`-product into an associative unital multiplication on classes, with
//! the vacuum class as the unit — the Zhu-style zero-mode algebra of the
//! carrier. This module builds that quotient exactly within the truncation
//! window, verifies well-definedness and the algebra axioms instead of
//! assuming them, transports Hopf actions to the quotient, and certifies
//! that the quotient functor interchanges with smash products, matrix
//! algebras, and iterated smash products.
//!
//! Truncation semantics: with the profile `z^{-1}` the residue products are
//! degree-additive, so when the carrier only ever loses degrees on one side
//! of its kept window the lost degrees form an ideal and mode values that
//! escape the window may soundly be dropped — the computed algebra is the
//! untruncated quotient modulo its out-of-window degree ideal. In every
//! other situation escapes are treated strictly and surface as
//! "truncation too small" errors rather than silently wrong tables.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::actions::HAction;
use crate::constructions::{double_smash, matrix_algebra, require_degree_preserving, smash_product};
use crate::fieldalg::{fmt_with_labels, FieldAlgebra, Modes};
use crate::formal::ScalarSeries;
use crate::hopf::{smash_assoc, tensor_of, tensor_split, AssocAlgebra};
use crate::linalg::{
    mat_apply, mat_identity, mat_mul, quotient_coords, rref_solve, ColMat, SparseVec, Subspace,
    VecBuilder,
};
use crate::report::{Check, CheckSet, Witness};
use crate::{Error, Rat, Result};

/// Which pole profile generates the residue products.
#[derive(Clone, PartialEq, Eq, Debug)]
enum ProfileKind {
    /// `f(z) = z^{-1}`: the products select the modes `a_{-1}b` and `-a_{-2}b`.
    InverseZ,
    /// `f(z) = c·e^{cz} / (e^{cz} - 1)`, expanded as a Laurent series.
    Exp(Rat),
}

/// A pole profile together with the order to which its Laurent expansion is
/// carried. The profile `z^{-1}` is exact; the exponential profile stores
/// coefficients for exponents `-1 ..= series_order`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FProfile {
    kind: ProfileKind,
    series_order: usize,
}

impl FProfile {
    /// The profile `f(z) = z^{-1}`, `g(z) = -z^{-2}`; both series exact.
    pub fn inverse_z() -> Self {
        FProfile { kind: ProfileKind::InverseZ, series_order: 8 }
    }

    /// The profile `f(z) = c·e^{cz}/(e^{cz}-1)` for `c != 0`.
    pub fn exp(c: Rat, series_order: usize) -> Self {
        assert!(!c.is_zero(), "the exponential profile needs c != 0");
        FProfile { kind: ProfileKind::Exp(c), series_order }
    }

    /// Exponential profile sized for a carrier: the series order is the
    /// degree span of the kept window plus 3, which covers every pole
    /// interaction the truncation contract can produce.
    pub fn exp_for(c: Rat, alg: &FieldAlgebra) -> Self {
        let b = alg.bounds();
        let span = (b.kept_max - b.kept_min).max(0) as usize;
        FProfile::exp(c, span + 3)
    }

    pub fn series_order(&self) -> usize {
        self.series_order
    }

    pub fn is_inverse_z(&self) -> bool {
        matches!(self.kind, ProfileKind::InverseZ)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ProfileKind::InverseZ => "f(z) = z^-1".to_string(),
            ProfileKind::Exp(c) => {
                format!("f(z) = c e^(cz)/(e^(cz)-1), c = {c}, order {}", self.series_order)
            }
        }
    }

    /// Laurent series of `f`.
    pub fn f_series(&self) -> ScalarSeries {
        match &self.kind {
            ProfileKind::InverseZ => ScalarSeries::monomial(-1, Rat::one()),
            ProfileKind::Exp(c) => {
                let pad = self.series_order + 4;
                let num = ScalarSeries::exp(c, pad).scale(c);
                let den = ScalarSeries::exp(c, pad).sub(&ScalarSeries::one());
                let inv = den.inverse().expect("e^(cz) - 1 has a nonzero leading term");
                num.mul(&inv).truncate_known_top(self.series_order as i64 + 1)
            }
        }
    }

    /// Laurent series of `g = ∂f`.
    pub fn g_series(&self) -> ScalarSeries {
        self.f_series().derivative()
    }
}

/// Render a scalar series for witnesses: known terms plus a truncation
/// marker when the upper coefficients are unknown.
fn fmt_series(s: &ScalarSeries) -> String {
    let mut parts: Vec<String> = s
        .iter_known()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| format!("{c}·z^{e}"))
        .collect();
    if parts.is_empty() {
        parts.push("0".to_string());
    }
    let mut out = parts.join(" + ");
    if let Some(top) = s.known_top() {
        out.push_str(&format!(" + O(z^{})", top + 1));
    }
    out
}

/// `Res_z s(z) Y(a,z) b = Σ_n s_n · (a_n b)`, expanded bilinearly over
/// basis pairs and summed over the finitely many modes below each pair's
/// vanishing threshold. With `project` set, basis-pair mode values that
/// escape the kept window are dropped (quotient by the out-of-window
/// ideal); otherwise they raise a truncation error, as does a nonzero mode
/// against an unknown series coefficient.
fn series_mode_sum(
    alg: &FieldAlgebra,
    series: &ScalarSeries,
    a: &SparseVec,
    b: &SparseVec,
    project: bool,
) -> Result<SparseVec> {
    let mut acc = VecBuilder::new(alg.dim());
    for (i, ca) in a.iter() {
        for (j, cb) in b.iter() {
            let w = ca * cb;
            for n in series.lowest()..alg.row(i, j).zero_from() {
                match series.coeff(n) {
                    Some(c) => {
                        if c.is_zero() {
                            continue;
                        }
                        match alg.mode_basis(i, n, j) {
                            Ok(v) => acc.add_scaled(&v, &(c * &w)),
                            Err(_) if project => {}
                            Err(esc) => {
                                return Err(esc.ctx(&format!(
                                    "mode {n} of {} applied to {} leaves the kept window",
                                    alg.label(i),
                                    alg.label(j)
                                )));
                            }
                        }
                    }
                    None => match alg.mode_basis(i, n, j) {
                        Ok(v) if v.is_zero() => {}
                        Err(_) if project => {}
                        _ => {
                            return Err(Error::TruncationEscape(format!(
                                "profile series order too small: the coefficient of z^{n} is \
                                 unknown but mode {n} of {} applied to {} does not vanish",
                                alg.label(i),
                                alg.label(j)
                            )));
                        }
                    },
                }
            }
        }
    }
    Ok(acc.build())
}

/// `a ⊛_f b = Res_z f(z) Y(a,z) b`. For `f = z^{-1}` this selects `a_{-1} b`.
pub fn f_product(
    alg: &FieldAlgebra,
    prof: &FProfile,
    a: &SparseVec,
    b: &SparseVec,
) -> Result<SparseVec> {
    series_mode_sum(alg, &prof.f_series(), a, b, false)
}

/// `a ⊛_g b = Res_z g(z) Y(a,z) b` for `g = ∂f`. For `f = z^{-1}` this
/// selects `-a_{-2} b`.
pub fn g_product(
    alg: &FieldAlgebra,
    prof: &FProfile,
    a: &SparseVec,
    b: &SparseVec,
) -> Result<SparseVec> {
    series_mode_sum(alg, &prof.g_series(), a, b, false)
}

/// Whether escaped mode values may soundly be dropped while building the
/// quotient. Requires the `z^{-1}` profile (degree-additive products, up to
/// the `+1` shift of the `g`-product) and a carrier that only ever loses
/// degrees on one side of its kept window, with all basis degrees on the
/// matching side of zero — then the lost degrees span an ideal which the
/// quotient absorbs. When this fails the quotient is still attempted, but
/// escapes are errors rather than zeros.
fn projection_sound(alg: &FieldAlgebra, prof: &FProfile) -> bool {
    if !prof.is_inverse_z() {
        return false;
    }
    let b = alg.bounds();
    let no_low = b.full_min.map_or(false, |m| m >= b.kept_min);
    let no_high = b.full_max.map_or(false, |m| m <= b.kept_max);
    if no_low && no_high {
        return true;
    }
    let degs = alg.degrees();
    (no_low && degs.iter().all(|&d| d >= 0)) || (no_high && degs.iter().all(|&d| d <= 0))
}

fn truncation_to_welldef(e: Error) -> Error {
    match e {
        Error::TruncationEscape(msg) => {
            Error::NotWellDefined(format!("truncation too small for the quotient: {msg}"))
        }
        other => other,
    }
}

/// The associative quotient of a carrier by the span of its `g`-products:
/// the verified algebra, the projection onto class coordinates, and the
/// basis-vector representative chosen for each class.
#[derive(Clone, Debug)]
pub struct ZhuQuotient {
    /// The quotient as a verified associative unital algebra.
    pub algebra: AssocAlgebra,
    /// One column per carrier basis vector: its class coordinates.
    pub projection: ColMat,
    /// One carrier basis index per class: the representative.
    pub representatives: Vec<usize>,
    /// Degree of each class (the degree of its representative).
    pub degrees: Vec<i64>,
    /// The subtracted span, in carrier coordinates.
    pub subspace: Subspace,
    carrier_dim: usize,
    carrier_name: String,
}

impl ZhuQuotient {
    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn carrier_dim(&self) -> usize {
        self.carrier_dim
    }

    pub fn carrier_name(&self) -> &str {
        &self.carrier_name
    }

    /// Class coordinates of a carrier vector.
    pub fn project(&self, v: &SparseVec) -> SparseVec {
        mat_apply(&self.projection, v)
    }

    /// The representative carrier vector of class `k`.
    pub fn lift(&self, k: usize) -> SparseVec {
        SparseVec::unit(self.carrier_dim, self.representatives[k])
    }
}

/// Build the residue-product quotient of a carrier.
///
/// The subtracted span is generated by `a ⊛_g b` over all basis pairs; the
/// class representatives are the non-pivot basis vectors, and the product
/// table is `[a]·[b] = [a ⊛_f b]`. Nothing is taken on faith: each table
/// entry is recomputed with a representative perturbed by a span generator
/// (both factors in turn) and must land in the same class, and the final
/// table must pass the unit and associativity axioms on every basis triple.
/// Failures of either kind mean the truncation window is too small for this
/// carrier and surface as [`Error::NotWellDefined`] with a witness.
pub fn zhu_quotient(alg: &FieldAlgebra, prof: &FProfile) -> Result<ZhuQuotient> {
    let dim = alg.dim();
    let fs = prof.f_series();
    let gs = prof.g_series();
    let project = projection_sound(alg, prof);

    let mut span = Subspace::empty(dim);
    for a in 0..dim {
        let ea = SparseVec::unit(dim, a);
        for b in 0..dim {
            let eb = SparseVec::unit(dim, b);
            let gp =
                series_mode_sum(alg, &gs, &ea, &eb, project).map_err(truncation_to_welldef)?;
            span.insert(&gp);
        }
    }

    let representatives = span.complement_cols();
    let dimq = representatives.len();
    let degrees: Vec<i64> = representatives.iter().map(|&r| alg.deg(r)).collect();
    let labels: Vec<String> =
        representatives.iter().map(|&r| format!("[{}]", alg.label(r))).collect();
    let projection: ColMat = (0..dim)
        .map(|k| quotient_coords(dim, &span, &SparseVec::unit(dim, k)))
        .collect::<Result<_>>()?;
    let cls = |v: &SparseVec| mat_apply(&projection, v);

    let mut table: Vec<Vec<SparseVec>> = Vec::with_capacity(dimq);
    for &ri in &representatives {
        let ea = SparseVec::unit(dim, ri);
        let mut row = Vec::with_capacity(dimq);
        for &rj in &representatives {
            let eb = SparseVec::unit(dim, rj);
            let prod =
                series_mode_sum(alg, &fs, &ea, &eb, project).map_err(truncation_to_welldef)?;
            row.push(cls(&prod));
        }
        table.push(row);
    }

    // Well-definedness sweep: the class of the product must not move when a
    // representative is shifted by a span generator.
    let rank = span.rank();
    if rank > 0 {
        for i in 0..dimq {
            let ea = SparseVec::unit(dim, representatives[i]);
            for j in 0..dimq {
                let eb = SparseVec::unit(dim, representatives[j]);
                let gen = &span.rows()[(i * dimq + j) % rank];
                let perturbed = [
                    ("first", ea.add(gen), eb.clone()),
                    ("second", ea.clone(), eb.add(gen)),
                ];
                for (side, pa, pb) in perturbed {
                    let prod = series_mode_sum(alg, &fs, &pa, &pb, project)
                        .map_err(truncation_to_welldef)?;
                    let got = cls(&prod);
                    if got != table[i][j] {
                        return Err(Error::NotWellDefined(format!(
                            "[{}]·[{}] moves when the {} factor is shifted by the span \
                             generator {}: {} vs {} in class coordinates",
                            alg.label(representatives[i]),
                            alg.label(representatives[j]),
                            side,
                            alg.fmt_vec(gen),
                            fmt_with_labels(&got, &labels),
                            fmt_with_labels(&table[i][j], &labels),
                        )));
                    }
                }
            }
        }
    }

    let unit = cls(alg.vacuum());
    let algebra = AssocAlgebra::new(labels, table, unit).map_err(|e| match e {
        Error::AlgebraAxioms(msg) => Error::NotWellDefined(format!(
            "the quotient table fails the algebra axioms (truncation too small): {msg}"
        )),
        other => other,
    })?;

    Ok(ZhuQuotient {
        algebra,
        projection,
        representatives,
        degrees,
        subspace: span,
        carrier_dim: dim,
        carrier_name: alg.name().to_string(),
    })
}

/// Transport an action along the quotient projection. The action must
/// preserve degrees and map the subtracted span into itself; each Hopf
/// basis element then acts on a class through the representative.
pub fn induced_action(alg: &FieldAlgebra, zq: &ZhuQuotient, act: &HAction) -> Result<HAction> {
    if act.carrier_dim() != alg.dim() || zq.carrier_dim() != alg.dim() {
        return Err(Error::DimensionMismatch(format!(
            "carrier dim {} vs action carrier {} vs quotient carrier {}",
            alg.dim(),
            act.carrier_dim(),
            zq.carrier_dim()
        )));
    }
    require_degree_preserving(alg, act)?;
    let hopf = act.hopf().clone();
    for h in 0..hopf.dim() {
        for row in zq.subspace.rows() {
            let img = act.act_basis(h, row);
            if !zq.subspace.contains(&img) {
                return Err(Error::NotModuleAlgebra(format!(
                    "{} does not preserve the residue-product span: {} maps to {}",
                    hopf.label(h),
                    alg.fmt_vec(row),
                    alg.fmt_vec(&img)
                )));
            }
        }
    }
    let mats: Vec<ColMat> = (0..hopf.dim())
        .map(|h| {
            zq.representatives.iter().map(|&r| zq.project(&act.mat(h)[r])).collect()
        })
        .collect();
    Ok(HAction::new(hopf, mats))
}

/// `M(size, A)`: square matrices over an associative algebra, with basis
/// `a·E_ij` (algebra entry outer, matrix unit inner, row-major) and unit
/// `Σ_i 1·E_ii`.
pub fn matrix_assoc(a: &AssocAlgebra, size: usize) -> Result<AssocAlgebra> {
    let da = a.dim();
    let units = size * size;
    let dim = da * units;
    let labels: Vec<String> = (0..dim)
        .map(|k| {
            let (v, u) = tensor_split(units, k);
            format!("{}E{}{}", a.label(v), u / size + 1, u % size + 1)
        })
        .collect();
    let mut mult = Vec::with_capacity(dim);
    for k1 in 0..dim {
        let (x, u1) = tensor_split(units, k1);
        let (i, j) = (u1 / size, u1 % size);
        let mut row = Vec::with_capacity(dim);
        for k2 in 0..dim {
            let (y, u2) = tensor_split(units, k2);
            let (k, l) = (u2 / size, u2 % size);
            if j != k {
                row.push(SparseVec::zero(dim));
                continue;
            }
            let out_unit = i * size + l;
            let prod = a.basis_mult(x, y);
            row.push(SparseVec::from_entries(
                dim,
                prod.iter().map(|(vi, c)| (vi * units + out_unit, c.clone())),
            ));
        }
        mult.push(row);
    }
    let unit = SparseVec::from_entries(
        dim,
        a.unit().iter().flat_map(|(vi, c)| {
            (0..size).map(move |i| (vi * units + i * size + i, c.clone()))
        }),
    );
    AssocAlgebra::new(labels, mult, unit)
}

fn first_col_diff(a: &ColMat, b: &ColMat) -> Option<usize> {
    (0..a.len().max(b.len())).find(|&k| a.get(k) != b.get(k))
}

/// Push the three standard isomorphism checks: `phi` and `psi` must compose
/// to the identity both ways, `phi` must send unit to unit, and `phi` must
/// be multiplicative on every basis pair of `source`.
fn iso_checks(
    report: &mut CheckSet,
    prefix: &str,
    subject: &str,
    phi: &ColMat,
    psi: &ColMat,
    source: &AssocAlgebra,
    target: &AssocAlgebra,
) {
    let rule_inv = format!("{prefix}.mutually_inverse");
    let back = mat_mul(psi, phi);
    let forth = mat_mul(phi, psi);
    let id_source = mat_identity(source.dim());
    let id_target = mat_identity(target.dim());
    let inv_fail = if let Some(k) = first_col_diff(&back, &id_source) {
        Some(Check::fail(
            &rule_inv,
            subject,
            0,
            0,
            Witness {
                location: format!("psi∘phi at {}", source.label(k)),
                left: source.fmt_vec(&back[k]),
                right: source.label(k).to_string(),
            },
        ))
    } else {
        first_col_diff(&forth, &id_target).map(|k| {
            Check::fail(
                &rule_inv,
                subject,
                0,
                0,
                Witness {
                    location: format!("phi∘psi at {}", target.label(k)),
                    left: target.fmt_vec(&forth[k]),
                    right: target.label(k).to_string(),
                },
            )
        })
    };
    report.push(Check::settle(
        &rule_inv,
        subject,
        source.dim() + target.dim(),
        0,
        inv_fail,
    ));

    let rule_unit = format!("{prefix}.unital");
    let unit_img = mat_apply(phi, source.unit());
    let unit_fail = (unit_img != *target.unit()).then(|| {
        Check::fail(
            &rule_unit,
            subject,
            0,
            0,
            Witness {
                location: "image of the unit".to_string(),
                left: target.fmt_vec(&unit_img),
                right: target.fmt_vec(target.unit()),
            },
        )
    });
    report.push(Check::settle(&rule_unit, subject, 1, 0, unit_fail));

    let rule_mul = format!("{prefix}.products");
    let mut checked = 0;
    let mut mul_fail = None;
    'pairs: for x in 0..source.dim() {
        for y in 0..source.dim() {
            let lhs = mat_apply(phi, source.basis_mult(x, y));
            let rhs = target.mul_vec(&phi[x], &phi[y]);
            if lhs != rhs {
                mul_fail = Some(Check::fail(
                    &rule_mul,
                    subject,
                    checked,
                    0,
                    Witness {
                        location: format!("pair ({}, {})", source.label(x), source.label(y)),
                        left: target.fmt_vec(&lhs),
                        right: target.fmt_vec(&rhs),
                    },
                ));
                break 'pairs;
            }
            checked += 1;
        }
    }
    report.push(Check::settle(&rule_mul, subject, checked, 0, mul_fail));
}

/// Check that the projection intertwines the carrier action with the
/// induced action, as matrices: `projection ∘ action_h = induced_h ∘
/// projection` for every Hopf basis element.
fn action_descends_check(
    report: &mut CheckSet,
    rule: &str,
    subject: &str,
    zq: &ZhuQuotient,
    act: &HAction,
    ind: &HAction,
) {
    let hopf = act.hopf();
    let mut fail = None;
    let mut checked = 0;
    for h in 0..hopf.dim() {
        let lhs = mat_mul(&zq.projection, act.mat(h));
        let rhs = mat_mul(ind.mat(h), &zq.projection);
        if let Some(k) = first_col_diff(&lhs, &rhs) {
            fail = Some(Check::fail(
                rule,
                subject,
                checked,
                0,
                Witness {
                    location: format!("{} on carrier basis column {k}", hopf.label(h)),
                    left: fmt_with_labels(&lhs[k], zq.algebra.labels()),
                    right: fmt_with_labels(&rhs[k], zq.algebra.labels()),
                },
            ));
            break;
        }
        checked += 1;
    }
    report.push(Check::settle(rule, subject, checked, 0, fail));
}

/// Certify that quotient and smash product interchange: `A(V#H) ≅ A(V)#H`.
///
/// Builds the quotient of the smash carrier on one side and the smash of
/// the quotient (over the induced action) on the other, then verifies that
/// `[v]#h ↦ [v#h]` and `[v#h] ↦ [v]#h` are mutually inverse unital algebra
/// maps on all basis pairs, and that the action descends through the
/// projection. Returns the forward map (columns over the `A(V)#H` basis)
/// and the evidence.
pub fn check_smash_iso(
    alg: &FieldAlgebra,
    act: &HAction,
    prof: &FProfile,
) -> Result<(ColMat, CheckSet)> {
    let mut report = CheckSet::new();
    let zq_v = zhu_quotient(alg, prof)?;
    let smash = smash_product(alg, act)?;
    let zq_s = zhu_quotient(&smash.carrier, prof)?;
    let ind = induced_action(alg, &zq_v, act)?;
    let hd = act.hopf().dim();
    let subject = smash.carrier.name().to_string();

    action_descends_check(&mut report, "smash_iso.action_descends", &subject, &zq_v, act, &ind);

    let avh = smash_assoc(&zq_v.algebra, &ind)?;
    if avh.dim() != zq_s.dim() {
        return Err(Error::NotIso(format!(
            "dimensions differ for {subject}: smash of the quotient has {}, quotient of the \
             smash has {}",
            avh.dim(),
            zq_s.dim()
        )));
    }

    let phi: ColMat = (0..avh.dim())
        .map(|k| {
            let (i, h) = tensor_split(hd, k);
            zq_s.projection[zq_v.representatives[i] * hd + h].clone()
        })
        .collect();
    let psi: ColMat = zq_s
        .representatives
        .iter()
        .map(|&r| {
            let (vi, hi) = tensor_split(hd, r);
            tensor_of(&zq_v.projection[vi], &SparseVec::unit(hd, hi))
        })
        .collect();

    iso_checks(&mut report, "smash_iso", &subject, &phi, &psi, &avh, &zq_s.algebra);
    Ok((phi, report))
}

/// Certify that quotient and matrix algebra interchange:
/// `A(M(size, V)) ≅ M(size, A(V))`.
///
/// The forward map sends `[u]·E_ij` to the class of `u·E_ij`; verified the
/// same way as the smash case, entry-wise on all basis pairs.
pub fn check_matrix_iso(
    alg: &FieldAlgebra,
    size: usize,
    prof: &FProfile,
) -> Result<(ColMat, CheckSet)> {
    let mut report = CheckSet::new();
    let zq_v = zhu_quotient(alg, prof)?;
    let mat = matrix_algebra(alg, size);
    let zq_m = zhu_quotient(&mat, prof)?;
    let target = matrix_assoc(&zq_v.algebra, size)?;
    let units = size * size;
    let subject = mat.name().to_string();
    if target.dim() != zq_m.dim() {
        return Err(Error::NotIso(format!(
            "dimensions differ for {subject}: matrices over the quotient have {}, quotient of \
             the matrix carrier has {}",
            target.dim(),
            zq_m.dim()
        )));
    }

    let phi: ColMat = (0..target.dim())
        .map(|k| {
            let (i, u) = tensor_split(units, k);
            zq_m.projection[zq_v.representatives[i] * units + u].clone()
        })
        .collect();
    let psi: ColMat = zq_m
        .representatives
        .iter()
        .map(|&r| {
            let (vi, u) = tensor_split(units, r);
            tensor_of(&zq_v.projection[vi], &SparseVec::unit(units, u))
        })
        .collect();

    iso_checks(&mut report, "matrix_iso", &subject, &phi, &psi, &target, &zq_m.algebra);
    Ok((phi, report))
}

/// Certify that the quotient interchanges with the two-step smash
/// `V # H # H*`: the quotient of the double smash is the double smash of
/// the quotient. The dual factor acts on `A(V)#H` by projecting onto the
/// matching group label, exactly as it does on the carrier.
pub fn check_double_smash_iso(
    alg: &FieldAlgebra,
    act: &HAction,
    prof: &FProfile,
) -> Result<(ColMat, CheckSet)> {
    let (ds, mut report) = double_smash(alg, act)?;
    let zq_d = zhu_quotient(&ds.carrier, prof)?;
    let zq_v = zhu_quotient(alg, prof)?;
    let ind = induced_action(alg, &zq_v, act)?;
    let subject = ds.carrier.name().to_string();

    action_descends_check(&mut report, "double_iso.action_descends", &subject, &zq_v, act, &ind);

    let avg = smash_assoc(&zq_v.algebra, &ind)?;
    let hopf = act.hopf();
    let n = hopf.dim();
    let dual = hopf.dual();
    let avg_dim = avg.dim();
    let dual_act = HAction::from_fn(dual, avg_dim, |h, k| {
        if k % n == h {
            SparseVec::unit(avg_dim, k)
        } else {
            SparseVec::zero(avg_dim)
        }
    });
    let rhs = smash_assoc(&avg, &dual_act)?;
    if rhs.dim() != zq_d.dim() {
        return Err(Error::NotIso(format!(
            "dimensions differ for {subject}: double smash of the quotient has {}, quotient of \
             the double smash has {}",
            rhs.dim(),
            zq_d.dim()
        )));
    }

    let phi: ColMat = (0..rhs.dim())
        .map(|k| {
            let (vg, b) = tensor_split(n, k);
            let (i, g) = tensor_split(n, vg);
            zq_d.projection[(zq_v.representatives[i] * n + g) * n + b].clone()
        })
        .collect();
    let psi: ColMat = zq_d
        .representatives
        .iter()
        .map(|&r| {
            let (vg, b) = tensor_split(n, r);
            let (vi, g) = tensor_split(n, vg);
            tensor_of(
                &tensor_of(&zq_v.projection[vi], &SparseVec::unit(n, g)),
                &SparseVec::unit(n, b),
            )
        })
        .collect();

    iso_checks(&mut report, "double_iso", &subject, &phi, &psi, &rhs, &zq_d.algebra);
    Ok((phi, report))
}

/// Compare two quotients of the same family built at different degree caps:
/// classes of small degree must coincide label-for-label, with identical
/// structure constants. `max_deg` bounds `|deg a| + |deg b|` over the
/// compared pairs; with the `z^{-1}` profile the products are
/// degree-additive, so every compared product stays inside the shared range.
pub fn check_stability(a: &ZhuQuotient, b: &ZhuQuotient, max_deg: i64) -> Check {
    let rule = "zhu.stability";
    let subject = format!("{} vs {}", a.carrier_name(), b.carrier_name());

    let small = |z: &ZhuQuotient| -> Vec<String> {
        let mut v: Vec<String> = z
            .degrees
            .iter()
            .zip(z.algebra.labels())
            .filter(|(d, _)| d.abs() <= max_deg)
            .map(|(_, l)| l.clone())
            .collect();
        v.sort();
        v
    };
    let sa = small(a);
    let sb = small(b);
    if sa != sb {
        return Check::fail(
            rule,
            &subject,
            0,
            0,
            Witness {
                location: format!("classes of degree magnitude up to {max_deg}"),
                left: sa.join(", "),
                right: sb.join(", "),
            },
        );
    }
    let mut checked = sa.len();

    let index_b: BTreeMap<&str, usize> = b
        .algebra
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let by_label = |alg: &AssocAlgebra, v: &SparseVec| -> BTreeMap<String, Rat> {
        v.iter().map(|(k, c)| (alg.labels()[k].clone(), c.clone())).collect()
    };
    for (i, (di, li)) in a.degrees.iter().zip(a.algebra.labels()).enumerate() {
        for (j, (dj, lj)) in a.degrees.iter().zip(a.algebra.labels()).enumerate() {
            if di.abs() + dj.abs() > max_deg {
                continue;
            }
            let (Some(&bi), Some(&bj)) = (index_b.get(li.as_str()), index_b.get(lj.as_str()))
            else {
                return Check::fail(
                    rule,
                    &subject,
                    checked,
                    0,
                    Witness {
                        location: format!("product {li} · {lj}"),
                        left: "class present".to_string(),
                        right: "class missing".to_string(),
                    },
                );
            };
            let ma = by_label(&a.algebra, a.algebra.basis_mult(i, j));
            let mb = by_label(&b.algebra, b.algebra.basis_mult(bi, bj));
            if ma != mb {
                return Check::fail(
                    rule,
                    &subject,
                    checked,
                    0,
                    Witness {
                        location: format!("product {li} · {lj}"),
                        left: a.algebra.fmt_vec(a.algebra.basis_mult(i, j)),
                        right: b.algebra.fmt_vec(b.algebra.basis_mult(bi, bj)),
                    },
                );
            }
            checked += 1;
        }
    }
    Check::settle(rule, &subject, checked, 0, None)
}

/// The kernel constraint behind associativity of the quotient product:
/// `f(z)·∂^(j)(g(-z))` and `g(z)·∂^(j)f(z)` must lie in the span of
/// `{∂^(k)g(z)}`. Verified symbolically — exactly for the `z^{-1}` profile,
/// and on the full known coefficient window for the exponential profile —
/// for `j` up to the profile's series order.
pub fn profile_span_check(prof: &FProfile) -> Check {
    let rule = "f_profile.derivative_span";
    let subject = prof.describe();
    let f = prof.f_series();
    let g = prof.g_series();
    let mut checked = 0;
    let mut skipped = 0;
    for j in 0..=prof.series_order() as u32 {
        let candidates = [
            ("f(z)·∂^(j)g(-z)", f.mul(&g.compose_neg().divided_derivative(j))),
            ("g(z)·∂^(j)f(z)", g.mul(&f.divided_derivative(j))),
        ];
        for (what, cand) in candidates {
            if cand.is_zero() {
                checked += 1;
                continue;
            }
            let rows_series: Vec<ScalarSeries> =
                (0..=j + 2).map(|k| g.divided_derivative(k)).collect();
            let lo = rows_series
                .iter()
                .map(|s| s.lowest())
                .chain([cand.lowest()])
                .min()
                .expect("at least the candidate");
            let tops: Vec<Option<i64>> =
                rows_series.iter().map(|s| s.known_top()).chain([cand.known_top()]).collect();
            let hi = if tops.iter().any(|t| t.is_some()) {
                // `known_top` is the first *unknown* exponent, so the last
                // exponent every series knows is one below the smallest top
                tops.iter().filter_map(|t| *t).min().expect("some finite top") - 1
            } else {
                // all series exact: a window covering every nonzero term is
                // conclusive
                rows_series
                    .iter()
                    .chain([&cand])
                    .flat_map(|s| s.iter_known().filter(|(_, c)| !c.is_zero()).map(|(e, _)| e))
                    .max()
                    .unwrap_or(lo)
            };
            if hi < lo {
                skipped += 1;
                continue;
            }
            let width = (hi - lo + 1) as usize;
            let dense = |s: &ScalarSeries| -> Option<SparseVec> {
                s.window_coeffs(lo, hi).map(|cs| {
                    SparseVec::from_entries(
                        width,
                        cs.into_iter().enumerate().filter(|(_, c)| !c.is_zero()),
                    )
                })
            };
            let rows: Option<Vec<SparseVec>> = rows_series.iter().map(dense).collect();
            let (Some(rows), Some(target)) = (rows, dense(&cand)) else {
                skipped += 1;
                continue;
            };
            match rref_solve(&rows, Some(&target)) {
                Ok((_, Some(_))) => checked += 1,
                _ => {
                    return Check::fail(
                        rule,
                        &subject,
                        checked,
                        skipped,
                        Witness {
                            location: format!("j = {j}, {what} on window [{lo}, {hi}]"),
                            left: fmt_series(&cand),
                            right: "span{∂^(k)g(z)}".to_string(),
                        },
                    );
                }
            }
        }
    }
    Check::settle(rule, &subject, checked, skipped, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{charge_conjugation, differential, heisenberg};
    use crate::hopf::order_two_group_algebra;
    use crate::{rat, rat_int};

    fn basis(alg: &FieldAlgebra, label: &str) -> SparseVec {
        SparseVec::unit(alg.dim(), alg.index_of(label).unwrap())
    }

    #[test]
    fn inverse_z_products_select_single_modes() {
        let alg = heisenberg(3);
        let prof = FProfile::inverse_z();
        let alpha = basis(&alg, "a[1]");

        let ff = f_product(&alg, &prof, &alpha, &alpha).unwrap();
        assert_eq!(ff, basis(&alg, "a[1,1]"));

        for b in 0..alg.dim() {
            let eb = SparseVec::unit(alg.dim(), b);
            assert_eq!(f_product(&alg, &prof, alg.vacuum(), &eb).unwrap(), eb);
            assert!(g_product(&alg, &prof, alg.vacuum(), &eb).unwrap().is_zero());
        }

        let gg = g_product(&alg, &prof, &alpha, alg.vacuum()).unwrap();
        assert_eq!(gg, basis(&alg, "a[2]").neg());
    }

    #[test]
    fn strict_products_report_escapes() {
        let alg = heisenberg(3);
        let prof = FProfile::inverse_z();
        let top = basis(&alg, "a[3]");
        match f_product(&alg, &prof, &top, &top) {
            Err(Error::TruncationEscape(_)) => {}
            other => panic!("expected a truncation escape, got {other:?}"),
        }
    }

    #[test]
    fn exponential_profile_series_oracles() {
        let prof = FProfile::exp(rat_int(1), 6);
        let f = prof.f_series();
        assert_eq!(f.coeff(-1), Some(rat_int(1)));
        assert_eq!(f.coeff(0), Some(rat(1, 2)));
        assert_eq!(f.coeff(1), Some(rat(1, 12)));
        assert_eq!(f.coeff(2), Some(rat_int(0)));
        assert_eq!(f.coeff(3), Some(rat(-1, 720)));

        let g = prof.g_series();
        assert_eq!(g.coeff(-2), Some(rat_int(-1)));
        assert_eq!(g.coeff(-1), Some(rat_int(0)));
        assert_eq!(g.coeff(0), Some(rat(1, 12)));
        assert_eq!(g.coeff(1), Some(rat_int(0)));
        assert_eq!(g.coeff(2), Some(rat(-1, 240)));

        let wide = FProfile::exp(rat_int(2), 4).f_series();
        assert_eq!(wide.coeff(-1), Some(rat_int(1)));
        assert_eq!(wide.coeff(0), Some(rat_int(1)));
        assert_eq!(wide.coeff(1), Some(rat(1, 3)));
    }

    #[test]
    fn boson_quotient_keeps_one_class_per_degree() {
        for cap in [3i64, 4, 5] {
            let alg = heisenberg(cap);
            let zq = zhu_quotient(&alg, &FProfile::inverse_z()).unwrap();
            assert_eq!(zq.dim() as i64, cap + 1, "cap {cap}");
            assert_eq!(zq.degrees, (0..=cap).collect::<Vec<_>>());
            assert_eq!(zq.algebra.label(0), "[1]");
            assert_eq!(zq.algebra.label(1), "[a[1]]");
            assert_eq!(*zq.algebra.unit(), SparseVec::unit(zq.dim(), 0));
            // the generator class multiplies into the next pure-power class
            assert_eq!(*zq.algebra.basis_mult(1, 1), SparseVec::unit(zq.dim(), 2));
            assert_eq!(zq.algebra.label(2), "[a[1,1]]");
        }
    }

    #[test]
    fn surjective_translation_collapses_the_quotient() {
        let alg = differential(2, 3, &[rat_int(1), rat_int(1)]);
        let zq = zhu_quotient(&alg, &FProfile::inverse_z()).unwrap();
        assert_eq!(zq.dim(), 0);
        assert_eq!(zq.subspace.rank(), alg.dim());
    }

    #[test]
    fn exponential_profile_needs_a_larger_window() {
        let alg = heisenberg(3);
        match zhu_quotient(&alg, &FProfile::exp(rat_int(1), 9)) {
            Err(Error::NotWellDefined(msg)) => {
                assert!(msg.contains("truncation too small"), "message: {msg}");
            }
            other => panic!("expected NotWellDefined, got {other:?}"),
        }
    }

    #[test]
    fn induced_conjugation_action_is_parity_diagonal() {
        let alg = heisenberg(4);
        let act = charge_conjugation(&alg);
        let zq = zhu_quotient(&alg, &FProfile::inverse_z()).unwrap();
        let ind = induced_action(&alg, &zq, &act).unwrap();
        assert_eq!(ind.carrier_dim(), 5);
        for (k, &d) in zq.degrees.iter().enumerate() {
            let expect = SparseVec::unit(5, k).scale(&rat_int(if d % 2 == 0 { 1 } else { -1 }));
            assert_eq!(ind.mat(1)[k], expect, "class degree {d}");
        }
    }

    #[test]
    fn induced_action_requires_span_preservation() {
        let alg = heisenberg(3);
        let zq = zhu_quotient(&alg, &FProfile::inverse_z()).unwrap();
        let dim = alg.dim();
        let swap_idx = |i: usize| match i {
            2 => 3,
            3 => 2,
            other => other,
        };
        let act = HAction::from_fn(order_two_group_algebra(), dim, |h, v| {
            SparseVec::unit(dim, if h == 0 { v } else { swap_idx(v) })
        });
        match induced_action(&alg, &zq, &act) {
            Err(Error::NotModuleAlgebra(msg)) => {
                assert!(msg.contains("span"), "message: {msg}");
            }
            other => panic!("expected NotModuleAlgebra, got {other:?}"),
        }
    }

    #[test]
    fn smash_iso_for_conjugation_on_the_boson() {
        let alg = heisenberg(4);
        let act = charge_conjugation(&alg);
        let (phi, report) = check_smash_iso(&alg, &act, &FProfile::inverse_z()).unwrap();
        assert!(report.verdict().is_pass(), "{report:?}");
        assert_eq!(phi.len(), 10);
        let products = report
            .checks
            .iter()
            .find(|c| c.rule == "smash_iso.products")
            .expect("product check present");
        assert_eq!(products.checked, 100);
    }

    #[test]
    fn matrix_iso_size_one_is_the_identity() {
        let alg = heisenberg(3);
        let (phi, report) = check_matrix_iso(&alg, 1, &FProfile::inverse_z()).unwrap();
        assert!(report.verdict().is_pass(), "{report:?}");
        assert_eq!(phi, mat_identity(4));
    }

    #[test]
    fn matrix_iso_size_two_on_the_boson() {
        let alg = heisenberg(3);
        let (phi, report) = check_matrix_iso(&alg, 2, &FProfile::inverse_z()).unwrap();
        assert!(report.verdict().is_pass(), "{report:?}");
        assert_eq!(phi.len(), 16);
    }

    #[test]
    fn double_smash_iso_for_conjugation() {
        let alg = heisenberg(3);
        let act = charge_conjugation(&alg);
        let (phi, report) = check_double_smash_iso(&alg, &act, &FProfile::inverse_z()).unwrap();
        assert!(report.verdict().is_pass(), "{report:?}");
        assert_eq!(phi.len(), 16);
    }

    #[test]
    fn quotients_are_stable_across_caps() {
        let prof = FProfile::inverse_z();
        let q3 = zhu_quotient(&heisenberg(3), &prof).unwrap();
        let q4 = zhu_quotient(&heisenberg(4), &prof).unwrap();
        let q5 = zhu_quotient(&heisenberg(5), &prof).unwrap();
        let c34 = check_stability(&q3, &q4, 1);
        assert!(c34.verdict.is_pass(), "{c34:?}");
        let c45 = check_stability(&q4, &q5, 2);
        assert!(c45.verdict.is_pass(), "{c45:?}");

        let collapsed =
            zhu_quotient(&differential(2, 3, &[rat_int(1), rat_int(1)]), &prof).unwrap();
        let mismatch = check_stability(&q4, &collapsed, 1);
        assert!(mismatch.verdict.is_fail());
    }

    #[test]
    fn profile_span_membership_for_both_kinds() {
        let c = profile_span_check(&FProfile::inverse_z());
        assert!(c.verdict.is_pass(), "{c:?}");
        assert_eq!(c.skipped, 0);

        let c = profile_span_check(&FProfile::exp(rat_int(1), 6));
        assert!(c.verdict.is_pass(), "{c:?}");
        assert!(c.checked > 0);

        let c = profile_span_check(&FProfile::exp(rat_int(2), 5));
        assert!(c.verdict.is_pass(), "{c:?}");
    }
}
