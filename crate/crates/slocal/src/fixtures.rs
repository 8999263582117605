//! Deterministic desk-scale carriers.
//!
//! * [`heisenberg`]: the rank-one free boson truncated at a weight cap.
//!   Basis vectors are partitions `a[m1,m2,...]` standing for
//!   `α_{-m1} α_{-m2} ... vac`; products are computed by a two-sided
//!   normal-ordering recursion that peels the largest part, and every
//!   intermediate stays at or below the final target weight, so kept
//!   products are exact.
//! * [`differential`]: monomials of bounded total degree with
//!   `Y(a,z) b = (e^{z s} a) b` for a constant-coefficient derivation `s`.
//!   This is a commutative (holomorphic) structure graded by minus the
//!   polynomial degree, truncated on the other side of zero than the boson.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::actions::{HAction, HCoaction};
use crate::fieldalg::{DegreeBounds, FieldAlgebra, PairRow};
use crate::formal::factorial;
use crate::hopf::{
    order_two_group_algebra, symmetric_group_three_algebra, symmetric_group_three_sign,
    tensor_index,
};
use crate::linalg::{mat_identity, ColMat, SparseVec, VecBuilder};
use crate::{rat_int, Rat};

// ---------------------------------------------------------------------------
// Rank-one free boson, truncated at weight `cap`.
// ---------------------------------------------------------------------------

type Partition = Vec<i64>;

fn partitions_up_to(cap: i64) -> Vec<Partition> {
    // All partitions of every weight 0..=cap, ordered by weight then by the
    // descending-part list (lexicographically), which is deterministic.
    fn of_weight(w: i64, max_part: i64, out: &mut Vec<Partition>, cur: &mut Partition) {
        if w == 0 {
            out.push(cur.clone());
            return;
        }
        let top = max_part.min(w);
        for p in (1..=top).rev() {
            cur.push(p);
            of_weight(w - p, p, out, cur);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    for w in 0..=cap {
        let mut of_w = Vec::new();
        of_weight(w, w, &mut of_w, &mut Vec::new());
        of_w.sort();
        all.extend(of_w);
    }
    all
}

fn partition_label(p: &Partition) -> String {
    if p.is_empty() {
        "1".to_string()
    } else {
        let parts: Vec<String> = p.iter().map(|m| m.to_string()).collect();
        format!("a[{}]", parts.join(","))
    }
}

fn weight(p: &Partition) -> i64 {
    p.iter().sum()
}

/// Insert one part, keeping the descending order.
fn prepend_part(p: &Partition, m: i64) -> Partition {
    let mut q = p.clone();
    let at = q.partition_point(|x| *x >= m);
    q.insert(at, m);
    q
}

/// Annihilation: `α_q` on a partition vector gives
/// `q * (multiplicity of q)` times the partition with one `q` removed.
fn annihilate(p: &Partition, q: i64) -> Option<(Partition, Rat)> {
    let mult = p.iter().filter(|x| **x == q).count() as i64;
    if q <= 0 || mult == 0 {
        return None;
    }
    let mut r = p.clone();
    let at = r.iter().position(|x| *x == q).unwrap();
    r.remove(at);
    Some((r, rat_int(q * mult)))
}

type PartVec = Vec<(Partition, Rat)>;

struct BosonEngine {
    memo: HashMap<(Partition, i64, Partition), PartVec>,
}

impl BosonEngine {
    fn new() -> Self {
        BosonEngine { memo: HashMap::new() }
    }

    /// Exact mode product `u_n v` in the untruncated Fock space, via the
    /// normal-ordering recursion on `u = α_{-m} w` with `m` the largest part:
    /// the creation half contributes `binom(p-1, m-1) α_{-p} (w_{p-m+n} v)`
    /// and the annihilation half `binom(-q-1, m-1) w_{n-m-q} (α_q v)`.
    fn mode(&mut self, u: &Partition, n: i64, v: &Partition) -> PartVec {
        if u.is_empty() {
            // The vacuum field is the identity.
            return if n == -1 { vec![(v.clone(), Rat::one())] } else { Vec::new() };
        }
        let key = (u.clone(), n, v.clone());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let m = u[0];
        let w: Partition = u[1..].to_vec();
        let mut acc: HashMap<Partition, Rat> = HashMap::new();
        let mut add = |part: Partition, c: Rat| {
            if !c.is_zero() {
                *acc.entry(part).or_insert_with(Rat::zero) += c;
            }
        };

        // Creation half: w_{p-m+n} v vanishes once its mode reaches the
        // weight bound, so p is finite.
        let zf_wv = weight(&w) + weight(v);
        let mut p = 1;
        while p - m + n < zf_wv {
            let coeff = crate::formal::binom_int(p - 1, m - 1);
            if !coeff.is_zero() {
                for (part, c) in self.mode(&w, p - m + n, v) {
                    add(prepend_part(&part, p), c * &coeff);
                }
            }
            p += 1;
        }

        // Annihilation half: α_q v = 0 beyond the largest part of v.
        let qmax = v.first().copied().unwrap_or(0);
        for q in 1..=qmax {
            let coeff = crate::formal::binom_int(-q - 1, m - 1);
            if coeff.is_zero() {
                continue;
            }
            if let Some((va, cq)) = annihilate(v, q) {
                for (part, c) in self.mode(&w, n - m - q, &va) {
                    add(part, c * &cq * &coeff);
                }
            }
        }

        let mut out: PartVec = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        out.sort_by(|(a, _), (b, _)| (weight(a), a.clone()).cmp(&(weight(b), b.clone())));
        self.memo.insert(key, out.clone());
        out
    }
}

/// Rank-one free boson truncated at weight `cap`: all states of weight
/// `<= cap`, exact products whenever the result weight is kept, escapes
/// above. The vacuum is the empty partition; `a[1]` is the generator.
pub fn heisenberg(cap: i64) -> FieldAlgebra {
    assert!(cap >= 1);
    let parts = partitions_up_to(cap);
    let index: HashMap<Partition, usize> =
        parts.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let dim = parts.len();
    let labels: Vec<String> = parts.iter().map(partition_label).collect();
    let degrees: Vec<i64> = parts.iter().map(weight).collect();
    let bounds = DegreeBounds { kept_min: 0, kept_max: cap, full_min: Some(0), full_max: None };
    let mut engine = BosonEngine::new();
    let rows: Vec<Vec<PairRow>> = parts
        .iter()
        .map(|u| {
            parts
                .iter()
                .map(|v| {
                    if u.is_empty() {
                        // the vacuum acts as the identity field: the only
                        // nonzero mode is n = -1, and nothing is hidden by
                        // the truncation
                        let entries =
                            BTreeMap::from([(-1, SparseVec::unit(dim, index[v]))]);
                        return PairRow::new(entries, 0, Vec::new());
                    }
                    let deg_sum = weight(u) + weight(v);
                    PairRow::graded(&bounds, deg_sum, deg_sum, |n| {
                        let mut out = VecBuilder::new(dim);
                        for (part, c) in engine.mode(u, n, v) {
                            out.add_term(index[&part], c);
                        }
                        out.build()
                    })
                })
                .collect()
        })
        .collect();
    FieldAlgebra::new(
        format!("boson(cap {cap})"),
        labels,
        degrees,
        bounds,
        SparseVec::unit(dim, 0),
        rows,
    )
}

// ---------------------------------------------------------------------------
// Polynomial differential algebra.
// ---------------------------------------------------------------------------

type Monomial = Vec<u32>;

fn monomials_up_to(vars: usize, cap: u32) -> Vec<Monomial> {
    fn build(vars: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if cur.len() == vars {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            build(vars, left - e, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    for d in 0..=cap {
        let mut of_d = Vec::new();
        build(vars, d, &mut Vec::new(), &mut of_d);
        let mut of_d: Vec<Monomial> =
            of_d.into_iter().filter(|m| m.iter().sum::<u32>() == d).collect();
        of_d.sort();
        all.extend(of_d);
    }
    all
}

fn var_name(vars: usize, i: usize) -> String {
    if vars <= 3 {
        ["x", "y", "z"][i].to_string()
    } else {
        format!("x{}", i + 1)
    }
}

fn monomial_label(vars: usize, m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(var_name(vars, i)),
            _ => parts.push(format!("{}^{}", var_name(vars, i), e)),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

fn mono_degree(m: &Monomial) -> u32 {
    m.iter().sum()
}

type Poly = Vec<(Monomial, Rat)>;

/// One application of the derivation `sum_i s_spec[i] d/dx_i` to a monomial.
fn derive(m: &Monomial, s_spec: &[Rat]) -> Poly {
    let mut out = Vec::new();
    for (i, c) in s_spec.iter().enumerate() {
        if c.is_zero() || m[i] == 0 {
            continue;
        }
        let mut r = m.clone();
        r[i] -= 1;
        out.push((r, c * rat_int(m[i] as i64)));
    }
    out
}

fn derive_poly(p: &Poly, s_spec: &[Rat]) -> Poly {
    let mut acc: HashMap<Monomial, Rat> = HashMap::new();
    for (m, c) in p {
        for (r, d) in derive(m, s_spec) {
            *acc.entry(r).or_insert_with(Rat::zero) += c * d;
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Commutative field algebra of polynomials of total degree `<= cap` in
/// `vars` variables, with `Y(a,z) b = (e^{z s} a) b` for the
/// constant-coefficient derivation given by `s_spec`. Graded by minus the
/// polynomial degree (so the kept window is `[-cap, 0]` and everything of
/// positive grade is exactly zero).
pub fn differential(vars: usize, cap: u32, s_spec: &[Rat]) -> FieldAlgebra {
    assert_eq!(s_spec.len(), vars);
    let monos = monomials_up_to(vars, cap);
    let index: HashMap<Monomial, usize> =
        monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let dim = monos.len();
    let labels: Vec<String> = monos.iter().map(|m| monomial_label(vars, m)).collect();
    let degrees: Vec<i64> = monos.iter().map(|m| -(mono_degree(m) as i64)).collect();
    let bounds = DegreeBounds {
        kept_min: -(cap as i64),
        kept_max: 0,
        full_min: None,
        full_max: Some(0),
    };
    let rows: Vec<Vec<PairRow>> = monos
        .iter()
        .map(|a| {
            monos
                .iter()
                .map(|b| {
                    let deg_sum = -((mono_degree(a) + mono_degree(b)) as i64);
                    PairRow::graded(&bounds, deg_sum, 0, |n| {
                        // n = -k-1: the product is (s^k a / k!) * b.
                        let k = (-n - 1) as u32;
                        let mut p: Poly = vec![(a.clone(), Rat::one())];
                        for _ in 0..k {
                            p = derive_poly(&p, s_spec);
                        }
                        let scale = Rat::one() / factorial(k);
                        let mut out = VecBuilder::new(dim);
                        for (m, c) in &p {
                            let prod: Monomial =
                                m.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                            out.add_term(index[&prod], c * &scale);
                        }
                        out.build()
                    })
                })
                .collect()
        })
        .collect();
    FieldAlgebra::new(
        format!("poly(vars {vars}, cap {cap})"),
        labels,
        degrees,
        bounds,
        SparseVec::unit(dim, 0),
        rows,
    )
}

/// Index of the basis monomial with the given exponents.
pub fn monomial_index(alg: &FieldAlgebra, vars: usize, exps: &[u32]) -> Option<usize> {
    alg.index_of(&monomial_label(vars, &exps.to_vec()))
}

// ---------------------------------------------------------------------------
// Ready-made symmetries of the carriers above.
// ---------------------------------------------------------------------------

/// Number of parts of each boson basis partition, recovered from the weight
/// cap of the carrier.
fn boson_part_counts(alg: &FieldAlgebra) -> Vec<usize> {
    let cap = alg.degrees().iter().copied().max().unwrap_or(0);
    let parts = partitions_up_to(cap);
    assert_eq!(parts.len(), alg.dim(), "carrier is not a boson fixture");
    parts.iter().map(|p| p.len()).collect()
}

/// Charge conjugation `α ↦ -α` on the boson carrier, over the group algebra
/// of the two-element group: the reflection negates every basis vector with
/// an odd number of parts.
pub fn charge_conjugation(alg: &FieldAlgebra) -> HAction {
    let counts = boson_part_counts(alg);
    let d = alg.dim();
    HAction::from_fn(order_two_group_algebra(), d, move |h, v| {
        if h == 1 && counts[v] % 2 == 1 {
            SparseVec::unit(d, v).neg()
        } else {
            SparseVec::unit(d, v)
        }
    })
}

/// The coaction of the two-element group algebra placing each boson basis
/// vector over the group element that records its part-count parity.
pub fn parity_coaction(alg: &FieldAlgebra) -> HCoaction {
    let counts = boson_part_counts(alg);
    let d = alg.dim();
    let hopf = order_two_group_algebra();
    let map = (0..d)
        .map(|v| SparseVec::unit(d * 2, tensor_index(2, v, counts[v] % 2)))
        .collect();
    HCoaction::new(hopf, d, map)
}

/// Permutation matrix swapping the two exponents on a two-variable
/// polynomial carrier.
fn swap_mat(alg: &FieldAlgebra, cap: u32) -> ColMat {
    let monos = monomials_up_to(2, cap);
    assert_eq!(monos.len(), alg.dim(), "carrier is not a two-variable polynomial fixture");
    let index: HashMap<Monomial, usize> =
        monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    monos
        .iter()
        .map(|m| SparseVec::unit(alg.dim(), index[&vec![m[1], m[0]]]))
        .collect()
}

/// The swap `x ↔ y` on a two-variable polynomial carrier, over the group
/// algebra of the two-element group.
pub fn swap_action(alg: &FieldAlgebra, cap: u32) -> HAction {
    let mats = vec![mat_identity(alg.dim()), swap_mat(alg, cap)];
    HAction::new(order_two_group_algebra(), mats)
}

/// The symmetric group on three letters acting on two variables through the
/// sign character: transpositions swap `x ↔ y`, rotations act trivially.
pub fn s3_swap_action(alg: &FieldAlgebra, cap: u32) -> HAction {
    let hopf = symmetric_group_three_algebra();
    let id = mat_identity(alg.dim());
    let sw = swap_mat(alg, cap);
    let mats = (0..hopf.dim())
        .map(|i| {
            if symmetric_group_three_sign(i).is_one() {
                id.clone()
            } else {
                sw.clone()
            }
        })
        .collect();
    HAction::new(hopf, mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldalg::locality::{find_locality_order, local_check};
    use crate::fieldalg::suite::{run_suite, SuiteConfig, SuiteKind};
    use crate::fieldalg::Modes;
    use crate::formal::WindowSpec;
    use crate::rat;
    use crate::report::Verdict;

    #[test]
    fn boson_basis_layout() {
        let alg = heisenberg(4);
        // Partition counts 1,1,2,3,5 for weights 0..=4.
        assert_eq!(alg.dim(), 12);
        assert_eq!(alg.label(0), "1");
        assert_eq!(alg.label(1), "a[1]");
        assert_eq!(alg.deg(11), 4);
    }

    #[test]
    fn boson_generator_products() {
        let alg = heisenberg(4);
        let a1 = alg.index_of("a[1]").unwrap();
        let e = |i: usize| SparseVec::unit(alg.dim(), i);
        // α_(1) α = vacuum, α_(0) α = 0, α_(-1) α = a[1,1], α_(-2) α = a[2,1].
        assert_eq!(alg.mode(&e(a1), 1, &e(a1)).unwrap(), e(0));
        assert!(alg.mode(&e(a1), 0, &e(a1)).unwrap().is_zero());
        let a11 = alg.index_of("a[1,1]").unwrap();
        assert_eq!(alg.mode(&e(a1), -1, &e(a1)).unwrap(), e(a11));
        let a21 = alg.index_of("a[2,1]").unwrap();
        assert_eq!(alg.mode(&e(a1), -2, &e(a1)).unwrap(), e(a21));
        // Translation: s(a[1]) = a[2].
        let a2 = alg.index_of("a[2]").unwrap();
        assert_eq!(alg.s_basis(a1).unwrap(), &e(a2));
        // s escapes at the top weight.
        let top = alg.index_of("a[1,1,1,1]").unwrap();
        assert!(alg.s_basis(top).is_none());
    }

    #[test]
    fn boson_commutation_oracle() {
        // α_1 (α_{-1} w) - α_{-1} (α_1 w) = w for any state w (the bracket
        // [α_1, α_{-1}] = 1), verified on every basis state of weight <= 2.
        let alg = heisenberg(4);
        let a1 = alg.index_of("a[1]").unwrap();
        let e = SparseVec::unit(alg.dim(), a1);
        for w in 0..alg.dim() {
            if alg.deg(w) > 2 {
                continue;
            }
            let ew = SparseVec::unit(alg.dim(), w);
            let up = alg.mode(&e, -1, &ew).unwrap();
            let lhs = alg.mode(&e, 1, &up).unwrap();
            let down = alg.mode(&e, 1, &ew).unwrap();
            let rhs = alg.mode(&e, -1, &down).unwrap();
            assert_eq!(lhs.sub(&rhs), ew, "state {}", alg.label(w));
        }
    }

    #[test]
    fn boson_vertex_suite_passes() {
        let alg = heisenberg(4);
        let mut cfg = SuiteConfig::new(SuiteKind::Vertex);
        cfg.sampler.max_pair = 3;
        cfg.sampler.max_total = 5;
        let set = run_suite(&alg, &cfg);
        assert_eq!(set.verdict(), Verdict::Pass, "failure: {:?}", set.first_failure());
        assert!(set.total_checked() > 100);
    }

    #[test]
    fn boson_generator_locality_order_is_two() {
        let alg = heisenberg(4);
        let a1 = alg.index_of("a[1]").unwrap();
        let e = SparseVec::unit(alg.dim(), a1);
        let vac = alg.vacuum().clone();
        let samples = vec![vac, e.clone()];
        let spec = WindowSpec::square(3);
        let (order, checks) =
            find_locality_order(&alg, &e, &e, &samples, 4, spec, "(a[1], a[1])", |v| {
                alg.fmt_vec(v)
            })
            .unwrap();
        assert_eq!(order, 2);
        assert!(checks.verdict().is_pass());
        // Order 1 fails with a concrete computable witness.
        let fail = local_check(&alg, &e, &e, alg.vacuum(), 1, spec, "(a[1], a[1])", |v| {
            alg.fmt_vec(v)
        });
        assert_eq!(fail.verdict, Verdict::Fail);
        // First computable discrepancy in row-major window order: at
        // (I, J) = (-2, 1) the ordered side gives the vacuum, the swapped
        // side zero (the bracket [α_2, α_{-2}] = 2 leaks through order 1).
        let w = fail.witness.unwrap();
        assert_eq!(w.location, "(i, j) = (-2, 1)");
        assert_eq!(w.left, "1");
        assert_eq!(w.right, "0");
    }

    #[test]
    fn poly_basis_and_products() {
        let alg = differential(1, 3, &[rat_int(1)]);
        assert_eq!(alg.dim(), 4);
        assert_eq!(alg.label(0), "1");
        assert_eq!(alg.label(1), "x");
        assert_eq!(alg.label(2), "x^2");
        let e = |i: usize| SparseVec::unit(4, i);
        // x_{-1} x = x^2; x_{-2} x = (d/dx x) x = x; x_{-2} 1 = 1' → s(x) = 1.
        assert_eq!(alg.mode(&e(1), -1, &e(1)).unwrap(), e(2));
        assert_eq!(alg.mode(&e(1), -2, &e(1)).unwrap(), e(1));
        assert_eq!(alg.s_basis(1).unwrap(), &e(0));
        // x^2 _{-3} 1 = s^2(x^2)/2! = 1.
        assert_eq!(alg.mode(&e(2), -3, &e(0)).unwrap(), e(0));
        // Nonnegative modes vanish.
        assert!(alg.mode(&e(2), 0, &e(2)).unwrap().is_zero());
        // Degree overflow escapes: x^2 _{-1} x^2 = x^4 is beyond the cap.
        assert!(alg.mode(&e(2), -1, &e(2)).is_err());
    }

    #[test]
    fn poly_two_variables_weighted_derivation() {
        let alg = differential(2, 2, &[rat_int(2), rat(1, 2)]);
        let x = monomial_index(&alg, 2, &[1, 0]).unwrap();
        let y = monomial_index(&alg, 2, &[0, 1]).unwrap();
        let one = 0;
        let e = |i: usize| SparseVec::unit(alg.dim(), i);
        assert_eq!(alg.s_basis(x).unwrap(), &e(one).scale(&rat_int(2)));
        assert_eq!(alg.s_basis(y).unwrap(), &e(one).scale(&rat(1, 2)));
        let xy = monomial_index(&alg, 2, &[1, 1]).unwrap();
        // s(xy) = 2y + x/2.
        let sxy = alg.s_basis(xy).unwrap();
        assert_eq!(sxy.get(y), rat_int(2));
        assert_eq!(sxy.get(x), rat(1, 2));
    }

    #[test]
    fn poly_vertex_suite_passes() {
        let alg = differential(1, 4, &[rat_int(1)]);
        let mut cfg = SuiteConfig::new(SuiteKind::Vertex);
        cfg.sampler.max_pair = 3;
        cfg.sampler.max_total = 5;
        let set = run_suite(&alg, &cfg);
        assert_eq!(set.verdict(), Verdict::Pass, "failure: {:?}", set.first_failure());
    }

    #[test]
    fn poly_is_commutative_order_zero_local() {
        let alg = differential(2, 3, &[rat_int(1), rat_int(1)]);
        let x = monomial_index(&alg, 2, &[1, 0]).unwrap();
        let y = monomial_index(&alg, 2, &[0, 1]).unwrap();
        let ex = SparseVec::unit(alg.dim(), x);
        let ey = SparseVec::unit(alg.dim(), y);
        let samples = vec![alg.vacuum().clone(), ex.clone()];
        let (order, _) = find_locality_order(
            &alg,
            &ex,
            &ey,
            &samples,
            3,
            WindowSpec::square(3),
            "(x, y)",
            |v| alg.fmt_vec(v),
        )
        .unwrap();
        assert_eq!(order, 0);
    }

    #[test]
    fn zero_derivation_vacuum_translation_is_zero() {
        let alg = differential(2, 2, &[Rat::zero(), Rat::zero()]);
        for i in 0..alg.dim() {
            assert!(alg.s_basis(i).unwrap().is_zero());
        }
    }
}
