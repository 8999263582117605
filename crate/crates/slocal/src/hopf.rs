//! Finite-dimensional Hopf algebras over the rationals, given by explicit
//! structure tensors on a labelled basis.
//!
//! Everything is verified by exhaustive evaluation on basis elements: the
//! axiom checker confirms (co)associativity, (co)units, that comultiplication
//! and counit are algebra maps, and the antipode identities. Left integrals
//! are found by solving the defining linear system, never hardcoded.

use num_traits::{One, Zero};

use crate::linalg::{mat_apply, ColMat, SparseVec, VecBuilder};
use crate::{Error, Rat, Result};

/// Flatten a tensor index: the pair `(i, j)` with second-factor dimension
/// `dim2` maps to `i * dim2 + j`.
pub fn tensor_index(dim2: usize, i: usize, j: usize) -> usize {
    i * dim2 + j
}

/// Inverse of [`tensor_index`].
pub fn tensor_split(dim2: usize, k: usize) -> (usize, usize) {
    (k / dim2, k % dim2)
}

/// Tensor product of two sparse vectors, flattened with [`tensor_index`].
pub fn tensor_of(a: &SparseVec, b: &SparseVec) -> SparseVec {
    let dim = a.dim() * b.dim();
    SparseVec::from_entries(
        dim,
        a.iter().flat_map(|(i, ca)| {
            b.iter()
                .map(move |(j, cb)| (tensor_index(b.dim(), i, j), ca * cb))
        }),
    )
}

/// A finite-dimensional Hopf algebra with a distinguished basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FinHopf {
    labels: Vec<String>,
    /// `mult[i][j]` is the product of basis elements `i` and `j`.
    mult: Vec<Vec<SparseVec>>,
    /// Coordinates of the algebra unit.
    unit: SparseVec,
    /// `comult[i]` lives in the flattened tensor square.
    comult: Vec<SparseVec>,
    /// Counit as a coordinate functional.
    counit: SparseVec,
    /// Antipode, column per basis element.
    antipode: ColMat,
}

impl FinHopf {
    pub fn new(
        labels: Vec<String>,
        mult: Vec<Vec<SparseVec>>,
        unit: SparseVec,
        comult: Vec<SparseVec>,
        counit: SparseVec,
        antipode: ColMat,
    ) -> Self {
        let d = labels.len();
        assert_eq!(mult.len(), d);
        assert!(mult.iter().all(|row| row.len() == d && row.iter().all(|v| v.dim() == d)));
        assert_eq!(unit.dim(), d);
        assert_eq!(comult.len(), d);
        assert!(comult.iter().all(|v| v.dim() == d * d));
        assert_eq!(counit.dim(), d);
        assert_eq!(antipode.len(), d);
        assert!(antipode.iter().all(|v| v.dim() == d));
        FinHopf { labels, mult, unit, comult, counit, antipode }
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

    pub fn basis_mult(&self, i: usize, j: usize) -> &SparseVec {
        &self.mult[i][j]
    }

    pub fn unit(&self) -> &SparseVec {
        &self.unit
    }

    pub fn comult_basis(&self, i: usize) -> &SparseVec {
        &self.comult[i]
    }

    pub fn counit_basis(&self, i: usize) -> Rat {
        self.counit.get(i)
    }

    pub fn antipode_basis(&self, i: usize) -> &SparseVec {
        &self.antipode[i]
    }

    /// Sweedler legs of the coproduct of basis element `i`:
    /// triples `(first leg, second leg, coefficient)`.
    pub fn sweedler(&self, i: usize) -> impl Iterator<Item = (usize, usize, &Rat)> {
        let d = self.dim();
        self.comult[i].iter().map(move |(k, c)| {
            let (x, y) = tensor_split(d, k);
            (x, y, c)
        })
    }

    pub fn mul_vec(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut acc = VecBuilder::new(self.dim());
        for (i, ci) in x.iter() {
            for (j, cj) in y.iter() {
                acc.add_scaled(&self.mult[i][j], &(ci * cj));
            }
        }
        acc.build()
    }

    pub fn comult_vec(&self, x: &SparseVec) -> SparseVec {
        let mut acc = VecBuilder::new(self.dim() * self.dim());
        for (i, ci) in x.iter() {
            acc.add_scaled(&self.comult[i], ci);
        }
        acc.build()
    }

    pub fn counit_vec(&self, x: &SparseVec) -> Rat {
        self.counit.dot(x)
    }

    pub fn antipode_vec(&self, x: &SparseVec) -> SparseVec {
        mat_apply(&self.antipode, x)
    }

    /// Componentwise product on the flattened tensor square:
    /// `(a (x) b) * (c (x) d) = ac (x) bd`.
    pub fn tensor_square_mul(&self, u: &SparseVec, v: &SparseVec) -> SparseVec {
        let d = self.dim();
        let mut acc = VecBuilder::new(d * d);
        for (k, ck) in u.iter() {
            let (a, b) = tensor_split(d, k);
            for (l, cl) in v.iter() {
                let (c, dd) = tensor_split(d, l);
                let left = &self.mult[a][c];
                let right = &self.mult[b][dd];
                let scale = ck * cl;
                for (p, cp) in left.iter() {
                    for (q, cq) in right.iter() {
                        acc.add_term(tensor_index(d, p, q), cp * cq * &scale);
                    }
                }
            }
        }
        acc.build()
    }

    /// Exhaustively verify all Hopf-algebra axioms on basis elements.
    pub fn check_axioms(&self) -> Result<()> {
        let d = self.dim();
        let fail = |what: String| Err(Error::HopfAxioms(what));

        // Associativity and unit laws.
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let ij_k = self.mul_vec(&self.mult[i][j], &SparseVec::unit(d, k));
                    let i_jk = self.mul_vec(&SparseVec::unit(d, i), &self.mult[j][k]);
                    if ij_k != i_jk {
                        return fail(format!(
                            "associativity fails on ({}, {}, {})",
                            self.labels[i], self.labels[j], self.labels[k]
                        ));
                    }
                }
            }
        }
        for i in 0..d {
            let e_i = SparseVec::unit(d, i);
            if self.mul_vec(&self.unit, &e_i) != e_i || self.mul_vec(&e_i, &self.unit) != e_i {
                return fail(format!("unit law fails on {}", self.labels[i]));
            }
        }

        // Coassociativity: both ways of extending the coproduct to three
        // tensor legs agree.
        for i in 0..d {
            let mut left = VecBuilder::new(d * d * d);
            let mut right = VecBuilder::new(d * d * d);
            for (x, y, c) in self.sweedler(i) {
                for (p, q, c2) in self.sweedler(x) {
                    left.add_term((p * d + q) * d + y, c * c2);
                }
                for (p, q, c2) in self.sweedler(y) {
                    right.add_term((x * d + p) * d + q, c * c2);
                }
            }
            if left.build() != right.build() {
                return fail(format!("coassociativity fails on {}", self.labels[i]));
            }
        }

        // Counit laws.
        for i in 0..d {
            let mut left = VecBuilder::new(d);
            let mut right = VecBuilder::new(d);
            for (x, y, c) in self.sweedler(i) {
                left.add_term(y, c * self.counit.get(x));
                right.add_term(x, c * self.counit.get(y));
            }
            let e_i = SparseVec::unit(d, i);
            if left.build() != e_i || right.build() != e_i {
                return fail(format!("counit law fails on {}", self.labels[i]));
            }
        }

        // Bialgebra compatibility: the coproduct and counit are algebra maps.
        for i in 0..d {
            for j in 0..d {
                let dm = self.comult_vec(&self.mult[i][j]);
                let md = self.tensor_square_mul(&self.comult[i], &self.comult[j]);
                if dm != md {
                    return fail(format!(
                        "coproduct is not multiplicative on ({}, {})",
                        self.labels[i], self.labels[j]
                    ));
                }
                let em = self.counit_vec(&self.mult[i][j]);
                if em != self.counit.get(i) * self.counit.get(j) {
                    return fail(format!(
                        "counit is not multiplicative on ({}, {})",
                        self.labels[i], self.labels[j]
                    ));
                }
            }
        }
        if self.comult_vec(&self.unit) != tensor_of(&self.unit, &self.unit) {
            return fail("coproduct does not preserve the unit".into());
        }
        if !(self.counit_vec(&self.unit) - Rat::one()).is_zero() {
            return fail("counit does not preserve the unit".into());
        }

        // Antipode identities.
        for i in 0..d {
            let mut conv_left = VecBuilder::new(d);
            let mut conv_right = VecBuilder::new(d);
            for (x, y, c) in self.sweedler(i) {
                let sx_y = self.mul_vec(&self.antipode[x], &SparseVec::unit(d, y));
                conv_left.add_scaled(&sx_y, c);
                let x_sy = self.mul_vec(&SparseVec::unit(d, x), &self.antipode[y]);
                conv_right.add_scaled(&x_sy, c);
            }
            let target = self.unit.scale(&self.counit.get(i));
            if conv_left.build() != target || conv_right.build() != target {
                return fail(format!("antipode identity fails on {}", self.labels[i]));
            }
        }
        Ok(())
    }

    /// A nonzero left integral: an element `t` with `h t = counit(h) t` for
    /// every `h`. Normalized to `counit(t) = 1` when that is possible,
    /// otherwise to leading coordinate `1`. Errors when no nonzero integral
    /// exists.
    pub fn left_integral(&self) -> Result<SparseVec> {
        let d = self.dim();
        // One equation per (acting basis element, output coordinate):
        // sum_j (mult[i][j][r] - counit(i) delta_{j r}) t_j = 0.
        let mut eqs = Vec::with_capacity(d * d);
        for i in 0..d {
            let eps_i = self.counit.get(i);
            for r in 0..d {
                let mut row = VecBuilder::new(d);
                for j in 0..d {
                    row.add_term(j, self.mult[i][j].get(r));
                }
                row.add_term(r, -eps_i.clone());
                let row = row.build();
                if !row.is_zero() {
                    eqs.push(row);
                }
            }
        }
        let basis = crate::linalg::nullspace(d, &eqs);
        let t = basis.into_iter().next().ok_or(Error::NoIntegral)?;
        let eps_t = self.counit_vec(&t);
        if !eps_t.is_zero() {
            return Ok(t.scale(&(Rat::one() / eps_t)));
        }
        let lead = t.leading_index().expect("nullspace vectors are nonzero");
        let c = t.get(lead);
        Ok(t.scale(&(Rat::one() / c)))
    }

    /// Whether basis element `i` is grouplike: `Δ(b_i) = b_i ⊗ b_i` and
    /// `ε(b_i) = 1`.
    pub fn is_grouplike(&self, i: usize) -> bool {
        let d = self.dim();
        self.comult[i] == SparseVec::unit(d * d, tensor_index(d, i, i))
            && self.counit_basis(i).is_one()
    }

    /// Whether the whole basis consists of grouplikes, i.e. this is a group
    /// algebra on its distinguished basis.
    pub fn all_grouplike(&self) -> bool {
        (0..self.dim()).all(|i| self.is_grouplike(i))
    }

    /// For a group-algebra basis: the index of the product of two basis
    /// elements (`None` when the product is not a single basis element).
    pub fn group_mult_index(&self, i: usize, j: usize) -> Option<usize> {
        let p = self.basis_mult(i, j);
        let k = p.leading_index()?;
        if p.support_len() == 1 && p.get(k).is_one() {
            Some(k)
        } else {
            None
        }
    }

    /// For a group-algebra basis: the index of the inverse of a basis
    /// element.
    pub fn group_inverse(&self, i: usize) -> Option<usize> {
        (0..self.dim()).find(|j| self.basis_mult(i, *j) == &self.unit)
    }

    /// Deterministic short description used in provenance records.
    pub fn describe(&self) -> String {
        format!("hopf[{}]", self.labels.join(","))
    }

    /// The dual Hopf algebra on the dual basis: multiplication is the
    /// transpose of comultiplication and vice versa, the unit is the counit,
    /// and the antipode is the transpose.
    pub fn dual(&self) -> FinHopf {
        let d = self.dim();
        let labels = self.labels.iter().map(|l| format!("{l}*")).collect();
        let mult = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        SparseVec::from_entries(
                            d,
                            (0..d).map(|k| (k, self.comult[k].get(tensor_index(d, i, j)))),
                        )
                    })
                    .collect()
            })
            .collect();
        let unit = self.counit.clone();
        let comult = (0..d)
            .map(|k| {
                SparseVec::from_entries(
                    d * d,
                    (0..d).flat_map(|i| {
                        (0..d).map(move |j| (tensor_index(d, i, j), self.mult[i][j].get(k)))
                    }),
                )
            })
            .collect();
        let counit = self.unit.clone();
        let antipode = (0..d)
            .map(|k| SparseVec::from_entries(d, (0..d).map(|i| (i, self.antipode[i].get(k)))))
            .collect();
        FinHopf::new(labels, mult, unit, comult, counit, antipode)
    }
}

/// Group algebra of a finite group given by its multiplication table
/// (`table[i][j]` = index of the product) and the index of the inverse of
/// each element. Basis elements are grouplike.
pub fn group_algebra(labels: Vec<String>, table: Vec<Vec<usize>>, inverse: Vec<usize>) -> FinHopf {
    let d = labels.len();
    let mult = (0..d)
        .map(|i| (0..d).map(|j| SparseVec::unit(d, table[i][j])).collect())
        .collect();
    let identity = (0..d)
        .position(|i| (0..d).all(|j| table[i][j] == j && table[j][i] == j))
        .expect("multiplication table has no identity");
    let unit = SparseVec::unit(d, identity);
    let comult = (0..d)
        .map(|i| SparseVec::unit(d * d, tensor_index(d, i, i)))
        .collect();
    let counit = SparseVec::from_entries(d, (0..d).map(|i| (i, Rat::one())));
    let antipode = (0..d).map(|i| SparseVec::unit(d, inverse[i])).collect();
    FinHopf::new(labels, mult, unit, comult, counit, antipode)
}

/// Group algebra of the order-two group `{1, s}`.
pub fn order_two_group_algebra() -> FinHopf {
    group_algebra(
        vec!["1".into(), "s".into()],
        vec![vec![0, 1], vec![1, 0]],
        vec![0, 1],
    )
}

/// Group algebra of the symmetric group on three letters. Basis order:
/// `e, r, rr, s, rs, rrs` where `r` is the 3-cycle `0 -> 1 -> 2 -> 0` and
/// `s` swaps `0` and `1`; products compose right-to-left (`(pq)(x) = p(q(x))`).
pub fn symmetric_group_three_algebra() -> FinHopf {
    type Perm = [usize; 3];
    fn compose(p: Perm, q: Perm) -> Perm {
        [p[q[0]], p[q[1]], p[q[2]]]
    }
    let e: Perm = [0, 1, 2];
    let r: Perm = [1, 2, 0];
    let s: Perm = [1, 0, 2];
    let elements: Vec<(String, Perm)> = vec![
        ("e".into(), e),
        ("r".into(), r),
        ("rr".into(), compose(r, r)),
        ("s".into(), s),
        ("rs".into(), compose(r, s)),
        ("rrs".into(), compose(compose(r, r), s)),
    ];
    let find = |p: Perm| elements.iter().position(|(_, q)| *q == p).unwrap();
    let table: Vec<Vec<usize>> = elements
        .iter()
        .map(|(_, p)| elements.iter().map(|(_, q)| find(compose(*p, *q))).collect())
        .collect();
    let inverse: Vec<usize> = elements
        .iter()
        .map(|(_, p)| {
            let mut inv = [0; 3];
            for (a, b) in p.iter().enumerate() {
                inv[*b] = a;
            }
            find(inv)
        })
        .collect();
    group_algebra(elements.into_iter().map(|(l, _)| l).collect(), table, inverse)
}

/// Sign of a basis element of [`symmetric_group_three_algebra`]:
/// `+1` on `e, r, rr` and `-1` on the three transpositions.
pub fn symmetric_group_three_sign(i: usize) -> Rat {
    if i < 3 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

/// The four-dimensional Hopf algebra with basis `1, g, x, gx`, where
/// `g g = 1`, `x x = 0`, `x g = -g x`, the coproduct is `g -> g (x) g`,
/// `x -> x (x) 1 + g (x) x`, and the antipode sends `x` to `-g x` (and has
/// order four). This is the smallest Hopf algebra that is neither
/// commutative nor cocommutative.
pub fn four_dim_taft_algebra() -> FinHopf {
    let d = 4;
    let labels = vec!["1".into(), "g".into(), "x".into(), "gx".into()];
    // Indices: 0 = 1, 1 = g, 2 = x, 3 = gx. Products derived from the
    // relations; entries are (index, sign) with 0 dim meaning zero product.
    let one = Rat::one();
    let e = |i: usize| SparseVec::unit(d, i);
    let neg = |i: usize| SparseVec::unit(d, i).neg();
    let zero = SparseVec::zero(d);
    let mult: Vec<Vec<SparseVec>> = vec![
        // 1 * _
        vec![e(0), e(1), e(2), e(3)],
        // g * _ : g*1=g, g*g=1, g*x=gx, g*gx=g(gx)=x
        vec![e(1), e(0), e(3), e(2)],
        // x * _ : x*1=x, x*g=-gx, x*x=0, x*gx=x(gx)=(xg)x=-(gx)x=-g(xx)=0
        vec![e(2), neg(3), zero.clone(), zero.clone()],
        // gx * _ : gx*1=gx, gx*g=g(xg)=-x, gx*x=g(xx)=0, gx*gx=g(x g)x=-g(gx)x=-xx=0
        vec![e(3), neg(2), zero.clone(), zero.clone()],
    ];
    let unit = e(0);
    let t = |i: usize, j: usize| tensor_index(d, i, j);
    let comult = vec![
        SparseVec::unit(d * d, t(0, 0)),
        SparseVec::unit(d * d, t(1, 1)),
        // x -> x (x) 1 + g (x) x
        SparseVec::from_entries(d * d, [(t(2, 0), one.clone()), (t(1, 2), one.clone())]),
        // gx -> (g (x) g)(x (x) 1 + g (x) x) = gx (x) g + 1 (x) gx
        SparseVec::from_entries(d * d, [(t(3, 1), one.clone()), (t(0, 3), one.clone())]),
    ];
    let counit = SparseVec::from_entries(d, [(0, one.clone()), (1, one.clone())]);
    // S(1)=1, S(g)=g, S(x)=-gx, S(gx)=x.
    let antipode = vec![e(0), e(1), neg(3), e(2)];
    FinHopf::new(labels, mult, unit, comult, counit, antipode)
}

/// A finite-dimensional unital associative algebra given by its
/// multiplication table on a labelled basis. Associativity and the unit law
/// are verified exhaustively at construction. The zero algebra (dimension 0)
/// is allowed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AssocAlgebra {
    labels: Vec<String>,
    /// `mult[i][j]` is the product of basis elements `i · j`.
    mult: Vec<Vec<SparseVec>>,
    unit: SparseVec,
}

impl AssocAlgebra {
    pub fn new(labels: Vec<String>, mult: Vec<Vec<SparseVec>>, unit: SparseVec) -> Result<Self> {
        let d = labels.len();
        if mult.len() != d
            || mult.iter().any(|r| r.len() != d || r.iter().any(|v| v.dim() != d))
            || unit.dim() != d
        {
            return Err(Error::DimensionMismatch(
                "associative algebra tensors are not consistently sized".to_string(),
            ));
        }
        let alg = AssocAlgebra { labels, mult, unit };
        for a in 0..d {
            let ea = SparseVec::unit(d, a);
            let left = alg.mul_vec(&alg.unit, &ea);
            let right = alg.mul_vec(&ea, &alg.unit);
            if left != ea || right != ea {
                return Err(Error::AlgebraAxioms(format!(
                    "unit law fails on {}: 1·a = {}, a·1 = {}",
                    alg.labels[a],
                    alg.fmt_vec(&left),
                    alg.fmt_vec(&right)
                )));
            }
            for b in 0..d {
                for c in 0..d {
                    let lhs = alg.mul_vec(&alg.mult[a][b], &SparseVec::unit(d, c));
                    let rhs = alg.mul_vec(&SparseVec::unit(d, a), &alg.mult[b][c]);
                    if lhs != rhs {
                        return Err(Error::AlgebraAxioms(format!(
                            "associativity fails on ({}, {}, {}): {} vs {}",
                            alg.labels[a],
                            alg.labels[b],
                            alg.labels[c],
                            alg.fmt_vec(&lhs),
                            alg.fmt_vec(&rhs)
                        )));
                    }
                }
            }
        }
        Ok(alg)
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

    pub fn basis_mult(&self, i: usize, j: usize) -> &SparseVec {
        &self.mult[i][j]
    }

    pub fn unit(&self) -> &SparseVec {
        &self.unit
    }

    pub fn mul_vec(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut acc = VecBuilder::new(self.dim());
        for (i, ci) in x.iter() {
            for (j, cj) in y.iter() {
                acc.add_scaled(&self.mult[i][j], &(ci * cj));
            }
        }
        acc.build()
    }

    pub fn fmt_vec(&self, v: &SparseVec) -> String {
        crate::fieldalg::fmt_with_labels(v, &self.labels)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

impl FinHopf {
    /// The underlying associative algebra (forget the coalgebra structure).
    pub fn algebra(&self) -> AssocAlgebra {
        AssocAlgebra::new(self.labels.clone(), self.mult.clone(), self.unit.clone())
            .expect("a Hopf algebra is associative and unital")
    }
}

/// Smash product of associative algebras: for an `H`-module-algebra action
/// on `A` (verified here: `h ▸ (ab) = sum (h1 ▸ a)(h2 ▸ b)` and
/// `h ▸ 1 = counit(h) 1`), the algebra on `A ⊗ H` with
/// `(a#h)(b#g) = sum a (h1 ▸ b) # h2 g` and unit `1#1`.
/// Basis order: `A` outer, `H` inner; labels `a#h`.
pub fn smash_assoc(alg: &AssocAlgebra, act: &crate::actions::HAction) -> Result<AssocAlgebra> {
    let hopf = act.hopf();
    let da = alg.dim();
    let hd = hopf.dim();
    if act.carrier_dim() != da {
        return Err(Error::DimensionMismatch(format!(
            "algebra dim {} vs action carrier {}",
            da,
            act.carrier_dim()
        )));
    }
    for h in 0..hd {
        let unit_img = act.act_basis(h, alg.unit());
        let unit_expect = alg.unit().scale(&hopf.counit_basis(h));
        if unit_img != unit_expect {
            return Err(Error::NotModuleAlgebra(format!(
                "h ▸ 1 differs from counit(h)·1 at h = {}: {} vs {}",
                hopf.label(h),
                alg.fmt_vec(&unit_img),
                alg.fmt_vec(&unit_expect)
            )));
        }
        for a in 0..da {
            let ea = SparseVec::unit(da, a);
            for b in 0..da {
                let eb = SparseVec::unit(da, b);
                let lhs = act.act_basis(h, alg.basis_mult(a, b));
                let mut rhs = VecBuilder::new(da);
                for (h1, h2, c) in hopf.sweedler(h) {
                    let prod = alg.mul_vec(&act.act_basis(h1, &ea), &act.act_basis(h2, &eb));
                    rhs.add_scaled(&prod, c);
                }
                let rhs = rhs.build();
                if lhs != rhs {
                    return Err(Error::NotModuleAlgebra(format!(
                        "h ▸ (ab) differs from sum (h1 ▸ a)(h2 ▸ b) at (h, a, b) = ({}, {}, {}): {} vs {}",
                        hopf.label(h),
                        alg.label(a),
                        alg.label(b),
                        alg.fmt_vec(&lhs),
                        alg.fmt_vec(&rhs)
                    )));
                }
            }
        }
    }

    let dim = da * hd;
    let labels: Vec<String> = alg
        .labels()
        .iter()
        .flat_map(|a| (0..hd).map(move |h| format!("{a}#{}", hopf.label(h))))
        .collect();
    let mut mult = Vec::with_capacity(dim);
    for k1 in 0..dim {
        let (a, h) = tensor_split(hd, k1);
        let ea = SparseVec::unit(da, a);
        let mut row = Vec::with_capacity(dim);
        for k2 in 0..dim {
            let (b, g) = tensor_split(hd, k2);
            let eb = SparseVec::unit(da, b);
            let mut acc = VecBuilder::new(dim);
            for (h1, h2, c) in hopf.sweedler(h) {
                let part = alg.mul_vec(&ea, &act.act_basis(h1, &eb));
                let tail = hopf.mul_vec(&SparseVec::unit(hd, h2), &SparseVec::unit(hd, g));
                for (ai, ca) in part.iter() {
                    for (hj, ch) in tail.iter() {
                        acc.add_term(ai * hd + hj, ca * ch * c);
                    }
                }
            }
            row.push(acc.build());
        }
        mult.push(row);
    }
    let unit = tensor_of(alg.unit(), hopf.unit());
    AssocAlgebra::new(labels, mult, unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn order_two_group_algebra_is_hopf() {
        order_two_group_algebra().check_axioms().unwrap();
    }

    #[test]
    fn order_two_integral() {
        let h = order_two_group_algebra();
        let t = h.left_integral().unwrap();
        // (1 + s) / 2, normalized by the counit.
        assert_eq!(t.get(0), rat(1, 2));
        assert_eq!(t.get(1), rat(1, 2));
        // Defining property, re-verified directly.
        for i in 0..h.dim() {
            let ht = h.mul_vec(&SparseVec::unit(2, i), &t);
            assert_eq!(ht, t.scale(&h.counit_basis(i)));
        }
    }

    #[test]
    fn symmetric_group_three_is_hopf_and_noncommutative() {
        let h = symmetric_group_three_algebra();
        h.check_axioms().unwrap();
        let r = SparseVec::unit(6, 1);
        let s = SparseVec::unit(6, 3);
        assert_ne!(h.mul_vec(&r, &s), h.mul_vec(&s, &r));
    }

    #[test]
    fn symmetric_group_three_integral_is_average() {
        let h = symmetric_group_three_algebra();
        let t = h.left_integral().unwrap();
        for i in 0..6 {
            assert_eq!(t.get(i), rat(1, 6));
        }
    }

    #[test]
    fn sign_is_a_homomorphism() {
        let h = symmetric_group_three_algebra();
        for i in 0..6 {
            for j in 0..6 {
                let prod = h.basis_mult(i, j);
                let k = prod.leading_index().unwrap();
                assert_eq!(
                    symmetric_group_three_sign(k),
                    symmetric_group_three_sign(i) * symmetric_group_three_sign(j)
                );
            }
        }
    }

    #[test]
    fn taft_algebra_is_hopf() {
        four_dim_taft_algebra().check_axioms().unwrap();
    }

    #[test]
    fn taft_antipode_has_order_four() {
        let h = four_dim_taft_algebra();
        let x = SparseVec::unit(4, 2);
        let s1 = h.antipode_vec(&x);
        let s2 = h.antipode_vec(&s1);
        let s4 = h.antipode_vec(&h.antipode_vec(&s2));
        assert_eq!(s1, SparseVec::unit(4, 3).neg()); // S(x) = -gx
        assert_eq!(s2, x.neg()); // S^2(x) = -x
        assert_eq!(s4, x); // S^4 = id
        assert_ne!(s2, x);
    }

    #[test]
    fn taft_integral_has_zero_counit() {
        let h = four_dim_taft_algebra();
        let t = h.left_integral().unwrap();
        // x + gx, leading-coefficient normalized (counit vanishes on it).
        assert_eq!(t, SparseVec::from_entries(4, [(2, Rat::one()), (3, Rat::one())]));
        assert!(h.counit_vec(&t).is_zero());
        for i in 0..4 {
            let ht = h.mul_vec(&SparseVec::unit(4, i), &t);
            assert_eq!(ht, t.scale(&h.counit_basis(i)));
        }
    }

    #[test]
    fn duals_are_hopf() {
        order_two_group_algebra().dual().check_axioms().unwrap();
        symmetric_group_three_algebra().dual().check_axioms().unwrap();
        four_dim_taft_algebra().dual().check_axioms().unwrap();
    }

    #[test]
    fn dual_of_group_algebra_has_idempotent_basis() {
        // Dual basis elements of a group algebra are orthogonal idempotents.
        let h = order_two_group_algebra().dual();
        for i in 0..2 {
            for j in 0..2 {
                let p = h.basis_mult(i, j);
                if i == j {
                    assert_eq!(*p, SparseVec::unit(2, i));
                } else {
                    assert!(p.is_zero());
                }
            }
        }
    }

    #[test]
    fn double_dual_recovers_structure() {
        let h = symmetric_group_three_algebra();
        let dd = h.dual().dual();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(h.basis_mult(i, j), dd.basis_mult(i, j));
            }
            assert_eq!(h.comult_basis(i), dd.comult_basis(i));
            assert_eq!(h.antipode_basis(i), dd.antipode_basis(i));
        }
        assert_eq!(h.unit(), dd.unit());
    }

    #[test]
    fn assoc_constructor_rejects_broken_tables() {
        // A two-dimensional table with a non-associative entry.
        let e = |i: usize| SparseVec::unit(2, i);
        let mult = vec![vec![e(0), e(1)], vec![e(1), e(1)]];
        // x·x = x makes this associative; replace with x·x = 1 + x to break
        // nothing — instead break the unit: claim basis 1 is the unit but
        // set 1·x = 0.
        let broken = vec![vec![e(0), SparseVec::zero(2)], vec![e(1), e(1)]];
        assert!(AssocAlgebra::new(vec!["1".into(), "x".into()], mult, e(0)).is_ok());
        match AssocAlgebra::new(vec!["1".into(), "x".into()], broken, e(0)) {
            Err(Error::AlgebraAxioms(_)) => {}
            other => panic!("expected AlgebraAxioms, got {other:?}"),
        }
    }

    #[test]
    fn smash_assoc_with_trivial_action_is_tensor_product() {
        use crate::actions::HAction;
        let a = order_two_group_algebra().algebra();
        let h = symmetric_group_three_algebra();
        let act = HAction::trivial(h.clone(), a.dim());
        let smash = smash_assoc(&a, &act).unwrap();
        assert_eq!(smash.dim(), 12);
        // Structure constants are those of the plain tensor product.
        for a1 in 0..2 {
            for h1 in 0..6 {
                for a2 in 0..2 {
                    for h2 in 0..6 {
                        let got = smash.basis_mult(a1 * 6 + h1, a2 * 6 + h2);
                        let mut expect = VecBuilder::new(12);
                        for (ai, ca) in a.basis_mult(a1, a2).iter() {
                            for (hj, ch) in h.basis_mult(h1, h2).iter() {
                                expect.add_term(ai * 6 + hj, ca * ch);
                            }
                        }
                        assert_eq!(*got, expect.build());
                    }
                }
            }
        }
    }

    #[test]
    fn smash_assoc_of_functions_with_permutation_is_matrix_algebra() {
        use crate::actions::HAction;
        // Functions on the two-element group, with the group permuting the
        // points: the smash is the full 2x2 matrix algebra. All 16 products
        // enumerated through the matrix-unit identification
        // e11 = p1#1, e12 = p1#s, e21 = ps#s, e22 = ps#1.
        let kz2 = order_two_group_algebra();
        let funcs = kz2.dual().algebra();
        let act = HAction::from_fn(kz2.clone(), 2, |h, v| {
            SparseVec::unit(2, if h == 1 { 1 - v } else { v })
        });
        let smash = smash_assoc(&funcs, &act).unwrap();
        assert_eq!(smash.dim(), 4);
        // Index layout: (p, h) -> p*2 + h.
        let e11 = 0; // p1#1
        let e12 = 1; // p1#s
        let e22 = 2; // ps#1
        let e21 = 3; // ps#s
        let unit_at = |k: usize| SparseVec::unit(4, k);
        let matrix_product = |x: usize, y: usize| -> SparseVec {
            // e_{ij} e_{kl} = [j=k] e_{il} under the identification above.
            let pos = |k: usize| match k {
                k if k == e11 => (0, 0),
                k if k == e12 => (0, 1),
                k if k == e21 => (1, 0),
                _ => (1, 1),
            };
            let back = |i: usize, j: usize| match (i, j) {
                (0, 0) => e11,
                (0, 1) => e12,
                (1, 0) => e21,
                _ => e22,
            };
            let (i, j) = pos(x);
            let (k, l) = pos(y);
            if j == k {
                unit_at(back(i, l))
            } else {
                SparseVec::zero(4)
            }
        };
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(
                    *smash.basis_mult(x, y),
                    matrix_product(x, y),
                    "product of {} and {}",
                    smash.label(x),
                    smash.label(y)
                );
            }
        }
        assert_eq!(*smash.unit(), SparseVec::from_entries(4, [(e11, Rat::one()), (e22, Rat::one())]));
    }
}
