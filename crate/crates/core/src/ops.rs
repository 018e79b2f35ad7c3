//! Creation, annihilation and field operators on the truncated q-Fock space.
//!
//! Operators are dense matrices over the word basis. Each one records the
//! range of degree shifts it produces and `valid_max_degree`, the largest
//! input degree on which the truncated matrix agrees with the operator on the
//! full Fock space. Identity checks are made on that window only.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockSpace, FockVector, Word};
use crate::hilbert::SpaceContext;
use crate::C64;

/// Largest basis size for which dense operators are materialized.
pub const DEFAULT_DENSE_LIMIT: usize = 2048;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense (anti)linear operator on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub matrix: DMatrix<C64>,
    /// Smallest and largest degree change `(lo, hi)`.
    pub degree_shift: (isize, isize),
    /// Largest input degree on which truncation is exact (negative: none).
    pub valid_max_degree: isize,
    /// When set the operator acts as `v ↦ M conj(v)`.
    pub antilinear: bool,
    basis: FockBasis,
}

impl FockOperator {
    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn identity(basis: &FockBasis) -> Self {
        Self {
            matrix: DMatrix::identity(basis.dim(), basis.dim()),
            degree_shift: (0, 0),
            valid_max_degree: basis.truncation() as isize,
            antilinear: false,
            basis: basis.clone(),
        }
    }

    pub fn zero(basis: &FockBasis) -> Self {
        Self {
            matrix: DMatrix::zeros(basis.dim(), basis.dim()),
            degree_shift: (0, 0),
            valid_max_degree: basis.truncation() as isize,
            antilinear: false,
            basis: basis.clone(),
        }
    }

    /// Wraps an explicit linear matrix, exact on every input degree.
    pub fn from_matrix(
        basis: &FockBasis,
        matrix: DMatrix<C64>,
        degree_shift: (isize, isize),
    ) -> Result<Self> {
        check_dense(basis)?;
        if matrix.shape() != (basis.dim(), basis.dim()) {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            matrix,
            degree_shift,
            valid_max_degree: basis.truncation() as isize,
            antilinear: false,
            basis: basis.clone(),
        })
    }

    /// Diagonal operator in the word basis.
    pub fn diagonal(basis: &FockBasis, diag: &DVector<C64>) -> Result<Self> {
        check_dense(basis)?;
        if diag.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: diag.len(),
            });
        }
        Ok(Self {
            matrix: DMatrix::from_diagonal(diag),
            degree_shift: (0, 0),
            valid_max_degree: basis.truncation() as isize,
            antilinear: false,
            basis: basis.clone(),
        })
    }

    /// Materializes the (linear) operator whose image of every basis word is
    /// given by `action`; components above the truncation are dropped.
    pub fn from_action<F>(
        basis: &FockBasis,
        degree_shift: (isize, isize),
        valid_max_degree: isize,
        mut action: F,
    ) -> Result<Self>
    where
        F: FnMut(&Word) -> FockVector,
    {
        check_dense(basis)?;
        let dim = basis.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let image = action(&basis.word_at(j));
            for (w, &c) in &image.coeffs {
                if w.degree() <= basis.truncation() && c != ZERO {
                    matrix[(basis.index(w)?, j)] += c;
                }
            }
        }
        Ok(Self {
            matrix,
            degree_shift,
            valid_max_degree,
            antilinear: false,
            basis: basis.clone(),
        })
    }

    pub fn with_antilinear(mut self, antilinear: bool) -> Self {
        self.antilinear = antilinear;
        self
    }

    fn check_same_space(&self, other: &FockOperator) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::OperatorMismatch("operators live on different bases"));
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_same_space(other)?;
        let right = if self.antilinear {
            other.matrix.map(|z| z.conj())
        } else {
            other.matrix.clone()
        };
        Ok(FockOperator {
            matrix: mul_sparse(&self.matrix, &right),
            degree_shift: (
                self.degree_shift.0 + other.degree_shift.0,
                self.degree_shift.1 + other.degree_shift.1,
            ),
            valid_max_degree: other
                .valid_max_degree
                .min(self.valid_max_degree - other.degree_shift.1.max(0)),
            antilinear: self.antilinear ^ other.antilinear,
            basis: self.basis.clone(),
        })
    }

    /// `self + scale · other`.
    pub fn add_scaled(&self, other: &FockOperator, scale: C64) -> Result<FockOperator> {
        self.check_same_space(other)?;
        if self.antilinear != other.antilinear {
            return Err(Error::OperatorMismatch(
                "cannot add a linear and an antilinear operator",
            ));
        }
        Ok(FockOperator {
            matrix: &self.matrix + other.matrix.map(|z| z * scale),
            degree_shift: (
                self.degree_shift.0.min(other.degree_shift.0),
                self.degree_shift.1.max(other.degree_shift.1),
            ),
            valid_max_degree: self.valid_max_degree.min(other.valid_max_degree),
            antilinear: self.antilinear,
            basis: self.basis.clone(),
        })
    }

    pub fn add(&self, other: &FockOperator) -> Result<FockOperator> {
        self.add_scaled(other, ONE)
    }

    pub fn sub(&self, other: &FockOperator) -> Result<FockOperator> {
        self.add_scaled(other, -ONE)
    }

    /// `c · self` (scalar applied after the operator).
    pub fn scale(&self, c: C64) -> FockOperator {
        let mut out = self.clone();
        out.matrix *= c;
        out
    }

    /// `self - c · 1`.
    pub fn minus_identity(&self, c: C64) -> Result<FockOperator> {
        self.add_scaled(&FockOperator::identity(&self.basis), -c)
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: v.len(),
            });
        }
        if self.antilinear {
            Ok(&self.matrix * v.map(|z| z.conj()))
        } else {
            Ok(&self.matrix * v)
        }
    }

    pub fn apply_vector(&self, v: &FockVector) -> Result<FockVector> {
        Ok(FockVector::from_dense(
            &self.basis,
            &self.apply(&v.to_dense(&self.basis)?)?,
        ))
    }

    /// Image of the vacuum as a dense vector.
    pub fn on_vacuum(&self) -> DVector<C64> {
        self.matrix.column(0).into_owned()
    }

    /// Largest `|M_ij|` over input columns of degree `≤ max_degree`.
    pub fn max_abs_on(&self, max_degree: isize) -> f64 {
        if max_degree < 0 {
            return 0.0;
        }
        let cols = self.basis.up_to(max_degree as usize);
        let mut worst: f64 = 0.0;
        for j in cols {
            for z in self.matrix.column(j).iter() {
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// `max |self - other|` on input degrees where both are exact.
    pub fn residual_against(&self, other: &FockOperator) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.max_abs_on(diff.valid_max_degree))
    }

    /// `max |self - other|` on input degrees `≤ max_degree`.
    pub fn residual_on(&self, other: &FockOperator, max_degree: isize) -> Result<f64> {
        Ok(self.sub(other)?.max_abs_on(max_degree))
    }
}

fn check_dense(basis: &FockBasis) -> Result<()> {
    if basis.dim() > DEFAULT_DENSE_LIMIT {
        return Err(Error::SpaceTooLarge {
            dim: basis.dim(),
            limit: DEFAULT_DENSE_LIMIT,
        });
    }
    Ok(())
}

/// `A B`, skipping the exact zeros of `B` (creation-type factors are very
/// sparse).
pub fn mul_sparse(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.ncols(), b.nrows(), "matrix shapes do not compose");
    let mut out = DMatrix::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for k in 0..b.nrows() {
            let bkj = b[(k, j)];
            if bkj == ZERO {
                continue;
            }
            let src = a.column(k);
            let mut dst = out.column_mut(j);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += *s * bkj;
            }
        }
    }
    out
}

// Actions on sparse vectors. Creation takes eigen coordinates `c` of the
// created vector; annihilation takes the pairing `p_m = <η, ζ_m>_U`.

pub(crate) fn create_left_on(c: &DVector<C64>, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (w, &a) in &v.coeffs {
        for (l, &cl) in c.iter().enumerate() {
            if cl != ZERO {
                let mut letters = Vec::with_capacity(w.degree() + 1);
                letters.push(l);
                letters.extend_from_slice(w.letters());
                out.add_term(Word(letters), a * cl);
            }
        }
    }
    out
}

pub(crate) fn create_right_on(c: &DVector<C64>, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (w, &a) in &v.coeffs {
        for (l, &cl) in c.iter().enumerate() {
            if cl != ZERO {
                let mut letters = w.0.clone();
                letters.push(l);
                out.add_term(Word(letters), a * cl);
            }
        }
    }
    out
}

pub(crate) fn annihilate_left_on(p: &DVector<C64>, q: f64, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (w, &a) in &v.coeffs {
        let mut weight = 1.0;
        for (i, &letter) in w.letters().iter().enumerate() {
            let pl = p[letter];
            if pl != ZERO && weight != 0.0 {
                out.add_term(w.without(i), a * pl * weight);
            }
            weight *= q;
        }
    }
    out
}

pub(crate) fn annihilate_right_on(p: &DVector<C64>, q: f64, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (w, &a) in &v.coeffs {
        let mut weight = 1.0;
        for (i, &letter) in w.letters().iter().enumerate().rev() {
            let pl = p[letter];
            if pl != ZERO && weight != 0.0 {
                out.add_term(w.without(i), a * pl * weight);
            }
            weight *= q;
        }
    }
    out
}

fn creation_coords(ctx: &SpaceContext, xi: &DVector<C64>) -> Result<DVector<C64>> {
    ctx.to_eigen_coords(xi)
}

fn pairing_coords(ctx: &SpaceContext, xi: &DVector<C64>) -> Result<DVector<C64>> {
    // <ξ, ζ_m>_U = conj(<ζ_m, ξ>_U)
    Ok(ctx.to_eigen_coords(xi)?.map(|z| z.conj()))
}

fn truncation(space: &FockSpace) -> isize {
    space.truncation() as isize
}

/// `c_q(ξ)`: `w ↦ ξ ⊗ w`.
pub fn create_left(space: &FockSpace, xi: &DVector<C64>) -> Result<FockOperator> {
    let c = creation_coords(&space.ctx, xi)?;
    FockOperator::from_action(&space.basis, (1, 1), truncation(space) - 1, |w| {
        create_left_on(&c, &FockVector::from_word(w.clone(), ONE))
    })
}

/// `c_q(ξ)^*`: `ξ_1⊗…⊗ξ_n ↦ Σ_i q^{i-1} <ξ, ξ_i>_U ξ_1⊗…ξ̂_i…⊗ξ_n`.
pub fn annihilate_left(space: &FockSpace, xi: &DVector<C64>) -> Result<FockOperator> {
    let p = pairing_coords(&space.ctx, xi)?;
    let q = space.q();
    FockOperator::from_action(&space.basis, (-1, -1), truncation(space), |w| {
        annihilate_left_on(&p, q, &FockVector::from_word(w.clone(), ONE))
    })
}

/// `r_q(ξ)`: `w ↦ w ⊗ ξ`.
pub fn create_right(space: &FockSpace, xi: &DVector<C64>) -> Result<FockOperator> {
    let c = creation_coords(&space.ctx, xi)?;
    FockOperator::from_action(&space.basis, (1, 1), truncation(space) - 1, |w| {
        create_right_on(&c, &FockVector::from_word(w.clone(), ONE))
    })
}

/// `r_q(ξ)^*`: `ξ_1⊗…⊗ξ_n ↦ Σ_i q^{n-i} <ξ, ξ_i>_U ξ_1⊗…ξ̂_i…⊗ξ_n`.
pub fn annihilate_right(space: &FockSpace, xi: &DVector<C64>) -> Result<FockOperator> {
    let p = pairing_coords(&space.ctx, xi)?;
    let q = space.q();
    FockOperator::from_action(&space.basis, (-1, -1), truncation(space), |w| {
        annihilate_right_on(&p, q, &FockVector::from_word(w.clone(), ONE))
    })
}

/// Word reversal `ȷ`.
pub fn flip(space: &FockSpace) -> Result<FockOperator> {
    FockOperator::from_action(&space.basis, (0, 0), truncation(space), |w| {
        FockVector::from_word(w.reversed(), ONE)
    })
}

/// `s_q(ξ) = c_q(ξ) + c_q(ξ)^*` for real `ξ`.
pub fn field_left(space: &FockSpace, xi: &DVector<C64>, tol: f64) -> Result<FockOperator> {
    let imag = space.ctx.imaginary_part(xi);
    if imag > tol {
        return Err(Error::NotReal { max_imag: imag });
    }
    create_left(space, xi)?.add(&annihilate_left(space, xi)?)
}

/// The field with vacuum vector `ξ` for complex `ξ = a + ib`, namely
/// `s_q(a) + i s_q(b) = c_q(ξ) + c_q(𝒥ξ)^*`.
pub fn field_left_complex(space: &FockSpace, xi: &DVector<C64>) -> Result<FockOperator> {
    let conj = space.ctx.conjugate(xi);
    create_left(space, xi)?.add(&annihilate_left(space, &conj)?)
}

/// `d_q(η) = r_q(η) + r_q(η)^*` for `η ∈ H_R'`.
pub fn field_right(space: &FockSpace, eta: &DVector<C64>, tol: f64) -> Result<FockOperator> {
    let residual = space.ctx.real_commutant_residual(eta)?;
    if residual > tol {
        return Err(Error::NotInRealCommutant { residual });
    }
    create_right(space, eta)?.add(&annihilate_right(space, eta)?)
}

/// `max |c*(ξ)c(ζ) - q c(ζ)c*(ξ) - <ξ,ζ>_U 1|` on input degrees `≤ d-1`.
pub fn q_commutator_residual(
    space: &FockSpace,
    xi: &DVector<C64>,
    zeta: &DVector<C64>,
) -> Result<f64> {
    let a_xi = annihilate_left(space, xi)?;
    let c_zeta = create_left(space, zeta)?;
    let lhs = a_xi
        .compose(&c_zeta)?
        .sub(&c_zeta.compose(&a_xi)?.scale(C64::new(space.q(), 0.0)))?;
    let diff = lhs.minus_identity(space.ctx.inner_u(xi, zeta)?)?;
    Ok(diff.max_abs_on(truncation(space) - 1))
}

/// `max |<A f, g>_q - <f, B g>_q|` over basis words `f, g` of degree
/// `≤ max_degree`; zero exactly when `B` is the Gram adjoint of `A` there.
pub fn gram_adjoint_residual(
    space: &FockSpace,
    a: &FockOperator,
    b: &FockOperator,
    max_degree: isize,
) -> Result<f64> {
    if a.antilinear || b.antilinear {
        return Err(Error::OperatorMismatch(
            "Gram adjoint check needs linear operators",
        ));
    }
    if max_degree < 0 {
        return Ok(0.0);
    }
    let g = space.gram.full_matrix().map(|x| C64::new(x, 0.0));
    let lhs = mul_sparse(&a.matrix.adjoint(), &g);
    let rhs = mul_sparse(&g, &b.matrix);
    let k = space.basis.up_to(max_degree as usize).end;
    let mut worst: f64 = 0.0;
    for j in 0..k {
        for i in 0..k {
            worst = worst.max((lhs[(i, j)] - rhs[(i, j)]).norm());
        }
    }
    Ok(worst)
}

/// Single degree of a pure-degree vector.
pub fn pure_degree(v: &FockVector) -> Result<usize> {
    let degrees = v.degrees();
    match degrees.as_slice() {
        [] => Ok(0),
        [n] => Ok(*n),
        _ => Err(Error::MixedDegree { degrees }),
    }
}

/// The operator `x` in the left algebra with `xΩ = v`, for `v` of a single
/// degree `n`, by the Wick expansion
/// `x_w = Σ_{K ⊔ I} q^{ℵ(K,I)} c(ζ_{w_K}) c(𝒥ζ_{w_{I_1}})^* ⋯ c(𝒥ζ_{w_{I_last}})^*`
/// with `ℵ(K, I) = #{(k, i) ∈ K × I : k > i}`.
pub fn word_operator(space: &FockSpace, v: &FockVector) -> Result<FockOperator> {
    let n = pure_degree(v)?;
    for w in v.coeffs.keys() {
        space.basis.check_word(w)?;
    }
    let r = space.ctx.alphabet();
    let q = space.q();
    let creators: Vec<DVector<C64>> = (0..r)
        .map(|l| {
            let mut c = DVector::zeros(r);
            c[l] = ONE;
            c
        })
        .collect();
    let annihilators: Vec<DVector<C64>> = (0..r)
        .map(|l| DVector::from_fn(r, |m, _| space.ctx.letter_pairing(l, m)))
        .collect();

    // (coefficient · q^ℵ, creation letters, annihilation letters) per term
    let mut terms: Vec<(C64, Vec<usize>, Vec<usize>)> = Vec::new();
    for (w, &a) in &v.coeffs {
        if a == ZERO {
            continue;
        }
        let letters = w.letters();
        for mask in 0u32..(1u32 << n) {
            let mut kept = Vec::new();
            let mut removed = Vec::new();
            let mut aleph = 0;
            for (pos, &l) in letters.iter().enumerate() {
                if mask & (1 << pos) != 0 {
                    removed.push(l);
                } else {
                    kept.push(l);
                    aleph += removed.len() as i32;
                }
            }
            let weight = q.powi(aleph);
            if weight != 0.0 {
                terms.push((a * weight, kept, removed));
            }
        }
    }

    FockOperator::from_action(
        &space.basis,
        (-(n as isize), n as isize),
        truncation(space) - n as isize,
        |u| {
            let mut out = FockVector::zero();
            for (coef, kept, removed) in &terms {
                let mut x = FockVector::from_word(u.clone(), *coef);
                for &l in removed.iter().rev() {
                    x = annihilate_left_on(&annihilators[l], q, &x);
                }
                for &l in kept.iter().rev() {
                    x = create_left_on(&creators[l], &x);
                }
                out.add(&x, ONE);
            }
            out
        },
    )
}

/// Residual of `c(ξ)^*(u⊗v) = (c(ξ)^* u)⊗v + q^{deg u} u⊗(c(ξ)^* v)`; the left
/// side uses the assembled matrix, the right side the action on each factor.
pub fn split_adjoint_check(
    space: &FockSpace,
    xi: &DVector<C64>,
    left: &FockVector,
    right: &FockVector,
) -> Result<f64> {
    let u_deg = pure_degree(left)?;
    let lhs =
        annihilate_left(space, xi)?.apply(&tensor_vectors(left, right).to_dense(&space.basis)?)?;
    let p = pairing_coords(&space.ctx, xi)?;
    let q = space.q();
    let mut rhs = tensor_vectors(&annihilate_left_on(&p, q, left), right);
    rhs.add(
        &tensor_vectors(left, &annihilate_left_on(&p, q, right)),
        C64::new(q.powi(u_deg as i32), 0.0),
    );
    let rhs = rhs.to_dense(&space.basis)?;
    Ok((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `u ⊗ v` for sparse vectors.
pub fn tensor_vectors(u: &FockVector, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (a, &x) in &u.coeffs {
        for (b, &y) in &v.coeffs {
            out.add_term(a.concat(b), x * y);
        }
    }
    out
}

/// Exponent of `q` attached to the bit string `r_1..r_k` when `k` annihilators
/// are pushed through `ξ_0^{⊗N} ⊗ (…)` with `N = n_left`:
/// `N Σ r_w - Σ r_w s_w`, `s_w` the number of zeros among `r_w..r_k`.
pub fn split_coefficient(bits: &[bool], n_left: usize) -> i64 {
    let k = bits.len();
    let mut exponent = 0i64;
    let mut sum_r = 0i64;
    for w in 0..k {
        if bits[w] {
            let s_w = bits[w..].iter().filter(|&&b| !b).count() as i64;
            sum_r += 1;
            exponent -= s_w;
        }
    }
    exponent + n_left as i64 * sum_r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::q_bracket;
    use crate::hilbert::{build_space, RepresentationSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = 1e-10;

    fn space(n_fixed: usize, lambdas: Vec<f64>, q: f64, d: usize) -> FockSpace {
        let ctx = build_space(RepresentationSpec::new(n_fixed, lambdas)).unwrap();
        FockSpace::new(ctx, q, d).unwrap()
    }

    fn letter(space: &FockSpace, l: usize) -> DVector<C64> {
        space.ctx.eigen_basis[l].coeffs.clone()
    }

    #[test]
    fn annihilation_on_powers_of_fixed_vector() {
        let s = space(2, vec![], 0.5, 5);
        let xi0 = s.ctx.real_basis_vector(0);
        let xi1 = s.ctx.real_basis_vector(1);
        let a = annihilate_left(&s, &xi0).unwrap();
        let ar = annihilate_right(&s, &xi0).unwrap();
        let ar1 = annihilate_right(&s, &xi1).unwrap();
        for n in 1..=5 {
            let v = s.word_dense(&Word::power(0, n)).unwrap();
            let expected =
                s.word_dense(&Word::power(0, n - 1)).unwrap() * C64::new(q_bracket(0.5, n), 0.0);
            assert!((a.apply(&v).unwrap() - &expected).norm() < 1e-13);
            assert!((ar.apply(&v).unwrap() - &expected).norm() < 1e-13);
            assert!(ar1.apply(&v).unwrap().norm() == 0.0);
        }
        let a1 = annihilate_left(&s, &xi0).unwrap();
        let v = s.word_dense(&Word(vec![1, 1])).unwrap();
        assert_eq!(a1.apply(&v).unwrap().norm(), 0.0);
    }

    #[test]
    fn creation_and_annihilation_are_gram_adjoints() {
        for &q in &[-0.9, 0.0, 0.7] {
            let s = space(1, vec![2.0], q, 4);
            let xi = DVector::from_vec(vec![
                C64::new(0.3, 0.2),
                C64::new(-1.0, 0.5),
                C64::new(0.4, -0.1),
            ]);
            let d = truncation(&s) - 1;
            let c = create_left(&s, &xi).unwrap();
            let a = annihilate_left(&s, &xi).unwrap();
            assert!(gram_adjoint_residual(&s, &c, &a, d).unwrap() < TOL);
            let cr = create_right(&s, &xi).unwrap();
            let ar = annihilate_right(&s, &xi).unwrap();
            assert!(gram_adjoint_residual(&s, &cr, &ar, d).unwrap() < TOL);
        }
    }

    #[test]
    fn right_creation_is_flip_conjugate() {
        let s = space(1, vec![3.0], 0.4, 4);
        let j = flip(&s).unwrap();
        for l in 0..3 {
            let xi = letter(&s, l);
            let conj = j
                .compose(&create_left(&s, &xi).unwrap())
                .unwrap()
                .compose(&j)
                .unwrap();
            let r = create_right(&s, &xi).unwrap();
            assert!(conj.residual_on(&r, 3).unwrap() < 1e-14);
        }
    }

    #[test]
    fn q_commutation_pairs() {
        let s = space(1, vec![2.0], -0.5, 4);
        for a in 0..3 {
            for b in 0..3 {
                let r = q_commutator_residual(&s, &letter(&s, a), &letter(&s, b)).unwrap();
                assert!(r < TOL, "pair ({a},{b}): {r}");
            }
        }
        let free = space(1, vec![2.0], 0.0, 3);
        let x = letter(&free, 1);
        let cc = annihilate_left(&free, &x)
            .unwrap()
            .compose(&create_left(&free, &x).unwrap())
            .unwrap();
        assert!(cc.minus_identity(ONE).unwrap().max_abs_on(2) < 1e-14);
    }

    #[test]
    fn fields_on_vacuum_and_validation() {
        let s = space(1, vec![2.0], 0.3, 3);
        let xi0 = s.ctx.real_basis_vector(0);
        let sq = field_left(&s, &xi0, TOL).unwrap();
        assert!((sq.on_vacuum() - s.word_dense(&Word(vec![0])).unwrap()).norm() < 1e-15);
        let dq = field_right(&s, &xi0, TOL).unwrap();
        assert!((dq.on_vacuum() - s.word_dense(&Word(vec![0])).unwrap()).norm() < 1e-15);
        let complex = xi0.map(|z| z * C64::new(0.0, 1.0));
        assert!(matches!(
            field_left(&s, &complex, TOL),
            Err(Error::NotReal { .. })
        ));
        let f1 = s.ctx.real_basis_vector(1);
        assert!(matches!(
            field_right(&s, &f1, TOL),
            Err(Error::NotInRealCommutant { .. })
        ));
        let d = truncation(&s) - 1;
        assert!(gram_adjoint_residual(&s, &sq, &sq, d).unwrap() < TOL);
        // left and right fields of ξ0 commute where both products are exact
        let comm = sq
            .compose(&dq)
            .unwrap()
            .sub(&dq.compose(&sq).unwrap())
            .unwrap();
        assert!(comm.max_abs_on(truncation(&s) - 2) < TOL);
    }

    #[test]
    fn composition_bookkeeping() {
        let s = space(1, vec![], 0.5, 4);
        let xi0 = s.ctx.real_basis_vector(0);
        let c = create_left(&s, &xi0).unwrap();
        let a = annihilate_left(&s, &xi0).unwrap();
        let ca = c.compose(&a).unwrap();
        assert_eq!(ca.degree_shift, (0, 0));
        assert_eq!(ca.valid_max_degree, 3);
        let ac = a.compose(&c).unwrap();
        assert_eq!(ac.valid_max_degree, 3);
        let cc = c.compose(&c).unwrap();
        assert_eq!(cc.valid_max_degree, 2);
        let anti = FockOperator::identity(&s.basis).with_antilinear(true);
        assert!(c.add(&anti).is_err());
        let twice = anti.compose(&anti).unwrap();
        assert!(!twice.antilinear);
        let v = DVector::from_element(s.dim(), C64::new(1.0, 2.0));
        assert_eq!(anti.apply(&v).unwrap()[0], C64::new(1.0, -2.0));
        let other = space(2, vec![], 0.5, 4);
        assert!(c.compose(&FockOperator::identity(&other.basis)).is_err());
    }

    #[test]
    fn dense_limit_is_enforced() {
        let ctx = build_space(RepresentationSpec::new(4, vec![])).unwrap();
        let s = FockSpace::new(ctx, 0.5, 6).unwrap();
        let xi = s.ctx.real_basis_vector(0);
        assert!(matches!(
            create_left(&s, &xi),
            Err(Error::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn word_operator_degree_one_is_field() {
        let s = space(1, vec![2.0], 0.6, 3);
        for i in 0..3 {
            let f = s.ctx.real_basis_vector(i);
            let v = FockVector::tensor(&s.ctx, std::slice::from_ref(&f)).unwrap();
            let x = word_operator(&s, &v).unwrap();
            let field = field_left(&s, &f, TOL).unwrap();
            assert!(x.residual_against(&field).unwrap() < 1e-13);
        }
    }

    #[test]
    fn word_operator_reconstructs_vacuum_vector() {
        let s = space(1, vec![2.0], -0.7, 4);
        let mut v = FockVector::zero();
        v.add_term(Word(vec![1, 2, 0]), C64::new(0.5, -0.25));
        v.add_term(Word(vec![0, 0, 2]), C64::new(1.0, 0.0));
        let x = word_operator(&s, &v).unwrap();
        assert_eq!(x.degree_shift, (-3, 3));
        assert_eq!(x.valid_max_degree, 1);
        assert!((x.on_vacuum() - v.to_dense(&s.basis).unwrap()).norm() < 1e-14);
        let mut mixed = v.clone();
        mixed.add_term(Word(vec![1]), ONE);
        assert!(matches!(
            word_operator(&s, &mixed),
            Err(Error::MixedDegree { .. })
        ));
    }

    #[test]
    fn wick_product_on_orthogonal_tail() {
        let s = space(3, vec![], 0.45, 5);
        let v = FockVector::from_word(Word(vec![1, 2]), ONE);
        let x = word_operator(&s, &v).unwrap();
        for k in 0..=3 {
            let input = s.word_dense(&Word::power(0, k)).unwrap();
            let mut letters = vec![1, 2];
            letters.extend(std::iter::repeat_n(0, k));
            let expected = s.word_dense(&Word(letters)).unwrap();
            assert!((x.apply(&input).unwrap() - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn split_adjoint_small_cases() {
        let s = space(1, vec![2.0], 0.35, 4);
        let xi = DVector::from_vec(vec![
            C64::new(0.2, 0.0),
            C64::new(0.7, -0.3),
            C64::new(-0.1, 0.9),
        ]);
        let u = FockVector::from_word(Word(vec![2, 1]), ONE);
        let v = FockVector::from_word(Word(vec![0]), C64::new(0.5, 0.5));
        assert!(split_adjoint_check(&s, &xi, &u, &v).unwrap() < 1e-12);
        let omega = FockVector::vacuum();
        assert!(split_adjoint_check(&s, &xi, &omega, &v).unwrap() < 1e-14);
    }

    #[test]
    fn split_coefficient_extremes() {
        assert_eq!(split_coefficient(&[false; 4], 5), 0);
        assert_eq!(split_coefficient(&[true; 4], 5), 20);
        assert_eq!(split_coefficient(&[], 3), 0);
        // r = (1, 0): the annihilator for w = 2 goes left first, so the right
        // move at w = 1 sees a left factor of degree N - 1
        assert_eq!(split_coefficient(&[true, false], 3), 2);
    }

    fn tree_exponent(bits: &[bool], n_left: usize) -> i64 {
        // walk the annihilators from the innermost (last) outwards
        let mut left = n_left as i64;
        let mut exponent = 0;
        for &b in bits.iter().rev() {
            if b {
                exponent += left;
            } else {
                left -= 1;
            }
        }
        exponent
    }

    proptest! {
        #[test]
        fn split_coefficient_matches_tree(
            bits in proptest::collection::vec(any::<bool>(), 0..=6),
            n_left in 0usize..8,
        ) {
            prop_assert_eq!(split_coefficient(&bits, n_left), tree_exponent(&bits, n_left));
            let k = bits.len() as i64;
            let r: Vec<i64> = bits.iter().map(|&b| b as i64).collect();
            let sum_r: i64 = r.iter().sum();
            let mut alt = (n_left as i64 - k - 1) * sum_r;
            for w in 0..bits.len() {
                alt += (w as i64 + 1) * r[w];
                alt += r[w..].iter().sum::<i64>() * r[w];
            }
            prop_assert_eq!(split_coefficient(&bits, n_left), alt);
        }

        #[test]
        fn split_adjoint_random_words(
            u in proptest::collection::vec(0usize..3, 0..3),
            v in proptest::collection::vec(0usize..3, 0..2),
            l in 0usize..3,
            q in -0.9f64..0.9,
        ) {
            let s = space(1, vec![2.0], q, 4);
            let xi = letter(&s, l);
            let res = split_adjoint_check(
                &s,
                &xi,
                &FockVector::from_word(Word(u), ONE),
                &FockVector::from_word(Word(v), ONE),
            ).unwrap();
            prop_assert!(res < 1e-12);
        }
    }

    #[test]
    fn field_norm_grows_towards_limit() {
        // ‖s_q(ξ)‖ = 2/sqrt(1-q) ‖ξ‖_U; truncation approaches it from below
        let q = 0.3;
        let s = space(1, vec![], q, 12);
        let xi0 = s.ctx.real_basis_vector(0);
        let field = field_left(&s, &xi0, TOL).unwrap();
        // one word per degree, so G^{1/2} M G^{-1/2} is the Gram-normalized matrix
        let g: Vec<f64> = (0..s.dim())
            .map(|i| s.gram.full_matrix()[(i, i)].sqrt())
            .collect();
        let t = DMatrix::from_fn(s.dim(), s.dim(), |i, j| {
            field.matrix[(i, j)].re * g[i] / g[j]
        });
        let largest = t.singular_values().max();
        let limit = 2.0 / (1.0 - q).sqrt();
        assert!(
            largest < limit && largest > 0.9 * limit,
            "{largest} vs {limit}"
        );
        assert_abs_diff_eq!((&t - t.transpose()).abs().max(), 0.0, epsilon = 1e-12);
    }
}
