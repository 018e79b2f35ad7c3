//! The one-particle space: an almost periodic orthogonal representation of
//! the reals on `R^{N1} ⊕ (R^2)^{N2}`, its analytic generator `A`, the
//! deformed inner product `<x, y>_U = <2/(1 + A^{-1}) x, y>` and the
//! `U`-orthonormal eigenbasis of `A`.
//!
//! Coordinates are taken in the real "f-basis": the fixed lines `e_j` first,
//! then `f_k^1, f_k^2` for every rotation block. Inner products are linear in
//! the second argument.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Block data of an almost periodic orthogonal representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationSpec {
    /// Number of one-dimensional trivial blocks.
    pub n_fixed: usize,
    /// Rotation parameters, one per two-dimensional block, each `> 1`.
    #[serde(default)]
    pub rotation_lambdas: Vec<f64>,
}

impl RepresentationSpec {
    pub fn new(n_fixed: usize, rotation_lambdas: Vec<f64>) -> Self {
        Self {
            n_fixed,
            rotation_lambdas,
        }
    }

    pub fn dim_real(&self) -> usize {
        self.n_fixed + 2 * self.rotation_lambdas.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.rotation_lambdas.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (index, &value) in self.rotation_lambdas.iter().enumerate() {
            // NaN fails this comparison as well
            if !value.is_finite() || value <= 1.0 {
                return Err(Error::InvalidLambda { index, value });
            }
        }
        if self.dim_real() == 0 {
            return Err(Error::EmptySpace);
        }
        Ok(())
    }
}

/// Real or imaginary exponent for powers of the analytic generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Power {
    /// `A^s` for real `s`.
    Real(f64),
    /// `A^{it}`, the unitary group `U_t`.
    Imaginary(f64),
}

impl Power {
    fn exponent(self) -> C64 {
        match self {
            Power::Real(s) => C64::new(s, 0.0),
            Power::Imaginary(t) => C64::new(0.0, t),
        }
    }

    /// `beta^self` for a positive eigenvalue.
    pub fn of(self, beta: f64) -> C64 {
        (self.exponent() * beta.ln()).exp()
    }
}

/// Where an eigenbasis letter lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LetterKind {
    /// The fixed line `e_j`.
    Fixed { block: usize },
    /// `e_k^1 ∝ f_k^1 + i f_k^2`, eigenvalue `1/λ_k`.
    Contracting { block: usize },
    /// `e_k^2 ∝ f_k^1 - i f_k^2`, eigenvalue `λ_k`.
    Expanding { block: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasisVector {
    pub label: usize,
    pub kind: LetterKind,
    pub beta: f64,
    /// Coefficients in the f-basis.
    pub coeffs: DVector<C64>,
}

impl EigenBasisVector {
    pub fn name(&self) -> String {
        match self.kind {
            LetterKind::Fixed { block } => format!("e{block}"),
            LetterKind::Contracting { block } => format!("e{block}^1"),
            LetterKind::Expanding { block } => format!("e{block}^2"),
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.kind, LetterKind::Fixed { .. })
    }
}

/// Immutable description of `(H_R, U_t)` and its complexification.
#[derive(Debug, Clone)]
pub struct SpaceContext {
    pub spec: RepresentationSpec,
    pub dim_real: usize,
    /// Matrix of `A` in the f-basis.
    pub a_matrix: DMatrix<C64>,
    /// Matrix of `<·,·>_U` in the f-basis, `G[i][j] = <f_i, f_j>_U`.
    pub u_gram: DMatrix<C64>,
    pub eigen_basis: Vec<EigenBasisVector>,
    /// `conj_matrix[(m, l)]` is the coefficient of `ζ_m` in `𝒥 ζ_l`.
    pub conj_matrix: DMatrix<C64>,
}

/// Builds `(H_R, U_t)` from block data.
pub fn build_space(spec: RepresentationSpec) -> Result<SpaceContext> {
    spec.validate()?;
    let dim = spec.dim_real();
    let n1 = spec.n_fixed;

    let mut a_matrix = DMatrix::<C64>::zeros(dim, dim);
    let mut u_gram = DMatrix::<C64>::zeros(dim, dim);
    let mut eigen_basis = Vec::with_capacity(dim);

    for j in 0..n1 {
        a_matrix[(j, j)] = C64::new(1.0, 0.0);
        u_gram[(j, j)] = C64::new(1.0, 0.0);
        let mut coeffs = DVector::zeros(dim);
        coeffs[j] = C64::new(1.0, 0.0);
        eigen_basis.push(EigenBasisVector {
            label: j,
            kind: LetterKind::Fixed { block: j },
            beta: 1.0,
            coeffs,
        });
    }

    for (k, &lambda) in spec.rotation_lambdas.iter().enumerate() {
        let p = n1 + 2 * k;
        let inv = 1.0 / lambda;
        let diag = 0.5 * (lambda + inv);
        let off = 0.5 * (lambda - inv);
        a_matrix[(p, p)] = C64::new(diag, 0.0);
        a_matrix[(p + 1, p + 1)] = C64::new(diag, 0.0);
        a_matrix[(p, p + 1)] = C64::new(0.0, off);
        a_matrix[(p + 1, p)] = C64::new(0.0, -off);

        // 2/(1 + A^{-1}) = 2A/(1 + A) on the block
        let gamma = (lambda - 1.0) / (lambda + 1.0);
        u_gram[(p, p)] = C64::new(1.0, 0.0);
        u_gram[(p + 1, p + 1)] = C64::new(1.0, 0.0);
        u_gram[(p, p + 1)] = C64::new(0.0, gamma);
        u_gram[(p + 1, p)] = C64::new(0.0, -gamma);

        let c1 = (lambda + 1.0).sqrt() / 2.0;
        let mut v1 = DVector::zeros(dim);
        v1[p] = C64::new(c1, 0.0);
        v1[p + 1] = C64::new(0.0, c1);
        eigen_basis.push(EigenBasisVector {
            label: eigen_basis.len(),
            kind: LetterKind::Contracting { block: k },
            beta: inv,
            coeffs: v1,
        });

        let c2 = (inv + 1.0).sqrt() / 2.0;
        let mut v2 = DVector::zeros(dim);
        v2[p] = C64::new(c2, 0.0);
        v2[p + 1] = C64::new(0.0, -c2);
        eigen_basis.push(EigenBasisVector {
            label: eigen_basis.len(),
            kind: LetterKind::Expanding { block: k },
            beta: lambda,
            coeffs: v2,
        });
    }

    let mut ctx = SpaceContext {
        spec,
        dim_real: dim,
        a_matrix,
        u_gram,
        eigen_basis,
        conj_matrix: DMatrix::zeros(dim, dim),
    };
    let mut conj_matrix = DMatrix::zeros(dim, dim);
    for l in 0..dim {
        let image = ctx.conjugate(&ctx.eigen_basis[l].coeffs);
        let coords = ctx.to_eigen_coords(&image)?;
        conj_matrix.set_column(l, &coords);
    }
    ctx.conj_matrix = conj_matrix;
    Ok(ctx)
}

impl SpaceContext {
    /// Size of the eigenbasis `S` (equal to the real dimension).
    pub fn alphabet(&self) -> usize {
        self.eigen_basis.len()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.eigen_basis.iter().map(|v| v.beta).collect()
    }

    pub fn fixed_letters(&self) -> Vec<usize> {
        self.eigen_basis
            .iter()
            .filter(|v| v.is_fixed())
            .map(|v| v.label)
            .collect()
    }

    fn check_len(&self, x: &DVector<C64>) -> Result<()> {
        if x.len() != self.dim_real {
            return Err(Error::DimensionMismatch {
                expected: self.dim_real,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// The `i`-th vector of the real f-basis.
    pub fn real_basis_vector(&self, i: usize) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim_real);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    /// Embeds real coordinates.
    pub fn real_vector(&self, coords: &[f64]) -> Result<DVector<C64>> {
        if coords.len() != self.dim_real {
            return Err(Error::DimensionMismatch {
                expected: self.dim_real,
                found: coords.len(),
            });
        }
        Ok(DVector::from_iterator(
            self.dim_real,
            coords.iter().map(|&c| C64::new(c, 0.0)),
        ))
    }

    /// `𝒥(x + iy) = x - iy`: componentwise conjugation in the f-basis.
    pub fn conjugate(&self, x: &DVector<C64>) -> DVector<C64> {
        x.map(|c| c.conj())
    }

    /// Largest imaginary part of the f-coordinates.
    pub fn imaginary_part(&self, x: &DVector<C64>) -> f64 {
        x.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, x: &DVector<C64>, tol: f64) -> bool {
        self.imaginary_part(x) <= tol
    }

    pub fn inner_ambient(&self, x: &DVector<C64>, y: &DVector<C64>) -> Result<C64> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(x.dotc(y))
    }

    /// `<x, y>_U`, conjugate-linear in `x`.
    pub fn inner_u(&self, x: &DVector<C64>, y: &DVector<C64>) -> Result<C64> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(x.dotc(&(&self.u_gram * y)))
    }

    pub fn norm_u(&self, x: &DVector<C64>) -> Result<f64> {
        Ok(self.inner_u(x, x)?.re.max(0.0).sqrt())
    }

    /// Coordinates `c_l = <ζ_l, x>_U` in the `U`-orthonormal eigenbasis.
    pub fn to_eigen_coords(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        self.check_len(x)?;
        let gx = &self.u_gram * x;
        Ok(DVector::from_iterator(
            self.alphabet(),
            self.eigen_basis.iter().map(|z| z.coeffs.dotc(&gx)),
        ))
    }

    /// `Σ_l c_l ζ_l` in f-coordinates.
    pub fn from_eigen_coords(&self, c: &DVector<C64>) -> Result<DVector<C64>> {
        if c.len() != self.alphabet() {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet(),
                found: c.len(),
            });
        }
        let mut out = DVector::zeros(self.dim_real);
        for (z, &cl) in self.eigen_basis.iter().zip(c.iter()) {
            out.axpy(cl, &z.coeffs, C64::new(1.0, 0.0));
        }
        Ok(out)
    }

    /// `A^s x` through the eigenbasis decomposition.
    pub fn apply_a_power(&self, power: Power, x: &DVector<C64>) -> Result<DVector<C64>> {
        let mut c = self.to_eigen_coords(x)?;
        for (cl, z) in c.iter_mut().zip(&self.eigen_basis) {
            *cl *= power.of(z.beta);
        }
        self.from_eigen_coords(&c)
    }

    /// `U_t x = A^{it} x`.
    pub fn flow(&self, t: f64, x: &DVector<C64>) -> Result<DVector<C64>> {
        self.apply_a_power(Power::Imaginary(t), x)
    }

    /// Largest `|Im <x, f>_U|` over the real f-basis.
    pub fn real_commutant_residual(&self, x: &DVector<C64>) -> Result<f64> {
        self.check_len(x)?;
        let mut worst: f64 = 0.0;
        for i in 0..self.dim_real {
            let f = self.real_basis_vector(i);
            worst = worst.max(self.inner_u(x, &f)?.im.abs());
        }
        Ok(worst)
    }

    /// Membership in `H_R' = {ξ : <ξ, η>_U ∈ R for all η ∈ H_R}`.
    pub fn is_real_commutant_vector(&self, x: &DVector<C64>, tol: f64) -> bool {
        self.real_commutant_residual(x)
            .map(|r| r <= tol)
            .unwrap_or(false)
    }

    /// Matrix of `A^s` in the f-basis (for invariant checks).
    pub fn a_power_matrix(&self, power: Power) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim_real, self.dim_real);
        for i in 0..self.dim_real {
            let col = self
                .apply_a_power(power, &self.real_basis_vector(i))
                .expect("basis vector has the right length");
            m.set_column(i, &col);
        }
        m
    }

    /// Gram matrix of the eigenbasis under `<·,·>_U`.
    pub fn eigen_gram(&self) -> DMatrix<C64> {
        let r = self.alphabet();
        DMatrix::from_fn(r, r, |a, b| {
            self.inner_u(&self.eigen_basis[a].coeffs, &self.eigen_basis[b].coeffs)
                .expect("eigenvectors have the right length")
        })
    }

    /// Bilinear pairing `<𝒥ζ_l, ζ_m>_U` between eigenbasis letters.
    pub fn letter_pairing(&self, l: usize, m: usize) -> C64 {
        self.conj_matrix[(m, l)].conj()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_representation() {
        let ctx = build_space(RepresentationSpec::new(1, vec![])).unwrap();
        assert_eq!(ctx.a_matrix[(0, 0)], c(1.0, 0.0));
        assert_eq!(ctx.u_gram[(0, 0)], c(1.0, 0.0));
        assert_eq!(ctx.eigen_basis.len(), 1);
        assert_eq!(ctx.eigen_basis[0].beta, 1.0);
    }

    #[test]
    fn rotation_block_at_lambda_two() {
        let ctx = build_space(RepresentationSpec::new(0, vec![2.0])).unwrap();
        assert_abs_diff_eq!(ctx.a_matrix[(0, 0)].re, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(ctx.a_matrix[(0, 1)].im, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(ctx.a_matrix[(1, 0)].im, -0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(ctx.a_matrix[(1, 1)].re, 1.25, epsilon = 1e-15);

        let eig = ctx.a_matrix.clone().symmetric_eigenvalues();
        let mut ev: Vec<f64> = eig.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 2.0, epsilon = 1e-12);

        let e1 = &ctx.eigen_basis[0].coeffs;
        let e2 = &ctx.eigen_basis[1].coeffs;
        assert_abs_diff_eq!(ctx.inner_u(e1, e1).unwrap().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ctx.inner_u(e1, e2).unwrap().norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_block_formulas() {
        let ctx = build_space(RepresentationSpec::new(2, vec![2.0, 3.5])).unwrap();
        for z in &ctx.eigen_basis {
            let az = &ctx.a_matrix * &z.coeffs;
            let diff = &az - z.coeffs.scale(z.beta);
            assert!(diff.norm() < 1e-14, "{}: {}", z.name(), diff.norm());
        }
        let gram = ctx.eigen_gram();
        let id = DMatrix::<C64>::identity(ctx.alphabet(), ctx.alphabet());
        assert!(max_abs(&(gram - id)) < 1e-12);
    }

    #[test]
    fn u_gram_matches_matrix_function_of_a() {
        let ctx = build_space(RepresentationSpec::new(1, vec![2.0, 5.0])).unwrap();
        let n = ctx.dim_real;
        let id = DMatrix::<C64>::identity(n, n);
        let a_inv = ctx.a_matrix.clone().try_inverse().unwrap();
        let b = (&id + a_inv).try_inverse().unwrap() * c(2.0, 0.0);
        assert!(max_abs(&(b - &ctx.u_gram)) < 1e-12);
        assert!(max_abs(&(ctx.u_gram.adjoint() - &ctx.u_gram)) < 1e-15);
        let eig = ctx.u_gram.clone().symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn conjugation_inverts_a() {
        let ctx = build_space(RepresentationSpec::new(1, vec![2.0, 3.0])).unwrap();
        // 𝒥 A 𝒥 = A^{-1}: as matrices, conj(A) = A^{-1}
        let a_inv = ctx.a_matrix.clone().try_inverse().unwrap();
        let conj_a = ctx.a_matrix.map(|z| z.conj());
        assert!(max_abs(&(conj_a - a_inv)) < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            build_space(RepresentationSpec::new(1, vec![1.0])).unwrap_err(),
            Error::InvalidLambda {
                index: 0,
                value: 1.0
            }
        );
        assert!(matches!(
            build_space(RepresentationSpec::new(0, vec![2.0, 0.5])),
            Err(Error::InvalidLambda { index: 1, .. })
        ));
        assert!(build_space(RepresentationSpec::new(0, vec![f64::NAN])).is_err());
        assert_eq!(
            build_space(RepresentationSpec::new(0, vec![])).unwrap_err(),
            Error::EmptySpace
        );
    }

    #[test]
    fn inner_u_on_fixed_vector_is_ambient() {
        let ctx = build_space(RepresentationSpec::new(1, vec![2.0])).unwrap();
        let xi0 = ctx.real_basis_vector(0);
        let eta = DVector::from_vec(vec![c(0.3, 0.1), c(-1.0, 2.0), c(0.5, -0.7)]);
        assert_abs_diff_eq!(
            (ctx.inner_u(&xi0, &eta).unwrap() - ctx.inner_ambient(&xi0, &eta).unwrap()).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(ctx.inner_u(&xi0, &xi0).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn inner_u_dimension_mismatch() {
        let ctx = build_space(RepresentationSpec::new(2, vec![])).unwrap();
        let x = DVector::from_element(3, c(1.0, 0.0));
        let y = DVector::from_element(2, c(1.0, 0.0));
        assert_eq!(
            ctx.inner_u(&x, &y).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn a_powers_on_eigenvectors() {
        let ctx = build_space(RepresentationSpec::new(1, vec![2.0])).unwrap();
        let xi0 = ctx.real_basis_vector(0);
        let r = ctx.apply_a_power(Power::Real(-0.5), &xi0).unwrap();
        assert!((r - &xi0).norm() < 1e-15);

        let e2 = ctx.eigen_basis[2].coeffs.clone();
        let r = ctx.apply_a_power(Power::Real(-0.5), &e2).unwrap();
        assert!((r - e2.scale(2f64.powf(-0.5))).norm() < 1e-14);

        // A^{1} agrees with the matrix of A
        let x = DVector::from_vec(vec![c(0.2, 0.0), c(1.0, -0.5), c(0.3, 0.9)]);
        let r = ctx.apply_a_power(Power::Real(1.0), &x).unwrap();
        assert!((r - &ctx.a_matrix * &x).norm() < 1e-13);
        let back = ctx
            .apply_a_power(
                Power::Real(-1.0),
                &ctx.apply_a_power(Power::Real(1.0), &x).unwrap(),
            )
            .unwrap();
        assert!((back - x).norm() < 1e-13);
    }

    #[test]
    fn flow_is_rotation_by_log_lambda() {
        let ctx = build_space(RepresentationSpec::new(0, vec![2.0])).unwrap();
        let t = 1.0;
        // oracle: exponentiate the rotation generator of U_t(k)
        let theta = t * 2f64.ln();
        let gen = DMatrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]);
        let rot = gen.exp();
        let f1 = ctx.real_basis_vector(0);
        let ut = ctx.flow(t, &f1).unwrap();
        assert_abs_diff_eq!(ut[0].re, rot[(0, 0)], epsilon = 1e-14);
        assert_abs_diff_eq!(ut[1].re, rot[(1, 0)], epsilon = 1e-14);
        assert!(ctx.imaginary_part(&ut) < 1e-14);
        assert_abs_diff_eq!(ut[0].re, theta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(ut[1].re, theta.sin(), epsilon = 1e-14);
    }

    #[test]
    fn real_commutant_membership() {
        let ctx = build_space(RepresentationSpec::new(1, vec![2.0, 3.0])).unwrap();
        let tol = crate::DEFAULT_MEMBERSHIP_TOL;
        let xi0 = ctx.real_basis_vector(0);
        assert!(ctx.is_real_commutant_vector(&xi0, tol));
        assert!(!ctx.is_real_commutant_vector(&xi0.scale(1.0).map(|z| z * C64::i()), tol));
        for i in 0..ctx.dim_real {
            let z = ctx.real_basis_vector(i);
            let w = ctx.apply_a_power(Power::Real(-0.5), &z).unwrap();
            assert!(ctx.is_real_commutant_vector(&w, tol), "A^-1/2 f_{i}");
        }
        // a rotated real vector that is not in H_R' (f_1 itself pairs imaginarily with f_2)
        let f1 = ctx.real_basis_vector(1);
        assert!(!ctx.is_real_commutant_vector(&f1, tol));
    }

    #[test]
    fn conj_matrix_pairs_eigenvalues() {
        let ctx = build_space(RepresentationSpec::new(1, vec![3.0])).unwrap();
        // 𝒥 e^1 = sqrt(λ) e^2, 𝒥 e^2 = e^1 / sqrt(λ)
        assert_abs_diff_eq!(ctx.conj_matrix[(2, 1)].re, 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            ctx.conj_matrix[(1, 2)].re,
            1.0 / 3f64.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(ctx.conj_matrix[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ctx.letter_pairing(1, 2).re, 3f64.sqrt(), epsilon = 1e-14);
    }
}
