//! Tomita-Takesaki data of the vacuum state and the modular flow.
//!
//! In the eigen-word basis `Δ` and the second quantized flow are diagonal:
//! the word `ζ_{i_1}⊗…⊗ζ_{i_n}` has `Δ`-eigenvalue `Π β_{i_j}^{-1}`. The
//! antilinear maps `S` and `J` are stored as matrices acting on conjugated
//! coordinates.

use nalgebra::DVector;

use crate::error::Result;
use crate::fock::{FockBasis, FockSpace, FockVector, Word};
use crate::hilbert::{Power, SpaceContext};
use crate::ops::{field_left, field_right, gram_adjoint_residual, word_operator, FockOperator};
use crate::C64;

/// Expands `x_1 ⊗ … ⊗ x_n`, each factor given by eigen coordinates.
fn tensor_coords(factors: &[&DVector<C64>]) -> FockVector {
    let mut out = FockVector::vacuum();
    for c in factors {
        let mut next = FockVector::zero();
        for (w, &a) in &out.coeffs {
            for (l, &cl) in c.iter().enumerate() {
                if cl != C64::new(0.0, 0.0) {
                    let mut letters = w.0.clone();
                    letters.push(l);
                    next.add_term(Word(letters), a * cl);
                }
            }
        }
        out = next;
    }
    out
}

/// Eigen coordinates of `𝒥ζ_l` for every letter.
fn conj_letters(ctx: &SpaceContext) -> Vec<DVector<C64>> {
    (0..ctx.alphabet())
        .map(|l| ctx.conj_matrix.column(l).into_owned())
        .collect()
}

/// `S(ζ_{w_1}⊗…⊗ζ_{w_n}) = 𝒥ζ_{w_n}⊗…⊗𝒥ζ_{w_1}`, extended antilinearly.
pub fn tomita_s(space: &FockSpace) -> Result<FockOperator> {
    let images = conj_letters(&space.ctx);
    let d = space.truncation() as isize;
    Ok(FockOperator::from_action(&space.basis, (0, 0), d, |w| {
        let factors: Vec<&DVector<C64>> = w.letters().iter().rev().map(|&l| &images[l]).collect();
        tensor_coords(&factors)
    })?
    .with_antilinear(true))
}

/// `J(ζ_{w_1}⊗…⊗ζ_{w_n}) = A^{-1/2}𝒥ζ_{w_n}⊗…⊗A^{-1/2}𝒥ζ_{w_1}`, antilinear.
pub fn modular_j(space: &FockSpace) -> Result<FockOperator> {
    let ctx = &space.ctx;
    let mut images = Vec::with_capacity(ctx.alphabet());
    for z in &ctx.eigen_basis {
        let v = ctx.apply_a_power(Power::Real(-0.5), &ctx.conjugate(&z.coeffs))?;
        images.push(ctx.to_eigen_coords(&v)?);
    }
    let d = space.truncation() as isize;
    Ok(FockOperator::from_action(&space.basis, (0, 0), d, |w| {
        let factors: Vec<&DVector<C64>> = w.letters().iter().rev().map(|&l| &images[l]).collect();
        tensor_coords(&factors)
    })?
    .with_antilinear(true))
}

/// Diagonal of `Δ^s` (`Π_j β_{i_j}^{-s}` on each word) without forming a matrix.
pub fn delta_diagonal(ctx: &SpaceContext, basis: &FockBasis, power: Power) -> DVector<C64> {
    let betas = ctx.betas();
    let minus = match power {
        Power::Real(s) => Power::Real(-s),
        Power::Imaginary(t) => Power::Imaginary(-t),
    };
    let per_letter: Vec<C64> = betas.iter().map(|&b| minus.of(b)).collect();
    DVector::from_iterator(
        basis.dim(),
        basis
            .words()
            .map(|w| w.letters().iter().map(|&l| per_letter[l]).product::<C64>()),
    )
}

/// `Δ^s` for real or imaginary `s`.
pub fn delta_power(space: &FockSpace, power: Power) -> Result<FockOperator> {
    FockOperator::diagonal(
        &space.basis,
        &delta_diagonal(&space.ctx, &space.basis, power),
    )
}

/// Diagonal of `𝓕(U_t)`: phase `Π_j β_{i_j}^{it}` on each word.
pub fn flow_diagonal(ctx: &SpaceContext, basis: &FockBasis, t: f64) -> DVector<C64> {
    let per_letter: Vec<C64> = ctx
        .betas()
        .iter()
        .map(|&b| Power::Imaginary(t).of(b))
        .collect();
    DVector::from_iterator(
        basis.dim(),
        basis
            .words()
            .map(|w| w.letters().iter().map(|&l| per_letter[l]).product::<C64>()),
    )
}

/// Second quantization `𝓕(U_t)` of the one-particle flow.
pub fn fock_flow(space: &FockSpace, t: f64) -> Result<FockOperator> {
    FockOperator::diagonal(&space.basis, &flow_diagonal(&space.ctx, &space.basis, t))
}

/// The commutant operator `J x_{Jv} J` whose vacuum vector is `v`.
pub fn right_word_operator(space: &FockSpace, v: &FockVector) -> Result<FockOperator> {
    let j = modular_j(space)?;
    let jv = j.apply_vector(v)?;
    j.compose(&word_operator(space, &jv)?)?.compose(&j)
}

/// `max |J s_q(ξ) J - d_q(A^{-1/2}ξ)|` on input degrees `≤ d-1`.
pub fn commutant_identity_residual(space: &FockSpace, xi: &DVector<C64>, tol: f64) -> Result<f64> {
    let j = modular_j(space)?;
    let lhs = j.compose(&field_left(space, xi, tol)?)?.compose(&j)?;
    let eta = space.ctx.apply_a_power(Power::Real(-0.5), xi)?;
    let rhs = field_right(space, &eta, tol)?;
    lhs.residual_on(&rhs, space.truncation() as isize - 1)
}

/// `max |𝓕(U_t) s_q(ξ) 𝓕(U_t)^* - s_q(U_t ξ)|` on input degrees `≤ d-1`.
pub fn flow_covariance_residual(
    space: &FockSpace,
    xi: &DVector<C64>,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let lhs = fock_flow(space, t)?
        .compose(&field_left(space, xi, tol)?)?
        .compose(&fock_flow(space, -t)?)?;
    let rotated = space.ctx.flow(t, xi)?;
    // U_t preserves H_R; drop the round-off imaginary part before the check
    let rotated = rotated.map(|z| C64::new(z.re, 0.0));
    let rhs = field_left(space, &rotated, tol)?;
    lhs.residual_on(&rhs, space.truncation() as isize - 1)
}

/// Residuals of the modular relations on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularResiduals {
    /// `S - J Δ^{1/2}`.
    pub polar: f64,
    /// `J^2 - 1`.
    pub j_involution: f64,
    /// `J Δ J - Δ^{-1}`.
    pub j_delta: f64,
    /// `J Δ^{it} J - Δ^{it}`, worst over the sampled `t`.
    pub j_delta_it: f64,
    /// Gram-unitarity of `Δ^{it}`, worst over the sampled `t`.
    pub delta_it_unitary: f64,
    /// `S^2 - 1`.
    pub s_involution: f64,
}

impl ModularResiduals {
    pub fn max(&self) -> f64 {
        [
            self.polar,
            self.j_involution,
            self.j_delta,
            self.j_delta_it,
            self.delta_it_unitary,
            self.s_involution,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn modular_residuals(space: &FockSpace, times: &[f64]) -> Result<ModularResiduals> {
    let d = space.truncation() as isize;
    let s = tomita_s(space)?;
    let j = modular_j(space)?;
    let id = FockOperator::identity(&space.basis);
    let polar = s.residual_on(&j.compose(&delta_power(space, Power::Real(0.5))?)?, d)?;
    let j_involution = j.compose(&j)?.residual_on(&id, d)?;
    let s_involution = s.compose(&s)?.residual_on(&id, d)?;
    let j_delta = j
        .compose(&delta_power(space, Power::Real(1.0))?)?
        .compose(&j)?
        .residual_on(&delta_power(space, Power::Real(-1.0))?, d)?;
    let mut j_delta_it: f64 = 0.0;
    let mut delta_it_unitary: f64 = 0.0;
    for &t in times {
        let dit = delta_power(space, Power::Imaginary(t))?;
        j_delta_it = j_delta_it.max(j.compose(&dit)?.compose(&j)?.residual_on(&dit, d)?);
        let back = delta_power(space, Power::Imaginary(-t))?;
        delta_it_unitary = delta_it_unitary.max(gram_adjoint_residual(space, &dit, &back, d)?);
    }
    Ok(ModularResiduals {
        polar,
        j_involution,
        j_delta,
        j_delta_it,
        delta_it_unitary,
        s_involution,
    })
}

/// Vacuum expectation is flow invariant: `|<Ω, F x F^* Ω> - <Ω, x Ω>|`.
pub fn vacuum_flow_invariance(space: &FockSpace, x: &FockOperator, t: f64) -> Result<f64> {
    let conj = fock_flow(space, t)?
        .compose(x)?
        .compose(&fock_flow(space, -t)?)?;
    Ok((conj.matrix[(0, 0)] - x.matrix[(0, 0)]).norm())
}

/// `J` applied to a one-letter vector, for convenience: `A^{-1/2}𝒥ξ`.
pub fn j_on_letter(ctx: &SpaceContext, xi: &DVector<C64>) -> Result<DVector<C64>> {
    ctx.apply_a_power(Power::Real(-0.5), &ctx.conjugate(xi))
}
