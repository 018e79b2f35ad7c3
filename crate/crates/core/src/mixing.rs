//! Diagnostics for the generator masa `A = {s_q(ξ_0)}''` of a fixed unit
//! vector: the vacuum-preserving conditional expectation, the compressions
//! `T_{x,y}(aΩ) = E_A(x a y)Ω` in the normalized Hermite frame, their
//! Hilbert-Schmidt partial sums, and the intersection of two masa frames.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{q_bracket, q_factorial, FockSpace, Word};
use crate::modular::right_word_operator;
use crate::ops::{field_left, FockOperator};
use crate::{FockVector, C64, DEFAULT_MEMBERSHIP_TOL};

const ZERO: C64 = C64::new(0.0, 0.0);

/// The masa generated by the field of the fixed letter `ξ_0 = ζ_{xi0}`.
#[derive(Debug, Clone)]
pub struct GeneratorMasaContext<'a> {
    pub space: &'a FockSpace,
    pub xi0: usize,
    /// `s_q(ξ_0)`.
    pub field: FockOperator,
    /// `ĥ_n = ξ_0^{⊗n} / sqrt([n]_q!)`, `n = 0..=d`.
    pub hermite_frame: Vec<DVector<C64>>,
    /// `e_{ξ_0} = Σ_n ĥ_n <ĥ_n, ·>_q`.
    pub projector: FockOperator,
}

fn check_fixed_letter(space: &FockSpace, index: usize) -> Result<()> {
    let r = space.ctx.alphabet();
    let letter = space
        .ctx
        .eigen_basis
        .get(index)
        .ok_or(Error::InvalidLetter {
            letter: index,
            alphabet: r,
        })?;
    if !letter.is_fixed() {
        return Err(Error::NotFixedVector {
            index,
            beta: letter.beta,
        });
    }
    Ok(())
}

fn frame(space: &FockSpace, letter: usize) -> Result<Vec<DVector<C64>>> {
    let q = space.q();
    (0..=space.truncation())
        .map(|n| {
            let v = space.word_dense(&Word::power(letter, n))?;
            Ok(v / C64::new(q_factorial(q, n).sqrt(), 0.0))
        })
        .collect()
}

/// Builds the masa data for the fixed letter `xi0_index`.
pub fn masa_context(space: &FockSpace, xi0_index: usize) -> Result<GeneratorMasaContext<'_>> {
    check_fixed_letter(space, xi0_index)?;
    let xi0 = space.ctx.eigen_basis[xi0_index].coeffs.clone();
    let field = field_left(space, &xi0, DEFAULT_MEMBERSHIP_TOL)?;
    let hermite_frame = frame(space, xi0_index)?;

    let dim = space.dim();
    let mut pm = DMatrix::zeros(dim, dim);
    for h in &hermite_frame {
        // row functional <h, ·>_q = (G h)^H
        let gh = space.gram.apply(h)?;
        for j in 0..dim {
            let c = gh[j].conj();
            if c != ZERO {
                for i in 0..dim {
                    pm[(i, j)] += h[i] * c;
                }
            }
        }
    }
    // G is block diagonal by degree, so the projector preserves degrees
    let projector = FockOperator::from_matrix(&space.basis, pm, (0, 0))?;
    Ok(GeneratorMasaContext {
        space,
        xi0: xi0_index,
        field,
        hermite_frame,
        projector,
    })
}

impl GeneratorMasaContext<'_> {
    /// Frame coordinates `<ĥ_m, v>_q`, `m = 0..=d`.
    pub fn frame_coords(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        let gv = self.space.gram.apply(v)?;
        Ok(DVector::from_iterator(
            self.hermite_frame.len(),
            self.hermite_frame.iter().map(|h| h.dotc(&gv)),
        ))
    }

    /// `e_{ξ_0} v`.
    pub fn project(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        let c = self.frame_coords(v)?;
        let mut out = DVector::zeros(v.len());
        for (h, &cm) in self.hermite_frame.iter().zip(c.iter()) {
            out.axpy(cm, h, C64::new(1.0, 0.0));
        }
        Ok(out)
    }

    /// `‖E(x)‖_{2,φ} = ‖e_{ξ_0} xΩ‖_q`.
    pub fn expectation_norm(&self, x: &FockOperator) -> Result<f64> {
        self.space.gram.norm_dense(&self.project(&x.on_vacuum())?)
    }

    /// Largest `n` for which `x H_n(s_q(ξ_0)) y Ω` is exact.
    pub fn max_valid_n(&self, x: &FockOperator, y: &FockOperator) -> isize {
        let hi_y = y.degree_shift.1.max(0);
        (x.valid_max_degree - hi_y).min(self.space.truncation() as isize - hi_y)
    }

    /// `T_{x,y}` in the frame: entry `(m, n)` is
    /// `<ĥ_m, x H_n(s_q(ξ_0)) y Ω>_q / sqrt([n]_q!)`, `n ≤ max_n`.
    ///
    /// The vectors `H_n(s_q(ξ_0)) yΩ` come from the three-term recurrence
    /// applied to `yΩ`.
    pub fn t_operator_matrix(
        &self,
        x: &FockOperator,
        y: &FockOperator,
        max_n: usize,
    ) -> Result<DMatrix<C64>> {
        let available = self.max_valid_n(x, y);
        if available < 0 || max_n as isize > available {
            return Err(Error::InsufficientDegrees {
                requested: max_n,
                available: available.max(0) as usize,
            });
        }
        let q = self.space.q();
        let rows = self.hermite_frame.len();
        let mut t = DMatrix::zeros(rows, max_n + 1);
        let y_omega = y.on_vacuum();
        let mut prev = DVector::zeros(y_omega.len());
        let mut cur = y_omega;
        for n in 0..=max_n {
            if n > 0 {
                let next = self.field.apply(&cur)? - prev * C64::new(q_bracket(q, n - 1), 0.0);
                prev = cur;
                cur = next;
            }
            let column =
                self.frame_coords(&x.apply(&cur)?)? / C64::new(q_factorial(q, n).sqrt(), 0.0);
            t.set_column(n, &column);
        }
        Ok(t)
    }

    /// Same matrix evaluated the other way round: `yΩ` is produced by the
    /// commutant operator `d` with `dΩ = yΩ`, so that
    /// `x H_n(s_q(ξ_0)) yΩ = x d ξ_0^{⊗n}`.
    pub fn t_operator_matrix_commutant(
        &self,
        x: &FockOperator,
        y: &FockOperator,
        max_n: usize,
    ) -> Result<DMatrix<C64>> {
        let y_omega = FockVector::from_dense(&self.space.basis, &y.on_vacuum());
        let d = right_word_operator_mixed(self.space, &y_omega)?;
        let available = (x.valid_max_degree - d.degree_shift.1.max(0)).min(d.valid_max_degree);
        if available < 0 || max_n as isize > available {
            return Err(Error::InsufficientDegrees {
                requested: max_n,
                available: available.max(0) as usize,
            });
        }
        let xd = x.compose(&d)?;
        let q = self.space.q();
        let mut t = DMatrix::zeros(self.hermite_frame.len(), max_n + 1);
        for n in 0..=max_n {
            let power = self.space.word_dense(&Word::power(self.xi0, n))?;
            let column =
                self.frame_coords(&xd.apply(&power)?)? / C64::new(q_factorial(q, n).sqrt(), 0.0);
            t.set_column(n, &column);
        }
        Ok(t)
    }

    /// Squared HS column norms and their partial sums.
    pub fn hs_partial_sums(
        &self,
        x: &FockOperator,
        y: &FockOperator,
        max_n: usize,
    ) -> Result<HsDiagnostics> {
        let t = self.t_operator_matrix(x, y, max_n)?;
        Ok(HsDiagnostics::from_t_matrix(&t))
    }

    /// `‖E(x ĥ_n y)‖_{2,φ}` over the normalized Hermite elements, for `x`, `y`
    /// with vanishing expectation.
    pub fn strong_mixing_decay(
        &self,
        x: &FockOperator,
        y: &FockOperator,
        max_n: usize,
        tol: f64,
    ) -> Result<Vec<f64>> {
        for (which, op) in [("x", x), ("y", y)] {
            let norm = self.expectation_norm(op)?;
            if norm > tol {
                return Err(Error::ExpectationNonzero { which, norm });
            }
        }
        let diag = self.hs_partial_sums(x, y, max_n)?;
        Ok(diag.terms.iter().map(|a| a.sqrt()).collect())
    }
}

// Right operator for a vacuum vector that may mix degrees.
fn right_word_operator_mixed(space: &FockSpace, v: &FockVector) -> Result<FockOperator> {
    let mut by_degree: std::collections::BTreeMap<usize, FockVector> = Default::default();
    for (w, &c) in &v.coeffs {
        by_degree
            .entry(w.degree())
            .or_default()
            .add_term(w.clone(), c);
    }
    let mut total: Option<FockOperator> = None;
    for part in by_degree.values() {
        let op = right_word_operator(space, part)?;
        total = Some(match total {
            None => op,
            Some(t) => t.add(&op)?,
        });
    }
    Ok(total.unwrap_or_else(|| FockOperator::zero(&space.basis)))
}

/// Hilbert-Schmidt data of a `T_{x,y}` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsDiagnostics {
    /// `a_n = Σ_m |T_{mn}|^2`.
    pub terms: Vec<f64>,
    /// `Σ_{n ≤ N} a_n`.
    pub partial_sums: Vec<f64>,
    /// Median of `a_{n+1} / a_n` over the window.
    pub ratio: Option<f64>,
}

impl HsDiagnostics {
    pub fn from_t_matrix(t: &DMatrix<C64>) -> Self {
        let terms: Vec<f64> = (0..t.ncols())
            .map(|n| t.column(n).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let partial_sums = terms
            .iter()
            .scan(0.0, |acc, &a| {
                *acc += a;
                Some(*acc)
            })
            .collect();
        let ratio = hs_ratio_estimate(&terms);
        Self {
            terms,
            partial_sums,
            ratio,
        }
    }
}

/// Median of `a_{n+1}/a_n` over consecutive pairs with `a_n` above round-off;
/// `None` when no such pair exists.
pub fn hs_ratio_estimate(terms: &[f64]) -> Option<f64> {
    let scale = terms.iter().copied().fold(0.0, f64::max);
    let floor = 1e-14 * scale;
    let mut ratios: Vec<f64> = terms
        .windows(2)
        .filter(|w| w[0] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    let k = ratios.len();
    Some(if k % 2 == 1 {
        ratios[k / 2]
    } else {
        0.5 * (ratios[k / 2 - 1] + ratios[k / 2])
    })
}

/// Number of principal angles below `tol` between the closed spans of
/// `{ξ_1^{⊗n}}` and `{ξ_2^{⊗n}}`, `n ≤ d` (cosines `≥ 1 - tol`).
pub fn masa_intersection_dim(space: &FockSpace, xi1: usize, xi2: usize, tol: f64) -> Result<usize> {
    check_fixed_letter(space, xi1)?;
    check_fixed_letter(space, xi2)?;
    if xi1 == xi2 {
        return Err(Error::SameVector(xi1));
    }
    let ctx = &space.ctx;
    let overlap = ctx
        .inner_u(&ctx.eigen_basis[xi1].coeffs, &ctx.eigen_basis[xi2].coeffs)?
        .norm();
    if overlap > DEFAULT_MEMBERSHIP_TOL {
        return Err(Error::NotOrthogonal {
            first: xi1,
            second: xi2,
            overlap,
        });
    }
    frame_intersection_dim(space, &frame(space, xi1)?, &frame(space, xi2)?, tol)
}

/// Principal-angle count for two `⟨·,·⟩_q`-orthonormal frames.
pub fn frame_intersection_dim(
    space: &FockSpace,
    f1: &[DVector<C64>],
    f2: &[DVector<C64>],
    tol: f64,
) -> Result<usize> {
    let mut cross = DMatrix::zeros(f1.len(), f2.len());
    for (j, b) in f2.iter().enumerate() {
        let gb = space.gram.apply(b)?;
        for (i, a) in f1.iter().enumerate() {
            cross[(i, j)] = a.dotc(&gb);
        }
    }
    let sv = cross.singular_values();
    Ok(sv.iter().filter(|&&s| s >= 1.0 - tol).count())
}
