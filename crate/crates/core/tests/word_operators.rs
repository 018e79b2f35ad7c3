//! Word operators against an independent construction: the recursion
//! `X_w = s(ζ_{w_1}) X_{w_2..w_n} - Σ_{l≥2} q^{l-2} <𝒥ζ_{w_1}, ζ_{w_l}>_U X_{w without 1, l}`,
//! where `s(ζ) = c(ζ) + c(𝒥ζ)^*` is the field with vacuum vector `ζ`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use qfock::ops::{
    create_left, field_left, field_left_complex, field_right, word_operator, FockOperator,
};
use qfock::spectral::q_hermite_operator;
use qfock::{build_space, FockSpace, FockVector, Power, RepresentationSpec, Word};

const ONE: C64 = C64::new(1.0, 0.0);

fn space(n_fixed: usize, lambdas: Vec<f64>, q: f64, d: usize) -> FockSpace {
    let ctx = build_space(RepresentationSpec::new(n_fixed, lambdas)).unwrap();
    FockSpace::new(ctx, q, d).unwrap()
}

fn recursive_word_operator(space: &FockSpace, letters: &[usize]) -> FockOperator {
    if letters.is_empty() {
        return FockOperator::identity(&space.basis);
    }
    let first = letters[0];
    let zeta = space.ctx.eigen_basis[first].coeffs.clone();
    let s = field_left_complex(space, &zeta).unwrap();
    let mut out = s
        .compose(&recursive_word_operator(space, &letters[1..]))
        .unwrap();
    let q = space.q();
    for l in 1..letters.len() {
        let pairing = space.ctx.letter_pairing(first, letters[l]);
        if pairing == C64::new(0.0, 0.0) {
            continue;
        }
        let rest: Vec<usize> = letters[1..]
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != l - 1)
            .map(|(_, &x)| x)
            .collect();
        let weight = pairing * q.powi(l as i32 - 1);
        out = out
            .add_scaled(&recursive_word_operator(space, &rest), -weight)
            .unwrap();
    }
    out
}

#[test]
fn wick_expansion_matches_recursion() {
    for &q in &[-0.8, 0.0, 0.3, 0.9] {
        let s = space(1, vec![2.0], q, 5);
        for letters in [
            vec![1, 2],
            vec![2, 1],
            vec![0, 0],
            vec![1, 0, 2],
            vec![2, 2, 1],
            vec![1, 2, 1, 2],
        ] {
            let wick =
                word_operator(&s, &FockVector::from_word(Word(letters.clone()), ONE)).unwrap();
            let rec = recursive_word_operator(&s, &letters);
            assert_eq!(wick.valid_max_degree, rec.valid_max_degree);
            let r = wick.residual_against(&rec).unwrap();
            assert!(r < 1e-10, "q = {q}, word {letters:?}: {r}");
        }
    }
}

#[test]
fn word_operator_commutes_with_right_fields() {
    let s = space(1, vec![2.0], 0.55, 5);
    let mut v = FockVector::zero();
    v.add_term(Word(vec![1, 2]), C64::new(0.3, 0.4));
    v.add_term(Word(vec![0, 1]), C64::new(-1.0, 0.0));
    let x = word_operator(&s, &v).unwrap();
    for i in 0..s.ctx.dim_real {
        let eta = s
            .ctx
            .apply_a_power(Power::Real(-0.5), &s.ctx.real_basis_vector(i))
            .unwrap();
        let d = field_right(&s, &eta, 1e-10).unwrap();
        let comm = x.compose(&d).unwrap().sub(&d.compose(&x).unwrap()).unwrap();
        assert!(comm.valid_max_degree >= 0);
        assert!(comm.max_abs_on(comm.valid_max_degree) < 1e-10, "f_{i}");
    }
}

#[test]
fn hermite_polynomials_are_word_operators() {
    for &q in &[-0.5, 0.0, 0.7] {
        let s = space(2, vec![], q, 6);
        let xi0 = s.ctx.real_basis_vector(0);
        let field = field_left(&s, &xi0, 1e-10).unwrap();
        for n in 0..=4 {
            let h = q_hermite_operator(q, n, &field).unwrap();
            let w = word_operator(&s, &FockVector::from_word(Word::power(0, n), ONE)).unwrap();
            let r = h.residual_on(&w, w.valid_max_degree).unwrap();
            assert!(r < 1e-10, "q = {q}, n = {n}: {r}");
        }
    }
}

#[test]
fn wick_formula_on_orthogonal_powers() {
    // ⟨ξ_i, ξ⟩_U = 0 for the rotation letters against the fixed vector
    let s = space(1, vec![3.0], -0.4, 5);
    let v = FockVector::from_word(Word(vec![2, 1]), ONE);
    let x = word_operator(&s, &v).unwrap();
    for k in 0..=3 {
        let out = x.apply(&s.word_dense(&Word::power(0, k)).unwrap()).unwrap();
        let mut letters = vec![2, 1];
        letters.extend(std::iter::repeat_n(0, k));
        assert!((out - s.word_dense(&Word(letters)).unwrap()).norm() < 1e-12);
    }
}

#[test]
fn real_letter_words_via_real_fields() {
    // for real letters the word operator of f_a ⊗ f_b is s(f_a)s(f_b) - <f_a, f_b>_U
    let s = space(1, vec![2.0], 0.4, 5);
    for a in 0..3 {
        for b in 0..3 {
            let fa = s.ctx.real_basis_vector(a);
            let fb = s.ctx.real_basis_vector(b);
            let v = FockVector::tensor(&s.ctx, &[fa.clone(), fb.clone()]).unwrap();
            let x = word_operator(&s, &v).unwrap();
            let prod = field_left(&s, &fa, 1e-10)
                .unwrap()
                .compose(&field_left(&s, &fb, 1e-10).unwrap())
                .unwrap()
                .minus_identity(s.ctx.inner_u(&fa, &fb).unwrap())
                .unwrap();
            assert!(x.residual_against(&prod).unwrap() < 1e-10, "({a}, {b})");
        }
    }
}

#[test]
fn creation_on_complex_vector_is_linear() {
    let s = space(1, vec![2.0], 0.2, 3);
    let x = DVector::from_vec(vec![
        C64::new(0.5, 0.1),
        C64::new(0.0, 1.0),
        C64::new(2.0, -0.3),
    ]);
    let c = C64::new(0.7, -0.2);
    let lhs = create_left(&s, &(&x * c)).unwrap();
    let rhs = create_left(&s, &x).unwrap().scale(c);
    assert!(lhs.residual_on(&rhs, 2).unwrap() < 1e-14);
}
