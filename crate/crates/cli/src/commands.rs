use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use qfock::mixing::{masa_context, masa_intersection_dim};
use qfock::modular::{commutant_identity_residual, flow_covariance_residual, modular_residuals};
use qfock::ops::{
    annihilate_left, annihilate_right, create_left, create_right, gram_adjoint_residual,
    q_commutator_residual, split_adjoint_check, word_operator, DEFAULT_DENSE_LIMIT,
};
use qfock::spectral::{
    centralizer_words, classify_type, fixed_subspace_dimension, moment_combinatorial,
    moment_operator, moment_polynomial, ClassifyOptions, CENTRALIZER_TOL, PARTITION_LIMIT,
};
use qfock::{build_space, q_gram, q_gram_bruteforce, FockSpace, FockVector, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::report::{
    CentralizerRow, ConditioningRow, MixingSection, MomentRow, Report, SuiteResult,
};
use crate::CliError;

const FLOW_TIMES: [f64; 3] = [0.3, 1.0, PI];
const RANDOM_DRAWS: usize = 3;
const MASA_TOL: f64 = 1e-8;

pub fn build(config: &RunConfig) -> Result<FockSpace, CliError> {
    config.validate()?;
    let ctx = build_space(config.spec.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let r = ctx.alphabet();
    let dim: usize = (0..=config.truncation).map(|n| r.pow(n as u32)).sum();
    if dim > DEFAULT_DENSE_LIMIT {
        return Err(CliError::Config(format!(
            "truncated space has dimension {dim}, above the dense limit {DEFAULT_DENSE_LIMIT}"
        )));
    }
    Ok(FockSpace::new(ctx, config.q, config.truncation)?)
}

fn conditioning(space: &FockSpace, report: &mut Report) {
    for n in 0..=space.truncation() {
        report.conditioning.push(ConditioningRow {
            degree: n,
            min_eigenvalue: space.gram.min_eigenvalue(n),
            max_eigenvalue: space.gram.max_eigenvalue(n),
            condition_number: space.gram.condition_number(n),
        });
    }
    report
        .warnings
        .extend(space.gram.warnings().iter().cloned());
}

fn max_abs<'a>(values: impl Iterator<Item = &'a C64>) -> f64 {
    values.map(|z| z.norm()).fold(0.0, f64::max)
}

fn word_name(space: &FockSpace, w: &Word) -> String {
    if w.degree() == 0 {
        return "Ω".into();
    }
    w.letters()
        .iter()
        .map(|&l| space.ctx.eigen_basis[l].name())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_real(space: &FockSpace, rng: &mut ChaCha8Rng) -> qfock::Result<DVector<C64>> {
    let coords: Vec<f64> = (0..space.ctx.dim_real)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    space.ctx.real_vector(&coords)
}

fn random_word(r: usize, n: usize, rng: &mut ChaCha8Rng) -> Word {
    Word((0..n).map(|_| rng.gen_range(0..r)).collect())
}

// A suite that errors inside the library is reported as failed, not fatal.
fn guarded(
    name: &str,
    anchor: &str,
    f: impl FnOnce() -> qfock::Result<SuiteResult>,
) -> SuiteResult {
    f().unwrap_or_else(|e| SuiteResult::failed(name, anchor, e.to_string()))
}

fn gram_oracle(space: &FockSpace, config: &RunConfig) -> SuiteResult {
    let (name, anchor) = (
        "gram_oracle",
        "fast q-Gram blocks = Σ_π q^{inv(π)} Π <ζ, ζ'>_U",
    );
    guarded(name, anchor, || {
        let top = config.truncation.min(config.tolerances.oracle_limit);
        let mut worst: f64 = 0.0;
        for n in 0..=top {
            let fast = q_gram(&space.ctx, space.q(), n)?;
            let slow = q_gram_bruteforce(&space.ctx, space.q(), n, config.tolerances.oracle_limit)?;
            for (a, b) in fast.iter().zip(slow.iter()) {
                worst = worst.max((b - a).norm());
            }
        }
        Ok(SuiteResult::residual(
            name,
            anchor,
            worst,
            config.tolerances.identity_tol,
            format!("degrees 0..={top}"),
        ))
    })
}

fn q_commutation(space: &FockSpace, config: &RunConfig, rng: &mut ChaCha8Rng) -> SuiteResult {
    let (name, anchor) = ("q_commutation", "c*(ξ)c(ζ) - q c(ζ)c*(ξ) = <ξ,ζ>_U 1");
    guarded(name, anchor, || {
        let letters: Vec<DVector<C64>> = space
            .ctx
            .eigen_basis
            .iter()
            .map(|e| e.coeffs.clone())
            .collect();
        let mut worst: f64 = 0.0;
        for xi in &letters {
            for zeta in &letters {
                worst = worst.max(q_commutator_residual(space, xi, zeta)?);
            }
        }
        for _ in 0..RANDOM_DRAWS {
            let xi = random_real(space, rng)?;
            let zeta = random_real(space, rng)?;
            worst = worst.max(q_commutator_residual(space, &xi, &zeta)?);
        }
        Ok(SuiteResult::residual(
            name,
            anchor,
            worst,
            config.tolerances.identity_tol,
            format!(
                "{} letter pairs, {RANDOM_DRAWS} random real pairs",
                letters.len().pow(2)
            ),
        ))
    })
}

fn adjointness(space: &FockSpace, config: &RunConfig) -> SuiteResult {
    let (name, anchor) = (
        "adjointness",
        "c*(ξ), r*(ξ) are the q-adjoints of c(ξ), r(ξ)",
    );
    guarded(name, anchor, || {
        let top = space.truncation() as isize - 1;
        let mut worst: f64 = 0.0;
        for e in &space.ctx.eigen_basis {
            let left = gram_adjoint_residual(
                space,
                &create_left(space, &e.coeffs)?,
                &annihilate_left(space, &e.coeffs)?,
                top,
            )?;
            let right = gram_adjoint_residual(
                space,
                &create_right(space, &e.coeffs)?,
                &annihilate_right(space, &e.coeffs)?,
                top,
            )?;
            worst = worst.max(left).max(right);
        }
        Ok(SuiteResult::residual(
            name,
            anchor,
            worst,
            config.tolerances.identity_tol,
            format!("all letters, degrees ≤ {top}"),
        ))
    })
}

fn split_adjoint(space: &FockSpace, config: &RunConfig, rng: &mut ChaCha8Rng) -> SuiteResult {
    let (name, anchor) = (
        "split_adjoint",
        "c*(ξ)(u⊗v) = (c*(ξ)u)⊗v + q^{deg u} u⊗(c*(ξ)v)",
    );
    guarded(name, anchor, || {
        let r = space.ctx.alphabet();
        let d = space.truncation();
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_DRAWS {
            let du = rng.gen_range(1..d);
            let dv = rng.gen_range(1..=d - du);
            let mut u = FockVector::zero();
            let mut v = FockVector::zero();
            for _ in 0..2 {
                u.add_term(
                    random_word(r, du, rng),
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                );
                v.add_term(
                    random_word(r, dv, rng),
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                );
            }
            for e in &space.ctx.eigen_basis {
                worst = worst.max(split_adjoint_check(space, &e.coeffs, &u, &v)?);
            }
        }
        Ok(SuiteResult::residual(
            name,
            anchor,
            worst,
            config.tolerances.identity_tol,
            format!("{RANDOM_DRAWS} random splits, all letters"),
        ))
    })
}

fn wick_formula(space: &FockSpace, config: &RunConfig, rng: &mut ChaCha8Rng) -> SuiteResult {
    let (name, anchor) = (
        "wick_formula",
        "x_w(ξ^{⊗k}) = w ⊗ ξ^{⊗k} when <ζ_i, ξ>_U = 0",
    );
    guarded(name, anchor, || {
        let ctx = &space.ctx;
        let d = space.truncation();
        let Some(&fixed) = ctx.fixed_letters().first() else {
            return Ok(SuiteResult::skipped(
                name,
                anchor,
                "no fixed real letter to act on".into(),
            ));
        };
        let xi = &ctx.eigen_basis[fixed].coeffs;
        let mut others = Vec::new();
        for (l, e) in ctx.eigen_basis.iter().enumerate() {
            if ctx.inner_u(&e.coeffs, xi)?.norm() <= config.tolerances.identity_tol {
                others.push(l);
            }
        }
        if others.is_empty() {
            return Ok(SuiteResult::skipped(
                name,
                anchor,
                "no letter U-orthogonal to the fixed letter".into(),
            ));
        }
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_DRAWS {
            let n = rng.gen_range(1..=d.min(3));
            let w = Word(
                (0..n)
                    .map(|_| others[rng.gen_range(0..others.len())])
                    .collect(),
            );
            let x = word_operator(space, &FockVector::from_word(w.clone(), C64::new(1.0, 0.0)))?;
            for k in 0..=d - n {
                let out = x.apply(&space.word_dense(&Word::power(fixed, k))?)?;
                let expected = space.word_dense(&w.concat(&Word::power(fixed, k)))?;
                worst = worst.max(max_abs((out - expected).iter()));
            }
        }
        Ok(SuiteResult::residual(
            name,
            anchor,
            worst,
            config.tolerances.identity_tol,
            format!(
                "ξ = {}, {RANDOM_DRAWS} random words",
                ctx.eigen_basis[fixed].name()
            ),
        ))
    })
}

fn modular_triple(space: &FockSpace, config: &RunConfig) -> SuiteResult {
    let (name, anchor) = (
        "modular_triple",
        "S = JΔ^{1/2}, J² = 1, JΔJ = Δ^{-1}, JΔ^{it}J = Δ^{it}",
    );
    guarded(name, anchor, || {
        let r = modular_residuals(space, &FLOW_TIMES)?;
        Ok(SuiteResult::residual(
            name,
            anchor,
            r.max(),
            config.tolerances.identity_tol,
            format!(
                "polar {:.3e}, J² {:.3e}, S² {:.3e}, JΔJ {:.3e}, JΔ^itJ {:.3e}, Δ^it unitary {:.3e}",
                r.polar, r.j_involution, r.s_involution, r.j_delta, r.j_delta_it, r.delta_it_unitary
            ),
        ))
    })
}

fn commutant_identity(space: &FockSpace, config: &RunConfig) -> SuiteResult {
    let (name, anchor) = ("commutant_identity", "J s_q(ξ) J = d_q(A^{-1/2}ξ)");
    guarded(name, anchor, || {
        let mut worst: f64 = 0.0;
        for i in 0..space.ctx.dim_real {
            let xi = space.ctx.real_basis_vector(i);
            worst = worst.max(commutant_identity_residual(
                space,
                &xi,
                config.tolerances.identity_tol,
            )?);
        }
        Ok(SuiteResult::residual(
            name,
            anchor,
            worst,
            config.tolerances.identity_tol,
            "all real basis vectors".into(),
        ))
    })
}

fn flow_covariance(space: &FockSpace, config: &RunConfig) -> SuiteResult {
    let (name, anchor) = ("flow_covariance", "σ_{-t}(s_q(ξ)) = s_q(U_t ξ)");
    guarded(name, anchor, || {
        let mut worst: f64 = 0.0;
        for i in 0..space.ctx.dim_real {
            let xi = space.ctx.real_basis_vector(i);
            for &t in &FLOW_TIMES {
                worst = worst.max(flow_covariance_residual(
                    space,
                    &xi,
                    t,
                    config.tolerances.identity_tol,
                )?);
            }
        }
        Ok(SuiteResult::residual(
            name,
            anchor,
            worst,
            config.tolerances.identity_tol,
            "all real basis vectors, t ∈ {0.3, 1, π}".into(),
        ))
    })
}

fn moment_rows(space: &FockSpace, n_max: usize, tol: f64) -> qfock::Result<Vec<MomentRow>> {
    let xi = space.ctx.real_basis_vector(0);
    let operator_top = 2 * (space.truncation() - 1);
    (0..=n_max)
        .map(|n| {
            let operator = if n <= operator_top {
                Some(moment_operator(space, &xi, n, tol)?)
            } else {
                None
            };
            Ok(MomentRow {
                n,
                coefficients: moment_polynomial(n)?,
                combinatorial: moment_combinatorial(space.q(), n)?,
                operator,
            })
        })
        .collect()
}

fn moment_suite(rows: &[MomentRow], tol: f64) -> SuiteResult {
    let (name, anchor) = ("moment_equality", "<Ω, s_q(ξ)^n Ω> = Σ_V q^{cr(V)}");
    let mut worst: f64 = 0.0;
    let mut checked = Vec::new();
    for row in rows {
        if let Some(op) = row.operator {
            worst = worst.max((op - row.combinatorial).abs() / row.combinatorial.abs().max(1.0));
            checked.push(row.n);
        }
    }
    SuiteResult::residual(
        name,
        anchor,
        worst,
        tol,
        format!("relative error, n ∈ {checked:?}"),
    )
}

fn centralizer_rows(space: &FockSpace, deg_max: usize) -> qfock::Result<Vec<CentralizerRow>> {
    let words = centralizer_words(&space.ctx, deg_max, CENTRALIZER_TOL);
    (0..=deg_max)
        .map(|n| {
            let of_degree: Vec<String> = words
                .iter()
                .filter(|w| w.degree() == n)
                .map(|w| word_name(space, w))
                .collect();
            Ok(CentralizerRow {
                degree: n,
                count: of_degree.len(),
                fixed_subspace_dimension: fixed_subspace_dimension(
                    &space.ctx,
                    &space.basis,
                    n,
                    CENTRALIZER_TOL,
                )?,
                words: of_degree,
            })
        })
        .collect()
}

fn centralizer_suite(rows: &[CentralizerRow]) -> SuiteResult {
    let bad: Vec<usize> = rows
        .iter()
        .filter(|r| r.count != r.fixed_subspace_dimension)
        .map(|r| r.degree)
        .collect();
    SuiteResult::exact(
        "centralizer_dimensions",
        "centralizer vectors are spanned by words with Π β = 1",
        bad.is_empty(),
        if bad.is_empty() {
            format!("counts agree for degrees 0..={}", rows.len() - 1)
        } else {
            format!("counts disagree at degrees {bad:?}")
        },
    )
}

pub fn cmd_verify(config: &RunConfig) -> Result<Report, CliError> {
    let space = build(config)?;
    let mut report = Report::new("verify", config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    conditioning(&space, &mut report);
    let tol = config.tolerances.identity_tol;
    report.suites.push(gram_oracle(&space, config));
    report.suites.push(q_commutation(&space, config, &mut rng));
    report.suites.push(adjointness(&space, config));
    report.suites.push(split_adjoint(&space, config, &mut rng));
    report.suites.push(wick_formula(&space, config, &mut rng));
    report.suites.push(modular_triple(&space, config));
    report.suites.push(commutant_identity(&space, config));
    report.suites.push(flow_covariance(&space, config));
    let top = (2 * (config.truncation - 1)).min(2 * PARTITION_LIMIT);
    report.suites.push(match moment_rows(&space, top, tol) {
        Ok(rows) => moment_suite(&rows, tol),
        Err(e) => SuiteResult::failed("moment_equality", "", e.to_string()),
    });
    report
        .suites
        .push(match centralizer_rows(&space, config.truncation) {
            Ok(rows) => centralizer_suite(&rows),
            Err(e) => SuiteResult::failed("centralizer_dimensions", "", e.to_string()),
        });
    Ok(report)
}

pub fn cmd_moments(config: &RunConfig, n_max: usize) -> Result<Report, CliError> {
    let space = build(config)?;
    let mut report = Report::new("moments", config);
    let rows = moment_rows(&space, n_max, config.tolerances.identity_tol)?;
    report
        .suites
        .push(moment_suite(&rows, config.tolerances.identity_tol));
    report.moments = Some(rows);
    Ok(report)
}

pub fn cmd_centralizer(config: &RunConfig, deg_max: usize) -> Result<Report, CliError> {
    let space = build(config)?;
    if deg_max > config.truncation {
        return Err(CliError::Config(format!(
            "max degree {deg_max} exceeds truncation {}",
            config.truncation
        )));
    }
    let mut report = Report::new("centralizer", config);
    let rows = centralizer_rows(&space, deg_max)?;
    report.suites.push(centralizer_suite(&rows));
    report.centralizer = Some(rows);
    Ok(report)
}

pub fn cmd_classify(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let mut report = Report::new("classify", config);
    let opts = ClassifyOptions {
        class_tol: config.tolerances.class_tol,
        ..ClassifyOptions::default()
    };
    report.verdict = Some(classify_type(&config.spec, &opts));
    Ok(report)
}

/// Comma-separated letter indices, e.g. `1` or `1,2,2`.
pub fn parse_word(text: &str) -> Result<Word, CliError> {
    let letters = text
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|e| CliError::Config(format!("bad letter '{s}' in word '{text}': {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Word(letters))
}

pub fn cmd_mixing(config: &RunConfig, xi0: usize, x: &Word, y: &Word) -> Result<Report, CliError> {
    let space = build(config)?;
    let mut report = Report::new("mixing", config);
    conditioning(&space, &mut report);
    space.basis.check_word(x)?;
    space.basis.check_word(y)?;
    let one = C64::new(1.0, 0.0);
    let x_op = word_operator(&space, &FockVector::from_word(x.clone(), one))?;
    let y_op = word_operator(&space, &FockVector::from_word(y.clone(), one))?;
    let masa = masa_context(&space, xi0)?;
    let available = masa.max_valid_n(&x_op, &y_op);
    if available < 0 {
        return Err(CliError::Config(format!(
            "words of degree {} and {} leave no valid degrees at truncation {}",
            x.degree(),
            y.degree(),
            config.truncation
        )));
    }
    let max_n = available as usize;
    let t = masa.t_operator_matrix(&x_op, &y_op, max_n)?;
    let diag = qfock::mixing::HsDiagnostics::from_t_matrix(&t);
    let tol = config.tolerances.identity_tol;
    let (name, anchor) = ("t_matrix_routes", "x H_n(s_q(ξ_0)) yΩ = x d_y ξ_0^{⊗n}");
    report.suites.push(guarded(name, anchor, || {
        let other = masa.t_operator_matrix_commutant(&x_op, &y_op, max_n)?;
        let residual = max_abs((&t - other).iter());
        Ok(SuiteResult::residual(
            name,
            anchor,
            residual,
            tol,
            format!("n ≤ {max_n}"),
        ))
    }));
    let decay = masa.strong_mixing_decay(&x_op, &y_op, max_n, tol).ok();
    let mut intersections = Vec::new();
    for other in space.ctx.fixed_letters() {
        if other != xi0 {
            intersections.push((
                space.ctx.eigen_basis[other].name(),
                masa_intersection_dim(&space, xi0, other, MASA_TOL)?,
            ));
        }
    }
    if !intersections.is_empty() {
        let ok = intersections.iter().all(|(_, k)| *k == 1);
        report.suites.push(SuiteResult::exact(
            "masa_intersection",
            "spans of ξ_0^{⊗n} and ξ^{⊗n} meet only in CΩ",
            ok,
            format!("{} other fixed letters", intersections.len()),
        ));
    }
    report.mixing = Some(MixingSection {
        xi0: space.ctx.eigen_basis[xi0].name(),
        x: word_name(&space, x),
        y: word_name(&space, y),
        max_n,
        t_diagonal: (0..=max_n.min(t.nrows() - 1))
            .map(|n| t[(n, n)].re)
            .collect(),
        hs_terms: diag.terms,
        hs_partial_sums: diag.partial_sums,
        ratio: diag.ratio,
        decay,
        intersections,
    });
    Ok(report)
}
