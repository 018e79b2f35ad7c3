//! q-Hermite polynomials, moments through pair partitions, centralizer words
//! and the type of the algebra read off from the rotation parameters.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{q_bracket, FockBasis, FockSpace, Word};
use crate::hilbert::{RepresentationSpec, SpaceContext};
use crate::ops::{field_left, FockOperator};
use crate::C64;

/// Largest `m` for which pair partitions of `{1..2m}` are enumerated.
pub const PARTITION_LIMIT: usize = 8;
/// Default tolerance on `|Σ log β|` for centralizer words.
pub const CENTRALIZER_TOL: f64 = 1e-9;

/// `H_n^q(x)` by `H_0 = 1`, `H_1 = x`, `H_{k+1} = x H_k - [k]_q H_{k-1}`.
pub fn q_hermite_eval(q: f64, n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - q_bracket(q, k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n^q(X)` for an operator `X`, by the same recurrence.
pub fn q_hermite_operator(q: f64, n: usize, op: &FockOperator) -> Result<FockOperator> {
    let mut prev = FockOperator::identity(op.basis());
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = op.clone();
    for k in 1..n {
        let next = op
            .compose(&cur)?
            .add_scaled(&prev, C64::new(-q_bracket(q, k), 0.0))?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Pair partition of `{1, …, 2m}` as pairs `(π(r), κ(r))` with `π(r) < κ(r)`,
/// listed by increasing opener.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPartition {
    pub pairs: Vec<(usize, usize)>,
}

impl PairPartition {
    /// `#{(r, s) : π(r) < π(s) < κ(r) < κ(s)}`.
    pub fn crossing_number(&self) -> usize {
        let mut count = 0;
        for &(a, b) in &self.pairs {
            for &(c, d) in &self.pairs {
                if a < c && c < b && b < d {
                    count += 1;
                }
            }
        }
        count
    }
}

pub fn enumerate_pair_partitions(m: usize) -> Result<Vec<PairPartition>> {
    if m > PARTITION_LIMIT {
        return Err(Error::PartitionLimit {
            m,
            limit: PARTITION_LIMIT,
        });
    }
    let mut out = Vec::new();
    let mut free: Vec<usize> = (1..=2 * m).collect();
    let mut pairs = Vec::with_capacity(m);
    pair_up(&mut free, &mut pairs, &mut out);
    Ok(out)
}

fn pair_up(free: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, out: &mut Vec<PairPartition>) {
    if free.is_empty() {
        out.push(PairPartition {
            pairs: pairs.clone(),
        });
        return;
    }
    let first = free.remove(0);
    for i in 0..free.len() {
        let partner = free.remove(i);
        pairs.push((first, partner));
        pair_up(free, pairs, out);
        pairs.pop();
        free.insert(i, partner);
    }
    free.insert(0, first);
}

/// Coefficients `c_k` of `Σ_V q^{c(V)} = Σ_k c_k q^k` for the `n`-th moment
/// (empty for odd `n`).
pub fn moment_polynomial(n: usize) -> Result<Vec<u64>> {
    if n % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut coeffs: Vec<u64> = Vec::new();
    for v in enumerate_pair_partitions(n / 2)? {
        let c = v.crossing_number();
        if coeffs.len() <= c {
            coeffs.resize(c + 1, 0);
        }
        coeffs[c] += 1;
    }
    Ok(coeffs)
}

/// `φ(s_q(ξ)^n)` for a unit `ξ` from the crossing statistics.
pub fn moment_combinatorial(q: f64, n: usize) -> Result<f64> {
    let coeffs = moment_polynomial(n)?;
    Ok(coeffs.iter().rev().fold(0.0, |acc, &c| acc * q + c as f64))
}

/// `<Ω, s_q(ξ)^n Ω>_q` from the truncated operator (`ξ` real, `‖ξ‖_U = 1`).
pub fn moment_operator(space: &FockSpace, xi: &DVector<C64>, n: usize, tol: f64) -> Result<f64> {
    let norm = space.ctx.norm_u(xi)?;
    if (norm - 1.0).abs() > tol {
        return Err(Error::NotUnitVector { norm });
    }
    let d = space.truncation();
    if n > 2 * d.saturating_sub(1) {
        return Err(Error::InsufficientDegrees {
            requested: n,
            available: 2 * d.saturating_sub(1),
        });
    }
    let s = field_left(space, xi, tol)?;
    let mut v = space.vacuum_dense();
    for _ in 0..n {
        v = s.apply(&v)?;
    }
    // G_0 = 1 and distinct degrees are orthogonal
    Ok(v[0].re)
}

/// Words of degree `≤ max_degree` with `|Σ_j log β_{i_j}| ≤ tol`, vacuum
/// included, in basis order.
pub fn centralizer_words(ctx: &SpaceContext, max_degree: usize, tol: f64) -> Vec<Word> {
    let logs: Vec<f64> = ctx.betas().iter().map(|b| b.ln()).collect();
    let mut out = Vec::new();
    for n in 0..=max_degree {
        let mut letters = Vec::with_capacity(n);
        collect_balanced(&logs, n, 0.0, tol, &mut letters, &mut out);
    }
    out
}

fn collect_balanced(
    logs: &[f64],
    n: usize,
    sum: f64,
    tol: f64,
    letters: &mut Vec<usize>,
    out: &mut Vec<Word>,
) {
    if letters.len() == n {
        if sum.abs() <= tol {
            out.push(Word(letters.clone()));
        }
        return;
    }
    for (l, &x) in logs.iter().enumerate() {
        letters.push(l);
        collect_balanced(logs, n, sum + x, tol, letters, out);
        letters.pop();
    }
}

/// Dimension of the `𝓕(U_t)`-invariant part of degree `n`, counted from the
/// products `Π β` of the `Δ`-spectrum (no matrices formed).
pub fn fixed_subspace_dimension(
    ctx: &SpaceContext,
    basis: &FockBasis,
    n: usize,
    tol: f64,
) -> Result<usize> {
    if n > basis.truncation() {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            max: basis.truncation(),
        });
    }
    let betas = ctx.betas();
    Ok(count_unit_products(&betas, n, 1.0, tol))
}

fn count_unit_products(betas: &[f64], remaining: usize, prod: f64, tol: f64) -> usize {
    if remaining == 0 {
        return usize::from(prod.ln().abs() <= tol);
    }
    betas
        .iter()
        .map(|&b| count_unit_products(betas, remaining - 1, prod * b, tol))
        .sum()
}

/// Type of the algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "lambda")]
pub enum TypeLabel {
    #[serde(rename = "II_1")]
    II1,
    /// `III_λ` with `0 < λ < 1` generating the group.
    #[serde(rename = "III_lambda")]
    IIILambda(f64),
    #[serde(rename = "III_1")]
    III1,
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeLabel::II1 => write!(f, "II_1"),
            TypeLabel::III1 => write!(f, "III_1"),
            TypeLabel::Indeterminate => write!(f, "indeterminate"),
            TypeLabel::IIILambda(lambda) => {
                let inv = 1.0 / lambda;
                let k = inv.round();
                if k >= 2.0 && (inv - k).abs() <= 1e-9 * k {
                    write!(f, "III_{{1/{}}}", k as u64)
                } else {
                    write!(f, "III_{{{lambda}}}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeVerdict {
    pub label: TypeLabel,
    /// `log λ_k` of the rotation parameters.
    pub group_generators: Vec<f64>,
    pub rationale: String,
    /// Set when the structural hypotheses (a fixed vector, `dim H_R ≥ 2`)
    /// do not hold.
    pub caveat: Option<String>,
}

/// Knobs of the integer-relation search on `log λ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// A convergent `a/b` of `α` is a relation when
    /// `|b α - a| ≤ class_tol · max(1, |α|)`.
    pub class_tol: f64,
    /// Relations up to this height are accepted.
    pub trusted_height: u64,
    /// Convergents are examined up to this height; a relation found above
    /// `trusted_height` leaves the verdict indeterminate.
    pub search_height: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            class_tol: 1e-9,
            trusted_height: 1_000,
            search_height: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Relation {
    /// `α ≈ a/b` in lowest terms.
    Found {
        a: i64,
        b: i64,
    },
    Suspicious {
        a: i64,
        b: i64,
    },
    None,
}

/// Smallest continued-fraction convergent of `α` satisfying the relation test.
fn find_relation(alpha: f64, opts: &ClassifyOptions) -> Relation {
    let scale = alpha.abs().max(1.0);
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, alpha.floor() as i64, 1i64);
    let mut x = alpha - alpha.floor();
    loop {
        let height = p1.unsigned_abs().max(q1.unsigned_abs());
        if height > opts.search_height {
            return Relation::None;
        }
        let residual = (q1 as f64 * alpha - p1 as f64).abs();
        if residual <= opts.class_tol * scale {
            return if height <= opts.trusted_height {
                Relation::Found { a: p1, b: q1 }
            } else {
                Relation::Suspicious { a: p1, b: q1 }
            };
        }
        if x <= 0.0 {
            // exact termination without meeting the tolerance cannot happen
            // for a finite residual, but guard the division anyway
            return Relation::None;
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        x = inv - a;
        let a = a as i64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
}

/// Classifies from the closed subgroup of `R_+^*` generated by the `λ_k`.
pub fn classify_type(spec: &RepresentationSpec, opts: &ClassifyOptions) -> TypeVerdict {
    let logs: Vec<f64> = spec.rotation_lambdas.iter().map(|l| l.ln()).collect();
    let caveat = if spec.n_fixed == 0 || spec.dim_real() < 2 {
        Some(format!(
            "hypotheses not met: n_fixed = {}, dim = {} (a fixed vector and dimension at least 2 are assumed)",
            spec.n_fixed,
            spec.dim_real()
        ))
    } else {
        None
    };
    if logs.is_empty() {
        return TypeVerdict {
            label: TypeLabel::II1,
            group_generators: logs,
            rationale: "no rotation blocks: the spectrum of A is {1} and G is trivial".into(),
            caveat,
        };
    }

    let mut g = logs[0];
    let mut notes = Vec::new();
    let mut independent = false;
    let mut suspicious = false;
    for (k, &x) in logs.iter().enumerate().skip(1) {
        let alpha = x / g;
        match find_relation(alpha, opts) {
            Relation::Found { a, b } => {
                notes.push(format!("log λ_{k} = ({a}/{b}) · {g:.17e}"));
                g /= b as f64;
            }
            Relation::Suspicious { a, b } => {
                notes.push(format!(
                    "log λ_{k} / {g:.17e} ≈ {a}/{b}, height above the trusted bound {}",
                    opts.trusted_height
                ));
                suspicious = true;
            }
            Relation::None => {
                notes.push(format!(
                    "no relation for log λ_{k} / {g:.17e} up to height {}",
                    opts.search_height
                ));
                independent = true;
            }
        }
    }

    let label = if independent {
        TypeLabel::III1
    } else if suspicious {
        TypeLabel::Indeterminate
    } else {
        TypeLabel::IIILambda((-g).exp())
    };
    let summary = match &label {
        TypeLabel::III1 => "two rationally independent logarithms: G is dense".to_string(),
        TypeLabel::Indeterminate => {
            "a relation exists only at untrusted height; density is not decided".to_string()
        }
        TypeLabel::IIILambda(l) => format!("G is generated by {l}"),
        TypeLabel::II1 => unreachable!("handled above"),
    };
    notes.insert(0, summary);
    TypeVerdict {
        label,
        group_generators: logs,
        rationale: notes.join("; "),
        caveat,
    }
}
