//! Truncated q-Fock space over the eigenbasis `S`.
//!
//! Words are sequences of eigenbasis labels; the basis of degree `n` is
//! ordered lexicographically (first letter most significant) and degrees are
//! stacked from the vacuum upwards. Because `S` is `U`-orthonormal, the
//! degree-`n` Gram matrix only couples words that are rearrangements of one
//! another, so it is stored as one real symmetric block per multiset.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::SpaceContext;
use crate::C64;

/// Default threshold above which a Gram block is reported as ill-conditioned.
pub const DEFAULT_COND_WARN: f64 = 1e8;
/// Default largest degree accepted by the permutation-sum oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 8;

pub fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::QOutOfRange(q))
    }
}

/// `[n]_q = 1 + q + ... + q^{n-1}`.
pub fn q_bracket(q: f64, n: usize) -> f64 {
    let mut acc = 0.0;
    let mut p = 1.0;
    for _ in 0..n {
        acc += p;
        p *= q;
    }
    acc
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`.
pub fn q_factorial(q: f64, n: usize) -> f64 {
    (1..=n).map(|j| q_bracket(q, j)).product()
}

/// `C_q = Π_{i≥1} 1/(1-|q|^i)`, truncated once `|q|^i < eps`.
pub fn c_q_constant(q: f64, eps: f64) -> Result<f64> {
    check_q(q)?;
    let a = q.abs();
    let mut prod = 1.0;
    let mut p = a;
    while p >= eps && p > 0.0 {
        prod /= 1.0 - p;
        p *= a;
    }
    Ok(prod)
}

/// A tensor word `ζ_{i_1} ⊗ ... ⊗ ζ_{i_n}`; the empty word is the vacuum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn vacuum() -> Self {
        Word(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The word with the letter at position `i` removed.
    pub fn without(&self, i: usize) -> Word {
        let mut v = self.0.clone();
        v.remove(i);
        Word(v)
    }

    pub fn power(letter: usize, n: usize) -> Word {
        Word(vec![letter; n])
    }

    fn multiset(&self) -> Vec<usize> {
        let mut m = self.0.clone();
        m.sort_unstable();
        m
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "Ω");
        }
        let parts: Vec<String> = self.0.iter().map(|l| format!("ζ{l}")).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// Enumeration of all words of degree `0..=d` over an alphabet of size `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    alphabet: usize,
    truncation: usize,
    offsets: Vec<usize>,
}

impl FockBasis {
    pub fn new(alphabet: usize, truncation: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::EmptySpace);
        }
        let mut offsets = Vec::with_capacity(truncation + 2);
        let mut acc = 0usize;
        let mut block = 1usize;
        for _ in 0..=truncation {
            offsets.push(acc);
            acc = acc.checked_add(block).ok_or(Error::SpaceTooLarge {
                dim: usize::MAX,
                limit: usize::MAX,
            })?;
            block = block.saturating_mul(alphabet);
        }
        offsets.push(acc);
        Ok(Self {
            alphabet,
            truncation,
            offsets,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.truncation + 1]
    }

    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    /// Number of words of degree `n`, i.e. `r^n`.
    pub fn degree_size(&self, n: usize) -> usize {
        self.offsets[n + 1] - self.offsets[n]
    }

    pub fn degree_range(&self, n: usize) -> std::ops::Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    /// Range of indices of all words of degree `≤ n`.
    pub fn up_to(&self, n: usize) -> std::ops::Range<usize> {
        0..self.offsets[n.min(self.truncation) + 1]
    }

    pub fn degree_of(&self, index: usize) -> usize {
        // offsets is sorted; the degree is the last offset not exceeding index
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        if w.degree() > self.truncation {
            return Err(Error::DegreeOutOfRange {
                degree: w.degree(),
                max: self.truncation,
            });
        }
        if let Some(&letter) = w.0.iter().find(|&&l| l >= self.alphabet) {
            return Err(Error::InvalidLetter {
                letter,
                alphabet: self.alphabet,
            });
        }
        Ok(())
    }

    /// Position of `w` inside its own degree block.
    pub fn local_index(&self, w: &Word) -> usize {
        w.0.iter().fold(0, |acc, &l| acc * self.alphabet + l)
    }

    pub fn index(&self, w: &Word) -> Result<usize> {
        self.check_word(w)?;
        Ok(self.offsets[w.degree()] + self.local_index(w))
    }

    pub fn word_at_local(&self, n: usize, mut local: usize) -> Word {
        let mut letters = vec![0; n];
        for slot in letters.iter_mut().rev() {
            *slot = local % self.alphabet;
            local /= self.alphabet;
        }
        Word(letters)
    }

    pub fn word_at(&self, index: usize) -> Word {
        let n = self.degree_of(index);
        self.word_at_local(n, index - self.offsets[n])
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.dim()).map(move |i| self.word_at(i))
    }

    pub fn words_of_degree(&self, n: usize) -> impl Iterator<Item = Word> + '_ {
        (0..self.degree_size(n)).map(move |i| self.word_at_local(n, i))
    }
}

/// Finitely supported vector in the q-Fock space, in word coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FockVector {
    pub coeffs: BTreeMap<Word, C64>,
}

impl FockVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum() -> Self {
        Self::from_word(Word::vacuum(), C64::new(1.0, 0.0))
    }

    pub fn from_word(w: Word, c: C64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(w, c);
        Self { coeffs }
    }

    /// `x_1 ⊗ ... ⊗ x_n` for one-particle vectors given in f-coordinates.
    pub fn tensor(ctx: &SpaceContext, factors: &[DVector<C64>]) -> Result<Self> {
        let mut out = Self::vacuum();
        for x in factors {
            let c = ctx.to_eigen_coords(x)?;
            let mut next = BTreeMap::new();
            for (w, &a) in &out.coeffs {
                for (l, &cl) in c.iter().enumerate() {
                    if cl != C64::new(0.0, 0.0) {
                        let mut letters = w.0.clone();
                        letters.push(l);
                        next.insert(Word(letters), a * cl);
                    }
                }
            }
            out.coeffs = next;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, w: Word, c: C64) {
        *self.coeffs.entry(w).or_insert(C64::new(0.0, 0.0)) += c;
    }

    pub fn add(&mut self, other: &FockVector, scale: C64) {
        for (w, &c) in &other.coeffs {
            self.add_term(w.clone(), c * scale);
        }
    }

    pub fn scaled(&self, s: C64) -> FockVector {
        FockVector {
            coeffs: self
                .coeffs
                .iter()
                .map(|(w, &c)| (w.clone(), c * s))
                .collect(),
        }
    }

    pub fn get(&self, w: &Word) -> C64 {
        self.coeffs.get(w).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Distinct degrees of words carrying a nonzero coefficient.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .coeffs
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(w, _)| w.degree())
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().last().copied().unwrap_or(0)
    }

    pub fn to_dense(&self, basis: &FockBasis) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(basis.dim());
        for (w, &c) in &self.coeffs {
            v[basis.index(w)?] += c;
        }
        Ok(v)
    }

    /// Sparse view of a dense coefficient vector (exact zeros dropped).
    pub fn from_dense(basis: &FockBasis, v: &DVector<C64>) -> Self {
        let coeffs = v
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != C64::new(0.0, 0.0))
            .map(|(i, &c)| (basis.word_at(i), c))
            .collect();
        Self { coeffs }
    }
}

#[derive(Debug, Clone)]
struct GramBlock {
    /// Indices (within the degree) of the words sharing this multiset.
    members: Vec<usize>,
    matrix: DMatrix<f64>,
}

#[derive(Debug, Clone)]
struct DegreeGram {
    blocks: Vec<GramBlock>,
    /// For each word of the degree: (block, position inside the block).
    slot: Vec<(usize, usize)>,
    min_eig: f64,
    max_eig: f64,
}

/// Degree-wise q-Gram matrices `G_n` of the truncated basis.
#[derive(Debug, Clone)]
pub struct GramCache {
    q: f64,
    basis: FockBasis,
    degrees: Vec<DegreeGram>,
    warnings: Vec<String>,
}

impl GramCache {
    pub fn build(basis: &FockBasis, q: f64) -> Result<Self> {
        Self::build_with_threshold(basis, q, DEFAULT_COND_WARN)
    }

    /// Builds every `G_n`, `n ≤ d`, by peeling off the first letter:
    /// `G_n(w, w') = Σ_{j : w'_j = w_1} q^{j-1} G_{n-1}(w_2..w_n, w' without j)`.
    pub fn build_with_threshold(basis: &FockBasis, q: f64, cond_warn: f64) -> Result<Self> {
        check_q(q)?;
        let mut degrees: Vec<DegreeGram> = Vec::with_capacity(basis.truncation() + 1);
        let mut warnings = Vec::new();
        let mut qpow = vec![1.0; basis.truncation() + 1];
        for j in 1..qpow.len() {
            qpow[j] = qpow[j - 1] * q;
        }

        for n in 0..=basis.truncation() {
            let size = basis.degree_size(n);
            let mut by_multiset: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            let mut blocks: Vec<GramBlock> = Vec::new();
            let mut slot = Vec::with_capacity(size);
            for local in 0..size {
                let key = basis.word_at_local(n, local).multiset();
                let b = *by_multiset.entry(key).or_insert_with(|| {
                    blocks.push(GramBlock {
                        members: Vec::new(),
                        matrix: DMatrix::zeros(0, 0),
                    });
                    blocks.len() - 1
                });
                slot.push((b, blocks[b].members.len()));
                blocks[b].members.push(local);
            }

            for block in blocks.iter_mut() {
                let m = block.members.len();
                let words: Vec<Word> = block
                    .members
                    .iter()
                    .map(|&i| basis.word_at_local(n, i))
                    .collect();
                let mut mat = DMatrix::<f64>::zeros(m, m);
                if n == 0 {
                    mat[(0, 0)] = 1.0;
                } else {
                    let prev = &degrees[n - 1];
                    for a in 0..m {
                        let tail = Word(words[a].0[1..].to_vec());
                        let tail_local = basis.local_index(&tail);
                        let (tb, tpos) = prev.slot[tail_local];
                        for b in 0..m {
                            let mut acc = 0.0;
                            for (j, &letter) in words[b].0.iter().enumerate() {
                                if letter == words[a].0[0] {
                                    let rest = basis.local_index(&words[b].without(j));
                                    let (rb, rpos) = prev.slot[rest];
                                    debug_assert_eq!(rb, tb);
                                    acc += qpow[j] * prev.blocks[rb].matrix[(tpos, rpos)];
                                }
                            }
                            mat[(a, b)] = acc;
                        }
                    }
                }
                block.matrix = mat;
            }

            let mut min_eig = f64::INFINITY;
            let mut max_eig: f64 = 0.0;
            for block in &blocks {
                let eig = block.matrix.clone().symmetric_eigenvalues();
                for &e in eig.iter() {
                    min_eig = min_eig.min(e);
                    max_eig = max_eig.max(e);
                }
            }
            let cond = max_eig / min_eig;
            if min_eig <= 0.0 || cond.is_nan() || cond > cond_warn {
                let msg = format!(
                    "Gram matrix of degree {n} is ill-conditioned at q = {q}: cond = {cond:.3e}"
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
            degrees.push(DegreeGram {
                blocks,
                slot,
                min_eig,
                max_eig,
            });
        }
        Ok(Self {
            q,
            basis: basis.clone(),
            degrees,
            warnings,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn min_eigenvalue(&self, n: usize) -> f64 {
        self.degrees[n].min_eig
    }

    pub fn max_eigenvalue(&self, n: usize) -> f64 {
        self.degrees[n].max_eig
    }

    pub fn condition_number(&self, n: usize) -> f64 {
        self.degrees[n].max_eig / self.degrees[n].min_eig
    }

    /// `⟨w, w'⟩_q` for two basis words.
    pub fn entry(&self, w: &Word, w2: &Word) -> f64 {
        if w.degree() != w2.degree() {
            return 0.0;
        }
        let g = &self.degrees[w.degree()];
        let (b1, p1) = g.slot[self.basis.local_index(w)];
        let (b2, p2) = g.slot[self.basis.local_index(w2)];
        if b1 != b2 {
            return 0.0;
        }
        g.blocks[b1].matrix[(p1, p2)]
    }

    /// Dense `G_n` on the words of degree `n`.
    pub fn degree_matrix(&self, n: usize) -> DMatrix<f64> {
        let size = self.basis.degree_size(n);
        let mut out = DMatrix::zeros(size, size);
        for block in &self.degrees[n].blocks {
            for (a, &i) in block.members.iter().enumerate() {
                for (b, &j) in block.members.iter().enumerate() {
                    out[(i, j)] = block.matrix[(a, b)];
                }
            }
        }
        out
    }

    /// Dense Gram matrix of the whole truncated space.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let dim = self.basis.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for (n, g) in self.degrees.iter().enumerate() {
            let off = self.basis.offset(n);
            for block in &g.blocks {
                for (a, &i) in block.members.iter().enumerate() {
                    for (b, &j) in block.members.iter().enumerate() {
                        out[(off + i, off + j)] = block.matrix[(a, b)];
                    }
                }
            }
        }
        out
    }

    /// `G v` for a dense coefficient vector over the whole basis.
    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: v.len(),
            });
        }
        let mut out = DVector::zeros(v.len());
        for (n, g) in self.degrees.iter().enumerate() {
            let off = self.basis.offset(n);
            for block in &g.blocks {
                for (a, &i) in block.members.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (b, &j) in block.members.iter().enumerate() {
                        acc += v[off + j] * block.matrix[(a, b)];
                    }
                    out[off + i] = acc;
                }
            }
        }
        Ok(out)
    }

    /// `⟨x, y⟩_q = x^H G y` for dense coefficient vectors.
    pub fn inner_dense(&self, x: &DVector<C64>, y: &DVector<C64>) -> Result<C64> {
        if x.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: x.len(),
            });
        }
        Ok(x.dotc(&self.apply(y)?))
    }

    pub fn norm_dense(&self, x: &DVector<C64>) -> Result<f64> {
        Ok(self.inner_dense(x, x)?.re.max(0.0).sqrt())
    }

    /// `⟨f, g⟩_q` for sparse vectors.
    pub fn inner(&self, f: &FockVector, g: &FockVector) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (w, &a) in &f.coeffs {
            self.basis.check_word(w)?;
            for (w2, &b) in &g.coeffs {
                self.basis.check_word(w2)?;
                let e = self.entry(w, w2);
                if e != 0.0 {
                    acc += a.conj() * b * e;
                }
            }
        }
        Ok(acc)
    }

    pub fn norm(&self, f: &FockVector) -> Result<f64> {
        Ok(self.inner(f, f)?.re.max(0.0).sqrt())
    }
}

/// `G_n` assembled by the word-matching recursion (real entries).
pub fn q_gram(ctx: &SpaceContext, q: f64, n: usize) -> Result<DMatrix<f64>> {
    let basis = FockBasis::new(ctx.alphabet(), n)?;
    Ok(GramCache::build(&basis, q)?.degree_matrix(n))
}

/// `G_n` by summing `q^{inv(π)} Π_l ⟨ζ_{w_l}, ζ_{w'_{π(l)}}⟩_U` over all of `S_n`,
/// using numerically evaluated `U`-inner products of the eigenbasis.
pub fn q_gram_bruteforce(
    ctx: &SpaceContext,
    q: f64,
    n: usize,
    oracle_limit: usize,
) -> Result<DMatrix<C64>> {
    check_q(q)?;
    if n > oracle_limit {
        return Err(Error::OracleLimit {
            n,
            limit: oracle_limit,
        });
    }
    let letters = ctx.eigen_gram();
    let basis = FockBasis::new(ctx.alphabet(), n)?;
    let words: Vec<Word> = basis.words_of_degree(n).collect();
    let size = words.len();
    let mut out = DMatrix::zeros(size, size);
    let mut used = vec![false; n];
    for (a, w) in words.iter().enumerate() {
        for (b, w2) in words.iter().enumerate() {
            out[(a, b)] = permutation_sum(
                &letters,
                q,
                &w.0,
                &w2.0,
                0,
                &mut used,
                C64::new(1.0, 0.0),
                0,
            );
        }
    }
    Ok(out)
}

// Depth-first sum over permutations; assigning π(l) = j adds one inversion
// for every earlier position already mapped above j. Subtrees whose partial
// product is exactly zero contribute nothing and are skipped.
#[allow(clippy::too_many_arguments)]
fn permutation_sum(
    letters: &DMatrix<C64>,
    q: f64,
    w: &[usize],
    w2: &[usize],
    l: usize,
    used: &mut [bool],
    prod: C64,
    inversions: i32,
) -> C64 {
    if l == w.len() {
        return prod * q.powi(inversions);
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..w2.len() {
        if used[j] {
            continue;
        }
        let pairing = letters[(w[l], w2[j])];
        if pairing == C64::new(0.0, 0.0) {
            continue;
        }
        let above = used[j + 1..].iter().filter(|&&u| u).count() as i32;
        used[j] = true;
        acc += permutation_sum(
            letters,
            q,
            w,
            w2,
            l + 1,
            used,
            prod * pairing,
            inversions + above,
        );
        used[j] = false;
    }
    acc
}

/// One-particle space, truncated word basis and Gram data for a fixed `q`.
#[derive(Debug, Clone)]
pub struct FockSpace {
    pub ctx: SpaceContext,
    pub basis: FockBasis,
    pub gram: GramCache,
}

impl FockSpace {
    pub fn new(ctx: SpaceContext, q: f64, truncation: usize) -> Result<Self> {
        check_q(q)?;
        let basis = FockBasis::new(ctx.alphabet(), truncation)?;
        let gram = GramCache::build(&basis, q)?;
        Ok(Self { ctx, basis, gram })
    }

    pub fn q(&self) -> f64 {
        self.gram.q()
    }

    pub fn truncation(&self) -> usize {
        self.basis.truncation()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn inner_q(&self, f: &FockVector, g: &FockVector) -> Result<C64> {
        self.gram.inner(f, g)
    }

    pub fn vacuum_dense(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn word_dense(&self, w: &Word) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(self.dim());
        v[self.basis.index(w)?] = C64::new(1.0, 0.0);
        Ok(v)
    }
}
