//! Torsion certificates from operator words.
//!
//! An operator word over S_n is a list of items (w_i, a_i, b_i), innermost
//! first, encoding C = d_{w_m}(x_1^{a_m} x_n^{b_m} ... d_{w_1}(x_1^{a_1}
//! x_n^{b_1}) ...) with Sum l(w_i) = a + b. This module embeds the word into
//! S_N, N = a + n + b, as a reduced expression w-bar whose 1x1 intersection
//! form at w_I (I omitting the two letters a and a+n) equals +-C, and
//! evaluates that form two independent ways:
//!
//!   * evaluate_structured: acts on 1 in Z[x_1..x_N] through the shifted
//!     items with the (-x_{a+1}) sign device, giving (-1)^a C directly;
//!   * evaluate_nilhecke: multiplies out the literal product E of nil Hecke
//!     atoms (D blocks and alpha multiplications) and reads off the
//!     coefficient of D_{w_I}.
//!
//! Their mandatory agreement, plus the subexpression machinery (the unique
//! defect-zero subexpression of w-bar evaluating to w_I), is the integrity
//! basis for every certificate this crate emits.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::nilhecke::NilHeckeElement;
use crate::poly::{operator_word_value, IntPolynomial, WordValueError};
use crate::sym::{
    coset_decompose, is_min_coset_rep, is_reduced, longest_element, Permutation, Word,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("invalid operator data: {0}")]
    InvalidData(String),
    #[error("degree condition violated: sum of lengths {sum_len} != a + b = {degree}")]
    DegreeCondition { sum_len: u32, degree: u32 },
    #[error("operator word value is zero; no certificate exists")]
    Vanishes,
    #[error("operator data is not normalized")]
    NotNormalized,
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("rank {rank} exceeds the nil Hecke evaluation cap {cap}")]
    ResourceCap { rank: usize, cap: usize },
}

/// One step of the operator word: multiply by x_1^a x_n^b, then apply d_w.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorItem {
    pub w: Permutation,
    pub a: u32,
    pub b: u32,
}

/// The items of an operator word over S_n, innermost first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OperatorDataRepr", into = "OperatorDataRepr")]
pub struct OperatorData {
    pub n: usize,
    pub items: Vec<OperatorItem>,
}

#[derive(Serialize, Deserialize)]
struct OperatorDataRepr {
    n: usize,
    items: Vec<OperatorItem>,
}

impl From<OperatorData> for OperatorDataRepr {
    fn from(d: OperatorData) -> Self {
        OperatorDataRepr { n: d.n, items: d.items }
    }
}

impl TryFrom<OperatorDataRepr> for OperatorData {
    type Error = String;

    fn try_from(r: OperatorDataRepr) -> Result<Self, String> {
        let d = OperatorData { n: r.n, items: r.items };
        d.check_structure().map_err(|e| e.to_string())?;
        Ok(d)
    }
}

impl OperatorData {
    pub fn new(n: usize, items: Vec<OperatorItem>) -> Result<Self, ConstructError> {
        let d = OperatorData { n, items };
        d.check_structure()?;
        Ok(d)
    }

    fn check_structure(&self) -> Result<(), ConstructError> {
        if self.n < 2 {
            return Err(ConstructError::InvalidData("inner rank must be at least 2".into()));
        }
        for it in &self.items {
            if it.w.rank() != self.n {
                return Err(ConstructError::InvalidData(format!(
                    "item permutation has rank {}, expected {}",
                    it.w.rank(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Structure plus the degree condition Sum l(w_i) = a + b.
    pub fn validate(&self) -> Result<(), ConstructError> {
        self.check_structure()?;
        let sum_len: u32 = self.items.iter().map(|it| it.w.length()).sum();
        let degree = self.a_total() + self.b_total();
        if sum_len != degree {
            return Err(ConstructError::DegreeCondition { sum_len, degree });
        }
        Ok(())
    }

    pub fn a_total(&self) -> u32 {
        self.items.iter().map(|it| it.a).sum()
    }

    pub fn b_total(&self) -> u32 {
        self.items.iter().map(|it| it.b).sum()
    }

    /// N = a + n + b.
    pub fn ambient_rank(&self) -> usize {
        self.n + self.a_total() as usize + self.b_total() as usize
    }

    /// Generators of W_{M'}: the middle block minus its extreme letters.
    pub fn inner_coset_gens(&self) -> Vec<u32> {
        if self.n < 4 {
            return Vec::new();
        }
        (2..=(self.n as u32 - 2)).collect()
    }

    /// Generators of the embedded middle block M = {a+1, .., a+n-1}.
    pub fn m_gens(&self) -> Vec<u32> {
        let a = self.a_total();
        (a + 1..a + self.n as u32).collect()
    }

    /// Generators of I = {1..N-1} minus {a, a+n}.
    pub fn i_gens(&self) -> Vec<u32> {
        let a = self.a_total();
        let n = self.n as u32;
        (1..self.ambient_rank() as u32).filter(|&l| l != a && l != a + n).collect()
    }

    /// w_I, the longest element of W_I inside S_N.
    pub fn w_sub_i(&self) -> Permutation {
        longest_element(&self.i_gens(), self.ambient_rank())
    }

    pub fn item_tuples(&self) -> Vec<(Permutation, u32, u32)> {
        self.items.iter().map(|it| (it.w.clone(), it.a, it.b)).collect()
    }

    pub fn is_normalized(&self) -> bool {
        let gens = self.inner_coset_gens();
        self.items.iter().all(|it| is_min_coset_rep(&it.w, &gens))
    }
}

/// The integer C computed straight from the defining operator word.
pub fn operator_value(data: &OperatorData) -> Result<BigInt, ConstructError> {
    data.check_structure()?;
    operator_word_value(data.n, &data.item_tuples()).map_err(|e| match e {
        WordValueError::DegreeCondition { sum_len, a, b } => {
            ConstructError::DegreeCondition { sum_len, degree: a + b }
        }
        WordValueError::NonConstant => {
            ConstructError::Integrity("operator word value is not constant".into())
        }
    })
}

/// Makes every w_i minimal in its coset w_i W_{M'} by migrating coset tails
/// inward (d of a W_{M'} element commutes with both multiplications, so C is
/// unchanged), or detects that C = 0 on the way. With `split`, items with
/// a_i, b_i both positive are split per-variable afterwards; the inserted
/// identity item leaves the operator composite literally unchanged.
pub fn normalize(data: &OperatorData, split: bool) -> Result<OperatorData, ConstructError> {
    data.validate()?;
    let gens = data.inner_coset_gens();
    let mut items = data.items.clone();
    for i in (1..items.len()).rev() {
        let (rep, tail) = coset_decompose(&items[i].w, &gens);
        if tail.is_identity() {
            continue;
        }
        items[i].w = rep;
        let merged = tail.compose(&items[i - 1].w);
        if merged.length() != tail.length() + items[i - 1].w.length() {
            // d_tail d_{w_{i-1}} = 0, so the whole word vanishes
            return Err(ConstructError::Vanishes);
        }
        items[i - 1].w = merged;
    }
    if let Some(first) = items.first() {
        if !is_min_coset_rep(&first.w, &gens) {
            // the residual tail hits the W_{M'}-invariant seed monomial
            return Err(ConstructError::Vanishes);
        }
    }
    let mut out = Vec::with_capacity(items.len());
    for it in items {
        if split && it.a > 0 && it.b > 0 {
            out.push(OperatorItem { w: Permutation::identity(data.n), a: 0, b: it.b });
            out.push(OperatorItem { w: it.w, a: it.a, b: 0 });
        } else {
            out.push(it);
        }
    }
    Ok(OperatorData { n: data.n, items: out })
}

/// Builds w-bar = w-bar_m u-bar_m v-bar_m ... w-bar_1 u-bar_1 v-bar_1
/// w-bar_M together with the closed-form defect-zero bit pattern: 1 on
/// w-bar_M, 0 on each w-bar_i, and 0 on the first letter / 1 on the rest
/// within every parenthesized run of u-bar_i and v-bar_i.
fn expression_layout(data: &OperatorData) -> Result<(Word, Vec<bool>), ConstructError> {
    data.validate()?;
    if !data.is_normalized() {
        return Err(ConstructError::NotNormalized);
    }
    let nn = data.ambient_rank();
    let a = data.a_total();
    let n = data.n as u32;
    let mut word: Word = Vec::new();
    let mut bits: Vec<bool> = Vec::new();
    for i in (0..data.items.len()).rev() {
        let item = &data.items[i];
        let a_prev: u32 = data.items[..i].iter().map(|it| it.a).sum();
        let b_prev: u32 = data.items[..i].iter().map(|it| it.b).sum();
        for &l in item.w.staircase_word().iter() {
            word.push(l + a);
            bits.push(false);
        }
        // u-bar_i: a_i parentheses, longest first; the k-th from the right
        // descends from s_a through a_1 + .. + a_{i-1} + k - 1 further letters
        for k in (1..=item.a).rev() {
            word.push(a);
            bits.push(false);
            for t in 1..=(a_prev + k - 1) {
                word.push(a - t);
                bits.push(true);
            }
        }
        // v-bar_i mirrors upward from s_{a+n}
        for k in (1..=item.b).rev() {
            word.push(a + n);
            bits.push(false);
            for t in 1..=(b_prev + k - 1) {
                word.push(a + n + t);
                bits.push(true);
            }
        }
    }
    for &l in longest_element(&data.m_gens(), nn).staircase_word().iter() {
        word.push(l);
        bits.push(true);
    }
    if !is_reduced(&word, nn) {
        return Err(ConstructError::Integrity("constructed expression is not reduced".into()));
    }
    Ok((word, bits))
}

/// The reduced expression w-bar in S_N. Reducedness is asserted, not assumed.
pub fn build_expression(data: &OperatorData) -> Result<Word, ConstructError> {
    expression_layout(data).map(|(word, _)| word)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decoration {
    U,
    D,
}

/// A 0/1 choice along a word, with U/D decorations computed right to left:
/// starting from the identity, each letter is U if it would lengthen the
/// product of the chosen letters to its right, and chosen letters (e = 1)
/// are folded in. The evaluation is the left-to-right product s^{e_1} ...
/// s^{e_l}; the defect counts U0 positions minus D0 positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subexpression {
    pub bits: Vec<bool>,
    pub decorations: Vec<Decoration>,
    pub evaluation: Permutation,
    pub defect: i64,
}

impl Subexpression {
    pub fn analyze(word: &[u32], bits: &[bool], n: usize) -> Self {
        assert_eq!(word.len(), bits.len());
        let mut decorations = vec![Decoration::U; word.len()];
        let mut cur = Permutation::identity(n);
        let mut defect = 0i64;
        for j in (0..word.len()).rev() {
            let lifted = cur.mul_simple_left(word[j]);
            let up = lifted.length() > cur.length();
            decorations[j] = if up { Decoration::U } else { Decoration::D };
            if bits[j] {
                cur = lifted;
            } else {
                defect += if up { 1 } else { -1 };
            }
        }
        Subexpression { bits: bits.to_vec(), decorations, evaluation: cur, defect }
    }
}

/// The closed-form defect-zero subexpression of w-bar; its evaluation equals
/// w_I and its defect is zero, both asserted.
pub fn defect_zero_subexpression(
    data: &OperatorData,
    word: &Word,
) -> Result<Subexpression, ConstructError> {
    let (expected, bits) = expression_layout(data)?;
    if &expected != word {
        return Err(ConstructError::Integrity("word does not match the construction".into()));
    }
    let sub = Subexpression::analyze(word, &bits, data.ambient_rank());
    if sub.evaluation != data.w_sub_i() {
        return Err(ConstructError::Integrity(
            "closed-form subexpression does not evaluate to w_I".into(),
        ));
    }
    if sub.defect != 0 {
        return Err(ConstructError::Integrity("closed-form subexpression has nonzero defect".into()));
    }
    Ok(sub)
}

/// Exhaustive scan over all 2^l bit choices; returns every defect-zero
/// subexpression evaluating to `target`. Test and audit helper.
pub fn defect_zero_subexpressions(word: &Word, target: &Permutation, n: usize) -> Vec<Subexpression> {
    assert!(word.len() <= 26, "exhaustive subexpression scan capped at 26 letters");
    let l = word.len();
    let mut found = Vec::new();
    for mask in 0u64..(1u64 << l) {
        let bits: Vec<bool> = (0..l).map(|j| mask >> j & 1 == 1).collect();
        let sub = Subexpression::analyze(word, &bits, n);
        if sub.defect == 0 && &sub.evaluation == target {
            found.push(sub);
        }
    }
    found
}

/// Rigidity of subexpressions evaluating to w_I: bits must be 0 at every
/// s_a and s_{a+n} letter and 1 at every letter of the A and B blocks.
pub fn satisfies_rigidity(data: &OperatorData, word: &Word, sub: &Subexpression) -> bool {
    let a = data.a_total();
    let n = data.n as u32;
    word.iter().zip(&sub.bits).all(|(&l, &e)| {
        if l == a || l == a + n {
            !e
        } else if l < a || l > a + n {
            e
        } else {
            true
        }
    })
}

/// The (-1)^a C value by the proof's device: act on 1 in Z[x_1..x_N] with
/// the shifted items, multiplying by (-x_{a+1})^{a_i} x_{a+n}^{b_i} before
/// each d_{w-bar_i}. Total on every input satisfying the degree condition.
pub fn evaluate_structured(data: &OperatorData) -> Result<BigInt, ConstructError> {
    data.validate()?;
    let nn = data.ambient_rank();
    let a = data.a_total();
    let n = data.n as u32;
    let mut p = IntPolynomial::one(nn);
    for item in &data.items {
        p = p.mul_var_power(a + 1, item.a).mul_var_power(a + n, item.b);
        if item.a % 2 == 1 {
            p = p.neg();
        }
        p = p.demazure(&item.w.embed_shifted(a, nn));
    }
    p.as_constant()
        .ok_or_else(|| ConstructError::Integrity("structured evaluation is not constant".into()))
}

enum NhAtom {
    D(Permutation),
    Mul(IntPolynomial),
}

/// The literal atom sequence of E = E_m F_m G_m ... E_1 F_1 G_1 E_0, left to
/// right: E_i = D_{w-bar_i}, E_0 = D_{w_M}, and each parenthesis of F_i
/// (resp. G_i) contributes one alpha_a (resp. alpha_{a+n}) multiplication
/// followed by its descending (resp. ascending) run of D's.
fn nilhecke_atoms(data: &OperatorData) -> Vec<NhAtom> {
    let nn = data.ambient_rank();
    let a = data.a_total();
    let n = data.n as u32;
    let alpha = |i: u32| IntPolynomial::variable(i, nn).sub(&IntPolynomial::variable(i + 1, nn));
    let mut atoms = Vec::new();
    for i in (0..data.items.len()).rev() {
        let item = &data.items[i];
        let a_prev: u32 = data.items[..i].iter().map(|it| it.a).sum();
        let b_prev: u32 = data.items[..i].iter().map(|it| it.b).sum();
        atoms.push(NhAtom::D(item.w.embed_shifted(a, nn)));
        for k in (1..=item.a).rev() {
            atoms.push(NhAtom::Mul(alpha(a)));
            for t in 1..=(a_prev + k - 1) {
                atoms.push(NhAtom::D(Permutation::simple(a - t, nn)));
            }
        }
        for k in (1..=item.b).rev() {
            atoms.push(NhAtom::Mul(alpha(a + n)));
            for t in 1..=(b_prev + k - 1) {
                atoms.push(NhAtom::D(Permutation::simple(a + n + t, nn)));
            }
        }
    }
    atoms.push(NhAtom::D(longest_element(&data.m_gens(), nn)));
    atoms
}

pub const NILHECKE_UNPRUNED_CAP: usize = 8;
pub const NILHECKE_PRUNED_CAP: usize = 14;

/// The (-1)^a C value by brute nil Hecke multiplication of E, reading off
/// the coefficient of D_{w_I}. Every D letter of E lies in I, so E is
/// supported on W_I; degree forces E = c D_{w_I}, and the support check
/// verifies exactly that. Ranks above NILHECKE_UNPRUNED_CAP use the
/// length-reachability prune of multiply_pruned; above NILHECKE_PRUNED_CAP
/// the product is refused.
pub fn evaluate_nilhecke(data: &OperatorData) -> Result<BigInt, ConstructError> {
    data.validate()?;
    let nn = data.ambient_rank();
    if nn > NILHECKE_PRUNED_CAP {
        return Err(ConstructError::ResourceCap { rank: nn, cap: NILHECKE_PRUNED_CAP });
    }
    let w_i = data.w_sub_i();
    let target = if nn > NILHECKE_UNPRUNED_CAP { -2 * w_i.length() as i64 } else { i64::MIN };
    let atoms = nilhecke_atoms(data);
    // D-length strictly to the left of each atom: the budget its terms can
    // still gain in length
    let mut budgets = vec![0i64; atoms.len()];
    let mut acc = 0i64;
    for (k, atom) in atoms.iter().enumerate() {
        budgets[k] = acc;
        if let NhAtom::D(x) = atom {
            acc += x.length() as i64;
        }
    }
    let mut s = NilHeckeElement::one(nn);
    for (k, atom) in atoms.iter().enumerate().rev() {
        match atom {
            NhAtom::Mul(f) => s = s.mul_poly_left(f),
            NhAtom::D(x) => {
                s = NilHeckeElement::multiply_pruned(
                    &NilHeckeElement::d_of(x),
                    &s,
                    target,
                    -2 * budgets[k],
                );
            }
        }
    }
    for (x, _) in s.terms() {
        if *x != w_i {
            return Err(ConstructError::Integrity(format!(
                "E has support outside D_w_I, at {:?}",
                x.images()
            )));
        }
    }
    s.coefficient_of(&w_i)
        .as_constant()
        .ok_or_else(|| ConstructError::Integrity("coefficient of D_w_I is not constant".into()))
}

/// A certified torsion instance: the reduced expression, the parabolic
/// longest element, the signed intersection-form value (-1)^a C, and the
/// prime factors of |value|. Every prime listed divides an intersection
/// form entry in SL_N per the accompanying theory; the artifact verifies
/// the integer, not the categorical statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionCertificate {
    pub schema_version: String,
    pub data: OperatorData,
    #[serde(rename = "N")]
    pub ambient_rank: usize,
    pub word: Word,
    pub x: Permutation,
    /// Signed decimal integer (-1)^a C.
    pub value: String,
    /// Ascending, with multiplicity.
    pub primes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub composite_remainder: Option<String>,
}

impl TorsionCertificate {
    pub fn value_bigint(&self) -> BigInt {
        self.value.parse().expect("certificate value is a decimal integer")
    }
}

/// Runs the full pipeline: value, normalization, both evaluators, the
/// reduced expression, the closed-form subexpression, and the prime
/// factorization. The nil Hecke cross-check runs when the rank allows it.
pub fn certify(data: &OperatorData) -> Result<TorsionCertificate, ConstructError> {
    data.validate()?;
    let c = operator_value(data)?;
    if c.is_zero() {
        return Err(ConstructError::Vanishes);
    }
    let normalized = match normalize(data, false) {
        Ok(d) => d,
        Err(ConstructError::Vanishes) => {
            return Err(ConstructError::Integrity(
                "normalization vanished although the operator value is nonzero".into(),
            ))
        }
        Err(e) => return Err(e),
    };
    let a = normalized.a_total();
    let expected = if a % 2 == 0 { c.clone() } else { -c.clone() };
    let structured = evaluate_structured(&normalized)?;
    if structured != expected {
        return Err(ConstructError::Integrity(format!(
            "structured evaluation {} disagrees with (-1)^a x operator value {}",
            structured, expected
        )));
    }
    if normalized.ambient_rank() <= NILHECKE_UNPRUNED_CAP {
        let nh = evaluate_nilhecke(&normalized)?;
        if nh != structured {
            return Err(ConstructError::Integrity(format!(
                "nil Hecke evaluation {} disagrees with structured evaluation {}",
                nh, structured
            )));
        }
    }
    let word = build_expression(&normalized)?;
    defect_zero_subexpression(&normalized, &word)?;
    let factorization = crate::search::factorize(&structured)
        .map_err(|e| ConstructError::Integrity(format!("factorization failed: {}", e)))?;
    Ok(TorsionCertificate {
        schema_version: crate::SCHEMA_VERSION.to_string(),
        ambient_rank: normalized.ambient_rank(),
        x: normalized.w_sub_i(),
        word,
        data: normalized,
        value: structured.to_string(),
        primes: factorization.prime_factors.iter().map(|p| p.to_string()).collect(),
        composite_remainder: factorization.composite_remainder.map(|c| c.to_string()),
    })
}
