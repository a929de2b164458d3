//! Schubert classes of the coinvariant ring C = Z[x_1..x_n]/(symmetric
//! positive-degree invariants).
//!
//! The class of the staircase monomial x_1^{n-1} x_2^{n-2} ... x_{n-1} is
//! X_{w_0}, and X_w := d_{w w_0} X_{w_0}. Two rewriting rules drive all
//! computation here:
//!
//!   (1)  d_i X_w = X_{s_i w} if s_i w < w, else 0
//!   (2)  f * X_w = sum over transpositions t = (i j) with l(tw) = l(w)+1
//!        of <f, e_i - e_j> X_{tw}        (f linear)
//!
//! C has the sub-staircase monomial basis { x^e : e_i <= n-i }. Reduction
//! to it rewrites x_j^{n+1-j} against h_{n+1-j}(x_1..x_j), the complete
//! homogeneous representatives of the ideal; each such h lies in the ideal
//! generated by the elementary symmetric polynomials, and the substituted
//! monomials are strictly smaller in lex with x_n heaviest, so the rewrite
//! terminates in the unique normal form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::poly::{IntPolynomial, Mono};
use crate::sym::{Permutation, Word};

/// Homogeneous integer vector in the Schubert basis {X_w}; all supported
/// permutations share one rank and one length.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "SchubertRepr", into = "SchubertRepr")]
pub struct SchubertVector {
    n: usize,
    coeffs: BTreeMap<Permutation, BigInt>,
}

#[derive(Serialize, Deserialize)]
struct SchubertRepr {
    n: usize,
    coeffs: Vec<(Permutation, String)>,
}

impl From<SchubertVector> for SchubertRepr {
    fn from(v: SchubertVector) -> Self {
        SchubertRepr {
            n: v.n,
            coeffs: v.coeffs.into_iter().map(|(w, c)| (w, c.to_string())).collect(),
        }
    }
}

impl TryFrom<SchubertRepr> for SchubertVector {
    type Error = String;

    fn try_from(r: SchubertRepr) -> Result<Self, String> {
        let mut v = SchubertVector::zero(r.n);
        for (w, c) in r.coeffs {
            if w.rank() != r.n {
                return Err("rank mismatch in Schubert vector".into());
            }
            let c: BigInt = c.parse().map_err(|_| "bad integer literal".to_string())?;
            v.add_term(w, c);
        }
        v.check_homogeneous().map_err(|e| e.to_string())?;
        Ok(v)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SchubertError {
    #[error("vector mixes basis lengths")]
    MixedDegrees,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("linear system for the Schubert expansion is singular")]
    SingularExpansion,
    #[error("expansion produced a non-integral coefficient")]
    NonIntegralExpansion,
    #[error("coefficient extraction paths disagree at {0:?}")]
    ExtractionMismatch(Permutation),
    #[error("operator image leaves the requested span")]
    LeavesSpan,
    #[error("chevalley multiplier must be linear")]
    NotLinear,
}

impl SchubertVector {
    pub fn zero(n: usize) -> Self {
        SchubertVector { n, coeffs: BTreeMap::new() }
    }

    pub fn basis_class(w: &Permutation) -> Self {
        let mut v = Self::zero(w.rank());
        v.coeffs.insert(w.clone(), BigInt::one());
        v
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Permutation, &BigInt)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, w: &Permutation) -> BigInt {
        self.coeffs.get(w).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Common length of the supported classes, if nonzero.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next().map(|w| w.length())
    }

    fn check_homogeneous(&self) -> Result<(), SchubertError> {
        let mut it = self.coeffs.keys();
        if let Some(first) = it.next() {
            let d = first.length();
            if it.any(|w| w.length() != d) {
                return Err(SchubertError::MixedDegrees);
            }
        }
        Ok(())
    }

    fn add_term(&mut self, w: Permutation, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut r = self.clone();
        for (w, c) in &other.coeffs {
            r.add_term(w.clone(), c.clone());
        }
        r
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut r = Self::zero(self.n);
        for (w, k) in &self.coeffs {
            r.add_term(w.clone(), k * c);
        }
        r
    }
}

/// The staircase monomial x_1^{n-1} x_2^{n-2} ... x_{n-1}, representing X_{w_0}.
pub fn staircase_monomial(n: usize) -> IntPolynomial {
    let mut p = IntPolynomial::one(n);
    for i in 1..n as u32 {
        p = p.mul_var_power(i, n as u32 - i);
    }
    p
}

/// Polynomial representative X_w = d_{w w_0}(staircase).
pub fn schubert_rep(w: &Permutation) -> IntPolynomial {
    let n = w.rank();
    let w0 = crate::sym::longest_element(&(1..n as u32).collect::<Vec<_>>(), n);
    staircase_monomial(n).demazure(&w.compose(&w0))
}

/// Complete homogeneous polynomial h_k(x_1..x_j) inside n variables.
fn complete_homogeneous(k: u32, j: usize, n: usize) -> IntPolynomial {
    // all exponent vectors on the first j variables summing to k
    fn rec(terms: &mut Vec<(Mono, BigInt)>, e: &mut Vec<u32>, pos: usize, left: u32, j: usize, n: usize) {
        if pos == j - 1 {
            e[pos] = left;
            let mut full = e.clone();
            full.resize(n, 0);
            terms.push((Mono(full), BigInt::one()));
            e[pos] = 0;
            return;
        }
        for t in 0..=left {
            e[pos] = t;
            rec(terms, e, pos + 1, left - t, j, n);
        }
        e[pos] = 0;
    }
    let mut terms = Vec::new();
    let mut e = vec![0u32; j];
    rec(&mut terms, &mut e, 0, k, j, n);
    IntPolynomial::from_terms(n, terms)
}

/// Elementary symmetric polynomial e_k(x_1..x_n).
pub fn elementary_symmetric(k: usize, n: usize) -> IntPolynomial {
    let mut terms = Vec::new();
    let mut choose = vec![0usize; k];
    fn rec(terms: &mut Vec<(Mono, BigInt)>, choose: &mut Vec<usize>, pos: usize, start: usize, n: usize) {
        if pos == choose.len() {
            let mut e = vec![0u32; n];
            for &c in choose.iter() {
                e[c] = 1;
            }
            terms.push((Mono(e), BigInt::one()));
            return;
        }
        for c in start..n {
            choose[pos] = c;
            rec(terms, choose, pos + 1, c + 1, n);
        }
    }
    rec(&mut terms, &mut choose, 0, 0, n);
    IntPolynomial::from_terms(n, terms)
}

/// Normal form in the sub-staircase basis: repeatedly rewrites a monomial
/// with e_j >= n+1-j using x_j^{n+1-j} = x_j^{n+1-j} - h_{n+1-j}(x_1..x_j)
/// (the right side holds modulo the ideal since h lies in it).
pub fn reduce_to_basis(p: &IntPolynomial) -> IntPolynomial {
    let n = p.num_vars();
    let mut cur = p.clone();
    loop {
        let mut victim: Option<(Vec<u32>, BigInt, usize)> = None;
        for (m, c) in cur.terms() {
            if let Some(j) = (0..n).find(|&j| m.0[j] >= (n - j) as u32) {
                victim = Some((m.0.clone(), c.clone(), j));
                break;
            }
        }
        let Some((e, c, j)) = victim else {
            return cur;
        };
        let k = (n - j) as u32; // n + 1 - (j+1) with j zero-indexed
        let mut rest = e.clone();
        rest[j] -= k;
        let h = complete_homogeneous(k, j + 1, n);
        // cur -= c * x^rest * h   (this cancels the victim term exactly)
        let shift = IntPolynomial::from_terms(n, vec![(Mono(rest), c)]);
        cur = cur.sub(&shift.mul(&h));
    }
}

/// True iff every monomial satisfies the sub-staircase bound e_i <= n-i.
pub fn in_basis(p: &IntPolynomial) -> bool {
    let n = p.num_vars();
    p.terms().all(|(m, _)| (0..n).all(|j| m.0[j] <= (n - 1 - j) as u32))
}

/// All permutations of S_n with the given length, in lex one-line order.
pub fn perms_of_length(n: usize, d: u32) -> Vec<Permutation> {
    Permutation::all(n).filter(|w| w.length() == d).collect()
}

/// Expands a homogeneous polynomial in the Schubert basis by exact linear
/// algebra over the sub-staircase monomials. The solution is unique and
/// integral; both facts are verified, not assumed.
pub fn expand(p: &IntPolynomial) -> Result<SchubertVector, SchubertError> {
    let n = p.num_vars();
    if p.is_zero() {
        return Ok(SchubertVector::zero(n));
    }
    let d = p.homogeneous_degree().ok_or(SchubertError::NotHomogeneous)?;
    let basis = perms_of_length(n, d);
    let reduced_target = reduce_to_basis(p);
    let reduced_reps: Vec<IntPolynomial> =
        basis.iter().map(|w| reduce_to_basis(&schubert_rep(w))).collect();

    // row index: every monomial appearing anywhere
    let mut rows: Vec<Mono> = Vec::new();
    {
        let mut seen = std::collections::BTreeSet::new();
        for q in reduced_reps.iter().chain(std::iter::once(&reduced_target)) {
            for (m, _) in q.terms() {
                if seen.insert(m.clone()) {
                    rows.push(m.clone());
                }
            }
        }
        rows.sort();
    }
    let mut mat: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|m| {
            let mut row: Vec<BigRational> =
                reduced_reps.iter().map(|q| BigRational::from(q.coefficient(m))).collect();
            row.push(BigRational::from(reduced_target.coefficient(m)));
            row
        })
        .collect();

    // Gaussian elimination with exact rationals
    let cols = basis.len();
    let mut pivot_row_of_col = vec![usize::MAX; cols];
    let mut r = 0;
    for col in 0..cols {
        let Some(pr) = (r..mat.len()).find(|&i| !mat[i][col].is_zero()) else {
            continue;
        };
        mat.swap(r, pr);
        let inv = mat[r][col].clone();
        for x in mat[r].iter_mut() {
            *x /= inv.clone();
        }
        for i in 0..mat.len() {
            if i != r && !mat[i][col].is_zero() {
                let f = mat[i][col].clone();
                for cidx in 0..=cols {
                    let sub = &mat[r][cidx] * &f;
                    mat[i][cidx] -= sub;
                }
            }
        }
        pivot_row_of_col[col] = r;
        r += 1;
    }
    // consistency: no row of the form (0...0 | nonzero)
    for row in &mat {
        if row[..cols].iter().all(|x| x.is_zero()) && !row[cols].is_zero() {
            return Err(SchubertError::SingularExpansion);
        }
    }
    let mut v = SchubertVector::zero(n);
    let mut combo = IntPolynomial::zero(n);
    for (col, w) in basis.iter().enumerate() {
        let pr = pivot_row_of_col[col];
        if pr == usize::MAX {
            return Err(SchubertError::SingularExpansion);
        }
        let val = mat[pr][cols].clone();
        if !val.is_integer() {
            return Err(SchubertError::NonIntegralExpansion);
        }
        let c = val.to_integer();
        if !c.is_zero() {
            combo = combo.add(&reduced_reps[col].scale(&c));
            v.add_term(w.clone(), c);
        }
    }
    // full verification of the solve
    if combo != reduced_target {
        return Err(SchubertError::SingularExpansion);
    }
    Ok(v)
}

/// Rule (1): d_i on the Schubert basis.
pub fn demazure_schubert(i: u32, v: &SchubertVector) -> SchubertVector {
    let mut r = SchubertVector::zero(v.n);
    for (w, c) in &v.coeffs {
        let siw = w.mul_simple_left(i);
        if siw.length() < w.length() {
            r.add_term(siw, c.clone());
        }
    }
    r
}

/// Rule (2): multiplication by a linear form f = sum c_i x_i.
pub fn chevalley_mul(f: &IntPolynomial, v: &SchubertVector) -> Result<SchubertVector, SchubertError> {
    let n = v.n;
    assert_eq!(f.num_vars(), n);
    if !f.is_zero() && f.homogeneous_degree() != Some(1) {
        return Err(SchubertError::NotLinear);
    }
    let coeff_of_var = |i: u32| -> BigInt {
        let mut e = vec![0u32; n];
        e[i as usize - 1] = 1;
        f.coefficient(&Mono(e))
    };
    let c: Vec<BigInt> = (1..=n as u32).map(coeff_of_var).collect();
    let mut r = SchubertVector::zero(n);
    for (w, cw) in &v.coeffs {
        for i in 1..=n as u32 {
            for j in i + 1..=n as u32 {
                let tw = {
                    // left multiplication by the transposition (i j)
                    let t = Permutation::transposition(i, j, n);
                    t.compose(w)
                };
                if tw.length() == w.length() + 1 {
                    let pairing = &c[i as usize - 1] - &c[j as usize - 1];
                    r.add_term(tw, cw * pairing);
                }
            }
        }
    }
    Ok(r)
}

/// Which end of the variable list a monomial power multiplies by.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum VarEnd {
    First,
    Last,
}

/// k-fold Chevalley multiplication by x_1 or x_n.
pub fn mul_power(v: &SchubertVector, end: VarEnd, k: u32) -> SchubertVector {
    let n = v.n;
    let i = match end {
        VarEnd::First => 1,
        VarEnd::Last => n as u32,
    };
    let f = IntPolynomial::variable(i, n);
    let mut r = v.clone();
    for _ in 0..k {
        r = chevalley_mul(&f, &r).expect("variable is linear");
    }
    r
}

/// One composite step h -> d_word(x^power h), a degree-zero operator when
/// word length equals the power.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OperatorStep {
    pub end: VarEnd,
    pub power: u32,
    pub word: Word,
}

impl OperatorStep {
    pub fn apply(&self, v: &SchubertVector) -> SchubertVector {
        let mut r = mul_power(v, self.end, self.power);
        for &i in self.word.iter().rev() {
            r = demazure_schubert(i, &r);
        }
        r
    }
}

/// Applies steps left to right (step[0] acts first).
pub fn apply_operator(steps: &[OperatorStep], v: &SchubertVector) -> SchubertVector {
    steps.iter().fold(v.clone(), |acc, s| s.apply(&acc))
}

/// Coefficient of X_w in v, computed two ways: direct lookup, and the
/// Demazure chain along a reduced word of w, which maps X_w to X_id and
/// kills every other class of the same length. Both must agree.
pub fn extract_coefficient(v: &SchubertVector, w: &Permutation) -> Result<BigInt, SchubertError> {
    let direct = v.coefficient(w);
    let mut r = v.clone();
    for &i in w.staircase_word().iter() {
        r = demazure_schubert(i, &r);
    }
    let via_chain = r.coefficient(&Permutation::identity(v.n));
    if direct != via_chain {
        return Err(SchubertError::ExtractionMismatch(w.clone()));
    }
    Ok(direct)
}

/// Matrix of the operator on an explicit ordered span; errors if the image
/// leaves the span. Entry [i][j] is the X_{basis[i]} coefficient of
/// op(X_{basis[j]}).
pub fn operator_matrix_on(
    basis: &[Permutation],
    steps: &[OperatorStep],
) -> Result<Vec<Vec<BigInt>>, SchubertError> {
    let mut cols = Vec::with_capacity(basis.len());
    for w in basis {
        let img = apply_operator(steps, &SchubertVector::basis_class(w));
        for (u, _) in img.coeffs() {
            if !basis.contains(u) {
                return Err(SchubertError::LeavesSpan);
            }
        }
        cols.push(img);
    }
    Ok((0..basis.len())
        .map(|i| (0..basis.len()).map(|j| cols[j].coefficient(&basis[i])).collect())
        .collect())
}

/// Matrix on the full degree-d component, basis ordered by lex one-line.
pub fn operator_matrix(
    steps: &[OperatorStep],
    n: usize,
    d: u32,
) -> Result<(Vec<Permutation>, Vec<Vec<BigInt>>), SchubertError> {
    let basis = perms_of_length(n, d);
    let m = operator_matrix_on(&basis, steps)?;
    Ok((basis, m))
}
