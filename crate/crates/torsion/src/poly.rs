//! Sparse polynomials over Z in variables x_1..x_n, the S_n action by
//! variable permutation, and the divided difference operators
//!
//!   d_i(f) = (f - s_i f) / (x_i - x_{i+1}).
//!
//! The quotient is never formed by division: on a monomial
//! x_i^a x_{i+1}^b (times an s_i-invariant rest) it is the telescoping sum
//! sign(a-b) * sum_t x_i^{max-1-t} x_{i+1}^{min+t}, which keeps all
//! arithmetic in Z. Degrees follow the grading deg x_i = 2, so d_i drops
//! the (paper) degree by exactly 2.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

use crate::sym::Permutation;

/// Exponent vector with graded-lex order: total degree first, then
/// lexicographic with x_1 heaviest.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in Z[x_1..x_n]; invariant: no stored coefficient is zero and
/// every exponent vector has length n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntPolynomial {
    n: usize,
    terms: BTreeMap<Mono, BigInt>,
}

impl IntPolynomial {
    pub fn zero(n: usize) -> Self {
        IntPolynomial { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, BigInt::one())
    }

    pub fn constant(n: usize, c: BigInt) -> Self {
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(Mono(vec![0; n]), c);
        }
        p
    }

    /// x_i as a polynomial; i is 1-indexed.
    pub fn variable(i: u32, n: usize) -> Self {
        assert!(i >= 1 && i as usize <= n);
        let mut e = vec![0; n];
        e[i as usize - 1] = 1;
        Self::from_terms(n, vec![(Mono(e), BigInt::one())])
    }

    pub fn from_terms(n: usize, terms: Vec<(Mono, BigInt)>) -> Self {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Mono, c: BigInt) {
        assert_eq!(m.0.len(), self.n, "exponent arity mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
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

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Mono) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Some(c) iff the polynomial is the constant c.
    pub fn as_constant(&self) -> Option<BigInt> {
        if self.terms.is_empty() {
            return Some(BigInt::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.total_degree() == 0 {
                return Some(c.clone());
            }
        }
        None
    }

    /// Algebraic degree; the paper grading is twice this.
    pub fn algebraic_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    pub fn paper_degree(&self) -> Option<u32> {
        self.algebraic_degree().map(|d| 2 * d)
    }

    /// Some(d) iff nonzero and every monomial has algebraic degree d.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.algebraic_degree()?;
        self.terms.keys().all(|m| m.total_degree() == d).then_some(d)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        IntPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        IntPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut r = Self::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let e: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                r.add_term(Mono(e), ca * cb);
            }
        }
        r
    }

    /// Multiply by the single monomial x_i^k in place.
    pub fn mul_var_power(&self, i: u32, k: u32) -> Self {
        assert!(i >= 1 && i as usize <= self.n);
        if k == 0 {
            return self.clone();
        }
        IntPolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0.clone();
                    e[i as usize - 1] += k;
                    (Mono(e), c.clone())
                })
                .collect(),
        }
    }

    /// The action of w: x_i -> x_{w(i)}.
    pub fn act(&self, w: &Permutation) -> Self {
        assert_eq!(w.rank(), self.n, "rank mismatch in act");
        IntPolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = vec![0u32; self.n];
                    for (p, &k) in m.0.iter().enumerate() {
                        e[w.apply(p as u32 + 1) as usize - 1] = k;
                    }
                    (Mono(e), c.clone())
                })
                .collect(),
        }
    }

    /// True iff s_i f = f for every i in gens.
    pub fn is_invariant(&self, gens: &[u32]) -> bool {
        gens.iter().all(|&i| {
            let s = Permutation::simple(i, self.n);
            self.act(&s) == *self
        })
    }

    /// Divided difference d_i(f) = (f - s_i f)/(x_i - x_{i+1}), computed
    /// monomial-wise by the telescoping sum; exact over Z.
    pub fn divided_difference(&self, i: u32) -> Self {
        assert!(i >= 1 && (i as usize) < self.n, "d_{} out of range for {} vars", i, self.n);
        let (p, q) = (i as usize - 1, i as usize);
        let mut r = Self::zero(self.n);
        for (m, c) in &self.terms {
            let (a, b) = (m.0[p], m.0[q]);
            if a == b {
                continue;
            }
            let (hi, lo, sign) = if a > b { (a, b, 1) } else { (b, a, -1) };
            let coeff = if sign > 0 { c.clone() } else { -c };
            for t in 0..hi - lo {
                let mut e = m.0.clone();
                e[p] = hi - 1 - t;
                e[q] = lo + t;
                r.add_term(Mono(e), coeff.clone());
            }
        }
        r
    }

    /// Composite divided difference along a word, rightmost letter first,
    /// matching the operator product d_{i_1} d_{i_2} ... d_{i_m}.
    pub fn demazure_word(&self, word: &[u32]) -> Self {
        let mut p = self.clone();
        for &i in word.iter().rev() {
            p = p.divided_difference(i);
        }
        p
    }

    /// d_w along the canonical reduced word; independent of that choice.
    pub fn demazure(&self, w: &Permutation) -> Self {
        assert_eq!(w.rank(), self.n);
        self.demazure_word(&w.staircase_word())
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            terms: Vec<(&'a Vec<u32>, String)>,
        }
        let terms = self.terms.iter().map(|(m, c)| (&m.0, c.to_string())).collect();
        Repr { n: self.n, terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            terms: Vec<(Vec<u32>, String)>,
        }
        let repr = Repr::deserialize(d)?;
        let mut p = IntPolynomial::zero(repr.n);
        for (e, c) in repr.terms {
            if e.len() != repr.n {
                return Err(D::Error::custom("exponent arity mismatch"));
            }
            let c: BigInt = c.parse().map_err(|_| D::Error::custom("bad integer literal"))?;
            p.add_term(Mono(e), c);
        }
        Ok(p)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WordValueError {
    #[error("degree condition violated: sum of lengths {sum_len} != a + b = {a} + {b}")]
    DegreeCondition { sum_len: u32, a: u32, b: u32 },
    #[error("operator word did not evaluate to a constant")]
    NonConstant,
}

/// Value of the operator word
///   C = d_{w_m}(x_1^{a_m} x_n^{b_m} d_{w_{m-1}}( ... d_{w_1}(x_1^{a_1} x_n^{b_1}) ... ))
/// for items listed innermost first. The degree condition
/// sum l(w_i) = sum a_i + sum b_i forces the result into Z.
pub fn operator_word_value(
    n: usize,
    items: &[(Permutation, u32, u32)],
) -> Result<BigInt, WordValueError> {
    let sum_len: u32 = items.iter().map(|(w, _, _)| w.length()).sum();
    let a: u32 = items.iter().map(|&(_, a, _)| a).sum();
    let b: u32 = items.iter().map(|&(_, _, b)| b).sum();
    if sum_len != a + b {
        return Err(WordValueError::DegreeCondition { sum_len, a, b });
    }
    let mut p = IntPolynomial::one(n);
    for (w, ai, bi) in items {
        assert_eq!(w.rank(), n, "item rank mismatch");
        p = p.mul_var_power(1, *ai);
        p = p.mul_var_power(n as u32, *bi);
        p = p.demazure(w);
    }
    p.as_constant().ok_or(WordValueError::NonConstant)
}
