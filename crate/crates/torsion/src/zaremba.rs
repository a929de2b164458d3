//! The SL(2,Z) semigroup side: products of the two unipotent generators,
//! the bounded-quotient subsemigroups Gamma_A, continuant enumeration with
//! exact density and prime counts, the exponential norm lower bound, and
//! the bridge that turns matrix entries into certified torsion values.
//!
//! Everything here is exact integer arithmetic; the only floating point is
//! the growth-witness target interval, whose endpoints are irrational by
//! definition.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::construct::{certify, ConstructError, TorsionCertificate};
use crate::search::{factorize, is_prime, ulu_entry_data, Lu};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ZarembaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no representable prime in ({threshold}, {n_target}] with block length <= {max_blocks}")]
    NoWitness { threshold: f64, n_target: f64, max_blocks: usize },
    #[error("bridge certification failed: {0}")]
    Bridge(#[from] ConstructError),
}

// ---------------------------------------------------------------------------
// matrices and words

/// A 2x2 integer matrix; semigroup elements always have determinant 1 and
/// nonnegative entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat2 {
    pub e: [[BigInt; 2]; 2],
}

impl Mat2 {
    pub fn identity() -> Self {
        Mat2::from_i64(1, 0, 0, 1)
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2 {
            e: [
                [BigInt::from(a), BigInt::from(b)],
                [BigInt::from(c), BigInt::from(d)],
            ],
        }
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut e = [[BigInt::zero(), BigInt::zero()], [BigInt::zero(), BigInt::zero()]];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = &self.e[i][0] * &other.e[0][j] + &self.e[i][1] * &other.e[1][j];
            }
        }
        Mat2 { e }
    }

    pub fn det(&self) -> BigInt {
        &self.e[0][0] * &self.e[1][1] - &self.e[0][1] * &self.e[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2 {
            e: [
                [self.e[0][0].clone(), self.e[1][0].clone()],
                [self.e[0][1].clone(), self.e[1][1].clone()],
            ],
        }
    }

    pub fn max_entry(&self) -> BigInt {
        self.e
            .iter()
            .flatten()
            .cloned()
            .max()
            .expect("matrix has entries")
    }

    /// The upper unipotent generator [[1,1],[0,1]].
    pub fn l_gen() -> Self {
        Mat2::from_i64(1, 1, 0, 1)
    }

    /// The lower unipotent generator [[1,0],[1,1]].
    pub fn r_gen() -> Self {
        Mat2::from_i64(1, 0, 1, 1)
    }
}

/// Letters of the free two-generator semigroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lr {
    L,
    R,
}

pub fn parse_lr_word(s: &str) -> Result<Vec<Lr>, ZarembaError> {
    s.trim()
        .chars()
        .map(|c| match c {
            'L' | 'l' => Ok(Lr::L),
            'R' | 'r' => Ok(Lr::R),
            other => Err(ZarembaError::InvalidInput(format!("expected L or R, found {:?}", other))),
        })
        .collect()
}

pub fn lr_word_string(word: &[Lr]) -> String {
    word.iter().map(|&c| if c == Lr::L { 'L' } else { 'R' }).collect()
}

/// Product of the generators in word order; the empty word is the identity.
pub fn gamma_product(word: &[Lr]) -> Mat2 {
    let l = Mat2::l_gen();
    let r = Mat2::r_gen();
    word.iter().fold(Mat2::identity(), |acc, &c| {
        acc.mul(if c == Lr::L { &l } else { &r })
    })
}

/// The bounded-quotient generator for the pair (a, b): L^a R^b, which the
/// pleasant continuant identity rewrites as [[ab+1, a],[b, 1]]. Both
/// factorizations are computed and compared.
pub fn gamma_a_generator(a: u32, b: u32, a_max: u32) -> Result<Mat2, ZarembaError> {
    if a < 1 || a > a_max || b < 1 || b > a_max {
        return Err(ZarembaError::InvalidInput(format!(
            "generator pair ({}, {}) out of range 1..={}",
            a, b, a_max
        )));
    }
    let closed = Mat2::from_i64((a as i64) * (b as i64) + 1, a as i64, b as i64, 1);
    let cont = |k: i64| Mat2::from_i64(k, 1, 1, 0);
    let continuant_form = cont(a as i64).mul(&cont(b as i64));
    let unipotent_form = {
        let mut m = Mat2::identity();
        for _ in 0..a {
            m = m.mul(&Mat2::l_gen());
        }
        for _ in 0..b {
            m = m.mul(&Mat2::r_gen());
        }
        m
    };
    if closed != continuant_form || closed != unipotent_form {
        return Err(ZarembaError::InvalidInput(format!(
            "generator identity failed for ({}, {})",
            a, b
        )));
    }
    Ok(closed)
}

// ---------------------------------------------------------------------------
// continuant enumeration

/// Largest top-left entry we enumerate to; keeps the u64 fast path safe
/// (one more generator multiplies entries by at most 26 + carries).
const ENUMERATION_CAP: u64 = 1 << 40;

type M4 = [u64; 4];

fn m4_mul(m: &M4, g: &M4) -> M4 {
    [
        m[0] * g[0] + m[1] * g[2],
        m[0] * g[1] + m[1] * g[3],
        m[2] * g[0] + m[3] * g[2],
        m[2] * g[1] + m[3] * g[3],
    ]
}

fn generator_list(a_max: u32) -> Vec<M4> {
    let mut gens = Vec::new();
    for a in 1..=a_max as u64 {
        for b in 1..=a_max as u64 {
            gens.push([a * b + 1, a, b, 1]);
        }
    }
    gens
}

fn check_enumeration_bounds(a_max: u32, n_max: u64) -> Result<(), ZarembaError> {
    if a_max < 1 {
        return Err(ZarembaError::InvalidInput("quotient bound must be at least 1".into()));
    }
    if n_max < 1 || n_max > ENUMERATION_CAP {
        return Err(ZarembaError::InvalidInput(format!(
            "norm bound must lie in 1..={}",
            ENUMERATION_CAP
        )));
    }
    Ok(())
}

fn dfs_from(start: M4, gens: &[M4], n_max: u64, hit: &mut [bool]) {
    // all generator entries are positive, so the top-left entry strictly
    // increases under right multiplication: cutting at n_max is sound
    let mut stack = vec![start];
    while let Some(m) = stack.pop() {
        hit[m[0] as usize] = true;
        for g in gens {
            let child = m4_mul(&m, g);
            if child[0] <= n_max {
                stack.push(child);
            }
        }
    }
}

/// All n <= n_max arising as the top-left entry of a nonempty product of
/// bounded-quotient generators. Depth first with monotone pruning; the
/// top-level generator choices are split across workers and the results
/// merged as a union.
pub fn representable_set(
    a_max: u32,
    n_max: u64,
    workers: usize,
) -> Result<BTreeSet<u64>, ZarembaError> {
    check_enumeration_bounds(a_max, n_max)?;
    if workers == 0 {
        return Err(ZarembaError::InvalidInput("need at least one worker".into()));
    }
    let gens = generator_list(a_max);
    let roots: Vec<M4> = gens.iter().copied().filter(|g| g[0] <= n_max).collect();
    let merged: Vec<bool> = if workers == 1 || roots.len() <= 1 {
        let mut hit = vec![false; n_max as usize + 1];
        for root in roots {
            dfs_from(root, &gens, n_max, &mut hit);
        }
        hit
    } else {
        let shards: Vec<Vec<M4>> = (0..workers)
            .map(|w| roots.iter().copied().skip(w).step_by(workers).collect())
            .collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .into_iter()
                .map(|shard| {
                    let gens = &gens;
                    scope.spawn(move || {
                        let mut hit = vec![false; n_max as usize + 1];
                        for root in shard {
                            dfs_from(root, gens, n_max, &mut hit);
                        }
                        hit
                    })
                })
                .collect();
            let mut merged = vec![false; n_max as usize + 1];
            for h in handles {
                for (m, v) in merged.iter_mut().zip(h.join().expect("enumeration worker")) {
                    *m |= v;
                }
            }
            merged
        })
    };
    Ok(merged
        .iter()
        .enumerate()
        .filter_map(|(n, &v)| if v { Some(n as u64) } else { None })
        .collect())
}

/// Independent oracle: breadth-first frontier expansion with the same
/// pruning bound, no shared code with the depth-first path.
pub fn representable_set_bfs(a_max: u32, n_max: u64) -> Result<BTreeSet<u64>, ZarembaError> {
    check_enumeration_bounds(a_max, n_max)?;
    let gens = generator_list(a_max);
    let mut out = BTreeSet::new();
    let mut frontier: Vec<M4> = gens.iter().copied().filter(|g| g[0] <= n_max).collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for m in &frontier {
            out.insert(m[0]);
            for g in &gens {
                let child = m4_mul(m, g);
                if child[0] <= n_max {
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// |representable_set(a_max, n)| / n as an exact rational.
pub fn density(a_max: u32, n: u64, workers: usize) -> Result<BigRational, ZarembaError> {
    let set = representable_set(a_max, n, workers)?;
    Ok(BigRational::new(BigInt::from(set.len()), BigInt::from(n)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeRecords {
    pub schema_version: String,
    #[serde(rename = "A")]
    pub a_max: u32,
    pub theta: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub count: usize,
    pub primes: Vec<u64>,
}

/// Representable primes in the window (theta * n, n]. The lower endpoint is
/// evaluated in f64; all desk-scale examples sit far from the boundary.
pub fn prime_records(a_max: u32, theta: f64, n: u64, workers: usize) -> Result<PrimeRecords, ZarembaError> {
    if !(0.0..1.0).contains(&theta) || theta <= 0.0 {
        return Err(ZarembaError::InvalidInput("theta must lie in (0, 1)".into()));
    }
    let set = representable_set(a_max, n, workers)?;
    let lower = theta * n as f64;
    let primes: Vec<u64> = set
        .into_iter()
        .filter(|&p| (p as f64) > lower && is_prime(&BigInt::from(p)))
        .collect();
    Ok(PrimeRecords {
        schema_version: crate::SCHEMA_VERSION.to_string(),
        a_max,
        theta,
        n,
        count: primes.len(),
        primes,
    })
}

pub fn fibonacci_number(k: u32) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..k {
        let next = &a + &b;
        a = b;
        b = next;
    }
    a
}

/// Exact form of the exponential norm bound: the top-left entry of a
/// product of ell block generators is at least F_{2 ell + 1}, with equality
/// exactly on the all-(1,1) word.
pub fn norm_bound_check(word: &[(u32, u32)], a_max: u32) -> Result<bool, ZarembaError> {
    if word.is_empty() {
        return Err(ZarembaError::InvalidInput("norm bound needs a nonempty word".into()));
    }
    let mut m = Mat2::identity();
    for &(a, b) in word {
        m = m.mul(&gamma_a_generator(a, b, a_max)?);
    }
    Ok(m.e[0][0] >= fibonacci_number(2 * word.len() as u32 + 1))
}

// ---------------------------------------------------------------------------
// growth witness

/// The fixed constants: quotient bound 5, window parameter 1/2, and
/// d = phi / sqrt(5), giving the target norm d * phi^(L/5).
pub const GROWTH_A: u32 = 5;
pub const GROWTH_THETA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthWitness {
    pub schema_version: String,
    #[serde(rename = "L")]
    pub l: u32,
    /// The witness prime, equal to the product's top-left entry.
    pub p: u64,
    /// Unipotent word whose product realizes p; its length is ell.
    pub word: String,
    pub ell: usize,
    /// Block generators (a, b) realizing the same product.
    pub blocks: Vec<(u32, u32)>,
    pub n_target: f64,
    pub threshold: f64,
}

/// Searches products of at most L / (2A) block generators for a prime
/// top-left entry in (theta * N, N] with N = d * phi^(L/A), and converts
/// the witness to a unipotent word of length at most L. Deterministic:
/// depth-first in lexicographic block order, first hit wins.
pub fn growth_witness(l: u32) -> Result<GrowthWitness, ZarembaError> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let d = phi / 5f64.sqrt();
    let n_target = d * phi.powf(l as f64 / GROWTH_A as f64);
    let threshold = GROWTH_THETA * n_target;
    let max_blocks = (l / (2 * GROWTH_A)) as usize;
    let no_witness = ZarembaError::NoWitness { threshold, n_target, max_blocks };
    if max_blocks == 0 || n_target < 2.0 {
        return Err(no_witness);
    }
    let n_max = n_target.floor() as u64;
    let pairs: Vec<(u32, u32)> = (1..=GROWTH_A)
        .flat_map(|a| (1..=GROWTH_A).map(move |b| (a, b)))
        .collect();
    let gens = generator_list(GROWTH_A);
    // lexicographic depth-first scan over block words
    let mut stack: Vec<(M4, Vec<usize>)> = pairs
        .iter()
        .enumerate()
        .rev()
        .filter(|(i, _)| gens[*i][0] <= n_max)
        .map(|(i, _)| (gens[i], vec![i]))
        .collect();
    while let Some((m, picks)) = stack.pop() {
        if (m[0] as f64) > threshold && is_prime(&BigInt::from(m[0])) {
            let blocks: Vec<(u32, u32)> = picks.iter().map(|&i| pairs[i]).collect();
            let mut word = Vec::new();
            for &(a, b) in &blocks {
                word.extend(std::iter::repeat(Lr::L).take(a as usize));
                word.extend(std::iter::repeat(Lr::R).take(b as usize));
            }
            let ell = word.len();
            assert!(ell <= l as usize, "unipotent length exceeds the budget");
            let check = gamma_product(&word);
            assert_eq!(check.e[0][0], BigInt::from(m[0]), "witness product mismatch");
            assert!(check.det().is_one());
            return Ok(GrowthWitness {
                schema_version: crate::SCHEMA_VERSION.to_string(),
                l,
                p: m[0],
                word: lr_word_string(&word),
                ell,
                blocks,
                n_target,
                threshold,
            });
        }
        if picks.len() < max_blocks {
            for i in (0..pairs.len()).rev() {
                let child = m4_mul(&m, &gens[i]);
                if child[0] <= n_max {
                    let mut next = picks.clone();
                    next.push(i);
                    stack.push((child, next));
                }
            }
        }
    }
    Err(no_witness)
}

// ---------------------------------------------------------------------------
// the torsion bridge

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeEntry {
    pub row: usize,
    pub col: usize,
    /// The matrix entry (always nonnegative here).
    pub entry: String,
    pub certificate: TorsionCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub schema_version: String,
    pub word: String,
    pub ell: usize,
    #[serde(rename = "N")]
    pub ambient_rank: usize,
    pub gamma: [[String; 2]; 2],
    /// One certificate per nonzero entry; zero entries carry no primes and
    /// no certificate.
    pub entries: Vec<BridgeEntry>,
}

/// Certifies every nonzero entry of the word's matrix through the operator
/// correspondence (L acts as the lower triangular operator, R as the upper
/// one, whose matrix carries a global sign). Asserts that each prime factor
/// of each entry divides the certified value, and that the signed values
/// match the transposed matrix identity exactly.
pub fn torsion_bridge(word: &[Lr]) -> Result<BridgeReport, ZarembaError> {
    if word.is_empty() {
        return Err(ZarembaError::InvalidInput("bridge needs a nonempty word".into()));
    }
    let gamma = gamma_product(word);
    assert!(gamma.det().is_one(), "semigroup element must have determinant 1");
    let lu: Vec<Lu> = word.iter().map(|&c| if c == Lr::L { Lu::L } else { Lu::U }).collect();
    let upper_count = word.iter().filter(|&&c| c == Lr::R).count();
    let mut entries = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let entry = &gamma.e[i][j];
            if entry.is_zero() {
                continue;
            }
            // the operator product is (-1)^{#R} times the transpose, so
            // entry (i, j) is read by the (row j, col i) operator data
            let (data, seed_sign) = ulu_entry_data(&lu, j, i);
            let cert = certify(&data)?;
            let a_sign = if data.a_total() % 2 == 0 { 1 } else { -1 };
            let u_sign = if upper_count % 2 == 0 { 1 } else { -1 };
            let expected = BigInt::from(a_sign * i64::from(seed_sign) * u_sign) * entry;
            if cert.value_bigint() != expected {
                return Err(ZarembaError::Bridge(ConstructError::Integrity(format!(
                    "bridge entry ({}, {}): certified value {} differs from signed entry {}",
                    i, j, cert.value, expected
                ))));
            }
            let factors = factorize(entry).expect("entry is nonzero");
            for p in &factors.prime_factors {
                if !(cert.value_bigint().abs() % p).is_zero() {
                    return Err(ZarembaError::Bridge(ConstructError::Integrity(format!(
                        "prime {} of entry ({}, {}) does not divide the certified value",
                        p, i, j
                    ))));
                }
            }
            entries.push(BridgeEntry {
                row: i,
                col: j,
                entry: entry.to_string(),
                certificate: cert,
            });
        }
    }
    Ok(BridgeReport {
        schema_version: crate::SCHEMA_VERSION.to_string(),
        word: lr_word_string(word),
        ell: word.len(),
        ambient_rank: 3 * word.len() + 5,
        gamma: [
            [gamma.e[0][0].to_string(), gamma.e[0][1].to_string()],
            [gamma.e[1][0].to_string(), gamma.e[1][1].to_string()],
        ],
        entries,
    })
}
