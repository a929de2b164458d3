//! Symmetric group combinatorics: permutations in one-line notation, words
//! in the simple transpositions, Coxeter length, and parabolic subgroups.
//!
//! Permutations are 1-indexed throughout: an element of S_n maps the set
//! {1, ..., n} to itself and is stored as its image list `[w(1), ..., w(n)]`.
//! Generator index i (1 <= i <= n-1) names the simple transposition s_i
//! swapping i and i+1.

use serde::{Deserialize, Serialize};

/// A word in the simple transpositions; letter i stands for s_i.
pub type Word = Vec<u32>;

/// Permutation of {1, ..., n} in one-line notation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    images: Vec<u32>,
}

impl std::fmt::Debug for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Perm{:?}", self.images)
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = String;

    fn try_from(images: Vec<u32>) -> Result<Self, String> {
        Permutation::from_images(images)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(w: Permutation) -> Vec<u32> {
        w.images
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n as u32).collect(),
        }
    }

    /// Validates that `images` is a bijection of {1, ..., n}.
    pub fn from_images(images: Vec<u32>) -> Result<Self, String> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v == 0 || v as usize > n {
                return Err(format!("image {} out of range 1..={}", v, n));
            }
            if seen[v as usize - 1] {
                return Err(format!("image {} repeated", v));
            }
            seen[v as usize - 1] = true;
        }
        Ok(Permutation { images })
    }

    /// The simple transposition s_i in S_n. Requires 1 <= i < n.
    pub fn simple(i: u32, n: usize) -> Self {
        assert!(i >= 1 && (i as usize) < n, "simple s_{} out of range for S_{}", i, n);
        let mut w = Permutation::identity(n);
        w.images.swap(i as usize - 1, i as usize);
        w
    }

    /// The transposition exchanging i and j. Requires 1 <= i < j <= n.
    pub fn transposition(i: u32, j: u32, n: usize) -> Self {
        assert!(i >= 1 && i < j && j as usize <= n);
        let mut w = Permutation::identity(n);
        w.images.swap(i as usize - 1, j as usize - 1);
        w
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    /// Image of k (1-indexed).
    pub fn apply(&self, k: u32) -> u32 {
        self.images[k as usize - 1]
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(p, &v)| v == p as u32 + 1)
    }

    /// (self o other)(k) = self(other(k)). Ranks must match.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.rank(), other.rank(), "rank mismatch in compose");
        Permutation {
            images: other.images.iter().map(|&k| self.images[k as usize - 1]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u32; self.rank()];
        for (p, &v) in self.images.iter().enumerate() {
            images[v as usize - 1] = p as u32 + 1;
        }
        Permutation { images }
    }

    /// Left product s_i * self: swaps the values i and i+1.
    pub fn mul_simple_left(&self, i: u32) -> Permutation {
        let mut images = self.images.clone();
        for v in images.iter_mut() {
            if *v == i {
                *v = i + 1;
            } else if *v == i + 1 {
                *v = i;
            }
        }
        Permutation { images }
    }

    /// Right product self * s_i: swaps positions i and i+1.
    pub fn mul_simple_right(&self, i: u32) -> Permutation {
        let mut images = self.images.clone();
        images.swap(i as usize - 1, i as usize);
        Permutation { images }
    }

    /// Coxeter length: the number of inversions of the one-line notation.
    pub fn length(&self) -> u32 {
        let mut inv = 0;
        for p in 0..self.images.len() {
            for q in p + 1..self.images.len() {
                if self.images[p] > self.images[q] {
                    inv += 1;
                }
            }
        }
        inv
    }

    /// True iff l(s_i * self) > l(self), i.e. i appears before i+1 in the
    /// one-line notation read as positions of values.
    pub fn left_ascent(&self, i: u32) -> bool {
        let inv = self.inverse();
        inv.apply(i) < inv.apply(i + 1)
    }

    /// True iff l(self * s_i) < l(self), i.e. self(i) > self(i+1).
    pub fn right_descent(&self, i: u32) -> bool {
        self.images[i as usize - 1] > self.images[i as usize]
    }

    /// Canonical reduced word in staircase form: the concatenation over
    /// k = 2..n of one descending run s_{k-1} s_{k-2} ... s_{j_k}, where the
    /// run for k records how far the value k must travel right during a
    /// selection sort from the largest value down. Its length is l(w).
    pub fn staircase_word(&self) -> Word {
        let n = self.rank();
        let mut u = self.clone();
        let mut rev: Word = Vec::with_capacity(self.length() as usize);
        for k in (2..=n as u32).rev() {
            let mut j = u.inverse().apply(k);
            while j < k {
                u = u.mul_simple_right(j);
                rev.push(j);
                j += 1;
            }
        }
        rev.reverse();
        rev
    }

    /// Embeds into S_m (m >= rank) fixing the new letters, with all images
    /// shifted up by `offset`. Letters 1..offset and rank+offset+1..m are fixed.
    pub fn embed_shifted(&self, offset: u32, m: usize) -> Permutation {
        assert!(offset as usize + self.rank() <= m);
        let mut images: Vec<u32> = (1..=m as u32).collect();
        for (p, &v) in self.images.iter().enumerate() {
            images[p + offset as usize] = v + offset;
        }
        Permutation { images }
    }

    /// Iterator over all of S_n in lexicographic one-line order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        let mut heap: Vec<Vec<u32>> = vec![(1..=n as u32).collect()];
        // next_permutation in lex order, materialized lazily
        std::iter::from_fn(move || {
            let cur = heap.pop()?;
            let mut nxt = cur.clone();
            if next_lex(&mut nxt) {
                heap.push(nxt);
            }
            Some(Permutation { images: cur })
        })
    }
}

fn next_lex(a: &mut [u32]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Product s_{w[0]} s_{w[1]} ... of a word, left to right, in S_n.
pub fn word_to_perm(word: &[u32], n: usize) -> Permutation {
    let mut p = Permutation::identity(n);
    for &i in word {
        assert!(i >= 1 && (i as usize) < n, "letter {} out of range for S_{}", i, n);
        p = p.mul_simple_right(i);
    }
    p
}

/// A word is reduced iff its letter count equals the length of its product.
pub fn is_reduced(word: &[u32], n: usize) -> bool {
    word_to_perm(word, n).length() as usize == word.len()
}

/// Checks that `gens` is a strictly increasing list of generator indices
/// valid for S_n, the representation used for parabolic subsets.
pub fn valid_parabolic(gens: &[u32], n: usize) -> bool {
    gens.windows(2).all(|w| w[0] < w[1])
        && gens.iter().all(|&i| i >= 1 && (i as usize) < n)
}

/// Longest element w_I of the parabolic subgroup W_I of S_n, where I is a
/// sorted set of generator indices. Each maximal run of consecutive indices
/// [lo..hi] contributes the order reversal of positions lo..hi+1.
pub fn longest_element(gens: &[u32], n: usize) -> Permutation {
    assert!(valid_parabolic(gens, n), "invalid parabolic set {:?} for S_{}", gens, n);
    let mut images: Vec<u32> = (1..=n as u32).collect();
    let mut b = 0;
    while b < gens.len() {
        let mut e = b;
        while e + 1 < gens.len() && gens[e + 1] == gens[e] + 1 {
            e += 1;
        }
        let (lo, hi) = (gens[b], gens[e]);
        // reverse positions lo ..= hi+1
        images[lo as usize - 1..=hi as usize].reverse();
        b = e + 1;
    }
    Permutation { images }
}

/// True iff w is the minimal-length representative of its coset w W_I,
/// i.e. w has no right descent in I.
pub fn is_min_coset_rep(w: &Permutation, gens: &[u32]) -> bool {
    assert!(valid_parabolic(gens, w.rank()));
    gens.iter().all(|&i| !w.right_descent(i))
}

/// Splits w as w' * u with w' minimal in w W_I and u in W_I; returns (w', u).
pub fn coset_decompose(w: &Permutation, gens: &[u32]) -> (Permutation, Permutation) {
    assert!(valid_parabolic(gens, w.rank()));
    let n = w.rank();
    let mut rep = w.clone();
    let mut tail = Permutation::identity(n);
    loop {
        match gens.iter().find(|&&i| rep.right_descent(i)) {
            Some(&i) => {
                rep = rep.mul_simple_right(i);
                // s_i moves to the front of the tail
                tail = Permutation::simple(i, n).compose(&tail);
            }
            None => return (rep, tail),
        }
    }
}
