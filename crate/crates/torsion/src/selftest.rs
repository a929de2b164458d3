//! A compact invariant suite spanning every module, runnable from the CLI.
//! Each check is exact; the first failure aborts with a description. These
//! are smoke-depth versions of the crate's test suites, kept fast enough to
//! run on every deployment.

use num_bigint::BigInt;
use num_traits::Signed;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::construct::{certify, evaluate_structured, operator_value};
use crate::nilhecke::NilHeckeElement;
use crate::poly::{IntPolynomial, Mono};
use crate::schubert::{operator_matrix_on, OperatorStep, VarEnd};
use crate::search::{factorize, fibonacci_data, is_prime, lu_word_matrix, op_set, parse_lu_word, ulu_entry_data};
use crate::sym::{longest_element, word_to_perm, Permutation};
use crate::zaremba::{gamma_product, parse_lr_word, representable_set, representable_set_bfs, torsion_bridge};

type CheckResult = Result<(), String>;

fn fail(msg: impl Into<String>) -> CheckResult {
    Err(msg.into())
}

fn random_poly(n: usize, max_deg: u32, rng: &mut StdRng) -> IntPolynomial {
    let terms: Vec<(Mono, BigInt)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            let exps: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=max_deg)).collect();
            (Mono(exps), BigInt::from(rng.gen_range(-4i64..=4)))
        })
        .collect();
    IntPolynomial::from_terms(n, terms)
}

fn check_sym() -> CheckResult {
    for n in 2..=5usize {
        let gens: Vec<u32> = (1..n as u32).collect();
        let w0 = longest_element(&gens, n);
        if w0.length() != (n * (n - 1) / 2) as u32 {
            return fail("longest element length");
        }
        let word = w0.staircase_word();
        if !crate::sym::is_reduced(&word, n) {
            return fail("staircase word not reduced");
        }
        if word_to_perm(&word, n) != w0 {
            return fail("staircase word does not rebuild w_0");
        }
    }
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(2..=5);
        let word: Vec<u32> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(1..n as u32)).collect();
        let w = word_to_perm(&word, n);
        let (rep, tail) = crate::sym::coset_decompose(&w, &[1]);
        if rep.compose(&tail) != w || rep.length() + tail.length() != w.length() {
            return fail("coset decomposition does not multiply back");
        }
    }
    Ok(())
}

fn check_poly() -> CheckResult {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..60 {
        let n = rng.gen_range(2..=5);
        let f = random_poly(n, 3, &mut rng);
        let g = random_poly(n, 3, &mut rng);
        let i = rng.gen_range(1..n as u32);
        // nil: d_i d_i = 0
        if !f.divided_difference(i).divided_difference(i).is_zero() {
            return fail("divided difference is not nil");
        }
        // Leibniz: d_i(fg) = d_i(f) g + s_i(f) d_i(g)
        let lhs = f.mul(&g).divided_difference(i);
        let rhs = f
            .divided_difference(i)
            .mul(&g)
            .add(&f.act(&Permutation::simple(i, n)).mul(&g.divided_difference(i)));
        if lhs != rhs {
            return fail("Leibniz rule");
        }
        // braid: d_i d_{i+1} d_i = d_{i+1} d_i d_{i+1}
        if i + 1 < n as u32 {
            let a = f.demazure_word(&[i, i + 1, i]);
            let b = f.demazure_word(&[i + 1, i, i + 1]);
            if a != b {
                return fail("braid relation");
            }
        }
    }
    Ok(())
}

fn check_nilhecke() -> CheckResult {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..25 {
        let n = rng.gen_range(2..=4);
        let rand_el = |rng: &mut StdRng| {
            let word: Vec<u32> =
                (0..rng.gen_range(0..3)).map(|_| rng.gen_range(1..n as u32)).collect();
            NilHeckeElement::d_of(&word_to_perm(&word, n))
                .mul_poly_left(&random_poly(n, 2, rng))
        };
        let (a, b, c) = (rand_el(&mut rng), rand_el(&mut rng), rand_el(&mut rng));
        let left = NilHeckeElement::multiply(&NilHeckeElement::multiply(&a, &b), &c);
        let right = NilHeckeElement::multiply(&a, &NilHeckeElement::multiply(&b, &c));
        if left != right {
            return fail("nil Hecke multiplication not associative");
        }
        let p = random_poly(n, 2, &mut rng);
        if left.act_on_poly(&p) != a.act_on_poly(&b.act_on_poly(&c.act_on_poly(&p))) {
            return fail("module action incompatible with multiplication");
        }
    }
    Ok(())
}

fn check_schubert() -> CheckResult {
    let n = 4;
    let basis = [Permutation::simple(1, n), Permutation::simple(3, n)];
    let step = |end, power, word: &[u32]| OperatorStep { end, power, word: word.to_vec() };
    let fib = [step(VarEnd::First, 1, &[1]), step(VarEnd::Last, 2, &[2, 3])];
    let lower = [step(VarEnd::First, 1, &[1]), step(VarEnd::First, 2, &[2, 1])];
    let upper = [step(VarEnd::Last, 1, &[3]), step(VarEnd::Last, 2, &[2, 3])];
    let expect = |m: Vec<Vec<BigInt>>, e: [[i64; 2]; 2]| {
        m.iter().flatten().cloned().collect::<Vec<_>>()
            == e.iter().flatten().map(|&x| BigInt::from(x)).collect::<Vec<_>>()
    };
    let f = operator_matrix_on(&basis, &fib).map_err(|e| e.to_string())?;
    if !expect(f, [[1, 1], [1, 0]]) {
        return fail("Fibonacci operator matrix");
    }
    let l = operator_matrix_on(&basis, &lower).map_err(|e| e.to_string())?;
    if !expect(l, [[1, 0], [1, 1]]) {
        return fail("lower operator matrix");
    }
    let u = operator_matrix_on(&basis, &upper).map_err(|e| e.to_string())?;
    if !expect(u, [[-1, -1], [0, -1]]) {
        return fail("upper operator matrix");
    }
    Ok(())
}

fn check_construct() -> CheckResult {
    // rank-2 seed certificate
    let d = crate::construct::OperatorData {
        n: 2,
        items: vec![crate::construct::OperatorItem {
            w: Permutation::simple(1, 2),
            a: 1,
            b: 0,
        }],
    };
    let cert = certify(&d).map_err(|e| e.to_string())?;
    if cert.value != "-1" || cert.word != vec![2, 1, 2] {
        return fail("rank-2 certificate");
    }
    // the worked rank-14 instance: value 3, reduced word, both evaluators
    let data = fibonacci_data(3);
    let cert = certify(&data).map_err(|e| e.to_string())?;
    if cert.ambient_rank != 14 || cert.value_bigint().abs() != BigInt::from(3) {
        return fail("worked example certificate");
    }
    if !crate::sym::is_reduced(&cert.word, 14) {
        return fail("worked example word not reduced");
    }
    if evaluate_structured(&cert.data).map_err(|e| e.to_string())?
        != operator_value(&cert.data).map_err(|e| e.to_string())?
    {
        return fail("worked example evaluators disagree");
    }
    Ok(())
}

fn check_search() -> CheckResult {
    let fibs = [1i64, 1, 2, 3, 5, 8, 13, 21];
    for i in 1..=6u32 {
        let v = operator_value(&fibonacci_data(i)).map_err(|e| e.to_string())?;
        if v != BigInt::from(fibs[i as usize]) {
            return fail(format!("Fibonacci value at i = {}", i));
        }
    }
    if !is_prime(&BigInt::from(470858183u64)) {
        return fail("primality witness");
    }
    let f = factorize(&BigInt::from(34)).map_err(|e| e.to_string())?;
    if f.prime_factors != vec![BigInt::from(2), BigInt::from(17)] {
        return fail("factorization of 34");
    }
    if op_set("paper8", 5).map_err(|e| e.to_string())?.len() != 8 {
        return fail("rank-5 operator set");
    }
    // operator values match matrix entries on short words
    for word in ["L", "U", "LU", "UL", "LUL"] {
        let w = parse_lu_word(word).map_err(|e| e.to_string())?;
        let mat = lu_word_matrix(&w);
        for row in 0..2 {
            for col in 0..2 {
                let (data, sign) = ulu_entry_data(&w, row, col);
                let v = operator_value(&data).map_err(|e| e.to_string())?;
                let signed = if sign >= 0 { v.clone() } else { -v };
                if signed != mat[row][col] {
                    return fail(format!("operator entry mismatch on {}", word));
                }
            }
        }
    }
    Ok(())
}

fn check_zaremba() -> CheckResult {
    let set = representable_set(1, 100, 1).map_err(|e| e.to_string())?;
    if set.into_iter().collect::<Vec<_>>() != vec![2, 5, 13, 34, 89] {
        return fail("quotient-1 representable set");
    }
    for a_max in 1..=4 {
        let dfs = representable_set(a_max, 300, 1).map_err(|e| e.to_string())?;
        let bfs = representable_set_bfs(a_max, 300).map_err(|e| e.to_string())?;
        if dfs != bfs {
            return fail("enumeration oracle disagreement");
        }
    }
    let word = parse_lr_word("LR").map_err(|e| e.to_string())?;
    if gamma_product(&word).e[0][0] != BigInt::from(2) {
        return fail("two-letter product");
    }
    let report = torsion_bridge(&word).map_err(|e| e.to_string())?;
    if report.ambient_rank != 11 {
        return fail("bridge rank");
    }
    for e in &report.entries {
        if e.certificate.value_bigint().abs().to_string() != e.entry {
            return fail("bridge entry magnitude");
        }
    }
    Ok(())
}

/// Runs every module's invariant suite; returns one line per suite, or the
/// first failure message.
pub fn run_selftest() -> Result<Vec<String>, String> {
    let suites: [(&str, fn() -> CheckResult); 7] = [
        ("sym", check_sym),
        ("poly", check_poly),
        ("nilhecke", check_nilhecke),
        ("schubert", check_schubert),
        ("construct", check_construct),
        ("search", check_search),
        ("zaremba", check_zaremba),
    ];
    let mut lines = Vec::new();
    for (name, f) in suites {
        f().map_err(|msg| format!("selftest {}: FAIL: {}", name, msg))?;
        lines.push(format!("selftest {}: ok", name));
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        let lines = super::run_selftest().unwrap();
        assert_eq!(lines.len(), 7);
        assert!(lines.iter().all(|l| l.ends_with(": ok")));
    }
}
