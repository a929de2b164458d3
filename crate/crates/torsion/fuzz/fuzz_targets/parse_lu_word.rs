#![no_main]

use libfuzzer_sys::fuzz_target;
use num_traits::One;
use torsion::search::{lu_word_matrix, parse_lu_word, Lu};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(word) = parse_lu_word(s) {
        // accepted words are exactly the trimmed letters, case folded
        let rendered: String = word.iter().map(|&c| if c == Lu::L { 'L' } else { 'U' }).collect();
        assert_eq!(rendered, s.trim().to_uppercase());
        // both letter matrices are unimodular, so every product is
        if !word.is_empty() && word.len() <= 64 {
            let m = lu_word_matrix(&word);
            let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
            assert!(det.is_one(), "letter products stay unimodular");
        }
    }
});
