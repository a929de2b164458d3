#![no_main]

use libfuzzer_sys::fuzz_target;
use num_traits::One;
use torsion::zaremba::{gamma_product, lr_word_string, parse_lr_word};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(word) = parse_lr_word(s) {
        // accepted words are exactly the trimmed letters, case folded
        assert_eq!(lr_word_string(&word), s.trim().to_uppercase());
        // both generators are unimodular, so every product is
        if !word.is_empty() && word.len() <= 64 {
            assert!(gamma_product(&word).det().is_one());
        }
    }
});
