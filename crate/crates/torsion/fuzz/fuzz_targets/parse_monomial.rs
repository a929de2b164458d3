#![no_main]

use libfuzzer_sys::fuzz_target;
use torsion::search::parse_monomial;

fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let n = usize::from(head % 8) + 1;
    let Ok(s) = std::str::from_utf8(rest) else { return };
    if let Ok(exps) = parse_monomial(s, n) {
        assert_eq!(exps.len(), n, "exponent vector length is n");
        // a parsed monomial re-renders into a parseable equivalent
        let rendered: Vec<String> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| format!("x{}^{}", i + 1, e))
            .collect();
        if !rendered.is_empty() {
            assert_eq!(parse_monomial(&rendered.join("*"), n).unwrap(), exps);
        }
    }
});
