#![no_main]

use libfuzzer_sys::fuzz_target;
use torsion::construct::OperatorData;

fuzz_target!(|data: &[u8]| {
    let Ok(parsed) = serde_json::from_slice::<OperatorData>(data) else { return };
    // deserialization enforces the structural contract, so accepted data
    // must serialize and read back unchanged
    let json = serde_json::to_string(&parsed).expect("accepted data serializes");
    let back: OperatorData = serde_json::from_str(&json).expect("round-trips");
    assert_eq!(back, parsed);
    // the validators must never panic, whatever their verdict
    let _ = parsed.validate();
    if parsed.n <= 64 {
        let _ = parsed.is_normalized();
    }
});
