#![no_main]

use libfuzzer_sys::fuzz_target;
use markov_lumping::chain::validate_chain;
use markov_lumping::io::{chain_to_json, parse_chain_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(chain) = parse_chain_json(text) {
        let _ = validate_chain(&chain.matrix);
        let again = parse_chain_json(&chain_to_json(&chain.matrix, chain.labels.as_deref()))
            .expect("serialized chain parses");
        assert_eq!(again.matrix, chain.matrix);
    }
});
