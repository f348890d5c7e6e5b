#![no_main]

use libfuzzer_sys::fuzz_target;
use markov_lumping::io::parse_chain_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(chain) = parse_chain_csv(text) {
        assert!(chain.matrix.n() >= 1);
    }
});
