#![no_main]

use libfuzzer_sys::fuzz_target;
use markov_lumping::io::parse_lumping_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_lumping_json(text) {
        assert!(g.n_out() <= g.n_in());
        assert_eq!(g.preimages().len(), g.n_out());
    }
});
