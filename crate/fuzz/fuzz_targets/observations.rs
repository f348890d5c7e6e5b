#![no_main]

use libfuzzer_sys::fuzz_target;
use markov_lumping::io::parse_observations;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_observations(text);
});
