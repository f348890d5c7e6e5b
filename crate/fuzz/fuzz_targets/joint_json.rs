#![no_main]

use libfuzzer_sys::fuzz_target;
use markov_lumping::io::parse_joint_json;
use markov_lumping::jointsource::{conditional_entropy_given_z, marginal_entropy_x};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_joint_json(text) {
        assert!(conditional_entropy_given_z(&q) <= marginal_entropy_x(&q) + 1e-9);
    }
});
