#![no_main]

use libfuzzer_sys::fuzz_target;
use markov_lumping::graph::confusion_graph;
use markov_lumping::io::parse_channel_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = parse_channel_json(text) {
        if w.rows() <= 256 {
            let _ = confusion_graph(&w, 1e-12);
        }
    }
});
