#![no_main]

use libfuzzer_sys::fuzz_target;
use wikitopics::correlation::{parse_correlation_line, TemporalEdgeWeights};

fuzz_target!(|data: &[u8]| {
    let labels = ["a", "b", "c"].map(String::from);
    let _ = TemporalEdgeWeights::read_tsv(data, &labels, 7, 5);
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_correlation_line(text);
    }
});
