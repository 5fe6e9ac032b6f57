#![no_main]

use libfuzzer_sys::fuzz_target;
use wikitopics::graph::{parse_edge_line, WeightedGraph};

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = WeightedGraph::read_edgelist(data, true) {
        assert!(g.edges().iter().all(|e| e.weight.is_finite()));
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_edge_line(text);
    }
});
