#![no_main]

use libfuzzer_sys::fuzz_target;
use wikitopics::community::{parse_partition_line, Partition};
use wikitopics::graph::GraphBuilder;

fuzz_target!(|data: &[u8]| {
    let graph = GraphBuilder::with_nodes(false, ["a", "b", "c", "d"].map(String::from)).build();
    if let Ok(p) = Partition::read_tsv(data, &graph) {
        assert_eq!(p.len(), 4);
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_partition_line(text);
    }
});
