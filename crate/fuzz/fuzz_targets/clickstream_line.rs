#![no_main]

use libfuzzer_sys::fuzz_target;
use wikitopics::ingest::{parse_clickstream_line, Month, RedirectMap};

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        let month = Month::new(2018, 11).unwrap();
        if let Ok(Some(r)) = parse_clickstream_line(line, month, &RedirectMap::new()) {
            assert!(r.count > 10);
            assert_ne!(r.source, r.target);
        }
        let _ = Month::from_file_name(line);
    }
});
