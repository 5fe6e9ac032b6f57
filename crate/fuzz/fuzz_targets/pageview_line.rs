#![no_main]

use libfuzzer_sys::fuzz_target;
fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        let _ = wikitopics::ingest::parse_pageview_line(line);
        let _ = wikitopics::ingest::pageviews::hour_file_stamp(line);
    }
});
