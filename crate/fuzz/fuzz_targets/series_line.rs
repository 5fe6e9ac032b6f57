#![no_main]

use libfuzzer_sys::fuzz_target;
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((_, values)) = wikitopics::network::parse_series_line(text, 61) {
            assert!(values.is_empty() || values.len() == 61);
        }
    }
});
