#![no_main]

use libfuzzer_sys::fuzz_target;
use wikitopics::labels::{agreement_summary, LabelFile};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = LabelFile::from_json(text) {
            let again = LabelFile::from_json(&file.to_json()).expect("round trip");
            assert_eq!(again, file);
            let _ = agreement_summary(&file.labels);
        }
    }
});
