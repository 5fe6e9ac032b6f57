#![no_main]

use libfuzzer_sys::fuzz_target;
use chrono::NaiveDate;
use wikitopics::ingest::RedirectMap;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let date = NaiveDate::from_ymd_opt(2018, 11, 30).unwrap();
        let parsed = wikitopics::ingest::parse_event_records(text, date, &RedirectMap::new());
        for r in &parsed.records {
            assert!(!r.core_articles.is_empty());
        }
        let _ = wikitopics::ingest::events::event_file_date(text);
    }
});

