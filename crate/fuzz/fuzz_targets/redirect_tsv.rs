#![no_main]

use libfuzzer_sys::fuzz_target;
use wikitopics::ingest::RedirectMap;

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = RedirectMap::parse_tsv(data) {
        for (alias, target) in map.iter() {
            assert_eq!(map.resolve(target), target);
            assert_eq!(map.resolve(alias), target);
        }
    }
});
