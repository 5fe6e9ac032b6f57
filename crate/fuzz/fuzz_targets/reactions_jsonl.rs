#![no_main]

use libfuzzer_sys::fuzz_target;
fuzz_target!(|data: &[u8]| {
    let _ = wikitopics::reactions::read_reactions_jsonl(data);
});
