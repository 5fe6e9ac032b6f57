#![no_main]

use libfuzzer_sys::fuzz_target;
fuzz_target!(|data: &[u8]| {
    // first byte: number of records; then (offset, days) pairs of u16
    let Some((&n, rest)) = data.split_first() else { return };
    let n = usize::from(n % 8);
    if rest.len() < 4 * n {
        return;
    }
    let (head, bytes) = rest.split_at(4 * n);
    let layout: Vec<(usize, usize)> = head
        .chunks_exact(4)
        .map(|c| (usize::from(u16::from_le_bytes([c[0], c[1]])), usize::from(u16::from_le_bytes([c[2], c[3]]))))
        .collect();
    if let Ok(records) = wikitopics::ingest::store::decode_chunk(bytes, &layout) {
        for (r, (_, days)) in records.iter().zip(&layout) {
            assert_eq!(r.len(), *days);
        }
    }
});
