#![no_main]

use lccs_lsh::index::StoredIndex;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = StoredIndex::decode(data);
});
