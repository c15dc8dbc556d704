#![no_main]

use lccs_lsh::bench::{parse_ivecs, write_ivecs_to};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_ivecs(data) {
        let mut out = Vec::new();
        write_ivecs_to(&rows, &mut out).unwrap();
        assert_eq!(out, data);
    }
});
