#![no_main]

use lccs_lsh::bench::{parse_fvecs, write_fvecs_to};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(points) = parse_fvecs(data) {
        // Accepted input is canonical: writing it back gives the same bytes.
        let mut out = Vec::new();
        write_fvecs_to(&points, &mut out).unwrap();
        assert_eq!(out, data);
    }
});
