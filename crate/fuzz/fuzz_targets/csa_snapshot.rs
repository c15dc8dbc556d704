#![no_main]

use lccs_lsh::csa::CircularShiftArray;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(csa) = CircularShiftArray::from_snapshot(data) {
        csa.validate_links().unwrap();
        assert_eq!(csa.to_snapshot(), data);
    }
});
