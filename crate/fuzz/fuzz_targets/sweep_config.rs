#![no_main]

use lccs_lsh::bench::SweepConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = SweepConfig::from_toml_str(text) {
            config.validate().unwrap();
        }
    }
});
