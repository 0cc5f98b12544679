#![no_main]
use latwalk::output::{read_coincidences, read_momentum, read_positions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = read_positions(s);
        let _ = read_momentum(s);
        let _ = read_coincidences(s);
    }
});
