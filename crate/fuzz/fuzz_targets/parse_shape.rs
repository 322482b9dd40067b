#![no_main]

use libfuzzer_sys::fuzz_target;
use partlat::LatticeShape;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = text.parse::<LatticeShape>() {
        assert_eq!(s.to_string().parse::<LatticeShape>().unwrap(), s);
    }
});
