#![no_main]

use libfuzzer_sys::fuzz_target;
use partlat::auth::Secret;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = text.parse::<Secret>() {
        let again: Secret = s.to_file_string().parse().expect("printed secret parses");
        assert_eq!(again, s);
    }
});
