#![no_main]

use libfuzzer_sys::fuzz_target;
use partlat::auth::Commitment;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = text.parse::<Commitment>() {
        let printed = c.to_string();
        let again: Commitment = printed.parse().expect("printed record parses");
        assert_eq!(again.to_string(), printed);
    }
});
