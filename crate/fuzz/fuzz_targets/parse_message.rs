#![no_main]

use libfuzzer_sys::fuzz_target;
use partlat::auth::Message;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = text.parse::<Message>() {
        let again: Message = m.to_string().parse().expect("printed message parses");
        assert_eq!(again, m);
    }
});
