#![no_main]

use libfuzzer_sys::fuzz_target;
use partlat::Partition;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<Partition>() {
        let again: Partition = p.to_string().parse().expect("printed partition parses");
        assert_eq!(again, p);
        assert_eq!(p.meet(&p).unwrap(), p);
    }
});
