#![no_main]

use libfuzzer_sys::fuzz_target;
use partlat::PartitionTuple;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = text.parse::<PartitionTuple>() {
        let again = PartitionTuple::parse_with_shape(&t.to_string(), t.shape()).expect("printed tuple parses");
        assert_eq!(again, t);
        assert_eq!(t.distance(&t).unwrap(), 0);
    }
});
