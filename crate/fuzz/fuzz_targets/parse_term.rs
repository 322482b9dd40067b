#![no_main]

use libfuzzer_sys::fuzz_target;
use partlat::Term;

fuzz_target!(|data: &[u8]| {
    let Some((&arity, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let arity = usize::from(arity % 16) + 1;
    if let Ok(t) = Term::parse(text, arity) {
        let printed = t.to_sexpr();
        let again = Term::parse(&printed, arity).expect("printed term parses");
        assert_eq!(again.to_sexpr(), printed);
        let _ = t.occurrences();
    }
});
