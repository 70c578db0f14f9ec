#![no_main]

use fraclift::parser::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse(text) {
        // printing must round trip whatever was accepted
        let printed = e.to_string();
        assert_eq!(parse(&printed).expect("printed form parses"), e, "{printed}");
    }
});
