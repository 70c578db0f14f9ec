#![no_main]

use fraclift::parser::{parse, to_series};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&order, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let Ok(e) = parse(text) else { return };
    for basepoint in [0.0, 1.0, -2.5] {
        if let Ok(s) = to_series(&e, basepoint, usize::from(order % 24)) {
            let _ = s.to_json();
        }
    }
});
