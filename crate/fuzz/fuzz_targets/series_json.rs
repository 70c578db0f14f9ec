#![no_main]

use fraclift::rl::differintegrate;
use fraclift::series::GenSeries;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = GenSeries::from_json(text) else { return };
    // the canonical form drops the truncation order, nothing else
    let back = GenSeries::from_json(&f.to_json()).expect("own output decodes");
    assert_eq!(back.basepoint(), f.basepoint());
    assert_eq!(back.terms(), f.terms());
    let _ = differintegrate(&f, 0.5);
});
