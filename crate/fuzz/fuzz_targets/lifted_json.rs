#![no_main]

use fraclift::lifted::LiftedSeq;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(r) = LiftedSeq::from_json(text) else { return };
    let back = LiftedSeq::from_json(&r.to_json()).expect("own output decodes");
    assert_eq!(back.offset(), r.offset());
    let _ = r.shift(0.5).project();
});
