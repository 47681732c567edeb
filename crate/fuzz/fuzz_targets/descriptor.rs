#![no_main]

use disperse::Descriptor;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = text.parse::<Descriptor>() {
        assert_eq!(d.to_string().parse::<Descriptor>().ok(), Some(d));
    }
});
