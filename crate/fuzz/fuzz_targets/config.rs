#![no_main]

use disperse::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = text.parse::<RunConfig>() {
        // Anything accepted must survive its own serialization.
        let again: RunConfig = config.to_toml().parse().expect("resolved config reparses");
        assert_eq!(again, config);
    }
});
