#![no_main]

use disperse::field::parse_field_csv;
use disperse::table::Table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_field_csv(text);
    if let Ok(table) = Table::parse(text) {
        let _ = Table::parse(&table.to_csv());
    }
});
