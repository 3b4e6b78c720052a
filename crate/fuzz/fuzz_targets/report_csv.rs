#![no_main]

use libfuzzer_sys::fuzz_target;
use pps_relax::scenario::{report_table, Table};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = Table::parse(text) {
        let _ = report_table(&table);
    }
});
