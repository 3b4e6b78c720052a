#![no_main]

use libfuzzer_sys::fuzz_target;
use pps_relax::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((scenario, _)) = Scenario::from_json_str(text) {
        // anything accepted must survive a round trip
        let (back, _) = Scenario::from_json_str(&scenario.to_json_string()).expect("round trip");
        assert_eq!(back.rates, scenario.rates);
        let _ = scenario.times();
    }
});
