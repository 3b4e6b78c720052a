#![no_main]

use libfuzzer_sys::fuzz_target;
use pps_relax::spectra::{parse_spectrum, write_spectrum};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((spectrum, header)) = parse_spectrum(text) {
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &spectrum, &header).unwrap();
        let (again, _) = parse_spectrum(std::str::from_utf8(&buf).unwrap()).expect("round trip");
        assert_eq!(again.len(), spectrum.len());
    }
});
