//! Fuzz the density-matrix JSON decoder and the physical-state validation
//! that runs when a dump is rehydrated.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(dump) = kitten_core::emit::DmDump::from_json_str(text) else {
        return;
    };
    if dump.dim > 256 {
        // Validation walks all dim^2 entries; cap it so the fuzzer spends
        // its budget on parser states instead of giant matrices.
        return;
    }
    let _ = dump.to_state();
});
