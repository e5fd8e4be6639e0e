//! Fuzz the TOML config parser and all resolver paths behind it.
//!
//! Every outcome must be a clean `Ok`/`Err` — panics, aborts, and hangs are
//! the bugs this target hunts.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = kitten_core::config::ConfigFile::from_toml_str(text) else {
        return;
    };
    let _ = cfg.resolve_experiment();
    let _ = cfg.resolve_detector();
    let _ = cfg.resolve_witness();
    let _ = cfg.resolve_sweep();
});
