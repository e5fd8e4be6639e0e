//! Fuzz the sweep CSV reader, which accepts files written by earlier runs
//! (and, by extension, hand-edited ones).

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = kitten_core::emit::parse_csv(data);
});
