#![no_main]

use hyperspike::experiments::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text, None) {
            let again = parse_config(&cfg.echo(), None).expect("echo must parse");
            assert_eq!(again.echo(), cfg.echo());
        }
    }
});
