#![no_main]

use correg_cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_json(text) {
        let back = ExperimentConfig::from_json(&cfg.to_json()).expect("valid config re-parses");
        assert_eq!(back, cfg);
    }
});
