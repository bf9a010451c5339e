#![no_main]

use dynwalk_cli::descriptor::ScheduleDescriptor;
use dynwalk_cli::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = ExperimentSpec::parse(text, "<fuzz>") {
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(ExperimentSpec::parse(&back, "<fuzz>").unwrap(), spec);
        if let Some(v) = spec.parameters.get("schedule") {
            let _ = serde_json::from_value::<ScheduleDescriptor>(v.clone());
        }
    }
});
