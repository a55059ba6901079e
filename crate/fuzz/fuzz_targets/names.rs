#![no_main]

use correg::covariance::CovModel;
use correg::estimators::EstimatorKind;
use correg::kernels::KernelFamily;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(k) = text.parse::<KernelFamily>() {
        assert_eq!(k.to_string().parse::<KernelFamily>().ok(), Some(k));
    }
    if let Ok(e) = text.parse::<EstimatorKind>() {
        assert_eq!(e.to_string().parse::<EstimatorKind>().ok(), Some(e));
    }
    if let Ok(m) = text.parse::<CovModel>() {
        assert_eq!(m.to_string().parse::<CovModel>().ok(), Some(m));
    }
});
