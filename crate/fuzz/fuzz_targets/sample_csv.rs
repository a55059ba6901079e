#![no_main]

use correg::gp_sim::SampleSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = SampleSet::read_csv(data) {
        assert_eq!(s.y.ncols(), s.design.n());
        let mut buf = Vec::new();
        s.write_csv(&mut buf).expect("in-memory write");
        let back = SampleSet::read_csv(buf.as_slice()).expect("written data re-parses");
        assert_eq!(back.design.points(), s.design.points());
        assert_eq!(back.y, s.y);
    }
});
