//! Fixtures for the kernel benchmarks.

use carlitz::cinf::{default_den, sample_z, SamplePoint};
use carlitz::Field;

pub fn field(p: u32, e: u32) -> &'static Field {
    Field::get(p, e).expect("valid field")
}

/// The sample point used by the numeric benchmarks: z = θη, or θ^{3/2} for q = 2.
pub fn sample(f: &'static Field) -> SamplePoint {
    sample_z(f, default_den(f), 1).expect("sample point")
}
