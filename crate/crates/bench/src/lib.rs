//! Shared helpers for the benchmark targets.

use mfchaos_core::cloud::PointCloud;
use mfchaos_core::rng::{StreamDomain, StreamRng};
use rand::Rng;

pub fn random_cloud(m: usize, d: usize, seed: u64) -> PointCloud {
    let mut rng = StreamRng::new(seed, StreamDomain::Generic, 100, 0);
    let data: Vec<f64> = (0..m * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    PointCloud::new(d, data).expect("nonempty")
}
