use asep_core::distribution::{cdf_contour, cdf_series_partial, CdfOptions, SeriesOptions};
use asep_core::simulator::{empirical_cdf, SimConfig};
use asep_core::ModelParams;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn contour_is_bitwise_stable_across_pools() {
    let mp = ModelParams::new(0.3).unwrap();
    let run = || cdf_contour(&mp, 3, -1, 2.0, &CdfOptions::default()).unwrap();
    let a = in_pool(1, run);
    let b = in_pool(4, run);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.err_estimate.to_bits(), b.err_estimate.to_bits());
}

#[test]
fn series_is_bitwise_stable_across_pools() {
    let mp = ModelParams::new(0.3).unwrap();
    let opts = SeriesOptions { nodes_per_dim: Some(24), radius: None };
    let run = || cdf_series_partial(&mp, 1, 0, 0.5, 3, &opts).unwrap().value;
    assert_eq!(in_pool(1, run).to_bits(), in_pool(3, run).to_bits());
}

#[test]
fn simulation_is_bitwise_stable_across_pools() {
    let mp = ModelParams::new(0.3).unwrap();
    let cfg = SimConfig::new(mp, 2, 2.0, 5_000, 99).unwrap();
    let run = || empirical_cdf(&cfg, &[-2, 0, 2]).unwrap();
    let a = in_pool(1, run);
    let b = in_pool(4, run);
    assert_eq!(a.p_hat, b.p_hat);
}
