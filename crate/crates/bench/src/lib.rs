//! Benchmark-only crate; see `benches/hot_paths.rs`.
//!
//! Helpers here build the fixtures the benchmarks time.

use manet_sim::routing::RouteCandidate;
use manet_sim::routing::NodeStatusStamp;
use manet_sim::{RngStream, Scenario};

/// Build `n` synthetic route candidates with plausible stamp values.
pub fn synthetic_candidates(n: usize, seed: u64) -> Vec<RouteCandidate> {
    let mut rng = RngStream::derive(seed, "bench/candidates");
    (0..n)
        .map(|i| {
            let hops = 2 + (rng.next_u64() % 5) as usize;
            let route: Vec<usize> = (0..=hops).map(|h| h * 100 + i).collect();
            let stamps = route[1..route.len() - 1]
                .iter()
                .map(|&node| NodeStatusStamp {
                    node,
                    d_i_m: rng.uniform_in(10.0, 250.0),
                    l_queue: (rng.next_u64() % 50) as u32,
                    e_remain_j: rng.uniform_in(0.5, 100.0),
                })
                .collect();
            RouteCandidate {
                route,
                stamps,
                emrp_stamps: Vec::new(),
                carried_c: 0.0,
                carried_c_delay: 0.0,
            }
        })
        .collect()
}

/// A small always-connected scenario for end-to-end timing.
pub fn small_scenario(policy: &str) -> Scenario {
    Scenario::parse_str(
        "bench",
        &format!(
            "\
area_width_m = 300
area_height_m = 300
n_smh = 5
n_lmh = 5
duration_s = 20
cbr_rate_pps = 5
policy = {policy}
"
        ),
    )
    .expect("bench scenario is valid")
}
