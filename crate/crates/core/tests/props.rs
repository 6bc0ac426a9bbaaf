//! Cross-module properties that need the public API or a whole run:
//! scheduler ordering under shuffled insertion, and flood termination
//! observed from the trace of real runs.

use std::collections::HashSet;

use manet_sim::engine::Scheduler;
use manet_sim::trace::{PacketType, TraceKind};
use manet_sim::{run_scenario, Scenario};
use proptest::prelude::*;

fn small() -> Scenario {
    Scenario {
        name: "props-small".to_string(),
        area_width_m: 600.0,
        area_height_m: 400.0,
        n_smh: 5,
        n_lmh: 5,
        duration_s: 20.0,
        ..Scenario::default()
    }
}

proptest! {
    /// Processing order is a function of (fire_time, seq) alone: inserting
    /// the same distinct-time events in any order pops them in time order.
    #[test]
    fn shuffled_insertion_pops_in_time_order(
        ticks in proptest::collection::btree_set(1u32..100_000, 1..60),
        shuffled in any::<u64>(),
    ) {
        let times: Vec<f64> = ticks.iter().map(|&t| f64::from(t) * 1e-3).collect();
        let mut permuted = times.clone();
        // Fisher–Yates off the proptest-provided seed keeps the case shrinkable.
        let mut state = shuffled;
        for i in (1..permuted.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            permuted.swap(i, j);
        }

        let run = |order: &[f64]| {
            let mut s: Scheduler<f64> = Scheduler::new(0);
            for &t in order {
                s.schedule(t, t).unwrap();
            }
            let mut fired = Vec::new();
            s.run_until(1_000.0, |_, t, _| fired.push(t));
            fired
        };
        let in_order = run(&times);
        let out_of_order = run(&permuted);
        prop_assert_eq!(&in_order, &out_of_order);
        let mut sorted = times.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(in_order, sorted);
    }
}

/// Every discovery flood terminates: a node re-broadcasts a given route
/// request at most once, so one flood never exceeds one transmission per
/// node.
#[test]
fn rreq_floods_rebroadcast_at_most_once_per_node() {
    for policy in ["dsr", "eddsr"] {
        for seed in 1..=3 {
            let mut scn = small();
            scn.policy = policy.to_string();
            let out = run_scenario(&scn, seed).expect("small run");
            let n_total = scn.n_smh + scn.n_lmh;
            let mut seen: HashSet<(i64, usize)> = HashSet::new();
            let mut per_packet: std::collections::HashMap<i64, usize> = Default::default();
            for ev in &out.trace.events {
                if ev.ptype != Some(PacketType::Rreq) || ev.kind != TraceKind::Fwd {
                    continue;
                }
                assert!(
                    seen.insert((ev.packet, ev.node)),
                    "{policy} seed {seed}: node {} re-broadcast request {} twice",
                    ev.node,
                    ev.packet
                );
                *per_packet.entry(ev.packet).or_default() += 1;
            }
            assert!(
                !per_packet.is_empty(),
                "{policy} seed {seed}: no discovery traffic at all"
            );
            for (pkt, count) in per_packet {
                assert!(
                    count <= n_total,
                    "{policy} seed {seed}: request {pkt} transmitted {count} times"
                );
            }
        }
    }
}
