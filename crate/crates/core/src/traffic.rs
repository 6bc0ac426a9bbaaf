//! Constant-bit-rate traffic sources.

use crate::routing::NodeId;

/// One CBR flow: fixed-size packets from `src` to `dst` at `rate_pps`,
/// starting at `start_s` and stopping strictly before `stop_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CbrFlow {
    pub src: NodeId,
    pub dst: NodeId,
    pub rate_pps: f64,
    pub start_s: f64,
    pub stop_s: f64,
    pub deadline_s: f64,
}

/// Send instants for a flow: `start + k/rate` for `k = 0, 1, …` while
/// strictly before `stop`.
pub fn cbr_send_times(flow: &CbrFlow) -> Vec<f64> {
    let mut times = Vec::new();
    if flow.rate_pps <= 0.0 {
        return times;
    }
    let mut k = 0u64;
    loop {
        let t = flow.start_s + k as f64 / flow.rate_pps;
        if t >= flow.stop_s {
            break;
        }
        times.push(t);
        k += 1;
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(rate: f64, start: f64, stop: f64) -> CbrFlow {
        CbrFlow { src: 0, dst: 9, rate_pps: rate, start_s: start, stop_s: stop, deadline_s: 15.0 }
    }

    #[test]
    fn ten_per_second_over_one_second() {
        let times = cbr_send_times(&flow(10.0, 0.0, 1.0));
        assert_eq!(times.len(), 10);
        assert_eq!(times[0], 0.0);
        assert_eq!(times[9], 0.9);
        assert!(times.iter().all(|&t| t < 1.0), "stop is exclusive");
    }

    #[test]
    fn send_at_stop_instant_is_excluded() {
        // 2.0 lands exactly on stop and must not be generated.
        let times = cbr_send_times(&flow(0.5, 0.0, 2.0));
        assert_eq!(times, vec![0.0]);
    }

    #[test]
    fn degenerate_windows_produce_nothing() {
        assert!(cbr_send_times(&flow(10.0, 5.0, 5.0)).is_empty());
        assert!(cbr_send_times(&flow(0.0, 0.0, 10.0)).is_empty());
    }

    #[test]
    fn offset_start_shifts_the_schedule() {
        let times = cbr_send_times(&flow(4.0, 2.0, 3.0));
        assert_eq!(times, vec![2.0, 2.25, 2.5, 2.75]);
    }
}
