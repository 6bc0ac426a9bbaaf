//! Performance metrics, computed from a run's trace and energy ledger.
//!
//! Every metric is a pure function of the emitted trace (plus the energy
//! ledger for the energy figure), so a report can be recomputed from a trace
//! file and must agree with the in-memory one.

use std::collections::HashMap;

use thiserror::Error;

use crate::trace::{DropReason, PacketType, TraceEvent, TraceKind};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    /// No payload packets were generated, so ratios are undefined.
    #[error("no payload packets were generated")]
    ZeroGenerated,
}

/// First-death times; a `None` means no such node died and the run length
/// stands in (censored observation).
#[derive(Debug, Clone, PartialEq)]
pub struct Lifetime {
    pub smh_s: f64,
    pub smh_censored: bool,
    pub any_s: f64,
    pub any_censored: bool,
}

/// The five headline metrics plus their underlying counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub generated: u64,
    pub delivered: u64,
    pub delivered_in_time: u64,
    pub delivery_ratio: f64,
    pub in_time_ratio: f64,
    /// Mean end-to-end delay over delivered packets; absent when nothing
    /// was delivered.
    pub mean_delay_s: Option<f64>,
    pub lifetime: Lifetime,
    /// Total consumed energy over delivered payload bits; absent when
    /// nothing was delivered.
    pub energy_per_bit_j: Option<f64>,
    pub consumed_j: f64,
}

/// Run facts the trace alone does not carry.
#[derive(Debug, Clone)]
pub struct MetricsContext {
    /// Deadline the in-time ratio is judged against, seconds.
    pub d_k_s: f64,
    /// Nodes `0..n_smh` are the small mobile hosts.
    pub n_smh: usize,
    /// Run length, seconds (stands in for censored lifetimes).
    pub run_length_s: f64,
    /// Payload packet size, bytes.
    pub packet_size_bytes: u32,
    /// Total energy drawn across all nodes, joules (from the ledger).
    pub consumed_j: f64,
}

/// `(packet, sent_at, received_at)` for one delivered payload packet.
type Delivery = (i64, f64, f64);

/// Per-packet send/receive times for payload traffic.
fn payload_times(trace: &[TraceEvent]) -> (HashMap<i64, f64>, Vec<Delivery>) {
    let mut sent: HashMap<i64, f64> = HashMap::new();
    let mut delivered: Vec<Delivery> = Vec::new();
    for ev in trace {
        if ev.ptype != Some(PacketType::Cbr) {
            continue;
        }
        match ev.kind {
            TraceKind::Send => {
                sent.insert(ev.packet, ev.time);
            }
            TraceKind::Recv => {
                let t_send = sent
                    .get(&ev.packet)
                    .copied()
                    .expect("RECV without SEND in trace");
                delivered.push((ev.packet, t_send, ev.time));
            }
            _ => {}
        }
    }
    (sent, delivered)
}

/// Fraction of generated payload packets that reached their destination.
pub fn delivery_ratio(trace: &[TraceEvent]) -> Result<f64, MetricsError> {
    let (sent, delivered) = payload_times(trace);
    if sent.is_empty() {
        return Err(MetricsError::ZeroGenerated);
    }
    Ok(delivered.len() as f64 / sent.len() as f64)
}

/// Fraction of generated payload packets delivered within `d_k_s` of their
/// generation. The denominator is everything generated, so this is never
/// above the delivery ratio.
pub fn in_time_ratio(trace: &[TraceEvent], d_k_s: f64) -> Result<f64, MetricsError> {
    let (sent, delivered) = payload_times(trace);
    if sent.is_empty() {
        return Err(MetricsError::ZeroGenerated);
    }
    let in_time = delivered
        .iter()
        .filter(|&&(_, t_send, t_recv)| t_recv - t_send <= d_k_s)
        .count();
    Ok(in_time as f64 / sent.len() as f64)
}

/// Mean end-to-end delay over delivered payload packets; `None` when
/// nothing was delivered (absent, not zero).
pub fn mean_e2e_delay(trace: &[TraceEvent]) -> Option<f64> {
    let (_, delivered) = payload_times(trace);
    if delivered.is_empty() {
        return None;
    }
    let sum: f64 = delivered.iter().map(|&(_, s, r)| r - s).sum();
    Some(sum / delivered.len() as f64)
}

/// Time of the first node death, for the small-host class and overall.
/// Runs where no death occurred report the run length, flagged censored.
pub fn network_lifetime(trace: &[TraceEvent], n_smh: usize, run_length_s: f64) -> Lifetime {
    let mut smh: Option<f64> = None;
    let mut any: Option<f64> = None;
    for ev in trace {
        if ev.kind != TraceKind::Die {
            continue;
        }
        if any.is_none() {
            any = Some(ev.time);
        }
        if ev.node < n_smh && smh.is_none() {
            smh = Some(ev.time);
        }
    }
    Lifetime {
        smh_s: smh.unwrap_or(run_length_s),
        smh_censored: smh.is_none(),
        any_s: any.unwrap_or(run_length_s),
        any_censored: any.is_none(),
    }
}

/// Total consumed energy (control traffic included) per delivered payload
/// bit; `None` when nothing was delivered.
pub fn energy_per_bit(consumed_j: f64, delivered: u64, packet_size_bytes: u32) -> Option<f64> {
    if delivered == 0 {
        return None;
    }
    Some(consumed_j / (delivered as f64 * f64::from(packet_size_bytes) * 8.0))
}

/// Assemble the full report.
pub fn report(trace: &[TraceEvent], ctx: &MetricsContext) -> Result<MetricsReport, MetricsError> {
    let (sent, delivered) = payload_times(trace);
    if sent.is_empty() {
        return Err(MetricsError::ZeroGenerated);
    }
    let generated = sent.len() as u64;
    let in_time = delivered
        .iter()
        .filter(|&&(_, s, r)| r - s <= ctx.d_k_s)
        .count() as u64;
    let mean_delay_s = if delivered.is_empty() {
        None
    } else {
        Some(delivered.iter().map(|&(_, s, r)| r - s).sum::<f64>() / delivered.len() as f64)
    };
    Ok(MetricsReport {
        generated,
        delivered: delivered.len() as u64,
        delivered_in_time: in_time,
        delivery_ratio: delivered.len() as f64 / generated as f64,
        in_time_ratio: in_time as f64 / generated as f64,
        mean_delay_s,
        lifetime: network_lifetime(trace, ctx.n_smh, ctx.run_length_s),
        energy_per_bit_j: energy_per_bit(ctx.consumed_j, delivered.len() as u64, ctx.packet_size_bytes),
        consumed_j: ctx.consumed_j,
    })
}

/// Count of payload packets whose terminal drop had the given reason.
pub fn drop_count(trace: &[TraceEvent], reason: DropReason) -> u64 {
    trace
        .iter()
        .filter(|ev| {
            ev.kind == TraceKind::Drop && ev.ptype == Some(PacketType::Cbr) && ev.reason == reason
        })
        .count() as u64
}
