//! Run trace: one line per packet event or node death.
//!
//! The format is fixed and byte-stable so that identical runs produce
//! identical files:
//!
//! ```text
//! <time:fixed 6 decimals> <KIND> n=<node> p=<pkt-id> t=<CBR|RREQ|RREP|RERR> r=<reason>
//! ```
//!
//! Kinds are `SEND` (packet created), `FWD` (a node put it on the air),
//! `RECV` (accepted at its final destination), `DROP` (discarded, with a
//! reason), and `DIE` (a node ran out of energy; `p=-1 t=NONE`). The trace
//! is a complete record: every generated payload packet ends in exactly one
//! `RECV` or `DROP`.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::routing::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Send,
    Recv,
    Fwd,
    Drop,
    Die,
}

impl TraceKind {
    fn as_str(self) -> &'static str {
        match self {
            TraceKind::Send => "SEND",
            TraceKind::Recv => "RECV",
            TraceKind::Fwd => "FWD",
            TraceKind::Drop => "DROP",
            TraceKind::Die => "DIE",
        }
    }
}

/// Packet type tag in the trace; `None` only on DIE lines (printed `NONE`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketType {
    Cbr,
    Rreq,
    Rrep,
    Rerr,
}

impl PacketType {
    fn as_str(self) -> &'static str {
        match self {
            PacketType::Cbr => "CBR",
            PacketType::Rreq => "RREQ",
            PacketType::Rrep => "RREP",
            PacketType::Rerr => "RERR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    None,
    QueueFull,
    Expired,
    Dead,
    NoRoute,
    BrokenLink,
    Duplicate,
}

impl DropReason {
    fn as_str(self) -> &'static str {
        match self {
            DropReason::None => "none",
            DropReason::QueueFull => "queue_full",
            DropReason::Expired => "expired",
            DropReason::Dead => "dead",
            DropReason::NoRoute => "no_route",
            DropReason::BrokenLink => "broken_link",
            DropReason::Duplicate => "duplicate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: TraceKind,
    pub node: NodeId,
    /// Packet id, or -1 on DIE lines.
    pub packet: i64,
    pub ptype: Option<PacketType>,
    pub reason: DropReason,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.6} {} n={} p={} t={} r={}",
            self.time,
            self.kind.as_str(),
            self.node,
            self.packet,
            self.ptype.map_or("NONE", PacketType::as_str),
            self.reason.as_str(),
        )
    }
}

#[derive(Debug, Error)]
pub enum TraceParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
}

impl TraceEvent {
    pub fn parse(s: &str, line_no: usize) -> Result<TraceEvent, TraceParseError> {
        let bad = |msg: &str| TraceParseError::Malformed {
            line: line_no,
            msg: msg.to_string(),
        };
        let mut parts = s.split(' ');
        let time: f64 = parts
            .next()
            .ok_or_else(|| bad("missing time"))?
            .parse()
            .map_err(|_| bad("unparseable time"))?;
        let kind = match parts.next().ok_or_else(|| bad("missing kind"))? {
            "SEND" => TraceKind::Send,
            "RECV" => TraceKind::Recv,
            "FWD" => TraceKind::Fwd,
            "DROP" => TraceKind::Drop,
            "DIE" => TraceKind::Die,
            other => return Err(bad(&format!("unknown kind {other:?}"))),
        };
        let mut field = |prefix: &str| -> Result<String, TraceParseError> {
            let tok = parts.next().ok_or_else(|| bad(&format!("missing {prefix} field")))?;
            tok.strip_prefix(prefix)
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("expected {prefix}<value>, got {tok:?}")))
        };
        let node: NodeId = field("n=")?.parse().map_err(|_| bad("unparseable node"))?;
        let packet: i64 = field("p=")?.parse().map_err(|_| bad("unparseable packet id"))?;
        let ptype = match field("t=")?.as_str() {
            "CBR" => Some(PacketType::Cbr),
            "RREQ" => Some(PacketType::Rreq),
            "RREP" => Some(PacketType::Rrep),
            "RERR" => Some(PacketType::Rerr),
            "NONE" => None,
            other => return Err(bad(&format!("unknown packet type {other:?}"))),
        };
        let reason = match field("r=")?.as_str() {
            "none" => DropReason::None,
            "queue_full" => DropReason::QueueFull,
            "expired" => DropReason::Expired,
            "dead" => DropReason::Dead,
            "no_route" => DropReason::NoRoute,
            "broken_link" => DropReason::BrokenLink,
            "duplicate" => DropReason::Duplicate,
            other => return Err(bad(&format!("unknown reason {other:?}"))),
        };
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        Ok(TraceEvent {
            time,
            kind,
            node,
            packet,
            ptype,
            reason,
        })
    }
}

/// In-memory trace, appended in event order (times never decrease).
#[derive(Debug, Default)]
pub struct TraceLog {
    pub events: Vec<TraceEvent>,
}

impl TraceLog {
    pub fn push(&mut self, ev: TraceEvent) {
        debug_assert!(
            self.events.last().is_none_or(|last| ev.time >= last.time),
            "trace must be emitted in time order"
        );
        self.events.push(ev);
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for ev in &self.events {
            writeln!(w, "{ev}")?;
        }
        w.flush()
    }

    pub fn read_from(path: &Path) -> Result<TraceLog, TraceParseError> {
        let reader = BufReader::new(File::open(path)?);
        let mut events = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            events.push(TraceEvent::parse(&line, i + 1)?);
        }
        Ok(TraceLog { events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_render_in_the_fixed_format() {
        let ev = TraceEvent {
            time: 1.2345678,
            kind: TraceKind::Send,
            node: 0,
            packet: 17,
            ptype: Some(PacketType::Cbr),
            reason: DropReason::None,
        };
        assert_eq!(ev.to_string(), "1.234568 SEND n=0 p=17 t=CBR r=none");

        let drop = TraceEvent {
            time: 2.0,
            kind: TraceKind::Drop,
            node: 5,
            packet: 99,
            ptype: Some(PacketType::Rrep),
            reason: DropReason::Expired,
        };
        assert_eq!(drop.to_string(), "2.000000 DROP n=5 p=99 t=RREP r=expired");

        let die = TraceEvent {
            time: 431.25,
            kind: TraceKind::Die,
            node: 12,
            packet: -1,
            ptype: None,
            reason: DropReason::None,
        };
        assert_eq!(die.to_string(), "431.250000 DIE n=12 p=-1 t=NONE r=none");
    }

    #[test]
    fn parse_round_trips_every_variant() {
        let samples = [
            "0.000000 SEND n=0 p=1 t=CBR r=none",
            "0.105000 FWD n=3 p=1 t=CBR r=none",
            "0.110000 RECV n=9 p=1 t=CBR r=none",
            "0.200000 DROP n=4 p=2 t=CBR r=queue_full",
            "0.300000 DROP n=4 p=3 t=RREQ r=duplicate",
            "0.400000 DROP n=4 p=4 t=CBR r=expired",
            "0.500000 DROP n=4 p=5 t=CBR r=dead",
            "0.600000 DROP n=0 p=6 t=CBR r=no_route",
            "0.700000 DROP n=4 p=7 t=CBR r=broken_link",
            "0.800000 SEND n=2 p=8 t=RERR r=none",
            "9.125000 DIE n=7 p=-1 t=NONE r=none",
        ];
        for (i, s) in samples.iter().enumerate() {
            let ev = TraceEvent::parse(s, i + 1).unwrap();
            assert_eq!(&ev.to_string(), s, "round trip");
        }
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(TraceEvent::parse("", 1).is_err());
        assert!(TraceEvent::parse("1.0 NOPE n=0 p=1 t=CBR r=none", 1).is_err());
        assert!(TraceEvent::parse("1.0 SEND n=0 p=1 t=UDP r=none", 1).is_err());
        assert!(TraceEvent::parse("1.0 SEND n=0 p=1 t=CBR r=because", 1).is_err());
        assert!(TraceEvent::parse("1.0 SEND p=1 n=0 t=CBR r=none", 1).is_err(), "field order is fixed");
        assert!(TraceEvent::parse("1.0 SEND n=0 p=1 t=CBR r=none extra", 1).is_err());
    }

    #[test]
    fn file_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.trc");
        let mut log = TraceLog::default();
        log.push(TraceEvent {
            time: 0.0,
            kind: TraceKind::Send,
            node: 0,
            packet: 1,
            ptype: Some(PacketType::Cbr),
            reason: DropReason::None,
        });
        log.push(TraceEvent {
            time: 0.5,
            kind: TraceKind::Die,
            node: 3,
            packet: -1,
            ptype: None,
            reason: DropReason::None,
        });
        log.write_to(&path).unwrap();
        let back = TraceLog::read_from(&path).unwrap();
        assert_eq!(back.events, log.events);
    }
}
