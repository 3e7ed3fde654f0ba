use crate::model::{LinkId, NodeId, ObjectId};

/// Simulated time in integer nanoseconds.
pub type SimTime = u64;

pub fn to_sim_time(seconds: f64) -> SimTime {
    (seconds * 1e9).round() as SimTime
}

pub fn to_seconds(t: SimTime) -> f64 {
    t as f64 * 1e-9
}

/// Serialization time of `bits` on a link of `capacity_bps`, rounded up.
pub fn transmission_time(bits: u64, capacity_bps: f64) -> SimTime {
    ((bits as f64 * 1e9) / capacity_bps).ceil() as SimTime
}

/// Where an Interest came from, and so where its Data must go.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    /// The local application that issued the request.
    Local(u64),
    /// The link the Interest arrived on; Data leaves on its reverse.
    Link(LinkId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PacketKind {
    Interest,
    Data,
}

impl PacketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Interest => "interest",
            PacketKind::Data => "data",
        }
    }
}

/// One packet movement, as recorded in the trace. `via` is `None` when a
/// Data packet is handed to the local application.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PacketEvent {
    pub kind: PacketKind,
    pub object: ObjectId,
    pub chunk: u32,
    pub node: NodeId,
    pub via: Option<LinkId>,
    pub time: SimTime,
    pub request: u64,
}
