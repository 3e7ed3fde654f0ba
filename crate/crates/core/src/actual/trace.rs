use std::collections::HashMap;
use std::io::{self, Write};

use flate2::write::GzEncoder;
use flate2::Compression;

use super::packet::{to_seconds, PacketEvent, PacketKind};
use crate::model::{LinkId, Topology};

/// Writes `time,kind,node,object,chunk,link` rows, gzip-compressed. Node
/// and object columns use external labels; `link` is `from-to` or empty.
pub fn write_trace<W: Write>(out: W, events: &[PacketEvent], topology: &Topology) -> io::Result<W> {
    let mut gz = GzEncoder::new(out, Compression::default());
    writeln!(gz, "time,kind,node,object,chunk,link")?;
    for e in events {
        let link = e.via.map_or(String::new(), |l| {
            let l = topology.link(l);
            format!("{}-{}", topology.label(l.from), topology.label(l.to))
        });
        writeln!(
            gz,
            "{:.9},{},{},{},{},{}",
            to_seconds(e.time),
            e.kind.as_str(),
            topology.label(e.node),
            e.object.label(),
            e.chunk,
            link
        )?;
    }
    gz.finish()
}

/// Requests whose Data did not retrace their Interests: for each request,
/// the multiset of links crossed by Interests must equal the multiset of
/// reversed links crossed by Data.
pub fn reverse_path_mismatches(events: &[PacketEvent], topology: &Topology) -> Vec<u64> {
    let mut balance: HashMap<(u64, LinkId), i64> = HashMap::new();
    for e in events {
        let Some(l) = e.via else { continue };
        match e.kind {
            PacketKind::Interest => *balance.entry((e.request, l)).or_default() += 1,
            PacketKind::Data => *balance.entry((e.request, topology.reverse(l))).or_default() -= 1,
        }
    }
    let mut bad: Vec<u64> = balance.into_iter().filter(|(_, v)| *v != 0).map(|((r, _), _)| r).collect();
    bad.sort_unstable();
    bad.dedup();
    bad
}
