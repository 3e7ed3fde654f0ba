use std::io::Write;

use super::VipLedger;
use crate::model::Topology;

/// Per-slot ledger dump as CSV rows `slot,node,object,V`. Zero counters are
/// skipped.
pub struct LedgerDump<W: Write> {
    out: W,
}

impl<W: Write> LedgerDump<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "slot,node,object,V")?;
        Ok(Self { out })
    }

    pub fn record(&mut self, ledger: &VipLedger, topology: &Topology) -> std::io::Result<()> {
        for n in topology.nodes() {
            for (k, &v) in ledger.row(n).iter().enumerate() {
                if v != 0.0 {
                    writeln!(self.out, "{},{},{},{}", ledger.slot(), topology.label(n), k + 1, v)?;
                }
            }
        }
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
