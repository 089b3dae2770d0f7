//! Exact accounting of model evaluations, the cost currency of every attack.

/// Counts model forward and backward evaluations.
///
/// Counters only ever increase. Concurrent workers keep private ledgers and
/// [`QueryLedger::merge`] them afterwards, which is sum-exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryLedger {
    forwards: u64,
    backwards: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forwards(&self) -> u64 {
        self.forwards
    }

    pub fn backwards(&self) -> u64 {
        self.backwards
    }

    pub fn charge_forwards(&mut self, n: u64) {
        self.forwards += n;
    }

    pub fn charge_backwards(&mut self, n: u64) {
        self.backwards += n;
    }

    pub fn merge(&mut self, other: &QueryLedger) {
        self.forwards += other.forwards;
        self.backwards += other.backwards;
    }

    /// Counter movement relative to an earlier snapshot.
    pub fn since(&self, snapshot: &QueryLedger) -> QueryLedger {
        QueryLedger {
            forwards: self.forwards - snapshot.forwards,
            backwards: self.backwards - snapshot.backwards,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_is_sum_exact() {
        let mut a = QueryLedger::new();
        a.charge_forwards(3);
        a.charge_backwards(1);
        let mut b = QueryLedger::new();
        b.charge_forwards(10);
        a.merge(&b);
        assert_eq!(a.forwards(), 13);
        assert_eq!(a.backwards(), 1);
    }

    #[test]
    fn since_reports_deltas() {
        let mut ledger = QueryLedger::new();
        ledger.charge_forwards(5);
        let snap = ledger;
        ledger.charge_forwards(2);
        ledger.charge_backwards(7);
        let delta = ledger.since(&snap);
        assert_eq!(delta.forwards(), 2);
        assert_eq!(delta.backwards(), 7);
    }
}
