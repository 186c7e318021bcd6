//! Allocation and collection timing, the end-of-run report, and the CSV
//! row format used by benchmark sweeps.

use std::fmt::Write as _;

/// Accumulated nanosecond timings. Allocation time includes any collection
/// the allocation triggered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TimingStats {
    pub alloc_total_ns: u64,
    pub alloc_count: u64,
    pub gc_total_ns: u64,
    pub gc_count: u64,
}

impl TimingStats {
    #[inline]
    pub fn record_allocation(&mut self, duration_ns: u64) {
        self.alloc_total_ns += duration_ns;
        self.alloc_count += 1;
    }

    #[inline]
    pub fn record_collection(&mut self, duration_ns: u64) {
        self.gc_total_ns += duration_ns;
        self.gc_count += 1;
    }

    pub fn avg_alloc_ns(&self) -> u64 {
        self.alloc_total_ns
            .checked_div(self.alloc_count)
            .unwrap_or(0)
    }

    pub fn avg_gc_ns(&self) -> u64 {
        self.gc_total_ns.checked_div(self.gc_count).unwrap_or(0)
    }
}

pub const REPORT_LABELS: [&str; 6] = [
    "ALLOC TIME",
    "TOTAL ALLOCATIONS",
    "AVG ALLOCATION TIME",
    "GC TIME",
    "TOTAL GC COLLECTIONS",
    "AVG GC TIME",
];

/// The six-line summary printed at the end of a run.
pub fn render_report(stats: &TimingStats) -> String {
    let values = [
        stats.alloc_total_ns,
        stats.alloc_count,
        stats.avg_alloc_ns(),
        stats.gc_total_ns,
        stats.gc_count,
        stats.avg_gc_ns(),
    ];
    let mut out = String::new();
    for (label, value) in REPORT_LABELS.iter().zip(values) {
        writeln!(out, "{label}: {value}").unwrap();
    }
    out
}

pub const CSV_HEADER: &str =
    "heap_bytes,collector,avg_alloc_ns,avg_gc_ns,gc_count,alloc_count,status";

/// One benchmark sweep result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub heap_bytes: usize,
    pub collector: String,
    pub stats: TimingStats,
    pub status: BenchStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchStatus {
    Ok,
    OutOfMemory,
    Error,
}

impl BenchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchStatus::Ok => "ok",
            BenchStatus::OutOfMemory => "out_of_memory",
            BenchStatus::Error => "error",
        }
    }
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.heap_bytes,
            self.collector,
            self.stats.avg_alloc_ns(),
            self.stats.avg_gc_ns(),
            self.stats.gc_count,
            self.stats.alloc_count,
            self.status.as_str()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn averages_are_integer_means() {
        let mut s = TimingStats::default();
        s.record_allocation(500);
        s.record_allocation(700);
        assert_eq!(s.avg_alloc_ns(), 600);
        assert_eq!(s.avg_gc_ns(), 0);
    }

    #[test]
    fn report_block_layout() {
        let s = TimingStats {
            alloc_total_ns: 158859467,
            alloc_count: 259529,
            gc_total_ns: 121797803,
            gc_count: 959,
        };
        assert_eq!(
            render_report(&s),
            "ALLOC TIME: 158859467\n\
             TOTAL ALLOCATIONS: 259529\n\
             AVG ALLOCATION TIME: 612\n\
             GC TIME: 121797803\n\
             TOTAL GC COLLECTIONS: 959\n\
             AVG GC TIME: 127005\n"
        );
    }

    #[test]
    fn empty_report_is_all_zero() {
        let r = render_report(&TimingStats::default());
        assert_eq!(r.lines().count(), 6);
        assert!(r.lines().all(|l| l.ends_with(": 0")));
    }

    #[test]
    fn csv_row_layout() {
        let row = BenchRow {
            heap_bytes: 8192,
            collector: "cheney".into(),
            stats: TimingStats {
                alloc_total_ns: 100,
                alloc_count: 10,
                gc_total_ns: 30,
                gc_count: 3,
            },
            status: BenchStatus::Ok,
        };
        assert_eq!(row.to_csv(), "8192,cheney,10,10,3,10,ok");
        assert_eq!(
            CSV_HEADER.split(',').count(),
            row.to_csv().split(',').count()
        );
    }

    proptest! {
        #[test]
        fn report_labels_and_floor_averages(
            at in 0u64..1 << 40, ac in 0u64..1 << 20, gt in 0u64..1 << 40, gc in 0u64..1 << 20
        ) {
            let s = TimingStats { alloc_total_ns: at, alloc_count: ac, gc_total_ns: gt, gc_count: gc };
            let report = render_report(&s);
            let lines: Vec<&str> = report.lines().collect();
            prop_assert_eq!(lines.len(), 6);
            let mut values = Vec::new();
            for (line, label) in lines.iter().zip(REPORT_LABELS) {
                let (l, v) = line.split_once(": ").unwrap();
                prop_assert_eq!(l, label);
                values.push(v.parse::<u64>().unwrap());
            }
            let floor = |t: u64, c: u64| t.checked_div(c).unwrap_or(0);
            prop_assert_eq!(values, vec![at, ac, floor(at, ac), gt, gc, floor(gt, gc)]);
        }
    }
}
