//! Stop-the-world collectors behind one interface, plus the independent
//! reachability oracle used to check them.

mod cheney;
mod free_list;
mod lisp2;
mod mark;
mod mark_sweep;
mod oracle;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::heap::{Arena, HeapAddress, RootRegistry};

pub use cheney::CheneyCollector;
pub use free_list::{Extent, FreeList, NoFit};
pub use lisp2::Lisp2Collector;
pub use mark::{check_tricolor_invariant, mark};
pub use mark_sweep::MarkSweepCollector;
pub use oracle::reachable_set_oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollectorKind {
    MarkSweep,
    Cheney,
    Lisp2,
}

impl CollectorKind {
    pub const ALL: [CollectorKind; 3] = [
        CollectorKind::MarkSweep,
        CollectorKind::Cheney,
        CollectorKind::Lisp2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CollectorKind::MarkSweep => "mark-sweep",
            CollectorKind::Cheney => "cheney",
            CollectorKind::Lisp2 => "lisp2",
        }
    }
}

impl fmt::Display for CollectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CollectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CollectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown collector '{s}' (expected mark-sweep, cheney or lisp2)")
            })
    }
}

/// What one collection did.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CollectionStats {
    /// Live objects traced (mark) or copied (Cheney).
    pub objects_visited: usize,
    /// Slots examined by a linear sweep.
    pub slots_swept: usize,
    /// Objects whose address changed.
    pub objects_moved: usize,
    pub live_slots: usize,
    pub bytes_reclaimed: usize,
    pub pause_ns: u64,
}

/// A collection strategy owning its allocation policy.
pub trait Collector {
    fn kind(&self) -> CollectorKind;

    /// Reserves `size` contiguous slots without collecting.
    fn try_allocate(&mut self, size: usize) -> Option<HeapAddress>;

    /// Reclaims every object unreachable from `roots`, rewriting root
    /// slots if objects move.
    fn collect(&mut self, arena: &mut Arena, roots: &mut RootRegistry) -> CollectionStats;

    /// Arena range in which allocated objects currently live.
    fn object_region(&self) -> Range<usize>;

    fn mutator_capacity(&self) -> usize;

    /// Collector-specific consistency checks on top of the generic walk.
    fn check(&self, arena: &Arena) -> Result<(), String>;
}
