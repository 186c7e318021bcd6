//! Non-moving tri-color mark-sweep over a first-fit free list.

use std::ops::Range;

use super::free_list::{Extent, FreeList};
use super::mark::{check_tricolor_invariant, mark};
use super::{CollectionStats, Collector, CollectorKind};
use crate::heap::{Arena, Color, HeapAddress, RootRegistry, Slot, SLOT_BYTES};

#[derive(Clone, Debug)]
pub struct MarkSweepCollector {
    capacity: usize,
    free: FreeList,
    check_marking: bool,
}

impl MarkSweepCollector {
    pub fn new(capacity: usize) -> Self {
        let mut free = FreeList::new();
        free.push_back(Extent {
            addr: 0,
            size: capacity,
        });
        MarkSweepCollector {
            capacity,
            free,
            check_marking: false,
        }
    }

    /// Checks the tri-color invariant between mark and sweep.
    pub fn with_marking_check(mut self, on: bool) -> Self {
        self.check_marking = on;
        self
    }

    pub fn free_list(&self) -> &FreeList {
        &self.free
    }

    /// Linear pass over every slot: reclaims white objects and rebuilds the
    /// free list, merging each run of dead and free slots as it goes.
    fn sweep(&mut self, arena: &mut Arena, stats: &mut CollectionStats) {
        self.free.clear();
        let mut run_start: Option<usize> = None;
        let mut pos = 0;
        while pos < self.capacity {
            match *arena.slot(pos) {
                Slot::Object { header, .. } if header.color == Color::Black => {
                    if let Some(start) = run_start.take() {
                        self.free.push_back(Extent {
                            addr: start,
                            size: pos - start,
                        });
                    }
                    let size = header.size as usize;
                    stats.live_slots += size;
                    stats.slots_swept += size;
                    pos += size;
                }
                Slot::Object { header, .. } => {
                    run_start.get_or_insert(pos);
                    let size = header.size as usize;
                    for i in pos..pos + size {
                        *arena.slot_mut(i) = Slot::Free;
                    }
                    stats.bytes_reclaimed += size * SLOT_BYTES;
                    stats.slots_swept += size;
                    pos += size;
                }
                Slot::Free => {
                    run_start.get_or_insert(pos);
                    stats.slots_swept += 1;
                    pos += 1;
                }
                other => panic!("sweep hit {other:?} at slot {pos}"),
            }
        }
        if let Some(start) = run_start {
            self.free.push_back(Extent {
                addr: start,
                size: self.capacity - start,
            });
        }
    }
}

impl Collector for MarkSweepCollector {
    fn kind(&self) -> CollectorKind {
        CollectorKind::MarkSweep
    }

    #[inline]
    fn try_allocate(&mut self, size: usize) -> Option<HeapAddress> {
        self.free.allocate(size).ok()
    }

    fn collect(&mut self, arena: &mut Arena, roots: &mut RootRegistry) -> CollectionStats {
        let mut stats = CollectionStats {
            objects_visited: mark(arena, 0..self.capacity, roots),
            ..Default::default()
        };
        if self.check_marking {
            if let Err(msg) = check_tricolor_invariant(arena, 0..self.capacity) {
                panic!("after marking: {msg}");
            }
        }
        self.sweep(arena, &mut stats);
        stats
    }

    fn object_region(&self) -> Range<usize> {
        0..self.capacity
    }

    fn mutator_capacity(&self) -> usize {
        self.capacity
    }

    fn check(&self, arena: &Arena) -> Result<(), String> {
        self.free.check()?;
        let mut allocated = 0;
        for addr in arena.objects_in(0..self.capacity) {
            allocated += arena.header(addr).size as usize;
        }
        for e in self.free.extents() {
            for i in e.addr..e.end() {
                if *arena.slot(i) != Slot::Free {
                    return Err(format!("free extent {e:?} overlaps an object at slot {i}"));
                }
            }
        }
        let free = self.free.total_slots();
        if allocated + free != self.capacity {
            return Err(format!(
                "conservation broken: {allocated} allocated + {free} free != {} capacity",
                self.capacity
            ));
        }
        Ok(())
    }
}
