//! Cheney's semispace copying collector.
//!
//! The arena is split into two equal halves. The mutator bump-allocates in
//! to-space; a collection swaps the roles, evacuates the roots' referents,
//! then scans the copies breadth-first, evacuating whatever they reference.
//! An evacuated object's old header is overwritten with a forwarding
//! address so shared structure and cycles are copied exactly once.

use std::ops::Range;

use super::{CollectionStats, Collector, CollectorKind};
use crate::heap::{Arena, HeapAddress, RootRegistry, Slot, SLOT_BYTES};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SemispaceState {
    pub from_base: usize,
    pub to_base: usize,
    pub alloc_cursor: usize,
    pub scan_cursor: usize,
}

#[derive(Clone, Debug)]
pub struct CheneyCollector {
    half: usize,
    state: SemispaceState,
}

impl CheneyCollector {
    pub fn new(capacity: usize) -> Self {
        let half = capacity / 2;
        CheneyCollector {
            half,
            state: SemispaceState {
                from_base: half,
                to_base: 0,
                alloc_cursor: 0,
                scan_cursor: 0,
            },
        }
    }

    pub fn state(&self) -> SemispaceState {
        self.state
    }

    pub fn semispace_slots(&self) -> usize {
        self.half
    }

    fn in_from_space(&self, addr: HeapAddress) -> bool {
        let i = addr.index();
        i >= self.state.from_base && i < self.state.from_base + self.half
    }

    /// Returns the to-space address of `addr`, copying it on first visit.
    fn evacuate(
        &mut self,
        arena: &mut Arena,
        addr: HeapAddress,
        copied: &mut usize,
    ) -> HeapAddress {
        if addr.is_nil() {
            return addr;
        }
        debug_assert!(self.in_from_space(addr), "{addr} is not in from-space");
        match *arena.slot(addr.index()) {
            Slot::Forwarded { to, .. } => to,
            Slot::Object { header, .. } => {
                let size = header.size as usize;
                let to = self.state.alloc_cursor;
                arena.copy_slots(addr.index(), to, size);
                self.state.alloc_cursor += size;
                *arena.slot_mut(addr.index()) = Slot::Forwarded {
                    size: header.size,
                    to: HeapAddress::new(to),
                };
                *copied += 1;
                HeapAddress::new(to)
            }
            other => panic!("evacuating {addr}: not an object ({other:?})"),
        }
    }
}

impl Collector for CheneyCollector {
    fn kind(&self) -> CollectorKind {
        CollectorKind::Cheney
    }

    #[inline]
    fn try_allocate(&mut self, size: usize) -> Option<HeapAddress> {
        let cursor = self.state.alloc_cursor;
        if cursor + size <= self.state.to_base + self.half {
            self.state.alloc_cursor = cursor + size;
            Some(HeapAddress::new(cursor))
        } else {
            None
        }
    }

    fn collect(&mut self, arena: &mut Arena, roots: &mut RootRegistry) -> CollectionStats {
        let used = self.state.alloc_cursor - self.state.to_base;
        std::mem::swap(&mut self.state.from_base, &mut self.state.to_base);
        self.state.alloc_cursor = self.state.to_base;
        self.state.scan_cursor = self.state.to_base;

        let mut copied = 0;
        for slot in roots.slots_mut() {
            *slot = self.evacuate(arena, *slot, &mut copied);
        }
        while self.state.scan_cursor < self.state.alloc_cursor {
            let obj = HeapAddress::new(self.state.scan_cursor);
            for i in 0..arena.ref_count(obj) {
                let child = arena.get_ref(obj, i);
                let moved = self.evacuate(arena, child, &mut copied);
                arena.set_ref(obj, i, moved);
            }
            self.state.scan_cursor += arena.header(obj).size as usize;
        }

        let live = self.state.alloc_cursor - self.state.to_base;
        CollectionStats {
            objects_visited: copied,
            objects_moved: copied,
            live_slots: live,
            bytes_reclaimed: (used - live) * SLOT_BYTES,
            ..Default::default()
        }
    }

    fn object_region(&self) -> Range<usize> {
        self.state.to_base..self.state.alloc_cursor
    }

    fn mutator_capacity(&self) -> usize {
        self.half
    }

    fn check(&self, arena: &Arena) -> Result<(), String> {
        let s = self.state;
        if s.from_base.abs_diff(s.to_base) != self.half {
            return Err(format!("semispaces not disjoint halves: {s:?}"));
        }
        // Allocated objects tile to-space from its base with no gaps.
        let mut pos = s.to_base;
        for addr in arena.objects_in(s.to_base..s.alloc_cursor) {
            if addr.index() != pos {
                return Err(format!("gap in to-space before {addr}"));
            }
            pos += arena.header(addr).size as usize;
        }
        if pos != s.alloc_cursor {
            return Err(format!(
                "allocation cursor {} != end of objects {pos}",
                s.alloc_cursor
            ));
        }
        Ok(())
    }
}
