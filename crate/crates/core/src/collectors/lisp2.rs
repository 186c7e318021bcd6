//! Lisp-2 sliding compaction: tri-color mark, then three linear passes
//! that compute new addresses, fix up references, and slide live objects
//! toward the arena base in their original order.

use std::ops::Range;

use super::mark::mark;
use super::{CollectionStats, Collector, CollectorKind};
use crate::heap::{Arena, Color, HeapAddress, RootRegistry, SLOT_BYTES};

#[derive(Clone, Debug)]
pub struct Lisp2Collector {
    capacity: usize,
    cursor: usize,
}

impl Lisp2Collector {
    pub fn new(capacity: usize) -> Self {
        Lisp2Collector {
            capacity,
            cursor: 0,
        }
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    fn live(arena: &Arena, region: Range<usize>) -> impl Iterator<Item = HeapAddress> + '_ {
        arena
            .objects_in(region)
            .filter(|a| arena.header(*a).color == Color::Black)
    }

    /// Pass 1: assign each live object its post-slide address.
    fn compute_addresses(&self, arena: &mut Arena) -> usize {
        let live: Vec<HeapAddress> = Self::live(arena, 0..self.cursor).collect();
        let mut free = 0;
        for addr in live {
            let header = arena.header_mut(addr);
            header.new_address = HeapAddress::new(free);
            free += header.size as usize;
        }
        free
    }

    /// Pass 2: point every reference and root at the new addresses.
    fn update_references(&self, arena: &mut Arena, roots: &mut RootRegistry) {
        for slot in roots.slots_mut() {
            if !slot.is_nil() {
                *slot = arena.header(*slot).new_address;
            }
        }
        let live: Vec<HeapAddress> = Self::live(arena, 0..self.cursor).collect();
        for addr in live {
            for i in 0..arena.ref_count(addr) {
                let child = arena.get_ref(addr, i);
                if !child.is_nil() {
                    let target = arena.header(child).new_address;
                    arena.set_ref(addr, i, target);
                }
            }
        }
    }

    /// Pass 3: slide live objects down in ascending order.
    fn relocate(&self, arena: &mut Arena) -> usize {
        let mut moved = 0;
        let mut pos = 0;
        while pos < self.cursor {
            let addr = HeapAddress::new(pos);
            let header = *arena.header(addr);
            let size = header.size as usize;
            if header.color == Color::Black {
                let dest = header.new_address;
                let h = arena.header_mut(addr);
                h.color = Color::White;
                h.new_address = HeapAddress::NIL;
                if dest != addr {
                    arena.copy_slots(pos, dest.index(), size);
                    moved += 1;
                }
            }
            pos += size;
        }
        moved
    }
}

impl Collector for Lisp2Collector {
    fn kind(&self) -> CollectorKind {
        CollectorKind::Lisp2
    }

    #[inline]
    fn try_allocate(&mut self, size: usize) -> Option<HeapAddress> {
        if self.cursor + size <= self.capacity {
            let addr = HeapAddress::new(self.cursor);
            self.cursor += size;
            Some(addr)
        } else {
            None
        }
    }

    fn collect(&mut self, arena: &mut Arena, roots: &mut RootRegistry) -> CollectionStats {
        let used = self.cursor;
        let marked = mark(arena, 0..self.cursor, roots);
        let new_end = self.compute_addresses(arena);
        self.update_references(arena, roots);
        let moved = self.relocate(arena);
        self.cursor = new_end;
        CollectionStats {
            objects_visited: marked,
            objects_moved: moved,
            live_slots: new_end,
            bytes_reclaimed: (used - new_end) * SLOT_BYTES,
            ..Default::default()
        }
    }

    fn object_region(&self) -> Range<usize> {
        0..self.cursor
    }

    fn mutator_capacity(&self) -> usize {
        self.capacity
    }

    fn check(&self, arena: &Arena) -> Result<(), String> {
        let mut pos = 0;
        for addr in arena.objects_in(0..self.cursor) {
            if addr.index() != pos {
                return Err(format!("gap in compacted heap before {addr}"));
            }
            pos += arena.header(addr).size as usize;
        }
        Ok(())
    }
}
