//! Tri-color marking shared by the mark-sweep and Lisp-2 collectors.

use std::ops::Range;

use crate::heap::{Arena, Color, HeapAddress, RootRegistry, Slot};

/// Colors every object reachable from `roots` black and leaves the rest
/// white. Returns the number of objects blackened.
pub fn mark(arena: &mut Arena, region: Range<usize>, roots: &RootRegistry) -> usize {
    // Phase 1: clear every mark.
    let mut pos = region.start;
    while pos < region.end {
        match arena.slot_mut(pos) {
            Slot::Object { header, .. } => {
                header.color = Color::White;
                pos += header.size as usize;
            }
            _ => pos += 1,
        }
    }

    // Phase 2: the roots' referents form the initial gray set.
    let mut gray: Vec<HeapAddress> = Vec::with_capacity(64);
    for r in roots.iter() {
        shade(arena, r, &mut gray);
    }

    // Phase 3: pick a gray object, gray its referents, blacken it.
    let mut blackened = 0;
    while let Some(addr) = gray.pop() {
        for i in 0..arena.ref_count(addr) {
            let child = arena.get_ref(addr, i);
            shade(arena, child, &mut gray);
        }
        arena.header_mut(addr).color = Color::Black;
        blackened += 1;
    }
    blackened
}

#[inline]
fn shade(arena: &mut Arena, addr: HeapAddress, gray: &mut Vec<HeapAddress>) {
    if addr.is_nil() {
        return;
    }
    let header = arena.header_mut(addr);
    if header.color == Color::White {
        header.color = Color::Gray;
        gray.push(addr);
    }
}

/// After marking: no gray objects remain and no black object references a
/// white one.
pub fn check_tricolor_invariant(arena: &Arena, region: Range<usize>) -> Result<(), String> {
    for addr in arena.objects_in(region) {
        match arena.header(addr).color {
            Color::Gray => return Err(format!("{addr} is still gray")),
            Color::Black => {
                for i in 0..arena.ref_count(addr) {
                    let child = arena.get_ref(addr, i);
                    if !child.is_nil() && arena.header(child).color == Color::White {
                        return Err(format!("black {addr} references white {child}"));
                    }
                }
            }
            Color::White => {}
        }
    }
    Ok(())
}
