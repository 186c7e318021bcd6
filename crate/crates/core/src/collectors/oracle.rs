//! Brute-force reachability used as the reference answer for collector
//! tests. Shares no code with the collectors: it reads the graph through
//! the heap's public accessors only.

use std::collections::BTreeSet;

use crate::heap::{Heap, HeapAddress};

/// Every object transitively reachable from the root registry.
pub fn reachable_set_oracle(heap: &Heap) -> BTreeSet<HeapAddress> {
    let mut seen = BTreeSet::new();
    let mut work: Vec<HeapAddress> = heap.roots().iter().filter(|a| !a.is_nil()).collect();
    while let Some(addr) = work.pop() {
        if !seen.insert(addr) {
            continue;
        }
        for child in heap.references(addr) {
            if !child.is_nil() && !seen.contains(&child) {
                work.push(child);
            }
        }
    }
    seen
}
