//! The heap layouts from the classic collector diagrams, built with
//! synthetic records of the drawn sizes.

use std::collections::BTreeSet;

use microlisp::collectors::{reachable_set_oracle, CollectorKind, Extent};
use microlisp::heap::{Field, Heap, HeapAddress, HeapConfig, Payload};

/// A record occupying exactly `size` slots with `refs` reference fields.
fn block(heap: &mut Heap, size: usize, refs: usize) -> HeapAddress {
    heap.allocate_record(&vec![HeapAddress::NIL; refs], size - 1 - refs)
        .unwrap()
}

fn heap(slots: usize, kind: CollectorKind) -> Heap {
    Heap::new(HeapConfig::new(slots * microlisp::heap::SLOT_BYTES, kind).with_verify(true))
}

#[test]
fn heap_graph_reachability() {
    let mut h = heap(64, CollectorKind::MarkSweep);
    let o: Vec<HeapAddress> = (0..5).map(|_| block(&mut h, 3, 2)).collect();
    let edges = [(0, 1), (2, 0), (2, 4), (3, 2), (4, 1), (4, 3)];
    let mut used = [0; 5];
    for (from, to) in edges {
        h.write_field(o[from], Field::Record(used[from]), o[to])
            .unwrap();
        used[from] += 1;
    }
    h.push_root(o[0]);
    // The arrows are directed: o3, o4 and o5 only point back into the
    // part of the graph the root reaches.
    assert_eq!(reachable_set_oracle(&h), BTreeSet::from([o[0], o[1]]));

    h.push_root(o[3]);
    assert_eq!(reachable_set_oracle(&h), o.iter().copied().collect());

    h.pop_root();
    h.pop_root();
    assert!(reachable_set_oracle(&h).is_empty());
}

#[test]
fn mark_sweep_frees_the_unmarked_regions() {
    let sizes = [20, 8, 14, 16, 7, 12, 5, 10, 13];
    let mut h = heap(128, CollectorKind::MarkSweep);
    let blocks: Vec<HeapAddress> = sizes.iter().map(|&s| block(&mut h, s, 0)).collect();
    let live: Vec<HeapAddress> = [0, 2, 4, 6, 8].iter().map(|&i| blocks[i]).collect();
    for &b in &live {
        h.push_root(b);
    }
    h.collect();
    assert_eq!(h.objects(), live);
    let ms = h.mark_sweep().unwrap();
    assert_eq!(
        ms.free_list().extents(),
        [
            Extent { addr: 20, size: 8 },
            Extent { addr: 42, size: 16 },
            Extent { addr: 65, size: 12 },
            Extent { addr: 82, size: 10 },
            Extent {
                addr: 105,
                size: 23
            },
        ]
    );
}

#[test]
fn mark_sweep_coalesces_adjacent_garbage() {
    let sizes = [20, 8, 14, 16, 7, 12, 5, 10, 13];
    let mut h = heap(128, CollectorKind::MarkSweep);
    let blocks: Vec<HeapAddress> = sizes.iter().map(|&s| block(&mut h, s, 0)).collect();
    for i in [0, 2, 4, 6] {
        h.push_root(blocks[i]);
    }
    h.collect();
    let extents = h.mark_sweep().unwrap().free_list().extents().to_vec();
    // D, the last block and the untouched tail merge into one run.
    assert_eq!(extents.last(), Some(&Extent { addr: 82, size: 46 }));
    assert_eq!(extents.len(), 4);
}

#[test]
fn cheney_copies_into_a_contiguous_prefix() {
    let mut h = heap(160, CollectorKind::Cheney);
    block(&mut h, 12, 0);
    let c = block(&mut h, 8, 1);
    let a = block(&mut h, 14, 1);
    block(&mut h, 16, 0);
    let d = block(&mut h, 7, 1);
    let b = block(&mut h, 12, 0);
    h.write_field(a, Field::Record(0), c).unwrap();
    h.write_field(c, Field::Record(0), c).unwrap();
    h.write_field(d, Field::Record(0), b).unwrap();
    let roots: Vec<_> = [a, b, c, d].iter().map(|&x| h.push_root(x)).collect();
    let stats = h.collect();
    let base = h.cheney().unwrap().state().to_base;
    assert_eq!(base, 80);
    let moved: Vec<usize> = roots.iter().map(|&r| h.root(r).index()).collect();
    assert_eq!(moved, [base, base + 14, base + 26, base + 34]);
    assert_eq!(h.cheney().unwrap().state().alloc_cursor, base + 41);
    assert_eq!(stats.objects_visited, 4);
    let [a2, b2, c2, d2] = [0, 1, 2, 3].map(|i| h.root(roots[i]));
    assert_eq!(h.read_field(a2, Field::Record(0)), Ok(c2));
    assert_eq!(h.read_field(c2, Field::Record(0)), Ok(c2));
    assert_eq!(h.read_field(d2, Field::Record(0)), Ok(b2));
}

#[test]
fn lisp2_slides_survivors_to_the_base_in_order() {
    let mut h = heap(128, CollectorKind::Lisp2);
    block(&mut h, 20, 0);
    let a = block(&mut h, 8, 1);
    block(&mut h, 14, 0);
    let b = block(&mut h, 16, 1);
    block(&mut h, 7, 0);
    let c = block(&mut h, 12, 1);
    block(&mut h, 5, 0);
    let d = block(&mut h, 10, 0);
    block(&mut h, 13, 0);
    let e = block(&mut h, 10, 0);
    block(&mut h, 13, 0);
    h.write_field(a, Field::Record(0), e).unwrap();
    h.write_field(b, Field::Record(0), d).unwrap();
    h.write_field(c, Field::Record(0), c).unwrap();
    let roots: Vec<_> = [a, b, c, d, e].iter().map(|&x| h.push_root(x)).collect();
    let stats = h.collect();
    let [a2, b2, c2, d2, e2] = [0, 1, 2, 3, 4].map(|i| h.root(roots[i]));
    assert_eq!(
        [a2, b2, c2, d2, e2].map(HeapAddress::index),
        [0, 8, 24, 36, 46]
    );
    assert_eq!(h.lisp2().unwrap().cursor(), 56);
    assert_eq!(stats.objects_moved, 5);
    assert_eq!(h.read_field(a2, Field::Record(0)), Ok(e2));
    assert_eq!(h.read_field(b2, Field::Record(0)), Ok(d2));
    assert_eq!(h.read_field(c2, Field::Record(0)), Ok(c2));
    assert_eq!(h.objects(), [a2, b2, c2, d2, e2]);
    assert!(matches!(
        h.payload(d2),
        Payload::Record { refs: 0, data: 9 }
    ));
}
