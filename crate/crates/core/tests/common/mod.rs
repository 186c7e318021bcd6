#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use microlisp::bench::BENCHMARK_SCRIPT;
use microlisp::cli::run_repl;
use microlisp::collectors::{check_tricolor_invariant, reachable_set_oracle, CollectorKind};
use microlisp::heap::{Field, Heap, HeapAddress, HeapConfig, Payload};
use microlisp::metrics::REPORT_LABELS;
use microlisp::InterpreterConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN: &str = include_str!("../data/benchmark_transcript.txt");

/// Runs `f` on a thread with a deep stack; the evaluator recurses natively.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(f)
        .unwrap()
        .join()
        .unwrap()
}

/// Feeds the benchmark script to an echoing REPL and returns its output.
pub fn repl_transcript(kind: CollectorKind, heap_bytes: usize, stress: bool) -> String {
    with_big_stack(move || {
        let heap = HeapConfig::new(heap_bytes, kind)
            .with_stress(stress)
            .with_verify(false);
        let mut out = Vec::new();
        run_repl(
            InterpreterConfig::new(heap),
            BENCHMARK_SCRIPT.as_bytes(),
            &mut out,
            true,
        )
        .unwrap();
        String::from_utf8(out).unwrap()
    })
}

fn is_report_line(line: &str) -> Option<&'static str> {
    REPORT_LABELS
        .iter()
        .copied()
        .find(|label| line.starts_with(&format!("{label}: ")))
}

/// Compares a transcript with the golden one: every result line exactly,
/// report lines by label and shape (the numbers are machine-dependent).
pub fn compare_with_golden(actual: &str) -> Result<(), String> {
    let expected: Vec<&str> = GOLDEN.lines().collect();
    let got: Vec<&str> = actual.lines().collect();
    if expected.len() != got.len() {
        return Err(format!("{} lines, expected {}", got.len(), expected.len()));
    }
    for (i, (e, g)) in expected.iter().zip(&got).enumerate() {
        match is_report_line(e) {
            Some(label) => {
                let value = g.strip_prefix(&format!("{label}: "));
                if !value.is_some_and(|v| !v.is_empty() && v.bytes().all(|b| b.is_ascii_digit())) {
                    return Err(format!("line {}: {g:?} is not a {label} line", i + 1));
                }
            }
            None if e != g => return Err(format!("line {}: got {g:?}, expected {e:?}", i + 1)),
            None => {}
        }
    }
    Ok(())
}

/// Transcript with the report's numbers blanked out.
pub fn without_report_values(transcript: &str) -> Vec<String> {
    transcript
        .lines()
        .map(|l| match is_report_line(l) {
            Some(label) => label.to_owned(),
            None => l.to_owned(),
        })
        .collect()
}

/// A random object graph. Each node is a record whose first reference is
/// an integer label object; the remaining references are graph edges.
#[derive(Clone, Debug)]
pub struct GraphSpec {
    pub edges: Vec<Vec<Option<usize>>>,
    pub data: Vec<usize>,
    pub roots: Vec<usize>,
    /// Nodes forming a cycle that nothing else references.
    pub orphan_cycle: Vec<usize>,
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> GraphSpec {
    let cycle_len = rng.gen_range(2..=4);
    let n = rng.gen_range(cycle_len + 1..=32);
    let first_orphan = n - cycle_len;
    let mut edges = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.gen_range(1..=3);
        let row = if i >= first_orphan {
            let next = if i + 1 == n { first_orphan } else { i + 1 };
            let mut row = vec![Some(next)];
            row.extend((1..k).map(|_| Some(rng.gen_range(first_orphan..n))));
            row
        } else {
            (0..k)
                .map(|_| rng.gen_bool(0.85).then(|| rng.gen_range(0..first_orphan)))
                .collect()
        };
        edges.push(row);
    }
    let data = (0..n).map(|_| rng.gen_range(0..=3)).collect();
    let roots = (0..rng.gen_range(0..=4))
        .map(|_| rng.gen_range(0..first_orphan))
        .collect();
    GraphSpec {
        edges,
        data,
        roots,
        orphan_cycle: (first_orphan..n).collect(),
    }
}

/// Allocates the graph (at most 64 objects counting labels) and pushes
/// its roots. Returns node addresses.
pub fn build_graph(heap: &mut Heap, spec: &GraphSpec) -> Vec<HeapAddress> {
    let n = spec.edges.len();
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let label = heap.allocate(Payload::Integer(i as i32)).unwrap();
        let mut refs = vec![label];
        refs.extend(std::iter::repeat_n(HeapAddress::NIL, spec.edges[i].len()));
        nodes.push(heap.allocate_record(&refs, spec.data[i]).unwrap());
    }
    for (i, row) in spec.edges.iter().enumerate() {
        for (j, target) in row.iter().enumerate() {
            if let Some(t) = target {
                heap.write_field(nodes[i], Field::Record(j + 1), nodes[*t])
                    .unwrap();
            }
        }
    }
    for &r in &spec.roots {
        heap.push_root(nodes[r]);
    }
    nodes
}

/// Canonical description of an object, with references replaced by the
/// label of the graph node (or integer) they designate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Shape {
    Integer(i32),
    Node {
        label: i32,
        data: u8,
        edges: Vec<Option<i32>>,
    },
}

fn node_label(heap: &Heap, addr: HeapAddress) -> i32 {
    let label = heap.references(addr)[0];
    match heap.payload(label) {
        Payload::Integer(n) => n,
        p => panic!("label of {addr:?} is {p:?}"),
    }
}

pub fn shape_of(heap: &Heap, addr: HeapAddress) -> Shape {
    match heap.payload(addr) {
        Payload::Integer(n) => Shape::Integer(n),
        Payload::Record { data, .. } => Shape::Node {
            label: node_label(heap, addr),
            data,
            edges: heap.references(addr)[1..]
                .iter()
                .map(|r| (!r.is_nil()).then(|| node_label(heap, *r)))
                .collect(),
        },
        p => panic!("unexpected payload {p:?}"),
    }
}

/// Canonical multiset of the shapes of a set of addresses.
pub fn shapes(heap: &Heap, addrs: impl IntoIterator<Item = HeapAddress>) -> Vec<Shape> {
    let mut v: Vec<Shape> = addrs.into_iter().map(|a| shape_of(heap, a)).collect();
    v.sort();
    v
}

/// Root values rendered as shapes, in stack order.
pub fn root_shapes(heap: &Heap) -> Vec<Shape> {
    heap.roots().iter().map(|a| shape_of(heap, a)).collect()
}

/// Everything a collection must preserve, captured before it runs.
pub struct Snapshot {
    pub reachable: BTreeSet<HeapAddress>,
    pub shapes: Vec<Shape>,
    pub roots: Vec<Shape>,
    pub live_slots: usize,
    /// Shapes of the reachable objects in address order.
    pub in_address_order: Vec<Shape>,
}

pub fn snapshot(heap: &Heap) -> Snapshot {
    let reachable = reachable_set_oracle(heap);
    Snapshot {
        shapes: shapes(heap, reachable.iter().copied()),
        roots: root_shapes(heap),
        live_slots: reachable
            .iter()
            .map(|a| heap.arena().header(*a).size as usize)
            .sum(),
        in_address_order: reachable.iter().map(|a| shape_of(heap, *a)).collect(),
        reachable,
    }
}

/// Checks that the objects left after a collection correspond one-to-one
/// with the snapshot's reachable set, with payloads and edges intact.
pub fn check_survivors(heap: &Heap, before: &Snapshot) -> Result<(), String> {
    let survivors = heap.objects();
    if survivors.len() != before.reachable.len() {
        return Err(format!(
            "{} survivors, oracle says {}",
            survivors.len(),
            before.reachable.len()
        ));
    }
    let after = shapes(heap, survivors.iter().copied());
    if after != before.shapes {
        return Err("survivor payloads or edges differ from the reachable set".into());
    }
    let mut labels = BTreeMap::new();
    for &a in &survivors {
        if let Shape::Node { label, .. } = shape_of(heap, a) {
            if labels.insert(label, a).is_some() {
                return Err(format!("node {label} survives twice"));
            }
        }
    }
    if root_shapes(heap) != before.roots {
        return Err("root slots no longer designate the same objects".into());
    }
    if reachable_set_oracle(heap).len() != survivors.len() {
        return Err("a survivor is unreachable after collection".into());
    }
    Ok(())
}

pub fn fuzz_heap(kind: CollectorKind) -> Heap {
    Heap::new(HeapConfig::new(16 << 10, kind).with_verify(true))
}

/// Runs the mark phase alone and checks that no black object points at a
/// white one.
pub fn check_mark_phase(heap: &mut Heap) -> Result<(), String> {
    heap.mark_only();
    check_tricolor_invariant(heap.arena(), heap.object_region())
}

/// Collector-specific guarantees for a collection that followed `before`.
pub fn check_collector_guarantees(heap: &mut Heap, before: &Snapshot) -> Result<(), String> {
    heap.check_invariants()?;
    let survivors = heap.objects();
    match heap.collector_kind() {
        CollectorKind::MarkSweep => {
            let ms = heap.mark_sweep().unwrap();
            let free = ms.free_list().total_slots();
            if heap.allocated_slots() + free != heap.capacity_slots() {
                return Err("live + free != capacity".into());
            }
            if survivors.iter().copied().collect::<BTreeSet<_>>() != before.reachable {
                return Err("a surviving object moved".into());
            }
            if before.reachable.is_empty() && ms.free_list().extents().len() != 1 {
                return Err("total-garbage heap left a fragmented free list".into());
            }
        }
        CollectorKind::Cheney => {
            let state = heap.cheney().unwrap().state();
            if state.alloc_cursor != state.to_base + before.live_slots {
                return Err(format!(
                    "cursor {} != to-space base {} + live {}",
                    state.alloc_cursor, state.to_base, before.live_slots
                ));
            }
            let mut expect = state.to_base;
            for a in &survivors {
                if a.index() != expect {
                    return Err(format!("gap before {a:?}"));
                }
                expect += heap.arena().header(*a).size as usize;
            }
        }
        CollectorKind::Lisp2 => {
            if heap.lisp2().unwrap().cursor() != before.live_slots {
                return Err("survivors are not packed at the arena base".into());
            }
            let order: Vec<Shape> = survivors.iter().map(|a| shape_of(heap, *a)).collect();
            if order != before.in_address_order {
                return Err("survivor order changed".into());
            }
            let stats = heap.collect();
            if stats.objects_moved != 0 || heap.objects() != survivors {
                return Err("collecting a compacted heap moved objects".into());
            }
        }
    }
    Ok(())
}
