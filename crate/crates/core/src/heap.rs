//! The managed heap: a flat arena of fixed-width slots, the root registry,
//! and the allocation entry point that runs the configured collector when
//! the arena is exhausted.
//!
//! Every Lisp value is an object in the arena and refers to other objects
//! only through [`HeapAddress`]. An object occupies `size` contiguous slots;
//! its first slot carries the [`ObjectHeader`] and the [`Payload`]. Lisp
//! objects are always a single slot. Synthetic records (used to exercise
//! variable-size layouts) spill their reference fields and padding into
//! continuation slots.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::collectors::{
    self, CheneyCollector, CollectionStats, Collector, CollectorKind, Lisp2Collector,
    MarkSweepCollector,
};
use crate::metrics::TimingStats;

/// Bytes charged per slot when converting a heap size to a slot count.
pub const SLOT_BYTES: usize = 4;

/// Index of a slot in the arena, or the `NIL` sentinel.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeapAddress(u32);

impl HeapAddress {
    pub const NIL: HeapAddress = HeapAddress(u32::MAX);

    pub fn new(index: usize) -> Self {
        assert!(index < u32::MAX as usize, "heap index {index} out of range");
        HeapAddress(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_nil(self) -> bool {
        self == Self::NIL
    }
}

impl fmt::Debug for HeapAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            f.write_str("NIL")
        } else {
            write!(f, "@{}", self.0)
        }
    }
}

impl fmt::Display for HeapAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Tri-color mark state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Color {
    White,
    Gray,
    Black,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjectHeader {
    /// Total slots occupied, header slot included.
    pub size: u32,
    pub color: Color,
    /// Reserved word for the sliding compactor's post-slide address.
    pub new_address: HeapAddress,
}

impl ObjectHeader {
    fn new(size: usize) -> Self {
        ObjectHeader {
            size: size as u32,
            color: Color::White,
            new_address: HeapAddress::NIL,
        }
    }
}

/// Index into the symbol table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

/// Primitive operations that can be passed around as values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Car,
    Cdr,
    Cons,
    Equal,
    Atom,
    Not,
    Add,
    Sub,
    Mul,
    Div,
    NumEq,
    Gt,
    Ge,
    Lt,
    Le,
}

impl Builtin {
    pub const ALL: [Builtin; 15] = [
        Builtin::Car,
        Builtin::Cdr,
        Builtin::Cons,
        Builtin::Equal,
        Builtin::Atom,
        Builtin::Not,
        Builtin::Add,
        Builtin::Sub,
        Builtin::Mul,
        Builtin::Div,
        Builtin::NumEq,
        Builtin::Gt,
        Builtin::Ge,
        Builtin::Lt,
        Builtin::Le,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Car => "CAR",
            Builtin::Cdr => "CDR",
            Builtin::Cons => "CONS",
            Builtin::Equal => "EQUAL",
            Builtin::Atom => "ATOM",
            Builtin::Not => "NOT",
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Mul => "*",
            Builtin::Div => "/",
            Builtin::NumEq => "=",
            Builtin::Gt => ">",
            Builtin::Ge => ">=",
            Builtin::Lt => "<",
            Builtin::Le => "<=",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }
}

/// Contents of an object's header slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Payload {
    Cons {
        car: HeapAddress,
        cdr: HeapAddress,
    },
    Integer(i32),
    Symbol(SymbolId),
    Boolean(bool),
    Builtin(Builtin),
    Lambda {
        params: HeapAddress,
        body: HeapAddress,
        env: HeapAddress,
    },
    /// Synthetic variable-size object: `refs` reference slots followed by
    /// `data` opaque slots.
    Record {
        refs: u8,
        data: u8,
    },
}

impl Payload {
    /// Number of reference fields held in the header slot itself.
    fn inline_refs(&self) -> usize {
        match self {
            Payload::Cons { .. } => 2,
            Payload::Lambda { .. } => 3,
            _ => 0,
        }
    }

    fn inline_ref(&self, i: usize) -> HeapAddress {
        match (*self, i) {
            (Payload::Cons { car, .. }, 0) => car,
            (Payload::Cons { cdr, .. }, 1) => cdr,
            (Payload::Lambda { params, .. }, 0) => params,
            (Payload::Lambda { body, .. }, 1) => body,
            (Payload::Lambda { env, .. }, 2) => env,
            _ => unreachable!("payload {self:?} has no inline reference {i}"),
        }
    }

    fn set_inline_ref(&mut self, i: usize, value: HeapAddress) {
        match (self, i) {
            (Payload::Cons { car, .. }, 0) => *car = value,
            (Payload::Cons { cdr, .. }, 1) => *cdr = value,
            (Payload::Lambda { params, .. }, 0) => *params = value,
            (Payload::Lambda { body, .. }, 1) => *body = value,
            (Payload::Lambda { env, .. }, 2) => *env = value,
            (p, i) => unreachable!("payload {p:?} has no inline reference {i}"),
        }
    }

    pub fn is_cons(&self) -> bool {
        matches!(self, Payload::Cons { .. })
    }
}

/// A mutable reference field of an object.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Car,
    Cdr,
    Params,
    Body,
    Env,
    /// The i-th reference slot of a record.
    Record(usize),
}

/// One arena slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Slot {
    Free,
    Object {
        header: ObjectHeader,
        payload: Payload,
    },
    /// A copied object's from-space header: the flag plus the forwarding
    /// address written over its first payload word.
    Forwarded {
        size: u32,
        to: HeapAddress,
    },
    /// Continuation slot of a record holding a reference.
    Ref(HeapAddress),
    /// Continuation slot of a record holding opaque data.
    Data(u64),
}

/// The raw slot array. Collectors operate directly on it.
#[derive(Clone, Debug)]
pub struct Arena {
    slots: Vec<Slot>,
}

impl Arena {
    pub(crate) fn new(capacity: usize) -> Self {
        Arena {
            slots: vec![Slot::Free; capacity],
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub(crate) fn slot(&self, index: usize) -> &Slot {
        &self.slots[index]
    }

    #[inline]
    pub(crate) fn slot_mut(&mut self, index: usize) -> &mut Slot {
        &mut self.slots[index]
    }

    pub(crate) fn copy_slots(&mut self, from: usize, to: usize, len: usize) {
        self.slots.copy_within(from..from + len, to);
    }

    /// Header of the object at `addr`. Panics if `addr` is not an object.
    #[inline]
    pub fn header(&self, addr: HeapAddress) -> &ObjectHeader {
        match &self.slots[addr.index()] {
            Slot::Object { header, .. } => header,
            other => panic!("{addr} is not an object header: {other:?}"),
        }
    }

    #[inline]
    pub fn header_mut(&mut self, addr: HeapAddress) -> &mut ObjectHeader {
        match &mut self.slots[addr.index()] {
            Slot::Object { header, .. } => header,
            other => panic!("{addr} is not an object header: {other:?}"),
        }
    }

    #[inline]
    pub fn payload(&self, addr: HeapAddress) -> &Payload {
        match &self.slots[addr.index()] {
            Slot::Object { payload, .. } => payload,
            other => panic!("{addr} is not an object header: {other:?}"),
        }
    }

    #[inline]
    pub fn ref_count(&self, addr: HeapAddress) -> usize {
        match self.payload(addr) {
            Payload::Record { refs, .. } => *refs as usize,
            p => p.inline_refs(),
        }
    }

    #[inline]
    pub fn get_ref(&self, addr: HeapAddress, i: usize) -> HeapAddress {
        match self.payload(addr) {
            Payload::Record { .. } => match self.slots[addr.index() + 1 + i] {
                Slot::Ref(r) => r,
                other => panic!("record field {i} of {addr} is {other:?}"),
            },
            p => p.inline_ref(i),
        }
    }

    #[inline]
    pub fn set_ref(&mut self, addr: HeapAddress, i: usize, value: HeapAddress) {
        let index = addr.index();
        match &mut self.slots[index] {
            Slot::Object {
                payload: Payload::Record { .. },
                ..
            } => self.slots[index + 1 + i] = Slot::Ref(value),
            Slot::Object { payload, .. } => payload.set_inline_ref(i, value),
            other => panic!("{addr} is not an object header: {other:?}"),
        }
    }

    pub(crate) fn write_object(
        &mut self,
        addr: HeapAddress,
        payload: Payload,
        record_refs: &[HeapAddress],
    ) {
        let size = object_size(&payload);
        let base = addr.index();
        self.slots[base] = Slot::Object {
            header: ObjectHeader::new(size),
            payload,
        };
        if let Payload::Record { refs, data } = payload {
            debug_assert_eq!(refs as usize, record_refs.len());
            for (i, r) in record_refs.iter().enumerate() {
                self.slots[base + 1 + i] = Slot::Ref(*r);
            }
            for j in 0..data as usize {
                self.slots[base + 1 + refs as usize + j] = Slot::Data(j as u64);
            }
        }
    }

    /// Objects in `region`, in address order. Free slots are skipped.
    pub fn objects_in(&self, region: std::ops::Range<usize>) -> ObjectWalk<'_> {
        ObjectWalk {
            arena: self,
            pos: region.start,
            end: region.end,
        }
    }
}

/// Address-ordered walk over the objects of a region.
pub struct ObjectWalk<'a> {
    arena: &'a Arena,
    pos: usize,
    end: usize,
}

impl Iterator for ObjectWalk<'_> {
    type Item = HeapAddress;

    fn next(&mut self) -> Option<HeapAddress> {
        while self.pos < self.end {
            match self.arena.slots[self.pos] {
                Slot::Free => self.pos += 1,
                Slot::Object { header, .. } => {
                    let addr = HeapAddress::new(self.pos);
                    self.pos += header.size as usize;
                    return Some(addr);
                }
                Slot::Forwarded { size, .. } => self.pos += size as usize,
                other => panic!(
                    "heap walk hit a continuation slot at {}: {other:?}",
                    self.pos
                ),
            }
        }
        None
    }
}

pub(crate) fn object_size(payload: &Payload) -> usize {
    match payload {
        Payload::Record { refs, data } => 1 + *refs as usize + *data as usize,
        _ => 1,
    }
}

/// Handle to a root slot; valid until the slot is popped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootHandle(usize);

/// LIFO stack of rewritable root slots.
#[derive(Clone, Debug, Default)]
pub struct RootRegistry {
    slots: Vec<HeapAddress>,
}

impl RootRegistry {
    pub fn push(&mut self, addr: HeapAddress) -> RootHandle {
        self.slots.push(addr);
        RootHandle(self.slots.len() - 1)
    }

    pub fn pop(&mut self) -> HeapAddress {
        self.slots
            .pop()
            .expect("pop_root called on an empty root registry")
    }

    #[inline]
    pub fn get(&self, handle: RootHandle) -> HeapAddress {
        self.slots[handle.0]
    }

    #[inline]
    pub fn set(&mut self, handle: RootHandle, addr: HeapAddress) {
        self.slots[handle.0] = addr;
    }

    /// Slot at a raw stack position.
    #[inline]
    pub fn at(&self, index: usize) -> HeapAddress {
        self.slots[index]
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.slots.truncate(len);
    }

    pub fn iter(&self) -> impl Iterator<Item = HeapAddress> + '_ {
        self.slots.iter().copied()
    }

    pub fn slots_mut(&mut self) -> &mut [HeapAddress] {
        &mut self.slots
    }
}

/// Interned symbol names. Never collected.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    names: Vec<String>,
    index: std::collections::HashMap<String, SymbolId>,
}

impl SymbolTable {
    pub fn intern(&mut self, name: &str) -> SymbolId {
        if let Some(id) = self.index.get(name) {
            return *id;
        }
        let id = SymbolId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.names[id.0 as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("out of memory: {requested} slot(s) requested, live data fills the heap")]
    OutOfMemory { requested: usize },
    #[error("invalid address {0}")]
    InvalidAddress(HeapAddress),
    #[error("object at {addr} has no field {field:?}")]
    NoSuchField { addr: HeapAddress, field: Field },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeapConfig {
    pub capacity_bytes: usize,
    pub collector: CollectorKind,
    /// Collect before every allocation.
    pub stress: bool,
    /// Walk the heap and check its invariants after every collection.
    pub verify: bool,
}

impl HeapConfig {
    pub fn new(capacity_bytes: usize, collector: CollectorKind) -> Self {
        HeapConfig {
            capacity_bytes,
            collector,
            stress: false,
            verify: cfg!(debug_assertions),
        }
    }

    pub fn with_stress(mut self, stress: bool) -> Self {
        self.stress = stress;
        self
    }

    pub fn with_verify(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn capacity_slots(&self) -> usize {
        self.capacity_bytes / SLOT_BYTES
    }
}

#[derive(Clone, Debug)]
enum Strategy {
    MarkSweep(MarkSweepCollector),
    Cheney(CheneyCollector),
    Lisp2(Lisp2Collector),
}

impl Strategy {
    #[inline]
    fn get(&self) -> &dyn Collector {
        match self {
            Strategy::MarkSweep(c) => c,
            Strategy::Cheney(c) => c,
            Strategy::Lisp2(c) => c,
        }
    }

    #[inline]
    fn get_mut(&mut self) -> &mut dyn Collector {
        match self {
            Strategy::MarkSweep(c) => c,
            Strategy::Cheney(c) => c,
            Strategy::Lisp2(c) => c,
        }
    }

    #[inline]
    fn try_allocate(&mut self, size: usize) -> Option<HeapAddress> {
        match self {
            Strategy::MarkSweep(c) => c.try_allocate(size),
            Strategy::Cheney(c) => c.try_allocate(size),
            Strategy::Lisp2(c) => c.try_allocate(size),
        }
    }
}

/// Running totals over every collection the heap has performed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CollectionTotals {
    pub collections: u64,
    pub objects_visited: u64,
    pub slots_swept: u64,
    pub bytes_reclaimed: u64,
}

pub struct Heap {
    config: HeapConfig,
    arena: Arena,
    roots: RootRegistry,
    strategy: Strategy,
    symbols: SymbolTable,
    timing: TimingStats,
    totals: CollectionTotals,
    last_collection: Option<CollectionStats>,
}

impl Heap {
    pub fn new(config: HeapConfig) -> Self {
        let capacity = config.capacity_slots();
        assert!(
            capacity >= 2,
            "heap of {} bytes is too small",
            config.capacity_bytes
        );
        let strategy = match config.collector {
            CollectorKind::MarkSweep => Strategy::MarkSweep(
                MarkSweepCollector::new(capacity).with_marking_check(config.verify),
            ),
            CollectorKind::Cheney => Strategy::Cheney(CheneyCollector::new(capacity)),
            CollectorKind::Lisp2 => Strategy::Lisp2(Lisp2Collector::new(capacity)),
        };
        Heap {
            config,
            arena: Arena::new(capacity),
            roots: RootRegistry::default(),
            strategy,
            symbols: SymbolTable::default(),
            timing: TimingStats::default(),
            totals: CollectionTotals::default(),
            last_collection: None,
        }
    }

    pub fn config(&self) -> &HeapConfig {
        &self.config
    }

    pub fn collector_kind(&self) -> CollectorKind {
        self.config.collector
    }

    pub fn capacity_slots(&self) -> usize {
        self.arena.capacity()
    }

    /// Slots the mutator can fill before a collection is forced.
    pub fn mutator_capacity_slots(&self) -> usize {
        self.strategy.get().mutator_capacity()
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn symbols_mut(&mut self) -> &mut SymbolTable {
        &mut self.symbols
    }

    pub fn intern(&mut self, name: &str) -> SymbolId {
        self.symbols.intern(name)
    }

    pub fn timing(&self) -> &TimingStats {
        &self.timing
    }

    pub fn totals(&self) -> &CollectionTotals {
        &self.totals
    }

    pub fn last_collection(&self) -> Option<&CollectionStats> {
        self.last_collection.as_ref()
    }

    pub fn roots(&self) -> &RootRegistry {
        &self.roots
    }

    pub fn roots_mut(&mut self) -> &mut RootRegistry {
        &mut self.roots
    }

    pub fn push_root(&mut self, addr: HeapAddress) -> RootHandle {
        self.roots.push(addr)
    }

    pub fn pop_root(&mut self) -> HeapAddress {
        self.roots.pop()
    }

    #[inline]
    pub fn root(&self, handle: RootHandle) -> HeapAddress {
        self.roots.get(handle)
    }

    #[inline]
    pub fn set_root(&mut self, handle: RootHandle, addr: HeapAddress) {
        self.roots.set(handle, addr)
    }

    /// Allocates a single-slot object.
    pub fn allocate(&mut self, payload: Payload) -> Result<HeapAddress, HeapError> {
        assert!(
            !matches!(payload, Payload::Record { .. }),
            "records are allocated with allocate_record"
        );
        self.allocate_object(payload, &mut [])
    }

    pub fn cons(&mut self, car: HeapAddress, cdr: HeapAddress) -> Result<HeapAddress, HeapError> {
        self.allocate(Payload::Cons { car, cdr })
    }

    /// Allocates a record of `1 + refs.len() + data_slots` slots.
    pub fn allocate_record(
        &mut self,
        refs: &[HeapAddress],
        data_slots: usize,
    ) -> Result<HeapAddress, HeapError> {
        let payload = Payload::Record {
            refs: u8::try_from(refs.len()).expect("too many record references"),
            data: u8::try_from(data_slots).expect("too many record data slots"),
        };
        let mut refs = refs.to_vec();
        self.allocate_object(payload, &mut refs)
    }

    fn allocate_object(
        &mut self,
        mut payload: Payload,
        record_refs: &mut [HeapAddress],
    ) -> Result<HeapAddress, HeapError> {
        let start = Instant::now();
        let size = object_size(&payload);
        let fast = if self.config.stress {
            None
        } else {
            self.strategy.try_allocate(size)
        };
        let addr = match fast {
            Some(addr) => addr,
            None => {
                // The pending payload's references are not yet in the heap,
                // so they ride on the root stack through the collection.
                let base = self.roots.len();
                for i in 0..payload.inline_refs() {
                    self.roots.push(payload.inline_ref(i));
                }
                for r in record_refs.iter() {
                    self.roots.push(*r);
                }
                self.collect_timed();
                for i in 0..payload.inline_refs() {
                    payload.set_inline_ref(i, self.roots.get(RootHandle(base + i)));
                }
                let off = base + payload.inline_refs();
                for (i, r) in record_refs.iter_mut().enumerate() {
                    *r = self.roots.get(RootHandle(off + i));
                }
                self.roots.truncate(base);
                match self.strategy.try_allocate(size) {
                    Some(addr) => addr,
                    None => return Err(HeapError::OutOfMemory { requested: size }),
                }
            }
        };
        self.arena.write_object(addr, payload, record_refs);
        self.timing
            .record_allocation(start.elapsed().as_nanos() as u64);
        Ok(addr)
    }

    fn collect_timed(&mut self) {
        let stats = self.collect();
        self.timing.record_collection(stats.pause_ns);
    }

    /// Runs one full collection of the configured kind.
    pub fn collect(&mut self) -> CollectionStats {
        let expected_live = self
            .config
            .verify
            .then(|| collectors::reachable_set_oracle(self).len());
        let start = Instant::now();
        let mut stats = self
            .strategy
            .get_mut()
            .collect(&mut self.arena, &mut self.roots);
        stats.pause_ns = start.elapsed().as_nanos() as u64;
        self.totals.collections += 1;
        self.totals.objects_visited += stats.objects_visited as u64;
        self.totals.slots_swept += stats.slots_swept as u64;
        self.totals.bytes_reclaimed += stats.bytes_reclaimed as u64;
        self.last_collection = Some(stats);
        if let Some(live) = expected_live {
            if let Err(msg) = self
                .check_invariants()
                .and_then(|()| self.check_work(&stats, live))
            {
                panic!(
                    "heap invariant violated after {:?} collection: {msg}",
                    self.config.collector
                );
            }
        }
        stats
    }

    /// Survivors must match the oracle's count taken before the
    /// collection; the copying collector touches exactly those, the sweep
    /// touches every slot.
    fn check_work(&self, stats: &CollectionStats, live: usize) -> Result<(), String> {
        let survivors = self.objects().len();
        if survivors != live {
            return Err(format!("{survivors} survivors, {live} reachable"));
        }
        match self.config.collector {
            CollectorKind::Cheney if stats.objects_visited != live => Err(format!(
                "copied {} objects, {live} reachable",
                stats.objects_visited
            )),
            CollectorKind::MarkSweep if stats.slots_swept < self.capacity_slots() => Err(format!(
                "swept {} of {} slots",
                stats.slots_swept,
                self.capacity_slots()
            )),
            _ => Ok(()),
        }
    }

    fn check_live(&self, addr: HeapAddress) -> Result<(), HeapError> {
        if addr.is_nil() || addr.index() >= self.arena.capacity() {
            return Err(HeapError::InvalidAddress(addr));
        }
        let region = self.strategy.get().object_region();
        if !region.contains(&addr.index()) {
            return Err(HeapError::InvalidAddress(addr));
        }
        match self.arena.slot(addr.index()) {
            Slot::Object { .. } => Ok(()),
            _ => Err(HeapError::InvalidAddress(addr)),
        }
    }

    pub fn read_object(&self, addr: HeapAddress) -> Result<(ObjectHeader, Payload), HeapError> {
        self.check_live(addr)?;
        match self.arena.slot(addr.index()) {
            Slot::Object { header, payload } => Ok((*header, *payload)),
            _ => unreachable!(),
        }
    }

    /// Payload of a live object. Panics on an invalid address.
    #[inline]
    pub fn payload(&self, addr: HeapAddress) -> Payload {
        *self.arena.payload(addr)
    }

    pub fn read_field(&self, addr: HeapAddress, field: Field) -> Result<HeapAddress, HeapError> {
        let i = self.field_index(addr, field)?;
        Ok(self.arena.get_ref(addr, i))
    }

    pub fn write_field(
        &mut self,
        addr: HeapAddress,
        field: Field,
        value: HeapAddress,
    ) -> Result<(), HeapError> {
        let i = self.field_index(addr, field)?;
        if !value.is_nil() {
            self.check_live(value)?;
        }
        self.arena.set_ref(addr, i, value);
        Ok(())
    }

    fn field_index(&self, addr: HeapAddress, field: Field) -> Result<usize, HeapError> {
        self.check_live(addr)?;
        let payload = self.arena.payload(addr);
        let i = match (payload, field) {
            (Payload::Cons { .. }, Field::Car) => 0,
            (Payload::Cons { .. }, Field::Cdr) => 1,
            (Payload::Lambda { .. }, Field::Params) => 0,
            (Payload::Lambda { .. }, Field::Body) => 1,
            (Payload::Lambda { .. }, Field::Env) => 2,
            (Payload::Record { refs, .. }, Field::Record(i)) if i < *refs as usize => i,
            _ => return Err(HeapError::NoSuchField { addr, field }),
        };
        Ok(i)
    }

    /// References held by the object at `addr`, in field order.
    pub fn references(&self, addr: HeapAddress) -> Vec<HeapAddress> {
        (0..self.arena.ref_count(addr))
            .map(|i| self.arena.get_ref(addr, i))
            .collect()
    }

    /// All allocated objects (live or not yet collected), in address order.
    pub fn objects(&self) -> Vec<HeapAddress> {
        self.arena
            .objects_in(self.strategy.get().object_region())
            .collect()
    }

    pub fn object_region(&self) -> std::ops::Range<usize> {
        self.strategy.get().object_region()
    }

    /// Slots currently held by allocated objects.
    pub fn allocated_slots(&self) -> usize {
        self.objects()
            .into_iter()
            .map(|a| self.arena.header(a).size as usize)
            .sum()
    }

    pub fn mark_sweep(&self) -> Option<&MarkSweepCollector> {
        match &self.strategy {
            Strategy::MarkSweep(c) => Some(c),
            _ => None,
        }
    }

    pub fn cheney(&self) -> Option<&CheneyCollector> {
        match &self.strategy {
            Strategy::Cheney(c) => Some(c),
            _ => None,
        }
    }

    pub fn lisp2(&self) -> Option<&Lisp2Collector> {
        match &self.strategy {
            Strategy::Lisp2(c) => Some(c),
            _ => None,
        }
    }

    /// Runs only the tri-color mark phase, leaving colors in place.
    pub fn mark_only(&mut self) -> usize {
        collectors::mark(
            &mut self.arena,
            self.strategy.get().object_region(),
            &self.roots,
        )
    }

    /// Full-heap structural check: objects tile the region without
    /// overlap, every reference and root designates an object header in
    /// the region, and the collector's own bookkeeping is consistent.
    pub fn check_invariants(&self) -> Result<(), String> {
        let region = self.strategy.get().object_region();
        let mut pos = region.start;
        let mut headers = std::collections::HashSet::new();
        let mut prev_end = region.start;
        while pos < region.end {
            match self.arena.slot(pos) {
                Slot::Free => pos += 1,
                Slot::Object { header, payload } => {
                    if header.size == 0 {
                        return Err(format!("zero-sized object at {pos}"));
                    }
                    if (header.size as usize) != object_size(payload) {
                        return Err(format!("size mismatch at {pos}"));
                    }
                    if pos < prev_end {
                        return Err(format!("object at {pos} overlaps previous object"));
                    }
                    let end = pos + header.size as usize;
                    if end > region.end {
                        return Err(format!("object at {pos} runs past region end"));
                    }
                    headers.insert(pos);
                    prev_end = end;
                    pos = end;
                }
                other => return Err(format!("unexpected slot {other:?} at {pos}")),
            }
        }
        for &h in &headers {
            let addr = HeapAddress::new(h);
            for i in 0..self.arena.ref_count(addr) {
                let r = self.arena.get_ref(addr, i);
                if !r.is_nil() && !headers.contains(&r.index()) {
                    return Err(format!("{addr} field {i} holds dangling reference {r}"));
                }
            }
        }
        for r in self.roots.iter() {
            if !r.is_nil() && !headers.contains(&r.index()) {
                return Err(format!("root holds dangling reference {r}"));
            }
        }
        self.strategy.get().check(&self.arena)
    }
}

impl fmt::Debug for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Heap")
            .field("config", &self.config)
            .field("roots", &self.roots.len())
            .field("timing", &self.timing)
            .finish_non_exhaustive()
    }
}
