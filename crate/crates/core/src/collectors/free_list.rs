//! Address-ordered first-fit free list.

use thiserror::Error;

use crate::heap::HeapAddress;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Extent {
    pub addr: usize,
    pub size: usize,
}

impl Extent {
    pub fn end(&self) -> usize {
        self.addr + self.size
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("no free extent of {0} slot(s)")]
pub struct NoFit(pub usize);

/// Disjoint, sorted, never-adjacent free extents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeList {
    extents: Vec<Extent>,
}

impl FreeList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a free list from arbitrary extents, sorting and coalescing.
    pub fn from_extents(mut extents: Vec<Extent>) -> Self {
        extents.retain(|e| e.size > 0);
        extents.sort_by_key(|e| e.addr);
        let mut list = FreeList::new();
        for e in extents {
            list.push_back(e);
        }
        list
    }

    pub fn extents(&self) -> &[Extent] {
        &self.extents
    }

    pub fn total_slots(&self) -> usize {
        self.extents.iter().map(|e| e.size).sum()
    }

    pub fn clear(&mut self) {
        self.extents.clear();
    }

    /// Appends an extent at or above the current end, merging with the
    /// last extent when they touch.
    pub fn push_back(&mut self, extent: Extent) {
        if let Some(last) = self.extents.last_mut() {
            assert!(
                last.end() <= extent.addr,
                "free extents must be pushed in address order"
            );
            if last.end() == extent.addr {
                last.size += extent.size;
                return;
            }
        }
        self.extents.push(extent);
    }

    /// First fit: carves `size` slots from the lowest extent large enough.
    pub fn allocate(&mut self, size: usize) -> Result<HeapAddress, NoFit> {
        assert!(size >= 1, "allocation size must be positive");
        let i = self
            .extents
            .iter()
            .position(|e| e.size >= size)
            .ok_or(NoFit(size))?;
        let extent = &mut self.extents[i];
        let addr = extent.addr;
        extent.addr += size;
        extent.size -= size;
        if extent.size == 0 {
            self.extents.remove(i);
        }
        Ok(HeapAddress::new(addr))
    }

    pub fn check(&self) -> Result<(), String> {
        for w in self.extents.windows(2) {
            if w[0].end() >= w[1].addr {
                return Err(format!(
                    "free extents {:?} and {:?} overlap or touch",
                    w[0], w[1]
                ));
            }
        }
        if self.extents.iter().any(|e| e.size == 0) {
            return Err("empty free extent".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(ext: &[(usize, usize)]) -> FreeList {
        FreeList::from_extents(
            ext.iter()
                .map(|&(addr, size)| Extent { addr, size })
                .collect(),
        )
    }

    fn pairs(l: &FreeList) -> Vec<(usize, usize)> {
        l.extents().iter().map(|e| (e.addr, e.size)).collect()
    }

    #[test]
    fn first_fit_shrinks_lowest_extent() {
        let mut l = list(&[(0, 4), (10, 2)]);
        assert_eq!(l.allocate(2).unwrap().index(), 0);
        assert_eq!(pairs(&l), vec![(2, 2), (10, 2)]);
    }

    #[test]
    fn first_fit_skips_small_extent() {
        let mut l = list(&[(0, 1), (10, 4)]);
        assert_eq!(l.allocate(2).unwrap().index(), 10);
        assert_eq!(pairs(&l), vec![(0, 1), (12, 2)]);
    }

    #[test]
    fn exact_fit_removes_extent() {
        let mut l = list(&[(3, 2), (8, 1)]);
        assert_eq!(l.allocate(2).unwrap().index(), 3);
        assert_eq!(pairs(&l), vec![(8, 1)]);
        assert_eq!(l.allocate(2), Err(NoFit(2)));
    }

    #[test]
    fn adjacent_extents_coalesce() {
        let l = list(&[(4, 2), (0, 4), (7, 1)]);
        assert_eq!(pairs(&l), vec![(0, 6), (7, 1)]);
        l.check().unwrap();
    }

    /// Every free/used pattern over a 16-slot arena, every request size:
    /// first fit must agree with a scan for the lowest run of free slots.
    #[test]
    fn exhaustive_first_fit_matches_brute_force() {
        const N: usize = 16;
        for mask in 0u32..(1 << N) {
            let free = |i: usize| mask & (1 << i) != 0;
            let mut extents = Vec::new();
            let mut i = 0;
            while i < N {
                if free(i) {
                    let start = i;
                    while i < N && free(i) {
                        i += 1;
                    }
                    extents.push(Extent {
                        addr: start,
                        size: i - start,
                    });
                } else {
                    i += 1;
                }
            }
            for size in 1..=N {
                // Oracle: lowest address a such that a..a+size are free and
                // a starts a maximal free run (first fit takes extent heads).
                let expected =
                    (0..=N - size).find(|&a| (a == 0 || !free(a - 1)) && (a..a + size).all(free));
                let mut l = FreeList::from_extents(extents.clone());
                let got = l.allocate(size).ok().map(|a| a.index());
                assert_eq!(got, expected, "mask {mask:#06x} size {size}");
            }
        }
    }
}
