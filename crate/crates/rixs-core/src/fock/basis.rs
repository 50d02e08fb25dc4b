//! Slater-determinant basis of the fixed (N_e, S_z) sector.
//!
//! A determinant is a pair of occupation bitmasks (up, down) over the
//! spatial orbitals. In operator strings, all up spin-orbitals precede all
//! down spin-orbitals, each block ordered by ascending orbital index; this
//! fixes the fermionic sign convention shared with the test oracles.

use std::collections::HashMap;

use num_bigint::BigUint;

use super::FockError;

/// Ordered determinant basis with O(1) index lookup.
#[derive(Debug, Clone)]
pub struct ManyBodyBasis {
    n_orb: usize,
    n_up: usize,
    n_down: usize,
    up_masks: Vec<u64>,
    down_masks: Vec<u64>,
    up_index: HashMap<u64, usize>,
    down_index: HashMap<u64, usize>,
}

fn split_sector(
    n_orb: usize,
    n_elec: usize,
    two_sz: i32,
) -> Result<(usize, usize), FockError> {
    let err = |reason: &str| FockError::InfeasibleSector {
        n_orb,
        n_elec,
        two_sz,
        reason: reason.into(),
    };
    if n_orb == 0 || n_orb > 64 {
        return Err(err("orbital count must be in 1..=64"));
    }
    if n_elec < 1 || n_elec > 2 * n_orb {
        return Err(err("electron count outside 1..=2*n_orb"));
    }
    let ne = n_elec as i64;
    let ms = two_sz as i64;
    if ms.abs() > ne {
        return Err(err("|2Sz| exceeds the electron count"));
    }
    if (ne + ms) % 2 != 0 {
        return Err(err("n_elec + 2Sz must be even"));
    }
    let n_up = ((ne + ms) / 2) as usize;
    let n_down = ((ne - ms) / 2) as usize;
    if n_up > n_orb || n_down > n_orb {
        return Err(err("spin occupation exceeds the orbital count"));
    }
    Ok((n_up, n_down))
}

/// Exact sector dimension C(n_orb, n_up) * C(n_orb, n_down) as a big integer,
/// without materializing any state list.
pub fn sector_dimension(n_orb: usize, n_elec: usize, two_sz: i32) -> Result<BigUint, FockError> {
    let (n_up, n_down) = split_sector(n_orb, n_elec, two_sz)?;
    let n = BigUint::from(n_orb);
    Ok(num_integer::binomial(n.clone(), BigUint::from(n_up))
        * num_integer::binomial(n, BigUint::from(n_down)))
}

/// All masks over `n_orb` bits with exactly `k` bits set, in ascending
/// numeric order (Gosper's hack).
fn masks_with_popcount(n_orb: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let limit = if n_orb == 64 { u64::MAX } else { (1u64 << n_orb) - 1 };
    let mut out = Vec::new();
    let mut mask = (1u64 << k) - 1;
    while mask <= limit {
        out.push(mask);
        // Next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r == 0 {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    out
}

/// Builds the determinant basis of the (n_elec, two_sz) sector.
pub fn build_basis(n_orb: usize, n_elec: usize, two_sz: i32) -> Result<ManyBodyBasis, FockError> {
    let (n_up, n_down) = split_sector(n_orb, n_elec, two_sz)?;
    let dim = sector_dimension(n_orb, n_elec, two_sz)?;
    if dim > BigUint::from(usize::MAX) {
        return Err(FockError::DimensionOverflow(dim.to_string()));
    }
    let up_masks = masks_with_popcount(n_orb, n_up);
    let down_masks = masks_with_popcount(n_orb, n_down);
    let up_index = up_masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let down_index = down_masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    Ok(ManyBodyBasis {
        n_orb,
        n_up,
        n_down,
        up_masks,
        down_masks,
        up_index,
        down_index,
    })
}

impl ManyBodyBasis {
    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn n_down(&self) -> usize {
        self.n_down
    }

    pub fn n_elec(&self) -> usize {
        self.n_up + self.n_down
    }

    pub fn two_sz(&self) -> i32 {
        self.n_up as i32 - self.n_down as i32
    }

    pub fn dimension(&self) -> usize {
        self.up_masks.len() * self.down_masks.len()
    }

    /// The determinant at position `i` in lexicographic (up, down) order.
    #[inline]
    pub fn state(&self, i: usize) -> (u64, u64) {
        let nd = self.down_masks.len();
        (self.up_masks[i / nd], self.down_masks[i % nd])
    }

    /// Index of a determinant, or `None` when it lies outside the sector.
    #[inline]
    pub fn index_of(&self, up: u64, down: u64) -> Option<usize> {
        let iu = *self.up_index.get(&up)?;
        let id = *self.down_index.get(&down)?;
        Some(iu * self.down_masks.len() + id)
    }

    pub fn states(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.dimension()).map(|i| self.state(i))
    }
}
