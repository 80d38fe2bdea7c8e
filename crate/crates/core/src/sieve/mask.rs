//! Subsets of a vector family as bitmasks. Families are capped well below
//! 32 elements, so u32 masks cover every legal subset.

pub type Mask = u32;

pub fn mask_len(mask: Mask) -> usize {
    mask.count_ones() as usize
}

pub fn is_subset(a: Mask, b: Mask) -> bool {
    a & !b == 0
}

/// Indices of set bits, ascending.
pub fn mask_indices(mask: Mask) -> impl Iterator<Item = usize> {
    (0..32usize).filter(move |i| mask >> i & 1 == 1)
}

pub fn mask_from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Mask {
    indices.into_iter().fold(0, |m, i| {
        assert!(i < 32, "index {i} out of mask range");
        m | (1 << i)
    })
}

/// All k-element submasks of `mask`, in lexicographic order of the chosen
/// index sets (deterministic; used for inner sums over subsets).
pub fn k_subsets(mask: Mask, k: usize) -> Vec<Mask> {
    let idx: Vec<usize> = mask_indices(mask).collect();
    if k > idx.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(k);
    fn rec(idx: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, out: &mut Vec<Mask>) {
        if chosen.len() == k {
            out.push(mask_from_indices(chosen.iter().copied()));
            return;
        }
        let need = k - chosen.len();
        for i in start..=idx.len().saturating_sub(need) {
            chosen.push(idx[i]);
            rec(idx, k, i + 1, chosen, out);
            chosen.pop();
        }
    }
    rec(&idx, k, 0, &mut chosen, &mut out);
    out
}
