//! Small helpers over sorted index slices.

/// Number of elements common to two ascending-sorted slices.
pub(crate) fn intersection_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// True when every element of `sub` occurs in `sup` (both sorted).
pub(crate) fn is_subset(sub: &[u32], sup: &[u32]) -> bool {
    intersection_count(sub, sup) == sub.len()
}
