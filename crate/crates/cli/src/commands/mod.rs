pub mod enumerate;
pub mod lfun;
pub mod moments;
pub mod primesums;

use std::collections::BTreeMap;

use crate::Entry;

/// Entries grouped by `(q, d(Q))`, preserving order inside each group.
pub(crate) fn by_family(entries: &[Entry]) -> BTreeMap<(u32, usize), Vec<&Entry>> {
    let mut out: BTreeMap<(u32, usize), Vec<&Entry>> = BTreeMap::new();
    for e in entries {
        out.entry((e.modulus.q(), e.modulus.degree()))
            .or_default()
            .push(e);
    }
    out
}

/// Max over finite values, `None` when there are none.
pub(crate) fn finite_max(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    xs.into_iter().filter(|x| x.is_finite()).reduce(f64::max)
}
