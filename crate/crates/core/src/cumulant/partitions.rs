//! Set partitions of `{0, .., k-1}` enumerated via restricted growth strings.

use std::sync::OnceLock;

use crate::cumulant::MAX_ORDER;
use crate::error::{Error, Result};

/// A partition as a list of blocks of positions; blocks ordered by their
/// smallest element.
pub type Partition = Vec<Vec<usize>>;

static CACHE: [OnceLock<Vec<Partition>>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];

/// All partitions of a `k`-set, cached per `k`. `Bell(8) = 4140`.
pub fn set_partitions(k: usize) -> Result<&'static [Partition]> {
    if k == 0 || k > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order: k, max: MAX_ORDER });
    }
    Ok(CACHE[k].get_or_init(|| enumerate(k)))
}

fn enumerate(k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    grow(&mut rgs, 1, 0, &mut out);
    out
}

/// `rgs[i] <= max(rgs[..i]) + 1`; `top` is that running maximum.
fn grow(rgs: &mut [usize], pos: usize, top: usize, out: &mut Vec<Partition>) {
    if pos == rgs.len() {
        let mut blocks = vec![Vec::new(); top + 1];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(blocks);
        return;
    }
    for b in 0..=top + 1 {
        rgs[pos] = b;
        grow(rgs, pos + 1, top.max(b), out);
    }
}
