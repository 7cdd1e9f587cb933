use std::ops::Range;

use rayon::prelude::*;

/// Cut `data` into the consecutive, ascending, non-overlapping `ranges`.
pub(crate) fn split_ranges_mut<'a, T>(
    mut data: &'a mut [T],
    ranges: impl IntoIterator<Item = Range<usize>>,
) -> Vec<&'a mut [T]> {
    let mut out = Vec::new();
    let mut offset = 0;
    for r in ranges {
        debug_assert!(r.start >= offset);
        let (_, rest) = std::mem::take(&mut data).split_at_mut(r.start - offset);
        let (chunk, rest) = rest.split_at_mut(r.end - r.start);
        out.push(chunk);
        data = rest;
        offset = r.end;
    }
    out
}

/// Run one task per item, in parallel or strictly in order.
pub(crate) fn for_each_task<T, F>(parallel: bool, tasks: Vec<T>, f: F)
where
    T: Send,
    F: Fn(usize, T) + Sync + Send,
{
    if parallel {
        tasks.into_par_iter().enumerate().for_each(|(i, t)| f(i, t));
    } else {
        tasks.into_iter().enumerate().for_each(|(i, t)| f(i, t));
    }
}

pub(crate) fn map_tasks<T, R, F>(parallel: bool, tasks: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, T) -> R + Sync + Send,
{
    if parallel {
        tasks.into_par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    } else {
        tasks.into_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}
