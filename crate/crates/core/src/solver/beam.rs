//! Beam search over partial paths, ranked by (value desc, path asc).

use std::cmp::Ordering;

use super::ball::{Ball, NONE};

pub(crate) struct BeamOutcome {
    pub value: f64,
    pub path: Vec<u32>,
    pub expanded: u64,
    pub pruned: u64,
}

fn rank(a: &(f64, Vec<u32>), b: &(f64, Vec<u32>)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1))
}

/// One beam pass at a fixed width. Returns `None` if every partial path
/// got trapped, and whether any candidate was ever cut by the width.
fn single_pass(ball: &Ball, w: &[f64], n: usize, width: usize, counts: &mut (u64, u64)) -> (Option<(f64, Vec<u32>)>, bool) {
    let origin = ball.origin();
    let mut states = vec![(0.0 + w[origin as usize], vec![origin])];
    let mut cut = false;
    for _ in 1..n {
        let mut children = Vec::with_capacity(states.len() * 2 * ball.dim());
        for (value, path) in &states {
            let last = *path.last().expect("paths are never empty");
            for &v in ball.neighbours(last) {
                if v == NONE || path.contains(&v) {
                    continue;
                }
                let mut p = Vec::with_capacity(n);
                p.extend_from_slice(path);
                p.push(v);
                children.push((value + w[v as usize], p));
            }
        }
        counts.0 += children.len() as u64;
        if children.is_empty() {
            return (None, cut);
        }
        children.sort_by(rank);
        if children.len() > width {
            counts.1 += (children.len() - width) as u64;
            children.truncate(width);
            cut = true;
        }
        states = children;
    }
    (states.into_iter().next(), cut)
}

/// Best result over the widths 1, 2, 4, ... up to the first power of two
/// that is at least `width`. Taking the best over this ladder makes the
/// returned value nondecreasing in `width`.
pub(crate) fn beam(ball: &Ball, w: &[f64], n: usize, width: usize) -> BeamOutcome {
    let top = width.max(1).next_power_of_two();
    let mut counts = (0u64, 0u64);
    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut k = 1;
    loop {
        let (found, cut) = single_pass(ball, w, n, k, &mut counts);
        if let Some(candidate) = found {
            let better = match &best {
                None => true,
                Some(b) => rank(&candidate, b) == Ordering::Less,
            };
            if better {
                best = Some(candidate);
            }
        }
        // without any cut, wider beams see exactly the same candidates
        if k >= top || !cut {
            break;
        }
        k *= 2;
    }
    let (value, path) = best.unwrap_or_else(|| straight_path(ball, w, n));
    BeamOutcome {
        value,
        path,
        expanded: counts.0,
        pruned: counts.1,
    }
}

/// The path `0, e_0, 2 e_0, ...`, which is always feasible.
fn straight_path(ball: &Ball, w: &[f64], n: usize) -> (f64, Vec<u32>) {
    let forward = 2 * ball.dim() - 1;
    let mut path = vec![ball.origin()];
    let mut value = 0.0 + w[path[0] as usize];
    for _ in 1..n {
        let next = ball.neighbours(*path.last().unwrap())[forward];
        value += w[next as usize];
        path.push(next);
    }
    (value, path)
}
