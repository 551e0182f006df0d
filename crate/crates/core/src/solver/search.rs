//! Depth-first branch-and-bound over self-avoiding paths inside the ball.

use super::ball::{Ball, NONE};

pub(crate) struct Outcome {
    pub value: f64,
    pub path: Option<Vec<u32>>,
    pub expanded: u64,
    pub pruned: u64,
    pub completed: bool,
}

/// Per-solve scratch state. Sorted neighbourhood lists depend on the
/// weights, so they are built lazily the first time a vertex is reached.
pub(crate) struct Search<'a> {
    ball: &'a Ball,
    w: &'a [f64],
    n: usize,
    slack: f64,
    node_cap: u64,
    sorted: Vec<Vec<(u32, u32)>>,
    built: Vec<bool>,
    occupied: Vec<bool>,
}

impl<'a> Search<'a> {
    pub(crate) fn new(ball: &'a Ball, w: &'a [f64], n: usize, slack: f64, node_cap: u64) -> Self {
        let size = ball.len();
        Search {
            ball,
            w,
            n,
            slack,
            node_cap,
            sorted: vec![Vec::new(); size],
            built: vec![false; size],
            occupied: vec![false; size],
        }
    }

    /// Sum of the `r` largest weights within distance `r` of `v` that are
    /// not on the current path, largest first; `-inf` if fewer than `r`
    /// such vertices exist (no completion is possible then).
    fn top_sum(&mut self, v: u32, r: usize) -> f64 {
        if r == 0 {
            return 0.0;
        }
        let vi = v as usize;
        if !self.built[vi] {
            let w = self.w;
            let mut list = self.ball.near()[vi].clone();
            list.sort_by(|a, b| w[b.0 as usize].total_cmp(&w[a.0 as usize]).then(a.0.cmp(&b.0)));
            self.sorted[vi] = list;
            self.built[vi] = true;
        }
        let mut taken = 0;
        let mut sum = 0.0;
        for &(j, dist) in &self.sorted[vi] {
            if dist as usize > r || self.occupied[j as usize] {
                continue;
            }
            sum += self.w[j as usize];
            taken += 1;
            if taken == r {
                return sum;
            }
        }
        f64::NEG_INFINITY
    }

    /// Runs the search. `incumbent` is the value of some feasible path; it
    /// only tightens pruning and never becomes the returned path.
    pub(crate) fn run(mut self, incumbent: Option<f64>) -> Outcome {
        let ball = self.ball;
        let fanout = 2 * ball.dim();
        let origin = ball.origin();
        let mut best = incumbent.unwrap_or(f64::NEG_INFINITY);
        let mut best_path: Option<Vec<u32>> = None;
        let mut expanded = 0u64;
        let mut pruned = 0u64;

        let start = 0.0 + self.w[origin as usize];
        if self.n == 1 {
            return Outcome {
                value: start,
                path: Some(vec![origin]),
                expanded: 0,
                pruned: 0,
                completed: true,
            };
        }

        let mut path = vec![origin];
        let mut prefix = vec![start];
        let mut slot = vec![0usize];
        self.occupied[origin as usize] = true;
        let mut completed = true;

        loop {
            let depth = path.len();
            let top = path[depth - 1];
            let s = slot[depth - 1];
            if s == fanout {
                if depth == 1 {
                    break;
                }
                self.occupied[top as usize] = false;
                path.pop();
                prefix.pop();
                slot.pop();
                continue;
            }
            slot[depth - 1] += 1;
            let v = ball.neighbours(top)[s];
            if v == NONE || self.occupied[v as usize] {
                continue;
            }
            expanded += 1;
            if expanded > self.node_cap {
                completed = false;
                break;
            }
            let value = prefix[depth - 1] + self.w[v as usize];
            if depth + 1 == self.n {
                // strict improvement keeps the lexicographically first optimum
                if value > best || (best_path.is_none() && value >= best) {
                    best = value;
                    let mut p = path.clone();
                    p.push(v);
                    best_path = Some(p);
                }
                continue;
            }
            let bound = value + self.top_sum(v, self.n - depth - 1);
            let loose = bound + self.slack;
            if bound == f64::NEG_INFINITY || loose < best || (best_path.is_some() && loose <= best) {
                pruned += 1;
                continue;
            }
            self.occupied[v as usize] = true;
            path.push(v);
            prefix.push(value);
            slot.push(0);
        }

        Outcome {
            value: best,
            path: best_path,
            expanded,
            pruned,
            completed,
        }
    }
}
