//! The L1 ball of radius `n - 1` around the origin, which contains every
//! vertex a length-`n` path from the origin can visit.
//!
//! Vertices are indexed in increasing lexicographic order, so comparing
//! index sequences is the same as comparing vertex sequences.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::lattice::Vertex;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug)]
pub(crate) struct Ball {
    dim: usize,
    radius: usize,
    vertices: Vec<Vertex>,
    norms: Vec<u32>,
    index: HashMap<Vertex, u32>,
    /// `2d` entries per vertex in neighbour order, `NONE` outside the ball.
    neighbours: Vec<u32>,
    /// For vertex `u`: every `(v, dist(u, v))` with `1 <= dist <= radius - |u|`.
    near: OnceLock<Vec<Vec<(u32, u32)>>>,
}

fn push_ball(dim: usize, budget: i32, prefix: &mut Vec<i32>, out: &mut Vec<Vertex>) {
    if prefix.len() == dim {
        out.push(Vertex::new(prefix.iter().copied()));
        return;
    }
    for x in -budget..=budget {
        prefix.push(x);
        push_ball(dim, budget - x.abs(), prefix, out);
        prefix.pop();
    }
}

/// Every point of Z^d within L1 distance `radius` of the origin, in
/// increasing lexicographic order.
pub(crate) fn ball_points(dim: usize, radius: usize) -> Vec<Vertex> {
    let mut out = Vec::new();
    push_ball(dim, radius as i32, &mut Vec::with_capacity(dim), &mut out);
    out
}

impl Ball {
    pub(crate) fn new(dim: usize, radius: usize) -> Self {
        assert!(dim >= 1);
        let vertices = ball_points(dim, radius);
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let index: HashMap<Vertex, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        let norms = vertices.iter().map(|v| v.l1_norm() as u32).collect();
        let mut neighbours = Vec::with_capacity(vertices.len() * 2 * dim);
        for v in &vertices {
            for w in crate::lattice::neighbors(v) {
                neighbours.push(index.get(&w).copied().unwrap_or(NONE));
            }
        }
        Ball {
            dim,
            radius,
            vertices,
            norms,
            index,
            neighbours,
            near: OnceLock::new(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn len(&self) -> usize {
        self.vertices.len()
    }

    pub(crate) fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub(crate) fn vertex(&self, i: u32) -> &Vertex {
        &self.vertices[i as usize]
    }

    pub(crate) fn origin(&self) -> u32 {
        self.index[&Vertex::origin(self.dim)]
    }

    pub(crate) fn neighbours(&self, i: u32) -> &[u32] {
        let k = 2 * self.dim;
        &self.neighbours[i as usize * k..(i as usize + 1) * k]
    }

    pub(crate) fn near(&self) -> &[Vec<(u32, u32)>] {
        self.near.get_or_init(|| self.build_near())
    }

    fn build_near(&self) -> Vec<Vec<(u32, u32)>> {
        let mut offsets: Vec<(u32, Vertex)> = ball_points(self.dim, self.radius)
            .into_iter()
            .map(|o| (o.l1_norm() as u32, o))
            .filter(|(d, _)| *d > 0)
            .collect();
        offsets.sort();
        self.vertices
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let reach = self.radius as u32 - self.norms[i];
                offsets
                    .iter()
                    .take_while(|(d, _)| *d <= reach)
                    .map(|(d, o)| {
                        let v = Vertex::new(u.coords().iter().zip(o.coords()).map(|(a, b)| a + b));
                        (self.index[&v], *d)
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_order() {
        // |B_r| in Z^2 is 2r(r+1) + 1
        for r in 0..6 {
            let b = Ball::new(2, r);
            assert_eq!(b.len(), 2 * r * (r + 1) + 1);
        }
        let b = Ball::new(3, 2);
        assert_eq!(b.len(), 25);
        assert!(b.vertices().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.vertex(b.origin()), &Vertex::origin(3));
    }

    #[test]
    fn neighbour_table_matches_lattice() {
        let b = Ball::new(2, 3);
        for i in 0..b.len() as u32 {
            let expected = crate::lattice::neighbors(b.vertex(i));
            for (slot, &j) in b.neighbours(i).iter().enumerate() {
                if j == NONE {
                    assert_eq!(expected[slot].l1_norm(), 4);
                } else {
                    assert_eq!(b.vertex(j), &expected[slot]);
                }
            }
        }
    }

    #[test]
    fn near_lists_are_balls() {
        let b = Ball::new(2, 4);
        let near = b.near();
        for i in 0..b.len() as u32 {
            let reach = 4 - b.norms[i as usize];
            let u = b.vertex(i);
            let expected = b
                .vertices()
                .iter()
                .filter(|v| {
                    let d = u.l1_distance(v) as u32;
                    d >= 1 && d <= reach
                })
                .count();
            assert_eq!(near[i as usize].len(), expected);
            for &(j, d) in &near[i as usize] {
                assert_eq!(u.l1_distance(b.vertex(j)) as u32, d);
            }
        }
    }
}
