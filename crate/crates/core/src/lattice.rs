//! Lattice geometry on Z^d, self-avoiding paths and a brute-force path
//! enumerator used as an oracle for the solver.
//!
//! Vertices are totally ordered by coordinatewise lexicographic order, and
//! paths inherit the induced lexicographic order on vertex sequences. Path
//! length always counts vertices, so the single-vertex path at the origin has
//! length 1.

use std::collections::HashSet;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::weights::{TruncationLevel, WeightField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("{to} is not adjacent to {from}")]
    NotAdjacent { from: Vertex, to: Vertex },
    #[error("{0} already occurs on the path")]
    NotSelfAvoiding(Vertex),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a path needs at least one vertex")]
    EmptyPath,
    #[error("path enumeration exceeded the cap of {cap} paths")]
    ResourceBound { cap: u64 },
}

/// A point of Z^d. The derived `Ord` is the lexicographic order used for
/// tie-breaking throughout the crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex(SmallVec<[i32; 4]>);

impl Vertex {
    pub fn new(coords: impl IntoIterator<Item = i32>) -> Self {
        let v = Vertex(coords.into_iter().collect());
        assert!(v.dim() >= 1, "vertices need at least one coordinate");
        v
    }

    pub fn origin(dim: usize) -> Self {
        Vertex::new(std::iter::repeat(0).take(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    pub fn l1_distance(&self, other: &Vertex) -> u64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (*a as i64 - *b as i64).unsigned_abs())
            .sum()
    }

    pub fn is_adjacent(&self, other: &Vertex) -> bool {
        self.dim() == other.dim() && self.l1_distance(other) == 1
    }

    /// `self + sign * e_axis`.
    pub fn step(&self, axis: usize, sign: i32) -> Vertex {
        let mut next = self.clone();
        next.0[axis] += sign;
        next
    }
}

impl<const N: usize> From<[i32; N]> for Vertex {
    fn from(coords: [i32; N]) -> Self {
        Vertex::new(coords)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The 2d nearest neighbours of `v`, in increasing lexicographic order:
/// `v - e_0 < v - e_1 < ... < v - e_{d-1} < v + e_{d-1} < ... < v + e_0`.
pub fn neighbors(v: &Vertex) -> Vec<Vertex> {
    let d = v.dim();
    let mut out = Vec::with_capacity(2 * d);
    out.extend((0..d).map(|axis| v.step(axis, -1)));
    out.extend((0..d).rev().map(|axis| v.step(axis, 1)));
    out
}

/// An ordered sequence of pairwise distinct vertices, consecutive ones at
/// L1 distance one. Ordering is lexicographic on the vertex sequence.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SelfAvoidingPath {
    vertices: Vec<Vertex>,
}

impl SelfAvoidingPath {
    pub fn from_origin(dim: usize) -> Self {
        SelfAvoidingPath {
            vertices: vec![Vertex::origin(dim)],
        }
    }

    pub fn starting_at(v: Vertex) -> Self {
        SelfAvoidingPath { vertices: vec![v] }
    }

    /// Validates every structural invariant.
    pub fn try_from_vertices(vertices: Vec<Vertex>) -> Result<Self, LatticeError> {
        let mut iter = vertices.into_iter();
        let first = iter.next().ok_or(LatticeError::EmptyPath)?;
        let mut path = SelfAvoidingPath::starting_at(first);
        for v in iter {
            path.push(v)?;
        }
        Ok(path)
    }

    /// Appends `v`, rejecting non-adjacent or repeated vertices.
    pub fn push(&mut self, v: Vertex) -> Result<(), LatticeError> {
        let last = self.last();
        if v.dim() != last.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: last.dim(),
                found: v.dim(),
            });
        }
        if !last.is_adjacent(&v) {
            return Err(LatticeError::NotAdjacent {
                from: last.clone(),
                to: v,
            });
        }
        if self.contains(&v) {
            return Err(LatticeError::NotSelfAvoiding(v));
        }
        self.vertices.push(v);
        Ok(())
    }

    /// Non-mutating form of [`push`](Self::push).
    pub fn extend(&self, v: Vertex) -> Result<Self, LatticeError> {
        let mut next = self.clone();
        next.push(v)?;
        Ok(next)
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn first(&self) -> &Vertex {
        &self.vertices[0]
    }

    pub fn last(&self) -> &Vertex {
        self.vertices.last().expect("paths are never empty")
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.vertices.iter().any(|u| u == v)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }
}

impl fmt::Display for SelfAvoidingPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Sum of the (optionally truncated) field values along the path, accumulated
/// in path order starting from zero.
pub fn path_weight(path: &SelfAvoidingPath, field: &WeightField, trunc: TruncationLevel) -> f64 {
    path.vertices()
        .iter()
        .fold(0.0, |acc, v| acc + field.weight(v, trunc))
}

/// Streams every self-avoiding path with `n` vertices starting at the origin
/// of Z^d, in increasing lexicographic order.
pub fn enumerate_saws(n: usize, dim: usize) -> SawEnumerator {
    SawEnumerator::new(n, dim)
}

/// Depth-first enumerator behind [`enumerate_saws`].
///
/// Yields `Err(ResourceBound)` once and then stops if a cap was configured
/// and the number of paths exceeds it.
pub struct SawEnumerator {
    n: usize,
    dim: usize,
    cap: Option<u64>,
    yielded: u64,
    path: Vec<Vertex>,
    occupied: HashSet<Vertex>,
    // frame k holds the neighbours of path[k] and the next one to try
    frames: Vec<(Vec<Vertex>, usize)>,
    started: bool,
    done: bool,
}

impl SawEnumerator {
    fn new(n: usize, dim: usize) -> Self {
        assert!(n >= 1, "paths have at least one vertex");
        assert!(dim >= 1, "dimension must be positive");
        SawEnumerator {
            n,
            dim,
            cap: None,
            yielded: 0,
            path: Vec::with_capacity(n),
            occupied: HashSet::with_capacity(n),
            frames: Vec::with_capacity(n),
            started: false,
            done: false,
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = Some(cap);
        self
    }

    fn emit(&mut self) -> Option<Result<SelfAvoidingPath, LatticeError>> {
        self.yielded += 1;
        if let Some(cap) = self.cap {
            if self.yielded > cap {
                self.done = true;
                return Some(Err(LatticeError::ResourceBound { cap }));
            }
        }
        Some(Ok(SelfAvoidingPath {
            vertices: self.path.clone(),
        }))
    }

    fn enter(&mut self, v: Vertex) {
        self.occupied.insert(v.clone());
        self.frames.push((neighbors(&v), 0));
        self.path.push(v);
    }

    fn leave(&mut self) {
        self.frames.pop();
        if let Some(v) = self.path.pop() {
            self.occupied.remove(&v);
        }
    }
}

impl Iterator for SawEnumerator {
    type Item = Result<SelfAvoidingPath, LatticeError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.enter(Vertex::origin(self.dim));
            if self.n == 1 {
                let out = self.emit();
                self.done = true;
                return out;
            }
        }
        loop {
            let Some((candidates, next)) = self.frames.last_mut() else {
                self.done = true;
                return None;
            };
            if *next == candidates.len() {
                self.leave();
                continue;
            }
            let cand = candidates[*next].clone();
            *next += 1;
            if self.occupied.contains(&cand) {
                continue;
            }
            if self.path.len() + 1 == self.n {
                self.path.push(cand);
                let out = self.emit();
                self.path.pop();
                return out;
            }
            self.enter(cand);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::DistributionSpec;

    fn v2(x: i32, y: i32) -> Vertex {
        Vertex::from([x, y])
    }

    #[test]
    fn neighbors_in_lexicographic_order() {
        assert_eq!(
            neighbors(&v2(0, 0)),
            vec![v2(-1, 0), v2(0, -1), v2(0, 1), v2(1, 0)]
        );
        assert_eq!(
            neighbors(&Vertex::from([0])),
            vec![Vertex::from([-1]), Vertex::from([1])]
        );
        let v = Vertex::from([1, 2, 3]);
        let nb = neighbors(&v);
        assert_eq!(nb.len(), 6);
        assert!(nb.windows(2).all(|w| w[0] < w[1]));
        for u in &nb {
            assert_eq!(u.l1_distance(&v), 1);
        }
    }

    #[test]
    fn path_extend_cases() {
        let p = SelfAvoidingPath::from_origin(2);
        let p = p.extend(v2(1, 0)).unwrap();
        assert_eq!(p.vertices(), &[v2(0, 0), v2(1, 0)]);
        assert_eq!(
            p.extend(v2(0, 0)),
            Err(LatticeError::NotSelfAvoiding(v2(0, 0)))
        );
        assert!(matches!(
            SelfAvoidingPath::from_origin(2).extend(v2(2, 0)),
            Err(LatticeError::NotAdjacent { .. })
        ));
        assert!(matches!(
            p.extend(Vertex::from([1, 0, 0])),
            Err(LatticeError::DimensionMismatch { .. })
        ));
        assert_eq!(
            SelfAvoidingPath::try_from_vertices(vec![]),
            Err(LatticeError::EmptyPath)
        );
    }

    #[test]
    fn path_weight_examples() {
        let field = WeightField::new(DistributionSpec::Constant { c: 2.0 }, 2, 0).unwrap();
        let single = SelfAvoidingPath::from_origin(2);
        assert_eq!(path_weight(&single, &field, TruncationLevel::NONE), 2.0);
        let line = SelfAvoidingPath::try_from_vertices((0..5).map(|x| v2(x, 0)).collect()).unwrap();
        assert_eq!(path_weight(&line, &field, TruncationLevel::NONE), 10.0);

        let mut field = WeightField::new(DistributionSpec::Constant { c: 0.0 }, 2, 0).unwrap();
        field.pin(v2(0, 0), 1.0);
        field.pin(v2(1, 0), -5.0);
        let p = SelfAvoidingPath::try_from_vertices(vec![v2(0, 0), v2(1, 0)]).unwrap();
        let m2 = TruncationLevel::new(2.0).unwrap();
        assert_eq!(path_weight(&p, &field, m2), -1.0);
        assert_eq!(path_weight(&p, &field, TruncationLevel::NONE), -4.0);
    }

    #[test]
    fn small_saw_counts() {
        let count = |n, d| enumerate_saws(n, d).map(Result::unwrap).count();
        assert_eq!(count(1, 2), 1);
        assert_eq!(count(3, 2), 12);
        assert_eq!(count(5, 2), 100);
        // one-dimensional walks can only go straight
        assert_eq!(count(6, 1), 2);
    }

    #[test]
    fn enumeration_cap() {
        let mut it = enumerate_saws(4, 2).with_cap(10);
        let ok = it.by_ref().take(10).filter(|r| r.is_ok()).count();
        assert_eq!(ok, 10);
        assert_eq!(it.next(), Some(Err(LatticeError::ResourceBound { cap: 10 })));
        assert_eq!(it.next(), None);
    }

    #[test]
    fn enumeration_is_sorted_and_valid() {
        let paths: Vec<_> = enumerate_saws(6, 2).map(Result::unwrap).collect();
        assert!(paths.windows(2).all(|w| w[0] < w[1]));
        for p in &paths {
            assert_eq!(p.len(), 6);
            assert_eq!(*p.first(), Vertex::origin(2));
            let rebuilt = SelfAvoidingPath::try_from_vertices(p.vertices().to_vec()).unwrap();
            assert_eq!(&rebuilt, p);
        }
    }
}
