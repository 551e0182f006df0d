//! Greedy lattice paths with general i.i.d. vertex weights on Z^d.
//!
//! * [`lattice`]: vertices, self-avoiding paths and a brute-force enumerator.
//! * [`weights`]: the weight-law catalog, counter-based weight fields and
//!   truncation `x -> max(x, -m)`.
//! * [`solver`]: exact branch-and-bound for `M_n` with lexicographic
//!   tie-breaking, plus beam search for longer paths.
//! * [`estimation`]: Monte Carlo estimates of `E M_n / n`, the truncated
//!   constants and their limit.
//! * [`verify`]: exact and statistical checks of the inequalities behind the
//!   linear growth of `M_n`.

pub mod estimation;
pub mod lattice;
pub mod quad;
pub mod solver;
pub mod verify;
pub mod weights;
