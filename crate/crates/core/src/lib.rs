//! Random-annulus colorings of `[N]` and the tooling that verifies them.
//!
//! A coloring is built by mapping `n` to the orbit point `n·theta` on the
//! torus `T^D` and painting it blue when it falls in one of `M` thin annuli
//! centered at well-separated points; everything else is red. The crate
//! builds such colorings at desk scale and checks their properties exactly:
//! no blue 3-AP under the theta-gap hypothesis, the longest red AP, plus the
//! supporting diophantine, Fourier-kernel and lattice machinery.

pub mod ap;
pub mod coloring;
pub mod construction;
pub mod diophantine;
pub mod harness;
pub mod intmat;
pub mod kernels;
pub mod lattice;
pub mod logval;
pub mod params;
pub mod rng;
pub mod torus;
