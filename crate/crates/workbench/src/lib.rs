//! Numerics for spontaneous parametric down-conversion sources and the
//! waveguides that carry their photons.
//!
//! Frequencies are angular, in rad/fs (PHz); lengths are in micrometres
//! unless a name says otherwise. The `examples/` directory walks through
//! each module.

pub mod bent_guide;
pub mod biphoton;
pub mod cli;
pub mod dispersion;
pub mod fiber_prop;
pub mod golden;
pub mod numerics;
pub mod phasematch;
pub mod photon_stats;
pub mod presets;
pub mod rect_guide;
pub mod sellmeier_fit;
