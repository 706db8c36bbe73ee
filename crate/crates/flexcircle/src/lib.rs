//! flexcircle: circle dynamics and PSL(2,R) representation deformation.
//!
//! The crate is organised around a pipeline:
//!
//! * [`moebius`] — exact and floating 2×2 projective matrices, classification,
//!   one-parameter subgroups, and the induced boundary circle maps;
//! * [`words`] — free/amalgam/HNN presentations, normal forms, and ball
//!   enumeration;
//! * [`circle`] — circle homeomorphisms as lifts, rotation numbers, the
//!   integer 2-cocycles attached to an action, semi-conjugacy invariants,
//!   minimalization and blow-ups;
//! * [`baumslag`] — trace Laurent polynomials of one-parameter word templates,
//!   exact root isolation, escape thresholds, and ping-pong certification;
//! * [`pulling`] — deformation families that pull amalgams, HNN extensions and
//!   free products apart, with certified avoidance of trace targets;
//! * [`spectra`] — trace/rotation spectrum reports and density diagnostics;
//! * [`exotic`] — finite covers of circle actions and the piecewise-flow
//!   construction of non-smoothable-looking actions;
//! * [`cli`] — the stable command-line surface.

pub mod baumslag;
pub mod circle;
pub mod interval;
pub mod moebius;
pub mod poly;
pub mod pulling;
pub mod scalar;
pub mod words;

/// Entry point used by the `flexcircle` binary. Returns the process exit
/// code: 0 on success, 2 on validation errors, 3 when a computation is
/// inconclusive at the configured scale.
pub fn run_cli() -> i32 {
    eprintln!("flexcircle: CLI not wired up yet");
    2
}
