//! Orbital-angular-momentum analysis and design of structured paraxial beams.
//!
//! The crate models light fields whose photons occupy superpositions of
//! angular-momentum eigenmodes `|m>` and provides both directions of the
//! problem:
//!
//! * **forward** — given a field (an analytic vortex pancake, a two-pearl
//!   vortex necklace, or an arbitrary sampled amplitude grid), compute the
//!   power `C_n` carried by each spiral harmonic `exp(i n phi)`, the
//!   occupation weights `P_n`, and the mean OAM per photon;
//! * **inverse** — given target weights `{P_n}`, construct a vortex pancake
//!   that realizes them, either in closed form (two vortices, including
//!   exact suppression of a chosen projection) or by a seeded multistart
//!   simplex search over the vortex positions for any `N`.
//!
//! Supporting subsystems sample fields onto grids, propagate them in free
//! space (spectral paraxial transfer function and analytic mode expansion),
//! detect wave-front dislocations, and emulate a rotating-Dove-prism
//! measurement that maps weights to rotational-Doppler sidebands and back.
//!
//! The `oam` binary exposes the whole pipeline as subcommands producing
//! deterministic CSV/JSON/field files; see the repository README.

pub mod analytic;
pub mod designer;
pub mod error;
pub mod io;
pub mod measurement;
pub mod model;
pub mod numeric;
pub mod propagation;

pub use analytic::{
    n2_closed_form, pancake_cn, pancake_lg_coefficients, pancake_weights, weights_from_cn,
    OamSpectrum, Provenance, WeightVector,
};
pub use designer::{
    design_equal_populations_n2, design_general, design_suppress_p0, design_suppress_p1,
    design_suppress_p2, scan_parameter, DesignResult, DesignTarget, ScanParameter, ScanTable,
};
pub use error::{Error, Result};
pub use measurement::{
    recover_weights, sidebands_from_weights, synthesize_beat_signal, RecoveredWeights,
    SidebandLine, SidebandSpectrum, TimeSeries,
};
pub use model::{
    elementary_symmetric, elementary_symmetric_all, rasterize, FieldSource, GridSpec, Interp,
    LgModeP0, NecklaceSpec, SampledField, Vortex, VortexPancake,
};
pub use numeric::{
    azimuthal_decompose, energy_and_oam, locate_dislocations, net_topological_charge,
    spectrum_from_field, spectrum_from_field_with, AzimuthalProfileTable, DecomposeOptions,
    Dislocation, DislocationSet,
};
pub use propagation::{
    fresnel_propagate, propagate_pancake_analytic, PropagatedPancake, PropagationSpec,
};
