//! Exact event-driven simulation of the Ehrenfest wind-tree billiard.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`geometry`]: the paper/internal frames, directions and reflections.
//! * [`config`]: obstacle configurations (finite cores plus periodic
//!   extensions with defects), and the ringed, lattice, perturbed and
//!   comparison-map constructions.
//! * [`metric`]: the stereographic Hausdorff distance on configurations
//!   and the accumulation-point procedure.
//! * [`table`]: the uniform grid obstacle index and ray casting.
//! * [`flow`]: single-particle, product and first-return flows.
//! * [`stats`]: direction census, Hopf ratios, induced Birkhoff and
//!   Cesàro averages, and the direction equalization experiment.
//!
//! All flow computation happens in the internal frame, where every
//! obstacle is an axis-aligned square of side `a = s / sqrt(2)`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod config;
pub mod flow;
pub mod geometry;
mod math;
pub mod metric;
pub mod quad;
pub mod stats;
pub mod table;

pub use config::{Configuration, ConfigError, PeriodicSpec, ViolationReport, Window};
pub use flow::{
    EventKind, EventRecord, EventSink, FlowError, FlowOptions, ParticleState, ProductState,
    Region, Status,
};
pub use geometry::{Axis, DirIndex, DirectionClass, DirectionVector, GeometryError, InternalPoint, PaperPoint};
pub use metric::{SpherePoint, Neighborhood};
pub use table::Table;
