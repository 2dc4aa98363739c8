//! Composition and execution of computons.
//!
//! A computon is a finite structure of ports, units and flows. Computons are
//! glued along shared ports by pushouts and run by a step-synchronous
//! scheduler that calls out to computing devices.

pub mod colimit;
pub mod computon;
pub mod devnet;
pub mod finset;
pub mod iso;
pub mod morphism;
pub mod operators;
pub mod runtime;
pub mod value;

pub use colimit::{
    coproduct, pushout, pushout_raw, unique_from_coproduct, ColimitError, ColimitResult,
    PushabilityViolation, Span,
};
pub use computon::{
    Class, Computon, ComputonError, ComputonParts, DeviceId, PrimitiveSpec, Violation, CONTROL,
};
pub use devnet::{Arg, DeviceError, DeviceRegistry, Devices, StubServer};
pub use finset::{FinError, FinMap, FinSet};
pub use iso::{computons_isomorphic, isomorphism};
pub use morphism::{compose, Marker, MarkerKind, Morphism, MorphismError};
pub use operators::{
    bra_closed, bra_open, is_sound, mk_glue_for, p_async, seq, sync, Composite, LeafClass,
    Operator, OperatorError, Outcome, ParsingTree, SeqKind,
};
pub use runtime::{
    compile, compile_computon, run, CompiledComputon, ExecState, RunFailure, RunResult,
    RuntimeError, Trace,
};
pub use value::{TypeUniverse, Value, ValueError, ValueType};
