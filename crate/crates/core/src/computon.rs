//! The computon data model: ports, units and flows with typed ports and
//! device-carrying outflows.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finset::{FinError, FinMap, FinSet};

/// Colour reserved for control ports.
pub const CONTROL: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceIdError {
    #[error("device identifier is empty")]
    Empty,
    #[error("device identifier `{0}` is neither `builtin:<name>` nor an absolute http(s) URL")]
    Syntax(String),
}

/// A computing device: either a named builtin or an HTTP endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DeviceId(String);

impl DeviceId {
    pub fn parse(text: &str) -> Result<Self, DeviceIdError> {
        if text.is_empty() {
            return Err(DeviceIdError::Empty);
        }
        if let Some(name) = text.strip_prefix("builtin:") {
            let ok = !name.is_empty()
                && name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            return if ok {
                Ok(DeviceId(text.to_owned()))
            } else {
                Err(DeviceIdError::Syntax(text.to_owned()))
            };
        }
        match url::Url::parse(text) {
            Ok(u) if (u.scheme() == "http" || u.scheme() == "https") && u.has_host() => {
                Ok(DeviceId(text.to_owned()))
            }
            _ => Err(DeviceIdError::Syntax(text.to_owned())),
        }
    }

    pub fn builtin(name: &str) -> Self {
        DeviceId::parse(&format!("builtin:{name}")).expect("valid builtin name")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn builtin_name(&self) -> Option<&str> {
        self.0.strip_prefix("builtin:")
    }

    pub fn is_remote(&self) -> bool {
        self.builtin_name().is_none()
    }
}

impl TryFrom<String> for DeviceId {
    type Error = DeviceIdError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        DeviceId::parse(&value)
    }
}

impl std::str::FromStr for DeviceId {
    type Err = DeviceIdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DeviceId::parse(s)
    }
}

impl From<DeviceId> for String {
    fn from(value: DeviceId) -> Self {
        value.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A violated structural condition, with the offending element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoPorts,
    /// The control colour must exist.
    NoTypes,
    NotSurjective {
        map: &'static str,
        missing: usize,
    },
    NoControlInflow {
        unit: usize,
    },
    NoControlOutflow {
        unit: usize,
    },
    /// `out_unit(relate(i)) != in_unit(i)`.
    RelateCrossesUnits {
        inflow: usize,
    },
    NoControlInport,
    NoControlOutport,
    DuplicateLabel {
        label: String,
        ports: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoPorts => write!(f, "port set is empty"),
            Violation::NoTypes => write!(f, "type set is empty, control colour 0 missing"),
            Violation::NotSurjective { map, missing } => {
                write!(
                    f,
                    "{map} is not surjective: element {missing} is not attained"
                )
            }
            Violation::NoControlInflow { unit } => {
                write!(f, "unit {unit} has no control inflow")
            }
            Violation::NoControlOutflow { unit } => {
                write!(f, "unit {unit} has no control outflow")
            }
            Violation::RelateCrossesUnits { inflow } => write!(
                f,
                "inflow {inflow} is related to an outflow of a different unit"
            ),
            Violation::NoControlInport => write!(f, "no control inport"),
            Violation::NoControlOutport => write!(f, "no control outport"),
            Violation::DuplicateLabel { label, ports } => {
                write!(f, "port label `{label}` is used by ports {ports:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComputonError {
    #[error("malformed structure map: {0}")]
    Shape(String),
    #[error("invalid computon: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("not a trivial computon")]
    NotTrivial,
    #[error("not a primitive computon: {0}")]
    NotPrimitive(String),
    #[error("{kind} {index} is out of range (have {card})")]
    OutOfRange {
        kind: &'static str,
        index: usize,
        card: usize,
    },
}

fn join_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<FinError> for ComputonError {
    fn from(e: FinError) -> Self {
        ComputonError::Shape(e.to_string())
    }
}

/// Flow-list description of a computon, convenient for construction and files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputonParts {
    pub units: usize,
    pub types: usize,
    pub port_labels: Vec<String>,
    pub colours: Vec<usize>,
    /// `(source port, target unit)` per inflow.
    pub inflows: Vec<(usize, usize)>,
    /// `(source unit, target port, device)` per outflow.
    pub outflows: Vec<(usize, usize, DeviceId)>,
    /// Related outflow of each inflow.
    pub relate: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Trivial,
    Primitive,
    Composite,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Computon {
    units: FinSet,
    ports: FinSet,
    inflows: FinSet,
    outflows: FinSet,
    types: FinSet,
    src: FinMap,
    tgt: FinMap,
    out_unit: FinMap,
    in_unit: FinMap,
    colour: FinMap,
    relate: FinMap,
    device: Vec<DeviceId>,
    port_labels: Vec<String>,
}

impl fmt::Debug for Computon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Computon")
            .field("units", &self.units.card())
            .field("ports", &self.port_labels)
            .field("colour", &self.colour.table())
            .field("types", &self.types.card())
            .field("src", &self.src.table())
            .field("in_unit", &self.in_unit.table())
            .field("tgt", &self.tgt.table())
            .field("out_unit", &self.out_unit.table())
            .field("relate", &self.relate.table())
            .field("device", &self.device)
            .finish()
    }
}

impl Computon {
    /// Builds from raw maps without checking the semantic restrictions; only
    /// map shapes must agree. Use [`Computon::validate`] or
    /// [`Computon::new`] for the full check.
    #[allow(clippy::too_many_arguments)]
    pub fn from_maps_unchecked(
        units: usize,
        types: usize,
        src: FinMap,
        tgt: FinMap,
        out_unit: FinMap,
        in_unit: FinMap,
        colour: FinMap,
        relate: FinMap,
        device: Vec<DeviceId>,
        port_labels: Vec<String>,
    ) -> Result<Self, ComputonError> {
        let ports = colour.dom().card();
        let inflows = src.dom().card();
        let outflows = tgt.dom().card();
        let shape = |name: &str, map: &FinMap, dom: usize, cod: usize| {
            if map.dom().card() != dom || map.cod().card() != cod {
                Err(ComputonError::Shape(format!(
                    "{name} is {map:?}, expected {dom} -> {cod}"
                )))
            } else {
                Ok(())
            }
        };
        shape("src", &src, inflows, ports)?;
        shape("tgt", &tgt, outflows, ports)?;
        shape("out_unit", &out_unit, outflows, units)?;
        shape("in_unit", &in_unit, inflows, units)?;
        shape("colour", &colour, ports, types)?;
        shape("relate", &relate, inflows, outflows)?;
        if device.len() != outflows {
            return Err(ComputonError::Shape(format!(
                "{} devices for {outflows} outflows",
                device.len()
            )));
        }
        if port_labels.len() != ports {
            return Err(ComputonError::Shape(format!(
                "{} labels for {ports} ports",
                port_labels.len()
            )));
        }
        Ok(Computon {
            units: FinSet::new(units),
            ports: FinSet::new(ports),
            inflows: FinSet::new(inflows),
            outflows: FinSet::new(outflows),
            types: FinSet::new(types),
            src,
            tgt,
            out_unit,
            in_unit,
            colour,
            relate,
            device,
            port_labels,
        })
    }

    pub fn from_parts_unchecked(parts: ComputonParts) -> Result<Self, ComputonError> {
        let ports = parts.port_labels.len();
        if parts.colours.len() != ports {
            return Err(ComputonError::Shape(format!(
                "{} colours for {ports} ports",
                parts.colours.len()
            )));
        }
        let src = FinMap::from_table(ports, parts.inflows.iter().map(|f| f.0).collect())?;
        let in_unit = FinMap::from_table(parts.units, parts.inflows.iter().map(|f| f.1).collect())?;
        let out_unit =
            FinMap::from_table(parts.units, parts.outflows.iter().map(|f| f.0).collect())?;
        let tgt = FinMap::from_table(ports, parts.outflows.iter().map(|f| f.1).collect())?;
        let device = parts.outflows.into_iter().map(|f| f.2).collect();
        let colour = FinMap::from_table(parts.types, parts.colours)?;
        let relate = FinMap::from_table(tgt.dom().card(), parts.relate)?;
        Computon::from_maps_unchecked(
            parts.units,
            parts.types,
            src,
            tgt,
            out_unit,
            in_unit,
            colour,
            relate,
            device,
            parts.port_labels,
        )
    }

    /// Builds and fully validates.
    pub fn new(parts: ComputonParts) -> Result<Self, ComputonError> {
        Computon::from_parts_unchecked(parts)?.checked()
    }

    pub(crate) fn checked(self) -> Result<Self, ComputonError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ComputonError::Invalid(violations))
        }
    }

    pub fn parts(&self) -> ComputonParts {
        ComputonParts {
            units: self.units.card(),
            types: self.types.card(),
            port_labels: self.port_labels.clone(),
            colours: self.colour.table().to_vec(),
            inflows: (0..self.inflows.card())
                .map(|i| (self.src.apply(i), self.in_unit.apply(i)))
                .collect(),
            outflows: (0..self.outflows.card())
                .map(|o| {
                    (
                        self.out_unit.apply(o),
                        self.tgt.apply(o),
                        self.device[o].clone(),
                    )
                })
                .collect(),
            relate: self.relate.table().to_vec(),
        }
    }

    /// Trivial computon: ports only. Type count is `max(colour) + 1`.
    pub fn trivial<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        colours: &[usize],
    ) -> Result<Self, ComputonError> {
        let types = colours.iter().max().map_or(1, |m| m + 1);
        Computon::trivial_with_types(labels, colours, types)
    }

    pub fn trivial_with_types<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        colours: &[usize],
        types: usize,
    ) -> Result<Self, ComputonError> {
        let port_labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        Computon::new(ComputonParts {
            units: 0,
            types,
            port_labels,
            colours: colours.to_vec(),
            inflows: vec![],
            outflows: vec![],
            relate: vec![],
        })
    }

    /// Primitive computon from its ports and per-flow wiring; fails unless the
    /// result has one unit, one flow per port and injective flow endpoints.
    pub fn primitive(spec: PrimitiveSpec) -> Result<Self, ComputonError> {
        let ports = spec.ports.len();
        let types = spec
            .types
            .unwrap_or_else(|| spec.ports.iter().map(|p| p.1 + 1).max().unwrap_or(1));
        let parts = ComputonParts {
            units: 1,
            types,
            port_labels: spec.ports.iter().map(|p| p.0.clone()).collect(),
            colours: spec.ports.iter().map(|p| p.1).collect(),
            inflows: spec.inputs.iter().map(|&p| (p, 0)).collect(),
            outflows: spec
                .outputs
                .iter()
                .map(|(p, d)| (0, *p, d.clone()))
                .collect(),
            relate: spec.relate.clone(),
        };
        let c = Computon::new(parts)?;
        if c.inflows.card() + c.outflows.card() != ports {
            return Err(ComputonError::NotPrimitive(format!(
                "{} inflows + {} outflows != {ports} ports",
                c.inflows.card(),
                c.outflows.card()
            )));
        }
        if !c.src.is_injective() {
            return Err(ComputonError::NotPrimitive("src is not injective".into()));
        }
        if !c.tgt.is_injective() {
            return Err(ComputonError::NotPrimitive("tgt is not injective".into()));
        }
        Ok(c)
    }

    pub fn units(&self) -> usize {
        self.units.card()
    }
    pub fn ports(&self) -> usize {
        self.ports.card()
    }
    pub fn inflows(&self) -> usize {
        self.inflows.card()
    }
    pub fn outflows(&self) -> usize {
        self.outflows.card()
    }
    pub fn types(&self) -> usize {
        self.types.card()
    }
    pub fn src(&self) -> &FinMap {
        &self.src
    }
    pub fn tgt(&self) -> &FinMap {
        &self.tgt
    }
    pub fn out_unit(&self) -> &FinMap {
        &self.out_unit
    }
    pub fn in_unit(&self) -> &FinMap {
        &self.in_unit
    }
    pub fn colour(&self) -> &FinMap {
        &self.colour
    }
    pub fn relate(&self) -> &FinMap {
        &self.relate
    }
    pub fn device(&self, outflow: usize) -> &DeviceId {
        &self.device[outflow]
    }
    pub fn devices(&self) -> &[DeviceId] {
        &self.device
    }
    pub fn labels(&self) -> &[String] {
        &self.port_labels
    }
    pub fn label(&self, port: usize) -> &str {
        &self.port_labels[port]
    }

    pub fn port_by_label(&self, label: &str) -> Option<usize> {
        self.port_labels.iter().position(|l| l == label)
    }

    /// The device set, derived as the image of the device map.
    pub fn device_set(&self) -> BTreeSet<&DeviceId> {
        self.device.iter().collect()
    }

    pub fn is_control(&self, port: usize) -> bool {
        self.colour.apply(port) == CONTROL
    }

    /// All violated conditions; empty iff the computon is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.ports.is_empty() {
            out.push(Violation::NoPorts);
        }
        if self.types.is_empty() {
            out.push(Violation::NoTypes);
        }
        for (name, map) in [
            ("out_unit", &self.out_unit),
            ("in_unit", &self.in_unit),
            ("relate", &self.relate),
        ] {
            if let Some(missing) = first_missing(map) {
                out.push(Violation::NotSurjective { map: name, missing });
            }
        }

        let mut control_in = vec![false; self.units()];
        for i in 0..self.inflows() {
            if self.is_control(self.src.apply(i)) {
                control_in[self.in_unit.apply(i)] = true;
            }
        }
        let mut control_out = vec![false; self.units()];
        for o in 0..self.outflows() {
            if self.is_control(self.tgt.apply(o)) {
                control_out[self.out_unit.apply(o)] = true;
            }
        }
        for u in 0..self.units() {
            if !control_in[u] {
                out.push(Violation::NoControlInflow { unit: u });
            }
            if !control_out[u] {
                out.push(Violation::NoControlOutflow { unit: u });
            }
        }

        for i in 0..self.inflows() {
            if self.out_unit.apply(self.relate.apply(i)) != self.in_unit.apply(i) {
                out.push(Violation::RelateCrossesUnits { inflow: i });
            }
        }

        if !self.ports.is_empty() {
            if !self.inports().iter().any(|&p| self.is_control(p)) {
                out.push(Violation::NoControlInport);
            }
            if !self.outports().iter().any(|&p| self.is_control(p)) {
                out.push(Violation::NoControlOutport);
            }
        }

        let mut by_label: HashMap<&str, Vec<usize>> = HashMap::new();
        for (p, l) in self.port_labels.iter().enumerate() {
            by_label.entry(l).or_default().push(p);
        }
        let mut dups: Vec<_> = by_label
            .into_iter()
            .filter(|(_, ps)| ps.len() > 1)
            .map(|(l, ps)| Violation::DuplicateLabel {
                label: l.to_owned(),
                ports: ps,
            })
            .collect();
        dups.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        out.extend(dups);
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Ports not targeted by any outflow.
    pub fn inports(&self) -> Vec<usize> {
        let written = self.tgt.image();
        complement(self.ports(), &written)
    }

    /// Ports not read by any inflow.
    pub fn outports(&self) -> Vec<usize> {
        let read = self.src.image();
        complement(self.ports(), &read)
    }

    pub fn is_inport(&self, port: usize) -> bool {
        !self.tgt.table().contains(&port)
    }

    pub fn is_outport(&self, port: usize) -> bool {
        !self.src.table().contains(&port)
    }

    fn check_unit(&self, u: usize) -> Result<(), ComputonError> {
        if u < self.units() {
            Ok(())
        } else {
            Err(ComputonError::OutOfRange {
                kind: "unit",
                index: u,
                card: self.units(),
            })
        }
    }

    fn check_port(&self, p: usize) -> Result<(), ComputonError> {
        if p < self.ports() {
            Ok(())
        } else {
            Err(ComputonError::OutOfRange {
                kind: "port",
                index: p,
                card: self.ports(),
            })
        }
    }

    /// `•u`: ports read by `u`.
    pub fn pre_set(&self, u: usize) -> Result<Vec<usize>, ComputonError> {
        self.check_unit(u)?;
        Ok(self.src.image_of(&self.in_unit.fiber_unchecked(u)))
    }

    /// `u•`: ports written by `u`.
    pub fn post_set(&self, u: usize) -> Result<Vec<usize>, ComputonError> {
        self.check_unit(u)?;
        Ok(self.tgt.image_of(&self.out_unit.fiber_unchecked(u)))
    }

    /// `•p`: units writing `p`.
    pub fn port_pre(&self, p: usize) -> Result<Vec<usize>, ComputonError> {
        self.check_port(p)?;
        Ok(self.out_unit.image_of(&self.tgt.fiber_unchecked(p)))
    }

    /// `p•`: units reading `p`.
    pub fn port_post(&self, p: usize) -> Result<Vec<usize>, ComputonError> {
        self.check_port(p)?;
        Ok(self.in_unit.image_of(&self.src.fiber_unchecked(p)))
    }

    /// Every inport and every port with an inflow reaches some outport through
    /// a path that starts with an inflow.
    pub fn is_connected(&self) -> bool {
        let outports: BTreeSet<usize> = self.outports().into_iter().collect();
        let mut port_ok = vec![false; self.ports()];
        let mut unit_ok = vec![false; self.units()];
        loop {
            let mut changed = false;
            for o in 0..self.outflows() {
                let u = self.out_unit.apply(o);
                let p = self.tgt.apply(o);
                if !unit_ok[u] && (outports.contains(&p) || port_ok[p]) {
                    unit_ok[u] = true;
                    changed = true;
                }
            }
            for i in 0..self.inflows() {
                let p = self.src.apply(i);
                if !port_ok[p] && unit_ok[self.in_unit.apply(i)] {
                    port_ok[p] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.inports()
            .into_iter()
            .chain(self.src.image())
            .all(|p| port_ok[p])
    }

    pub fn is_trivial(&self) -> bool {
        self.units() == 0 && self.inflows() == 0 && self.outflows() == 0
    }

    pub fn is_primitive(&self) -> bool {
        self.units() == 1
            && self.inflows() + self.outflows() == self.ports()
            && self.src.is_injective()
            && self.tgt.is_injective()
    }

    pub fn class(&self) -> Class {
        if self.is_trivial() {
            Class::Trivial
        } else if self.is_primitive() {
            Class::Primitive
        } else {
            Class::Composite
        }
    }

    /// Argument ports of an outflow: `src(relate⁻¹(o))`, ascending.
    pub fn argument_ports(&self, outflow: usize) -> Vec<usize> {
        self.src.image_of(&self.relate.fiber_unchecked(outflow))
    }

    /// Same computon with the given labels.
    pub fn with_labels(&self, labels: Vec<String>) -> Result<Self, ComputonError> {
        let mut parts = self.parts();
        parts.port_labels = labels;
        Computon::new(parts)
    }
}

/// Ports and wiring of a single-unit computon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveSpec {
    /// `(label, colour)` per port.
    pub ports: Vec<(String, usize)>,
    /// Port read by each inflow.
    pub inputs: Vec<usize>,
    /// Target port and device of each outflow.
    pub outputs: Vec<(usize, DeviceId)>,
    /// Related outflow of each inflow.
    pub relate: Vec<usize>,
    pub types: Option<usize>,
}

fn first_missing(map: &FinMap) -> Option<usize> {
    let image = map.image();
    (0..map.cod().card()).find(|y| image.binary_search(y).is_err())
}

fn complement(card: usize, sorted: &[usize]) -> Vec<usize> {
    (0..card)
        .filter(|p| sorted.binary_search(p).is_err())
        .collect()
}
