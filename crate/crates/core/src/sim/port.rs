use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Input,
    Output,
}

/// Power-conjugate classification of a port variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Force, pressure, voltage.
    Effort,
    /// Velocity, volumetric flow rate, current.
    Flow,
    Other,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Effort => "effort",
            Role::Flow => "flow",
            Role::Other => "other",
        })
    }
}

/// Declaration of a port by a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortSpec {
    pub name: &'static str,
    pub role: Role,
}

impl PortSpec {
    pub const fn new(name: &'static str, role: Role) -> Self {
        PortSpec { name, role }
    }
}

/// A port of a specific unit inside a model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub unit_id: String,
    pub port_name: String,
    pub direction: Direction,
    pub role: Role,
}

impl PortRef {
    pub fn key(&self) -> VarKey {
        VarKey::new(&self.unit_id, &self.port_name)
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.unit_id, self.port_name)
    }
}

/// `unit.name` address of a port or a state, used to index traces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub unit: String,
    pub name: String,
}

impl VarKey {
    pub fn new(unit: impl Into<String>, name: impl Into<String>) -> Self {
        VarKey {
            unit: unit.into(),
            name: name.into(),
        }
    }

    /// Parses `unit.name`. The unit id is everything before the first dot.
    pub fn parse(s: &str) -> Option<Self> {
        let (unit, name) = s.split_once('.')?;
        if unit.is_empty() || name.is_empty() {
            return None;
        }
        Some(VarKey::new(unit, name))
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.unit, self.name)
    }
}

/// Output of one unit wired to the input of another. Values cross at
/// communication points only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub source: PortRef,
    pub dest: PortRef,
}

/// An effort connection and a flow connection between the same pair of units,
/// running in opposite directions. Their product is the power crossing the
/// interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerBond {
    pub effort: Connection,
    pub flow: Connection,
}
