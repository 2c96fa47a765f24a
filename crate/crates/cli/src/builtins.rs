//! Built-in experiments, stored as config documents so they go through the
//! same parser as user configs.

pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "osc-fixed",
        description: "split oscillator, mass at rest, fixed step 0.1",
        source: r#"description = "split oscillator, mass at rest, fixed step 0.1"
t_end = 40.0

[model]
kind = "oscillator"
v2 = 0.0

[controller]
kind = "fixed"
dt = 0.1
"#,
    },
    Builtin {
        name: "osc-fixed-v1",
        description: "split oscillator, initial velocity 1, fixed step 0.1",
        source: r#"description = "split oscillator, initial velocity 1, fixed step 0.1"
t_end = 40.0

[model]
kind = "oscillator"
v2 = 1.0

[controller]
kind = "fixed"
dt = 0.1
"#,
    },
    Builtin {
        name: "osc-scheduled",
        description: "split oscillator, initial velocity 1, step 0.1 until t = 0.2 then 0.01",
        source: r#"description = "split oscillator, initial velocity 1, step 0.1 until t = 0.2 then 0.01"
t_end = 40.0

[model]
kind = "oscillator"
v2 = 1.0

[controller]
kind = "scheduled"
pieces = [[0.0, 0.1], [0.2, 0.01]]
"#,
    },
    Builtin {
        name: "osc-pi",
        description: "split oscillator, initial velocity 1, energy-residual PI control",
        source: r#"description = "split oscillator, initial velocity 1, energy-residual PI control"
t_end = 40.0

[model]
kind = "oscillator"
v2 = 1.0

[controller]
kind = "pi"
"#,
    },
    Builtin {
        name: "reservoirs-fixed",
        description: "connected reservoirs, unit injection at t = 1, fixed step 0.001",
        source: r#"description = "connected reservoirs, unit injection at t = 1, fixed step 0.001"
t_end = 5.0

[model]
kind = "reservoirs"

[controller]
kind = "fixed"
dt = 0.001

[[events]]
time = 1.0
unit = "S1"
state = "V1"
amount = 1.0
"#,
    },
    Builtin {
        name: "reservoirs-bangbang",
        description:
            "connected reservoirs, unit injection at t = 1, flow-triggered bang-bang steps",
        source: r#"description = "connected reservoirs, unit injection at t = 1, flow-triggered bang-bang steps"
t_end = 5.0

[model]
kind = "reservoirs"

[controller]
kind = "bangbang"
monitor = "S2.y2"
threshold = 0.5
dt_small = 0.001
dt_large = 0.01

[[events]]
time = 1.0
unit = "S1"
state = "V1"
amount = 1.0
"#,
    },
    Builtin {
        name: "general-poly",
        description: "cubic flow integrated on both sides of a connection, step 0.05 then 0.01",
        source: r#"description = "cubic flow integrated on both sides of a connection, step 0.05 then 0.01"
t_end = 2.0

[model]
kind = "general-flow"
q = [0.5, -1.0, 0.75, -0.25]

[controller]
kind = "scheduled"
pieces = [[0.0, 0.05], [1.0, 0.01]]
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn every_builtin_prepares() {
        for b in BUILTINS {
            let e = Experiment::parse(b.name, b.name, b.source).unwrap();
            assert_eq!(e.config.description.as_deref(), Some(b.description));
            e.prepare()
                .unwrap_or_else(|err| panic!("{}: {err}", b.name));
        }
    }
}
