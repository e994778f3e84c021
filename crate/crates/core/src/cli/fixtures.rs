/// A shipped example problem with its golden report.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
    pub golden: &'static str,
}

macro_rules! fixture {
    ($name:literal) => {
        Fixture {
            name: $name,
            source: include_str!(concat!("../../fixtures/", $name, ".prob")),
            golden: include_str!(concat!("../../fixtures/golden/", $name, ".json")),
        }
    };
}

pub const FIXTURES: [Fixture; 8] = [
    fixture!("damped_oscillator"),
    fixture!("lane_emden_n0"),
    fixture!("lane_emden_n1"),
    fixture!("lane_emden_n5"),
    fixture!("quantum_gravity_1d"),
    fixture!("sqrt_hamiltonian"),
    fixture!("quartic_kink"),
    fixture!("entropy"),
];

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}
