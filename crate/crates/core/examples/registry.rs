//! Descriptor registry, including a user-registered ensemble.

use qlowdeg::ensembles::StateEnsemble;
use qlowdeg::qcore::QuditRegister;
use qlowdeg::registry::{Param, Registry};

fn main() -> qlowdeg::Result<()> {
    let mut reg = Registry::default();
    reg.register_ensemble("mixed", "maximally mixed qubits", vec![Param { key: "n", help: "qubits", default: Some("1") }], |d| {
        Ok(StateEnsemble::maximally_mixed(QuditRegister::qubits(d.get("n", Some(1))?)?))
    });
    print!("{}", reg.list(None));
    let ens = reg.ensemble("mixed:n=2")?;
    println!("built {} on {} sites", ens.name, ens.register.num_sites());
    Ok(())
}
