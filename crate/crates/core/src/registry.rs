//! Named ensembles, measurement plans and detectors, addressed by descriptors
//! of the form `name:key=value,key=value` (bare items are flags).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::biclique::{sample_copy, sample_secret, BicliqueInstance, Detector, EXPLICIT_CAP};
use crate::ensembles::{
    make_circuit_ensemble, make_gibbs_ensemble, make_stabilizer_ensemble, Architecture, HamiltonianKind, Sample,
    StateEnsemble,
};
use crate::error::{Error, Result};
use crate::lowdeg::MeasurementPlan;
use crate::qcore::QuditRegister;
use crate::rng::Stream;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Descriptor {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub flags: Vec<String>,
}

impl Descriptor {
    /// Parse `name[:|,]item,item,...` where an item is `key=value` or a bare flag.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let split = text.find([':', ',']).unwrap_or(text.len());
        let name = text[..split].trim();
        if name.is_empty() {
            return Err(Error::Parse(format!("descriptor '{text}' has no name")));
        }
        let mut d = Descriptor { name: name.to_string(), ..Default::default() };
        let rest = text.get(split + 1..).unwrap_or("");
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => {
                    let (k, v) = (k.trim(), v.trim());
                    if k.is_empty() || v.is_empty() {
                        return Err(Error::Parse(format!("descriptor '{name}': malformed field '{item}'")));
                    }
                    if d.params.insert(k.to_string(), v.to_string()).is_some() {
                        return Err(Error::Parse(format!("descriptor '{name}': field '{k}' given twice")));
                    }
                }
                None => d.flags.push(item.to_string()),
            }
        }
        Ok(d)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.params.get(key) {
            Some(v) => v
                .parse()
                .map_err(|_| Error::Parse(format!("descriptor '{}': field '{key}' has invalid value '{v}'", self.name))),
            None => default.ok_or_else(|| Error::Parse(format!("descriptor '{}': missing field '{key}'", self.name))),
        }
    }

    fn check_fields(&self, schema: &[Param]) -> Result<()> {
        if let Some(k) = self.params.keys().find(|k| !schema.iter().any(|p| p.key == k.as_str())) {
            return Err(Error::Parse(format!("descriptor '{}': unknown field '{k}'", self.name)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub key: &'static str,
    pub help: &'static str,
    pub default: Option<&'static str>,
}

const fn param(key: &'static str, help: &'static str, default: Option<&'static str>) -> Param {
    Param { key, help, default }
}

pub type EnsembleBuilder = Box<dyn Fn(&Descriptor) -> Result<StateEnsemble> + Send + Sync>;
pub type PlanBuilder = Box<dyn Fn(&Descriptor, &QuditRegister, &mut Stream) -> Result<MeasurementPlan> + Send + Sync>;

pub struct Entry<B> {
    pub name: String,
    pub summary: String,
    pub params: Vec<Param>,
    pub build: B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Ensemble,
    Plan,
    Detector,
}

/// All descriptors known to the CLI. Extra entries can be added with
/// [`Registry::register_ensemble`] and [`Registry::register_plan`].
pub struct Registry {
    ensembles: Vec<Entry<EnsembleBuilder>>,
    plans: Vec<Entry<PlanBuilder>>,
}

fn qubits(d: &Descriptor) -> Result<QuditRegister> {
    QuditRegister::qubits(d.get("n", Some(1))?)
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { ensembles: Vec::new(), plans: Vec::new() };
        r.register_ensemble(
            "haar",
            "Haar-random pure states on n sites of dimension d",
            vec![param("n", "sites", Some("1")), param("d", "local dimension", Some("2"))],
            |d| {
                let (n, dim): (usize, usize) = (d.get("n", Some(1))?, d.get("d", Some(2))?);
                Ok(StateEnsemble::haar(QuditRegister::uniform(n, dim)?).with_param("n", n).with_param("d", dim))
            },
        );
        r.register_ensemble(
            "stabilizer",
            "uniform n-qubit stabilizer states",
            vec![param("n", "qubits", Some("1"))],
            |d| make_stabilizer_ensemble(d.get("n", Some(1))?),
        );
        r.register_ensemble(
            "brickwork",
            "outputs of random brickwork circuits on |0...0>",
            vec![
                param("n", "qubits (even)", Some("4")),
                param("L", "depth", Some("2")),
                param("block", "coarse-grained block size; 0 for two-qubit bricks", Some("0")),
            ],
            |d| {
                let block: usize = d.get("block", Some(0))?;
                let arch = if block == 0 { Architecture::Brickwork } else { Architecture::CoarseGrained { block } };
                make_circuit_ensemble(d.get("n", Some(4))?, d.get("L", Some(2))?, arch)
            },
        );
        r.register_ensemble(
            "gibbs-gue",
            "Gibbs states of GUE Hamiltonians",
            vec![param("n", "qubits", Some("1")), param("beta", "inverse temperature", Some("1"))],
            |d| make_gibbs_ensemble(HamiltonianKind::Gue, d.get("n", Some(1))?, d.get("beta", Some(1.0))?, 0),
        );
        r.register_ensemble(
            "gibbs-rsps",
            "Gibbs states of random sparse Pauli Hamiltonians",
            vec![
                param("n", "qubits", Some("1")),
                param("beta", "inverse temperature", Some("1")),
                param("J", "number of Pauli terms", Some("4")),
            ],
            |d| make_gibbs_ensemble(HamiltonianKind::Rsps, d.get("n", Some(1))?, d.get("beta", Some(1.0))?, d.get("J", Some(4))?),
        );
        r.register_ensemble(
            "biclique",
            "planted biclique states sigma_{rho,S} (kappa = lambda/n)",
            vec![
                param("n", "qudits", Some("2")),
                param("d", "local dimension", Some("2")),
                param("lambda", "expected planted size", Some("1")),
            ],
            |d| {
                let inst = BicliqueInstance::new(d.get("n", Some(2))?, d.get("d", Some(2))?, d.get("lambda", Some(1.0))?, 1)?;
                if inst.d.checked_pow(inst.n as u32).map_or(true, |v| v > EXPLICIT_CAP) {
                    return Err(Error::ResourceCap(format!("{}^{} exceeds {EXPLICIT_CAP}", inst.d, inst.n)));
                }
                let reg = QuditRegister::uniform(inst.n, inst.d)?;
                Ok(StateEnsemble::from_sampler("biclique", reg, move |rng| {
                    Ok(Sample::Mixed(sample_copy(&inst, &sample_secret(&inst, rng)?)?))
                })
                .with_param("n", inst.n)
                .with_param("d", inst.d)
                .with_param("lambda", inst.lambda))
            },
        );
        r.register_ensemble(
            "point",
            "a single fixed state: flag zero-state or maximally-mixed",
            vec![param("n", "qubits", Some("1"))],
            |d| {
                let reg = qubits(d)?;
                match d.flags.first().map(String::as_str) {
                    Some("zero-state") | None => Ok(StateEnsemble::zero_state(reg)),
                    Some("maximally-mixed") => Ok(StateEnsemble::maximally_mixed(reg)),
                    Some(other) => Err(Error::Parse(format!("descriptor 'point': unknown state '{other}'"))),
                }
            },
        );
        r.register_plan(
            "comp-basis",
            "computational-basis readout of every copy",
            vec![param("m", "copies", Some("1"))],
            |d, reg, _| MeasurementPlan::computational(reg.clone(), d.get("m", Some(1))?),
        );
        r.register_plan(
            "random-local",
            "independent Haar single-site bases per copy",
            vec![param("m", "copies", Some("1"))],
            |d, reg, rng| MeasurementPlan::random_local(reg.clone(), d.get("m", Some(1))?, rng),
        );
        r.register_plan(
            "random-global",
            "Haar global PVM per copy with optional ancilla qubits",
            vec![param("m", "copies", Some("1")), param("ancilla", "ancilla qubits", Some("0"))],
            |d, reg, rng| MeasurementPlan::random_global(reg.clone(), d.get("m", Some(1))?, d.get("ancilla", Some(0))?, rng),
        );
        r
    }
}

const DETECTORS: [(Detector, &str); 3] = [
    (Detector::EdgeCount, "two-sided count of first-half readouts"),
    (Detector::Swap, "pairwise SWAP-projector acceptance fraction"),
    (Detector::Scan, "brute-force dense-submatrix scan"),
];

impl Registry {
    pub fn register_ensemble<F>(&mut self, name: &str, summary: &str, params: Vec<Param>, build: F)
    where
        F: Fn(&Descriptor) -> Result<StateEnsemble> + Send + Sync + 'static,
    {
        self.ensembles.retain(|e| e.name != name);
        self.ensembles.push(Entry { name: name.into(), summary: summary.into(), params, build: Box::new(build) });
    }

    pub fn register_plan<F>(&mut self, name: &str, summary: &str, params: Vec<Param>, build: F)
    where
        F: Fn(&Descriptor, &QuditRegister, &mut Stream) -> Result<MeasurementPlan> + Send + Sync + 'static,
    {
        self.plans.retain(|e| e.name != name);
        self.plans.push(Entry { name: name.into(), summary: summary.into(), params, build: Box::new(build) });
    }

    pub fn ensemble(&self, text: &str) -> Result<StateEnsemble> {
        let d = Descriptor::parse(text)?;
        let e = self
            .ensembles
            .iter()
            .find(|e| e.name == d.name)
            .ok_or_else(|| Error::Parse(format!("unknown ensemble '{}'", d.name)))?;
        d.check_fields(&e.params)?;
        (e.build)(&d)
    }

    pub fn plan(&self, text: &str, register: &QuditRegister, rng: &mut Stream) -> Result<MeasurementPlan> {
        let d = Descriptor::parse(text)?;
        let e = self
            .plans
            .iter()
            .find(|e| e.name == d.name)
            .ok_or_else(|| Error::Parse(format!("unknown plan '{}'", d.name)))?;
        d.check_fields(&e.params)?;
        (e.build)(&d, register, rng)
    }

    /// `(kind, name)` for every entry, optionally filtered by substring.
    pub fn names(&self, filter: Option<&str>) -> Vec<(Kind, String)> {
        let keep = |n: &str| filter.map_or(true, |f| f.is_empty() || n.contains(f));
        let mut out: Vec<(Kind, String)> =
            self.ensembles.iter().filter(|e| keep(&e.name)).map(|e| (Kind::Ensemble, e.name.clone())).collect();
        out.extend(self.plans.iter().filter(|e| keep(&e.name)).map(|e| (Kind::Plan, e.name.clone())));
        out.extend(DETECTORS.iter().filter(|(d, _)| keep(d.name())).map(|(d, _)| (Kind::Detector, d.name().to_string())));
        out
    }

    pub fn list(&self, filter: Option<&str>) -> String {
        let keep = |n: &str| filter.map_or(true, |f| f.is_empty() || n.contains(f));
        let mut out = String::new();
        let mut section = |title: &str, rows: Vec<(&str, &str, &[Param])>| {
            if rows.is_empty() {
                return;
            }
            let _ = writeln!(out, "{title}:");
            for (name, summary, params) in rows {
                let schema: Vec<String> = params
                    .iter()
                    .map(|p| match p.default {
                        Some(d) => format!("{}={d} ({})", p.key, p.help),
                        None => format!("{} ({})", p.key, p.help),
                    })
                    .collect();
                let _ = writeln!(out, "  {name:<14} {summary}");
                if !schema.is_empty() {
                    let _ = writeln!(out, "  {:<14} {}", "", schema.join(", "));
                }
            }
        };
        section(
            "ensembles",
            self.ensembles.iter().filter(|e| keep(&e.name)).map(|e| (e.name.as_str(), e.summary.as_str(), e.params.as_slice())).collect(),
        );
        section(
            "plans",
            self.plans.iter().filter(|e| keep(&e.name)).map(|e| (e.name.as_str(), e.summary.as_str(), e.params.as_slice())).collect(),
        );
        section("detectors", DETECTORS.iter().filter(|(d, _)| keep(d.name())).map(|(d, s)| (d.name(), *s, &[][..])).collect());
        out
    }
}
