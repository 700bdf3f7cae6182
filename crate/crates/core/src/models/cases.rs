use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{ModelRhs, ModelSpec};
use crate::abm::{Effect, Influx, TransitionSpec};
use crate::error::ModelError;
use crate::params::{Case0Params, Case1Params, Case2Params, Case3Params, CaseParams};
use crate::rate::{ParamTable, RateExpr};
use crate::types::SpeciesId;

const T: usize = 0;
const E: usize = 1;
const I: usize = 2;
const S: usize = 3;

/// Parameter table plus a name-to-leaf lookup.
struct Slots(ParamTable);

impl Slots {
    fn new(fields: Vec<(&'static str, f64)>) -> Self {
        Slots(ParamTable::from_pairs(fields))
    }

    fn p(&self, name: &str) -> RateExpr {
        RateExpr::param(self.0.index_of(name).expect("parameter declared by its set"))
    }
}

fn n(species: usize) -> RateExpr {
    RateExpr::count(species)
}

fn one() -> RateExpr {
    RateExpr::constant(1.0)
}

fn influx(name: &str, target: usize, rate: RateExpr) -> Influx {
    Influx { name: name.into(), target, rate }
}

/// Power-law tumour growth. A single signed channel per tumour cell, rate
/// `a T^(alpha-1) - b T^(beta-1)`; positive means divide, negative means die.
pub fn build_case0(params: Case0Params) -> Result<ModelSpec, ModelError> {
    let params = params.validate()?;
    let k = Slots::new(params.fields());
    let rate = k.p("a") * n(T).pow(k.p("alpha") - one()) - k.p("b") * n(T).pow(k.p("beta") - one());
    ModelSpec::assemble(
        "case0",
        vec![SpeciesId::Tumour],
        k.0,
        ModelRhs::Case0(params),
        vec![TransitionSpec::new("proliferation", T, rate, Effect::SignedBranch)],
        vec![],
        vec![],
    )
}

/// Tumour / effector model for treatment scenario `scenario` (1 to 4).
pub fn build_case1(scenario: u8) -> Result<ModelSpec, ModelError> {
    build_case1_with(Case1Params::scenario(scenario)?)
}

/// Tumour / effector model with explicit parameters.
pub fn build_case1_with(params: Case1Params) -> Result<ModelSpec, ModelError> {
    let params = params.validate()?;
    let k = Slots::new(params.fields());
    let transitions = vec![
        TransitionSpec::new("proliferation", T, k.p("a") * (one() - k.p("b") * n(T)), Effect::SignedBranch),
        TransitionSpec::new("dieByEffector", T, k.p("n") * n(E), Effect::RemoveSelf),
        TransitionSpec::new("causeEffectorDamage", T, k.p("m") * n(E), Effect::RemoveRandom(E)),
        TransitionSpec::new("proliferate", E, k.p("p") * RateExpr::saturating(n(T), k.p("g")), Effect::Spawn(E)),
        TransitionSpec::new("apoptosis", E, k.p("d"), Effect::RemoveSelf),
    ];
    let influxes = vec![influx("treatment", E, k.p("s"))];
    let notes = vec![
        String::from(
            "tumour net growth per cell is a(1 - bT), so that T times the rate is the logistic term; \
             the printed rate a - bT would give aT - bT^2",
        ),
        String::from("effector damage fires per tumour cell at m*E, not bare m, so the aggregate loss is mTE"),
    ];
    ModelSpec::assemble(
        "case1",
        vec![SpeciesId::Tumour, SpeciesId::Effector],
        k.0,
        ModelRhs::Case1(params),
        transitions,
        influxes,
        notes,
    )
}

/// Tumour / effector / IL-2 model with the published parameters.
pub fn build_case2() -> Result<ModelSpec, ModelError> {
    build_case2_with(Case2Params::default())
}

/// Tumour / effector / IL-2 model with explicit parameters.
pub fn build_case2_with(params: Case2Params) -> Result<ModelSpec, ModelError> {
    let params = params.validate()?;
    let k = Slots::new(params.fields());
    let transitions = vec![
        TransitionSpec::new("recruitEffector", T, k.p("c"), Effect::Spawn(E)),
        TransitionSpec::new("growth", T, k.p("a") * (one() - k.p("b") * n(T)), Effect::SignedBranch),
        TransitionSpec::new("effectorDeath", E, k.p("mu2"), Effect::RemoveSelf),
        TransitionSpec::new(
            "effectorProliferation",
            E,
            k.p("p1") * RateExpr::saturating(n(I), k.p("g1")),
            Effect::Spawn(E),
        ),
        TransitionSpec::new(
            "killTumour",
            E,
            k.p("aa") * RateExpr::saturating(n(T), k.p("g2")),
            Effect::RemoveRandom(T),
        ),
        TransitionSpec::new("produceIL2", E, k.p("p2") * RateExpr::saturating(n(T), k.p("g3")), Effect::Spawn(I)),
        TransitionSpec::new("il2Loss", I, k.p("mu3"), Effect::RemoveSelf),
    ];
    let influxes = vec![influx("treatmentS1", E, k.p("s1")), influx("treatmentS2", I, k.p("s2"))];
    let notes = vec![
        String::from("recruitment fires per tumour cell at c and spawns an effector"),
        String::from("IL-2 production fires per effector at p2*T/(g3+T)"),
        String::from("kills are messages from effectors at aa*T/(g2+T), each removing a random tumour cell"),
    ];
    ModelSpec::assemble(
        "case2",
        vec![SpeciesId::Tumour, SpeciesId::Effector, SpeciesId::IL2],
        k.0,
        ModelRhs::Case2(params),
        transitions,
        influxes,
        notes,
    )
}

/// Tumour / effector / IL-2 / TGF-beta model with the published parameters.
pub fn build_case3() -> Result<ModelSpec, ModelError> {
    build_case3_with(Case3Params::default())
}

/// Tumour / effector / IL-2 / TGF-beta model with explicit parameters.
pub fn build_case3_with(params: Case3Params) -> Result<ModelSpec, ModelError> {
    let params = params.validate()?;
    let k = Slots::new(params.fields());
    let transitions = vec![
        TransitionSpec::new(
            "proliferation",
            E,
            (k.p("p1") - k.p("q1") * RateExpr::saturating(n(S), k.p("q2"))) * RateExpr::saturating(n(I), k.p("g1")),
            Effect::SignedBranch,
        ),
        TransitionSpec::new("effectorDeath", E, k.p("mu1"), Effect::RemoveSelf),
        TransitionSpec::new(
            "killTumour",
            E,
            k.p("aa") * RateExpr::saturating(n(T), k.p("g2")),
            Effect::RemoveRandom(T),
        ),
        TransitionSpec::new(
            "produceIL2",
            E,
            k.p("p3") * RateExpr::saturating(n(T), k.p("g4")) / (one() + k.p("alpha") * n(S)),
            Effect::Spawn(I),
        ),
        TransitionSpec::new("growth", T, k.p("a") * (one() - n(T) / k.p("K")), Effect::SignedBranch),
        TransitionSpec::new(
            "produceTGF",
            T,
            k.p("p4") * n(T) / (k.p("theta") * k.p("theta") + n(T) * n(T)),
            Effect::Spawn(S),
        ),
        TransitionSpec::new(
            "stimulatesTumourGrowth",
            T,
            k.p("p2") * RateExpr::saturating(n(S), k.p("g3")),
            Effect::Spawn(T),
        ),
        TransitionSpec::new("recruitEffector", T, k.p("c") / (one() + k.p("gamma") * n(S)), Effect::Spawn(E)),
        TransitionSpec::new("il2Loss", I, k.p("mu2"), Effect::RemoveSelf),
        TransitionSpec::new("tgfDecay", S, k.p("mu3"), Effect::RemoveSelf),
    ];
    let notes = vec![
        String::from(
            "growth stimulation fires per tumour cell at p2*S/(g3+S); attaching p2*S/(g3+S) to TGF-beta \
             molecules instead would aggregate to p2*S^2/(g3+S)",
        ),
        String::from("TGF-beta production fires per tumour cell at p4*T/(theta^2+T^2)"),
        String::from("tumour growth is logistic with carrying capacity K, which has no published value"),
    ];
    ModelSpec::assemble(
        "case3",
        vec![SpeciesId::Tumour, SpeciesId::Effector, SpeciesId::IL2, SpeciesId::TGFBeta],
        k.0,
        ModelRhs::Case3(params),
        transitions,
        vec![],
        notes,
    )
}

/// Builder for any parameter set.
pub fn build_model(params: &CaseParams) -> Result<ModelSpec, ModelError> {
    match *params {
        CaseParams::Case0(p) => build_case0(p),
        CaseParams::Case1(p) => build_case1_with(p),
        CaseParams::Case2(p) => build_case2_with(p),
        CaseParams::Case3(p) => build_case3_with(p),
    }
}
