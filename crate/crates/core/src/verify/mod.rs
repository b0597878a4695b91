//! Theorem suites and the JSON verdict report.

mod suites;

use std::cell::OnceCell;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::loop_core::CayleyLoop;
use crate::mult_group::MultGroupBundle;
use crate::normalizer::{normalizer_condition_on, NormalizerCondition};
use crate::perm_group::PermGroup;
use crate::structure::{self, CentralSeries, Subloop};
use crate::Guards;

pub use suites::{checks_for, suite_names, CheckFn};

pub const ARTIFACT_VERSION: &str = concat!("mloop-", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// What a single check found.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub witness: Value,
}

impl Outcome {
    pub fn pass(witness: Value) -> Self {
        Outcome {
            status: Status::Pass,
            witness,
        }
    }

    pub fn fail(witness: Value) -> Self {
        Outcome {
            status: Status::Fail,
            witness,
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Outcome {
            status: Status::Skipped,
            witness: json!({ "reason": reason.into() }),
        }
    }

    /// Pass or fail on a condition, with the same witness either way.
    pub fn from_bool(ok: bool, witness: Value) -> Self {
        if ok {
            Self::pass(witness)
        } else {
            Self::fail(witness)
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub witness: Value,
    pub millis: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopDescriptor {
    pub name: String,
    pub order: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub artifact_version: String,
    #[serde(rename = "loop")]
    pub loop_: LoopDescriptor,
    pub checks: Vec<Check>,
}

impl VerdictReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

/// Shared, lazily computed data for one suite run.
pub struct Context<'a> {
    pub loop_: &'a CayleyLoop,
    pub guards: Guards,
    pub seed: u64,
    bundle: OnceCell<MultGroupBundle>,
    lattice: OnceCell<Vec<Subloop>>,
    associator: OnceCell<Subloop>,
    series: OnceCell<CentralSeries>,
    frattini: OnceCell<Subloop>,
    group_frattini: OnceCell<PermGroup>,
    normalizer_condition: OnceCell<NormalizerCondition>,
}

impl<'a> Context<'a> {
    pub fn new(loop_: &'a CayleyLoop, guards: Guards, seed: u64) -> Self {
        Context {
            loop_,
            guards,
            seed,
            bundle: OnceCell::new(),
            lattice: OnceCell::new(),
            associator: OnceCell::new(),
            series: OnceCell::new(),
            frattini: OnceCell::new(),
            group_frattini: OnceCell::new(),
            normalizer_condition: OnceCell::new(),
        }
    }

    pub fn bundle(&self) -> Result<&MultGroupBundle> {
        get_or_try(&self.bundle, || MultGroupBundle::new(self.loop_))
    }

    pub fn lattice(&self) -> Result<&[Subloop]> {
        get_or_try(&self.lattice, || {
            structure::all_subloops(self.loop_, &self.guards)
        })
        .map(Vec::as_slice)
    }

    pub fn associator_subloop(&self) -> Result<&Subloop> {
        get_or_try(&self.associator, || {
            structure::associator_subloop(self.loop_)
        })
    }

    pub fn central_series(&self) -> Result<&CentralSeries> {
        get_or_try(&self.series, || structure::upper_central_series(self.loop_))
    }

    /// `F(L)`, with `F(1) = 1` for the trivial loop, which has no maximal
    /// subloops.
    pub fn frattini(&self) -> Result<&Subloop> {
        get_or_try(&self.frattini, || {
            if self.loop_.order() == 1 {
                Ok(Subloop::whole(self.loop_))
            } else {
                structure::frattini_subloop(self.loop_)
            }
        })
    }

    pub fn group_frattini(&self) -> Result<&PermGroup> {
        get_or_try(&self.group_frattini, || {
            self.bundle()?.mult_group().frattini_subgroup(&self.guards)
        })
    }

    pub fn normalizer_condition(&self) -> Result<&NormalizerCondition> {
        get_or_try(&self.normalizer_condition, || {
            normalizer_condition_on(self.loop_, self.lattice()?)
        })
    }

    /// Nilpotency class of the loop; finite CMLs always have one.
    pub fn class(&self) -> Result<usize> {
        self.central_series()?.class.ok_or_else(|| {
            Error::Postcondition("upper central series does not reach the loop".into())
        })
    }
}

fn get_or_try<T>(cell: &OnceCell<T>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = f()?;
    Ok(cell.get_or_init(|| v))
}

/// Runs every check of `suite` (or all of them for `"all"`) in registration
/// order. Guard overflows and invalid input abort the run; a violated
/// internal postcondition is reported as a failed check.
pub fn run_suite(l: &CayleyLoop, suite: &str, seed: u64, guards: Guards) -> Result<VerdictReport> {
    let checks = checks_for(suite)?;
    l.require_cml()?;
    let ctx = Context::new(l, guards, seed);
    let mut out = Vec::with_capacity(checks.len());
    for (name, f) in checks {
        let start = Instant::now();
        let outcome = match f(&ctx) {
            Ok(o) => o,
            Err(Error::Postcondition(msg)) => Outcome::fail(json!({ "postcondition": msg })),
            Err(e) => return Err(e),
        };
        out.push(Check {
            name: name.to_string(),
            status: outcome.status,
            witness: outcome.witness,
            millis: start.elapsed().as_millis() as u64,
        });
    }
    Ok(VerdictReport {
        artifact_version: ARTIFACT_VERSION.to_string(),
        loop_: LoopDescriptor {
            name: l.label(),
            order: l.order(),
        },
        checks: out,
    })
}
