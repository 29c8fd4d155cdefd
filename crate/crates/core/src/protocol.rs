//! Multi-cycle distillation schedules.
//!
//! A [`ProtocolPlan`] is a dataflow graph: each [`Cycle`] consumes two
//! states (inputs, ancillas, or states produced by earlier cycles) and
//! produces one. States are linear resources and may be consumed once.
//! Cycles act on disjoint states, so the cumulative success probability is
//! the product of the per-cycle probabilities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::Rational;
use crate::dense::DenseOracle;
use crate::distillation::{
    distill_step, oracle_distill, success_probability, DistillError, Selection, X0Spec,
};
use crate::zstate::BlockSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Input,
    Ancilla,
    Intermediate,
}

/// A named `Z_k(n)` in a plan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRef {
    pub id: String,
    pub k: usize,
    pub n: usize,
    pub origin: Origin,
}

impl StateRef {
    pub fn new(id: impl Into<String>, k: usize, n: usize, origin: Origin) -> Self {
        Self { id: id.into(), k, n, origin }
    }

    /// `Z_k(n)`.
    pub fn descriptor(&self) -> String {
        format!("Z_{}({})", self.k, self.n)
    }
}

impl fmt::Display for StateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.id, self.descriptor())
    }
}

/// One preparation and projection: `left` and `right` are merged into
/// `produced`, consuming `2k` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cycle {
    pub left: StateRef,
    pub right: StateRef,
    pub produced: String,
}

impl Cycle {
    /// The state this cycle yields, assuming its operands share `k`.
    pub fn output(&self) -> StateRef {
        let k = self.left.k;
        StateRef::new(
            self.produced.clone(),
            k,
            (self.left.n + self.right.n).saturating_sub(2 * k),
            Origin::Intermediate,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub k: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolPlan {
    pub k: usize,
    pub inputs: Vec<StateRef>,
    #[serde(default)]
    pub ancillas: Vec<StateRef>,
    #[serde(default)]
    pub cycles: Vec<Cycle>,
    pub target: Target,
}

/// A reason a plan cannot run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroExcitations,
    NoStates,
    DuplicateId(String),
    WrongOrigin { id: String, expected: Origin },
    StateKMismatch { id: String, k: usize, plan_k: usize },
    KMismatch { cycle: usize, left: usize, right: usize },
    OperandTooSmall { cycle: usize, id: String, k: usize, n: usize },
    UnknownOperand { cycle: usize, id: String },
    OperandDiffers { cycle: usize, id: String },
    SelfPairing { cycle: usize, id: String },
    DoubleConsumption { cycle: usize, id: String },
    TargetMismatch { expected: String, got: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroExcitations => write!(f, "plan k must be >= 1"),
            Violation::NoStates => write!(f, "plan declares no states"),
            Violation::DuplicateId(id) => write!(f, "state id `{id}` declared more than once"),
            Violation::WrongOrigin { id, expected } => {
                write!(f, "state `{id}` must have origin {expected:?}")
            }
            Violation::StateKMismatch { id, k, plan_k } => {
                write!(f, "state `{id}` has k={k} but the plan has k={plan_k}")
            }
            Violation::KMismatch { cycle, left, right } => {
                write!(f, "cycle {cycle}: k mismatch ({left} vs {right})")
            }
            Violation::OperandTooSmall { cycle, id, k, n } => {
                write!(f, "cycle {cycle}: operand `{id}` has n < 2k (n={n}, k={k})")
            }
            Violation::UnknownOperand { cycle, id } => {
                write!(f, "cycle {cycle}: operand `{id}` is not available yet")
            }
            Violation::OperandDiffers { cycle, id } => {
                write!(f, "cycle {cycle}: operand `{id}` does not match its declaration")
            }
            Violation::SelfPairing { cycle, id } => {
                write!(f, "cycle {cycle}: `{id}` used as both operands")
            }
            Violation::DoubleConsumption { cycle, id } => {
                write!(f, "cycle {cycle}: double consumption of `{id}`")
            }
            Violation::TargetMismatch { expected, got } => {
                write!(f, "final state {got} does not match target {expected}")
            }
        }
    }
}

impl ProtocolPlan {
    /// Every declared state plus every cycle output, in plan order.
    pub fn all_states(&self) -> Vec<StateRef> {
        self.inputs
            .iter()
            .chain(&self.ancillas)
            .cloned()
            .chain(self.cycles.iter().map(Cycle::output))
            .collect()
    }

    /// The state the plan delivers: the last cycle's output, or the input
    /// matching the target when there are no cycles.
    pub fn final_state(&self) -> Option<StateRef> {
        match self.cycles.last() {
            Some(c) => Some(c.output()),
            None => self
                .inputs
                .iter()
                .find(|s| s.k == self.target.k && s.n == self.target.n)
                .or_else(|| self.inputs.first())
                .cloned(),
        }
    }

    /// Length of the longest dependency chain of cycles.
    pub fn depth(&self) -> usize {
        let mut depth: BTreeMap<&str, usize> = BTreeMap::new();
        let mut best = 0;
        for c in &self.cycles {
            let d = 1 + depth
                .get(c.left.id.as_str())
                .copied()
                .unwrap_or(0)
                .max(depth.get(c.right.id.as_str()).copied().unwrap_or(0));
            depth.insert(&c.produced, d);
            best = best.max(d);
        }
        best
    }

    /// States along the longest dependency chain ending at the final state,
    /// leaf first. Ties go to the left operand.
    pub fn critical_path(&self) -> Vec<StateRef> {
        let mut depth: BTreeMap<&str, usize> = BTreeMap::new();
        let mut producer: BTreeMap<&str, &Cycle> = BTreeMap::new();
        for c in &self.cycles {
            let dl = depth.get(c.left.id.as_str()).copied().unwrap_or(0);
            let dr = depth.get(c.right.id.as_str()).copied().unwrap_or(0);
            depth.insert(&c.produced, 1 + dl.max(dr));
            producer.insert(&c.produced, c);
        }
        let Some(last) = self.final_state() else { return Vec::new() };
        let mut path = vec![last.clone()];
        let mut cur = last.id;
        while let Some(c) = producer.get(cur.as_str()) {
            let dl = depth.get(c.left.id.as_str()).copied().unwrap_or(0);
            let dr = depth.get(c.right.id.as_str()).copied().unwrap_or(0);
            let next = if dr > dl { &c.right } else { &c.left };
            path.push(next.clone());
            cur = next.id.clone();
        }
        path.reverse();
        path
    }
}

/// Checks `k`-consistency, operand sizes, dataflow order, linearity and
/// the target. An empty result means the plan is valid.
pub fn validate_plan(plan: &ProtocolPlan) -> Vec<Violation> {
    let mut out = Vec::new();
    let k = plan.k;
    if k == 0 {
        out.push(Violation::ZeroExcitations);
    }
    if plan.inputs.is_empty() && plan.ancillas.is_empty() {
        out.push(Violation::NoStates);
        return out;
    }

    let mut declared: BTreeMap<String, StateRef> = BTreeMap::new();
    let mut ids = BTreeSet::new();
    for (states, origin) in [(&plan.inputs, Origin::Input), (&plan.ancillas, Origin::Ancilla)] {
        for s in states {
            if !ids.insert(s.id.clone()) {
                out.push(Violation::DuplicateId(s.id.clone()));
            }
            if s.origin != origin {
                out.push(Violation::WrongOrigin { id: s.id.clone(), expected: origin });
            }
            if s.k != k {
                out.push(Violation::StateKMismatch { id: s.id.clone(), k: s.k, plan_k: k });
            }
            declared.insert(s.id.clone(), s.clone());
        }
    }
    for c in &plan.cycles {
        if !ids.insert(c.produced.clone()) {
            out.push(Violation::DuplicateId(c.produced.clone()));
        }
    }

    let mut available: BTreeMap<String, StateRef> = declared;
    let mut consumed: BTreeSet<String> = BTreeSet::new();
    for (i, c) in plan.cycles.iter().enumerate() {
        if c.left.k != c.right.k {
            out.push(Violation::KMismatch { cycle: i, left: c.left.k, right: c.right.k });
        }
        if c.left.id == c.right.id {
            out.push(Violation::SelfPairing { cycle: i, id: c.left.id.clone() });
        }
        for op in [&c.left, &c.right] {
            if op.n < 2 * op.k || op.k == 0 {
                out.push(Violation::OperandTooSmall { cycle: i, id: op.id.clone(), k: op.k, n: op.n });
            }
            if consumed.contains(&op.id) {
                out.push(Violation::DoubleConsumption { cycle: i, id: op.id.clone() });
                continue;
            }
            match available.get(&op.id) {
                None => out.push(Violation::UnknownOperand { cycle: i, id: op.id.clone() }),
                Some(decl) if decl != op => {
                    out.push(Violation::OperandDiffers { cycle: i, id: op.id.clone() })
                }
                Some(_) => {}
            }
        }
        consumed.insert(c.left.id.clone());
        consumed.insert(c.right.id.clone());
        if c.left.k == c.right.k {
            let produced = c.output();
            available.entry(produced.id.clone()).or_insert(produced);
        }
    }

    let expected = format!("Z_{}({})", plan.target.k, plan.target.n);
    match plan.final_state() {
        Some(f) if f.k == plan.target.k && f.n == plan.target.n => {}
        Some(f) => out.push(Violation::TargetMismatch { expected, got: f.descriptor() }),
        None => out.push(Violation::TargetMismatch { expected, got: "nothing".into() }),
    }
    out
}

/// Per-plan qubit accounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub input_qubits: usize,
    pub ancilla_qubits: usize,
    pub consumed_qubits: usize,
    pub cycles: usize,
    /// Qubits held by unconsumed states after the last cycle.
    pub output_qubits: usize,
    /// Longest dependency chain of cycles.
    pub depth: usize,
    /// Number of input states drawn from the supply.
    pub input_states: usize,
}

impl ResourceLedger {
    pub fn for_plan(plan: &ProtocolPlan) -> Self {
        let input_qubits = plan.inputs.iter().map(|s| s.n).sum();
        let ancilla_qubits = plan.ancillas.iter().map(|s| s.n).sum();
        let consumed: BTreeSet<&str> =
            plan.cycles.iter().flat_map(|c| [c.left.id.as_str(), c.right.id.as_str()]).collect();
        let output_qubits =
            plan.all_states().iter().filter(|s| !consumed.contains(s.id.as_str())).map(|s| s.n).sum();
        Self {
            input_qubits,
            ancilla_qubits,
            consumed_qubits: 2 * plan.k * plan.cycles.len(),
            cycles: plan.cycles.len(),
            output_qubits,
            depth: plan.depth(),
            input_states: plan.inputs.len(),
        }
    }

    pub fn is_conserved(&self) -> bool {
        self.output_qubits + self.consumed_qubits == self.input_qubits + self.ancilla_qubits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    pub index: usize,
    pub left: StateRef,
    pub right: StateRef,
    pub produced: StateRef,
    pub probability: Rational,
    /// Whether the dense oracle confirmed this cycle.
    pub oracle_checked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionReport {
    pub cycles: Vec<CycleReport>,
    pub final_state: StateRef,
    /// The delivered state in block form.
    pub final_block: BlockSum,
    pub cumulative_success: Rational,
    pub ledger: ResourceLedger,
    pub critical_path: Vec<StateRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutionError {
    #[error("plan has {} violation(s)", .0.len())]
    InvalidPlan(Vec<Violation>),
    #[error("cycle {cycle}: {source}")]
    Cycle {
        cycle: usize,
        #[source]
        source: DistillError,
    },
    #[error("cycle {cycle}: dense oracle disagrees: {detail}")]
    OracleMismatch { cycle: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExecuteOptions {
    /// Cross-check each cycle whose operands fit under the cap.
    pub verify_with_oracle: bool,
    pub oracle: DenseOracle,
}

/// Runs every cycle symbolically, in order.
pub fn execute_plan(
    plan: &ProtocolPlan,
    options: &ExecuteOptions,
) -> Result<ExecutionReport, ExecutionError> {
    let violations = validate_plan(plan);
    if !violations.is_empty() {
        return Err(ExecutionError::InvalidPlan(violations));
    }
    let mut live: BTreeMap<String, BlockSum> = BTreeMap::new();
    for s in plan.inputs.iter().chain(&plan.ancillas) {
        let block = BlockSum::z_state(s.k, s.n, s.id.clone())
            .map_err(|e| ExecutionError::Cycle { cycle: 0, source: e.into() })?;
        live.insert(s.id.clone(), block);
    }

    let mut cycles = Vec::with_capacity(plan.cycles.len());
    let mut cumulative = Rational::one();
    for (i, c) in plan.cycles.iter().enumerate() {
        let cycle_err = |source: DistillError| ExecutionError::Cycle { cycle: i, source };
        let left = live.remove(&c.left.id).expect("validated operand");
        let right = live.remove(&c.right.id).expect("validated operand");
        let k = c.left.k;
        let selection = Selection::first(k);
        let outcome = distill_step(&left, &right, &selection, &c.produced).map_err(cycle_err)?;

        let closed = success_probability(k, c.left.n, c.right.n).map_err(cycle_err)?;
        if closed != outcome.success_probability {
            return Err(ExecutionError::OracleMismatch {
                cycle: i,
                detail: format!(
                    "symbolic probability {} differs from closed form {closed}",
                    outcome.success_probability
                ),
            });
        }

        let mut oracle_checked = false;
        if options.verify_with_oracle && c.left.n + c.right.n <= options.oracle.cap() {
            let spec = X0Spec::collecting(k).map_err(cycle_err)?;
            let dense = oracle_distill(&options.oracle, k, c.left.n, c.right.n, &selection, &spec)
                .map_err(cycle_err)?;
            if dense.probability != outcome.success_probability {
                return Err(ExecutionError::OracleMismatch {
                    cycle: i,
                    detail: format!(
                        "oracle probability {} vs symbolic {}",
                        dense.probability, outcome.success_probability
                    ),
                });
            }
            let symbolic = options.oracle.to_dense(&outcome.post_state).map_err(|e| cycle_err(e.into()))?;
            if dense.remainder.ratio_to(&symbolic).is_none() {
                return Err(ExecutionError::OracleMismatch {
                    cycle: i,
                    detail: "post-selected state is not proportional to the symbolic result".into(),
                });
            }
            oracle_checked = true;
        }

        cumulative *= &outcome.success_probability;
        live.insert(c.produced.clone(), outcome.post_state);
        cycles.push(CycleReport {
            index: i,
            left: c.left.clone(),
            right: c.right.clone(),
            produced: c.output(),
            probability: outcome.success_probability,
            oracle_checked,
        });
    }

    let final_state = plan.final_state().expect("validated plan has a final state");
    let final_block = live.remove(&final_state.id).expect("final state is live");
    Ok(ExecutionReport {
        cycles,
        final_state,
        final_block,
        cumulative_success: cumulative,
        ledger: ResourceLedger::for_plan(plan),
        critical_path: plan.critical_path(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("k must be >= 1")]
    ZeroExcitations,
    #[error("n={n} is below the minimum {min} for k={k}")]
    TooSmall { k: usize, n: usize, min: usize },
}

fn base_id(i: usize) -> String {
    format!("in{i}")
}

/// Two-cycle lossless schedule: an ancilla `Z_k(4k)` merges with
/// `Z_k(n1)` into `Z_k(n1 + 2k)`, which then merges with `Z_k(n2)` into
/// `Z_k(n1 + n2)`.
pub fn gen_exact_plan(k: usize, n1: usize, n2: usize) -> Result<ProtocolPlan, PlanError> {
    if k == 0 {
        return Err(PlanError::ZeroExcitations);
    }
    for n in [n1, n2] {
        if n < 2 * k {
            return Err(PlanError::TooSmall { k, n, min: 2 * k });
        }
    }
    let a = StateRef::new("A", k, n1, Origin::Input);
    let b = StateRef::new("B", k, n2, Origin::Input);
    let anc = StateRef::new("ancilla", k, 4 * k, Origin::Ancilla);
    let first = Cycle { left: anc.clone(), right: a.clone(), produced: "intermediate".into() };
    let second = Cycle { left: first.output(), right: b.clone(), produced: "final".into() };
    Ok(ProtocolPlan {
        k,
        inputs: vec![a, b],
        ancillas: vec![anc],
        cycles: vec![first, second],
        target: Target { k, n: n1 + n2 },
    })
}

/// Arithmetic-progression schedule from a supply of `Z_k(2k+1)`: each
/// cycle adds one fresh base state to the running state.
pub fn gen_incremental_plan(k: usize, n_target: usize) -> Result<ProtocolPlan, PlanError> {
    if k == 0 {
        return Err(PlanError::ZeroExcitations);
    }
    let base = 2 * k + 1;
    if n_target < base {
        return Err(PlanError::TooSmall { k, n: n_target, min: base });
    }
    let steps = n_target - base;
    let inputs: Vec<StateRef> =
        (0..=steps).map(|i| StateRef::new(base_id(i), k, base, Origin::Input)).collect();
    let mut cycles = Vec::with_capacity(steps);
    let mut current = inputs[0].clone();
    for (i, fresh) in inputs.iter().enumerate().skip(1) {
        let cycle = Cycle { left: current, right: fresh.clone(), produced: format!("s{i}") };
        current = cycle.output();
        cycles.push(cycle);
    }
    Ok(ProtocolPlan { k, inputs, ancillas: Vec::new(), cycles, target: Target { k, n: n_target } })
}

/// Geometric schedule: pair equal states `Z_k(2k+s)` into `Z_k(2k+2s)`
/// up to the largest power of two `s <= n_target - 2k`, then add fresh
/// base states one at a time for the remainder.
pub fn gen_exponential_plan(k: usize, n_target: usize) -> Result<ProtocolPlan, PlanError> {
    if k == 0 {
        return Err(PlanError::ZeroExcitations);
    }
    let base = 2 * k + 1;
    if n_target < base {
        return Err(PlanError::TooSmall { k, n: n_target, min: base });
    }
    let excess = n_target - 2 * k;
    let levels = excess.ilog2() as usize;
    let doubled = 1usize << levels;
    let tail = excess - doubled;

    let mut builder = TreeBuilder { k, inputs: Vec::new(), cycles: Vec::new() };
    let mut current = builder.build(levels);
    for _ in 0..tail {
        let fresh = builder.fresh();
        let id = format!("s{}", builder.cycles.len() + 1);
        let cycle = Cycle { left: current, right: fresh, produced: id };
        current = cycle.output();
        builder.cycles.push(cycle);
    }
    Ok(ProtocolPlan {
        k,
        inputs: builder.inputs,
        ancillas: Vec::new(),
        cycles: builder.cycles,
        target: Target { k, n: n_target },
    })
}

struct TreeBuilder {
    k: usize,
    inputs: Vec<StateRef>,
    cycles: Vec<Cycle>,
}

impl TreeBuilder {
    fn fresh(&mut self) -> StateRef {
        let s = StateRef::new(base_id(self.inputs.len()), self.k, 2 * self.k + 1, Origin::Input);
        self.inputs.push(s.clone());
        s
    }

    /// `Z_k(2k + 2^level)` built from scratch as a balanced tree.
    fn build(&mut self, level: usize) -> StateRef {
        if level == 0 {
            return self.fresh();
        }
        let left = self.build(level - 1);
        let right = self.build(level - 1);
        let cycle = Cycle { left, right, produced: format!("s{}", self.cycles.len() + 1) };
        let out = cycle.output();
        self.cycles.push(cycle);
        out
    }
}
