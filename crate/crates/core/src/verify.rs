//! Exhaustive and randomized cross-checks between the block algebra and
//! the dense oracle.
//!
//! Each sweep visits its cells in a fixed order and records the first
//! failing cell, so summaries are reproducible for a given seed.

use std::fmt;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinatorics::{choose, nat_to_rational, vandermonde_holds, Rational};
use crate::dense::{DenseOracle, DENSE_CAP};
use crate::distillation::{distill_with, oracle_distill, success_probability, Selection, X0Spec};
use crate::zstate::{BlockSum, Merge};

/// Outcome of one sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepResult {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

impl SweepResult {
    fn new(name: &'static str) -> Self {
        Self { name, checked: 0, failed: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, cell: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(cell());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for SweepResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<14} {}/{} cells", self.name, self.checked - self.failed, self.checked)?;
        if let Some(cell) = &self.first_failure {
            write!(f, " (first failure: {cell})")?;
        }
        Ok(())
    }
}

/// `split_register(Z_k(N), M)` expands to `dense_z(k, N)` and collects back.
pub fn composition_sweep(max_n: usize, oracle: &DenseOracle) -> SweepResult {
    let mut r = SweepResult::new("composition");
    for n in 0..=max_n {
        for k in 0..=n {
            let whole = oracle.dense_z(k, n).expect("within cap");
            let z = BlockSum::z_state(k, n, "A").expect("k <= n");
            for m in 0..=n {
                let ok = z
                    .split_register("A", m, ("A0", "A1"))
                    .ok()
                    .filter(|s| oracle.to_dense(s).map(|d| d.flattened("q") == whole).unwrap_or(false))
                    .and_then(|s| s.merge_registers("A0", "A1", "A").ok())
                    .is_some_and(|merged| merged == Merge::Collected(z.clone()));
                r.record(ok, || format!("N={n} k={k} M={m}"));
            }
        }
    }
    r
}

/// `||Z_k(N)||^2 = C(N, k)` symbolically up to `max_symbolic` and through
/// the dense inner product up to `max_dense`.
pub fn norm_sweep(max_symbolic: usize, max_dense: usize, oracle: &DenseOracle) -> SweepResult {
    let mut r = SweepResult::new("norm");
    for n in 0..=max_symbolic.max(max_dense) {
        for k in 0..=n {
            let expected = nat_to_rational(&choose(n, k));
            if n <= max_symbolic {
                let z = BlockSum::z_state(k, n, "A").expect("k <= n");
                r.record(z.norm_sq() == expected, || format!("symbolic N={n} k={k}"));
            }
            if n <= max_dense {
                let d = oracle.dense_z(k, n).expect("within cap");
                let ok = d.inner(&d).is_ok_and(|v| v == expected);
                r.record(ok, || format!("dense N={n} k={k}"));
            }
        }
    }
    r
}

pub fn vandermonde_sweep(max_n: usize) -> SweepResult {
    let mut r = SweepResult::new("vandermonde");
    for n in 0..=max_n as u64 {
        for m in 0..=n {
            for k in 0..=n {
                r.record(vandermonde_holds(n, m, k), || format!("N={n} M={m} k={k}"));
            }
        }
    }
    r
}

/// Which projection target the distillation sweeps use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaMode {
    /// `alpha_j = C(k, j)^-2`.
    #[default]
    Collecting,
    /// `alpha_j = 1`: a deliberately wrong target.
    Unit,
}

impl AlphaMode {
    pub fn spec(self, k: usize) -> X0Spec {
        match self {
            AlphaMode::Collecting => X0Spec::collecting(k),
            AlphaMode::Unit => X0Spec::with_alpha(k, vec![Rational::one(); k + 1]),
        }
        .expect("k >= 1")
    }
}

/// Operand sizes covered by the distillation sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistillRange {
    pub max_k: usize,
    pub max_operand: usize,
    pub max_total: usize,
}

impl DistillRange {
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (1..=self.max_k).flat_map(move |k| {
            (2 * k..=self.max_operand).flat_map(move |n1| {
                (2 * k..=self.max_operand)
                    .filter(move |n2| n1 + n2 <= self.max_total)
                    .map(move |n2| (k, n1, n2))
            })
        })
    }
}

/// Checks one distillation cell: the symbolic step collects to a single
/// block of the right size, the oracle remainder is proportional to the
/// dense Z-state, and all three probability routes agree.
pub fn check_distillation_cell(
    k: usize,
    n1: usize,
    n2: usize,
    alpha: AlphaMode,
    oracle: &DenseOracle,
) -> Result<(), String> {
    let spec = alpha.spec(k);
    let out_n = n1 + n2 - 2 * k;
    let a = BlockSum::z_state(k, n1, "A").map_err(|e| e.to_string())?;
    let b = BlockSum::z_state(k, n2, "B").map_err(|e| e.to_string())?;
    let selection = Selection::first(k);
    let symbolic = distill_with(&a, &b, &selection, &spec, "C").map_err(|e| e.to_string())?;
    match symbolic.post_state.single_block() {
        Some((c, block)) if c > Rational::zero() && block.excitations == k && block.width() == out_n => {}
        _ => return Err(format!("post-state is not c * Z_{k}({out_n})")),
    }
    let dense = oracle_distill(oracle, k, n1, n2, &selection, &spec).map_err(|e| e.to_string())?;
    let z_out = oracle.dense_z(k, out_n).map_err(|e| e.to_string())?;
    if dense.remainder.ratio_to(&z_out).is_none_or(|c| c.is_zero()) {
        return Err("oracle remainder is not proportional to the Z-state".into());
    }
    let closed = success_probability(k, n1, n2).map_err(|e| e.to_string())?;
    if dense.probability != symbolic.success_probability || closed != symbolic.success_probability {
        return Err(format!(
            "probabilities differ: symbolic {} oracle {} closed form {closed}",
            symbolic.success_probability, dense.probability
        ));
    }
    Ok(())
}

pub fn distillation_sweep(range: DistillRange, alpha: AlphaMode, oracle: &DenseOracle) -> SweepResult {
    let mut r = SweepResult::new("distillation");
    for (k, n1, n2) in range.cells() {
        let res = check_distillation_cell(k, n1, n2, alpha, oracle);
        let msg = res.as_ref().err().cloned().unwrap_or_default();
        r.record(res.is_ok(), || format!("k={k} N1={n1} N2={n2}: {msg}"));
    }
    r
}

/// Bit-flip maps `Z_k(N)` to `Z_{N-k}(N)` and commutes with expansion.
pub fn bit_flip_sweep(max_n: usize, oracle: &DenseOracle) -> SweepResult {
    let mut r = SweepResult::new("bit-flip");
    for n in 0..=max_n {
        for k in 0..=n {
            let z = BlockSum::z_state(k, n, "A").expect("k <= n");
            let flipped = z.bit_flip();
            let ok = flipped == BlockSum::z_state(n - k, n, "A").expect("n-k <= n")
                && oracle.to_dense(&flipped).ok() == oracle.to_dense(&z).ok().map(|d| d.complement());
            r.record(ok, || format!("N={n} k={k}"));
        }
    }
    r
}

/// `dense_z(k, N)` is fixed by random qubit permutations.
pub fn permutation_sweep(max_n: usize, per_cell: usize, seed: u64, oracle: &DenseOracle) -> SweepResult {
    let mut r = SweepResult::new("permutation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=max_n {
        for k in 0..=n {
            let z = oracle.dense_z(k, n).expect("within cap");
            let expanded = BlockSum::z_state(k, n, "q").ok().and_then(|s| oracle.to_dense(&s).ok());
            for trial in 0..per_cell {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let ok = z.permute(&perm).is_ok_and(|p| p == z)
                    && expanded.as_ref().is_some_and(|e| e.permute(&perm).is_ok_and(|p| p == *e));
                r.record(ok, || format!("N={n} k={k} trial={trial} perm={perm:?}"));
            }
        }
    }
    r
}

/// The oracle outcome does not depend on which `k` qubits of each operand
/// are measured.
pub fn selection_sweep(range: DistillRange, per_cell: usize, seed: u64, oracle: &DenseOracle) -> SweepResult {
    let mut r = SweepResult::new("selection");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (k, n1, n2) in range.cells() {
        let spec = X0Spec::collecting(k).expect("k >= 1");
        let expected_p = success_probability(k, n1, n2).expect("valid cell");
        let z_out = oracle.dense_z(k, n1 + n2 - 2 * k).expect("within cap");
        let reference = oracle_distill(oracle, k, n1, n2, &Selection::first(k), &spec)
            .ok()
            .and_then(|d| d.remainder.ratio_to(&z_out));
        for trial in 0..per_cell {
            let mut left: Vec<usize> = (0..n1).collect();
            let mut right: Vec<usize> = (0..n2).collect();
            left.shuffle(&mut rng);
            right.shuffle(&mut rng);
            left.truncate(k);
            right.truncate(k);
            let selection = Selection { left, right };
            let ok = oracle_distill(oracle, k, n1, n2, &selection, &spec).is_ok_and(|d| {
                d.probability == expected_p
                    && reference.is_some()
                    && d.remainder.ratio_to(&z_out) == reference
            });
            r.record(ok, || format!("k={k} N1={n1} N2={n2} trial={trial} selection={selection:?}"));
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("max_n={max_n} exceeds the dense cap {cap}")]
    ExceedsCap { max_n: usize, cap: usize },
    #[error("max_k must be at least 1")]
    ZeroK,
}

/// Bounds and switches for [`run_all`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    pub max_n: usize,
    pub max_k: usize,
    pub seed: u64,
    pub dense_cap: usize,
    pub alpha: AlphaMode,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { max_n: 12, max_k: 3, seed: 2012, dense_cap: DENSE_CAP, alpha: AlphaMode::Collecting }
    }
}

/// Runs every sweep under `config`.
///
/// Distillation cells use operands up to `max_n - 4` qubits each with at
/// most `max_n + 2` qubits in total (8 and 14 at the defaults), clipped to
/// the dense cap. Permutation cells stop at 10 qubits.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<SweepResult>, VerifyError> {
    let cap = config.dense_cap.min(crate::dense::MAX_DENSE_CAP);
    if config.max_n > cap {
        return Err(VerifyError::ExceedsCap { max_n: config.max_n, cap });
    }
    if config.max_k == 0 {
        return Err(VerifyError::ZeroK);
    }
    let oracle = DenseOracle::with_cap(cap);
    let range = DistillRange {
        max_k: config.max_k,
        max_operand: config.max_n.saturating_sub(4).max(2),
        max_total: (config.max_n + 2).min(cap),
    };
    Ok(vec![
        composition_sweep(config.max_n, &oracle),
        norm_sweep(config.max_n, config.max_n, &oracle),
        vandermonde_sweep(config.max_n),
        distillation_sweep(range, config.alpha, &oracle),
        bit_flip_sweep(config.max_n, &oracle),
        permutation_sweep(config.max_n.min(10), 50, config.seed, &oracle),
        selection_sweep(range, 10, config.seed, &oracle),
    ])
}
