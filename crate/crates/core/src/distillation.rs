//! 2k-local distillation of two Z-states into one.
//!
//! Given `Z_k(N1)` and `Z_k(N2)`, `k` qubits of each are projected onto the
//! projection target `X0(2k) = beta0 * sum_j alpha_j Z_{k-j}(k) ⊗ Z_j(k)`.
//! On the success outcome the remaining qubits hold `Z_k(N1 + N2 - 2k)`.
//!
//! The symbolic path splits each input at `M = k`, contracts the selected
//! registers against the unnormalized target and collects the two leftover
//! registers back into one block. The dense path in [`oracle_distill`] does
//! the same projection amplitude by amplitude.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::combinatorics::{choose, nat_to_rational, Rational};
use crate::dense::{DenseError, DenseOracle, DenseState};
use crate::zstate::{AlgebraError, BlockSum, Merge, RegisterId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistillError {
    #[error("distillation needs k >= 1")]
    ZeroExcitations,
    #[error("operand is not a single Z-block")]
    NotSingleBlock,
    #[error("excitation numbers differ: {left} vs {right}")]
    MismatchedExcitations { left: usize, right: usize },
    #[error("operand Z_{k}({n}) is too small: need n >= 2k")]
    TooSmall { k: usize, n: usize },
    #[error("alpha has {got} entries, expected {expected}")]
    AlphaLength { got: usize, expected: usize },
    #[error("alpha coefficients give a zero projection target")]
    DegenerateTarget,
    #[error("invalid qubit selection: {0}")]
    BadSelection(String),
    #[error("post-selected state does not collect to a single Z-block")]
    NotCollectible { post_state: BlockSum },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

/// Coefficients of the projection target and its squared normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct X0Spec {
    pub k: usize,
    /// `alpha[j]` weights `Z_{k-j}(k) ⊗ Z_j(k)`.
    pub alpha: Vec<Rational>,
    /// `beta0^2 = 1 / ||sum_j alpha_j Z_{k-j} Z_j||^2`.
    pub beta_sq: Rational,
}

impl X0Spec {
    /// `alpha_j = C(k, j)^-2`, the choice that makes the post-selected
    /// state collect to a single block.
    pub fn collecting(k: usize) -> Result<Self, DistillError> {
        if k == 0 {
            return Err(DistillError::ZeroExcitations);
        }
        let alpha = (0..=k)
            .map(|j| {
                let c = nat_to_rational(&choose(k, j));
                (&c * &c).recip()
            })
            .collect();
        Self::with_alpha(k, alpha)
    }

    /// Arbitrary coefficients, e.g. for negative controls.
    pub fn with_alpha(k: usize, alpha: Vec<Rational>) -> Result<Self, DistillError> {
        if k == 0 {
            return Err(DistillError::ZeroExcitations);
        }
        if alpha.len() != k + 1 {
            return Err(DistillError::AlphaLength { got: alpha.len(), expected: k + 1 });
        }
        let norm: Rational = alpha
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let c = nat_to_rational(&choose(k, j));
                a * a * &c * &c
            })
            .fold(Rational::zero(), |acc, x| acc + x);
        if norm.is_zero() {
            return Err(DistillError::DegenerateTarget);
        }
        Ok(Self { k, alpha, beta_sq: norm.recip() })
    }

    /// The unnormalized target `sum_j alpha_j Z_{k-j}^A(k) ⊗ Z_j^B(k)`.
    pub fn state(&self, reg_a: &str, reg_b: &str) -> Result<BlockSum, DistillError> {
        let k = self.k;
        let mut acc = BlockSum::zero(vec![RegisterId::new(reg_a, k), RegisterId::new(reg_b, k)])?;
        for (j, a) in self.alpha.iter().enumerate() {
            let term = BlockSum::z_state(k - j, k, reg_a)?.tensor(&BlockSum::z_state(j, k, reg_b)?)?.scale(a);
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

/// Builds `X0(2k)` on two `k`-qubit registers with the collecting choice of
/// `alpha`. The state is returned unnormalized; `beta0^2` is carried by the returned [`X0Spec`].
pub fn x0_state(
    k: usize,
    reg_a: &RegisterId,
    reg_b: &RegisterId,
) -> Result<(BlockSum, X0Spec), DistillError> {
    if reg_a.width != k || reg_b.width != k {
        return Err(DistillError::BadSelection(format!("target registers must both have width {k}")));
    }
    let spec = X0Spec::collecting(k)?;
    Ok((spec.state(&reg_a.label, &reg_b.label)?, spec))
}

/// Which qubits of each operand enter the projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Selection {
    /// The first `k` qubits of each operand.
    pub fn first(k: usize) -> Self {
        Self { left: (0..k).collect(), right: (0..k).collect() }
    }

    fn check(&self, k: usize, n_left: usize, n_right: usize) -> Result<(), DistillError> {
        for (side, picks, n) in [("left", &self.left, n_left), ("right", &self.right, n_right)] {
            if picks.len() != k {
                return Err(DistillError::BadSelection(format!(
                    "{side} selection has {} qubits, expected {k}",
                    picks.len()
                )));
            }
            let mut seen = vec![false; n];
            for &q in picks {
                if q >= n || seen[q] {
                    return Err(DistillError::BadSelection(format!(
                        "{side} qubit {q} is out of range or repeated"
                    )));
                }
                seen[q] = true;
            }
        }
        Ok(())
    }
}

/// Result of a successful distillation step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistillOutcome {
    /// `c * Z_k(N1 + N2 - 2k)` on the output register.
    pub post_state: BlockSum,
    /// Probability of the success outcome for normalized inputs.
    pub success_probability: Rational,
    /// Excitation sector of the measured qubits (always `k`).
    pub measured_sector: usize,
    pub consumed_qubits: usize,
}

impl DistillOutcome {
    pub fn failure_probability(&self) -> Rational {
        Rational::one() - &self.success_probability
    }
}

/// Closed-form success probability
/// `beta0^2 C(n1+n2-2k, k) / (C(n1, k) C(n2, k))`.
pub fn success_probability(k: usize, n1: usize, n2: usize) -> Result<Rational, DistillError> {
    let spec = X0Spec::collecting(k)?;
    for n in [n1, n2] {
        if n < 2 * k {
            return Err(DistillError::TooSmall { k, n });
        }
    }
    let out = nat_to_rational(&choose(n1 + n2 - 2 * k, k));
    let denom = nat_to_rational(&(choose(n1, k) * choose(n2, k)));
    Ok(spec.beta_sq * out / denom)
}

fn operand(state: &BlockSum) -> Result<(Rational, RegisterId, usize), DistillError> {
    let (c, block) = state.single_block().ok_or(DistillError::NotSingleBlock)?;
    Ok((c, block.register, block.excitations))
}

/// Checks the operand pair and returns the shared `k`.
fn check_operands(
    left: &BlockSum,
    right: &BlockSum,
) -> Result<(usize, RegisterId, RegisterId), DistillError> {
    let (_, reg_l, kl) = operand(left)?;
    let (_, reg_r, kr) = operand(right)?;
    if kl != kr {
        return Err(DistillError::MismatchedExcitations { left: kl, right: kr });
    }
    if kl == 0 {
        return Err(DistillError::ZeroExcitations);
    }
    for reg in [&reg_l, &reg_r] {
        if reg.width < 2 * kl {
            return Err(DistillError::TooSmall { k: kl, n: reg.width });
        }
    }
    if reg_l.label == reg_r.label {
        return Err(AlgebraError::OverlappingRegisters(reg_l.label).into());
    }
    Ok((kl, reg_l, reg_r))
}

/// Distills two single-block states with the collecting projection target.
pub fn distill_step(
    left: &BlockSum,
    right: &BlockSum,
    selection: &Selection,
    output_label: &str,
) -> Result<DistillOutcome, DistillError> {
    let (k, _, _) = check_operands(left, right)?;
    distill_with(left, right, selection, &X0Spec::collecting(k)?, output_label)
}

/// Distillation against an arbitrary [`X0Spec`].
///
/// The symbolic result does not depend on `selection` beyond validating it:
/// Z-states are invariant under qubit permutations, so splitting off the
/// first `k` qubits is equivalent to splitting off any `k`.
pub fn distill_with(
    left: &BlockSum,
    right: &BlockSum,
    selection: &Selection,
    spec: &X0Spec,
    output_label: &str,
) -> Result<DistillOutcome, DistillError> {
    let (k, reg_l, reg_r) = check_operands(left, right)?;
    if spec.k != k {
        return Err(DistillError::MismatchedExcitations { left: k, right: spec.k });
    }
    selection.check(k, reg_l.width, reg_r.width)?;

    let sel_l = format!("{}#sel", reg_l.label);
    let rest_l = format!("{}#rest", reg_l.label);
    let sel_r = format!("{}#sel", reg_r.label);
    let rest_r = format!("{}#rest", reg_r.label);

    let split_l = left.split_register(&reg_l.label, k, (&sel_l, &rest_l))?;
    let split_r = right.split_register(&reg_r.label, k, (&sel_r, &rest_r))?;
    let joint = split_l.tensor(&split_r)?;

    let target = spec.state(&sel_l, &sel_r)?;
    let measured_sector = target.excitation_terms().map(|(e, _)| e.iter().sum::<usize>()).max().unwrap_or(k);
    let projected = joint.contract(&target)?;

    let post_state = match projected.merge_registers(&rest_l, &rest_r, output_label)? {
        Merge::Collected(s) => s,
        Merge::NotCollectible(s) => return Err(DistillError::NotCollectible { post_state: s }),
    };
    if post_state.is_zero() {
        return Err(DistillError::NotCollectible { post_state });
    }
    let success_probability = post_state.norm_sq() * &spec.beta_sq / (left.norm_sq() * right.norm_sq());

    Ok(DistillOutcome { post_state, success_probability, measured_sector, consumed_qubits: 2 * k })
}

/// Dense-oracle version of a distillation step on `Z_k(n1) ⊗ Z_k(n2)`.
#[derive(Debug, Clone)]
pub struct OracleDistill {
    pub remainder: DenseState,
    pub probability: Rational,
}

/// Projects `dense(Z_k(n1) ⊗ Z_k(n2))` on the selected qubits onto
/// `dense(X0)`. Target qubit order is the left selection, then the right.
pub fn oracle_distill(
    oracle: &DenseOracle,
    k: usize,
    n1: usize,
    n2: usize,
    selection: &Selection,
    spec: &X0Spec,
) -> Result<OracleDistill, DistillError> {
    if spec.k != k {
        return Err(DistillError::MismatchedExcitations { left: k, right: spec.k });
    }
    selection.check(k, n1, n2)?;
    if n1 + n2 > oracle.cap() {
        return Err(DenseError::CapExceeded { width: n1 + n2, cap: oracle.cap() }.into());
    }
    let joint = oracle.dense_z(k, n1)?.tensor(&oracle.dense_z(k, n2)?);
    // "a" sorts before "b", so the dense target lays the left selection first.
    let target = oracle.to_dense(&spec.state("a", "b")?)?;
    let qubits: Vec<usize> =
        selection.left.iter().copied().chain(selection.right.iter().map(|q| q + n1)).collect();
    let projection = joint.project(&qubits, &target)?;
    Ok(OracleDistill { remainder: projection.remainder, probability: projection.probability })
}
