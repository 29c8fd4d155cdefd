//! Brute-force exact state vectors over computational basis strings.
//!
//! This is the independent check on the block algebra: it never looks at
//! Z-block structure except to expand it, and every amplitude is an exact
//! rational. States are sparse maps, so a weight-`k` sector costs `C(n, k)`
//! entries rather than `2^n`.
//!
//! Qubit `0` is the leftmost character of a basis string and the most
//! significant bit of its integer key, so key order is string order.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::combinatorics::Rational;
use crate::zstate::{BlockSum, RegisterId};

/// Default ceiling on total qubit count.
pub const DENSE_CAP: usize = 22;

/// Hard limit imposed by the 64-bit basis keys.
pub const MAX_DENSE_CAP: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DenseError {
    #[error("{width} qubits exceeds the dense cap of {cap}")]
    CapExceeded { width: usize, cap: usize },
    #[error("excitation number {k} exceeds width {n}")]
    ExcitationOutOfRange { k: usize, n: usize },
    #[error("register layouts differ")]
    LayoutMismatch,
    #[error("cannot project the zero state")]
    ZeroState,
    #[error("projection target is the zero vector")]
    ZeroTarget,
    #[error("no qubits selected for projection")]
    EmptySelection,
    #[error("qubit index {index} is out of range or repeated")]
    BadQubit { index: usize },
    #[error("target spans {target} qubits but {selected} were selected")]
    TargetWidth { target: usize, selected: usize },
    #[error("not a permutation of {0} qubits")]
    BadPermutation(usize),
}

/// Iterates all `n`-bit masks with exactly `k` bits set, in increasing
/// order (Gosper's next-combination step).
pub fn weight_k_masks(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit: u64 = if n >= 64 { u64::MAX } else { 1u64 << n };
    let mut next = if k > n {
        None
    } else if k == 0 {
        Some(0u64)
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            let succ = (((ripple ^ cur) >> 2) / low) | ripple;
            (ripple != 0 && succ < limit).then_some(succ)
        };
        Some(cur)
    })
}

/// Builds dense states under a configurable qubit cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseOracle {
    cap: usize,
}

impl Default for DenseOracle {
    fn default() -> Self {
        Self { cap: DENSE_CAP }
    }
}

impl DenseOracle {
    /// Cap is clamped to [`MAX_DENSE_CAP`].
    pub fn with_cap(cap: usize) -> Self {
        Self { cap: cap.min(MAX_DENSE_CAP) }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check(&self, width: usize) -> Result<(), DenseError> {
        if width > self.cap {
            Err(DenseError::CapExceeded { width, cap: self.cap })
        } else {
            Ok(())
        }
    }

    /// Amplitude 1 on every weight-`k` string of length `n`.
    pub fn dense_z(&self, k: usize, n: usize) -> Result<DenseState, DenseError> {
        self.check(n)?;
        if k > n {
            return Err(DenseError::ExcitationOutOfRange { k, n });
        }
        let amplitudes = weight_k_masks(n, k).map(|m| (m, Rational::from_integer(1.into()))).collect();
        Ok(DenseState { registers: vec![RegisterId::new("q", n)], width: n, amplitudes })
    }

    /// Expands a block sum. Registers are laid out left to right in the
    /// sum's (label-sorted) register order.
    pub fn to_dense(&self, state: &BlockSum) -> Result<DenseState, DenseError> {
        let width = state.width();
        self.check(width)?;
        let registers = state.registers().to_vec();
        let mut amplitudes: BTreeMap<u64, Rational> = BTreeMap::new();
        for (exc, coeff) in state.excitation_terms() {
            let mut partial: Vec<u64> = vec![0];
            for (reg, &k) in registers.iter().zip(exc) {
                let masks: Vec<u64> = weight_k_masks(reg.width, k).collect();
                partial =
                    partial.iter().flat_map(|&p| masks.iter().map(move |&m| (p << reg.width) | m)).collect();
            }
            for key in partial {
                *amplitudes.entry(key).or_insert_with(Rational::zero) += coeff;
            }
        }
        amplitudes.retain(|_, a| !a.is_zero());
        Ok(DenseState { registers, width, amplitudes })
    }
}

/// [`DenseOracle::dense_z`] under the default cap.
pub fn dense_z(k: usize, n: usize) -> Result<DenseState, DenseError> {
    DenseOracle::default().dense_z(k, n)
}

/// [`DenseOracle::to_dense`] under the default cap.
pub fn to_dense(state: &BlockSum) -> Result<DenseState, DenseError> {
    DenseOracle::default().to_dense(state)
}

/// Sparse exact amplitude map. Zero amplitudes are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseState {
    registers: Vec<RegisterId>,
    width: usize,
    amplitudes: BTreeMap<u64, Rational>,
}

/// Result of a post-selected projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    /// Unnormalized post-measurement state on the unmeasured qubits.
    pub remainder: DenseState,
    /// Born probability of the target outcome for the normalized input.
    pub probability: Rational,
}

impl Projection {
    pub fn failure_probability(&self) -> Rational {
        Rational::from_integer(1.into()) - &self.probability
    }
}

impl DenseState {
    /// Builds a state from `(bitstring, amplitude)` pairs on one register.
    /// Bitstrings must all have the same length.
    pub fn from_strings<'a, I>(label: &str, entries: I) -> Result<Self, DenseError>
    where
        I: IntoIterator<Item = (&'a str, Rational)>,
    {
        let mut width = None;
        let mut amplitudes: BTreeMap<u64, Rational> = BTreeMap::new();
        for (bits, amp) in entries {
            let w = *width.get_or_insert(bits.len());
            if bits.len() != w || w > MAX_DENSE_CAP {
                return Err(DenseError::LayoutMismatch);
            }
            let key = bits.chars().try_fold(0u64, |acc, ch| match ch {
                '0' => Ok(acc << 1),
                '1' => Ok((acc << 1) | 1),
                _ => Err(DenseError::LayoutMismatch),
            })?;
            *amplitudes.entry(key).or_insert_with(Rational::zero) += amp;
        }
        amplitudes.retain(|_, a| !a.is_zero());
        let width = width.unwrap_or(0);
        Ok(Self { registers: vec![RegisterId::new(label, width)], width, amplitudes })
    }

    pub fn registers(&self) -> &[RegisterId] {
        &self.registers
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Amplitude of a basis string, zero if absent.
    pub fn amplitude(&self, bits: &str) -> Rational {
        let key = bits.chars().fold(0u64, |acc, ch| (acc << 1) | u64::from(ch == '1'));
        self.amplitudes.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    /// Non-zero entries as `(bitstring, amplitude)` in string order.
    pub fn entries(&self) -> impl Iterator<Item = (String, &Rational)> + '_ {
        self.amplitudes.iter().map(move |(k, a)| (self.bitstring(*k), a))
    }

    fn bitstring(&self, key: u64) -> String {
        (0..self.width).map(|i| if key >> (self.width - 1 - i) & 1 == 1 { '1' } else { '0' }).collect()
    }

    fn bit(&self, key: u64, qubit: usize) -> u64 {
        (key >> (self.width - 1 - qubit)) & 1
    }

    /// Collapses the register layout into one register of the same width.
    pub fn flattened(&self, label: &str) -> Self {
        Self {
            registers: vec![RegisterId::new(label, self.width)],
            width: self.width,
            amplitudes: self.amplitudes.clone(),
        }
    }

    /// `sum_s a(s) b(s)`; amplitudes are real so no conjugation.
    pub fn inner(&self, other: &DenseState) -> Result<Rational, DenseError> {
        if self.registers != other.registers {
            return Err(DenseError::LayoutMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .filter_map(|(k, a)| other.amplitudes.get(k).map(|b| a * b))
            .fold(Rational::zero(), |acc, x| acc + x))
    }

    pub fn norm_sq(&self) -> Rational {
        self.amplitudes.values().fold(Rational::zero(), |acc, a| acc + a * a)
    }

    /// Kronecker product, `self` on the left (high) qubits.
    pub fn tensor(&self, other: &DenseState) -> DenseState {
        let mut amplitudes = BTreeMap::new();
        for (ka, a) in &self.amplitudes {
            for (kb, b) in &other.amplitudes {
                amplitudes.insert((ka << other.width) | kb, a * b);
            }
        }
        DenseState {
            registers: self.registers.iter().chain(&other.registers).cloned().collect(),
            width: self.width + other.width,
            amplitudes,
        }
    }

    /// Complements every qubit.
    pub fn complement(&self) -> DenseState {
        let mask = if self.width == 0 { 0 } else { u64::MAX >> (64 - self.width) };
        DenseState {
            registers: self.registers.clone(),
            width: self.width,
            amplitudes: self.amplitudes.iter().map(|(k, a)| (k ^ mask, a.clone())).collect(),
        }
    }

    /// If `self == c * other` (same width, layout ignored) returns `c`.
    pub fn ratio_to(&self, other: &DenseState) -> Option<Rational> {
        if self.width != other.width || other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.amplitudes.len() != other.amplitudes.len() {
            return None;
        }
        let (k0, b0) = other.amplitudes.iter().next()?;
        let c = self.amplitudes.get(k0)? / b0;
        other.amplitudes.iter().all(|(k, b)| self.amplitudes.get(k) == Some(&(b * &c))).then_some(c)
    }

    /// Projects the qubits `qubits` onto `target` (target qubit `i` is
    /// `qubits[i]`) and keeps the unmeasured qubits, in ascending order.
    ///
    /// The remainder is `sum_x target(x) * state(x ∪ y)`, left unnormalized;
    /// the probability treats both `state` and `target` as normalized.
    pub fn project(&self, qubits: &[usize], target: &DenseState) -> Result<Projection, DenseError> {
        if qubits.is_empty() {
            return Err(DenseError::EmptySelection);
        }
        if target.width != qubits.len() {
            return Err(DenseError::TargetWidth { target: target.width, selected: qubits.len() });
        }
        let mut measured = vec![false; self.width];
        for &q in qubits {
            if q >= self.width || measured[q] {
                return Err(DenseError::BadQubit { index: q });
            }
            measured[q] = true;
        }
        if self.is_zero() {
            return Err(DenseError::ZeroState);
        }
        let target_norm = target.norm_sq();
        if target_norm.is_zero() {
            return Err(DenseError::ZeroTarget);
        }
        let kept: Vec<usize> = (0..self.width).filter(|&q| !measured[q]).collect();

        let mut remainder: BTreeMap<u64, Rational> = BTreeMap::new();
        for (&key, amp) in &self.amplitudes {
            let x = qubits.iter().fold(0u64, |acc, &q| (acc << 1) | self.bit(key, q));
            let Some(t) = target.amplitudes.get(&x) else { continue };
            let y = kept.iter().fold(0u64, |acc, &q| (acc << 1) | self.bit(key, q));
            *remainder.entry(y).or_insert_with(Rational::zero) += t * amp;
        }
        remainder.retain(|_, a| !a.is_zero());

        // Shrink each register by the number of its qubits that were measured.
        let mut registers = Vec::new();
        let mut offset = 0;
        for reg in &self.registers {
            let left = (offset..offset + reg.width).filter(|&q| !measured[q]).count();
            if left > 0 {
                registers.push(RegisterId::new(reg.label.clone(), left));
            }
            offset += reg.width;
        }

        let remainder = DenseState { registers, width: kept.len(), amplitudes: remainder };
        let probability = remainder.norm_sq() / (self.norm_sq() * target_norm);
        Ok(Projection { remainder, probability })
    }

    /// Moves qubit `i` to position `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<DenseState, DenseError> {
        if perm.len() != self.width {
            return Err(DenseError::BadPermutation(self.width));
        }
        let mut seen = vec![false; self.width];
        for &p in perm {
            if p >= self.width || seen[p] {
                return Err(DenseError::BadPermutation(self.width));
            }
            seen[p] = true;
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(&key, a)| {
                let moved = perm
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &p)| acc | (self.bit(key, i) << (self.width - 1 - p)));
                (moved, a.clone())
            })
            .collect();
        Ok(DenseState { registers: self.registers.clone(), width: self.width, amplitudes })
    }
}

/// Sorted `bitstring amplitude` lines.
impl fmt::Display for DenseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (bits, amp)) in self.entries().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{bits} {amp}")?;
        }
        Ok(())
    }
}
