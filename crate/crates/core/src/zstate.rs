//! Symbolic algebra of unnormalized symmetric states.
//!
//! A [`BlockSum`] is a rational linear combination of tensor products of
//! Z-blocks, one block per named register. `Z_k(n)` is the equal-weight
//! (coefficient 1) sum of every `n`-qubit basis string with exactly `k`
//! ones, so its squared norm is `C(n, k)` and blocks with different `k` on
//! the same register are orthogonal. States are never normalized; squared
//! norms are computed on demand and carried alongside.
//!
//! Registers are kept sorted by label. Every term of a sum spans the same
//! register set, so a term is stored as its vector of excitation numbers
//! aligned with that sorted register list.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::combinatorics::{choose, nat_to_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("excitation number {k} out of range for a register of width {width}")]
    ExcitationOutOfRange { k: usize, width: usize },
    #[error("register `{0}` appears on both sides of a tensor product")]
    OverlappingRegisters(String),
    #[error("register `{0}` is declared more than once")]
    DuplicateRegister(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register layouts differ: {left} vs {right}")]
    RegisterMismatch { left: String, right: String },
    #[error("split point {at} exceeds register width {width}")]
    SplitOutOfRange { at: usize, width: usize },
    #[error("new register label `{0}` clashes with an existing label")]
    LabelClash(String),
}

/// A named group of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegisterId {
    pub label: String,
    pub width: usize,
}

impl RegisterId {
    pub fn new(label: impl Into<String>, width: usize) -> Self {
        Self { label: label.into(), width }
    }
}

impl fmt::Display for RegisterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.label, self.width)
    }
}

/// `Z_k(n)` on one register.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZBlock {
    pub register: RegisterId,
    pub excitations: usize,
}

impl ZBlock {
    pub fn new(register: RegisterId, excitations: usize) -> Result<Self, AlgebraError> {
        if excitations > register.width {
            return Err(AlgebraError::ExcitationOutOfRange { k: excitations, width: register.width });
        }
        Ok(Self { register, excitations })
    }

    pub fn width(&self) -> usize {
        self.register.width
    }

    /// `<Z_j(n)|Z_l(n)>`: `C(n, j)` on the diagonal, zero otherwise.
    pub fn inner(&self, other: &ZBlock) -> Rational {
        if self.excitations != other.excitations {
            Rational::zero()
        } else {
            nat_to_rational(&choose(self.width(), self.excitations))
        }
    }
}

impl fmt::Display for ZBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}^{}({})", self.excitations, self.register.label, self.register.width)
    }
}

/// Tensor product of blocks over pairwise distinct registers, ordered by
/// register label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockProduct {
    blocks: Vec<ZBlock>,
}

impl BlockProduct {
    pub fn new(mut blocks: Vec<ZBlock>) -> Result<Self, AlgebraError> {
        blocks.sort_by(|a, b| a.register.label.cmp(&b.register.label));
        for pair in blocks.windows(2) {
            if pair[0].register.label == pair[1].register.label {
                return Err(AlgebraError::DuplicateRegister(pair[0].register.label.clone()));
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[ZBlock] {
        &self.blocks
    }

    pub fn registers(&self) -> Vec<RegisterId> {
        self.blocks.iter().map(|b| b.register.clone()).collect()
    }
}

impl fmt::Display for BlockProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("I");
        }
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" ⊗ ")?;
            }
            write!(f, "{block}")?;
        }
        Ok(())
    }
}

/// Excitation numbers of one term, aligned with the sum's register list.
type Excitations = Vec<usize>;

/// Outcome of [`BlockSum::merge_registers`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Merge {
    /// The two registers were collected into one.
    Collected(BlockSum),
    /// Some term group did not form a complete composition pattern; the
    /// input is returned unchanged.
    NotCollectible(BlockSum),
}

impl Merge {
    pub fn is_collected(&self) -> bool {
        matches!(self, Merge::Collected(_))
    }

    pub fn into_state(self) -> BlockSum {
        match self {
            Merge::Collected(s) | Merge::NotCollectible(s) => s,
        }
    }
}

/// Canonical rational linear combination of [`BlockProduct`]s.
///
/// Like terms are merged, zero coefficients dropped, and terms ordered by
/// their excitation vectors, so structural equality is state equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSum {
    registers: Vec<RegisterId>,
    terms: BTreeMap<Excitations, Rational>,
}

impl BlockSum {
    /// The empty-register identity: a single term with coefficient 1 and no
    /// blocks.
    pub fn identity() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Rational::one());
        Self { registers: Vec::new(), terms }
    }

    /// The zero vector over the given registers.
    pub fn zero(registers: Vec<RegisterId>) -> Result<Self, AlgebraError> {
        Self::build(registers, std::iter::empty())
    }

    /// Unnormalized `Z_k(n)` on a fresh register.
    pub fn z_state(k: usize, n: usize, label: impl Into<String>) -> Result<Self, AlgebraError> {
        let register = RegisterId::new(label, n);
        let block = ZBlock::new(register.clone(), k)?;
        Self::build(vec![register], [(vec![block.excitations], Rational::one())])
    }

    /// Canonicalizes an arbitrary list of weighted products. All products
    /// must span the same registers.
    pub fn from_terms<I>(terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Rational, BlockProduct)>,
    {
        let mut iter = terms.into_iter().peekable();
        let registers = match iter.peek() {
            Some((_, p)) => p.registers(),
            None => return Ok(Self::identity().scale(&Rational::zero())),
        };
        let mut raw = Vec::new();
        for (coeff, product) in iter {
            if product.registers() != registers {
                return Err(AlgebraError::RegisterMismatch {
                    left: layout_string(&registers),
                    right: layout_string(&product.registers()),
                });
            }
            raw.push((product.blocks.iter().map(|b| b.excitations).collect(), coeff));
        }
        Self::build(registers, raw)
    }

    /// Sorts registers by label, re-aligns excitation vectors accordingly
    /// and merges like terms.
    fn build<I>(registers: Vec<RegisterId>, terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Excitations, Rational)>,
    {
        let mut order: Vec<usize> = (0..registers.len()).collect();
        order.sort_by(|&a, &b| registers[a].label.cmp(&registers[b].label));
        let sorted: Vec<RegisterId> = order.iter().map(|&i| registers[i].clone()).collect();
        for pair in sorted.windows(2) {
            if pair[0].label == pair[1].label {
                return Err(AlgebraError::DuplicateRegister(pair[0].label.clone()));
            }
        }
        let mut merged: BTreeMap<Excitations, Rational> = BTreeMap::new();
        for (exc, coeff) in terms {
            debug_assert_eq!(exc.len(), registers.len());
            let aligned: Excitations = order.iter().map(|&i| exc[i]).collect();
            for (k, reg) in aligned.iter().zip(&sorted) {
                if *k > reg.width {
                    return Err(AlgebraError::ExcitationOutOfRange { k: *k, width: reg.width });
                }
            }
            *merged.entry(aligned).or_insert_with(Rational::zero) += coeff;
        }
        merged.retain(|_, c| !c.is_zero());
        Ok(Self { registers: sorted, terms: merged })
    }

    pub fn registers(&self) -> &[RegisterId] {
        &self.registers
    }

    /// Total number of qubits.
    pub fn width(&self) -> usize {
        self.registers.iter().map(|r| r.width).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Rational, BlockProduct)> + '_ {
        self.terms.iter().map(|(exc, c)| (c.clone(), self.product(exc)))
    }

    /// Raw view of the terms as excitation vectors aligned with
    /// [`registers`](Self::registers).
    pub fn excitation_terms(&self) -> impl Iterator<Item = (&[usize], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    fn product(&self, exc: &[usize]) -> BlockProduct {
        BlockProduct {
            blocks: self
                .registers
                .iter()
                .zip(exc)
                .map(|(r, &k)| ZBlock { register: r.clone(), excitations: k })
                .collect(),
        }
    }

    /// If the sum is `c * Z_k(n)` on a single register, returns `(c, block)`.
    pub fn single_block(&self) -> Option<(Rational, ZBlock)> {
        if self.registers.len() != 1 || self.terms.len() != 1 {
            return None;
        }
        let (exc, c) = self.terms.iter().next()?;
        Some((c.clone(), ZBlock { register: self.registers[0].clone(), excitations: exc[0] }))
    }

    fn index_of(&self, label: &str) -> Result<usize, AlgebraError> {
        self.registers
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| AlgebraError::UnknownRegister(label.to_string()))
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        let terms = if factor.is_zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(e, c)| (e.clone(), c * factor)).collect()
        };
        Self { registers: self.registers.clone(), terms }
    }

    /// Sum of two states over the same registers.
    pub fn add(&self, other: &BlockSum) -> Result<Self, AlgebraError> {
        self.check_same_layout(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            *terms.entry(e.clone()).or_insert_with(Rational::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Self { registers: self.registers.clone(), terms })
    }

    fn check_same_layout(&self, other: &BlockSum) -> Result<(), AlgebraError> {
        if self.registers != other.registers {
            return Err(AlgebraError::RegisterMismatch {
                left: layout_string(&self.registers),
                right: layout_string(&other.registers),
            });
        }
        Ok(())
    }

    /// Distributive tensor product. Register labels must be disjoint.
    pub fn tensor(&self, other: &BlockSum) -> Result<Self, AlgebraError> {
        let labels: BTreeSet<&str> = self.registers.iter().map(|r| r.label.as_str()).collect();
        if let Some(clash) = other.registers.iter().find(|r| labels.contains(r.label.as_str())) {
            return Err(AlgebraError::OverlappingRegisters(clash.label.clone()));
        }
        let registers: Vec<RegisterId> = self.registers.iter().chain(&other.registers).cloned().collect();
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exc: Excitations = ea.iter().chain(eb).copied().collect();
                raw.push((exc, ca * cb));
            }
        }
        Self::build(registers, raw)
    }

    /// `<self|other>`, evaluated block by block.
    pub fn inner_product(&self, other: &BlockSum) -> Result<Rational, AlgebraError> {
        self.check_same_layout(other)?;
        let mut acc = Rational::zero();
        // Distinct excitation vectors are orthogonal, so only equal keys meet.
        for (exc, ca) in &self.terms {
            if let Some(cb) = other.terms.get(exc) {
                acc += ca * cb * self.sector_norm_sq(exc);
            }
        }
        Ok(acc)
    }

    fn sector_norm_sq(&self, exc: &[usize]) -> Rational {
        self.registers
            .iter()
            .zip(exc)
            .map(|(r, &k)| nat_to_rational(&choose(r.width, k)))
            .fold(Rational::one(), |acc, x| acc * x)
    }

    pub fn norm_sq(&self) -> Rational {
        self.inner_product(self).expect("a state shares its own layout")
    }

    /// Partial inner product: contracts `target` (a bra) against the
    /// registers it spans, leaving a state on the remaining registers.
    pub fn contract(&self, target: &BlockSum) -> Result<Self, AlgebraError> {
        let mut positions = Vec::with_capacity(target.registers.len());
        for reg in &target.registers {
            let i = self.index_of(&reg.label)?;
            if self.registers[i].width != reg.width {
                return Err(AlgebraError::RegisterMismatch {
                    left: self.registers[i].to_string(),
                    right: reg.to_string(),
                });
            }
            positions.push(i);
        }
        let keep: Vec<usize> = (0..self.registers.len()).filter(|i| !positions.contains(i)).collect();
        let registers: Vec<RegisterId> = keep.iter().map(|&i| self.registers[i].clone()).collect();
        let mut raw = Vec::new();
        for (exc, c) in &self.terms {
            let contracted: Excitations = positions.iter().map(|&i| exc[i]).collect();
            if let Some(t) = target.terms.get(&contracted) {
                let overlap = t * c * target.sector_norm_sq(&contracted);
                raw.push((keep.iter().map(|&i| exc[i]).collect(), overlap));
            }
        }
        Self::build(registers, raw)
    }

    /// Rewrites every `Z_k(N)` on `label` as `sum_j Z_j(at) Z_{k-j}(N - at)`
    /// over two fresh registers, omitting summands whose binomial weight is
    /// zero.
    pub fn split_register(
        &self,
        label: &str,
        at: usize,
        new_labels: (&str, &str),
    ) -> Result<Self, AlgebraError> {
        let idx = self.index_of(label)?;
        let width = self.registers[idx].width;
        if at > width {
            return Err(AlgebraError::SplitOutOfRange { at, width });
        }
        let (left, right) = new_labels;
        if left == right {
            return Err(AlgebraError::DuplicateRegister(left.to_string()));
        }
        for (i, r) in self.registers.iter().enumerate() {
            if i != idx && (r.label == left || r.label == right) {
                return Err(AlgebraError::LabelClash(r.label.clone()));
            }
        }
        let rest = width - at;
        let mut registers: Vec<RegisterId> = self.registers.clone();
        registers[idx] = RegisterId::new(left, at);
        registers.push(RegisterId::new(right, rest));

        let mut raw = Vec::new();
        for (exc, c) in &self.terms {
            let k = exc[idx];
            let lo = k.saturating_sub(rest);
            let hi = k.min(at);
            for j in lo..=hi {
                let mut e = exc.clone();
                e[idx] = j;
                e.push(k - j);
                raw.push((e, c.clone()));
            }
        }
        Self::build(registers, raw)
    }

    /// Collects `sum_j c Z_j(M) Z_{k-j}(N - M)` on two registers back into
    /// `c Z_k(N)` on a merged register.
    ///
    /// All-or-nothing: terms are grouped by their blocks on the other
    /// registers and by total excitation `k`; every group must contain the
    /// complete set of well-formed summands with one shared coefficient.
    pub fn merge_registers(&self, left: &str, right: &str, new_label: &str) -> Result<Merge, AlgebraError> {
        let il = self.index_of(left)?;
        let ir = self.index_of(right)?;
        if il == ir {
            return Err(AlgebraError::DuplicateRegister(left.to_string()));
        }
        for (i, r) in self.registers.iter().enumerate() {
            if i != il && i != ir && r.label == new_label {
                return Err(AlgebraError::LabelClash(new_label.to_string()));
            }
        }
        let (wl, wr) = (self.registers[il].width, self.registers[ir].width);

        // (other blocks, total k) -> { j_left -> coefficient }
        let mut groups: BTreeMap<(Excitations, usize), BTreeMap<usize, &Rational>> = BTreeMap::new();
        for (exc, c) in &self.terms {
            let others: Excitations =
                exc.iter().enumerate().filter(|(i, _)| *i != il && *i != ir).map(|(_, &k)| k).collect();
            let total = exc[il] + exc[ir];
            groups.entry((others, total)).or_default().insert(exc[il], c);
        }

        let mut registers: Vec<RegisterId> = self
            .registers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != il && *i != ir)
            .map(|(_, r)| r.clone())
            .collect();
        registers.push(RegisterId::new(new_label, wl + wr));

        let mut raw = Vec::with_capacity(groups.len());
        for ((others, total), members) in groups {
            let expected: Vec<usize> = (total.saturating_sub(wr)..=total.min(wl)).collect();
            let present: Vec<usize> = members.keys().copied().collect();
            if present != expected {
                return Ok(Merge::NotCollectible(self.clone()));
            }
            let mut coeffs = members.values();
            let first = *coeffs.next().expect("non-empty group");
            if coeffs.any(|c| *c != first) {
                return Ok(Merge::NotCollectible(self.clone()));
            }
            let mut e = others;
            e.push(total);
            raw.push((e, first.clone()));
        }
        Ok(Merge::Collected(Self::build(registers, raw)?))
    }

    /// Complements every qubit: `Z_k(n)` becomes `Z_{n-k}(n)`.
    pub fn bit_flip(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(exc, c)| {
                let flipped = exc.iter().zip(&self.registers).map(|(k, r)| r.width - k).collect();
                (flipped, c.clone())
            })
            .collect();
        Self { registers: self.registers.clone(), terms }
    }

    /// Renames a register, keeping everything else.
    pub fn relabel(&self, from: &str, to: &str) -> Result<Self, AlgebraError> {
        let idx = self.index_of(from)?;
        if from != to && self.registers.iter().any(|r| r.label == to) {
            return Err(AlgebraError::LabelClash(to.to_string()));
        }
        let mut registers = self.registers.clone();
        registers[idx].label = to.to_string();
        Self::build(registers, self.terms.iter().map(|(e, c)| (e.clone(), c.clone())))
    }
}

fn layout_string(registers: &[RegisterId]) -> String {
    let parts: Vec<String> = registers.iter().map(|r| r.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// One term per line: `coeff * Z_k^label(n) ⊗ ...`. The zero sum prints
/// as `0`.
impl fmt::Display for BlockSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (coeff, product)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{coeff} * {product}")?;
        }
        Ok(())
    }
}
