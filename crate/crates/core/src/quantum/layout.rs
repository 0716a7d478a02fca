//! Named, contiguous qubit registers over a basis index.
//!
//! The register at offset 0 occupies the most significant bits of the basis
//! index, so `tensor(a, b)` places `a` in the high bits and `b` in the low bits.

use super::QuantumError;

/// A contiguous range of qubits inside a larger state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    name: String,
    start: usize,
    width: usize,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Bit mask of this register inside a basis index of `total` qubits.
    pub fn mask(&self, total: usize) -> u64 {
        low_mask(self.width) << self.shift(total)
    }

    /// Value held by this register in basis index `index`.
    pub fn extract(&self, index: u64, total: usize) -> u64 {
        (index >> self.shift(total)) & low_mask(self.width)
    }

    /// `index` with this register's bit-field overwritten by `value`.
    pub fn replace(&self, index: u64, total: usize, value: u64) -> u64 {
        let shift = self.shift(total);
        (index & !(low_mask(self.width) << shift)) | ((value & low_mask(self.width)) << shift)
    }

    fn shift(&self, total: usize) -> usize {
        total - self.start - self.width
    }
}

pub(crate) fn low_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Ordered set of disjoint registers that tile a state's qubits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    width: usize,
}

impl RegisterLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a layout by appending registers in order.
    pub fn from_widths(registers: &[(&str, usize)]) -> Result<Self, QuantumError> {
        let mut layout = Self::new();
        for (name, width) in registers {
            layout.push(name, *width)?;
        }
        Ok(layout)
    }

    /// `count` registers of equal width, named by `names`.
    pub fn uniform<S: AsRef<str>>(names: &[S], width: usize) -> Result<Self, QuantumError> {
        let mut layout = Self::new();
        for name in names {
            layout.push(name.as_ref(), width)?;
        }
        Ok(layout)
    }

    /// Appends a register after the current last one.
    pub fn push(&mut self, name: &str, width: usize) -> Result<(), QuantumError> {
        if width == 0 {
            return Err(QuantumError::EmptyRegister(name.to_owned()));
        }
        if self.registers.iter().any(|r| r.name == name) {
            return Err(QuantumError::DuplicateRegister(name.to_owned()));
        }
        self.registers.push(Register {
            name: name.to_owned(),
            start: self.width,
            width,
        });
        self.width += width;
        Ok(())
    }

    /// Layout of `self ⊗ other`; register names must stay unique.
    pub fn concat(&self, other: &RegisterLayout) -> Result<Self, QuantumError> {
        let mut layout = self.clone();
        for r in &other.registers {
            layout.push(&r.name, r.width)?;
        }
        Ok(layout)
    }

    /// The layout with one register removed and the rest shifted to stay contiguous.
    pub fn without(&self, name: &str) -> Result<Self, QuantumError> {
        self.register(name)?;
        let mut layout = Self::new();
        for r in self.registers.iter().filter(|r| r.name != name) {
            layout.push(&r.name, r.width)?;
        }
        Ok(layout)
    }

    pub fn register(&self, name: &str) -> Result<&Register, QuantumError> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| QuantumError::UnknownRegister(name.to_owned()))
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.name.as_str())
    }

    /// Total number of qubits covered.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Looks up two registers of equal width, as required by a swap test.
    pub(crate) fn pair(&self, a: &str, b: &str) -> Result<(&Register, &Register), QuantumError> {
        let ra = self.register(a)?;
        let rb = self.register(b)?;
        if ra.name == rb.name {
            return Err(QuantumError::SameRegister(a.to_owned()));
        }
        if ra.width != rb.width {
            return Err(QuantumError::WidthMismatch {
                left: ra.width,
                right: rb.width,
            });
        }
        Ok((ra, rb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_register_is_most_significant() {
        let layout = RegisterLayout::from_widths(&[("a", 1), ("b", 2)]).unwrap();
        let a = layout.register("a").unwrap();
        let b = layout.register("b").unwrap();
        // |1⟩|01⟩ = 0b101
        assert_eq!(a.extract(0b101, 3), 1);
        assert_eq!(b.extract(0b101, 3), 0b01);
        assert_eq!(b.replace(0b101, 3, 0b10), 0b110);
        assert_eq!(a.mask(3), 0b100);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        let mut layout = RegisterLayout::new();
        layout.push("x", 2).unwrap();
        assert!(matches!(
            layout.push("x", 1),
            Err(QuantumError::DuplicateRegister(_))
        ));
        assert!(matches!(layout.push("y", 0), Err(QuantumError::EmptyRegister(_))));
    }

    #[test]
    fn pair_requires_equal_widths() {
        let layout = RegisterLayout::from_widths(&[("a", 1), ("b", 2)]).unwrap();
        assert!(matches!(
            layout.pair("a", "b"),
            Err(QuantumError::WidthMismatch { left: 1, right: 2 })
        ));
        assert!(layout.pair("a", "a").is_err());
    }

    #[test]
    fn without_keeps_contiguity() {
        let layout = RegisterLayout::from_widths(&[("a", 1), ("b", 2), ("c", 3)]).unwrap();
        let rest = layout.without("b").unwrap();
        assert_eq!(rest.width(), 4);
        assert_eq!(rest.register("c").unwrap().start(), 1);
    }
}
