//! One-time pads keyed by a token report: the pad for `(I, R)` is `R`, and
//! only the bank, which knows `F_S(I)`, can remove it.

use crate::scheme::TokenReport;

/// `C = R ⊕ M`.
pub fn encode(report: &TokenReport, message: u64) -> u64 {
    report.value() ^ message
}

/// `M = C ⊕ pad`.
pub fn decode(pad: u64, ciphertext: u64) -> u64 {
    pad ^ ciphertext
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_equal_to_ciphertext_decodes_to_zero() {
        let r = TokenReport::new(2, 0xbeef);
        assert_eq!(decode(0xbeef, encode(&r, 0)), 0);
        assert_eq!(decode(0xbeef, 0xbeef), 0);
        assert_eq!(decode(r.value(), encode(&r, 0x1234)), 0x1234);
    }
}
