use std::collections::HashSet;
use std::hash::Hash;

use super::TokenReport;

/// Append-only record of submissions, with a membership index.
///
/// Every submission is recorded, accepted or not; `contains` answers the
/// duplicate check of the verification rule.
#[derive(Clone, Debug)]
pub struct VerificationHistory<T = TokenReport> {
    entries: Vec<T>,
    seen: HashSet<T>,
}

impl<T> Default for VerificationHistory<T> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            seen: HashSet::new(),
        }
    }
}

impl<T: Copy + Eq + Hash> VerificationHistory<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a submission; returns `true` when it was not seen before.
    pub fn push(&mut self, entry: T) -> bool {
        self.entries.push(entry);
        self.seen.insert(entry)
    }

    pub fn contains(&self, entry: &T) -> bool {
        self.seen.contains(entry)
    }

    /// Number of submissions, duplicates included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct submissions.
    pub fn distinct_len(&self) -> usize {
        self.seen.len()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }
}

impl<T: Copy + Eq + Hash> FromIterator<T> for VerificationHistory<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut h = Self::new();
        for e in iter {
            h.push(e);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_tracks_list() {
        let mut h = VerificationHistory::new();
        assert!(h.push(TokenReport::new(1, 2)));
        assert!(!h.push(TokenReport::new(1, 2)));
        assert!(h.push(TokenReport::new(2, 2)));
        assert_eq!(h.len(), 3);
        assert_eq!(h.distinct_len(), 2);
        assert!(h.contains(&TokenReport::new(2, 2)));
        assert!(!h.contains(&TokenReport::new(2, 3)));
    }
}
