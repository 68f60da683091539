//! Structural annotations on operators.
//!
//! Tags are promises made by whoever builds the operator. They drive solver
//! selection and compatibility checks, and are never checked against the
//! operator's entries.

use std::fmt;
use std::str::FromStr;

use bitflags::bitflags;

use crate::error::Error;

bitflags! {
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
    pub struct TagSet: u16 {
        const SYMMETRIC = 1 << 0;
        const DIAGONAL = 1 << 1;
        const TRIDIAGONAL = 1 << 2;
        const LOWER_TRIANGULAR = 1 << 3;
        const UPPER_TRIANGULAR = 1 << 4;
        const UNIT_DIAGONAL = 1 << 5;
        const POSITIVE_SEMIDEFINITE = 1 << 6;
        const NEGATIVE_SEMIDEFINITE = 1 << 7;
    }
}

const NAMES: [(TagSet, &str); 8] = [
    (TagSet::SYMMETRIC, "symmetric"),
    (TagSet::DIAGONAL, "diagonal"),
    (TagSet::TRIDIAGONAL, "tridiagonal"),
    (TagSet::LOWER_TRIANGULAR, "lower_triangular"),
    (TagSet::UPPER_TRIANGULAR, "upper_triangular"),
    (TagSet::UNIT_DIAGONAL, "unit_diagonal"),
    (TagSet::POSITIVE_SEMIDEFINITE, "positive_semidefinite"),
    (TagSet::NEGATIVE_SEMIDEFINITE, "negative_semidefinite"),
];

impl TagSet {
    /// Adds every tag implied by the ones present. `diagonal` implies
    /// tridiagonal, both triangular tags, and symmetric.
    pub fn normalized(self) -> TagSet {
        if self.contains(TagSet::DIAGONAL) {
            self | TagSet::TRIDIAGONAL
                | TagSet::LOWER_TRIANGULAR
                | TagSet::UPPER_TRIANGULAR
                | TagSet::SYMMETRIC
        } else {
            self
        }
    }

    /// Has `tag`, taking implications into account.
    pub fn has(self, tag: TagSet) -> bool {
        self.normalized().contains(tag)
    }

    pub fn is_symmetric(self) -> bool {
        self.has(TagSet::SYMMETRIC)
    }

    pub fn is_diagonal(self) -> bool {
        self.has(TagSet::DIAGONAL)
    }

    pub fn is_tridiagonal(self) -> bool {
        self.has(TagSet::TRIDIAGONAL)
    }

    pub fn is_lower_triangular(self) -> bool {
        self.has(TagSet::LOWER_TRIANGULAR)
    }

    pub fn is_upper_triangular(self) -> bool {
        self.has(TagSet::UPPER_TRIANGULAR)
    }

    pub fn is_triangular(self) -> bool {
        self.is_lower_triangular() || self.is_upper_triangular()
    }

    pub fn is_unit_diagonal(self) -> bool {
        self.has(TagSet::UNIT_DIAGONAL)
    }

    pub fn is_positive_semidefinite(self) -> bool {
        self.has(TagSet::POSITIVE_SEMIDEFINITE)
    }

    pub fn is_negative_semidefinite(self) -> bool {
        self.has(TagSet::NEGATIVE_SEMIDEFINITE)
    }

    /// Tags of the transposed operator: the triangular flags swap.
    pub fn transposed(self) -> TagSet {
        let mut out = self
            - (TagSet::LOWER_TRIANGULAR | TagSet::UPPER_TRIANGULAR);
        if self.contains(TagSet::LOWER_TRIANGULAR) {
            out |= TagSet::UPPER_TRIANGULAR;
        }
        if self.contains(TagSet::UPPER_TRIANGULAR) {
            out |= TagSet::LOWER_TRIANGULAR;
        }
        out
    }

    /// Tags kept by `A + B`.
    pub fn for_sum(a: TagSet, b: TagSet) -> TagSet {
        let (a, b) = (a.normalized(), b.normalized());
        let structural = TagSet::SYMMETRIC
            | TagSet::DIAGONAL
            | TagSet::TRIDIAGONAL
            | TagSet::LOWER_TRIANGULAR
            | TagSet::UPPER_TRIANGULAR;
        let mut out = a & b & structural;
        out |= a & b & (TagSet::POSITIVE_SEMIDEFINITE | TagSet::NEGATIVE_SEMIDEFINITE);
        out
    }

    /// Tags kept by `c * A`.
    pub fn for_scale(c: f64, a: TagSet) -> TagSet {
        let a = a.normalized();
        let structural = TagSet::SYMMETRIC
            | TagSet::DIAGONAL
            | TagSet::TRIDIAGONAL
            | TagSet::LOWER_TRIANGULAR
            | TagSet::UPPER_TRIANGULAR;
        let mut out = a & structural;
        if c >= 0.0 {
            out |= a & (TagSet::POSITIVE_SEMIDEFINITE | TagSet::NEGATIVE_SEMIDEFINITE);
        } else {
            if a.contains(TagSet::POSITIVE_SEMIDEFINITE) {
                out |= TagSet::NEGATIVE_SEMIDEFINITE;
            }
            if a.contains(TagSet::NEGATIVE_SEMIDEFINITE) {
                out |= TagSet::POSITIVE_SEMIDEFINITE;
            }
        }
        if c == 1.0 {
            out |= a & TagSet::UNIT_DIAGONAL;
        }
        out
    }

    /// Tags kept by `A ∘ B`: only diagonal ∘ diagonal is provably diagonal.
    pub fn for_compose(a: TagSet, b: TagSet) -> TagSet {
        if a.is_diagonal() && b.is_diagonal() {
            TagSet::DIAGONAL.normalized()
        } else {
            TagSet::empty()
        }
    }

    pub fn names(self) -> Vec<&'static str> {
        NAMES
            .iter()
            .filter(|(t, _)| self.contains(*t))
            .map(|(_, n)| *n)
            .collect()
    }

    /// Parses a comma-separated list of tag names.
    pub fn parse_list(list: &str) -> Result<TagSet, Error> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .try_fold(TagSet::empty(), |acc, name| Ok(acc | name.parse::<TagSet>()?))
    }
}

impl FromStr for TagSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NAMES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(t, _)| *t)
            .ok_or_else(|| Error::Contract(format!("unknown tag `{s}`")))
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}
