//! Nodes of the construction tree: finite digit sequences and antichains.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A finite sequence of positive digits. The empty address is the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(Vec<u32>);

impl Address {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    /// Builds an address; digits are 1-based so zero is rejected.
    pub fn new(digits: Vec<u32>) -> Option<Self> {
        digits.iter().all(|&d| d >= 1).then_some(Self(digits))
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `self * other`.
    pub fn concat(&self, other: &Address) -> Address {
        let mut digits = Vec::with_capacity(self.len() + other.len());
        digits.extend_from_slice(&self.0);
        digits.extend_from_slice(&other.0);
        Address(digits)
    }

    pub fn child(&self, digit: u32) -> Address {
        assert!(digit >= 1, "digits are 1-based");
        let mut digits = self.0.clone();
        digits.push(digit);
        Address(digits)
    }

    /// First `k` digits, defined for `k <= len`.
    pub fn prefix(&self, k: usize) -> Option<Address> {
        (k <= self.len()).then(|| Address(self.0[..k].to_vec()))
    }

    pub fn parent(&self) -> Option<Address> {
        self.len().checked_sub(1).and_then(|k| self.prefix(k))
    }

    /// Strict prefix order: `self ≺ other` iff `other` starts with `self`
    /// and is longer.
    pub fn precedes(&self, other: &Address) -> bool {
        self.len() < other.len() && other.0.starts_with(&self.0)
    }

    /// `self ⪯ other`.
    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Suffix of `self` after `base`, if `base ⪯ self`.
    pub fn relative_to(&self, base: &Address) -> Option<Address> {
        base.is_prefix_of(self)
            .then(|| Address(self.0[base.len()..].to_vec()))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Address {
    type Err = String;

    /// Parses `1.2.3`; the empty string, `root` and `∅` are the root.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "root" || s == "∅" {
            return Ok(Self::root());
        }
        let digits = s
            .split('.')
            .map(|d| d.parse::<u32>().map_err(|e| format!("bad digit {d:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        Address::new(digits).ok_or_else(|| format!("address {s:?} has a zero digit"))
    }
}

/// True iff no member is a strict prefix of another.
///
/// After lexicographic sorting, a prefix is immediately followed by one of
/// its extensions, so checking neighbours suffices.
pub fn is_antichain<'a, I>(addresses: I) -> bool
where
    I: IntoIterator<Item = &'a Address>,
{
    let sorted: BTreeSet<&Address> = addresses.into_iter().collect();
    let sorted: Vec<&Address> = sorted.into_iter().collect();
    sorted.windows(2).all(|w| !w[0].precedes(w[1]))
}

/// A finite set of addresses, none a prefix of another.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Antichain(BTreeSet<Address>);

impl Antichain {
    pub fn new<I>(members: I) -> Result<Self, Address>
    where
        I: IntoIterator<Item = Address>,
    {
        let set: BTreeSet<Address> = members.into_iter().collect();
        let sorted: Vec<&Address> = set.iter().collect();
        if let Some(w) = sorted.windows(2).find(|w| w[0].precedes(w[1])) {
            return Err(w[0].clone());
        }
        Ok(Self(set))
    }

    pub fn members(&self) -> impl Iterator<Item = &Address> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &Address) -> bool {
        self.0.contains(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(d: &[u32]) -> Address {
        Address::new(d.to_vec()).unwrap()
    }

    #[test]
    fn antichain_examples() {
        assert!(is_antichain(&[]));
        assert!(is_antichain(&[a(&[1]), a(&[2]), a(&[3, 1])]));
        assert!(!is_antichain(&[a(&[1]), a(&[1, 2])]));
        assert!(Antichain::new([a(&[1]), a(&[1, 2])]).is_err());
        // Lexicographic neighbours can hide a prefix only behind its own extensions.
        assert!(!is_antichain(&[a(&[1]), a(&[1, 1, 5]), a(&[1, 2]), a(&[2])]));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("1.20.3".parse::<Address>().unwrap(), a(&[1, 20, 3]));
        assert_eq!("".parse::<Address>().unwrap(), Address::root());
        assert!("1.0".parse::<Address>().is_err());
        assert_eq!(a(&[4, 2]).to_string(), "4.2");
        assert_eq!(Address::root().to_string(), "∅");
    }

    fn address() -> impl Strategy<Value = Address> {
        prop::collection::vec(1u32..4, 0..6).prop_map(Address)
    }

    proptest! {
        #[test]
        fn concat_and_prefix_algebra(s in address(), t in address()) {
            let st = s.concat(&t);
            prop_assert_eq!(st.len(), s.len() + t.len());
            prop_assert_eq!(st.prefix(s.len()).unwrap(), s.clone());
            prop_assert!(st.prefix(st.len() + 1).is_none());
            prop_assert_eq!(st.relative_to(&s).unwrap(), t.clone());
        }

        #[test]
        fn precedes_is_a_strict_partial_order(s in address(), t in address(), u in address()) {
            prop_assert!(!s.precedes(&s));
            if s.precedes(&t) && t.precedes(&u) {
                prop_assert!(s.precedes(&u));
            }
            prop_assert!(!(s.precedes(&t) && t.precedes(&s)));
        }

        #[test]
        fn sorted_check_matches_pairwise(set in prop::collection::vec(address(), 0..8)) {
            let pairwise = set.iter().all(|x| set.iter().all(|y| !x.precedes(y)));
            prop_assert_eq!(is_antichain(&set), pairwise);
        }
    }
}
