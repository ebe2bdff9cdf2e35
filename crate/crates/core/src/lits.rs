//! Cubes and clauses over latch literals — the currency of frames, proof
//! obligations, and lemmas.

use std::fmt;

/// A signed latch literal. The payload is a 1-based latch ordinal with a
/// sign: positive means the latch is true. This matches the certificate
/// file convention of nonzero signed indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateLit(i32);

impl StateLit {
    /// `latch` is the 0-based latch ordinal.
    pub fn new(latch: usize, positive: bool) -> Self {
        let v = latch as i32 + 1;
        StateLit(if positive { v } else { -v })
    }

    pub fn from_signed(raw: i32) -> Option<Self> {
        if raw == 0 {
            None
        } else {
            Some(StateLit(raw))
        }
    }

    pub fn latch(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn signed(self) -> i32 {
        self.0
    }
}

impl std::ops::Not for StateLit {
    type Output = StateLit;
    fn not(self) -> StateLit {
        StateLit(-self.0)
    }
}

impl fmt::Debug for StateLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn normalize(mut lits: Vec<StateLit>) -> Option<Vec<StateLit>> {
    lits.sort_by_key(|l| (l.latch(), l.is_positive()));
    lits.dedup();
    for w in lits.windows(2) {
        if w[0].latch() == w[1].latch() {
            return None; // complementary pair
        }
    }
    Some(lits)
}

/// A conjunction of latch literals: sorted by latch index, duplicate-free,
/// no complementary pair.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cube(Vec<StateLit>);

/// A disjunction of latch literals (a lemma), same normal form as [`Cube`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(Vec<StateLit>);

impl Cube {
    pub fn new(lits: Vec<StateLit>) -> Self {
        Cube(normalize(lits).expect("complementary literals in cube"))
    }

    pub fn try_new(lits: Vec<StateLit>) -> Option<Self> {
        normalize(lits).map(Cube)
    }

    pub fn lits(&self) -> &[StateLit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: StateLit) -> bool {
        self.0.binary_search_by_key(&(lit.latch(), lit.is_positive()), |l| {
            (l.latch(), l.is_positive())
        })
        .is_ok()
    }

    pub fn without(&self, lit: StateLit) -> Cube {
        Cube(self.0.iter().copied().filter(|&l| l != lit).collect())
    }

    /// Literal-wise negation: ¬(a ∧ b) = (¬a ∨ ¬b).
    pub fn negate(&self) -> Clause {
        Clause(self.0.iter().map(|&l| !l).collect())
    }

    /// Does `self` (as a set of literals) contain all literals of `other`?
    /// Semantically: self ⇒ other as conjunctions.
    pub fn subsumes(&self, other: &Cube) -> bool {
        subset(&other.0, &self.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = StateLit> + '_ {
        self.0.iter().copied()
    }
}

impl Clause {
    pub fn new(lits: Vec<StateLit>) -> Self {
        Clause(normalize(lits).expect("tautological clause"))
    }

    pub fn try_new(lits: Vec<StateLit>) -> Option<Self> {
        normalize(lits).map(Clause)
    }

    pub fn lits(&self) -> &[StateLit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Literal-wise negation: ¬(a ∨ b) = (¬a ∧ ¬b).
    pub fn negate(&self) -> Cube {
        Cube(self.0.iter().map(|&l| !l).collect())
    }

    /// self ⊆ other as literal sets; semantically self ⇒ other as
    /// disjunctions, so `other` is redundant wherever `self` is asserted.
    pub fn subsumes(&self, other: &Clause) -> bool {
        subset(&self.0, &other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = StateLit> + '_ {
        self.0.iter().copied()
    }
}

/// Is `a` a subset of `b`? Both sorted by (latch, sign).
fn subset(a: &[StateLit], b: &[StateLit]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut i = 0;
    for &x in b {
        if i == a.len() {
            return true;
        }
        if a[i] == x {
            i += 1;
        }
    }
    i == a.len()
}

impl fmt::Debug for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}
