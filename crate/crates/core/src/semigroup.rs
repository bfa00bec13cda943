//! Finite abelian *-semigroups with neutral element, given by explicit
//! multiplication tables. These index the positive definite functions and
//! representations.

use std::fmt;

use crate::error::{Error, Result};

/// A finite abelian *-semigroup: carrier `{0, …, n-1}`, multiplication
/// table, involution permutation and neutral element. Validated
/// exhaustively on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarSemigroup {
    n: usize,
    mul: Vec<usize>, // row-major n*n
    star: Vec<usize>,
    e: usize,
}

/// First counterexample found by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    EntryOutOfRange { a: usize, b: usize, value: usize },
    NotAssociative { a: usize, b: usize, c: usize },
    NotCommutative { a: usize, b: usize },
    NotNeutral { a: usize },
    StarOutOfRange { a: usize, value: usize },
    StarNotInvolutive { a: usize },
    StarNotMultiplicative { a: usize, b: usize },
    NeutralNotFixed,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::EntryOutOfRange { a, b, value } => {
                write!(f, "mul({a},{b}) = {value} is out of range")
            }
            Violation::NotAssociative { a, b, c } => {
                write!(f, "({a}*{b})*{c} != {a}*({b}*{c})")
            }
            Violation::NotCommutative { a, b } => write!(f, "mul({a},{b}) != mul({b},{a})"),
            Violation::NotNeutral { a } => write!(f, "e*{a} != {a}"),
            Violation::StarOutOfRange { a, value } => {
                write!(f, "star({a}) = {value} is out of range")
            }
            Violation::StarNotInvolutive { a } => write!(f, "star(star({a})) != {a}"),
            Violation::StarNotMultiplicative { a, b } => {
                write!(f, "star({a}*{b}) != star({a})*star({b})")
            }
            Violation::NeutralNotFixed => write!(f, "star(e) != e"),
        }
    }
}

/// Exhaustively checks the tables for the abelian *-semigroup laws and
/// reports the first counterexample. Table shape errors come back as
/// structural errors instead.
pub fn validate(n: usize, mul: &[Vec<usize>], star: &[usize], e: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::SemigroupShape("carrier is empty".into()));
    }
    if mul.len() != n || mul.iter().any(|row| row.len() != n) {
        return Err(Error::SemigroupShape(format!(
            "multiplication table must be {n}x{n}"
        )));
    }
    if star.len() != n {
        return Err(Error::SemigroupShape(format!(
            "involution must list {n} images"
        )));
    }
    if e >= n {
        return Err(Error::SemigroupShape(format!(
            "neutral element {e} out of range"
        )));
    }
    let law = |v: Violation| Err(Error::SemigroupLaw(v));
    for a in 0..n {
        for b in 0..n {
            if mul[a][b] >= n {
                return law(Violation::EntryOutOfRange {
                    a,
                    b,
                    value: mul[a][b],
                });
            }
        }
    }
    for (a, &sa) in star.iter().enumerate() {
        if sa >= n {
            return law(Violation::StarOutOfRange { a, value: sa });
        }
    }
    for a in 0..n {
        for b in 0..n {
            if mul[a][b] != mul[b][a] {
                return law(Violation::NotCommutative { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                    return law(Violation::NotAssociative { a, b, c });
                }
            }
        }
    }
    for a in 0..n {
        if mul[e][a] != a {
            return law(Violation::NotNeutral { a });
        }
    }
    for a in 0..n {
        if star[star[a]] != a {
            return law(Violation::StarNotInvolutive { a });
        }
    }
    if star[e] != e {
        return law(Violation::NeutralNotFixed);
    }
    for a in 0..n {
        for b in 0..n {
            if star[mul[a][b]] != mul[star[a]][star[b]] {
                return law(Violation::StarNotMultiplicative { a, b });
            }
        }
    }
    Ok(())
}

impl StarSemigroup {
    pub fn new(mul: Vec<Vec<usize>>, star: Vec<usize>, e: usize) -> Result<Self> {
        let n = mul.len();
        validate(n, &mul, &star, e)?;
        let flat = mul.into_iter().flatten().collect();
        Ok(StarSemigroup {
            n,
            mul: flat,
            star,
            e,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b]
    }

    pub fn star(&self, a: usize) -> usize {
        self.star[a]
    }

    pub fn neutral(&self) -> usize {
        self.e
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    /// `star(t) * s`, the index the associated kernel evaluates a function at.
    pub fn pairing(&self, s: usize, t: usize) -> usize {
        self.mul(self.star(t), s)
    }

    /// True when the involution inverts: `s* s = e` for every `s`. In that
    /// case the semigroup is a group and representations ought to be
    /// unitary-valued.
    pub fn star_is_inverse(&self) -> bool {
        self.elements().all(|s| self.mul(self.star(s), s) == self.e)
    }

    pub fn mul_table(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    pub fn star_table(&self) -> &[usize] {
        &self.star
    }

    /// The power set of an `m`-element set under intersection; the neutral
    /// element is the full set, the involution is the identity. Element
    /// `i` is the subset with characteristic bits `i`.
    pub fn powerset_intersection(m: u32) -> Result<Self> {
        if m > 16 {
            return Err(Error::SemigroupShape(format!(
                "powerset of {m} atoms is too large"
            )));
        }
        let n = 1usize << m;
        let mul = (0..n).map(|a| (0..n).map(|b| a & b).collect()).collect();
        StarSemigroup::new(mul, (0..n).collect(), n - 1)
    }

    /// The cyclic group Z_n with `star(k) = -k mod n`.
    pub fn cyclic_group(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::SemigroupShape("cyclic group needs n >= 1".into()));
        }
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let star = (0..n).map(|k| (n - k) % n).collect();
        StarSemigroup::new(mul, star, 0)
    }

    /// `{0, …, nmax}` under saturating addition `min(a+b, nmax)`, with the
    /// identity involution.
    pub fn truncated_naturals(nmax: usize) -> Result<Self> {
        let n = nmax + 1;
        let mul = (0..n)
            .map(|a| (0..n).map(|b| (a + b).min(nmax)).collect())
            .collect();
        StarSemigroup::new(mul, (0..n).collect(), 0)
    }
}
