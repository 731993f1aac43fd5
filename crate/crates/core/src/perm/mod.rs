//! Finite permutations and permutation group actions.

mod action;
mod embed;

pub use action::PermAction;
pub use embed::{
    actions_isomorphic, all_action_isomorphisms, ActionEmbedding, ActionIsomorphism,
    EmbeddingFailure,
};

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;

/// An ordered set of opaque point names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl PointSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
                return Err(Error::InvalidPermutation(format!("bad point name `{n}`")));
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidPermutation(format!("duplicate point `{n}`")));
            }
        }
        Ok(PointSet { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }
}

/// A permutation of `0..n`, stored as its image vector.
///
/// Point names live in a [`PointSet`]; the permutation itself is index based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u32).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
            seen[i] = true;
        }
        Ok(Permutation(images.into_iter().map(|i| i as u32).collect()))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DomainMismatch(format!(
                "degrees {} and {}",
                self.degree(),
                other.degree()
            )));
        }
        Ok(self.mul(other))
    }

    /// Unchecked `self ∘ other`. Panics on degree mismatch.
    pub(crate) fn mul(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "permutation degree mismatch");
        Permutation(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Permutation(inv)
    }

    pub fn order(&self) -> usize {
        let mut lcm = 1usize;
        for len in self.cycle_lengths() {
            lcm = lcm / gcd(lcm, len) * len;
        }
        lcm
    }

    /// `true` for even permutations.
    pub fn is_even(&self) -> bool {
        self.cycle_lengths().iter().filter(|&&l| l % 2 == 0).count() % 2 == 0
    }

    fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles().iter().map(Vec::len).collect()
    }

    /// Non-trivial cycles, each starting at its least point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.apply(x);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Restriction to `subset` (given as sorted or unsorted point indices), as a
    /// permutation of positions in `subset`. `None` if `subset` is not invariant.
    pub fn restrict(&self, subset: &[usize]) -> Option<Permutation> {
        let pos: HashMap<usize, usize> = subset.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut images = Vec::with_capacity(subset.len());
        for &x in subset {
            images.push(*pos.get(&self.apply(x))? as u32);
        }
        Some(Permutation(images))
    }

    /// Conjugate by a point bijection `phi` (index map into another set of equal size):
    /// returns `phi ∘ self ∘ phi⁻¹`.
    pub fn conjugate_by(&self, phi: &[usize]) -> Permutation {
        let mut out = vec![0u32; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            out[phi[x]] = phi[y as usize] as u32;
        }
        Permutation(out)
    }

    pub fn parse(text: &str, points: &PointSet) -> Result<Permutation> {
        let mut images: Vec<usize> = (0..points.len()).collect();
        let mut moved = vec![false; points.len()];
        let bad = |m: &str| Error::InvalidPermutation(format!("`{text}`: {m}"));
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| bad("expected `(`"))?;
            let close = body.find(')').ok_or_else(|| bad("unclosed cycle"))?;
            let cyc: Vec<usize> = body[..close]
                .split_whitespace()
                .map(|t| points.require(t))
                .collect::<Result<_>>()?;
            for (i, &x) in cyc.iter().enumerate() {
                if moved[x] {
                    return Err(bad(&format!("point `{}` repeated", points.name(x))));
                }
                moved[x] = true;
                images[x] = cyc[(i + 1) % cyc.len()];
            }
            rest = body[close + 1..].trim_start();
        }
        Permutation::from_images(images)
    }

    pub fn to_cycle_string(&self, points: &PointSet) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        let mut s = String::new();
        for c in cycles {
            s.push('(');
            let names: Vec<&str> = c.iter().map(|&x| points.name(x)).collect();
            s.push_str(&names.join(" "));
            s.push(')');
        }
        s
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
