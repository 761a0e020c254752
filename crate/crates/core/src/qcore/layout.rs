use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// Ordered named subsystems. The leftmost subsystem is the most significant tensor index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemLayout {
    subsystems: Vec<(String, usize)>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(subsystems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems: Vec<(String, usize)> =
            subsystems.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in subsystems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::InvalidLayout(format!(
                    "subsystem `{label}` has dimension 0"
                )));
            }
            if label.is_empty() {
                return Err(Error::InvalidLayout("empty subsystem label".into()));
            }
            if subsystems[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::InvalidLayout(format!("duplicate label `{label}`")));
            }
        }
        Ok(SystemLayout { subsystems })
    }

    /// Single subsystem layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        SystemLayout::new([(label, dim)])
    }

    /// Three subsystems labeled `A`, `B`, `C`.
    pub fn abc(da: usize, db: usize, dc: usize) -> Result<Self> {
        SystemLayout::new([("A", da), ("B", db), ("C", dc)])
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|&(_, d)| d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|&(_, d)| d).product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.index_of(label)?].1)
    }

    /// Positions of `labels` in this layout, in the order given.
    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let idx: Vec<usize> = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<_>>()?;
        for (i, a) in idx.iter().enumerate() {
            if idx[..i].contains(a) {
                return Err(Error::InvalidGrouping(format!(
                    "label `{}` listed twice",
                    self.subsystems[*a].0
                )));
            }
        }
        Ok(idx)
    }

    /// Product of the dimensions of the named subsystems.
    pub fn dim_of_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        Ok(self
            .indices_of(labels)?
            .iter()
            .map(|&i| self.subsystems[i].1)
            .product())
    }

    /// Sub-layout made of the subsystems at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> SystemLayout {
        SystemLayout {
            subsystems: indices
                .iter()
                .map(|&i| self.subsystems[i].clone())
                .collect(),
        }
    }

    pub fn concat(&self, other: &SystemLayout) -> Result<SystemLayout> {
        SystemLayout::new(self.subsystems.iter().chain(&other.subsystems).cloned())
    }

    /// Copy with every label suffixed, e.g. `A` -> `A#2`.
    pub fn with_suffix(&self, suffix: &str) -> SystemLayout {
        SystemLayout {
            subsystems: self
                .subsystems
                .iter()
                .map(|(l, d)| (format!("{l}{suffix}"), *d))
                .collect(),
        }
    }

    /// A label not used by this layout, derived from `base`.
    pub fn fresh_label(&self, base: &str) -> String {
        let mut label = base.to_string();
        while self.index_of(&label).is_ok() {
            label.push('\'');
        }
        label
    }
}

/// Index map for reordering subsystems: entry `i` of the result is the old flat index
/// of new flat index `i`, where the new subsystem order is `order` (old positions).
pub fn subsystem_permutation(dims: &[usize], order: &[usize]) -> Vec<usize> {
    debug_assert_eq!(dims.len(), order.len());
    let total: usize = dims.iter().product();
    let strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    offsets(
        &new_dims,
        &order.iter().map(|&o| strides[o]).collect::<Vec<_>>(),
    )
    .into_iter()
    .take(total)
    .collect()
}

/// Row-major strides for the given dimensions.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = alloc::vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over `dims` (row-major), using `strides`.
pub(crate) fn offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = alloc::vec![0usize];
    for (&d, &s) in dims.iter().zip(strides) {
        let mut next = Vec::with_capacity(out.len() * d);
        for &o in &out {
            for k in 0..d {
                next.push(o + k * s);
            }
        }
        out = next;
    }
    out
}

/// A split of a layout's labels into the groups A, B, C (B is the conditioning group).
/// Groups may be empty, which stands for a trivial one-dimensional system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tripartition {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
}

impl Tripartition {
    pub fn new<S: AsRef<str>>(a: &[S], b: &[S], c: &[S]) -> Self {
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect();
        Tripartition {
            a: own(a),
            b: own(b),
            c: own(c),
        }
    }

    /// `A|B|C` with single labels.
    pub fn abc() -> Self {
        Tripartition::new(&["A"], &["B"], &["C"])
    }

    /// Parses `"A1,A2|B|C"`: `|` separates groups, `,` separates labels.
    pub fn parse(text: &str) -> Result<Self> {
        let groups: Vec<&str> = text.split('|').collect();
        if groups.len() != 3 {
            return Err(Error::InvalidGrouping(format!(
                "expected three `|`-separated groups, got `{text}`"
            )));
        }
        let split = |g: &str| -> Vec<String> {
            g.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(ToString::to_string)
                .collect()
        };
        Ok(Tripartition {
            a: split(groups[0]),
            b: split(groups[1]),
            c: split(groups[2]),
        })
    }

    /// Default grouping for a layout with exactly three subsystems.
    pub fn default_for(layout: &SystemLayout) -> Result<Self> {
        let labels: Vec<&str> = layout.labels().collect();
        if labels.len() != 3 {
            return Err(Error::InvalidGrouping(format!(
                "layout has {} subsystems; an explicit A|B|C grouping is required",
                labels.len()
            )));
        }
        Ok(Tripartition::new(&labels[..1], &labels[1..2], &labels[2..]))
    }

    /// Checks that the groups partition `layout` and returns their positions.
    pub fn resolve(&self, layout: &SystemLayout) -> Result<[Vec<usize>; 3]> {
        let a = layout.indices_of(&self.a)?;
        let b = layout.indices_of(&self.b)?;
        let c = layout.indices_of(&self.c)?;
        let mut all: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        all.sort_unstable();
        for w in all.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidGrouping(format!(
                    "label `{}` appears in more than one group",
                    layout.subsystems()[w[0]].0
                )));
            }
        }
        if all.len() != layout.len() {
            return Err(Error::InvalidGrouping(
                "groups must cover every subsystem of the layout".into(),
            ));
        }
        Ok([a, b, c])
    }
}

impl core::fmt::Display for Tripartition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}|{}|{}",
            self.a.join(","),
            self.b.join(","),
            self.c.join(",")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_rejects_duplicates_and_zero_dims() {
        assert!(SystemLayout::new([("A", 2), ("A", 2)]).is_err());
        assert!(SystemLayout::new([("A", 0)]).is_err());
        let l = SystemLayout::new([("A", 2), ("B", 3)]).unwrap();
        assert_eq!(l.total_dim(), 6);
        assert_eq!(l.dim_of("B").unwrap(), 3);
        assert!(matches!(l.index_of("Z"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn permutation_swaps_two_qubits() {
        // |01> (index 1) becomes |10> (index 2) after swapping factors.
        let p = subsystem_permutation(&[2, 2], &[1, 0]);
        assert_eq!(p, alloc::vec![0, 2, 1, 3]);
        let p = subsystem_permutation(&[2, 3], &[0, 1]);
        assert_eq!(p, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn grouping_parse_and_validate() {
        let g = Tripartition::parse("A1,A2|B|").unwrap();
        assert_eq!(g.a, ["A1", "A2"]);
        assert!(g.c.is_empty());
        let l = SystemLayout::new([("A1", 2), ("A2", 2), ("B", 2)]).unwrap();
        assert!(g.resolve(&l).is_ok());
        let bad = Tripartition::parse("A1|A1|B").unwrap();
        assert!(bad.resolve(&l).is_err());
        assert!(Tripartition::parse("A|B").is_err());
        assert_eq!(g.to_string(), "A1,A2|B|");
    }
}
