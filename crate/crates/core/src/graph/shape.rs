//! Canonical shapes: rooted trees (AHU encoding), components and whole graphs.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Canonical encoding of a rooted unordered tree.
///
/// A node is `(` followed by the encodings of its children in sorted order
/// and `)`. Two rooted trees are isomorphic iff their encodings are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct TreeShape(String);

impl TreeShape {
    pub fn leaf() -> Self {
        TreeShape("()".to_owned())
    }

    pub fn from_children(mut children: Vec<TreeShape>) -> Self {
        children.sort_unstable();
        let len = 2 + children.iter().map(|c| c.0.len()).sum::<usize>();
        let mut s = String::with_capacity(len);
        s.push('(');
        for c in &children {
            s.push_str(&c.0);
        }
        s.push(')');
        TreeShape(s)
    }

    /// Complete binary tree with `levels` levels below the root (`0` is a leaf).
    pub fn binary(levels: u32) -> Self {
        let mut t = Self::leaf();
        for _ in 0..levels {
            t = Self::from_children(vec![t.clone(), t]);
        }
        t
    }

    /// The hanging tree T(m): a root with a single child that carries a
    /// complete binary tree of depth m-1; 2^m nodes. T(0) is a bare root.
    pub fn hanging(m: u32) -> Self {
        if m == 0 {
            return Self::leaf();
        }
        Self::from_children(vec![Self::binary(m - 1)])
    }

    /// Root of the zero component for a = -1: h single leaves and h
    /// nodes with two leaves each, where h = (q-1)/2.
    pub fn z_root(q: u64) -> Self {
        let h = ((q - 1) / 2) as usize;
        let mut ch = vec![Self::leaf(); h];
        ch.extend(std::iter::repeat_n(Self::binary(1), h));
        Self::from_children(ch)
    }

    /// Root of the zero component for a = +1: q - 1 leaves.
    pub fn z_star_root(q: u64) -> Self {
        Self::from_children(vec![Self::leaf(); (q - 1) as usize])
    }

    pub fn from_encoding(s: &str) -> Option<Self> {
        let mut depth = 0i64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => return None,
            }
            if depth < 0 || (depth == 0 && i + 1 != s.len()) {
                return None;
            }
        }
        if depth != 0 || s.is_empty() {
            return None;
        }
        // re-canonicalize
        Some(Self::parse(s.as_bytes()))
    }

    fn parse(bytes: &[u8]) -> Self {
        let kids = split_children(bytes)
            .into_iter()
            .map(Self::parse)
            .collect();
        Self::from_children(kids)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_leaf(&self) -> bool {
        self.0.len() == 2
    }

    pub fn size(&self) -> usize {
        self.0.len() / 2
    }

    /// Height of the tree; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        let mut d = 0usize;
        let mut best = 0usize;
        for b in self.0.bytes() {
            if b == b'(' {
                d += 1;
                best = best.max(d);
            } else {
                d -= 1;
            }
        }
        best - 1
    }

    pub fn children(&self) -> Vec<TreeShape> {
        split_children(self.0.as_bytes())
            .into_iter()
            .map(|c| TreeShape(String::from_utf8(c.to_vec()).expect("ascii")))
            .collect()
    }

    /// m such that this is T(m), if any.
    pub fn hanging_depth(&self) -> Option<u32> {
        if self.is_leaf() {
            return Some(0);
        }
        let n = self.size();
        if !n.is_power_of_two() {
            return None;
        }
        let m = n.trailing_zeros();
        (*self == Self::hanging(m)).then_some(m)
    }
}

fn split_children(bytes: &[u8]) -> Vec<&[u8]> {
    let inner = &bytes[1..bytes.len() - 1];
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, &b) in inner.iter().enumerate() {
        if b == b'(' {
            if depth == 0 {
                start = i;
            }
            depth += 1;
        } else {
            depth -= 1;
            if depth == 0 {
                out.push(&inner[start..=i]);
            }
        }
    }
    out
}

impl fmt::Debug for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() <= 64 {
            write!(f, "TreeShape({})", self.0)
        } else {
            write!(f, "TreeShape(<{} nodes>)", self.size())
        }
    }
}

/// Index of the lexicographically least rotation (Booth's algorithm).
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut fail: Vec<isize> = vec![-1; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = &s[j % n];
        let mut i = fail[j - k - 1];
        while i != -1 && *sj != s[(k + i as usize + 1) % n] {
            if *sj < s[(k + i as usize + 1) % n] {
                k = j - i as usize - 1;
            }
            i = fail[i as usize];
        }
        // here i == -1 or the characters match
        if i == -1 && *sj != s[k % n] {
            if *sj < s[k % n] {
                k = j;
            }
            fail[j - k] = -1;
        } else {
            fail[j - k] = i + 1;
        }
    }
    k % n
}

/// A cycle with a rooted tree hanging at each cycle node, listed in cycle
/// order and rotated to the least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentShape {
    cycle_length: usize,
    trees: Vec<TreeShape>,
}

impl ComponentShape {
    /// `trees[i]` hangs at the i-th cycle node, in the direction of f.
    pub fn new(mut trees: Vec<TreeShape>) -> Self {
        assert!(!trees.is_empty(), "a component has at least one cycle node");
        let r = least_rotation(&trees);
        trees.rotate_left(r);
        Self {
            cycle_length: trees.len(),
            trees,
        }
    }

    /// `(Cyc(n), T)` with the same tree at every cycle node.
    pub fn uniform(cycle_length: usize, tree: TreeShape) -> Self {
        Self {
            cycle_length,
            trees: vec![tree; cycle_length],
        }
    }

    pub fn cycle_length(&self) -> usize {
        self.cycle_length
    }

    pub fn trees(&self) -> &[TreeShape] {
        &self.trees
    }

    pub fn size(&self) -> usize {
        self.trees.iter().map(TreeShape::size).sum()
    }

    fn uniform_tree(&self) -> Option<&TreeShape> {
        let first = &self.trees[0];
        self.trees.iter().all(|t| t == first).then_some(first)
    }

    /// The known named form of this component, if it has one.
    pub fn named(&self) -> Option<NamedShape> {
        let tree = self.uniform_tree()?;
        if let Some(m) = tree.hanging_depth() {
            return Some(NamedShape::Hanging {
                cycle_length: self.cycle_length,
                depth: m,
            });
        }
        if self.cycle_length != 1 {
            return None;
        }
        let kids = tree.children();
        let leaves = kids.iter().filter(|c| c.is_leaf()).count();
        let cherry = TreeShape::binary(1);
        let cherries = kids.iter().filter(|&c| *c == cherry).count();
        if leaves == kids.len() && leaves >= 2 {
            return Some(NamedShape::ZStar(leaves as u64 + 1));
        }
        if leaves + cherries == kids.len() && leaves == cherries && leaves >= 1 {
            return Some(NamedShape::Z(2 * leaves as u64 + 1));
        }
        None
    }

    pub fn notation(&self) -> String {
        match self.named() {
            Some(n) => n.to_string(),
            None => {
                let sizes: Vec<String> = self.trees.iter().map(|t| t.size().to_string()).collect();
                let depth = self.trees.iter().map(TreeShape::depth).max().unwrap_or(0);
                format!(
                    "(Cyc({}),trees[{}] depth {})",
                    self.cycle_length,
                    sizes.join(","),
                    depth
                )
            }
        }
    }
}

impl Serialize for ComponentShape {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ComponentShape", 3)?;
        st.serialize_field("notation", &self.notation())?;
        st.serialize_field("cycle_length", &self.cycle_length)?;
        st.serialize_field("trees", &self.trees)?;
        st.end()
    }
}

/// Shapes with a conventional name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedShape {
    /// `(Cyc(n), T(m))`; `m = 0` is a bare cycle.
    Hanging { cycle_length: usize, depth: u32 },
    /// Fixed point with (q-1)/2 hairs T(1) and (q-1)/2 hairs T(2).
    Z(u64),
    /// Fixed point with q-1 hairs T(1).
    ZStar(u64),
}

impl NamedShape {
    fn is_special(&self) -> bool {
        matches!(self, NamedShape::Z(_) | NamedShape::ZStar(_))
    }
}

impl fmt::Display for NamedShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NamedShape::Hanging {
                cycle_length,
                depth: 0,
            } => write!(f, "Cyc({cycle_length})"),
            NamedShape::Hanging {
                cycle_length,
                depth,
            } => write!(f, "(Cyc({cycle_length}),T({depth}))"),
            NamedShape::Z(q) => write!(f, "Z({q})"),
            NamedShape::ZStar(q) => write!(f, "Z*({q})"),
        }
    }
}

/// Multiset of component shapes: the isomorphism class of a functional graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphSignature {
    components: BTreeMap<ComponentShape, u64>,
}

impl GraphSignature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, shape: ComponentShape, multiplicity: u64) {
        if multiplicity > 0 {
            *self.components.entry(shape).or_insert(0) += multiplicity;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ComponentShape, u64)> {
        self.components.iter().map(|(s, &m)| (s, m))
    }

    pub fn multiplicity(&self, shape: &ComponentShape) -> u64 {
        self.components.get(shape).copied().unwrap_or(0)
    }

    pub fn distinct_shapes(&self) -> usize {
        self.components.len()
    }

    pub fn component_count(&self) -> u64 {
        self.components.values().sum()
    }

    pub fn node_count(&self) -> u64 {
        self.iter().map(|(s, m)| s.size() as u64 * m).sum()
    }

    pub fn periodic_count(&self) -> u64 {
        self.iter().map(|(s, m)| s.cycle_length() as u64 * m).sum()
    }

    /// Number of cycles of each length.
    pub fn cycle_census(&self) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for (s, m) in self.iter() {
            *out.entry(s.cycle_length()).or_insert(0) += m;
        }
        out
    }

    /// Sum notation, e.g. `Z(13) ⊕ 4×(Cyc(6),T(2)) ⊕ 6×(Cyc(2),T(2))`.
    ///
    /// Named zero components come first without a multiplicity when they
    /// occur once; the remaining terms are ordered by multiplicity, then
    /// cycle length, then size.
    pub fn notation(&self) -> String {
        let mut special = Vec::new();
        let mut rest = Vec::new();
        for (s, m) in self.iter() {
            match s.named() {
                Some(n) if n.is_special() && m == 1 => special.push(n.to_string()),
                _ => rest.push((m, s.cycle_length(), s.size(), s.notation())),
            }
        }
        rest.sort();
        let mut terms = special;
        terms.extend(rest.into_iter().map(|(m, _, _, n)| format!("{m}×{n}")));
        terms.join(" ⊕ ")
    }
}

impl GraphSignature {
    /// Parse sum notation such as `Z(13) ⊕ 4×(Cyc(6),T(2)) ⊕ 6×(Cyc(2),T(2))`.
    ///
    /// Accepted terms: `Z(n)`, `Z*(n)`, `Cyc(n)`, `(Cyc(n),T(m))`, each with an
    /// optional `k×` (or `kx`) multiplicity prefix.
    pub fn from_notation(text: &str) -> crate::Result<Self> {
        let bad = |t: &str| crate::Error::Notation(t.to_owned());
        let num = |t: &str, s: &str| -> crate::Result<u64> { s.trim().parse().map_err(|_| bad(t)) };
        let mut sig = GraphSignature::new();
        for term in text.split('⊕') {
            let term = term.trim();
            let (mult, body) = match term.split_once(['×', 'x']) {
                Some((m, rest)) if !m.is_empty() && m.trim().chars().all(|c| c.is_ascii_digit()) => {
                    (num(term, m)?, rest.trim())
                }
                _ => (1, term),
            };
            let shape = if let Some(n) = body.strip_prefix("Z*(").and_then(|r| r.strip_suffix(')')) {
                let n = num(term, n)?;
                if n < 2 {
                    return Err(bad(term));
                }
                ComponentShape::new(vec![TreeShape::z_star_root(n)])
            } else if let Some(n) = body.strip_prefix("Z(").and_then(|r| r.strip_suffix(')')) {
                let n = num(term, n)?;
                if n < 3 || n % 2 == 0 {
                    return Err(bad(term));
                }
                ComponentShape::new(vec![TreeShape::z_root(n)])
            } else if let Some(inner) = body.strip_prefix("(Cyc(").and_then(|r| r.strip_suffix("))")) {
                let (n, m) = inner.split_once("),T(").ok_or_else(|| bad(term))?;
                let (n, m) = (num(term, n)?, num(term, m)?);
                if n == 0 || m > 40 {
                    return Err(bad(term));
                }
                ComponentShape::uniform(n as usize, TreeShape::hanging(m as u32))
            } else if let Some(n) = body.strip_prefix("Cyc(").and_then(|r| r.strip_suffix(')')) {
                let n = num(term, n)?;
                if n == 0 {
                    return Err(bad(term));
                }
                ComponentShape::uniform(n as usize, TreeShape::leaf())
            } else {
                return Err(bad(term));
            };
            sig.add(shape, mult);
        }
        Ok(sig)
    }
}

/// True iff the two signatures describe isomorphic functional graphs.
pub fn signature_equal(s1: &GraphSignature, s2: &GraphSignature) -> bool {
    s1 == s2
}

#[derive(Serialize)]
struct SignatureEntry<'a> {
    multiplicity: u64,
    #[serde(flatten)]
    shape: &'a ComponentShape,
}

impl Serialize for GraphSignature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<SignatureEntry<'_>> = self
            .iter()
            .map(|(shape, multiplicity)| SignatureEntry {
                multiplicity,
                shape,
            })
            .collect();
        entries.serialize(s)
    }
}
