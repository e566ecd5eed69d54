//! The functional graph of a map over all q^2 states, its decomposition into
//! components (a cycle with trees hanging off each cycle node) and canonical
//! signatures for isomorphism comparison.

mod dot;
mod shape;

use rayon::prelude::*;

pub use dot::DotOptions;
pub use shape::{
    least_rotation, signature_equal, ComponentShape, GraphSignature, NamedShape, TreeShape,
};

use crate::dynamics::MapParams;
use crate::error::{Error, Result};
use crate::ffield::Ext;

/// Environment variable overriding [`DEFAULT_MAX_Q`].
pub const MAX_Q_ENV: &str = "QDYN_MAX_Q";

/// Default upper bound on q for full graph builds (q^2 ≈ 25M states).
pub const DEFAULT_MAX_Q: u64 = 5003;

/// Hard bound: state indices are u32.
const INDEX_MAX_Q: u64 = 65_535;

/// Bound on q for graph builds, honoring [`MAX_Q_ENV`].
pub fn max_q() -> u64 {
    std::env::var(MAX_Q_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_Q)
        .min(INDEX_MAX_Q)
}

/// Successor array over states `x*q + y`.
#[derive(Clone, Debug)]
pub struct FunctionalGraph {
    params: MapParams,
    successor: Vec<u32>,
}

pub fn build_graph(params: &MapParams) -> Result<FunctionalGraph> {
    FunctionalGraph::build(params)
}

impl FunctionalGraph {
    pub fn build(params: &MapParams) -> Result<Self> {
        Self::build_with_limit(params, max_q())
    }

    pub fn build_with_limit(params: &MapParams, max_q: u64) -> Result<Self> {
        let q = params.q();
        let max_q = max_q.min(INDEX_MAX_Q);
        if q > max_q {
            return Err(Error::ResourceLimit {
                q,
                max_q,
                env: MAX_Q_ENV,
            });
        }
        let field = params.field();
        let n = (q * q) as usize;
        let mut successor = vec![0u32; n];
        successor
            .par_chunks_mut(q as usize)
            .enumerate()
            .for_each(|(row, out)| {
                let x = field.from_u64(row as u64);
                for (y, slot) in field.elements().zip(out.iter_mut()) {
                    let (u, v) = params.eval_coords(x, y);
                    *slot = (u.value() * q + v.value()) as u32;
                }
            });
        Ok(Self {
            params: *params,
            successor,
        })
    }

    /// Graph of an arbitrary successor array; used for auxiliary graphs
    /// such as the restriction of f to F_q.
    pub fn from_successors(params: MapParams, successor: Vec<u32>) -> Self {
        debug_assert!(successor.iter().all(|&s| (s as usize) < successor.len()));
        Self { params, successor }
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn successor(&self) -> &[u32] {
        &self.successor
    }

    pub fn len(&self) -> usize {
        self.successor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successor.is_empty()
    }

    pub fn state(&self, i: usize) -> Ext {
        self.params.ext().decode(i)
    }

    pub fn index(&self, x: Ext) -> usize {
        self.params.ext().encode(x)
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.len()];
        for &s in &self.successor {
            d[s as usize] += 1;
        }
        d
    }

    pub fn decompose(&self) -> Decomposition {
        decompose(&self.successor)
    }

    pub fn signature(&self) -> GraphSignature {
        self.decompose().signature
    }

    pub fn to_dot(&self, opts: &DotOptions) -> String {
        dot::to_dot(self, opts)
    }
}

/// States lying on cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSet {
    flags: Vec<bool>,
    count: usize,
}

impl PeriodicSet {
    pub fn contains(&self, i: usize) -> bool {
        self.flags[i]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i))
    }

    /// Whether `successor` restricted to the set is a bijection onto it.
    /// Returns a witness state on failure.
    pub fn check_permutation(&self, successor: &[u32]) -> std::result::Result<(), usize> {
        let mut hit = vec![false; self.flags.len()];
        for i in self.iter() {
            let s = successor[i] as usize;
            if !self.flags[s] || hit[s] {
                return Err(i);
            }
            hit[s] = true;
        }
        Ok(())
    }
}

/// Reverse edges restricted to non-periodic sources, in CSR form.
#[derive(Clone, Debug)]
pub struct ReverseAdjacency {
    offsets: Vec<u32>,
    sources: Vec<u32>,
}

impl ReverseAdjacency {
    pub fn new(successor: &[u32], periodic: &PeriodicSet) -> Self {
        let n = successor.len();
        let mut offsets = vec![0u32; n + 1];
        for (i, &s) in successor.iter().enumerate() {
            if !periodic.contains(i) {
                offsets[s as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut sources = vec![0u32; offsets[n] as usize];
        for (i, &s) in successor.iter().enumerate() {
            if !periodic.contains(i) {
                let slot = &mut fill[s as usize];
                sources[*slot as usize] = i as u32;
                *slot += 1;
            }
        }
        Self { offsets, sources }
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.sources[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }
}

/// Canonical shape of the tree of non-periodic states feeding `root`.
pub fn tree_shape(root: usize, rev: &ReverseAdjacency) -> TreeShape {
    // iterative post-order; finished subtrees wait on `done`
    let mut stack = vec![(root, false)];
    let mut done: Vec<TreeShape> = Vec::new();
    while let Some((v, expanded)) = stack.pop() {
        let kids = rev.children(v);
        if expanded {
            let start = done.len() - kids.len();
            let children = done.split_off(start);
            done.push(TreeShape::from_children(children));
        } else {
            stack.push((v, true));
            stack.extend(kids.iter().map(|&c| (c as usize, false)));
        }
    }
    debug_assert_eq!(done.len(), 1);
    done.pop().expect("root produces one shape")
}

#[derive(Clone, Debug)]
pub struct Component {
    /// Cycle states in the direction of f, starting at the smallest index.
    pub cycle: Vec<u32>,
    pub size: usize,
    pub shape: ComponentShape,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub periodic: PeriodicSet,
    /// Component id of every state; ids index `components`.
    pub component_of: Vec<u32>,
    /// Ordered by smallest cycle state.
    pub components: Vec<Component>,
    /// Steps from each state to the periodic set.
    pub tail_length: Vec<u32>,
    pub signature: GraphSignature,
}

impl Decomposition {
    pub fn max_tail(&self) -> u32 {
        self.tail_length.iter().copied().max().unwrap_or(0)
    }

    pub fn component_containing(&self, state: usize) -> &Component {
        &self.components[self.component_of[state] as usize]
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Gray,
    Black,
}

/// Split a successor array into components and compute its signature.
pub fn decompose(successor: &[u32]) -> Decomposition {
    let n = successor.len();
    let mut color = vec![Color::White; n];
    let mut flags = vec![false; n];
    let mut cycles: Vec<Vec<u32>> = Vec::new();
    let mut path = Vec::new();

    for start in 0..n {
        if color[start] != Color::White {
            continue;
        }
        path.clear();
        let mut v = start;
        while color[v] == Color::White {
            color[v] = Color::Gray;
            path.push(v);
            v = successor[v] as usize;
        }
        if color[v] == Color::Gray {
            // new cycle through v
            let pos = path.iter().position(|&w| w == v).expect("gray is on path");
            let cyc: Vec<u32> = path[pos..].iter().map(|&w| w as u32).collect();
            for &w in &cyc {
                flags[w as usize] = true;
            }
            cycles.push(cyc);
        }
        for &w in &path {
            color[w] = Color::Black;
        }
    }

    // start each cycle at its smallest state; order cycles by that state
    for cyc in &mut cycles {
        let m = cyc
            .iter()
            .enumerate()
            .min_by_key(|&(_, &s)| s)
            .map(|(i, _)| i)
            .expect("nonempty");
        cyc.rotate_left(m);
    }
    cycles.sort_by_key(|c| c[0]);

    let count = flags.iter().filter(|&&f| f).count();
    let periodic = PeriodicSet { flags, count };
    let rev = ReverseAdjacency::new(successor, &periodic);

    let mut component_of = vec![u32::MAX; n];
    let mut tail_length = vec![0u32; n];
    let mut components = Vec::with_capacity(cycles.len());
    let mut signature = GraphSignature::new();
    let mut queue = Vec::new();

    for (id, cyc) in cycles.into_iter().enumerate() {
        let mut size = 0usize;
        queue.clear();
        queue.extend(cyc.iter().map(|&c| c as usize));
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            component_of[v] = id as u32;
            size += 1;
            for &c in rev.children(v) {
                tail_length[c as usize] = tail_length[v] + 1;
                queue.push(c as usize);
            }
        }
        let trees = cyc.iter().map(|&c| tree_shape(c as usize, &rev)).collect();
        let shape = ComponentShape::new(trees);
        signature.add(shape.clone(), 1);
        components.push(Component {
            cycle: cyc,
            size,
            shape,
        });
    }

    Decomposition {
        periodic,
        component_of,
        components,
        tail_length,
        signature,
    }
}
