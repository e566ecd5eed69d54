use std::fmt::Write;

use super::FunctionalGraph;
use crate::ffield::Ext;

#[derive(Clone, Debug, Default)]
pub struct DotOptions {
    /// Only emit the component containing this state.
    pub component_of: Option<Ext>,
    /// Label nodes `x+yβ` instead of `(x,y)`.
    pub beta_labels: bool,
}

/// Graphviz digraph, nodes and edges in state-index order.
pub(super) fn to_dot(g: &FunctionalGraph, opts: &DotOptions) -> String {
    let keep: Option<Vec<bool>> = opts.component_of.map(|root| {
        let d = g.decompose();
        let id = d.component_of[g.index(root)];
        d.component_of.iter().map(|&c| c == id).collect()
    });
    let included = |i: usize| keep.as_ref().is_none_or(|k| k[i]);

    let p = g.params();
    let mut out = String::new();
    writeln!(out, "digraph G {{").unwrap();
    writeln!(
        out,
        "  label=\"q={} a={} c={} b={}\";",
        p.q(),
        p.a().signed(),
        p.c(),
        p.b()
    )
    .unwrap();
    for i in (0..g.len()).filter(|&i| included(i)) {
        let s = g.state(i);
        let label = if opts.beta_labels {
            s.beta_label()
        } else {
            s.to_string()
        };
        writeln!(out, "  n{i} [label=\"{label}\"];").unwrap();
    }
    for (i, &t) in g.successor().iter().enumerate() {
        if included(i) {
            writeln!(out, "  n{i} -> n{t};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}
