use std::fmt::Write;

use crate::factorgraph::graph::{Edge, Graph, Var};

/// Graphviz rendering: variables are circles, factors boxes, gates dashed clusters.
pub fn to_dot(g: &Graph) -> String {
    let mut w = DotWriter { out: String::new(), next: 0, vars: Vec::new() };
    w.out.push_str("graph G {\n  node [fontname=\"monospace\"];\n");
    w.graph(g, 1);
    for v in w.vars.clone() {
        let _ = writeln!(w.out, "  {v} [shape=circle];");
    }
    w.out.push_str("}\n");
    w.out
}

struct DotWriter {
    out: String,
    next: usize,
    vars: Vec<Var>,
}

impl DotWriter {
    fn var(&mut self, v: Var) -> String {
        if !self.vars.contains(&v) {
            self.vars.push(v);
        }
        format!("\"{v}\"")
    }

    fn factor(&mut self, depth: usize, label: String, vars: &[Var]) -> String {
        let id = format!("f{}", self.next);
        self.next += 1;
        let pad = "  ".repeat(depth);
        let _ = writeln!(self.out, "{pad}{id} [shape=box, label=\"{}\"];", label.replace('"', "\\\""));
        for v in vars {
            let name = self.var(*v);
            let _ = writeln!(self.out, "{pad}{id} -- {name};");
        }
        id
    }

    fn graph(&mut self, g: &Graph, depth: usize) {
        for e in &g.edges {
            match e {
                Edge::Equal { x, y } => {
                    self.factor(depth, "=".into(), &[*x, *y]);
                }
                Edge::Const { x, value } => {
                    self.factor(depth, format!("= {value}"), &[*x]);
                }
                Edge::Op { x, op, y, z } => {
                    self.factor(depth, op.symbol().into(), &[*x, *y, *z]);
                }
                Edge::Sample { x, dist, args } => {
                    let mut vs = vec![*x];
                    vs.extend(args);
                    self.factor(depth, dist.name().into(), &vs);
                }
                Edge::Gate { cond, then, r#else } => {
                    let gate = self.factor(depth, "gate".into(), &[*cond]);
                    for (branch, label) in [(then, "true"), (r#else, "false")] {
                        let id = self.next;
                        self.next += 1;
                        let pad = "  ".repeat(depth);
                        let _ = writeln!(self.out, "{pad}subgraph cluster_{id} {{\n{pad}  style=dashed;\n{pad}  label=\"{label}\";");
                        let first = self.next;
                        self.graph(branch, depth + 1);
                        let _ = writeln!(self.out, "{pad}}}");
                        if self.next > first {
                            let _ = writeln!(self.out, "{pad}{gate} -- f{first} [style=dashed];");
                        }
                    }
                }
            }
        }
    }
}
