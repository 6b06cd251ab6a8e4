use std::fmt::Write;

use super::Dfa;

impl Dfa {
    /// Graphviz rendering. Parallel edges are merged into one edge whose label
    /// lists the symbols; output order is deterministic.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n    rankdir=LR;\n    __start [shape=point];\n");
        for q in 0..self.n_states() {
            let shape = if self.is_accepting(q) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "    {q} [shape={shape}];");
        }
        let _ = writeln!(out, "    __start -> {};", self.initial());
        let k = self.alphabet().len();
        for q in 0..self.n_states() {
            // targets in order of their first symbol
            let mut targets: Vec<(usize, Vec<&str>)> = Vec::new();
            for a in 0..k {
                let t = self.next(q, a);
                let label = self.alphabet().label(a).unwrap_or("?");
                match targets.iter_mut().find(|(to, _)| *to == t) {
                    Some((_, labels)) => labels.push(label),
                    None => targets.push((t, vec![label])),
                }
            }
            for (t, labels) in targets {
                let label = labels.join(",").replace('\\', "\\\\").replace('"', "\\\"");
                let _ = writeln!(out, "    {q} -> {t} [label=\"{label}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}
