//! Graphviz DOT export of protocol plans.
//!
//! Z-states are round-rectangle nodes labelled `Z_k(n)`; each projection is
//! an arrow-shaped node labelled with the qubits it consumes. Edges into a
//! projection carry the `k` qubits selected from each operand.

use std::fmt::Write as _;

use crate::protocol::{Origin, ProtocolPlan, StateRef};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn state_node(out: &mut String, s: &StateRef, is_final: bool) {
    let style = match (s.origin, is_final) {
        (_, true) => "rounded,bold",
        (Origin::Ancilla, _) => "rounded,dashed",
        _ => "rounded",
    };
    let _ = writeln!(
        out,
        "  {} [shape=box, style=\"{style}\", label={}, tooltip={}];",
        quote(&format!("state:{}", s.id)),
        quote(&s.descriptor()),
        quote(&s.id)
    );
}

/// Renders `plan` as a directed graph. Output depends only on the plan.
pub fn plan_to_dot(plan: &ProtocolPlan) -> String {
    let mut out = String::new();
    out.push_str("digraph plan {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    let final_id = if plan.cycles.is_empty() { None } else { plan.final_state().map(|s| s.id) };
    for s in plan.all_states() {
        state_node(&mut out, &s, final_id.as_deref() == Some(s.id.as_str()));
    }
    for (i, c) in plan.cycles.iter().enumerate() {
        let node = quote(&format!("projection:{i}"));
        let k = c.left.k;
        let _ = writeln!(out, "  {node} [shape=rarrow, label=\"project X0({m})\\nconsume {m}\"];", m = 2 * k);
        for op in [&c.left, &c.right] {
            let _ = writeln!(
                out,
                "  {} -> {node} [label={}];",
                quote(&format!("state:{}", op.id)),
                quote(&format!("select {k}"))
            );
        }
        let _ = writeln!(out, "  {node} -> {};", quote(&format!("state:{}", c.produced)));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{gen_exact_plan, gen_incremental_plan};

    fn count(dot: &str, needle: &str) -> usize {
        dot.lines().filter(|l| l.contains(needle)).count()
    }

    #[test]
    fn single_cycle_shape() {
        let plan = gen_incremental_plan(1, 4).unwrap();
        let dot = plan_to_dot(&plan);
        assert_eq!(count(&dot, "shape=box"), 3);
        assert_eq!(count(&dot, "shape=rarrow"), 1);
        assert_eq!(count(&dot, "->"), 3);
        assert!(dot.contains("label=\"Z_1(4)\""));
        assert!(dot.contains("consume 2"));
    }

    #[test]
    fn exact_plan_shape() {
        let dot = plan_to_dot(&gen_exact_plan(1, 3, 3).unwrap());
        assert_eq!(count(&dot, "shape=box"), 5);
        assert_eq!(count(&dot, "shape=rarrow"), 2);
        assert_eq!(count(&dot, "dashed"), 1);
        assert_eq!(dot, plan_to_dot(&gen_exact_plan(1, 3, 3).unwrap()));
    }

    #[test]
    fn empty_plan_has_only_inputs() {
        let dot = plan_to_dot(&gen_incremental_plan(1, 3).unwrap());
        assert_eq!(count(&dot, "shape=box"), 1);
        assert_eq!(count(&dot, "->"), 0);
    }

    #[test]
    fn ids_are_escaped() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }
}
