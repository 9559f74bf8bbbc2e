mod common;

use common::dot::check_dot;

#[test]
fn accepts_and_rejects() {
    assert!(check_dot(
        "digraph g { a -> b [style=dashed]; subgraph \"cluster_x\" { label=\"x\"; c } }"
    )
    .is_ok());
    assert!(check_dot("digraph { a -- b }").is_err());
    assert!(check_dot("digraph g { a -> }").is_err());
    assert!(check_dot("digraph g { a [label=\"x] }").is_err());
    assert!(check_dot("digraph g { a } }").is_err());
}
