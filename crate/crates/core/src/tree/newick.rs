//! Rooted binary Newick export.
//!
//! Leaves are ordered left to right as they appear along the position axis
//! (negative atoms, spine, positive atoms). Between consecutive leaves sits
//! exactly one atom, in position order, and two leaves merge at the largest
//! depth among the atoms separating them. The tree is therefore the Cartesian
//! tree of the atom depths, rooted on the spine at the largest depth.

use crate::error::{Error, Result};
use crate::tree::AncestralProcess;

pub const SPINE_LABEL: &str = "S";

/// Labels in leaf-index order: spine first, then atoms by position.
pub fn default_labels(ap: &AncestralProcess) -> Vec<String> {
    std::iter::once(SPINE_LABEL.to_string())
        .chain((1..=ap.len()).map(|i| format!("L{i}")))
        .collect()
}

#[derive(Clone, Copy, Debug)]
enum Child {
    Leaf(usize),
    Node(usize),
}

pub fn to_newick(ap: &AncestralProcess, labels: Option<&[String]>) -> Result<String> {
    if ap.is_empty() {
        return Err(Error::EmptyProcess);
    }
    let owned;
    let labels = match labels {
        Some(l) => l,
        None => {
            owned = default_labels(ap);
            &owned
        }
    };
    let n = ap.len();
    if labels.len() != n + 1 {
        return Err(Error::Precondition(format!(
            "expected {} leaf labels (spine + {n} atoms), got {}",
            n + 1,
            labels.len()
        )));
    }
    if let Some(bad) = labels
        .iter()
        .find(|l| l.is_empty() || l.chars().any(|c| "(),:;[]' \t\n".contains(c)))
    {
        return Err(Error::Precondition(format!("invalid Newick label {bad:?}")));
    }

    // Leaf order along the axis, as indices into `labels`.
    let split = ap.split();
    let leaves: Vec<usize> = (1..=split)
        .chain(std::iter::once(0))
        .chain(split + 1..=n)
        .collect();

    // Cartesian tree over separator depths (max at the root).
    let depth: Vec<f64> = ap.atoms().iter().map(|a| a.zeta).collect();
    let mut left: Vec<Option<usize>> = vec![None; n];
    let mut right: Vec<Option<usize>> = vec![None; n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    for k in 0..n {
        let mut last = None;
        while let Some(&top) = stack.last() {
            if depth[top] < depth[k] {
                last = stack.pop();
            } else {
                break;
            }
        }
        left[k] = last;
        if let Some(&top) = stack.last() {
            right[top] = Some(k);
        }
        stack.push(k);
    }
    let root = stack[0];
    let left_child = |k: usize| left[k].map_or(Child::Leaf(k), Child::Node);
    let right_child = |k: usize| right[k].map_or(Child::Leaf(k + 1), Child::Node);

    let height = |c: Child| match c {
        Child::Leaf(_) => 0.0,
        Child::Node(k) => depth[k],
    };

    enum Step {
        Open(Child, Option<f64>),
        Comma,
        Close(Option<f64>),
    }
    let mut out = String::new();
    let mut todo = vec![Step::Open(Child::Node(root), None)];
    while let Some(step) = todo.pop() {
        match step {
            Step::Open(Child::Leaf(i), len) => {
                out.push_str(&labels[leaves[i]]);
                push_length(&mut out, len);
            }
            Step::Open(Child::Node(k), len) => {
                out.push('(');
                let (l, r) = (left_child(k), right_child(k));
                todo.push(Step::Close(len));
                todo.push(Step::Open(r, Some(depth[k] - height(r))));
                todo.push(Step::Comma);
                todo.push(Step::Open(l, Some(depth[k] - height(l))));
            }
            Step::Comma => out.push(','),
            Step::Close(len) => {
                out.push(')');
                push_length(&mut out, len);
            }
        }
    }
    out.push(';');
    Ok(out)
}

fn push_length(out: &mut String, len: Option<f64>) {
    if let Some(len) = len {
        out.push(':');
        out.push_str(&format!("{len}"));
    }
}
