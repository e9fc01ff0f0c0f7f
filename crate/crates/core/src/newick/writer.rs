use super::tree::RootedTree;

pub const DEFAULT_PRECISION: usize = 10;

/// Formats `x` with at most `precision` significant digits and no trailing
/// zeros (`1.0` becomes `1`).
pub fn format_number(x: f64, precision: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let digits = precision.clamp(1, 17);
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().unwrap_or(x);
    // `Display` for f64 prints the shortest string that round-trips.
    let s = rounded.to_string();
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Serializes a tree with children ordered by the smallest leaf label in
/// their clade, so equal trees always produce byte-identical output.
pub fn write_newick(tree: &RootedTree, precision: usize) -> String {
    let mut out = String::new();
    let root = tree.node(tree.root());
    if root.is_leaf() {
        out.push_str(root.label.as_deref().unwrap_or_default());
        push_length(&mut out, root.length, precision);
        out.push(';');
        return out;
    }
    let min = tree.min_labels();
    // (node, next child position, ordered children)
    let mut stack: Vec<(usize, usize, Vec<usize>)> = vec![(tree.root(), 0, tree.sorted_children(tree.root(), &min))];
    out.push('(');
    while let Some((id, next, kids)) = stack.last_mut() {
        if *next == kids.len() {
            let id = *id;
            stack.pop();
            out.push(')');
            push_length(&mut out, tree.node(id).length, precision);
            continue;
        }
        if *next > 0 {
            out.push(',');
        }
        let child = kids[*next];
        *next += 1;
        let node = tree.node(child);
        if node.is_leaf() {
            out.push_str(node.label.as_deref().unwrap_or_default());
            push_length(&mut out, node.length, precision);
        } else {
            out.push('(');
            let grand = tree.sorted_children(child, &min);
            stack.push((child, 0, grand));
        }
    }
    out.push(';');
    out
}

fn push_length(out: &mut String, length: Option<f64>, precision: usize) {
    if let Some(l) = length {
        out.push(':');
        out.push_str(&format_number(l, precision));
    }
}
