//! Leaf label ordering.
//!
//! Labels compare numerically when both are unsigned integers and
//! lexicographically otherwise, so `2 < 10` and leaves `1..n` come out in
//! the order used for ultrametric coordinates `(u_12, u_13, …, u_{n-1,n})`.

use std::cmp::Ordering;

pub fn label_cmp(a: &str, b: &str) -> Ordering {
    match (as_index(a), as_index(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

fn as_index(s: &str) -> Option<u128> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn sort_labels(labels: &mut [String]) {
    labels.sort_by(|a, b| label_cmp(a, b));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_labels_sort_numerically() {
        let mut v: Vec<String> = ["10", "2", "1", "b", "a", "03"].iter().map(|s| s.to_string()).collect();
        sort_labels(&mut v);
        assert_eq!(v, ["1", "2", "03", "10", "a", "b"]);
    }

    #[test]
    fn leading_zeros_break_ties_lexicographically() {
        assert_eq!(label_cmp("3", "03"), Ordering::Greater);
        assert_eq!(label_cmp("03", "03"), Ordering::Equal);
    }
}
