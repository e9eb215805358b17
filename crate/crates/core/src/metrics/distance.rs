/// Number of positions at which two equal-length slot sequences differ.
pub fn hamming<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    assert_eq!(a.len(), b.len(), "hamming distance needs equal-length tuples");
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Minimal number of insertions, deletions and substitutions turning `s`
/// into `t`. Two-row dynamic programme.
pub fn levenshtein<T: PartialEq>(s: &[T], t: &[T]) -> usize {
    if s.is_empty() {
        return t.len();
    }
    if t.is_empty() {
        return s.len();
    }
    let mut prev: Vec<usize> = (0..=t.len()).collect();
    let mut cur = vec![0; t.len() + 1];
    for (i, a) in s.iter().enumerate() {
        cur[0] = i + 1;
        for (j, b) in t.iter().enumerate() {
            let sub = prev[j] + usize::from(a != b);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[t.len()]
}
