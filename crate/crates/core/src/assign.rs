//! Optimal assignment on dense square weight matrices (Hungarian method
//! with potentials, O(n³)).

/// Column assigned to each row, maximizing the total weight. Among optimal
/// assignments, the scan order prefers smaller column indices.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(weights.iter().all(|r| r.len() == n), "weight matrix must be square");
    let top = weights.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let cost = |i: usize, j: usize| top - weights[i][j];

    // 1-based arrays; column 0 is the virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[owner[j] - 1] = j - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn total(w: &[Vec<f64>], a: &[usize]) -> f64 {
        a.iter().enumerate().map(|(i, &j)| w[i][j]).sum()
    }

    fn brute(w: &[Vec<f64>]) -> f64 {
        fn rec(w: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == w.len() {
                return 0.0;
            }
            let mut best = f64::NEG_INFINITY;
            for j in 0..w.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(w[row][j] + rec(w, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(w, 0, &mut vec![false; w.len()])
    }

    #[test]
    fn small_cases() {
        assert!(max_weight_assignment(&[]).is_empty());
        assert_eq!(max_weight_assignment(&[vec![3.0]]), vec![0]);
        let w = vec![vec![0.1, 0.9], vec![0.8, 0.2]];
        assert_eq!(max_weight_assignment(&w), vec![1, 0]);
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(max_weight_assignment(&id), vec![0, 1, 2]);
    }

    #[test]
    fn ties_prefer_identity_order() {
        let w = vec![vec![1.0; 3]; 3];
        assert_eq!(max_weight_assignment(&w), vec![0, 1, 2]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 1usize..7, seed in 0u64..1000) {
            let w: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| (((i * 31 + j * 17) as u64 * 2654435761 + seed * 97) % 1009) as f64 / 1009.0).collect())
                .collect();
            let a = max_weight_assignment(&w);
            let mut seen = a.clone();
            seen.sort();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
            prop_assert!((total(&w, &a) - brute(&w)).abs() < 1e-12);
        }
    }
}
