//! Test-only oracles, written without reference to the library's code paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXAMPLE_PAIRWISE: [[f64; 5]; 5] = [
    [1.00, 0.50, 0.30, 0.20, 0.70],
    [0.70, 1.00, 0.80, 0.90, 0.60],
    [0.50, 0.30, 1.00, 0.70, 0.70],
    [0.40, 0.10, 0.60, 1.00, 0.80],
    [0.30, 0.40, 0.50, 0.60, 1.00],
];

/// Comparison matrix as printed (two decimals).
pub const EXAMPLE_COMPARISON: [[f64; 5]; 5] = [
    [1.00, 1.00, 1.00, 1.00, 0.43],
    [0.71, 1.00, 0.37, 0.11, 0.67],
    [0.60, 1.00, 1.00, 0.86, 0.71],
    [0.50, 1.00, 1.00, 1.00, 0.75],
    [1.00, 1.00, 1.00, 1.00, 1.00],
];

pub const EXAMPLE_MINIMA: [f64; 5] = [0.43, 0.11, 0.60, 0.50, 1.00];
pub const EXAMPLE_ORDER: [&str; 5] = ["r5", "r3", "r4", "r1", "r2"];
pub const EXAMPLE_SORTED_SCORES: [f64; 5] = [1.00, 0.60, 0.50, 0.43, 0.11];

pub fn example_rows() -> Vec<Vec<f64>> {
    EXAMPLE_PAIRWISE.iter().map(|r| r.to_vec()).collect()
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Entrywise transliteration: C[i][j] = P[j][i] / max(P[j][i], P[i][j]).
pub fn oracle_comparison(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let large = if p[i][j] > p[j][i] { p[i][j] } else { p[j][i] };
            c[i][j] = p[j][i] / large;
        }
    }
    c
}

pub fn oracle_minima(c: &[Vec<f64>]) -> Vec<f64> {
    c.iter()
        .map(|row| {
            let mut small = row[0];
            for &v in &row[1..] {
                if v < small {
                    small = v;
                }
            }
            small
        })
        .collect()
}

/// Bubble sort, descending, that swaps (index, score) pairs together. Only
/// strictly smaller neighbours move, so equal scores keep index order.
pub fn oracle_order(minima: &[f64]) -> Vec<(usize, f64)> {
    let mut pairs: Vec<(usize, f64)> = minima.iter().copied().enumerate().collect();
    let n = pairs.len();
    for pass in 1..n {
        let mut swaps = 0;
        for j in 0..n - pass {
            if pairs[j].1 < pairs[j + 1].1 {
                pairs.swap(j, j + 1);
                swaps += 1;
            }
        }
        if swaps == 0 {
            break;
        }
    }
    pairs
}

pub fn oracle_rank(p: &[Vec<f64>]) -> Vec<(usize, f64)> {
    oracle_order(&oracle_minima(&oracle_comparison(p)))
}

/// Random pairwise table: off-diagonal entries on the grid 0.1..=1.0.
pub fn grid_matrix(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        rng.gen_range(1..=10) as f64 / 10.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every simple path from `src` to `dst` with at most `hop_limit` links,
/// found by trying every ordered selection of intermediate nodes.
pub fn brute_force_paths(
    nodes: &[&str],
    edges: &[(&str, &str)],
    src: &str,
    dst: &str,
    hop_limit: usize,
) -> Vec<Vec<String>> {
    let linked = |a: &str, b: &str| {
        edges
            .iter()
            .any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    };
    let middle: Vec<&str> = nodes
        .iter()
        .copied()
        .filter(|&n| n != src && n != dst)
        .collect();
    let mut out = Vec::new();
    // all sequences of distinct intermediates of every length
    fn sequences<'a>(
        pool: &[&'a str],
        len: usize,
        acc: &mut Vec<&'a str>,
        out: &mut Vec<Vec<&'a str>>,
    ) {
        if acc.len() == len {
            out.push(acc.clone());
            return;
        }
        for &n in pool {
            if !acc.contains(&n) {
                acc.push(n);
                sequences(pool, len, acc, out);
                acc.pop();
            }
        }
    }
    for len in 0..=middle.len() {
        let mut seqs = Vec::new();
        sequences(&middle, len, &mut Vec::new(), &mut seqs);
        for seq in seqs {
            let mut path = vec![src];
            path.extend(seq);
            path.push(dst);
            if path.len() - 1 <= hop_limit && path.windows(2).all(|w| linked(w[0], w[1])) {
                out.push(path.iter().map(|s| s.to_string()).collect());
            }
        }
    }
    out.sort();
    out
}
