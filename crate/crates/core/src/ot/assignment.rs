//! Dense linear assignment by shortest augmenting paths (Jonker–Volgenant).
//!
//! The solver runs the usual cheap initialization (column reduction,
//! reduction transfer, two rounds of augmenting row reduction) and finishes
//! the remaining free rows with Dijkstra-style augmentation.  O(M³) worst
//! case, much faster in practice on geometric cost matrices.

use crate::cloud::{half_sq_dist, PointCloud};
use crate::error::{CoreError, Result};

const NONE: usize = usize::MAX;

/// Result of a dense assignment solve: minimal total cost and the
/// row-to-column permutation.
#[derive(Clone, Debug)]
pub struct Assignment {
    pub cost: f64,
    pub row_to_col: Vec<usize>,
}

/// Minimize Σ_i cost[i][π(i)] over permutations π of {0..n-1}.
/// `cost` is row-major n×n.
pub fn solve_dense(n: usize, cost: &[f64]) -> Assignment {
    assert_eq!(cost.len(), n * n, "cost matrix must be n*n");
    if n == 0 {
        return Assignment {
            cost: 0.0,
            row_to_col: vec![],
        };
    }

    let mut v = vec![0.0_f64; n];
    let mut row_col = vec![NONE; n];
    let mut col_row = vec![NONE; n];
    let mut matches = vec![0_usize; n];

    // Column reduction, columns processed in reverse order.
    for j in (0..n).rev() {
        let mut imin = 0;
        let mut min = cost[j];
        for i in 1..n {
            let c = cost[i * n + j];
            if c < min {
                min = c;
                imin = i;
            }
        }
        v[j] = min;
        matches[imin] += 1;
        if matches[imin] == 1 {
            row_col[imin] = j;
            col_row[j] = imin;
        }
    }

    // Reduction transfer from single-assigned rows.
    let mut free_rows: Vec<usize> = Vec::new();
    for i in 0..n {
        match matches[i] {
            0 => free_rows.push(i),
            1 if n > 1 => {
                let j1 = row_col[i];
                let mut min = f64::INFINITY;
                for j in 0..n {
                    if j != j1 {
                        let r = cost[i * n + j] - v[j];
                        if r < min {
                            min = r;
                        }
                    }
                }
                v[j1] -= min;
            }
            _ => {}
        }
    }

    // Augmenting row reduction, two rounds.  The iteration cap guards against
    // float ties that would otherwise ping-pong; leftovers go to the
    // augmentation phase, which always terminates.
    for _round in 0..2 {
        let mut k = 0;
        let prev_len = free_rows.len();
        let mut num_free = 0;
        let mut guard = 0usize;
        while k < prev_len {
            guard += 1;
            if guard > 10 * n + 100 {
                while k < prev_len {
                    free_rows[num_free] = free_rows[k];
                    num_free += 1;
                    k += 1;
                }
                break;
            }
            let i = free_rows[k];
            k += 1;
            let mut u1 = f64::INFINITY;
            let mut u2 = f64::INFINITY;
            let mut j1 = 0;
            let mut j2 = NONE;
            for j in 0..n {
                let h = cost[i * n + j] - v[j];
                if h < u2 {
                    if h >= u1 {
                        u2 = h;
                        j2 = j;
                    } else {
                        u2 = u1;
                        j2 = j1;
                        u1 = h;
                        j1 = j;
                    }
                }
            }
            let mut i0 = col_row[j1];
            if u1 < u2 {
                v[j1] -= u2 - u1;
            } else if i0 != NONE && j2 != NONE {
                j1 = j2;
                i0 = col_row[j1];
            }
            row_col[i] = j1;
            col_row[j1] = i;
            if i0 != NONE {
                if u1 < u2 {
                    k -= 1;
                    free_rows[k] = i0;
                } else {
                    free_rows[num_free] = i0;
                    num_free += 1;
                }
            }
        }
        free_rows.truncate(num_free);
    }

    // Shortest augmenting path for each remaining free row, with the column
    // list partitioned into READY | SCAN | TODO so batches of equal minima
    // are processed without rescanning.
    let mut d = vec![0.0_f64; n];
    let mut pred = vec![0_usize; n];
    let mut cols: Vec<usize> = (0..n).collect();
    for idx in 0..free_rows.len() {
        let f = free_rows[idx];
        for j in 0..n {
            d[j] = cost[f * n + j] - v[j];
            pred[j] = f;
            cols[j] = j;
        }
        let mut low = 0usize;
        let mut up = 0usize;
        let mut last = 0usize; // READY region is cols[..last]
        let mut min = 0.0_f64;
        let endofpath;
        'aug: loop {
            if up == low {
                // rebuild the SCAN frontier: all TODO columns at minimal d
                last = low;
                min = d[cols[up]];
                up += 1;
                for k in up..n {
                    let j = cols[k];
                    let h = d[j];
                    if h <= min {
                        if h < min {
                            up = low;
                            min = h;
                        }
                        cols[k] = cols[up];
                        cols[up] = j;
                        up += 1;
                    }
                }
                for k in low..up {
                    let j = cols[k];
                    if col_row[j] == NONE {
                        endofpath = j;
                        break 'aug;
                    }
                }
            }
            // scan one frontier column
            let j1 = cols[low];
            low += 1;
            let i = col_row[j1];
            let u1 = cost[i * n + j1] - v[j1] - min;
            let row = &cost[i * n..(i + 1) * n];
            for k in up..n {
                let j = cols[k];
                let h = row[j] - v[j] - u1;
                if h < d[j] {
                    d[j] = h;
                    pred[j] = i;
                    if h == min {
                        if col_row[j] == NONE {
                            endofpath = j;
                            break 'aug;
                        }
                        cols[k] = cols[up];
                        cols[up] = j;
                        up += 1;
                    }
                }
            }
        }
        // dual updates over the READY region
        for &j in &cols[..last] {
            v[j] += d[j] - min;
        }
        // augment along the predecessor chain
        let mut j = endofpath;
        loop {
            let i = pred[j];
            col_row[j] = i;
            std::mem::swap(&mut row_col[i], &mut j);
            if i == f {
                break;
            }
        }
    }

    let total = (0..n).map(|i| cost[i * n + row_col[i]]).sum();
    Assignment {
        cost: total,
        row_to_col: row_col,
    }
}

/// Exact transport cost C₂(μ, ν) = min_π (1/M) Σ ½|x_i − y_{π(i)}|² between
/// equal-size uniform clouds, with an optimal permutation.
pub fn exact_w2_assignment(mu: &PointCloud, nu: &PointCloud) -> Result<(f64, Vec<usize>)> {
    if mu.len() != nu.len() {
        return Err(CoreError::Size {
            left: mu.len(),
            right: nu.len(),
            context: "assignment clouds",
        });
    }
    if mu.dim() != nu.dim() {
        return Err(CoreError::Dim {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    let m = mu.len();
    let mut cost = vec![0.0_f64; m * m];
    for i in 0..m {
        let xi = mu.point(i);
        for j in 0..m {
            cost[i * m + j] = half_sq_dist(xi, nu.point(j));
        }
    }
    let sol = solve_dense(m, &cost);
    let total: f64 = (0..m).map(|i| cost[i * m + sol.row_to_col[i]]).sum();
    Ok((total / m as f64, sol.row_to_col))
}
