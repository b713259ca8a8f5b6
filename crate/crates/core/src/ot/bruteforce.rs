//! Exact Kantorovich minimum on small instances.
//!
//! The oracle for every other transport routine: a transport simplex run in
//! exact rational arithmetic (costs and weights lifted from f64 without
//! rounding) with Bland's rule, so termination and optimality are guaranteed.
//! Reserved for instances with at most [`BRUTEFORCE_ATOM_LIMIT`] atom pairs.

use crate::cloud::{half_sq_dist, WeightedCloud};
use crate::error::{CoreError, Result};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub const BRUTEFORCE_ATOM_LIMIT: usize = 64;

/// Dense transport plan with row/column marginals matching the inputs.
#[derive(Clone, Debug)]
pub struct DensePlan {
    pub rows: usize,
    pub cols: usize,
    /// row-major masses
    pub mass: Vec<f64>,
}

impl DensePlan {
    pub fn row_marginals(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.mass[i * self.cols..(i + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_marginals(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.mass[i * self.cols + j]).sum())
            .collect()
    }
}

fn rat(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float")
}

/// Exact optimal transport cost between two small weighted clouds under
/// c₂(x,y) = ½|x−y|², with an optimal plan.
pub fn bruteforce_ot(mu: &WeightedCloud, nu: &WeightedCloud) -> Result<(f64, DensePlan)> {
    if mu.dim() != nu.dim() {
        return Err(CoreError::Dim {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    let m = mu.len();
    let n = nu.len();
    if m * n > BRUTEFORCE_ATOM_LIMIT {
        return Err(CoreError::Scale {
            atoms: m * n,
            limit: BRUTEFORCE_ATOM_LIMIT,
        });
    }

    // Exactly normalized supplies/demands so both sides sum to 1 as rationals.
    let sum_a: BigRational = mu.weights().iter().map(|w| rat(*w)).sum();
    let sum_b: BigRational = nu.weights().iter().map(|w| rat(*w)).sum();
    let a: Vec<BigRational> = mu.weights().iter().map(|w| rat(*w) / &sum_a).collect();
    let b: Vec<BigRational> = nu.weights().iter().map(|w| rat(*w) / &sum_b).collect();

    let cost: Vec<BigRational> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| rat(half_sq_dist(mu.point(i), nu.point(j))))
        .collect();

    let (total, flow) = transport_simplex(m, n, &a, &b, &cost);

    let plan = DensePlan {
        rows: m,
        cols: n,
        mass: flow.iter().map(|f| f.to_f64().unwrap_or(0.0)).collect(),
    };
    Ok((total.to_f64().unwrap_or(f64::NAN), plan))
}

/// Transport simplex with north-west-corner start and Bland's rule, exact
/// arithmetic throughout.
fn transport_simplex(
    m: usize,
    n: usize,
    a: &[BigRational],
    b: &[BigRational],
    cost: &[BigRational],
) -> (BigRational, Vec<BigRational>) {
    let zero = BigRational::zero();
    let mut flow: Vec<BigRational> = vec![zero.clone(); m * n];
    let mut in_basis = vec![false; m * n];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);

    // North-west corner initial basic feasible solution (keeps degenerate
    // zero cells so the basis always has m+n-1 cells).
    {
        let mut a_rem = a.to_vec();
        let mut b_rem = b.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let t = if a_rem[i] <= b_rem[j] {
                a_rem[i].clone()
            } else {
                b_rem[j].clone()
            };
            flow[i * n + j] = t.clone();
            in_basis[i * n + j] = true;
            basis.push((i, j));
            a_rem[i] -= t.clone();
            b_rem[j] -= t;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if a_rem[i].is_zero() && i < m - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(basis.len(), m + n - 1);
    }

    // Tree node ids: rows 0..m, columns m..m+n.
    loop {
        // Duals from the basis tree, u[0] = 0.
        let mut u: Vec<Option<BigRational>> = vec![None; m];
        let mut v: Vec<Option<BigRational>> = vec![None; n];
        u[0] = Some(BigRational::zero());
        let mut changed = true;
        while changed {
            changed = false;
            for &(i, j) in &basis {
                match (&u[i], &v[j]) {
                    (Some(ui), None) => {
                        v[j] = Some(&cost[i * n + j] - ui);
                        changed = true;
                    }
                    (None, Some(vj)) => {
                        u[i] = Some(&cost[i * n + j] - vj);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        let u: Vec<BigRational> = u.into_iter().map(|x| x.expect("connected basis")).collect();
        let v: Vec<BigRational> = v.into_iter().map(|x| x.expect("connected basis")).collect();

        // Entering cell: first (Bland) non-basic cell with negative reduced cost.
        let mut entering = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if !in_basis[i * n + j] {
                    let red = &cost[i * n + j] - &u[i] - &v[j];
                    if red.is_negative() {
                        entering = Some((i, j));
                        break 'scan;
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else {
            break; // optimal
        };

        // Unique tree path from row node ei to column node ej.
        let path = tree_path(m, n, &basis, ei, m + ej);
        // Cycle cells: entering, then the path edges walked from the ej end
        // back towards ei; signs alternate with entering = plus.
        let mut cycle: Vec<(usize, usize)> = Vec::with_capacity(path.len() + 1);
        cycle.push((ei, ej));
        for e in path.iter().rev() {
            cycle.push(*e);
        }
        // minus cells sit at odd positions
        let mut theta: Option<BigRational> = None;
        for (pos, &(i, j)) in cycle.iter().enumerate() {
            if pos % 2 == 1 {
                let f = &flow[i * n + j];
                if theta.as_ref().map(|t| f < t).unwrap_or(true) {
                    theta = Some(f.clone());
                }
            }
        }
        let theta = theta.expect("cycle has minus cells");
        // Leaving cell: first minus cell attaining theta (Bland tie-break).
        let mut leaving = None;
        for (pos, &(i, j)) in cycle.iter().enumerate() {
            if pos % 2 == 1 && flow[i * n + j] == theta {
                leaving = Some((i, j));
                break;
            }
        }
        let leaving = leaving.expect("some minus cell attains theta");

        for (pos, &(i, j)) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                flow[i * n + j] += theta.clone();
            } else {
                flow[i * n + j] -= theta.clone();
            }
        }
        in_basis[ei * n + ej] = true;
        in_basis[leaving.0 * n + leaving.1] = false;
        let k = basis.iter().position(|&c| c == leaving).expect("in basis");
        basis[k] = (ei, ej);
    }

    let total: BigRational = (0..m * n).map(|k| &flow[k] * &cost[k]).sum();
    (total, flow)
}

/// Edges of the unique path between two nodes in the basis tree.
fn tree_path(
    m: usize,
    n: usize,
    basis: &[(usize, usize)],
    from: usize,
    to: usize,
) -> Vec<(usize, usize)> {
    let nodes = m + n;
    let mut adj: Vec<Vec<(usize, (usize, usize))>> = vec![Vec::new(); nodes];
    for &(i, j) in basis {
        adj[i].push((m + j, (i, j)));
        adj[m + j].push((i, (i, j)));
    }
    let mut parent: Vec<Option<(usize, (usize, usize))>> = vec![None; nodes];
    let mut visited = vec![false; nodes];
    let mut queue = std::collections::VecDeque::new();
    visited[from] = true;
    queue.push_back(from);
    while let Some(node) = queue.pop_front() {
        if node == to {
            break;
        }
        for &(next, edge) in &adj[node] {
            if !visited[next] {
                visited[next] = true;
                parent[next] = Some((node, edge));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        let (prev, edge) = parent[node].expect("basis tree is connected");
        path.push(edge);
        node = prev;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointCloud;
    use crate::ot::assignment::exact_w2_assignment;
    use crate::rng::{StreamDomain, StreamRng};
    use rand::Rng;

    #[test]
    fn identical_measures_cost_zero() {
        let mu = WeightedCloud::new(1, vec![0.0, 1.0], vec![0.25, 0.75]).unwrap();
        let (cost, plan) = bruteforce_ot(&mu, &mu).unwrap();
        assert_eq!(cost, 0.0);
        let rm = plan.row_marginals();
        assert!((rm[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dirac_to_symmetric_split() {
        // mu = δ0, nu = ½δ−1 + ½δ+1: the single feasible plan moves half the
        // mass each way, cost ½(½·1 + ½·1) = 0.5.
        let mu = WeightedCloud::dirac(&[0.0]).unwrap();
        let nu = WeightedCloud::new(1, vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let (cost, plan) = bruteforce_ot(&mu, &nu).unwrap();
        assert!((cost - 0.5).abs() < 1e-15);
        assert!((plan.mass[0] - 0.5).abs() < 1e-15);
        assert!((plan.mass[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_assignment_on_uniform_clouds() {
        let mut rng = StreamRng::new(5, StreamDomain::Generic, 1, 0);
        for trial in 0..60 {
            let m = 2 + trial % 6; // up to 7 points
            let d = 1 + trial % 3;
            let points: Vec<f64> = (0..m * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let qoints: Vec<f64> = (0..m * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let mu = PointCloud::new(d, points).unwrap();
            let nu = PointCloud::new(d, qoints).unwrap();
            let (lp_cost, plan) = bruteforce_ot(
                &WeightedCloud::uniform(&mu),
                &WeightedCloud::uniform(&nu),
            )
            .unwrap();
            let (as_cost, _) = exact_w2_assignment(&mu, &nu).unwrap();
            assert!(
                (lp_cost - as_cost).abs() <= 1e-12,
                "trial {trial}: lp {lp_cost} vs assignment {as_cost}"
            );
            // plan marginals are exact
            for w in plan.row_marginals() {
                assert!((w - 1.0 / m as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scale_limit_enforced() {
        let big = PointCloud::new(1, (0..9).map(|i| i as f64).collect()).unwrap();
        let mu = WeightedCloud::uniform(&big);
        let err = bruteforce_ot(&mu, &mu).unwrap_err();
        assert!(matches!(err, CoreError::Scale { .. }));
    }
}
