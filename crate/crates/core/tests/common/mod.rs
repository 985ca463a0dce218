//! Seeded instance generators and brute-force oracles shared by integration tests.
#![allow(dead_code)]

use linsan::lp::{self, LinearProgram};
use linsan::{Alpha, Alphabet, DistortionMatrix, JointDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A joint over `|S| in 1..=max_s`, `|X| in 1..=max_x` with every marginal
/// positive and roughly a quarter of the cells zero.
pub fn random_joint(rng: &mut ChaCha8Rng, max_s: usize, max_x: usize) -> JointDistribution {
    loop {
        let ns = rng.random_range(1..=max_s);
        let nx = rng.random_range(1..=max_x);
        let w: Vec<Vec<f64>> = (0..ns)
            .map(|_| {
                (0..nx)
                    .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.01..1.0) })
                    .collect()
            })
            .collect();
        let total: f64 = w.iter().flatten().sum();
        let rows_ok = w.iter().all(|r| r.iter().any(|&v| v > 0.0));
        let cols_ok = (0..nx).all(|x| w.iter().any(|r| r[x] > 0.0));
        if !rows_ok || !cols_ok {
            continue;
        }
        let p = w.iter().map(|r| r.iter().map(|v| v / total).collect()).collect();
        return JointDistribution::from_joint(
            Alphabet::indexed(ns).unwrap(),
            Alphabet::indexed(nx).unwrap(),
            p,
        )
        .unwrap();
    }
}

/// The α values used by the randomized suites.
pub fn alpha_grid() -> Vec<Alpha> {
    [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999, 1.0]
        .iter()
        .map(|&a| Alpha::new(a).unwrap())
        .collect()
}

/// Random symmetric weights closed under shortest paths, so the result is a metric.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> DistortionMatrix {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in i + 1..n {
            let w = rng.random_range(0.1..5.0);
            d[i][k] = w;
            d[k][i] = w;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for k in 0..n {
                if d[i][m] + d[m][k] < d[i][k] {
                    d[i][k] = d[i][m] + d[m][k];
                }
            }
        }
    }
    DistortionMatrix::new(d).unwrap()
}

/// Arbitrary nonnegative costs with a zero diagonal; usually not a metric.
pub fn random_distortion(rng: &mut ChaCha8Rng, n: usize) -> DistortionMatrix {
    DistortionMatrix::new(
        (0..n)
            .map(|i| (0..n).map(|k| if i == k { 0.0 } else { rng.random_range(0.0..5.0) }).collect())
            .collect(),
    )
    .unwrap()
}

/// Index of `P(y | s, x_in)` in the full-tensor LP.
pub fn var(nx: usize, s: usize, x_in: usize, y: usize) -> usize {
    (s * nx + x_in) * nx + y
}

/// The whole mechanism design problem over every tensor entry: each slice row
/// is stochastic and every `s` reproduces the reduced channel.
pub fn full_tensor_lp(j: &JointDistribution, alpha: Alpha, cost: Vec<f64>) -> LinearProgram {
    let (ns, nx) = (j.n_s(), j.n_x());
    let nv = ns * nx * nx;
    let a = alpha.value();
    let p_x = j.marginal_x();
    let mut lp = LinearProgram::minimize(cost);
    for s in 0..ns {
        for x_in in 0..nx {
            let mut row = vec![0.0; nv];
            (0..nx).for_each(|y| row[var(nx, s, x_in, y)] = 1.0);
            lp.add_eq(row, 1.0);
        }
        for y in 0..nx {
            let mut row = vec![0.0; nv];
            (0..nx).for_each(|x_in| row[var(nx, s, x_in, y)] = j.x_given_s(x_in, s));
            lp.add_eq(row, (1.0 - a) * j.x_given_s(y, s) + a * p_x[y]);
        }
    }
    lp
}

/// Optimal half total variation over all realizing mechanisms.
pub fn brute_force_dtv(j: &JointDistribution, alpha: Alpha) -> f64 {
    let nx = j.n_x();
    let mut cost = vec![0.0; j.n_s() * nx * nx];
    for s in 0..j.n_s() {
        for x in 0..nx {
            cost[var(nx, s, x, x)] = -j.p(s, x);
        }
    }
    let sol = lp::solve(&full_tensor_lp(j, alpha, cost.clone())).unwrap();
    assert!(sol.is_optimal());
    1.0 + dot(&cost, &sol.values)
}

/// Optimal expected distortion over all realizing mechanisms.
pub fn brute_force_distortion(j: &JointDistribution, alpha: Alpha, d: &DistortionMatrix) -> f64 {
    let nx = j.n_x();
    let mut cost = vec![0.0; j.n_s() * nx * nx];
    for s in 0..j.n_s() {
        for x_in in 0..nx {
            for y in 0..nx {
                cost[var(nx, s, x_in, y)] = j.p(s, x_in) * d.get(x_in, y);
            }
        }
    }
    let sol = lp::solve(&full_tensor_lp(j, alpha, cost.clone())).unwrap();
    assert!(sol.is_optimal());
    dot(&cost, &sol.values)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Numerical rank by Gaussian elimination with full pivoting.
pub fn numerical_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for _ in 0..nrows.min(ncols) {
        let mut best = (0.0, 0, 0);
        for (r, row) in m.iter().enumerate().skip(rank) {
            for (c, &v) in row.iter().enumerate() {
                if v.abs() > best.0 {
                    best = (v.abs(), r, c);
                }
            }
        }
        if best.0 <= tol {
            break;
        }
        m.swap(rank, best.1);
        for row in m.iter_mut() {
            row.swap(rank, best.2);
        }
        let pivot = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[rank] / pivot[rank];
            for (v, p) in row.iter_mut().zip(&pivot) {
                *v -= f * p;
            }
        }
        rank += 1;
    }
    rank
}
