//! Oracles shared by the integration tests. Nothing here calls the crate's
//! own solvers: linear systems go through a local Gaussian elimination.

#![allow(dead_code)]

use fcir::NetworkInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Powers that put every user in `users` exactly at its target with the
/// others silent, plus `extra[m]` interference at each station. `None` when
/// no positive solution exists.
pub fn exact_powers(net: &NetworkInstance, users: &[usize], extra: &[f64]) -> Option<Vec<f64>> {
    let n = users.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for (r, &i) in users.iter().enumerate() {
        let s = net.serving(i);
        let g = net.target_sinr()[i];
        for (c, &j) in users.iter().enumerate() {
            a[r][c] = if i == j { net.gain(s, i) } else { -g * net.gain(s, j) };
        }
        b[r] = g * (net.noise()[s] + extra[s]);
    }
    let x = gauss_solve(a, b)?;
    // a positive solution of (I - F) p = u with u > 0 certifies rho(F) < 1
    x.iter().all(|v| *v > 0.0 && v.is_finite()).then_some(x)
}

/// Whether the PUs plus `sus` can all reach their targets within their caps.
pub fn subset_feasible(net: &NetworkInstance, sus: &[usize]) -> bool {
    let users: Vec<usize> = net.pu_indices().chain(sus.iter().copied()).collect();
    let zero = vec![0.0; net.num_stations()];
    match exact_powers(net, &users, &zero) {
        Some(p) => users.iter().zip(&p).all(|(&i, x)| *x <= net.p_max()[i] * (1.0 + 1e-9)),
        None => false,
    }
}

/// Largest admissible SU subset size, by enumeration.
pub fn best_subset_size(net: &NetworkInstance) -> usize {
    let sus: Vec<usize> = net.su_indices().collect();
    assert!(sus.len() <= 12, "enumeration is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << sus.len()) {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let chosen: Vec<usize> = (0..sus.len()).filter(|b| mask >> b & 1 == 1).map(|b| sus[b]).collect();
        if subset_feasible(net, &chosen) {
            best = k;
        }
    }
    best
}

/// PU powers needed under cognitive interference `i_sp` (PBS-indexed).
pub fn pu_powers_direct(net: &NetworkInstance, i_sp: &[f64]) -> Option<Vec<f64>> {
    let pus: Vec<usize> = net.pu_indices().collect();
    let mut extra = vec![0.0; net.num_stations()];
    extra[..i_sp.len()].copy_from_slice(i_sp);
    exact_powers(net, &pus, &extra)
}

/// Random primary-only network with `pbs` cells and `pus` users; gains are
/// unit-scale with the serving gain dominant on average.
pub fn random_primary(rng: &mut ChaCha8Rng, pbs: usize, pus: usize) -> NetworkInstance {
    let serving: Vec<usize> = (0..pus).map(|_| rng.random_range(0..pbs)).collect();
    let gains: Vec<Vec<f64>> = (0..pbs)
        .map(|m| {
            (0..pus)
                .map(|i| {
                    if serving[i] == m {
                        rng.random_range(0.5..2.0)
                    } else {
                        rng.random_range(0.001..0.3)
                    }
                })
                .collect()
        })
        .collect();
    NetworkInstance::builder(pus, 0, pbs, 0)
        .serving(serving)
        .gains(gains)
        .noise((0..pbs).map(|_| rng.random_range(0.01..0.2)).collect())
        .p_max((0..pus).map(|_| rng.random_range(0.5..2.0)).collect())
        .target_sinr((0..pus).map(|_| rng.random_range(0.02..0.4)).collect())
        .build()
        .unwrap()
}

/// Random network with SUs on `sbs` secondary cells.
pub fn random_mixed(rng: &mut ChaCha8Rng, pbs: usize, pus: usize, sbs: usize, sus: usize) -> NetworkInstance {
    let b = pbs + sbs;
    let mut serving: Vec<usize> = (0..pus).map(|_| rng.random_range(0..pbs)).collect();
    serving.extend((0..sus).map(|_| pbs + rng.random_range(0..sbs)));
    let m = pus + sus;
    let gains: Vec<Vec<f64>> = (0..b)
        .map(|st| {
            (0..m)
                .map(|i| {
                    if serving[i] == st {
                        rng.random_range(0.5..2.0)
                    } else {
                        rng.random_range(0.001..0.2)
                    }
                })
                .collect()
        })
        .collect();
    NetworkInstance::builder(pus, sus, pbs, sbs)
        .serving(serving)
        .gains(gains)
        .noise(vec![0.05; b])
        .p_max(vec![1.0; m])
        .target_sinr((0..m).map(|_| rng.random_range(0.02..0.3)).collect())
        .build()
        .unwrap()
}

/// True SU throughput with PUs holding their targets, or `None` if any PU
/// would need more than its cap, any SU misses its target or a power is
/// out of range.
pub fn su_objective(net: &NetworkInstance, p_su: &[f64], protect_pu: bool) -> Option<f64> {
    if p_su.iter().zip(net.su_indices()).any(|(p, i)| *p < 0.0 || *p > net.p_max()[i]) {
        return None;
    }
    // PU powers solve their own target equations under the SU interference
    let pbs = net.num_pbs();
    let i_sp: Vec<f64> = (0..pbs)
        .map(|m| net.su_indices().zip(p_su).map(|(i, p)| net.gain(m, i) * p).sum())
        .collect();
    let pu = pu_powers_direct(net, &i_sp)?;
    if protect_pu && net.pu_indices().zip(&pu).any(|(j, p)| *p > net.p_max()[j]) {
        return None;
    }
    let mut total = 0.0;
    for (k, i) in net.su_indices().enumerate() {
        let s = net.serving(i);
        let mut interf = net.noise()[s];
        for (j, p) in net.pu_indices().zip(&pu) {
            interf += net.gain(s, j) * p;
        }
        for (l, i2) in net.su_indices().enumerate() {
            if i2 != i {
                interf += net.gain(s, i2) * p_su[l];
            }
        }
        let gamma = net.gain(s, i) * p_su[k] / interf;
        if gamma < net.target_sinr()[i] {
            return None;
        }
        total += gamma.ln_1p();
    }
    Some(total)
}
