//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's d-separation, amplitude or
//! factorization code paths; these are the second routes the library is
//! checked against.
#![allow(dead_code)]

use eprb_causal::Dag;

pub const TSIRELSON: f64 = 2.828_427_124_746_190_1;

type M4 = [[f64; 4]; 4];
type M2 = [[f64; 2]; 2];

fn kron(a: &M2, b: &M2) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn mul(a: &M4, b: &M4) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn add_scaled(a: &M4, sa: f64, b: &M4, sb: f64) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = sa * a[i][j] + sb * b[i][j];
        }
    }
    out
}

const ID2: M2 = [[1.0, 0.0], [0.0, 1.0]];

/// Spin observable along `theta` in the real (Bloch-plane) convention.
fn sigma(theta: f64) -> M2 {
    [[theta.cos(), theta.sin()], [theta.sin(), -theta.cos()]]
}

fn projector(theta: f64, sign: f64) -> M2 {
    let s = sigma(theta);
    [
        [0.5 * (1.0 + sign * s[0][0]), 0.5 * sign * s[0][1]],
        [0.5 * sign * s[1][0], 0.5 * (1.0 + sign * s[1][1])],
    ]
}

/// Dephasing channel along `theta` on one wing: `(1+κ)/2 ρ + (1-κ)/2 σρσ`.
fn dephase(rho: &M4, op: &M4, kappa: f64) -> M4 {
    let flipped = mul(&mul(op, rho), op);
    add_scaled(rho, 0.5 * (1.0 + kappa), &flipped, 0.5 * (1.0 - kappa))
}

/// `P(a,b)` for the state `cos η|+-⟩ - sin η|-+⟩`, each wing dephased with
/// strength `kappa` along its intermediary angle, then measured at the final
/// angles. Ordered `(+,+), (+,-), (-,+), (-,-)`.
pub fn density_matrix_joint(eta: f64, finals: (f64, f64), intermediary: (f64, f64), kappa: f64) -> [f64; 4] {
    let psi = [0.0, eta.cos(), -eta.sin(), 0.0];
    let mut rho = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            rho[i][j] = psi[i] * psi[j];
        }
    }
    rho = dephase(&rho, &kron(&sigma(intermediary.0), &ID2), kappa);
    rho = dephase(&rho, &kron(&ID2, &sigma(intermediary.1)), kappa);
    let mut out = [0.0; 4];
    for (slot, (sa, sb)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().enumerate() {
        let pi = kron(&projector(finals.0, *sa), &projector(finals.1, *sb));
        let m = mul(&pi, &rho);
        out[slot] = (0..4).map(|k| m[k][k]).sum();
    }
    out
}

/// Brute-force d-separation: enumerate every simple path in the skeleton
/// between a vertex of `x` and a vertex of `y` and test each for blocking.
pub fn dsep_by_paths(dag: &Dag, x: &[&str], y: &[&str], z: &[&str]) -> bool {
    let n = dag.len();
    let names: Vec<&str> = dag.names().collect();
    let idx = |s: &str| names.iter().position(|n| *n == s).unwrap();
    let edge = |a: usize, b: usize| dag.has_edge(names[a], names[b]);
    let in_z: Vec<bool> = (0..n).map(|v| z.contains(&names[v])).collect();
    // activated[v]: v or one of its descendants is in z.
    let activated: Vec<bool> = (0..n)
        .map(|v| in_z[v] || dag.descendants(names[v]).unwrap().iter().any(|d| z.contains(d)))
        .collect();

    fn walk(
        path: &mut Vec<usize>,
        target: &[usize],
        n: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        open: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        let last = *path.last().unwrap();
        if path.len() > 1 && target.contains(&last) {
            return open(path);
        }
        for next in 0..n {
            if path.contains(&next) || !(edge(last, next) || edge(next, last)) {
                continue;
            }
            path.push(next);
            if walk(path, target, n, edge, open) {
                return true;
            }
            path.pop();
        }
        false
    }

    let open = |path: &[usize]| {
        path.windows(3).all(|w| {
            let (a, m, b) = (w[0], w[1], w[2]);
            let collider = edge(a, m) && edge(b, m);
            if collider {
                activated[m]
            } else {
                !in_z[m]
            }
        })
    };
    let targets: Vec<usize> = y.iter().map(|s| idx(s)).collect();
    for s in x {
        let mut path = vec![idx(s)];
        if walk(&mut path, &targets, n, &edge, &open) {
            return false;
        }
    }
    true
}

/// Every labelled DAG on `n` vertices named `V0..`, as edge lists.
pub fn all_dags(n: usize) -> Vec<Vec<(String, String)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, &e)| e)
            .collect();
        if is_acyclic(n, &edges) {
            out.push(
                edges
                    .iter()
                    .map(|&(a, b)| (format!("V{a}"), format!("V{b}")))
                    .collect(),
            );
        }
    }
    out
}

fn is_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    // Repeatedly strip vertices without incoming edges.
    let mut alive = vec![true; n];
    for _ in 0..n {
        let Some(v) = (0..n).find(|&v| alive[v] && !edges.iter().any(|&(a, b)| b == v && alive[a])) else {
            return false;
        };
        alive[v] = false;
    }
    true
}

/// CHSH of a local model computed directly from its response functions:
/// `E_ij = Σ_k p(λ_k) (2a_ik - 1)(2b_jk - 1)`.
pub fn local_chsh(lambda: &[f64], a_plus: &[Vec<f64>; 2], b_plus: &[Vec<f64>; 2]) -> f64 {
    let e = |i: usize, j: usize| -> f64 {
        lambda
            .iter()
            .enumerate()
            .map(|(k, p)| p * (2.0 * a_plus[i][k] - 1.0) * (2.0 * b_plus[j][k] - 1.0))
            .sum()
    };
    (e(0, 0) - e(0, 1) + e(1, 0) + e(1, 1)).abs()
}
