//! Shared oracles for the integration suites. Everything here is
//! deliberately independent of the library's computation paths: the
//! eigensolver is plain Jacobi rotations, the linear solver is Gaussian
//! elimination, d-separation is path enumeration over simple paths.

#![allow(dead_code)]

use cpforge::data::Dataset;
use cpforge::kernel::KernelMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Jacobi eigendecomposition of a symmetric matrix (row-major).
/// Returns (eigenvalues, eigenvectors as columns).
pub fn jacobi_eigh(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-18 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigvals: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    (eigvals, v)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().partial_cmp(&m[j * n + col].abs()).unwrap())
            .unwrap();
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        let diag = m[col * n + col];
        assert!(diag.abs() > 1e-14, "singular system");
        for row in (col + 1)..n {
            let f = m[row * n + col] / diag;
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    x
}

/// Naive four-term trace expansion of the centered kernel inner product:
/// `tr(AB) - tr(U A B) - tr(A U B) + tr(U A U B)` with `U = (1/m) 1 1^T`,
/// each trace computed by dense multiplication.
pub fn hsic_naive(a: &KernelMatrix, b: &KernelMatrix) -> f64 {
    let m = a.m();
    let matmul = |x: &[f64], y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let xv = x[i * m + k];
                if xv == 0.0 {
                    continue;
                }
                for j in 0..m {
                    out[i * m + j] += xv * y[k * m + j];
                }
            }
        }
        out
    };
    let trace = |x: &[f64]| -> f64 { (0..m).map(|i| x[i * m + i]).sum() };
    let u = vec![1.0 / m as f64; m * m];
    let ab = matmul(a.data(), b.data());
    let uab = matmul(&u, &ab);
    let ub = matmul(&u, b.data());
    let aub = matmul(a.data(), &ub);
    let uaub = matmul(&u, &aub);
    trace(&ab) - trace(&uab) - trace(&aub) + trace(&uaub)
}

/// Random Gaussian-kernel pair over disjoint synthetic feature blocks.
pub fn random_kernel_pair(m: usize, seed: u64) -> (KernelMatrix, KernelMatrix) {
    let ds = random_dataset(m, 5, seed);
    let ku = cpforge::gaussian_kernel(&ds, &[0, 1], cpforge::Bandwidth::Median).unwrap();
    let kv = cpforge::gaussian_kernel(&ds, &[2, 3, 4], cpforge::Bandwidth::Median).unwrap();
    (ku, kv)
}

/// Random dense dataset with both classes, positives first.
pub fn random_dataset(m: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut labels: Vec<i8> = (0..m).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    labels[0] = 1;
    labels[1] = -1;
    Dataset::from_rows(rows, labels, (0..d).map(|j| format!("f{}", j)).collect()).unwrap()
}

/// Uniform random permutation targets.
pub fn random_permutation(m: usize, rng: &mut ChaCha8Rng) -> cpforge::Permutation {
    let mut t: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        t.swap(i, j);
    }
    cpforge::Permutation::new(t).unwrap()
}

/// Uniform random block-class permutation for the dataset's classes.
pub fn random_blockclass_permutation(ds: &Dataset, rng: &mut ChaCha8Rng) -> cpforge::Permutation {
    let mut t: Vec<usize> = (0..ds.m()).collect();
    let (pos, neg) = t.split_at_mut(ds.m_pos());
    for part in [pos, neg] {
        for i in (1..part.len()).rev() {
            let j = rng.random_range(0..=i);
            part.swap(i, j);
        }
    }
    cpforge::Permutation::new(t).unwrap()
}

// ---------------------------------------------------------------------------
// d-separation oracle by simple-path enumeration
// ---------------------------------------------------------------------------

/// Directed graph as arc list for the oracle.
pub struct OracleGraph {
    pub n: usize,
    pub arcs: Vec<(usize, usize)>,
}

impl OracleGraph {
    fn descendants(&self, v: usize) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.arcs {
                if a == u && !mask[b] {
                    mask[b] = true;
                    stack.push(b);
                }
            }
        }
        mask
    }

    /// All simple undirected paths from x to y, as vertex sequences.
    fn simple_paths(&self, x: usize, y: usize, skip_x_out: bool) -> Vec<Vec<usize>> {
        let mut paths = Vec::new();
        let mut current = vec![x];
        let mut on_path = vec![false; self.n];
        on_path[x] = true;
        self.extend_paths(y, skip_x_out, x, &mut current, &mut on_path, &mut paths);
        paths
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_paths(
        &self,
        y: usize,
        skip_x_out: bool,
        x: usize,
        current: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        paths: &mut Vec<Vec<usize>>,
    ) {
        let u = *current.last().unwrap();
        if u == y {
            paths.push(current.clone());
            return;
        }
        for &(a, b) in &self.arcs {
            let next = if a == u {
                if skip_x_out && u == x && current.len() == 1 {
                    continue; // drop x's outgoing arcs for back-door paths
                }
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if on_path[next] {
                continue;
            }
            current.push(next);
            on_path[next] = true;
            self.extend_paths(y, skip_x_out, x, current, on_path, paths);
            on_path[next] = false;
            current.pop();
        }
    }

    fn arc(&self, a: usize, b: usize) -> bool {
        self.arcs.contains(&(a, b))
    }

    /// Path-blocking test per the d-separation definition.
    fn path_blocked(&self, path: &[usize], z: &[usize]) -> bool {
        for w in path.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let collider = self.arc(a, b) && self.arc(c, b);
            if collider {
                let desc = self.descendants(b);
                let opened = z.iter().any(|&v| v == b || desc[v]);
                if !opened {
                    return true;
                }
            } else if z.contains(&b) {
                return true;
            }
        }
        false
    }

    /// d-separation by enumerating every simple path.
    pub fn d_separated_oracle(&self, x: usize, y: usize, z: &[usize], skip_x_out: bool) -> bool {
        self.simple_paths(x, y, skip_x_out)
            .iter()
            .all(|p| self.path_blocked(p, z))
    }
}
