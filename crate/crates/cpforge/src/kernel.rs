//! Gaussian kernel matrices over feature subsets.

use std::io::{Read, Write};
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

const BANDWIDTH_FLOOR: f64 = 1e-12;

/// Bandwidth selection for the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Median of pairwise distances on the subset (floored at 1e-12).
    Median,
    Fixed(f64),
}

/// Symmetric m x m kernel matrix over a feature subset.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    m: usize,
    data: Vec<f64>,
    pub feature_subset: Vec<usize>,
    pub bandwidth: f64,
    /// True when the median heuristic degenerated (all points identical) and
    /// the bandwidth fell back to 1.
    pub median_fallback: bool,
}

impl KernelMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn total_sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Builds a kernel directly from entries (tests, conjugations).
    pub fn from_data(m: usize, data: Vec<f64>) -> Result<KernelMatrix> {
        if data.len() != m * m {
            return Err(Error::dimension(format!("{} entries for a {}x{} kernel", data.len(), m, m)));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if (data[i * m + j] - data[j * m + i]).abs() > 1e-12 {
                    return Err(Error::data(format!("kernel not symmetric at ({}, {})", i, j)));
                }
            }
        }
        Ok(KernelMatrix {
            m,
            data,
            feature_subset: Vec::new(),
            bandwidth: f64::NAN,
            median_fallback: false,
        })
    }

    /// `P K P^T` for the permutation with row-gather targets `idx`:
    /// entry `(i, j)` of the result is `K[idx[i]][idx[j]]`.
    pub fn conjugate_by(&self, idx: &[usize]) -> Result<KernelMatrix> {
        if idx.len() != self.m {
            return Err(Error::dimension(format!("index map of size {} on {} rows", idx.len(), self.m)));
        }
        let m = self.m;
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                data[i * m + j] = self.entry(idx[i], idx[j]);
            }
        }
        Ok(KernelMatrix {
            m,
            data,
            feature_subset: self.feature_subset.clone(),
            bandwidth: self.bandwidth,
            median_fallback: self.median_fallback,
        })
    }

    /// Debug dump: 8-byte little-endian length header then row-major f64s.
    pub fn dump_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&(self.m as u64).to_le_bytes())?;
        for v in &self.data {
            f.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<KernelMatrix> {
        let mut f = std::fs::File::open(path)?;
        let mut head = [0u8; 8];
        f.read_exact(&mut head)?;
        let m = u64::from_le_bytes(head) as usize;
        let mut data = vec![0.0; m * m];
        let mut buf = [0u8; 8];
        for v in &mut data {
            f.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        KernelMatrix::from_data(m, data)
    }
}

/// Gaussian kernel `K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2))` over the
/// given feature subset.
pub fn gaussian_kernel(ds: &Dataset, subset: &[usize], bandwidth: Bandwidth) -> Result<KernelMatrix> {
    if subset.is_empty() {
        return Err(Error::data("kernel feature subset must be non-empty"));
    }
    for &j in subset {
        if j >= ds.d() {
            return Err(Error::dimension(format!("feature {} out of range (d={})", j, ds.d())));
        }
    }
    let m = ds.m();
    let mut sq = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let mut s = 0.0;
            for &k in subset {
                let diff = ds.value(i, k) - ds.value(j, k);
                s += diff * diff;
            }
            sq[i * m + j] = s;
            sq[j * m + i] = s;
        }
    }

    let mut median_fallback = false;
    let sigma = match bandwidth {
        Bandwidth::Fixed(s) => {
            if s <= 0.0 {
                return Err(Error::numeric("bandwidth must be positive"));
            }
            s
        }
        Bandwidth::Median => {
            let mut dists: Vec<f64> = Vec::with_capacity(m * (m - 1) / 2);
            for i in 0..m {
                for j in (i + 1)..m {
                    dists.push(sq[i * m + j].sqrt());
                }
            }
            dists.sort_by(f64::total_cmp);
            let med = if dists.len() % 2 == 1 {
                dists[dists.len() / 2]
            } else {
                0.5 * (dists[dists.len() / 2 - 1] + dists[dists.len() / 2])
            };
            if med <= BANDWIDTH_FLOOR {
                median_fallback = true;
                1.0
            } else {
                med
            }
        }
    };

    let denom = 2.0 * sigma * sigma;
    let data: Vec<f64> = sq.iter().map(|&s| (-s / denom).exp()).collect();
    Ok(KernelMatrix {
        m,
        data,
        feature_subset: subset.to_vec(),
        bandwidth: sigma,
        median_fallback,
    })
}
