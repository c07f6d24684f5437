//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use adaptive_depth::imagedata::{DepthMap, LabImage, RgbImage};
use adaptive_depth::superpixel::SoftAssociation;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_image(w: usize, h: usize, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

/// Direct evaluation of the reconstruction loss from a dense weight table.
pub fn brute_force_loss(q: &[Vec<f64>], lab: &LabImage, m: f64) -> f64 {
    let w = lab.width();
    let n = q.len();
    let k = q[0].len();
    let mut u = vec![[0.0; 3]; k];
    let mut l = vec![[0.0; 2]; k];
    for s in 0..k {
        let mut den = 0.0;
        for p in 0..n {
            let f = lab.pixels()[p];
            for c in 0..3 {
                u[s][c] += f[c] * q[p][s];
            }
            l[s][0] += (p % w) as f64 * q[p][s];
            l[s][1] += (p / w) as f64 * q[p][s];
            den += q[p][s];
        }
        for c in 0..3 {
            u[s][c] /= den;
        }
        l[s][0] /= den;
        l[s][1] /= den;
    }
    let mut loss = 0.0;
    for p in 0..n {
        let mut fr = [0.0; 3];
        let mut cr = [0.0; 2];
        for s in 0..k {
            for c in 0..3 {
                fr[c] += u[s][c] * q[p][s];
            }
            cr[0] += l[s][0] * q[p][s];
            cr[1] += l[s][1] * q[p][s];
        }
        let f = lab.pixels()[p];
        let dc: f64 = (0..3).map(|c| (f[c] - fr[c]).powi(2)).sum::<f64>().sqrt();
        let dp = (((p % w) as f64 - cr[0]).powi(2) + ((p / w) as f64 - cr[1]).powi(2)).sqrt();
        loss += dc + m * dp;
    }
    loss
}

/// Random association over `k` superpixels where every superpixel gets
/// weight from at least one pixel.
pub fn random_association(
    w: usize,
    h: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (SoftAssociation, Vec<Vec<f64>>) {
    let n = w * h;
    let mut dense = vec![vec![0.0; k]; n];
    let mut rows = Vec::with_capacity(n);
    for p in 0..n {
        let mut picks: Vec<usize> = (0..rng.gen_range(1..=9.min(k)))
            .map(|_| rng.gen_range(0..k))
            .collect();
        if p < k {
            picks.push(p);
        }
        picks.sort();
        picks.dedup();
        let raw: Vec<f64> = picks.iter().map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let row: Vec<(usize, f64)> = picks
            .iter()
            .zip(&raw)
            .map(|(&s, &r)| (s, r / total))
            .collect();
        let sum: f64 = row.iter().map(|e| e.1).sum();
        for &(s, q) in &row {
            dense[p][s] = q / sum;
        }
        rows.push(row.into_iter().map(|(s, q)| (s, q / sum)).collect());
    }
    (SoftAssociation::from_rows(w, h, k, rows).unwrap(), dense)
}

pub fn random_rgb(w: usize, h: usize, rng: &mut ChaCha8Rng) -> RgbImage {
    RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

/// Sparse map with `count` distinct random pixels carrying random depths.
pub fn random_sparse(w: usize, h: usize, count: usize, rng: &mut ChaCha8Rng) -> DepthMap {
    let mut idx: Vec<usize> = (0..w * h).collect();
    idx.shuffle(rng);
    let mut depth = vec![0.0; w * h];
    let mut valid = vec![false; w * h];
    for &i in &idx[..count] {
        depth[i] = rng.gen_range(500.0..20000.0);
        valid[i] = true;
    }
    DepthMap::new(w, h, depth, valid).unwrap()
}

pub fn gaussian(a: [f64; 3], b: [f64; 3], sigma: f64) -> f64 {
    let d2: f64 = (0..3).map(|c| (a[c] - b[c]).powi(2)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Row-normalized 8-neighbor weights written out from the formula.
pub fn dense_weights(lab: &LabImage, sigma: f64) -> DMatrix<f64> {
    let (w, h) = (lab.width() as i64, lab.height() as i64);
    let n = (w * h) as usize;
    let mut m = DMatrix::zeros(n, n);
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    m[(i, j)] = gaussian(lab.pixels()[i], lab.pixels()[j], sigma);
                }
            }
            let total: f64 = m.row(i).sum();
            for j in 0..n {
                m[(i, j)] /= total;
            }
        }
    }
    m
}

/// Solves `(I - W)_UU x = W_UK d` by LU factorization.
pub fn dense_solve(lab: &LabImage, sparse: &DepthMap, sigma: f64) -> Vec<f64> {
    let wm = dense_weights(lab, sigma);
    let known = sparse.validity();
    let unknown: Vec<usize> = (0..known.len()).filter(|&i| !known[i]).collect();
    let k = unknown.len();
    let mut a = DMatrix::zeros(k, k);
    let mut b = DVector::zeros(k);
    for (r, &i) in unknown.iter().enumerate() {
        a[(r, r)] = 1.0;
        for (c, &j) in unknown.iter().enumerate() {
            a[(r, c)] -= wm[(i, j)];
        }
        b[r] = (0..known.len())
            .filter(|&j| known[j])
            .map(|j| wm[(i, j)] * sparse.depths()[j])
            .sum();
    }
    let x = a.lu().solve(&b).expect("reduced system is nonsingular");
    let mut out = sparse.depths().to_vec();
    for (r, &i) in unknown.iter().enumerate() {
        out[i] = x[r];
    }
    out
}
