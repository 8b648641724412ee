//! Reference computations that share no code with the library.
#![allow(dead_code)]

/// Dense row-major square matrix.
pub type Mat = Vec<Vec<f64>>;

pub fn zeros(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for l in 0..k {
            for j in 0..p {
                c[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    c
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

/// `D - A` built straight from an edge list.
pub fn laplacian(n: usize, edges: &[(usize, usize)]) -> Mat {
    let mut l = zeros(n);
    for &(i, j) in edges {
        l[i][i] += 1.0;
        l[j][j] += 1.0;
        l[i][j] -= 1.0;
        l[j][i] -= 1.0;
    }
    l
}

/// Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Mat = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        assert!(m[col][col].abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// `I - X (XᵀX)⁻¹ Xᵀ` via normal equations, `x` given as rows.
pub fn projector(x: &Mat) -> Mat {
    let m = x.len();
    let xt = transpose(x);
    let xtx = matmul(&xt, x);
    // Columns of (XᵀX)⁻¹ Xᵀ, one solve per row of X.
    let coef: Vec<Vec<f64>> = (0..m).map(|i| solve_linear(&xtx, &x[i])).collect();
    let mut h = identity(m);
    for i in 0..m {
        for j in 0..m {
            let p: f64 = x[i].iter().zip(&coef[j]).map(|(a, b)| a * b).sum();
            h[i][j] -= p;
        }
    }
    h
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut a = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `sqrt(λmin(L² + H²))`, the smallest singular value of `[L H]`.
pub fn delta1(l: &Mat, h: &Mat) -> f64 {
    let l2 = matmul(l, l);
    let h2 = matmul(h, h);
    let s: Mat = l2.iter().zip(&h2).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
    jacobi_eigenvalues(&s)[0].max(0.0).sqrt()
}

/// Unique minimizer of the unconstrained loss: the solution of
/// `[[I + λ₂H, I], [I, I + λ₁L]] (u; v) = (ỹ; ỹ)`.
pub fn stationary_point(y: &[f64], l: &Mat, h: &Mat, lambda1: f64, lambda2: f64) -> (Vec<f64>, Vec<f64>) {
    let m = y.len();
    let mut a = zeros(2 * m);
    for i in 0..m {
        for j in 0..m {
            a[i][j] = lambda2 * h[i][j];
            a[m + i][m + j] = lambda1 * l[i][j];
        }
        a[i][i] += 1.0;
        a[i][m + i] = 1.0;
        a[m + i][i] = 1.0;
        a[m + i][m + i] += 1.0;
    }
    let rhs: Vec<f64> = y.iter().chain(y).copied().collect();
    let x = solve_linear(&a, &rhs);
    (x[..m].to_vec(), x[m..].to_vec())
}

/// Loss written out term by term.
pub fn loss(y: &[f64], u: &[f64], v: &[f64], l: &Mat, h: &Mat, lambda1: f64, lambda2: f64) -> f64 {
    let fit: f64 = (0..y.len()).map(|i| (y[i] - u[i] - v[i]).powi(2)).sum();
    let quad = |a: &Mat, x: &[f64]| x.iter().zip(matvec(a, x)).map(|(p, q)| p * q).sum::<f64>();
    fit + lambda1 * quad(l, v) + lambda2 * quad(h, u)
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Small deterministic generator (SplitMix64) for test fixtures.
pub struct Fixture(u64);

impl Fixture {
    pub fn new(seed: u64) -> Self {
        Fixture(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// A random instance for which `null(L) ∩ null(H) = {0}`.
pub struct RandomInstance {
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
    /// Feature rows.
    pub x: Mat,
    pub l: Mat,
    pub h: Mat,
}

/// Spanning path in a shuffled order plus a few random chords, and
/// `k` uniform features.
pub fn random_instance(rng: &mut Fixture, m: usize, k: usize) -> RandomInstance {
    loop {
        let mut order: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            order.swap(i, rng.below(i + 1));
        }
        let mut edges: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
        for _ in 0..rng.below(m) {
            let (a, b) = (rng.below(m), rng.below(m));
            if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                edges.push((a.min(b), a.max(b)));
            }
        }
        let x: Mat = (0..m).map(|_| (0..k).map(|_| rng.uniform(-1.0, 3.0)).collect()).collect();
        let l = laplacian(m, &edges);
        let h = projector(&x);
        if delta1(&l, &h) > 1e-3 {
            return RandomInstance { m, edges, x, l, h };
        }
    }
}
