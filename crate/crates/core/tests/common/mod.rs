//! Independent reference implementations used as oracles by the integration
//! tests. Nothing here calls into the library's model or efficiency code.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn zeros(n: usize) -> Mat {
    vec![vec![C::new(0.0, 0.0); n]; n]
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn scale(a: &Mat, s: C) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

/// Plain Gaussian elimination with partial pivoting on `A x = b`.
pub fn solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p.norm() > 1e-300, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / p;
            if f == C::new(0.0, 0.0) {
                continue;
            }
            let pivot_row = a[col].clone();
            for (x, v) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *x -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: C = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Solves `K† X + X K = A` through its Kronecker form. Basis states on
/// which `K` vanishes identically (the vacuum) are excluded; `A` must vanish
/// there too.
pub fn lyapunov(k: &Mat, a: &Mat) -> Mat {
    let zero = C::new(0.0, 0.0);
    let full = k.len();
    let live: Vec<usize> = (0..full)
        .filter(|&i| (0..full).any(|j| k[i][j] != zero || k[j][i] != zero))
        .collect();
    for i in (0..full).filter(|i| !live.contains(i)) {
        assert!(
            (0..full).all(|j| a[i][j] == zero && a[j][i] == zero),
            "right-hand side touches a null state"
        );
    }
    let n = live.len();
    let sub = |m: &Mat| -> Mat { live.iter().map(|&i| live.iter().map(|&j| m[i][j]).collect()).collect() };
    let (k, a) = (sub(k), sub(a));
    let kd = dagger(&k);
    let idx = |i: usize, j: usize| i * n + j;
    let mut m = vec![vec![zero; n * n]; n * n];
    let mut rhs = vec![zero; n * n];
    for i in 0..n {
        for j in 0..n {
            for q in 0..n {
                m[idx(i, j)][idx(q, j)] += kd[i][q];
                m[idx(i, j)][idx(i, q)] += k[q][j];
            }
            rhs[idx(i, j)] = a[i][j];
        }
    }
    let x = solve(m, rhs);
    let mut out = zeros(full);
    for (p, &i) in live.iter().enumerate() {
        for (q, &j) in live.iter().enumerate() {
            out[i][j] = x[idx(p, q)];
        }
    }
    out
}

pub fn expect(m: &Mat, psi: &[C]) -> C {
    let n = psi.len();
    (0..n)
        .map(|i| psi[i].conj() * (0..n).map(|j| m[i][j] * psi[j]).sum::<C>())
        .sum()
}

/// Hand-built model: photon number 0..=2, atom g/e, optional source g/e.
pub struct Model {
    pub dim: usize,
    pub k: Mat,
    pub a_out: Mat,
    pub b_out: Mat,
    pub s_out: Option<Mat>,
    pub psi0: Vec<C>,
}

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

impl Model {
    pub fn unentangled(gamma: f64) -> Self {
        Self::build(gamma, None)
    }

    pub fn entangled(gamma: f64, delta: f64, chi: f64) -> Self {
        Self::build(gamma, Some((delta, chi)))
    }

    fn build(gamma: f64, source: Option<(f64, f64)>) -> Self {
        let sources = if source.is_some() { 2 } else { 1 };
        let dim = 6 * sources;
        let index = |q: usize, n: usize, s: usize| 6 * q + 2 * n + s;
        let mut a = zeros(dim);
        let mut sigma = zeros(dim);
        let mut sigma_s = zeros(dim);
        for q in 0..sources {
            for n in 0..3 {
                for s in 0..2 {
                    let from = index(q, n, s);
                    if n > 0 {
                        a[index(q, n - 1, s)][from] = re((n as f64).sqrt());
                    }
                    if s == 1 {
                        sigma[index(q, n, 0)][from] = re(1.0);
                    }
                    if q == 1 {
                        sigma_s[index(0, n, s)][from] = re(1.0);
                    }
                }
            }
        }
        let ad = dagger(&a);
        let sd = dagger(&sigma);
        let mut k = mul(&ad, &a);
        k = add(&k, &scale(&mul(&sd, &sigma), re(2.0 * gamma)));
        k = add(&k, &scale(&mul(&sd, &a), re(2.0 * gamma.sqrt())));
        let atom = scale(&sigma, re((2.0 * gamma).sqrt()));
        let a_out = add(&atom, &scale(&a, re(2f64.sqrt())));
        let b_out = atom;
        let mut psi0 = vec![re(0.0); dim];
        let mut s_out = None;
        match source {
            None => psi0[index(0, 2, 0)] = re(1.0),
            Some((delta, chi)) => {
                let ssd = dagger(&sigma_s);
                k = add(&k, &scale(&mul(&ssd, &sigma_s), re(2.0 * delta)));
                let pump = mul(&mul(&ad, &ad), &sigma_s);
                k = add(&k, &scale(&pump, re(2.0 * (2.0 * chi * delta).sqrt())));
                s_out = Some(add(
                    &scale(&sigma_s, re(2.0 * delta.sqrt())),
                    &scale(&mul(&a, &a), re((2.0 * chi).sqrt())),
                ));
                psi0[index(1, 0, 0)] = re(1.0);
            }
        }
        Self {
            dim,
            k,
            a_out,
            b_out,
            s_out,
            psi0,
        }
    }

    /// `[c_out, d_out]`.
    pub fn ports(&self, omega: f64, phi: f64) -> [Mat; 2] {
        let e = C::from_polar(1.0, phi);
        let (s, c) = omega.sin_cos();
        let c_out = add(&scale(&self.a_out, e * s), &scale(&self.b_out, re(c)));
        let d_out = add(&scale(&self.a_out, e * c), &scale(&self.b_out, re(-s)));
        [c_out, d_out]
    }

    /// Raw `[P_cc, P_cd, P_dc, P_dd]` from two nested Lyapunov solves.
    pub fn probabilities(&self, omega: f64, phi: f64) -> [f64; 4] {
        let ports = self.ports(omega, phi);
        let q: Vec<Mat> = ports.iter().map(|j| lyapunov(&self.k, &mul(&dagger(j), j))).collect();
        let mut out = [0.0; 4];
        for (x, jx) in ports.iter().enumerate() {
            for y in 0..2 {
                let inner = mul(&dagger(jx), &mul(&q[y], jx));
                let outer = lyapunov(&self.k, &inner);
                out[2 * x + y] = expect(&outer, &self.psi0).re;
            }
        }
        out
    }
}

/// Post-selected, χ → 0 extrapolated splitting efficiency of the entangled
/// source from the Lyapunov route.
pub fn entangled_splitting(gamma: f64, delta: f64, omega: f64, chi: f64) -> f64 {
    let post = |chi: f64| {
        let p = Model::entangled(gamma, delta, chi).probabilities(omega, 0.0);
        let total: f64 = p.iter().sum();
        (p[1] + p[2]) / total
    };
    2.0 * post(chi / 2.0) - post(chi)
}

/// `S(γ)` at ω = φ = 0 for the unentangled source, simplified by hand.
pub fn baseline(gamma: f64) -> f64 {
    4.0 * gamma * (4.0 * gamma + 3.0) / ((2.0 * gamma + 1.0).powi(2) * (2.0 * gamma + 3.0))
}

/// `S(γ)` at ω = 0, δ = 0 for the entangled source.
pub fn entangled_baseline(gamma: f64) -> f64 {
    8.0 * gamma * (gamma + 1.0) / (2.0 * gamma + 1.0).powi(3)
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}
