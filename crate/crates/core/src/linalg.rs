//! Small dense helpers: 4×4 complex matrices and tridiagonal solves.

use crate::C64;

pub type Mat4 = [[C64; 4]; 4];

pub fn zero4() -> Mat4 {
    [[C64::new(0.0, 0.0); 4]; 4]
}

pub fn identity4() -> Mat4 {
    let mut m = zero4();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = zero4();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn apply4(a: &Mat4, x: [C64; 4]) -> [C64; 4] {
    let mut y = [C64::new(0.0, 0.0); 4];
    for i in 0..4 {
        y[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2] + a[i][3] * x[3];
    }
    y
}

fn norm1(a: &Mat4) -> f64 {
    (0..4).map(|j| (0..4).map(|i| a[i][j].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor
/// polynomial on the scaled matrix (`‖A‖₁ ≤ 1/2`).
pub fn expm4(a: &Mat4) -> Mat4 {
    let norm = norm1(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let mut b = *a;
    for row in b.iter_mut() {
        for z in row.iter_mut() {
            *z *= scale;
        }
    }
    let mut result = identity4();
    let mut term = identity4();
    for k in 1..=18 {
        term = mul4(&term, &b);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z *= inv;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul4(&result, &result);
    }
    result
}

/// LU factors of a (possibly cyclic) tridiagonal matrix, reusable across
/// right-hand sides. Entries follow `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`;
/// for a cyclic matrix `lower[0]` sits at `(0, n-1)` and `upper[n-1]` at `(n-1, 0)`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<C64>,
    c_prime: Vec<C64>,
    inv_denom: Vec<C64>,
    cyclic: Option<Cyclic>,
}

/// Sherman-Morrison correction for the corner entries.
#[derive(Debug, Clone)]
struct Cyclic {
    u: Vec<C64>,
    beta_over_gamma: C64,
    denom: C64,
}

impl Tridiagonal {
    pub fn new(lower: &[C64], diag: &[C64], upper: &[C64], cyclic: bool) -> Self {
        let n = diag.len();
        if !cyclic || n < 3 {
            return Self::open(lower, diag, upper);
        }
        let alpha = upper[n - 1];
        let beta = lower[0];
        let gamma = -diag[0];
        let mut d = diag.to_vec();
        d[0] -= gamma;
        d[n - 1] -= alpha * beta / gamma;
        let mut base = Self::open(lower, &d, upper);
        let mut u = vec![C64::new(0.0, 0.0); n];
        u[0] = gamma;
        u[n - 1] = alpha;
        base.solve(&mut u);
        let beta_over_gamma = beta / gamma;
        let denom = 1.0 + u[0] + beta_over_gamma * u[n - 1];
        base.cyclic = Some(Cyclic { u, beta_over_gamma, denom });
        base
    }

    fn open(lower: &[C64], diag: &[C64], upper: &[C64]) -> Self {
        let n = diag.len();
        let mut c_prime = vec![C64::new(0.0, 0.0); n];
        let mut inv_denom = vec![C64::new(0.0, 0.0); n];
        inv_denom[0] = 1.0 / diag[0];
        if n > 1 {
            c_prime[0] = upper[0] * inv_denom[0];
        }
        for i in 1..n {
            inv_denom[i] = 1.0 / (diag[i] - lower[i] * c_prime[i - 1]);
            if i + 1 < n {
                c_prime[i] = upper[i] * inv_denom[i];
            }
        }
        Tridiagonal { lower: lower.to_vec(), c_prime, inv_denom, cyclic: None }
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve(&self, rhs: &mut [C64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.c_prime[i] * next;
        }
        if let Some(c) = &self.cyclic {
            let factor = (rhs[0] + c.beta_over_gamma * rhs[n - 1]) / c.denom;
            for (x, u) in rhs.iter_mut().zip(&c.u) {
                *x -= factor * u;
            }
        }
    }
}

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[C64], diag: &[C64], upper: &[C64], rhs: &mut [C64]) {
    Tridiagonal::new(lower, diag, upper, false).solve(rhs);
}

/// Cyclic tridiagonal solve via Sherman-Morrison.
pub fn solve_cyclic_tridiagonal(lower: &[C64], diag: &[C64], upper: &[C64], rhs: &mut [C64]) {
    Tridiagonal::new(lower, diag, upper, true).solve(rhs);
}
