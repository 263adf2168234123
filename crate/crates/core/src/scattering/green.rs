use num_complex::Complex64;

use super::ScatteringError;

/// The root of `w + 1/w = z` with `|w| < 1`.
pub fn green_root(z: Complex64) -> Result<Complex64, ScatteringError> {
    if !(z.re.is_finite() && z.im.is_finite()) || (z.im == 0.0 && z.re.abs() <= 2.0) {
        return Err(ScatteringError::OnBand { z });
    }
    let s = (z * z - 4.0).sqrt();
    let (a, b) = ((z - s) * 0.5, (z + s) * 0.5);
    Ok(if a.norm() < b.norm() { a } else { b })
}

/// `r₀(z; n, n') = w^{|n-n'|} / (w - 1/w)` for the operator
/// `(h₀u)(n) = u(n+1) + u(n-1)` on all of `ℤ`.
pub fn free_green(z: Complex64, n: i64, n_prime: i64) -> Result<Complex64, ScatteringError> {
    let w = green_root(z)?;
    Ok(green_from_root(w, n - n_prime))
}

pub(crate) fn green_from_root(w: Complex64, delta: i64) -> Complex64 {
    w.powi(delta.unsigned_abs() as i32) / (w - w.inv())
}

/// Momentum `κ ∈ (0, π)` with `λ = 2cos κ`.
pub fn band_momentum(lambda: f64) -> f64 {
    (lambda / 2.0).clamp(-1.0, 1.0).acos()
}

/// Boundary value `w(λ + i0) = e^{-iκ}`.
pub fn boundary_root(lambda: f64) -> Complex64 {
    Complex64::from_polar(1.0, -band_momentum(lambda))
}

/// Solves `(T - z)x = e_{col}` for the truncated operator on sites
/// `-L..=L` with diagonal `potential(n)` and unit off-diagonals (Dirichlet
/// ends), and returns `x(row)`. Thomas algorithm, `O(L)`.
pub fn truncated_green<P>(l: usize, potential: P, z: Complex64, row: i64, col: i64) -> Complex64
where
    P: Fn(i64) -> f64,
{
    let size = 2 * l + 1;
    let idx = |n: i64| (n + l as i64) as usize;
    let mut c_prime = vec![Complex64::new(0.0, 0.0); size];
    let mut d_prime = vec![Complex64::new(0.0, 0.0); size];
    let one = Complex64::new(1.0, 0.0);
    for i in 0..size {
        let n = i as i64 - l as i64;
        let diag = Complex64::new(potential(n), 0.0) - z;
        let rhs = if i == idx(col) { one } else { Complex64::new(0.0, 0.0) };
        if i == 0 {
            c_prime[i] = one / diag;
            d_prime[i] = rhs / diag;
        } else {
            let denom = diag - c_prime[i - 1];
            c_prime[i] = one / denom;
            d_prime[i] = (rhs - d_prime[i - 1]) / denom;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); size];
    x[size - 1] = d_prime[size - 1];
    for i in (0..size - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x[idx(row)]
}

/// Number of eigenvalues below `lambda` of the truncated operator on
/// `-L..=L`, by the Sturm sequence of its `LDLᵀ` pivots.
pub fn truncated_count_below<P>(l: usize, potential: P, lambda: f64) -> usize
where
    P: Fn(i64) -> f64,
{
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..(2 * l + 1) {
        let n = i as i64 - l as i64;
        let off = if i == 0 { 0.0 } else { 1.0 / q };
        q = potential(n) - lambda - off;
        if q == 0.0 {
            q = -f64::EPSILON;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}
