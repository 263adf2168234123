use num_complex::Complex64;
use serde::Serialize;

use super::DiracError;
use crate::spectral::{eig_hermitian, max_abs, CMatrix, HermitianOperator};

/// The matrices `α₁, …, α_d, α₀` of the free Dirac operator.
///
/// `d = 1` uses `(σ₁; σ₃)`, `d = 2` uses `(σ₁, σ₂; σ₃)` and `d = 3` the
/// standard Dirac representation with `β = diag(I, -I)` as `α₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracMatrices {
    d: usize,
    alphas: Vec<CMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliffordDefect {
    /// `max_{i≠j} |α_iα_j + α_jα_i|`.
    pub anticommutator: f64,
    /// `max_i |α_i² - I|`.
    pub square: f64,
    /// `max_i |α_i - α_i*|`.
    pub hermiticity: f64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli() -> [CMatrix; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

impl DiracMatrices {
    pub fn new(d: usize) -> Result<Self, DiracError> {
        let [s1, s2, s3] = pauli();
        let alphas = match d {
            1 => vec![s1, s3],
            2 => vec![s1, s2, s3],
            3 => {
                let mut out = Vec::with_capacity(4);
                for s in [&s1, &s2, &s3] {
                    let mut a = CMatrix::zeros(4, 4);
                    a.view_mut((0, 2), (2, 2)).copy_from(s);
                    a.view_mut((2, 0), (2, 2)).copy_from(s);
                    out.push(a);
                }
                let mut beta = CMatrix::identity(4, 4);
                beta[(2, 2)] = c(-1.0, 0.0);
                beta[(3, 3)] = c(-1.0, 0.0);
                out.push(beta);
                out
            }
            _ => return Err(DiracError::InvalidDimension { d }),
        };
        Ok(Self { d, alphas })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn spinor_dim(&self) -> usize {
        self.alphas[0].nrows()
    }

    /// `α_j` for `j = 1..=d`, and `α₀` for `j = 0`.
    pub fn alpha(&self, j: usize) -> &CMatrix {
        if j == 0 {
            &self.alphas[self.d]
        } else {
            &self.alphas[j - 1]
        }
    }

    /// All matrices in the order `α₁, …, α_d, α₀`.
    pub fn alphas(&self) -> &[CMatrix] {
        &self.alphas
    }

    pub fn clifford_defect(&self) -> CliffordDefect {
        let s = self.spinor_dim();
        let id = CMatrix::identity(s, s);
        let mut out = CliffordDefect {
            anticommutator: 0.0,
            square: 0.0,
            hermiticity: 0.0,
        };
        for (i, a) in self.alphas.iter().enumerate() {
            out.square = out.square.max(max_abs(&(a * a - &id)));
            out.hermiticity = out.hermiticity.max(max_abs(&(a - a.adjoint())));
            for b in &self.alphas[i + 1..] {
                out.anticommutator = out.anticommutator.max(max_abs(&(a * b + b * a)));
            }
        }
        out
    }
}

/// `A(ξ) = Σ_j α_j ξ_j + mass·α₀`.
pub fn free_symbol(m: &DiracMatrices, mass: f64, xi: &[f64]) -> Result<CMatrix, DiracError> {
    if xi.len() != m.d() {
        return Err(DiracError::MomentumDimension {
            expected: m.d(),
            got: xi.len(),
        });
    }
    let mut a = m.alpha(0).scale(mass);
    for (j, &x) in xi.iter().enumerate() {
        a += m.alpha(j + 1).scale(x);
    }
    Ok(a)
}

/// `A(ξ) = T Λ T*` with `Λ = diag(a, …, a, -a, …, -a)`,
/// `a = (|ξ|² + mass²)^{1/2}`; the positive branch comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDiagonalization {
    pub lambda: Vec<f64>,
    pub t: CMatrix,
}

pub fn diagonalize_symbol(
    m: &DiracMatrices,
    mass: f64,
    xi: &[f64],
) -> Result<SymbolDiagonalization, DiracError> {
    let a = free_symbol(m, mass, xi)?;
    let dec = eig_hermitian(&HermitianOperator::new(a)?);
    let s = m.spinor_dim();
    let lambda: Vec<f64> = dec.eigenvalues().iter().rev().copied().collect();
    let mut t = CMatrix::zeros(s, s);
    for j in 0..s {
        t.set_column(j, &dec.eigenvectors().column(s - 1 - j));
    }
    Ok(SymbolDiagonalization { lambda, t })
}

/// `(|ξ|² + mass²)^{1/2}`.
pub fn symbol_energy(mass: f64, xi: &[f64]) -> f64 {
    (xi.iter().map(|x| x * x).sum::<f64>() + mass * mass).sqrt()
}
