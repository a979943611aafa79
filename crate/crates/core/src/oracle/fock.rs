use nalgebra::DMatrix;
use num_complex::Complex;

use crate::scalar::{real, Real};

/// Square matrix with non-zero entries on diagonals `-2..=2` only.
///
/// `d[off + 2][i]` holds `A[i][i + off]`; slots that fall outside the matrix
/// stay zero. Ladder operators, their products up to second order and the
/// oscillator Hamiltonian all fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Band5<T> {
    pub n: usize,
    pub d: [Vec<Complex<T>>; 5],
}

impl<T: Real> Band5<T> {
    pub fn zeros(n: usize) -> Self {
        let z = vec![real(T::zero()); n];
        Self {
            n,
            d: [z.clone(), z.clone(), z.clone(), z.clone(), z],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.d[2] = vec![real(T::one()); n];
        m
    }

    /// Truncated annihilation operator.
    pub fn annihilation(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n.saturating_sub(1) {
            m.d[3][i] = real(T::from_usize_lossy(i + 1).sqrt());
        }
        m
    }

    pub fn creation(n: usize) -> Self {
        Self::annihilation(n).adjoint()
    }

    pub fn number(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.d[2][i] = real(T::from_usize_lossy(i));
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        let off = j as isize - i as isize;
        if !(-2..=2).contains(&off) {
            return real(T::zero());
        }
        self.d[(off + 2) as usize][i]
    }

    fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        let off = j as isize - i as isize;
        assert!((-2..=2).contains(&off), "entry ({i}, {j}) outside the band");
        self.d[(off + 2) as usize][i] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in i.saturating_sub(2)..(i + 3).min(self.n) {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut m = self.clone();
        for diag in &mut m.d {
            for x in diag.iter_mut() {
                *x = *x * c;
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (a, b) in m.d.iter_mut().zip(&other.d) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = *x + *y;
            }
        }
        m
    }

    /// Product of the truncated matrices. Panics if the result leaves the band.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i.saturating_sub(4)..(i + 5).min(n) {
                let mut s = real(T::zero());
                for k in i.saturating_sub(2)..(i + 3).min(n) {
                    s = s + self.get(i, k) * other.get(k, j);
                }
                if s != real(T::zero()) {
                    m.set(i, j, s);
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        let mut out = vec![real(T::zero()); n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = real(T::zero());
            for k in i.saturating_sub(2)..(i + 3).min(n) {
                s = s + self.get(i, k) * v[k];
            }
            *o = s;
        }
        out
    }

    /// `A rho` for a row-major dense `rho`.
    pub fn left_mul(&self, rho: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        let mut out = vec![real(T::zero()); n * n];
        for i in 0..n {
            for k in i.saturating_sub(2)..(i + 3).min(n) {
                let a = self.get(i, k);
                if a == real(T::zero()) {
                    continue;
                }
                let row_k = &rho[k * n..(k + 1) * n];
                let row_i = &mut out[i * n..(i + 1) * n];
                for (o, r) in row_i.iter_mut().zip(row_k) {
                    *o = *o + a * *r;
                }
            }
        }
        out
    }

    /// `rho A` for a row-major dense `rho`.
    pub fn right_mul(&self, rho: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        let mut out = vec![real(T::zero()); n * n];
        for i in 0..n {
            let row = &rho[i * n..(i + 1) * n];
            let o = &mut out[i * n..(i + 1) * n];
            for (j, oj) in o.iter_mut().enumerate() {
                let mut s = real(T::zero());
                for k in j.saturating_sub(2)..(j + 3).min(n) {
                    s = s + row[k] * self.get(k, j);
                }
                *oj = s;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Complex<T>> {
        let n = self.n;
        let mut out = vec![real(T::zero()); n * n];
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }
}

/// Oscillator density matrix on Fock states `0..dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix<T> {
    pub dim: usize,
    pub entries: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> FockDensityMatrix<T> {
    pub fn new(dim: usize, entries: Vec<Complex<T>>, t: T) -> Self {
        assert_eq!(entries.len(), dim * dim, "density matrix must be dim x dim");
        Self { dim, entries, t }
    }

    pub fn from_state(psi: &FockStateVector<T>) -> Self {
        let n = psi.dim;
        let mut e = vec![real(T::zero()); n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = psi.amplitudes[i] * psi.amplitudes[j].conj();
            }
        }
        Self {
            dim: n,
            entries: e,
            t: psi.t,
        }
    }

    pub fn coherent(dim: usize, beta: Complex<T>) -> Self {
        Self::from_state(&FockStateVector::coherent(dim, beta, T::zero()))
    }

    pub fn fock(dim: usize, k: usize) -> Self {
        Self::from_state(&FockStateVector::fock(dim, k))
    }

    /// Bose–Einstein populations with mean `n`, renormalized on the truncation.
    pub fn thermal(dim: usize, n: T) -> Self {
        let mut e = vec![real(T::zero()); dim * dim];
        let ratio = n / (n + T::one());
        let mut p = T::one();
        let mut total = T::zero();
        for k in 0..dim {
            e[k * dim + k] = real(p);
            total = total + p;
            p = p * ratio;
        }
        for k in 0..dim {
            e[k * dim + k] = e[k * dim + k] / total;
        }
        Self {
            dim,
            entries: e,
            t: T::zero(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(real(T::zero()), |s, k| s + self.get(k, k))
    }

    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part, computed in double precision.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim;
        let m = DMatrix::from_fn(n, n, |i, j| {
            let a = self.get(i, j);
            let b = self.get(j, i).conj();
            Complex::new((a.re + b.re).as_f64() * 0.5, (a.im + b.im).as_f64() * 0.5)
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Population of the two highest retained Fock levels.
    pub fn top_population(&self) -> T {
        let n = self.dim;
        (n.saturating_sub(2)..n).map(|k| self.get(k, k).re).sum()
    }

    /// `(<b>, <b†b>, <b^2>)`.
    pub fn moments(&self) -> (Complex<T>, T, Complex<T>) {
        let n = self.dim;
        let mut b = real(T::zero());
        let mut b2 = real(T::zero());
        let mut num = T::zero();
        for i in 0..n {
            num = num + T::from_usize_lossy(i) * self.get(i, i).re;
            if i + 1 < n {
                b = b + self.get(i + 1, i) * T::from_usize_lossy(i + 1).sqrt();
            }
            if i + 2 < n {
                b2 = b2 + self.get(i + 2, i) * T::from_usize_lossy((i + 1) * (i + 2)).sqrt();
            }
        }
        (b, num, b2)
    }
}

/// Pure oscillator state on Fock states `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockStateVector<T> {
    pub dim: usize,
    pub amplitudes: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> FockStateVector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>, t: T) -> Self {
        Self {
            dim: amplitudes.len(),
            amplitudes,
            t,
        }
    }

    /// Coherent state, renormalized on the truncation.
    pub fn coherent(dim: usize, beta: Complex<T>, t: T) -> Self {
        let mut a = Vec::with_capacity(dim);
        let mut c = real((-beta.norm_sqr() * T::half()).exp());
        for k in 0..dim {
            a.push(c);
            c = c * beta / T::from_usize_lossy(k + 1).sqrt();
        }
        let mut s = Self {
            dim,
            amplitudes: a,
            t,
        };
        s.normalize();
        s
    }

    pub fn fock(dim: usize, k: usize) -> Self {
        let mut a = vec![real(T::zero()); dim];
        a[k] = real(T::one());
        Self {
            dim,
            amplitudes: a,
            t: T::zero(),
        }
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        for c in &mut self.amplitudes {
            *c = *c / n;
        }
    }

    /// `<psi|A|psi>`.
    pub fn expect(&self, op: &Band5<T>) -> Complex<T> {
        let a = op.apply(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&a)
            .fold(real(T::zero()), |s, (x, y)| s + x.conj() * y)
    }

    /// `(<b>, <b†b>, <b^2>)`.
    pub fn moments(&self) -> (Complex<T>, T, Complex<T>) {
        let a = &self.amplitudes;
        let mut b = real(T::zero());
        let mut b2 = real(T::zero());
        let mut num = T::zero();
        for i in 0..self.dim {
            num = num + T::from_usize_lossy(i) * a[i].norm_sqr();
            if i + 1 < self.dim {
                b = b + a[i].conj() * a[i + 1] * T::from_usize_lossy(i + 1).sqrt();
            }
            if i + 2 < self.dim {
                b2 = b2 + a[i].conj() * a[i + 2] * T::from_usize_lossy((i + 1) * (i + 2)).sqrt();
            }
        }
        (b, num, b2)
    }
}
