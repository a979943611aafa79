use num_complex::Complex;

use super::fock::FockDensityMatrix;
use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::trajectory::EnsembleResult;

/// Time series of `<b>`, `<b†b>`, `<b^2>`, optionally with Monte Carlo
/// standard errors (real and imaginary parts in the matching components).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentSeries<T> {
    pub times: Vec<T>,
    pub b: Vec<Complex<T>>,
    pub n: Vec<T>,
    pub b2: Vec<Complex<T>>,
    pub se_b: Option<Vec<Complex<T>>>,
    pub se_n: Option<Vec<T>>,
    pub se_b2: Option<Vec<Complex<T>>>,
}

impl<T: Real> MomentSeries<T> {
    pub fn new(times: Vec<T>, b: Vec<Complex<T>>, n: Vec<T>, b2: Vec<Complex<T>>) -> Self {
        Self {
            times,
            b,
            n,
            b2,
            se_b: None,
            se_n: None,
            se_b2: None,
        }
    }

    pub fn from_density_matrices(states: &[FockDensityMatrix<T>]) -> Self {
        let mut s = Self::default();
        for rho in states {
            let (b, n, b2) = rho.moments();
            s.times.push(rho.t);
            s.b.push(b);
            s.n.push(n);
            s.b2.push(b2);
        }
        s
    }

    pub fn from_ensemble(e: &EnsembleResult<T>) -> Self {
        let m = &e.moments;
        Self {
            times: e.times.clone(),
            b: m.mean_b.clone(),
            n: m.mean_n.clone(),
            b2: m.mean_b2.clone(),
            se_b: Some(m.se_b.clone()),
            se_n: Some(m.se_n.clone()),
            se_b2: Some(m.se_b2.clone()),
        }
    }

    /// Sample means and standard errors over equally gridded runs.
    pub fn from_samples<'a, I>(times: Vec<T>, runs: I) -> Self
    where
        I: Iterator<Item = (&'a [Complex<T>], &'a [T], &'a [Complex<T>])>,
        T: 'a,
    {
        let len = times.len();
        let mut sum = vec![[T::zero(); 5]; len];
        let mut sq = vec![[T::zero(); 5]; len];
        let mut count = 0usize;
        for (b, n, b2) in runs {
            count += 1;
            for k in 0..len {
                let v = [b[k].re, b[k].im, n[k], b2[k].re, b2[k].im];
                for c in 0..5 {
                    sum[k][c] = sum[k][c] + v[c];
                    sq[k][c] = sq[k][c] + v[c] * v[c];
                }
            }
        }
        let cnt = T::from_usize_lossy(count);
        let stats = |k: usize, c: usize| {
            let m = sum[k][c] / cnt;
            let var = if count > 1 {
                ((sq[k][c] - cnt * m * m) / (cnt - T::one())).max(T::zero())
            } else {
                T::zero()
            };
            (m, (var / cnt).sqrt())
        };
        let mut s = Self {
            times,
            se_b: Some(vec![]),
            se_n: Some(vec![]),
            se_b2: Some(vec![]),
            ..Default::default()
        };
        for k in 0..len {
            let st: Vec<(T, T)> = (0..5).map(|c| stats(k, c)).collect();
            s.b.push(Complex::new(st[0].0, st[1].0));
            s.n.push(st[2].0);
            s.b2.push(Complex::new(st[3].0, st[4].0));
            s.se_b
                .as_mut()
                .unwrap()
                .push(Complex::new(st[0].1, st[1].1));
            s.se_n.as_mut().unwrap().push(st[2].1);
            s.se_b2
                .as_mut()
                .unwrap()
                .push(Complex::new(st[3].1, st[4].1));
        }
        s
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Per-time differences between two moment series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentReport<T> {
    pub times: Vec<T>,
    pub abs_b: Vec<T>,
    pub abs_n: Vec<T>,
    pub abs_b2: Vec<T>,
    pub rel_b: Vec<T>,
    pub rel_n: Vec<T>,
    pub rel_b2: Vec<T>,
    pub max_abs: T,
    pub max_rel: T,
    /// Largest `|a - b| / sqrt(se_a^2 + se_b^2)` over every real component,
    /// when at least one side carries standard errors.
    pub max_z: Option<T>,
    /// Signed differences `b - a`.
    pub diff_b: Vec<Complex<T>>,
    pub diff_n: Vec<T>,
    pub diff_b2: Vec<Complex<T>>,
}

fn rel<T: Real>(d: T, a: T, b: T) -> T {
    let s = a.max(b);
    if s == T::zero() {
        T::zero()
    } else {
        d / s
    }
}

fn z<T: Real>(d: T, sa: T, sb: T) -> T {
    let s = sa.hypot(sb);
    if d == T::zero() {
        T::zero()
    } else if s == T::zero() {
        T::infinity()
    } else {
        d.abs() / s
    }
}

/// Compares two series on the same time grid.
pub fn compare_moments<T: Real>(
    a: &MomentSeries<T>,
    b: &MomentSeries<T>,
) -> Result<MomentReport<T>> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples vs {}",
            a.len(),
            b.len()
        )));
    }
    for (k, (ta, tb)) in a.times.iter().zip(&b.times).enumerate() {
        let scale = ta.abs().max(tb.abs()).max(T::one());
        if (*ta - *tb).abs() > T::lit(1e-9) * scale {
            return Err(Error::GridMismatch(format!("sample {k}: t = {ta} vs {tb}")));
        }
    }
    let zero_c = |len| vec![real(T::zero()); len];
    let zero_r = |len| vec![T::zero(); len];
    let has_se = a.se_b.is_some() || b.se_b.is_some();
    let len = a.len();
    let (sa_b, sb_b) = (
        a.se_b.clone().unwrap_or_else(|| zero_c(len)),
        b.se_b.clone().unwrap_or_else(|| zero_c(len)),
    );
    let (sa_n, sb_n) = (
        a.se_n.clone().unwrap_or_else(|| zero_r(len)),
        b.se_n.clone().unwrap_or_else(|| zero_r(len)),
    );
    let (sa_b2, sb_b2) = (
        a.se_b2.clone().unwrap_or_else(|| zero_c(len)),
        b.se_b2.clone().unwrap_or_else(|| zero_c(len)),
    );

    let mut r = MomentReport {
        times: a.times.clone(),
        ..Default::default()
    };
    let mut max_z = T::zero();
    for k in 0..len {
        let db = b.b[k] - a.b[k];
        let dn = b.n[k] - a.n[k];
        let db2 = b.b2[k] - a.b2[k];
        r.diff_b.push(db);
        r.diff_n.push(dn);
        r.diff_b2.push(db2);
        r.abs_b.push(db.norm());
        r.abs_n.push(dn.abs());
        r.abs_b2.push(db2.norm());
        r.rel_b.push(rel(db.norm(), a.b[k].norm(), b.b[k].norm()));
        r.rel_n.push(rel(dn.abs(), a.n[k].abs(), b.n[k].abs()));
        r.rel_b2
            .push(rel(db2.norm(), a.b2[k].norm(), b.b2[k].norm()));
        for x in [db.norm(), dn.abs(), db2.norm()] {
            r.max_abs = r.max_abs.max(x);
        }
        for x in [r.rel_b[k], r.rel_n[k], r.rel_b2[k]] {
            r.max_rel = r.max_rel.max(x);
        }
        for zz in [
            z(db.re, sa_b[k].re, sb_b[k].re),
            z(db.im, sa_b[k].im, sb_b[k].im),
            z(dn, sa_n[k], sb_n[k]),
            z(db2.re, sa_b2[k].re, sb_b2[k].re),
            z(db2.im, sa_b2[k].im, sb_b2[k].im),
        ] {
            max_z = max_z.max(zz);
        }
    }
    r.max_z = has_se.then_some(max_z);
    Ok(r)
}
