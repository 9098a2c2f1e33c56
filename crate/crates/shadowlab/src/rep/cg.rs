//! Clebsch–Gordan coefficients and spin matrices.
//!
//! Spins and projections are passed doubled (`tj = 2j`) so half-integers stay exact.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{c, cr, ComplexMatrix};

fn factorial(k: i64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, x| acc * BigInt::from(x))
}

fn half(t: i64) -> Result<i64> {
    if t % 2 != 0 {
        return Err(Error::InvalidSpin(format!("{t}/2 is not an integer combination")));
    }
    Ok(t / 2)
}

type Key = (i64, i64, i64, i64, i64, i64);

fn cache() -> &'static Mutex<HashMap<Key, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ⟨j1 m1; j2 m2 | j m⟩ with the Condon–Shortley phase, all arguments doubled.
pub fn clebsch_gordan(tj1: i64, tj2: i64, tj: i64, tm1: i64, tm2: i64, tm: i64) -> Result<f64> {
    if tj1 < 0 || tj2 < 0 || tj < 0 {
        return Err(Error::InvalidSpin("negative spin".into()));
    }
    for (s, m) in [(tj1, tm1), (tj2, tm2), (tj, tm)] {
        if m.abs() > s || (s - m) % 2 != 0 {
            return Err(Error::InvalidSpin(format!("projection {m}/2 invalid for spin {s}/2")));
        }
    }
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 - tj) % 2 != 0 {
        return Err(Error::InvalidSpin(format!("triangle rule fails for {tj1}/2, {tj2}/2, {tj}/2")));
    }
    if tm1 + tm2 != tm {
        return Ok(0.0);
    }
    let key = (tj1, tj2, tj, tm1, tm2, tm);
    if let Some(v) = cache().lock().unwrap().get(&key) {
        return Ok(*v);
    }
    let a = half(tj1 + tj2 - tj)?;
    let b = half(tj1 - tj2 + tj)?;
    let cc = half(-tj1 + tj2 + tj)?;
    let d = half(tj1 + tj2 + tj)? + 1;
    let jpm = half(tj + tm)?;
    let jmm = half(tj - tm)?;
    let j1mm = half(tj1 - tm1)?;
    let j1pm = half(tj1 + tm1)?;
    let j2mm = half(tj2 - tm2)?;
    let j2pm = half(tj2 + tm2)?;
    let e = half(tj - tj2 + tm1)?;
    let f = half(tj - tj1 - tm2)?;

    let pre_num = BigInt::from(tj + 1)
        * factorial(a)
        * factorial(b)
        * factorial(cc)
        * factorial(jpm)
        * factorial(jmm)
        * factorial(j1mm)
        * factorial(j1pm)
        * factorial(j2mm)
        * factorial(j2pm);
    let pre = BigRational::new(pre_num, factorial(d));

    let kmin = 0.max(-e).max(-f);
    let kmax = a.min(j1mm).min(j2pm);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial(a - k)
            * factorial(j1mm - k)
            * factorial(j2pm - k)
            * factorial(e + k)
            * factorial(f + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let value = if sum.is_zero() {
        0.0
    } else {
        let sq = (pre * &sum * &sum).to_f64().unwrap_or(0.0).sqrt();
        if sum.is_negative() {
            -sq
        } else {
            sq
        }
    };
    cache().lock().unwrap().insert(key, value);
    Ok(value)
}

/// Spin-j matrices (Jx, Jy, Jz) in the basis m = j, j−1, …, −j.
pub fn su2_generators(tj: i64) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    assert!(tj >= 0, "spin must be non-negative");
    let dim = (tj + 1) as usize;
    let j = tj as f64 / 2.0;
    let mut jp = ComplexMatrix::zeros(dim, dim);
    let mut jz = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        let m = j - k as f64;
        jz[(k, k)] = cr(m);
        if k > 0 {
            jp[(k - 1, k)] = cr((j * (j + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).scale(0.5);
    let jy = (&jp - &jm) * c(0.0, -0.5);
    (jx, jy, jz)
}

/// Same matrices in the ascending order m = −j, …, j.
pub fn su2_generators_ascending(tj: i64) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let (jx, jy, jz) = su2_generators(tj);
    let n = jx.nrows();
    let rev = |a: &ComplexMatrix| ComplexMatrix::from_fn(n, n, |i, k| a[(n - 1 - i, n - 1 - k)]);
    (rev(&jx), rev(&jy), rev(&jz))
}
