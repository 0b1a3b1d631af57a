//! Brute-force `E[N_0 | Y^k]` from the full joint covariance.
//!
//! Every centred observation is expanded as a linear combination of the
//! centred noises `N_0..N_k` by replaying the encoder, the `k x k` covariance
//! of the observations and their cross-covariance with `N_0` are formed
//! explicitly, and the normal equations are solved by Cholesky factorisation.
//! Nothing here reuses the recursive estimate, so it serves as a check on it.

use super::SkSchedule;
use crate::{Error, Real, Result};

/// Linear MMSE estimate of `N_0` from the raw received values `y_1..y_k`.
pub fn mmse_oracle<T: Real>(observations: &[T], schedule: &SkSchedule<T>) -> Result<T> {
    let k = observations.len();
    if k > schedule.rounds() as usize {
        return Err(Error::Config(format!(
            "{k} observations for a {}-round schedule",
            schedule.rounds()
        )));
    }
    if k == 0 {
        return Ok(schedule.noise_mean());
    }
    let sigma2 = schedule.noise_variance();

    // coeffs[j][l]: weight of centred N_l in centred Y_{j+1}.
    // residual[l]: weight of centred N_l in N_0 - N_hat_j.
    let mut coeffs: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut residual = vec![T::zero(); k + 1];
    residual[0] = T::one();
    for j in 0..k {
        let round = j as u32 + 1;
        let gamma = schedule.amplifier_gain(round);
        let mut c: Vec<T> = residual.iter().map(|&r| gamma * r).collect();
        c[j + 1] = c[j + 1] + T::one();
        let gain = schedule.estimator_gain(round);
        for (r, &cl) in residual.iter_mut().zip(&c) {
            *r = *r - gain * cl;
        }
        coeffs.push(c);
    }

    let mut cov = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in 0..=i {
            let dot = coeffs[i]
                .iter()
                .zip(&coeffs[j])
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            cov[i][j] = sigma2 * dot;
            cov[j][i] = cov[i][j];
        }
    }
    let cross: Vec<T> = coeffs.iter().map(|c| sigma2 * c[0]).collect();
    let weights = cholesky_solve(cov, &cross)?;

    let estimate = weights
        .iter()
        .zip(observations)
        .fold(T::zero(), |acc, (&w, &y)| acc + w * schedule.normalize(y));
    Ok(schedule.noise_mean() + estimate)
}

fn cholesky_solve<T: Real>(mut a: Vec<Vec<T>>, b: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    for j in 0..n {
        let d = a[j][..j].iter().fold(a[j][j], |d, &l| d - l * l);
        if d.is_nan() || d <= T::zero() {
            return Err(Error::Internal(format!(
                "observation covariance is singular at row {j}"
            )));
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let s = (0..j).fold(a[i][j], |s, p| s - a[i][p] * a[j][p]);
            a[i][j] = s / d;
        }
    }
    let mut z = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s = s - a[i][p] * z[p];
        }
        z[i] = s / a[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for p in i + 1..n {
            s = s - a[p][i] * x[p];
        }
        x[i] = s / a[i][i];
    }
    Ok(x)
}
