//! Exact rational solving for small chains, used as a test oracle.
//!
//! Probabilities are converted from `f64` without rounding, so results are
//! the exact values of the chain as stored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::model::{Mc, TargetSet};

pub fn rational(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite probability")
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn can_reach(mc: &Mc, goal: &[bool], through: impl Fn(usize) -> bool) -> Vec<bool> {
    let n = mc.state_count();
    let mut mark = goal.to_vec();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !mark[s] && through(s) && mc.row(s).iter().any(|&(t, _)| mark[t]) {
                mark[s] = true;
                changed = true;
            }
        }
        if !changed {
            return mark;
        }
    }
}

/// Solves `A x = b` by Gauss-Jordan elimination. `None` if singular.
pub fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = BigRational::one() / a[col][col].clone();
        for j in col..m {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..m {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..m {
                let d = &f * &a[col][j];
                a[r][j] -= d;
            }
            let d = &f * &b[col];
            b[r] -= d;
        }
    }
    Some(b)
}

fn solve_on(mc: &Mc, unknown: &[usize], rhs: impl Fn(usize) -> BigRational) -> Vec<BigRational> {
    let n = mc.state_count();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let m = unknown.len();
    let mut a = vec![vec![BigRational::zero(); m]; m];
    let mut b = Vec::with_capacity(m);
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = BigRational::one();
        for &(t, p) in mc.row(s) {
            if index[t] != usize::MAX {
                a[i][index[t]] -= rational(p);
            }
        }
        b.push(rhs(s));
    }
    solve(a, b).expect("nonsingular transient system")
}

pub fn exact_reach(mc: &Mc, t: &TargetSet) -> Vec<BigRational> {
    let n = mc.state_count();
    let positive = can_reach(mc, &t.mask, |_| true);
    let zero: Vec<bool> = positive.iter().map(|p| !p).collect();
    let escape = can_reach(mc, &zero, |s| !t.mask[s]);
    let one: Vec<bool> = escape.iter().map(|e| !e).collect();
    let unknown: Vec<usize> = (0..n).filter(|&s| !zero[s] && !one[s]).collect();
    let x = solve_on(mc, &unknown, |s| {
        mc.row(s).iter().filter(|&&(u, _)| one[u]).map(|&(_, p)| rational(p)).sum()
    });
    let mut out = vec![BigRational::zero(); n];
    for s in 0..n {
        if one[s] {
            out[s] = BigRational::one();
        }
    }
    for (i, &s) in unknown.iter().enumerate() {
        out[s] = x[i].clone();
    }
    out
}

/// Expected reward before reaching the target; `None` stands for infinity.
pub fn exact_reward(mc: &Mc, t: &TargetSet) -> Vec<Option<BigRational>> {
    let n = mc.state_count();
    let positive = can_reach(mc, &t.mask, |_| true);
    let zero: Vec<bool> = positive.iter().map(|p| !p).collect();
    let escape = can_reach(mc, &zero, |s| !t.mask[s]);
    let unknown: Vec<usize> = (0..n).filter(|&s| !escape[s] && !t.mask[s]).collect();
    let x = solve_on(mc, &unknown, |s| rational(mc.reward(s)));
    let mut out: Vec<Option<BigRational>> = (0..n).map(|s| t.mask[s].then(BigRational::zero)).collect();
    for (i, &s) in unknown.iter().enumerate() {
        out[s] = Some(x[i].clone());
    }
    out
}

/// Exact comparison `a <= b + c + slack` (or `<` with `-slack`), where `None`
/// is infinity. Mirrors the floating-point comparison semantics.
pub fn exact_cmp(a: &Option<BigRational>, b: &Option<BigRational>, c: f64, strict: bool, slack: f64) -> bool {
    match (a, b) {
        (None, None) => !strict,
        (None, Some(_)) => false,
        (Some(_), None) => true,
        (Some(a), Some(b)) => {
            let rhs = b + rational(c);
            if strict {
                a < &(rhs - rational(slack))
            } else {
                a <= &(rhs + rational(slack))
            }
        }
    }
}

pub fn abs_diff(a: &BigRational, b: f64) -> f64 {
    to_f64(&(a - rational(b)).abs())
}

pub fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}
