//! Integer lattices: Smith normal form invariants and saturation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Nonzero invariant factors of the integer matrix `m` (rows are
/// generators), in divisibility order.
pub fn invariant_factors(m: &[Vec<i64>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pick the entry of least absolute value in the remaining block.
        let Some((pr, pc)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            break;
        };
        a.swap(t, pr);
        for r in a.iter_mut() {
            r.swap(t, pc);
        }
        loop {
            let mut done = true;
            for i in t + 1..rows {
                let q = a[i][t].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for j in t..cols {
                        let v = &a[t][j] * &q;
                        a[i][j] -= v;
                    }
                }
                if !a[i][t].is_zero() {
                    done = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for i in t..rows {
                        let v = &a[i][t] * &q;
                        a[i][j] -= v;
                    }
                }
                if !a[t][j].is_zero() {
                    done = false;
                }
            }
            if done {
                // The pivot must divide the rest of the block.
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&a[i][j] % &a[t][t]).is_zero());
                match bad {
                    Some((i, _)) => {
                        for j in t..cols {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                        }
                    }
                    None => break,
                }
            }
            // Move the smallest entry of the pivot row/column to the pivot.
            let best_r = (t..rows).filter(|&i| !a[i][t].is_zero()).min_by_key(|&i| a[i][t].abs());
            if let Some(i) = best_r {
                a.swap(t, i);
            }
            let best_c = (t..cols).filter(|&j| !a[t][j].is_zero()).min_by_key(|&j| a[t][j].abs());
            if let Some(j) = best_c {
                for r in a.iter_mut() {
                    r.swap(t, j);
                }
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

/// Whether the lattice spanned by the rows equals its saturation
/// `(L ⊗ ℚ) ∩ ℤⁿ`.
pub fn is_saturated(m: &[Vec<i64>]) -> bool {
    invariant_factors(m).iter().all(|d| *d == BigInt::from(1))
}

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_invariants() {
        let f = invariant_factors(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(f, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        assert!(is_saturated(&[vec![3, -2]]));
        assert!(!is_saturated(&[vec![2, -2]]));
        assert!(is_saturated(&[vec![1, 1, -2]]));
        assert!(invariant_factors(&[vec![0, 0]]).is_empty());
    }
}
