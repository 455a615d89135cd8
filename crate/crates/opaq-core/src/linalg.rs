//! Exact dense linear solving over the rationals.
//!
//! The chain and policy-evaluation systems solved here are small (reachable
//! transient states of a desk-scale chain), so plain Gaussian elimination
//! with exact pivots is both simple and fast enough.

use num_rational::BigRational;
use num_traits::Zero;

/// Solves `A x = b` by Gaussian elimination with exact arithmetic.
///
/// `a` is a square row-major matrix, consumed along with `b`.  Returns `None`
/// when the matrix is singular.  Pivot choice is the first row with a
/// non-zero entry, which keeps the procedure fully deterministic; with exact
/// arithmetic there is no numerical reason to prefer any other pivot.
pub fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut().skip(col) {
            *v *= &inv;
        }
        b[col] *= &inv;
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut a[row][col], BigRational::zero());
            for c in (col + 1)..n {
                let sub = &factor * &a[col][c];
                a[row][c] -= sub;
            }
            let sub = &factor * &b[col];
            b[row] -= sub;
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn solves_two_by_two() {
        // x + y = 1, x - y = 1/2  =>  x = 3/4, y = 1/4.
        let a = vec![vec![r(1, 1), r(1, 1)], vec![r(1, 1), r(-1, 1)]];
        let b = vec![r(1, 1), r(1, 2)];
        assert_eq!(solve(a, b).unwrap(), vec![r(3, 4), r(1, 4)]);
    }

    #[test]
    fn reports_singular() {
        let a = vec![vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(4, 1)]];
        let b = vec![r(1, 1), r(2, 1)];
        assert!(solve(a, b).is_none());
    }

    #[test]
    fn solves_identity_like_permutation() {
        // Needs a row swap before elimination can start.
        let a = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]];
        let b = vec![r(5, 7), r(2, 3)];
        assert_eq!(solve(a, b).unwrap(), vec![r(2, 3), r(5, 7)]);
    }
}
