//! Exact linear algebra over the rationals for small symmetric matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type RatMatrix = Vec<Vec<BigRational>>;

/// Rescales a rational matrix to integers by the common denominator `L`.
pub fn to_integer(a: &RatMatrix) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut l = BigInt::one();
    for row in a {
        for x in row {
            l = l.lcm(x.denom());
        }
    }
    let m = a
        .iter()
        .map(|row| row.iter().map(|x| (x * &l).to_integer()).collect())
        .collect();
    (m, l)
}

/// Fraction-free determinant of an integer matrix.
pub fn bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let r = m.len();
    if r == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..r - 1 {
        if m[k][k].is_zero() {
            match (k + 1..r).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..r {
            for j in k + 1..r {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[r - 1][r - 1]
}

pub fn determinant(a: &RatMatrix) -> BigRational {
    let r = a.len();
    let (m, l) = to_integer(a);
    BigRational::new(bareiss(m), num_traits::pow(l, r))
}

/// Characteristic polynomial `det(xI − A)` as coefficients from `x^r` down
/// to the constant term (Faddeev–LeVerrier).
pub fn characteristic_polynomial(a: &RatMatrix) -> Vec<BigRational> {
    let r = a.len();
    let mut coeffs = vec![BigRational::one()];
    let mut mk: RatMatrix = vec![vec![BigRational::zero(); r]; r];
    for k in 1..=r {
        // M_k = A M_{k−1} + c_{k−1} I
        let c_prev = coeffs[k - 1].clone();
        let mut next = mul(a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c_prev;
        }
        mk = next;
        let am = mul(a, &mk);
        let tr: BigRational = (0..r).map(|i| am[i][i].clone()).sum();
        coeffs.push(-tr / BigInt::from(k));
    }
    coeffs
}

fn mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let r = a.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    (0..r)
                        .filter(|&k| !a[i][k].is_zero() && !b[k][j].is_zero())
                        .map(|k| &a[i][k] * &b[k][j])
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Number of negative roots of a polynomial whose roots are all real, from
/// the sign changes of `p(−x)`.
pub fn negative_root_count<T: Signed>(coeffs: &[T]) -> usize {
    let deg = coeffs.len() - 1;
    let signs: Vec<bool> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| c.is_positive() ^ ((deg - i) % 2 == 1))
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

pub fn submatrix<T: Clone>(a: &[Vec<T>], idx: &[usize]) -> Vec<Vec<T>> {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| a[i][j].clone()).collect())
        .collect()
}

/// Principal minors of an integer matrix over `sets`, and the
/// characteristic polynomial `det(xI − A)` when `sets` covers every subset.
pub fn principal_minors(a: &[Vec<BigInt>], sets: &[Vec<usize>]) -> Vec<BigInt> {
    sets.iter().map(|idx| bareiss(submatrix(a, idx))).collect()
}

/// `det(xI − A)` from the sums `E_k` of all `k × k` principal minors:
/// the coefficient of `x^{r−k}` is `(−1)^k E_k`.
pub fn charpoly_from_minors(r: usize, sets: &[Vec<usize>], minors: &[BigInt]) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); r + 1];
    e[0] = BigInt::one();
    for (idx, d) in sets.iter().zip(minors) {
        e[idx.len()] += d;
    }
    e.into_iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { v } else { -v })
        .collect()
}

/// Index sets of the principal minors examined: all of them up to
/// dimension 4, otherwise the leading ones.
pub fn principal_minor_sets(r: usize) -> Vec<Vec<usize>> {
    if r <= 4 {
        (1..1u32 << r)
            .map(|mask| (0..r).filter(|b| mask & (1 << b) != 0).collect())
            .collect()
    } else {
        (1..=r).map(|k| (0..k).collect()).collect()
    }
}
