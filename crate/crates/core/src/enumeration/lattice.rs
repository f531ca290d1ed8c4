//! Integral LLL reduction and short-vector enumeration for small integer lattices.
//!
//! The reduction follows the all-integer variant (exact subdeterminants d_i and
//! scaled Gram–Schmidt coefficients λ_{k,j}), so no rounding enters the basis.
//! Enumeration then runs Fincke–Pohst in f64 on the reduced basis with a slack
//! radius; callers filter every returned vector exactly.

use rug::ops::DivRounding;
use rug::Integer;

pub type Row = Vec<Integer>;

fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    a.iter().zip(b).map(|(x, y)| Integer::from(x * y)).sum()
}

fn sub_mul(a: &mut [Integer], b: &[Integer], q: &Integer) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= Integer::from(q * y);
    }
}

/// Nearest integer to num/den (den > 0), halves rounded up.
fn round_div(num: &Integer, den: &Integer) -> Integer {
    let twice = Integer::from(num * 2u32) + den;
    twice.div_floor(Integer::from(den * 2u32))
}

/// LLL-reduces `basis` (rows, linearly independent) with parameter 3/4.
/// Returns the reduced rows and the unimodular U with reduced = U · basis.
pub fn lll_reduce(basis: &[Row]) -> (Vec<Row>, Vec<Row>) {
    let n = basis.len();
    let mut b: Vec<Row> = basis.to_vec();
    let mut h: Vec<Row> = (0..n)
        .map(|i| (0..n).map(|j| Integer::from((i == j) as u32)).collect())
        .collect();
    if n == 0 {
        return (b, h);
    }
    // d[0] = 1, d[i+1] = det of the Gram matrix of the first i+1 rows
    let mut d: Vec<Integer> = vec![Integer::from(1); n + 1];
    let mut lam: Vec<Vec<Integer>> = vec![vec![Integer::new(); n]; n];
    d[1] = dot(&b[0], &b[0]);
    assert!(d[1] != 0, "zero basis vector");
    let mut k = 1usize;
    let mut kmax = 0usize;

    let redi = |k: usize, l: usize, b: &mut Vec<Row>, h: &mut Vec<Row>, lam: &mut Vec<Vec<Integer>>, d: &[Integer]| {
        let twice = Integer::from(&lam[k][l] * 2u32).abs();
        if twice > d[l + 1] {
            let q = round_div(&lam[k][l], &d[l + 1]);
            let (bl, hl) = (b[l].clone(), h[l].clone());
            sub_mul(&mut b[k], &bl, &q);
            sub_mul(&mut h[k], &hl, &q);
            lam[k][l] -= Integer::from(&q * &d[l + 1]);
            for i in 0..l {
                let t = Integer::from(&q * &lam[l][i]);
                lam[k][i] -= t;
            }
        }
    };

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 0..j {
                    u = (Integer::from(&d[i + 1] * &u) - Integer::from(&lam[k][i] * &lam[j][i])).div_exact(&d[i]);
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    assert!(u != 0, "linearly dependent basis");
                    d[k + 1] = u;
                }
            }
        }
        loop {
            redi(k, k - 1, &mut b, &mut h, &mut lam, &d);
            // Lovász test: 4·d_{k+1}·d_{k-1} < 3·d_k² − 4·λ²
            let lhs = Integer::from(&d[k + 1] * &d[k - 1]) * 4u32;
            let rhs = Integer::from(d[k].square_ref()) * 3u32 - Integer::from(lam[k][k - 1].square_ref()) * 4u32;
            if lhs < rhs {
                b.swap(k, k - 1);
                h.swap(k, k - 1);
                for j in 0..k.saturating_sub(1) {
                    let t = std::mem::take(&mut lam[k][j]);
                    lam[k][j] = std::mem::replace(&mut lam[k - 1][j], t);
                }
                let l = lam[k][k - 1].clone();
                let bb = (Integer::from(&d[k - 1] * &d[k + 1]) + Integer::from(l.square_ref())).div_exact(&d[k]);
                for i in k + 1..=kmax {
                    let t = lam[i][k].clone();
                    lam[i][k] = (Integer::from(&d[k + 1] * &lam[i][k - 1]) - Integer::from(&l * &t)).div_exact(&d[k]);
                    lam[i][k - 1] = (Integer::from(&bb * &t) + Integer::from(&l * &lam[i][k])).div_exact(&d[k + 1]);
                }
                d[k] = bb;
                if k > 1 {
                    k -= 1;
                }
                continue;
            }
            for l in (0..k.saturating_sub(1)).rev() {
                redi(k, l, &mut b, &mut h, &mut lam, &d);
            }
            k += 1;
            break;
        }
    }
    (b, h)
}

/// Determinant of a square integer matrix (small sizes only).
pub fn det(m: &[Row]) -> Integer {
    match m.len() {
        0 => Integer::from(1),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Integer::new();
            for col in 0..n {
                let minor: Vec<Row> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = Integer::from(&m[0][col] * &det(&minor));
                if col % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

/// All coefficient vectors x (w.r.t. `basis`) with |x·basis|² ≤ radius2, possibly with a
/// few extra vectors just outside (slack for float error). Includes 0 and both signs.
pub fn short_vectors(basis: &[Row], radius2: &Integer) -> Vec<Vec<Integer>> {
    let n = basis.len();
    let (red, u) = lll_reduce(basis);
    debug_assert_eq!(det(&red).abs(), det(basis).abs());
    // normalize by 2^s so the radius is about 1
    let s = (radius2.significant_bits() / 2) as i32;
    let to_f = |x: &Integer| -> f64 {
        let f = rug::Float::with_val(64, x);
        (f >> s).to_f64()
    };
    let bf: Vec<Vec<f64>> = red.iter().map(|r| r.iter().map(to_f).collect()).collect();
    let r2 = {
        let f = rug::Float::with_val(64, radius2);
        (f >> (2 * s)).to_f64() * (1.0 + 1e-6) + 1e-9
    };
    // Gram–Schmidt
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0f64; n]; n];
    let mut bn = vec![0.0f64; n];
    for i in 0..n {
        let mut v = bf[i].clone();
        for j in 0..i {
            let m = bf[i].iter().zip(&bstar[j]).map(|(a, b)| a * b).sum::<f64>() / bn[j];
            mu[i][j] = m;
            for (x, y) in v.iter_mut().zip(&bstar[j]) {
                *x -= m * y;
            }
        }
        bn[i] = v.iter().map(|x| x * x).sum();
        bstar.push(v);
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    enumerate_level(n, n, &mu, &bn, r2, 0.0, &mut x, &mut out);
    // back to coefficients in the input basis: x·red = (x·U)·basis
    out.into_iter()
        .map(|xr: Vec<i64>| {
            (0..n)
                .map(|j| (0..n).map(|i| Integer::from(&u[i][j] * xr[i])).sum::<Integer>())
                .collect()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    n: usize,
    level: usize,
    mu: &[Vec<f64>],
    bn: &[f64],
    r2: f64,
    used: f64,
    x: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if level == 0 {
        out.push(x.clone());
        return;
    }
    let i = level - 1;
    let c: f64 = -(i + 1..n).map(|j| x[j] as f64 * mu[j][i]).sum::<f64>();
    let rem = r2 - used;
    if rem < 0.0 {
        return;
    }
    let span = (rem / bn[i]).sqrt();
    let lo = (c - span).ceil() as i64;
    let hi = (c + span).floor() as i64;
    for v in lo..=hi {
        x[i] = v;
        let t = v as f64 - c;
        enumerate_level(n, level - 1, mu, bn, r2, used + t * t * bn[i], x, out);
    }
    x[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[&[i64]]) -> Vec<Row> {
        v.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect()
    }

    fn combine(x: &[Integer], basis: &[Row]) -> Row {
        let n = basis[0].len();
        (0..n).map(|j| x.iter().zip(basis).map(|(c, r)| Integer::from(c * &r[j])).sum()).collect()
    }

    #[test]
    fn reduction_preserves_lattice() {
        let b = rows(&[&[1, 0, 0], &[4, 1, 0], &[7, 3, 1]]);
        let (red, u) = lll_reduce(&b);
        assert_eq!(det(&u).abs(), 1);
        for (row, urow) in red.iter().zip(&u) {
            assert_eq!(row, &combine(urow, &b));
        }
        // unimodular lattice reduces to unit-length vectors
        for row in &red {
            assert_eq!(dot(row, row), 1);
        }
    }

    #[test]
    fn reduction_on_skewed_basis() {
        let b = rows(&[&[1, 0, 1_000_003], &[0, 1, 7_777_777], &[0, 0, 99_999_989]]);
        let (red, u) = lll_reduce(&b);
        assert_eq!(det(&red).abs(), det(&b).abs());
        assert_eq!(det(&u).abs(), 1);
        let longest = red.iter().map(|r| dot(r, r)).max().unwrap();
        assert!(longest < Integer::from(10u64.pow(12)));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let b = rows(&[&[3, 1, 0], &[1, 4, 2], &[0, 2, 5]]);
        let r2 = Integer::from(60);
        let mut got: Vec<Row> = short_vectors(&b, &r2)
            .iter()
            .map(|x| combine(x, &b))
            .filter(|v| dot(v, v) <= r2)
            .collect();
        got.sort();
        let mut want = Vec::new();
        for i in -20i64..=20 {
            for j in -20i64..=20 {
                for k in -20i64..=20 {
                    let x = vec![Integer::from(i), Integer::from(j), Integer::from(k)];
                    let v = combine(&x, &b);
                    if dot(&v, &v) <= r2 {
                        want.push(v);
                    }
                }
            }
        }
        want.sort();
        assert_eq!(got, want);
    }
}
