//! Reference values computed without touching the simulator's code paths.
//! Only test targets depend on this crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A series evaluation together with a rigorous bound on the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub remainder_bound: f64,
}

/// `J_n(x)` from the ascending series
/// `Σ_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)`, summed in exact rational
/// arithmetic. `x` is taken as the exact rational value of the `f64`.
///
/// Terms are added until they are alternating, decreasing and below
/// `2^-200` relative to the partial sum; the first omitted term then bounds the remainder.
pub fn bessel_series(order: i64, x: f64) -> SeriesValue {
    let exact = BigRational::from_float(x).expect("finite argument");
    bessel_series_rational(order, &exact)
}

pub fn bessel_series_rational(order: i64, x: &BigRational) -> SeriesValue {
    let n = order.unsigned_abs();
    // J_{-n} = (-1)^n J_n
    let sign = if order < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let half = x / BigRational::from_integer(BigInt::from(2));
    let q = -(&half * &half);

    let mut term = BigRational::one();
    for k in 1..=n {
        term = term * &half / BigRational::from_integer(BigInt::from(k));
    }
    let mut sum = term.clone();
    let tiny = BigRational::new(BigInt::one(), BigInt::one() << 200);
    let x_half = half.abs();
    let mut k: u64 = 1;
    loop {
        term = term * &q / BigRational::from_integer(BigInt::from(k * (k + n)));
        // terms decrease once k (k + n) > (x/2)^2
        let decreasing = BigRational::from_integer(BigInt::from(k * (k + n))) > &x_half * &x_half;
        if term.is_zero() || (decreasing && term.abs() < &tiny * sum.abs()) {
            break;
        }
        sum += &term;
        k += 1;
    }
    SeriesValue {
        value: sign * to_f64(&sum),
        remainder_bound: to_f64(&term.abs()),
    }
}

fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().expect("representable")
}

/// Column of the infinite-lattice propagator computed by brute force: the
/// coupled-mode equations integrated with a very small fixed RK4 step on a
/// wide array. Returned as `(re, im)` pairs for guides `-half_width..=half_width`.
pub fn brute_force_field(
    coupling: f64,
    ramp: f64,
    initial: &[(i64, (f64, f64))],
    z: f64,
    half_width: usize,
    steps: usize,
) -> Vec<(f64, f64)> {
    let n = 2 * half_width + 1;
    let m = half_width as i64;
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for &(j, (r, i)) in initial {
        re[(j + m) as usize] = r;
        im[(j + m) as usize] = i;
    }
    let h = z / steps as f64;
    // da/dz = -i (jβ a + C (a_{j+1} + a_{j-1}))
    let deriv = |re: &[f64], im: &[f64], dre: &mut [f64], dim: &mut [f64]| {
        for idx in 0..n {
            let j = idx as i64 - m;
            let (lr, li) = if idx > 0 { (re[idx - 1], im[idx - 1]) } else { (0.0, 0.0) };
            let (rr, ri) = if idx + 1 < n { (re[idx + 1], im[idx + 1]) } else { (0.0, 0.0) };
            let wr = j as f64 * ramp * re[idx] + coupling * (lr + rr);
            let wi = j as f64 * ramp * im[idx] + coupling * (li + ri);
            dre[idx] = wi;
            dim[idx] = -wr;
        }
    };
    let mut stages = vec![[vec![0.0; n], vec![0.0; n]]; 4];
    let mut tr = vec![0.0; n];
    let mut ti = vec![0.0; n];
    for _ in 0..steps {
        for s in 0..4 {
            let scale = [0.0, 0.5, 0.5, 1.0][s] * h;
            for idx in 0..n {
                if s == 0 {
                    tr[idx] = re[idx];
                    ti[idx] = im[idx];
                } else {
                    tr[idx] = re[idx] + scale * stages[s - 1][0][idx];
                    ti[idx] = im[idx] + scale * stages[s - 1][1][idx];
                }
            }
            let [dre, dim] = &mut stages[s];
            deriv(&tr, &ti, dre, dim);
        }
        for idx in 0..n {
            re[idx] += h / 6.0 * (stages[0][0][idx] + 2.0 * stages[1][0][idx] + 2.0 * stages[2][0][idx] + stages[3][0][idx]);
            im[idx] += h / 6.0 * (stages[0][1][idx] + 2.0 * stages[1][1][idx] + 2.0 * stages[2][1][idx] + stages[3][1][idx]);
        }
    }
    re.into_iter().zip(im).collect()
}
