//! LLL reduction and Babai nearest-plane rounding in double precision.
//!
//! Only used heuristically: every candidate produced here is re-verified
//! with exact phase arithmetic by the caller.

pub(crate) type Row = Vec<f64>;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(b: &[Row]) -> (Vec<Row>, Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut star: Vec<Row> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = if norms[j] > 0.0 { dot(&b[i], &star[j]) / norms[j] } else { 0.0 };
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        norms[i] = dot(&v, &v);
        star.push(v);
    }
    (star, mu, norms)
}

/// In-place LLL reduction with parameter 3/4.
pub(crate) fn lll(b: &mut [Row]) {
    let n = b.len();
    if n < 2 {
        return;
    }
    let delta = 0.75;
    let mut k = 1;
    let mut guard = 0usize;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu, _) = gram_schmidt(b);
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
            }
        }
        let (_, mu, norms) = gram_schmidt(b);
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
}

/// Lattice vector close to `target` by nearest-plane rounding.
pub(crate) fn babai(b: &[Row], target: &[f64]) -> Row {
    let (star, _, norms) = gram_schmidt(b);
    let mut rest = target.to_vec();
    let mut out = vec![0.0; target.len()];
    for i in (0..b.len()).rev() {
        if norms[i] == 0.0 {
            continue;
        }
        let c = (dot(&rest, &star[i]) / norms[i]).round();
        for ((r, o), bi) in rest.iter_mut().zip(out.iter_mut()).zip(&b[i]) {
            *r -= c * bi;
            *o += c * bi;
        }
    }
    out
}
