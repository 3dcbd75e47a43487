use super::Scalar;

/// Dense row-major matrix, just enough for small least-squares problems.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|r| (0..self.cols).fold(T::zero(), |acc, c| acc + self.get(r, c) * x[c]))
            .collect()
    }
}

/// Minimizes ‖A·x − y‖₂ by Householder QR on unit-norm-scaled columns.
/// Returns `None` when A is (numerically) rank deficient.
pub fn lstsq<T: Scalar>(a: &Matrix<T>, y: &[T]) -> Option<Vec<T>> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(y.len(), m);
    if m < n || n == 0 {
        return None;
    }
    // column-major working copy
    let mut q: Vec<Vec<T>> = (0..n).map(|c| (0..m).map(|r| a.get(r, c)).collect()).collect();
    let mut scale = vec![T::one(); n];
    for (c, col) in q.iter_mut().enumerate() {
        let norm = norm2(col);
        if !(norm > T::zero()) || !norm.is_finite() {
            return None;
        }
        scale[c] = norm;
        for v in col.iter_mut() {
            *v = *v / norm;
        }
    }
    let mut b = y.to_vec();
    let mut diag = vec![T::zero(); n];
    for k in 0..n {
        let norm = norm2(&q[k][k..]);
        if norm == T::zero() {
            return None;
        }
        let alpha = if q[k][k] > T::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in place of column k
        q[k][k] = q[k][k] - alpha;
        let vnorm2 = q[k][k..].iter().fold(T::zero(), |s, &v| s + v * v);
        diag[k] = alpha;
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::one() + T::one();
        for j in (k + 1)..n {
            let dot = (k..m).fold(T::zero(), |s, i| s + q[k][i] * q[j][i]);
            let f = two * dot / vnorm2;
            for i in k..m {
                let v = q[k][i];
                q[j][i] = q[j][i] - f * v;
            }
        }
        let dot = (k..m).fold(T::zero(), |s, i| s + q[k][i] * b[i]);
        let f = two * dot / vnorm2;
        for i in k..m {
            b[i] = b[i] - f * q[k][i];
        }
    }
    let rmax = diag.iter().fold(T::zero(), |acc, d| acc.max(d.abs()));
    let tol = rmax * T::epsilon() * T::from_usize(m.max(n) * 16).unwrap();
    if diag.iter().any(|d| d.abs() <= tol) {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s = s - q[j][k] * x[j];
        }
        x[k] = s / diag[k];
    }
    for (xi, s) in x.iter_mut().zip(&scale) {
        *xi = *xi / *s;
    }
    Some(x)
}

/// `lstsq` followed by one round of iterative refinement on the residual.
pub fn lstsq_refined<T: Scalar>(a: &Matrix<T>, y: &[T]) -> Option<Vec<T>> {
    let mut x = lstsq(a, y)?;
    let fitted = a.mul_vec(&x);
    let r: Vec<T> = y.iter().zip(&fitted).map(|(&yi, &fi)| yi - fi).collect();
    // The residual of a least-squares solution is orthogonal to range(A);
    // solving for it again recovers the part of x lost to rounding.
    if let Some(dx) = lstsq(a, &r) {
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi = *xi + d;
        }
    }
    Some(x)
}

fn norm2<T: Scalar>(v: &[T]) -> T {
    let big = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if big == T::zero() || !big.is_finite() {
        return big;
    }
    let s = v.iter().fold(T::zero(), |acc, &x| {
        let t = x / big;
        acc + t * t
    });
    big * s.sqrt()
}
