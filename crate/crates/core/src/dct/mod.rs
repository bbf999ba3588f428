//! Orthonormal DCT-II in one, two and three dimensions.
//!
//! Every transform is separable, so all of them reduce to applying a 1D
//! transform along one axis. That 1D step either multiplies by the cached
//! basis matrix or runs the FFT kernel; the two agree to rounding error and
//! [`DctPath::Auto`] picks one by lane length.

mod basis;
mod fast;

use ndarray::{Array, Array1, Array2, Array3, ArrayView1, ArrayView2, Axis, Dimension};

pub use basis::{alpha, make_basis, plan, CosineBasis, DctPlan, FFT_MIN_LEN};

use crate::error::{Error, Result};

/// Which 1D kernel a transform uses along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DctPath {
    /// FFT for lanes of at least [`FFT_MIN_LEN`] samples, matrix product below.
    #[default]
    Auto,
    Matrix,
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// A real third-order tensor with strictly positive dimensions and finite
/// entries, indexed `(i, j, k)` with `k` the temporal axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3(Array3<f64>);

impl Tensor3 {
    pub fn new(values: Array3<f64>) -> Result<Self> {
        if values.shape().contains(&0) {
            return Err(Error::ZeroDimension);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Tensor3(values.as_standard_layout().into_owned()))
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Result<Self> {
        Tensor3::new(Array3::zeros(dims))
    }

    /// Stacks equally sized matrices along the third axis.
    pub fn from_slices<'a, I>(slices: I) -> Result<Self>
    where
        I: IntoIterator<Item = ArrayView2<'a, f64>>,
    {
        let slices: Vec<_> = slices.into_iter().collect();
        let first = slices.first().ok_or(Error::ZeroDimension)?;
        let (n1, n2) = first.dim();
        let mut out = Array3::zeros((n1, n2, slices.len()));
        for (k, s) in slices.iter().enumerate() {
            if s.dim() != (n1, n2) {
                return Err(Error::DimensionMismatch {
                    expected: vec![n1, n2],
                    found: s.shape().to_vec(),
                });
            }
            out.index_axis_mut(Axis(2), k).assign(s);
        }
        Tensor3::new(out)
    }

    pub(crate) fn from_array_unchecked(values: Array3<f64>) -> Self {
        debug_assert!(values.is_standard_layout());
        Tensor3(values)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.0.dim()
    }

    pub fn as_array(&self) -> &Array3<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array3<f64> {
        self.0
    }

    /// The `k`-th frame along the third axis.
    pub fn slice(&self, k: usize) -> ArrayView2<'_, f64> {
        self.0.index_axis(Axis(2), k)
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Mode-`m` product `t x_m phi` for `m` in `1..=3`: contracts axis `m` of
/// `t` (length `I_m`) with the columns of the `J_m x I_m` matrix `phi`.
pub fn mode_product(t: &Tensor3, m: usize, phi: &Array2<f64>) -> Result<Tensor3> {
    if !(1..=3).contains(&m) {
        return Err(Error::InvalidMode(m));
    }
    let axis = Axis(m - 1);
    let len = t.0.len_of(axis);
    if phi.ncols() != len {
        return Err(Error::DimensionMismatch {
            expected: vec![phi.nrows(), len],
            found: phi.shape().to_vec(),
        });
    }
    if phi.nrows() == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut shape = [t.0.dim().0, t.0.dim().1, t.0.dim().2];
    shape[m - 1] = phi.nrows();
    let mut out = Array3::zeros(shape);
    for (src, mut dst) in t.0.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        dst.assign(&phi.dot(&src));
    }
    Ok(Tensor3(out))
}

fn apply_lanes(plan: &DctPlan, lanes: &mut [f64], dir: Direction, path: DctPath) {
    let use_fft = match path {
        DctPath::Auto => plan.prefers_fft(),
        DctPath::Matrix => false,
        DctPath::Fft => true,
    };
    if use_fft {
        match dir {
            Direction::Forward => plan.fft().forward(lanes),
            Direction::Inverse => plan.fft().inverse(lanes),
        }
        return;
    }
    let n = plan.len();
    let view = ArrayView2::from_shape((lanes.len() / n, n), lanes).expect("lane buffer shape");
    let b = plan.basis().matrix();
    let out = match dir {
        Direction::Forward => view.dot(&b.t()),
        Direction::Inverse => view.dot(b),
    };
    lanes.copy_from_slice(out.as_slice().expect("dot output is contiguous"));
}

/// Applies the 1D transform to every lane of `a` along `axis`, in place.
fn transform_axis<D: Dimension>(
    a: &mut Array<f64, D>,
    axis: usize,
    dir: Direction,
    path: DctPath,
) -> Result<()> {
    let n = a.len_of(Axis(axis));
    let plan = plan(n)?;
    if axis + 1 == a.ndim() {
        if let Some(flat) = a.as_slice_mut() {
            apply_lanes(&plan, flat, dir, path);
            return Ok(());
        }
    }
    let mut buf = Vec::with_capacity(a.len());
    for lane in a.lanes(Axis(axis)) {
        buf.extend(lane.iter().copied());
    }
    apply_lanes(&plan, &mut buf, dir, path);
    for (mut lane, chunk) in a.lanes_mut(Axis(axis)).into_iter().zip(buf.chunks_exact(n)) {
        lane.iter_mut().zip(chunk).for_each(|(d, s)| *d = *s);
    }
    Ok(())
}

fn transform_all<D: Dimension>(
    mut a: Array<f64, D>,
    dir: Direction,
    path: DctPath,
) -> Result<Array<f64, D>> {
    for axis in 0..a.ndim() {
        transform_axis(&mut a, axis, dir, path)?;
    }
    Ok(a)
}

/// Forward DCT of a 1D signal, `A1 f`.
pub fn dct1(f: ArrayView1<f64>) -> Array1<f64> {
    dct1_with(f, DctPath::Auto)
}

/// Inverse DCT of a 1D coefficient vector, `A1^T c`.
pub fn idct1(c: ArrayView1<f64>) -> Array1<f64> {
    idct1_with(c, DctPath::Auto)
}

pub fn dct1_with(f: ArrayView1<f64>, path: DctPath) -> Array1<f64> {
    if f.is_empty() {
        return Array1::zeros(0);
    }
    transform_all(f.to_owned(), Direction::Forward, path).expect("non-empty signal")
}

pub fn idct1_with(c: ArrayView1<f64>, path: DctPath) -> Array1<f64> {
    if c.is_empty() {
        return Array1::zeros(0);
    }
    transform_all(c.to_owned(), Direction::Inverse, path).expect("non-empty signal")
}

/// Forward 2D DCT, `A1 F A2^T`.
pub fn dct2(f: ArrayView2<f64>) -> Array2<f64> {
    dct2_with(f, DctPath::Auto)
}

/// Inverse 2D DCT, `A1^T C A2`.
pub fn idct2(c: ArrayView2<f64>) -> Array2<f64> {
    idct2_with(c, DctPath::Auto)
}

pub fn dct2_with(f: ArrayView2<f64>, path: DctPath) -> Array2<f64> {
    if f.is_empty() {
        return Array2::zeros(f.dim());
    }
    if path == DctPath::Matrix {
        let (a1, a2) = row_col_plans(f.dim());
        return a1.basis().matrix().dot(&f).dot(&a2.basis().matrix().t());
    }
    transform_all(f.as_standard_layout().into_owned(), Direction::Forward, path)
        .expect("non-empty matrix")
}

pub fn idct2_with(c: ArrayView2<f64>, path: DctPath) -> Array2<f64> {
    if c.is_empty() {
        return Array2::zeros(c.dim());
    }
    if path == DctPath::Matrix {
        let (a1, a2) = row_col_plans(c.dim());
        return a1.basis().matrix().t().dot(&c).dot(a2.basis().matrix());
    }
    transform_all(c.as_standard_layout().into_owned(), Direction::Inverse, path)
        .expect("non-empty matrix")
}

fn row_col_plans(dim: (usize, usize)) -> (std::sync::Arc<DctPlan>, std::sync::Arc<DctPlan>) {
    (
        plan(dim.0).expect("non-zero rows"),
        plan(dim.1).expect("non-zero cols"),
    )
}

/// Forward 3D DCT, `F x1 A1 x2 A2 x3 A3`.
pub fn dct3(t: &Tensor3) -> Tensor3 {
    dct3_with(t, DctPath::Auto)
}

/// Inverse 3D DCT, `C x1 A1^T x2 A2^T x3 A3^T`.
pub fn idct3(c: &Tensor3) -> Tensor3 {
    idct3_with(c, DctPath::Auto)
}

pub fn dct3_with(t: &Tensor3, path: DctPath) -> Tensor3 {
    if path == DctPath::Matrix {
        return mode_chain(t, |n| plan(n).unwrap().basis().matrix().clone());
    }
    Tensor3(transform_all(t.0.clone(), Direction::Forward, path).expect("valid tensor"))
}

pub fn idct3_with(c: &Tensor3, path: DctPath) -> Tensor3 {
    if path == DctPath::Matrix {
        return mode_chain(c, |n| plan(n).unwrap().basis().matrix().t().to_owned());
    }
    Tensor3(transform_all(c.0.clone(), Direction::Inverse, path).expect("valid tensor"))
}

fn mode_chain(t: &Tensor3, matrix_for: impl Fn(usize) -> Array2<f64>) -> Tensor3 {
    let (n1, n2, n3) = t.dims();
    let step1 = mode_product(t, 1, &matrix_for(n1)).expect("square basis");
    let step2 = mode_product(&step1, 2, &matrix_for(n2)).expect("square basis");
    mode_product(&step2, 3, &matrix_for(n3)).expect("square basis")
}

/// Forward DCT of every contiguous length-`n` chunk of `lanes`, in place.
pub(crate) fn dct_lanes(lanes: &mut [f64], n: usize, path: DctPath) -> Result<()> {
    let plan = plan(n)?;
    apply_lanes(&plan, lanes, Direction::Forward, path);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_tensor(rng: &mut ChaCha8Rng, dims: (usize, usize, usize)) -> Tensor3 {
        Tensor3::new(Array::from_shape_fn(dims, |_| rng.random_range(-1.0..1.0))).unwrap()
    }

    fn naive_dct1(f: &[f64]) -> Vec<f64> {
        let n = f.len();
        (0..n)
            .map(|u| {
                let s: f64 = (0..n)
                    .map(|x| f[x] * (PI * (2 * x + 1) as f64 * u as f64 / (2 * n) as f64).cos())
                    .sum();
                alpha(u, n) * s
            })
            .collect()
    }

    #[test]
    fn dct1_constant_and_zero() {
        let c = dct1(array![1.0, 1.0, 1.0, 1.0].view());
        assert!((c[0] - 2.0).abs() < 1e-12);
        assert!(c.iter().skip(1).all(|v| v.abs() < 1e-12));
        assert!(dct1(Array1::zeros(6).view()).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dct1_matches_naive_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let expect = naive_dct1(&f);
        for path in [DctPath::Matrix, DctPath::Fft, DctPath::Auto] {
            let got = dct1_with(ArrayView1::from(&f), path);
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-10, "{path:?}");
            }
        }
    }

    #[test]
    fn fft_and_matrix_agree_n30_and_n1() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = Array1::from_shape_fn(30, |_| rng.random_range(-1.0..1.0));
        let a = dct1_with(f.view(), DctPath::Fft);
        let b = dct1_with(f.view(), DctPath::Matrix);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));

        let one = array![0.37];
        assert_eq!(dct1_with(one.view(), DctPath::Fft)[0], 0.37);
        assert_eq!(idct1_with(one.view(), DctPath::Fft)[0], 0.37);
    }

    #[test]
    fn dct2_all_ones_2x2() {
        let c = dct2(Array2::ones((2, 2)).view());
        assert!((c[[0, 0]] - 2.0).abs() < 1e-12);
        assert!(c.iter().skip(1).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dct2_round_trip_30x30_and_fft_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Array2::from_shape_fn((30, 30), |_| rng.random_range(0.0..1.0));
        let c = dct2(f.view());
        let back = idct2(c.view());
        assert!(back.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-9));
        let m = dct2_with(f.view(), DctPath::Matrix);
        let q = dct2_with(f.view(), DctPath::Fft);
        assert!(m.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn dct2_matches_naive_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = Array2::from_shape_fn((4, 4), |_| rng.random_range(-1.0..1.0));
        let c = dct2(f.view());
        for u in 0..4 {
            for v in 0..4 {
                let mut s = 0.0;
                for x in 0..4 {
                    for y in 0..4 {
                        s += f[[x, y]]
                            * (PI * (2 * x + 1) as f64 * u as f64 / 8.0).cos()
                            * (PI * (2 * y + 1) as f64 * v as f64 / 8.0).cos();
                    }
                }
                assert!((c[[u, v]] - alpha(u, 4) * alpha(v, 4) * s).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dct3_constant_and_zero() {
        let c = dct3(&Tensor3::new(Array3::ones((2, 2, 2))).unwrap());
        assert!((c.as_array()[[0, 0, 0]] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(c.as_array().iter().skip(1).all(|v| v.abs() < 1e-12));
        let z = dct3(&Tensor3::zeros((3, 2, 4)).unwrap());
        assert!(z.as_array().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dct3_paths_round_trip_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = random_tensor(&mut rng, (5, 7, 3));
        for path in [DctPath::Matrix, DctPath::Fft, DctPath::Auto] {
            let c = dct3_with(&t, path);
            assert!((c.energy() - t.energy()).abs() / t.energy() < 1e-9);
            assert!(idct3_with(&c, path).max_abs_diff(&t) < 1e-9);
        }
    }

    #[test]
    fn mode_product_identity_and_row_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_tensor(&mut rng, (3, 4, 2));
        for m in 1..=3 {
            let n = [3, 4, 2][m - 1];
            let out = mode_product(&t, m, &Array2::eye(n)).unwrap();
            assert_eq!(out, t);
        }
        let ones = Tensor3::new(Array3::ones((2, 2, 2))).unwrap();
        let summed = mode_product(&ones, 3, &array![[1.0, 1.0]]).unwrap();
        assert_eq!(summed.dims(), (2, 2, 1));
        assert!(summed.as_array().iter().all(|v| *v == 2.0));
    }

    #[test]
    fn mode_product_errors() {
        let t = Tensor3::zeros((2, 3, 4)).unwrap();
        assert!(matches!(
            mode_product(&t, 2, &Array2::eye(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            mode_product(&t, 4, &Array2::eye(2)),
            Err(Error::InvalidMode(4))
        ));
    }

    #[test]
    fn tensor_rejects_bad_values() {
        assert!(Tensor3::new(Array3::zeros((0, 2, 2))).is_err());
        let mut a = Array3::zeros((1, 1, 2));
        a[[0, 0, 1]] = f64::NAN;
        assert!(matches!(Tensor3::new(a), Err(Error::NonFinite)));
    }
}
