//! Dense layer with hand-derived forward/backward passes, plus the
//! elementwise primitives (relu, inverted dropout, sigmoid).

use crate::error::{AclError, Result};
use crate::numkit::matrix::{Matrix, Precision};
use crate::numkit::rng::RngStream;

/// Whether dropout is active and activations are cached for backward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Fully connected layer, weights stored as (in_dim x out_dim).
///
/// Gradients accumulate into `grad_weights` / `grad_bias` across backward
/// calls and must be zeroed between optimizer steps.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    grad_weights: Matrix,
    grad_bias: Vec<f64>,
}

impl DenseLayer {
    /// Glorot-uniform weights in [-a, a] with a = sqrt(6 / (in + out)),
    /// zero bias.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut RngStream) -> Self {
        let a = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let mut weights = Matrix::zeros(in_dim, out_dim);
        for v in weights.data_mut() {
            *v = rng.uniform(-a, a);
        }
        DenseLayer {
            weights,
            bias: vec![0.0; out_dim],
            grad_weights: Matrix::zeros(in_dim, out_dim),
            grad_bias: vec![0.0; out_dim],
        }
    }

    pub fn from_parts(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(AclError::dim("DenseLayer bias", weights.cols(), bias.len()));
        }
        let (r, c) = (weights.rows(), weights.cols());
        Ok(DenseLayer {
            weights,
            bias,
            grad_weights: Matrix::zeros(r, c),
            grad_bias: vec![0.0; c],
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn grad_weights(&self) -> &Matrix {
        &self.grad_weights
    }

    pub fn grad_bias(&self) -> &[f64] {
        &self.grad_bias
    }

    pub fn zero_grads(&mut self) {
        self.grad_weights.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    /// x (n x in) -> x W + b (n x out).
    pub fn forward(&self, x: &Matrix, precision: Precision) -> Result<Matrix> {
        if x.cols() != self.in_dim() {
            return Err(AclError::dim(
                "dense forward",
                format!("input {}x{}", x.rows(), x.cols()),
                format!("layer {}x{}", self.in_dim(), self.out_dim()),
            ));
        }
        let mut out = x.matmul(&self.weights, precision)?;
        out.add_row_vector(&self.bias)?;
        out.ensure_finite("dense forward")?;
        Ok(out)
    }

    /// Accumulates grad_weights += x^T upstream and grad_bias += column
    /// sums of upstream; returns the downstream gradient upstream W^T.
    pub fn backward(&mut self, x: &Matrix, upstream: &Matrix, precision: Precision) -> Result<Matrix> {
        if upstream.rows() != x.rows() || upstream.cols() != self.out_dim() {
            return Err(AclError::dim(
                "dense backward",
                format!("upstream {}x{}", upstream.rows(), upstream.cols()),
                format!("expected {}x{}", x.rows(), self.out_dim()),
            ));
        }
        if x.cols() != self.in_dim() {
            return Err(AclError::dim(
                "dense backward",
                format!("input {}x{}", x.rows(), x.cols()),
                format!("layer {}x{}", self.in_dim(), self.out_dim()),
            ));
        }
        let gw = x.matmul_tn(upstream, precision)?;
        self.grad_weights.add_in_place(&gw)?;
        for (g, s) in self.grad_bias.iter_mut().zip(upstream.column_sums()) {
            *g += s;
        }
        let downstream = upstream.matmul_nt(&self.weights, precision)?;
        downstream.ensure_finite("dense backward")?;
        Ok(downstream)
    }

    /// Mutable parameter/gradient pairs in a fixed order: weights, bias.
    pub fn tensors_mut(&mut self) -> [(&mut [f64], &[f64]); 2] {
        let DenseLayer {
            weights,
            bias,
            grad_weights,
            grad_bias,
        } = self;
        [
            (weights.data_mut(), grad_weights.data()),
            (bias.as_mut_slice(), grad_bias.as_slice()),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.weights.data().len() + self.bias.len()
    }
}

/// Elementwise max(0, x).
pub fn relu_forward(x: &Matrix) -> Matrix {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Passes upstream where x > 0; zero elsewhere (including exactly 0).
pub fn relu_backward(x: &Matrix, upstream: &Matrix) -> Result<Matrix> {
    if x.rows() != upstream.rows() || x.cols() != upstream.cols() {
        return Err(AclError::dim(
            "relu backward",
            format!("{}x{}", x.rows(), x.cols()),
            format!("{}x{}", upstream.rows(), upstream.cols()),
        ));
    }
    let mut out = upstream.clone();
    for (o, &v) in out.data_mut().iter_mut().zip(x.data()) {
        if v <= 0.0 {
            *o = 0.0;
        }
    }
    Ok(out)
}

/// Inverted dropout. In train mode each entry is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate); eval mode is the
/// identity. The returned mask already carries the survivor scale, so the
/// backward pass is `upstream * mask` elementwise.
pub fn dropout_forward(
    x: &Matrix,
    rate: f64,
    rng: &mut RngStream,
    mode: Mode,
) -> Result<(Matrix, Matrix)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(AclError::Config(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok((x.clone(), Matrix::filled(x.rows(), x.cols(), 1.0)));
    }
    let scale = 1.0 / (1.0 - rate);
    let mut mask = Matrix::zeros(x.rows(), x.cols());
    for m in mask.data_mut() {
        *m = if rng.next_f64() < rate { 0.0 } else { scale };
    }
    let mut out = x.clone();
    for (o, &m) in out.data_mut().iter_mut().zip(mask.data()) {
        *o *= m;
    }
    Ok((out, mask))
}

pub fn dropout_backward(upstream: &Matrix, mask: &Matrix) -> Result<Matrix> {
    if upstream.rows() != mask.rows() || upstream.cols() != mask.cols() {
        return Err(AclError::dim(
            "dropout backward",
            format!("{}x{}", upstream.rows(), upstream.cols()),
            format!("{}x{}", mask.rows(), mask.cols()),
        ));
    }
    let mut out = upstream.clone();
    for (o, &m) in out.data_mut().iter_mut().zip(mask.data()) {
        *o *= m;
    }
    Ok(out)
}

/// Elementwise logistic function, no clamping.
pub fn sigmoid(x: &Matrix) -> Matrix {
    x.map(|v| 1.0 / (1.0 + (-v).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_layer(dim: usize) -> DenseLayer {
        let mut w = Matrix::zeros(dim, dim);
        for i in 0..dim {
            w.set(i, i, 1.0);
        }
        DenseLayer::from_parts(w, vec![0.0; dim]).unwrap()
    }

    #[test]
    fn forward_identity() {
        let layer = identity_layer(2);
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let y = layer.forward(&x, Precision::F64).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0]);
    }

    #[test]
    fn forward_zero_weights_bias_broadcast() {
        let layer =
            DenseLayer::from_parts(Matrix::zeros(3, 1), vec![3.0]).unwrap();
        let x = Matrix::from_rows(&[vec![5.0, -2.0, 0.1], vec![0.0, 0.0, 0.0]]).unwrap();
        let y = layer.forward(&x, Precision::F64).unwrap();
        assert_eq!(y.data(), &[3.0, 3.0]);
    }

    #[test]
    fn forward_sum_case() {
        let layer = DenseLayer::from_parts(
            Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            vec![0.0],
        )
        .unwrap();
        let x = Matrix::from_rows(&[vec![2.0, 5.0]]).unwrap();
        let y = layer.forward(&x, Precision::F64).unwrap();
        assert_eq!(y.data(), &[7.0]);
    }

    #[test]
    fn forward_shape_mismatch() {
        let layer = identity_layer(2);
        let x = Matrix::zeros(1, 3);
        assert!(layer.forward(&x, Precision::F64).is_err());
    }

    #[test]
    fn backward_zero_upstream_zero_grads() {
        let mut layer = identity_layer(2);
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let up = Matrix::zeros(1, 2);
        let down = layer.backward(&x, &up, Precision::F64).unwrap();
        assert!(down.data().iter().all(|&v| v == 0.0));
        assert!(layer.grad_weights().data().iter().all(|&v| v == 0.0));
        assert!(layer.grad_bias().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_one_by_one() {
        let w = 0.7;
        let mut layer = DenseLayer::from_parts(
            Matrix::from_rows(&[vec![w]]).unwrap(),
            vec![0.0],
        )
        .unwrap();
        let x = Matrix::from_rows(&[vec![2.0]]).unwrap();
        let up = Matrix::from_rows(&[vec![3.0]]).unwrap();
        let down = layer.backward(&x, &up, Precision::F64).unwrap();
        assert_eq!(layer.grad_weights().get(0, 0), 6.0);
        assert_eq!(layer.grad_bias()[0], 3.0);
        assert_eq!(down.get(0, 0), 3.0 * w);
    }

    #[test]
    fn backward_matches_finite_differences() {
        // Scalar loss L = sum(y) on a random 3x4 -> 2 layer.
        let mut rng = RngStream::new(5);
        let mut layer = DenseLayer::init(4, 2, &mut rng);
        let mut x = Matrix::zeros(3, 4);
        for v in x.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        let up = Matrix::filled(3, 2, 1.0); // dL/dy for L = sum(y)
        layer.zero_grads();
        layer.backward(&x, &up, Precision::F64).unwrap();

        let step = 1e-6;
        let loss = |l: &DenseLayer, x: &Matrix| -> f64 {
            l.forward(x, Precision::F64).unwrap().data().iter().sum()
        };
        for i in 0..4 {
            for j in 0..2 {
                let mut plus = layer.clone();
                let mut minus = layer.clone();
                let w = plus.weights.get(i, j);
                plus.weights.set(i, j, w + step);
                minus.weights.set(i, j, w - step);
                let fd = (loss(&plus, &x) - loss(&minus, &x)) / (2.0 * step);
                let an = layer.grad_weights().get(i, j);
                let rel = (fd - an).abs() / an.abs().max(1.0);
                assert!(rel < 1e-6, "weight ({i},{j}): fd {fd} vs analytic {an}");
            }
        }
        for j in 0..2 {
            let mut plus = layer.clone();
            let mut minus = layer.clone();
            plus.bias[j] += step;
            minus.bias[j] -= step;
            let fd = (loss(&plus, &x) - loss(&minus, &x)) / (2.0 * step);
            let an = layer.grad_bias()[j];
            let rel = (fd - an).abs() / an.abs().max(1.0);
            assert!(rel < 1e-6, "bias {j}: fd {fd} vs analytic {an}");
        }
    }

    #[test]
    fn relu_cases() {
        let x = Matrix::from_rows(&[vec![-1.0, 0.0, 2.0]]).unwrap();
        assert_eq!(relu_forward(&x).data(), &[0.0, 0.0, 2.0]);

        let pos = Matrix::from_rows(&[vec![0.5, 3.0]]).unwrap();
        assert_eq!(relu_forward(&pos).data(), pos.data());

        let x = Matrix::from_rows(&[vec![-1.0, 2.0]]).unwrap();
        let up = Matrix::from_rows(&[vec![5.0, 5.0]]).unwrap();
        assert_eq!(relu_backward(&x, &up).unwrap().data(), &[0.0, 5.0]);
    }

    #[test]
    fn dropout_rate_zero_is_identity() {
        let x = Matrix::from_rows(&[vec![1.0, -2.0, 3.0]]).unwrap();
        let mut rng = RngStream::new(0);
        let (y, mask) = dropout_forward(&x, 0.0, &mut rng, Mode::Train).unwrap();
        assert_eq!(y.data(), x.data());
        assert!(mask.data().iter().all(|&m| m == 1.0));
    }

    #[test]
    fn dropout_eval_is_identity() {
        let x = Matrix::from_rows(&[vec![1.0, -2.0]]).unwrap();
        let mut rng = RngStream::new(0);
        let (y, _) = dropout_forward(&x, 0.9, &mut rng, Mode::Eval).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn dropout_invalid_rate_rejected() {
        let x = Matrix::zeros(1, 1);
        let mut rng = RngStream::new(0);
        assert!(dropout_forward(&x, 1.0, &mut rng, Mode::Train).is_err());
        assert!(dropout_forward(&x, -0.1, &mut rng, Mode::Train).is_err());
    }

    #[test]
    fn dropout_zero_fraction_within_three_sigma() {
        let n = 100_000usize;
        let rate = 0.5;
        let x = Matrix::filled(1, n, 1.0);
        let mut rng = RngStream::new(99);
        let (y, mask) = dropout_forward(&x, rate, &mut rng, Mode::Train).unwrap();
        let zeros = y.data().iter().filter(|&&v| v == 0.0).count();
        // Binomial(n, 0.5): sigma = sqrt(n * 0.25)
        let sigma = (n as f64 * rate * (1.0 - rate)).sqrt();
        let dev = (zeros as f64 - n as f64 * rate).abs();
        assert!(dev < 3.0 * sigma, "zeros {zeros}, dev {dev}, sigma {sigma}");
        // Survivors carry the 1/(1-rate) scale.
        assert!(mask
            .data()
            .iter()
            .all(|&m| m == 0.0 || (m - 2.0).abs() < 1e-12));
    }

    #[test]
    fn sigmoid_midpoint() {
        let x = Matrix::zeros(1, 3);
        let s = sigmoid(&x);
        assert!(s.data().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }
}
