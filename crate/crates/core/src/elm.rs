//! Extreme Learning Machine: a single hidden layer with random, frozen input
//! weights and output weights solved in closed form by least squares.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{lstsq, matmul, Matrix};
use crate::rng::Xoshiro256StarStar;

/// Hidden-node activation. The declaration order is the grid tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActivationKind {
    Tanh,
    Sigmoid,
    /// Gaussian kernel on the distance to a center column of `W`.
    Rbf,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 3] = [Self::Tanh, Self::Sigmoid, Self::Rbf];

    pub fn name(self) -> &'static str {
        match self {
            Self::Tanh => "tanh",
            Self::Sigmoid => "sigmoid",
            Self::Rbf => "rbf",
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            Self::Tanh => 0,
            Self::Sigmoid => 1,
            Self::Rbf => 2,
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tanh" => Ok(Self::Tanh),
            "sigmoid" => Ok(Self::Sigmoid),
            "rbf" => Ok(Self::Rbf),
            other => Err(Error::Validation(format!(
                "unknown activation '{other}' (expected tanh, sigmoid or rbf)"
            ))),
        }
    }
}

pub const DEFAULT_RBF_GAMMA: f64 = 1.0;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElmParams {
    pub hidden_nodes: usize,
    pub activation: ActivationKind,
    pub seed: u64,
    /// Only read when `activation == Rbf`.
    pub rbf_gamma: f64,
}

impl ElmParams {
    pub fn new(hidden_nodes: usize, activation: ActivationKind, seed: u64) -> Self {
        Self {
            hidden_nodes,
            activation,
            seed,
            rbf_gamma: DEFAULT_RBF_GAMMA,
        }
    }

    pub fn with_rbf_gamma(mut self, gamma: f64) -> Self {
        self.rbf_gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_nodes == 0 {
            return Err(Error::Validation("hidden_nodes must be >= 1".into()));
        }
        if !(self.rbf_gamma > 0.0 && self.rbf_gamma.is_finite()) {
            return Err(Error::Validation(format!(
                "rbf_gamma must be a positive finite number, got {}",
                self.rbf_gamma
            )));
        }
        Ok(())
    }
}

/// Draws `W` (n_features × L, row-major order) then `b` (length L), each entry
/// uniform on [−1, 1], from xoshiro256** seeded with `params.seed`.
pub fn init_random(params: &ElmParams, n_features: usize) -> Result<(Matrix, Vec<f64>)> {
    params.validate()?;
    if n_features == 0 {
        return Err(Error::Validation("n_features must be >= 1".into()));
    }
    let l = params.hidden_nodes;
    let mut rng = Xoshiro256StarStar::seed_from_u64(params.seed);
    let w: Vec<f64> = (0..n_features * l).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let b: Vec<f64> = (0..l).map(|_| rng.uniform(-1.0, 1.0)).collect();
    Ok((Matrix::from_parts(n_features, l, w), b))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Hidden-layer response matrix `H` (rows(x) × L).
///
/// Tanh/Sigmoid: `g(x·W + b)`. Rbf: `exp(−γ‖x − W[:, j]‖²)`, bias unused.
pub fn hidden_layer(
    x: &Matrix,
    w: &Matrix,
    b: &[f64],
    activation: ActivationKind,
    rbf_gamma: f64,
) -> Result<Matrix> {
    if x.cols() != w.rows() {
        return Err(Error::shape(
            "hidden_layer",
            format!("inputs have {} features, weights expect {}", x.cols(), w.rows()),
        ));
    }
    if b.len() != w.cols() {
        return Err(Error::shape(
            "hidden_layer",
            format!("{} biases for {} hidden nodes", b.len(), w.cols()),
        ));
    }
    match activation {
        ActivationKind::Tanh | ActivationKind::Sigmoid => {
            let mut h = matmul(x, w)?;
            let g: fn(f64) -> f64 = if activation == ActivationKind::Tanh {
                f64::tanh
            } else {
                sigmoid
            };
            for i in 0..h.rows() {
                for (v, bj) in h.row_mut(i).iter_mut().zip(b) {
                    *v = g(*v + bj);
                }
            }
            Ok(h)
        }
        ActivationKind::Rbf => {
            let centers = w.transpose();
            let (n, l) = (x.rows(), w.cols());
            let mut h = Matrix::zeros(n, l);
            for i in 0..n {
                let xi = x.row(i);
                for j in 0..l {
                    let d2: f64 = xi
                        .iter()
                        .zip(centers.row(j))
                        .map(|(a, c)| (a - c) * (a - c))
                        .sum();
                    h[(i, j)] = (-rbf_gamma * d2).exp();
                }
            }
            Ok(h)
        }
    }
}

/// A trained classifier. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    input_weights: Matrix,
    biases: Vec<f64>,
    output_weights: Matrix,
    params: ElmParams,
}

impl ElmModel {
    /// Reassembles a model from stored parts, checking every dimension.
    pub fn from_parts(
        input_weights: Matrix,
        biases: Vec<f64>,
        output_weights: Matrix,
        params: ElmParams,
    ) -> Result<Self> {
        params.validate()?;
        let l = params.hidden_nodes;
        if input_weights.cols() != l || biases.len() != l || output_weights.rows() != l {
            return Err(Error::Integrity(format!(
                "hidden width {l} but W is {}x{}, b has {}, beta is {}x{}",
                input_weights.rows(),
                input_weights.cols(),
                biases.len(),
                output_weights.rows(),
                output_weights.cols()
            )));
        }
        if output_weights.cols() != 1 {
            return Err(Error::Integrity(format!(
                "output weights must have one column, found {}",
                output_weights.cols()
            )));
        }
        if input_weights.rows() == 0 {
            return Err(Error::Integrity("model has zero input features".into()));
        }
        let finite = input_weights
            .as_slice()
            .iter()
            .chain(&biases)
            .chain(output_weights.as_slice())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Integrity("model weights contain non-finite values".into()));
        }
        Ok(Self {
            input_weights,
            biases,
            output_weights,
            params,
        })
    }

    pub fn input_weights(&self) -> &Matrix {
        &self.input_weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn output_weights(&self) -> &Matrix {
        &self.output_weights
    }

    pub fn params(&self) -> &ElmParams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.input_weights.rows()
    }

    pub fn hidden(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.n_features() {
            return Err(Error::shape(
                "score",
                format!("model expects {} features, got {}", self.n_features(), x.cols()),
            ));
        }
        hidden_layer(
            x,
            &self.input_weights,
            &self.biases,
            self.params.activation,
            self.params.rbf_gamma,
        )
    }

    /// Raw `Hβ` per sample.
    pub fn score(&self, x: &Matrix) -> Result<Vec<f64>> {
        let h = self.hidden(x)?;
        Ok(matmul(&h, &self.output_weights)?.into_vec())
    }

    /// `1` where the score is `>= threshold`.
    pub fn predict(&self, x: &Matrix, threshold: f64) -> Result<Vec<u8>> {
        Ok(threshold_scores(&self.score(x)?, threshold))
    }
}

pub fn threshold_scores(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}

/// Trains on `x_train` with binary labels.
pub fn fit(x_train: &Matrix, y_train: &[u8], params: &ElmParams) -> Result<ElmModel> {
    params.validate()?;
    if x_train.rows() == 0 || x_train.cols() == 0 {
        return Err(Error::EmptyDataset("ELM fit input"));
    }
    if x_train.rows() != y_train.len() {
        return Err(Error::shape(
            "fit",
            format!("{} rows but {} labels", x_train.rows(), y_train.len()),
        ));
    }
    if let Some(i) = (0..x_train.rows()).find(|&i| x_train.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::Validation(format!("non-finite feature value in row {i}")));
    }
    if let Some(i) = y_train.iter().position(|&y| y > 1) {
        return Err(Error::Validation(format!(
            "label {} in row {i} is not 0/1",
            y_train[i]
        )));
    }
    let (w, b) = init_random(params, x_train.cols())?;
    let h = hidden_layer(x_train, &w, &b, params.activation, params.rbf_gamma)?;
    let targets = Matrix::from_parts(y_train.len(), 1, y_train.iter().map(|&y| f64::from(y)).collect());
    let beta = lstsq(&h, &targets, None)?;
    ElmModel::from_parts(w, b, beta, *params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        Matrix::new(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.uniform(-2.0, 2.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let p = ElmParams::new(8, ActivationKind::Tanh, 42);
        let (w1, b1) = init_random(&p, 5).unwrap();
        let (w2, b2) = init_random(&p, 5).unwrap();
        assert_eq!(w1, w2);
        assert_eq!(b1, b2);
        assert!(w1.as_slice().iter().chain(&b1).all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn different_seeds_differ() {
        let (w1, _) = init_random(&ElmParams::new(8, ActivationKind::Tanh, 1), 5).unwrap();
        let (w2, _) = init_random(&ElmParams::new(8, ActivationKind::Tanh, 2), 5).unwrap();
        assert!(w1.as_slice().iter().zip(w2.as_slice()).any(|(a, b)| a != b));
    }

    #[test]
    fn zero_input_activations() {
        let x = Matrix::zeros(3, 2);
        let w = random(2, 4, 1);
        let b = vec![0.0; 4];
        let h = hidden_layer(&x, &w, &b, ActivationKind::Tanh, 1.0).unwrap();
        assert!(h.as_slice().iter().all(|&v| v == 0.0));
        let h = hidden_layer(&x, &w, &b, ActivationKind::Sigmoid, 1.0).unwrap();
        assert!(h.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn rbf_at_center_is_one() {
        let w = random(3, 2, 5);
        let x = Matrix::new(1, 3, w.col_values(1)).unwrap();
        for gamma in [0.1, 1.0, 37.0] {
            let h = hidden_layer(&x, &w, &[0.0, 0.0], ActivationKind::Rbf, gamma).unwrap();
            assert_eq!(h[(0, 1)], 1.0);
            assert!(h[(0, 0)] < 1.0);
        }
    }

    #[test]
    fn tanh_matches_scalar_loop() {
        let x = random(4, 3, 9);
        let w = random(3, 5, 10);
        let b: Vec<f64> = random(1, 5, 11).into_vec();
        let h = hidden_layer(&x, &w, &b, ActivationKind::Tanh, 1.0).unwrap();
        for i in 0..4 {
            for j in 0..5 {
                let mut z = b[j];
                for k in 0..3 {
                    z += x[(i, k)] * w[(k, j)];
                }
                assert!((h[(i, j)] - z.tanh()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hidden_layer_shape_error() {
        let err = hidden_layer(
            &Matrix::zeros(2, 3),
            &Matrix::zeros(4, 2),
            &[0.0, 0.0],
            ActivationKind::Tanh,
            1.0,
        );
        assert!(matches!(err, Err(Error::Shape { .. })));
    }

    #[test]
    fn single_sample_single_node() {
        let x = Matrix::new(1, 2, vec![0.3, -0.7]).unwrap();
        for label in [0u8, 1] {
            let m = fit(&x, &[label], &ElmParams::new(1, ActivationKind::Tanh, 3)).unwrap();
            let s = m.score(&x).unwrap();
            assert!((s[0] - f64::from(label)).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_is_bitwise_deterministic() {
        let x = random(30, 4, 21);
        let y: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
        let p = ElmParams::new(10, ActivationKind::Sigmoid, 8);
        let a = fit(&x, &y, &p).unwrap();
        let b = fit(&x, &y, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn score_empty_and_duplicates() {
        let x = random(20, 3, 2);
        let y: Vec<u8> = (0..20).map(|i| u8::from(i < 10)).collect();
        let m = fit(&x, &y, &ElmParams::new(6, ActivationKind::Tanh, 1)).unwrap();
        assert!(m.score(&Matrix::zeros(0, 3)).unwrap().is_empty());
        let dup = x.select_rows(&[4, 4]);
        let s = m.score(&dup).unwrap();
        assert_eq!(s[0], s[1]);
    }

    #[test]
    fn score_feature_mismatch_names_counts() {
        let x = random(5, 3, 2);
        let m = fit(&x, &[0, 1, 0, 1, 1], &ElmParams::new(2, ActivationKind::Tanh, 1)).unwrap();
        let err = m.score(&Matrix::zeros(1, 4)).unwrap_err().to_string();
        assert!(err.contains("expects 3") && err.contains("got 4"), "{err}");
    }

    #[test]
    fn threshold_boundaries() {
        assert_eq!(threshold_scores(&[0.2, 0.5, 0.9], 0.5), vec![0, 1, 1]);
        assert_eq!(threshold_scores(&[0.2, 0.5, 0.9], 1e18), vec![0, 0, 0]);
        assert_eq!(threshold_scores(&[0.2, 0.5, 0.9], -1e18), vec![1, 1, 1]);
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let x = random(3, 2, 1);
        assert!(fit(&x, &[0, 1], &ElmParams::new(2, ActivationKind::Tanh, 1)).is_err());
        assert!(fit(&x, &[0, 1, 2], &ElmParams::new(2, ActivationKind::Tanh, 1)).is_err());
        assert!(fit(&x, &[0, 1, 1], &ElmParams::new(0, ActivationKind::Tanh, 1)).is_err());
        let bad = Matrix::from_parts(2, 1, vec![1.0, f64::NAN]);
        let err = fit(&bad, &[0, 1], &ElmParams::new(1, ActivationKind::Tanh, 1)).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn activation_parsing() {
        assert_eq!("TanH".parse::<ActivationKind>().unwrap(), ActivationKind::Tanh);
        assert_eq!("rbf".parse::<ActivationKind>().unwrap(), ActivationKind::Rbf);
        assert!("relu".parse::<ActivationKind>().is_err());
    }
}
