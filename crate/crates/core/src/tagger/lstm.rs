//! Single-layer bidirectional LSTM with hand-written backpropagation
//! through time.
//!
//! Gate rows are stacked in the order input, forget, cell, output; each
//! block has `hidden` rows. Both directions start from zero state.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{add_assign, axpy, dot, Matrix};

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmDirection {
    /// (4h × d)
    pub w_ih: Matrix,
    /// (4h × h)
    pub w_hh: Matrix,
    /// (4h)
    pub bias: Vec<f64>,
}

impl LstmDirection {
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        LstmDirection {
            w_ih: Matrix::uniform(4 * hidden, input_dim, bound, rng),
            w_hh: Matrix::uniform(4 * hidden, hidden, bound, rng),
            bias: (0..4 * hidden)
                .map(|_| rng.random_range(-bound..=bound))
                .collect(),
        }
    }

    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmDirection {
            w_ih: Matrix::zeros(4 * hidden, input_dim),
            w_hh: Matrix::zeros(4 * hidden, hidden),
            bias: vec![0.0; 4 * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.w_ih.cols()
    }

    /// Runs over `x` in time order, or reversed when `reverse` is set. All
    /// returned matrices are indexed by position in the sentence.
    fn forward(&self, x: &Matrix, reverse: bool) -> DirectionCache {
        let n = x.rows();
        let h = self.hidden();
        let mut gates = x.matmul_transposed(&self.w_ih);
        gates.add_row_vector(&self.bias);
        let mut cell = Matrix::zeros(n, h);
        let mut tanh_cell = Matrix::zeros(n, h);
        let mut hidden = Matrix::zeros(n, h);
        let zeros = vec![0.0; h];
        let order: Vec<usize> = if reverse {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        for (k, &t) in order.iter().enumerate() {
            let (h_prev, c_prev) = if k == 0 {
                (zeros.clone(), zeros.clone())
            } else {
                let p = order[k - 1];
                (hidden.row(p).to_vec(), cell.row(p).to_vec())
            };
            let g = gates.row_mut(t);
            for (r, gr) in g.iter_mut().enumerate() {
                *gr += dot(self.w_hh.row(r), &h_prev);
            }
            for j in 0..h {
                g[j] = sigmoid(g[j]);
                g[h + j] = sigmoid(g[h + j]);
                g[2 * h + j] = g[2 * h + j].tanh();
                g[3 * h + j] = sigmoid(g[3 * h + j]);
            }
            let g = gates.row(t).to_vec();
            for j in 0..h {
                let c = g[h + j] * c_prev[j] + g[j] * g[2 * h + j];
                let tc = c.tanh();
                cell[(t, j)] = c;
                tanh_cell[(t, j)] = tc;
                hidden[(t, j)] = g[3 * h + j] * tc;
            }
        }
        DirectionCache {
            order,
            gates,
            cell,
            tanh_cell,
            hidden,
        }
    }

    /// Backpropagates `d_hidden` (n × h), accumulating parameter gradients
    /// into `grad` and adding the input gradient into `d_x`.
    fn backward(
        &self,
        x: &Matrix,
        cache: &DirectionCache,
        d_hidden: &Matrix,
        grad: &mut LstmDirection,
        d_x: &mut Matrix,
    ) {
        let n = x.rows();
        let h = self.hidden();
        let mut d_pre = Matrix::zeros(n, 4 * h);
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let zeros = vec![0.0; h];
        for k in (0..n).rev() {
            let t = cache.order[k];
            let (h_prev, c_prev) = if k == 0 {
                (&zeros[..], &zeros[..])
            } else {
                let p = cache.order[k - 1];
                (cache.hidden.row(p), cache.cell.row(p))
            };
            let g = cache.gates.row(t);
            let tc = cache.tanh_cell.row(t);
            let dp = d_pre.row_mut(t);
            for j in 0..h {
                let dh = d_hidden[(t, j)] + dh_next[j];
                let (i, f, gg, o) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let d_o = dh * tc[j];
                let dc = dh * o * (1.0 - tc[j] * tc[j]) + dc_next[j];
                let d_i = dc * gg;
                let d_g = dc * i;
                let d_f = dc * c_prev[j];
                dc_next[j] = dc * f;
                dp[j] = d_i * i * (1.0 - i);
                dp[h + j] = d_f * f * (1.0 - f);
                dp[2 * h + j] = d_g * (1.0 - gg * gg);
                dp[3 * h + j] = d_o * o * (1.0 - o);
            }
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            let dp = d_pre.row(t);
            for (r, &d) in dp.iter().enumerate() {
                if d != 0.0 {
                    axpy(d, self.w_hh.row(r), &mut dh_next);
                    if k > 0 {
                        axpy(d, h_prev, grad.w_hh.row_mut(r));
                    }
                }
            }
        }
        for t in 0..n {
            let dp = d_pre.row(t);
            let xt = x.row(t);
            for (r, &d) in dp.iter().enumerate() {
                if d != 0.0 {
                    axpy(d, xt, grad.w_ih.row_mut(r));
                }
            }
            add_assign(&mut grad.bias, dp);
        }
        d_x.add_assign(&d_pre.matmul(&self.w_ih));
    }
}

#[derive(Debug, Clone)]
struct DirectionCache {
    order: Vec<usize>,
    /// post-activation gates (n × 4h)
    gates: Matrix,
    cell: Matrix,
    tanh_cell: Matrix,
    hidden: Matrix,
}

/// Intermediate values kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct BiLstmCache {
    input: Matrix,
    forward: DirectionCache,
    backward: DirectionCache,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm {
    pub forward: LstmDirection,
    pub backward: LstmDirection,
}

impl BiLstm {
    /// Weights uniform in `±1/sqrt(hidden)`.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        BiLstm {
            forward: LstmDirection::init(input_dim, hidden, rng),
            backward: LstmDirection::init(input_dim, hidden, rng),
        }
    }

    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        BiLstm {
            forward: LstmDirection::zeros(input_dim, hidden),
            backward: LstmDirection::zeros(input_dim, hidden),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    /// Row `i` of the result is `[forward h_i | backward h_i]` (n × 2h).
    pub fn forward(&self, inputs: &Matrix) -> Result<(Matrix, BiLstmCache)> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "lstm expects {} input columns, got {}",
                self.input_dim(),
                inputs.cols()
            )));
        }
        let fwd = self.forward.forward(inputs, false);
        let bwd = self.backward.forward(inputs, true);
        let out = Matrix::hstack(&[&fwd.hidden, &bwd.hidden]);
        Ok((
            out,
            BiLstmCache {
                input: inputs.clone(),
                forward: fwd,
                backward: bwd,
            },
        ))
    }

    /// Gradient w.r.t. the inputs; parameter gradients are added to `grad`.
    pub fn backward(&self, cache: &BiLstmCache, d_out: &Matrix, grad: &mut BiLstm) -> Matrix {
        let h = self.hidden();
        let mut d_x = Matrix::zeros(cache.input.rows(), cache.input.cols());
        self.forward.backward(
            &cache.input,
            &cache.forward,
            &d_out.columns(0, h),
            &mut grad.forward,
            &mut d_x,
        );
        self.backward.backward(
            &cache.input,
            &cache.backward,
            &d_out.columns(h, 2 * h),
            &mut grad.backward,
            &mut d_x,
        );
        d_x
    }
}
