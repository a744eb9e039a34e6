//! Linear-chain CRF: path scoring, the forward algorithm, marginals and
//! Viterbi decoding.

use crate::error::{Error, Result};
use crate::linalg::{log_sum_exp, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams {
    /// `transitions[(from, to)]`
    pub transitions: Matrix,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl CrfParams {
    pub fn zeros(num_tags: usize) -> Self {
        CrfParams {
            transitions: Matrix::zeros(num_tags, num_tags),
            start: vec![0.0; num_tags],
            end: vec![0.0; num_tags],
        }
    }

    pub fn num_tags(&self) -> usize {
        self.start.len()
    }

    fn check(&self, emissions: &Matrix) -> Result<()> {
        if emissions.rows() == 0 {
            return Err(Error::EmptySentence);
        }
        if emissions.cols() != self.num_tags() {
            return Err(Error::ShapeMismatch(format!(
                "emissions have {} columns, CRF has {} tags",
                emissions.cols(),
                self.num_tags()
            )));
        }
        Ok(())
    }

    fn check_tags(&self, emissions: &Matrix, tags: &[usize]) -> Result<()> {
        self.check(emissions)?;
        if tags.len() != emissions.rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} tags for {} emission rows",
                tags.len(),
                emissions.rows()
            )));
        }
        if let Some(bad) = tags.iter().find(|&&t| t >= self.num_tags()) {
            return Err(Error::ShapeMismatch(format!("tag index {bad} out of range")));
        }
        Ok(())
    }

    /// Unnormalised score of a tag path.
    pub fn score(&self, emissions: &Matrix, tags: &[usize]) -> Result<f64> {
        self.check_tags(emissions, tags)?;
        let mut s = self.start[tags[0]];
        for (t, &y) in tags.iter().enumerate() {
            s += emissions[(t, y)];
            if t > 0 {
                s += self.transitions[(tags[t - 1], y)];
            }
        }
        Ok(s + self.end[tags[tags.len() - 1]])
    }

    /// Forward log-messages (n × T), including emissions.
    fn alphas(&self, emissions: &Matrix) -> Matrix {
        let (n, k) = emissions.shape();
        let mut alpha = Matrix::zeros(n, k);
        for y in 0..k {
            alpha[(0, y)] = self.start[y] + emissions[(0, y)];
        }
        let mut buf = vec![0.0; k];
        for t in 1..n {
            for y in 0..k {
                for (p, b) in buf.iter_mut().enumerate() {
                    *b = alpha[(t - 1, p)] + self.transitions[(p, y)];
                }
                alpha[(t, y)] = log_sum_exp(&buf) + emissions[(t, y)];
            }
        }
        alpha
    }

    /// Backward log-messages (n × T), excluding the emission at `t`.
    fn betas(&self, emissions: &Matrix) -> Matrix {
        let (n, k) = emissions.shape();
        let mut beta = Matrix::zeros(n, k);
        for y in 0..k {
            beta[(n - 1, y)] = self.end[y];
        }
        let mut buf = vec![0.0; k];
        for t in (0..n - 1).rev() {
            for y in 0..k {
                for (q, b) in buf.iter_mut().enumerate() {
                    *b = self.transitions[(y, q)] + emissions[(t + 1, q)] + beta[(t + 1, q)];
                }
                beta[(t, y)] = log_sum_exp(&buf);
            }
        }
        beta
    }

    fn log_partition_from(&self, alpha: &Matrix) -> f64 {
        let last = alpha.rows() - 1;
        let fin: Vec<f64> = (0..self.num_tags())
            .map(|y| alpha[(last, y)] + self.end[y])
            .collect();
        log_sum_exp(&fin)
    }

    pub fn log_partition(&self, emissions: &Matrix) -> Result<f64> {
        self.check(emissions)?;
        Ok(self.log_partition_from(&self.alphas(emissions)))
    }

    pub fn log_likelihood(&self, emissions: &Matrix, tags: &[usize]) -> Result<f64> {
        Ok(self.score(emissions, tags)? - self.log_partition(emissions)?)
    }

    /// Negative log-likelihood. Its gradient w.r.t. the CRF parameters is
    /// added to `grad`; the gradient w.r.t. the emissions is returned.
    pub fn nll_backward(
        &self,
        emissions: &Matrix,
        tags: &[usize],
        grad: &mut CrfParams,
    ) -> Result<(f64, Matrix)> {
        self.check_tags(emissions, tags)?;
        let (n, k) = emissions.shape();
        let alpha = self.alphas(emissions);
        let beta = self.betas(emissions);
        let log_z = self.log_partition_from(&alpha);
        let nll = log_z - self.score(emissions, tags)?;

        let mut d_emit = Matrix::zeros(n, k);
        for t in 0..n {
            for y in 0..k {
                d_emit[(t, y)] = (alpha[(t, y)] + beta[(t, y)] - log_z).exp();
            }
            d_emit[(t, tags[t])] -= 1.0;
        }
        for y in 0..k {
            grad.start[y] += d_emit[(0, y)];
            grad.end[y] += d_emit[(n - 1, y)];
        }
        for t in 1..n {
            for p in 0..k {
                let a = alpha[(t - 1, p)];
                for q in 0..k {
                    let m = (a + self.transitions[(p, q)] + emissions[(t, q)] + beta[(t, q)]
                        - log_z)
                        .exp();
                    grad.transitions[(p, q)] += m;
                }
            }
            grad.transitions[(tags[t - 1], tags[t])] -= 1.0;
        }
        Ok((nll, d_emit))
    }

    /// Best path and its score. Among equally scored paths the
    /// lexicographically smallest is returned.
    pub fn viterbi_decode(&self, emissions: &Matrix) -> Result<(Vec<usize>, f64)> {
        self.check(emissions)?;
        let (n, k) = emissions.shape();
        // suffix[(t, y)]: best score of positions t.. given tag y at t
        let mut suffix = Matrix::zeros(n, k);
        for y in 0..k {
            suffix[(n - 1, y)] = emissions[(n - 1, y)] + self.end[y];
        }
        for t in (0..n - 1).rev() {
            for y in 0..k {
                let best = (0..k)
                    .map(|q| self.transitions[(y, q)] + suffix[(t + 1, q)])
                    .fold(f64::NEG_INFINITY, f64::max);
                suffix[(t, y)] = emissions[(t, y)] + best;
            }
        }
        let argmax = |f: &dyn Fn(usize) -> f64| {
            let mut best = 0;
            let mut best_val = f(0);
            for y in 1..k {
                let v = f(y);
                if v > best_val {
                    best = y;
                    best_val = v;
                }
            }
            best
        };
        let mut path = Vec::with_capacity(n);
        path.push(argmax(&|y| self.start[y] + suffix[(0, y)]));
        for t in 1..n {
            let prev = path[t - 1];
            path.push(argmax(&|q| self.transitions[(prev, q)] + suffix[(t, q)]));
        }
        let score = self.score(emissions, &path)?;
        Ok((path, score))
    }
}
