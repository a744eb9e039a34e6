//! Scores, normalises and decodes tag paths with a hand-built CRF.

use hanfuse::linalg::Matrix;
use hanfuse::tagger::CrfParams;

fn main() -> hanfuse::Result<()> {
    // tags: 0 = O, 1 = B-LOC, 2 = I-LOC
    let mut crf = CrfParams::zeros(3);
    crf.transitions[(0, 2)] = -5.0;
    crf.start[2] = -5.0;
    crf.transitions[(1, 2)] = 1.0;
    let emissions = Matrix::from_rows(&[
        [2.0, 0.1, 0.0],
        [0.0, 1.5, 1.0],
        [0.2, 0.3, 1.2],
        [1.0, 0.0, 0.4],
    ]);
    let (path, score) = crf.viterbi_decode(&emissions)?;
    println!("best path {path:?} score {score:.3}");
    println!("log Z {:.3}", crf.log_partition(&emissions)?);
    println!("P(best) {:.4}", crf.log_likelihood(&emissions, &path)?.exp());
    println!("P([0,2,2,0]) {:.6}", crf.log_likelihood(&emissions, &[0, 2, 2, 0])?.exp());
    Ok(())
}
