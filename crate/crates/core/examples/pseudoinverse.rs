//! Truncated-SVD least squares on a rank-deficient system.

use nalgebra::{DMatrix, DVector};
use rpnn::linalg::{effective_rank, truncated_pinv_solve, TruncatedSvd, TruncationRule};

fn main() -> rpnn::error::Result<()> {
    // third column is the sum of the first two, plus a whisper of noise
    let a = DMatrix::from_row_slice(
        4,
        3,
        &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0 + 1e-13, 2.0, -1.0, 1.0],
    );
    let b = DVector::from_vec(vec![1.0, 2.0, 3.0, 1.0]);

    let svd = TruncatedSvd::new(&a, TruncationRule::Default)?;
    println!("singular values {:.3e}", svd.singular_values().transpose());
    for rule in [TruncationRule::Default, TruncationRule::Relative(1e-10)] {
        let x = truncated_pinv_solve(&a, &b, rule)?;
        println!(
            "{rule:?}: rank {}, |x| = {:.3e}, |Ax - b| = {:.3e}",
            effective_rank(&a, rule)?,
            x.norm(),
            (&a * &x - &b).norm()
        );
    }
    Ok(())
}
