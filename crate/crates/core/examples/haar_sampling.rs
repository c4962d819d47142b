//! Haar-random rotations: orthogonality, both determinant signs, and the
//! averaging identity E[U C Uᵀ] = (tr C / n) I.

use nalgebra::{DMatrix, DVector};
use tracecause::prelude::*;

fn main() -> Result<()> {
    let root = Rng::new(7);
    let u = haar_orthogonal(&root.child(0), 8)?;
    let err = (u.transpose() * &u - DMatrix::identity(8, 8)).abs().max();
    println!(
        "n = 8: max |UᵀU - I| = {err:.2e}, det = {:+.3}",
        u.determinant()
    );

    let negative = (0..200)
        .filter(|&i| haar_orthogonal(&root.child(i), 3).unwrap().determinant() < 0.0)
        .count();
    println!("det < 0 in {negative}/200 draws (n = 3)");

    let c = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
    let draws = 5000;
    let mut mean = DMatrix::zeros(3, 3);
    for i in 0..draws {
        let u = haar_orthogonal(&root.child(1000 + i), 3)?;
        mean += &u * &c * u.transpose();
    }
    mean /= draws as f64;
    println!("mean of U diag(1,2,3) Uᵀ over {draws} draws (expect 2·I):{mean:.3}");
    Ok(())
}
