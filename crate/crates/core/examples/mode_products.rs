//! Mode-k products, unfoldings and the Kronecker form of a multilinear
//! product on a small integer tensor.

use tensorfuse::tensor::{kronecker, relative_error};
use tensorfuse::{Matrix, Mode, Tensor3};

fn main() -> tensorfuse::Result<()> {
    let x = Tensor3::from_fn([3, 4, 2], |i, j, k| (i + 10 * j + 100 * k) as f64);
    let m = Matrix::from_rows(&[vec![1.0, 0.0, -1.0], vec![0.5, 0.5, 0.5]])?;

    let y = x.mode_product(&m, Mode::One)?;
    println!("X is {:?}, X x1 M is {:?}", x.dims(), y.dims());
    println!("mode-1 unfolding of X x1 M:");
    let u = y.unfold(Mode::One);
    for r in 0..u.rows() {
        println!("  {:?}", u.row(r));
    }

    // products along different modes commute
    let b = Matrix::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 1.0 });
    let ab = x.mode_product(&m, Mode::One)?.mode_product(&b, Mode::Three)?;
    let ba = x.mode_product(&b, Mode::Three)?.mode_product(&m, Mode::One)?;
    println!("commutation error {:e}", relative_error(ab.data(), ba.data()));

    // Y = X x1 A x2 B x3 C  <=>  Y_(2) = B X_(2) (C kron A)^T
    let a = Matrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64 - 1.5);
    let bm = Matrix::from_fn(3, 4, |i, j| ((i * j) % 3) as f64);
    let c = Matrix::from_fn(2, 2, |i, j| (i as f64) - 0.5 * j as f64);
    let full = x.mode_product(&a, Mode::One)?.mode_product(&bm, Mode::Two)?.mode_product(&c, Mode::Three)?;
    let via_kron = bm.matmul(&x.unfold(Mode::Two))?.matmul(&kronecker(&c, &a).transpose())?;
    println!(
        "unfolding identity error {:e}",
        relative_error(full.unfold(Mode::Two).data(), via_kron.data())
    );
    Ok(())
}
