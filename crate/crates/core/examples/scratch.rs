use ntpgeo_core::matrix::*;
use ntpgeo_core::spectral::truncated_svd;
fn main() {
    let s = SupportMatrix::new(3, vec![vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
    let op = CenteredOperator::new(&s);
    println!("{:?}", op.to_dense());
    println!("{:?}", truncated_svd(&op, 2, 1e-10, None, 0));
}
