//! Eigendecomposition of a Haar unitary and the functional calculus on it.
use krein::circlefn::CircleFunction;
use krein::spectra::{decompose_unitary, matrix_function, path_point, random_instance, DEFAULT_GAP_TOL};

fn main() -> krein::Result<()> {
    let (u, a) = random_instance(8, 2, 1.0, 42)?;
    let d = decompose_unitary(&u, DEFAULT_GAP_TOL)?;
    println!("reconstruction error {:.3e}", (d.reconstruct() - u.matrix()).norm());
    for z in d.values() {
        println!("eigenvalue {:+.6} {:+.6}i  |z| - 1 = {:.1e}", z.re, z.im, z.norm() - 1.0);
    }

    let cube = matrix_function(&d, &CircleFunction::monomial(3))?;
    let direct = u.matrix() * u.matrix() * u.matrix();
    println!("f(U) = U^3 vs product: {:.3e}", (cube - direct).norm());

    // e^{isA}U composes in s.
    let half = path_point(&path_point(&u, &a, 0.5)?, &a, 0.5)?;
    println!("semigroup defect {:.3e}", (half.matrix() - path_point(&u, &a, 1.0)?.matrix()).norm());
    Ok(())
}
