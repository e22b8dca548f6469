//! Norm of a Schur multiplier on the trace class, with its certificate.
use krein::circlefn::CircleFunction;
use krein::multiplier::{diagonal_trace, divided_difference_kernel, half_step_grid, schur_norm};

fn main() -> krein::Result<()> {
    let points = half_step_grid(12);
    let phi = divided_difference_kernel(&CircleFunction::abs_theta(), &points)?;
    let r = schur_norm(&phi, 1e-3)?;
    println!("norm in [{:.6}, {:.6}], bounds only: {}", r.lower, r.upper, r.bounds_only);
    println!(
        "completion min eigenvalue {:.2e} after {} iterations",
        r.certificate.min_eigenvalue, r.certificate.iterations
    );

    // The factorization evaluated on the diagonal reproduces f'.
    let d = diagonal_trace(&r, &points)?;
    for (z, val) in d.points.iter().zip(&d.values).take(4) {
        println!("at {:+.4}{:+.4}i  {:+.6}{:+.6}i", z.re, z.im, val.re, val.im);
    }
    Ok(())
}
