//! Derivative of f(e^{isA}U) in s against central finite differences.
use krein::circlefn::CircleFunction;
use krein::flowderiv::fd_probe;
use krein::spectra::random_instance;

fn main() -> krein::Result<()> {
    let (u, a) = random_instance(8, 2, 1.0, 5)?;
    for f in [CircleFunction::monomial(3), CircleFunction::cos()] {
        let r = fd_probe(&f, &u, &a, 0.3, &[1e-1, 1e-2, 1e-3])?;
        println!("{}: |Q_s| = {:.6}", f.name(), r.qs.norm());
        for (h, e) in &r.fd_errors {
            println!("  h = {h:.0e}  error {e:.3e}");
        }
        if let Some(order) = r.fitted_order {
            println!("  fitted order {order:.3}");
        }
    }
    Ok(())
}
