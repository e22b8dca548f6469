//! Real-line counterpart: Fréchet derivative of A ↦ A^k.
use krein::circlefn::LineFunction;
use krein::flowderiv::sa_derivative;
use krein::spectra::{random_hermitian, HermitianMatrix};

fn main() -> krein::Result<()> {
    let a = random_hermitian(5, 5, 1.0, 1)?;
    let k = random_hermitian(5, 2, 1.0, 2)?;
    let d = sa_derivative(&LineFunction::power(3), &a, &k)?;
    // A²K + AKA + KA² by hand.
    let (am, km) = (a.matrix(), k.matrix());
    let by_hand = am * am * km + am * km * am + km * am * am;
    println!("|DOI - product rule| = {:.3e}", (d - by_hand).norm());

    let h = 1e-5;
    let plus = HermitianMatrix::new(am + km * krein::spectra::c(h, 0.0))?;
    let cube = |m: &HermitianMatrix| m.matrix() * m.matrix() * m.matrix();
    let fd = (cube(&plus) - cube(&a)) / krein::spectra::c(h, 0.0);
    println!("|DOI - forward difference| = {:.3e}", (sa_derivative(&LineFunction::power(3), &a, &k)? - fd).norm());
    Ok(())
}
