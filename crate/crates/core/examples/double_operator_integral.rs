//! f(V) - f(U) written as a double operator integral against V - U.
use krein::circlefn::CircleFunction;
use krein::doi::{direct_difference, divided_difference_on_spectra, dkbs_difference, doi_compute, trace_norm};
use krein::spectra::{decompose_unitary, path_point, random_instance, trace, DEFAULT_GAP_TOL};

fn main() -> krein::Result<()> {
    let (u, a) = random_instance(10, 3, 1.0, 3)?;
    let v = path_point(&u, &a, 1.0)?;
    for f in [CircleFunction::monomial(5), CircleFunction::cos(), CircleFunction::random_trig(6, 3)] {
        let err = (dkbs_difference(&f, &u, &v)? - direct_difference(&f, &u, &v)?).norm();
        println!("{:<12} |DOI - direct| = {err:.2e}", f.name());
    }

    // The same operator acting on an arbitrary T.
    let du = decompose_unitary(&u, DEFAULT_GAP_TOL)?;
    let dv = decompose_unitary(&v, DEFAULT_GAP_TOL)?;
    let phi = divided_difference_on_spectra(&CircleFunction::monomial(2), &dv, &du)?;
    let t = a.matrix().clone();
    let out = doi_compute(&phi, &dv, &t, &du)?;
    println!("trace {:.6}, trace norm {:.6} (input {:.6})", trace(&out), trace_norm(&out)?, trace_norm(&t)?);
    Ok(())
}
