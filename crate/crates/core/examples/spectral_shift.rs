//! Spectral shift function from tracked eigenphases, and the trace formula.
use krein::circlefn::CircleFunction;
use krein::ssf::{build_ssf, track_eigenphases, verify_trace_formula, TrackingPolicy};
use krein::spectra::random_instance;

fn main() -> krein::Result<()> {
    let (u, a) = random_instance(6, 2, 2.5, 9)?;
    let braid = track_eigenphases(&u, &a, &TrackingPolicy::default())?;
    println!("{} samples, largest step {:.3}", braid.s_grid.len(), braid.max_increment());
    let xi = build_ssf(&braid)?.merged();
    for (s, e, v) in xi.arcs() {
        println!("[{s:.4}, {e:.4})  {v:+.4}");
    }
    println!("mean {:.1e}, shift {}", xi.mean(), xi.normalization_shift);

    for f in [CircleFunction::monomial(2), CircleFunction::random_trig(10, 1)] {
        let r = verify_trace_formula(&f, &u, &a)?;
        println!("{:<10} lhs {:.8}  rhs {:.8}  rel {:.1e}", f.name(), r.lhs, r.rhs, r.rel_error);
    }
    Ok(())
}
