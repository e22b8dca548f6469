//! trace(f(ζV) - f(ζU)) over the circle, directly and through ξ.
use krein::circlefn::CircleFunction;
use krein::spectra::{path_point, random_instance};
use krein::ssf::{ssf_for_pair, twist_scan, twist_scan_rotated, TrackingPolicy};

fn main() -> krein::Result<()> {
    let (u, a) = random_instance(5, 2, 1.5, 4)?;
    let v = path_point(&u, &a, 1.0)?;
    let f = CircleFunction::random_trig(4, 2);
    let direct = twist_scan(&f, &u, &v, 16)?;
    let via = twist_scan_rotated(&f, &ssf_for_pair(&u, &v, &TrackingPolicy::default())?, 16)?;
    for ((t, x), (_, y)) in direct.samples.iter().zip(&via.samples) {
        println!("θ = {t:.4}  {:+.6}{:+.6}i  diff {:.1e}", x.re, x.im, (x - y).norm());
    }
    println!("max jump {:.3e}", direct.max_jump);
    Ok(())
}
