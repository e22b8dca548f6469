//! Lower bounds for the multiplier norm of the divided difference of |θ|
//! on finer and finer grids.
use krein::circlefn::CircleFunction;
use krein::multiplier::ol_lower_bound;

fn main() -> krein::Result<()> {
    let grids: Vec<usize> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|x| x.parse().expect("grid size")).collect())
        .unwrap_or_else(|| vec![8, 16, 32, 64]);
    for b in ol_lower_bound(&CircleFunction::abs_theta(), &grids)? {
        println!("n = {:>4}  grid {:.6}  running {:.6}  ln n = {:.3}", b.n, b.grid_lower, b.lower, (b.n as f64).ln());
    }
    Ok(())
}
