//! Smooth strictly convex bodies `K°_k` shrinking to the `L¹` ball.
//!
//! The support gap at `e1` (a vertex of the polar square) roughly halves
//! each time `k` doubles, so `k * gap` levels off.

use gradient_obstacle::{smooth_approximation, ConvexBody};

fn main() -> gradient_obstacle::Result<()> {
    let l1 = ConvexBody::polygon(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])?;
    let probe = [1.0, 0.0];
    let diagonal = [std::f64::consts::FRAC_1_SQRT_2; 2];
    println!("{:>5} {:>12} {:>12} {:>12} {:>14}", "k", "h(e1)-1", "h(diag)-1/r2", "k*gap", "polar gauge(e1)");
    let mut previous: Option<ConvexBody> = None;
    for k in [1, 2, 4, 8, 16, 32, 64] {
        let body = smooth_approximation(&l1, k)?;
        let gap = body.support2(probe) - l1.support2(probe);
        println!(
            "{k:>5} {gap:>12.3e} {:>12.3e} {:>12.4} {:>14.6}",
            body.support2(diagonal) - l1.support2(diagonal),
            k as f64 * gap,
            body.polar().gauge2(probe)
        );
        if let Some(prev) = previous {
            let nested = (0..720).all(|i| {
                let t = (i as f64 * 0.5).to_radians();
                body.support2([t.cos(), t.sin()]) < prev.support2([t.cos(), t.sin()])
            });
            assert!(nested, "levels must be strictly nested");
        }
        previous = Some(body);
    }
    Ok(())
}
