//! Polar duality: the `L¹` ball and the square are polar to each other, and
//! taking the polar twice gives the body back.

use gradient_obstacle::ConvexBody;

fn main() -> gradient_obstacle::Result<()> {
    let l1 = ConvexBody::polygon(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])?;
    let square = l1.polar();
    println!("polar of the L1 ball has vertices {:?}", square.polygon_vertices());
    let twice = square.polar();
    let mut worst: f64 = 0.0;
    for k in 0..360 {
        let t = (k as f64).to_radians();
        let x = [t.cos(), t.sin()];
        // γ_{K°} = γ°_K, and the gauge of the square is the max norm
        worst = worst.max((square.gauge2(x) - l1.support2(x)).abs());
        worst = worst.max((square.gauge2(x) - x[0].abs().max(x[1].abs())).abs());
        worst = worst.max((twice.gauge2(x) - l1.gauge2(x)).abs());
    }
    println!("max identity defect over 360 directions: {worst:.2e}");

    let ellipse = ConvexBody::ellipse(&[2.0, 0.5])?;
    let polar = ellipse.polar();
    let x = [0.3, 0.8];
    println!("ellipse (2, 0.5): gauge of polar {:.6} = support {:.6}", polar.gauge2(x), ellipse.support2(x));
    println!("radial bounds: body {:?}, polar {:?}", ellipse.radial_bounds(), polar.radial_bounds());
    Ok(())
}
