//! Gauge, support function and their derivatives on each body kind.
//!
//! Prints `γ(x)`, `γ°(Dγ(x))` (which is 1 off the kinks), `|D²γ(x) x|` (zero
//! by homogeneity) and the two sides of `⟨x, y⟩ ≤ γ(x) γ°(y)`.

use gradient_obstacle::ConvexBody;

fn main() -> gradient_obstacle::Result<()> {
    let bodies = [
        ("ball r=2", ConvexBody::ball(2, 2.0)?),
        ("ellipse (2, 0.5)", ConvexBody::ellipse(&[2.0, 0.5])?),
        ("p_ball p=4", ConvexBody::p_ball(2, 4.0, 1.0)?),
        ("hexagon", ConvexBody::polygon(&hexagon())?),
        ("reflected ellipse", ConvexBody::ellipse(&[1.0, 3.0])?.reflect()),
    ];
    let x = [0.7, -0.4];
    let y = [-0.2, 1.3];
    println!("{:<18} {:>10} {:>12} {:>12} {:>10} {:>10}", "body", "gamma(x)", "polar(Dg)", "|D2g x|", "<x,y>", "g(x)g°(y)");
    for (name, body) in &bodies {
        let eval = body.gauge_derivatives(&x)?;
        let polar_of_gradient = eval.gradient.as_ref().map(|g| body.support(g.as_slice())).transpose()?;
        let euler = eval.hessian.as_ref().map(|h| (h * nalgebra::DVector::from_column_slice(&x)).norm());
        let cs = body.cauchy_schwarz_check(&x, &y)?;
        println!(
            "{name:<18} {:>10.6} {:>12} {:>12} {:>10.5} {:>10.5}",
            eval.value,
            polar_of_gradient.map_or("kink".into(), |v| format!("{v:.12}")),
            euler.map_or("-".into(), |v| format!("{v:.2e}")),
            cs.lhs,
            cs.rhs
        );
    }
    Ok(())
}

fn hexagon() -> Vec<[f64; 2]> {
    (0..6)
        .map(|k| {
            let t = std::f64::consts::PI / 3.0 * k as f64 + 0.2;
            [1.5 * t.cos() + 0.1, 1.5 * t.sin()]
        })
        .collect()
}
