//! `ρ` on a disc against `R − |x|`, a tilted datum, and a polygonal gauge.

use std::sync::Arc;

use gradient_obstacle::obstacle::{build_obstacle, monotonicity_check, Which};
use gradient_obstacle::{BoundaryDatum, ConvexBody, Domain2D, DomainGrid, DomainKind, Grid};

fn main() -> gradient_obstacle::Result<()> {
    let h = 1.0 / 32.0;
    let radius = 2.0;
    let domain = Arc::new(Domain2D::new(DomainKind::Disc { radius }, h)?);
    let grid = Grid::covering(domain.half_extents(), h, 2)?;
    let dgrid = DomainGrid::new(&domain, grid)?;
    let ball = ConvexBody::ball(2, 1.0)?;

    let rho = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Upper)?;
    let err = dgrid
        .interior()
        .iter()
        .map(|&k| (rho.value_at_node(k) - (radius - grid.point_of(k)[0].hypot(grid.point_of(k)[1]))).abs())
        .fold(0.0, f64::max);
    println!("ball, phi = 0: sup |rho - (R - |x|)| = {err:.2e}");
    println!("ridge nodes: {} (the center)", rho.ridge().nodes().len());
    let mono = monotonicity_check(&rho, 500, 3, 1e-6);
    println!("second derivatives along characteristics: max increase {:.2e}, pass {}", mono.max_increase, mono.pass);

    let tilted = BoundaryDatum::Affine { slope: [0.5, 0.0], offset: 0.0 };
    let upper = build_obstacle(&domain, &ball, &tilted, &dgrid, Which::Upper)?;
    let lower = build_obstacle(&domain, &ball, &tilted, &dgrid, Which::Lower)?;
    let centre = grid.index(grid.nx / 2, grid.ny / 2);
    println!(
        "phi = x/2: rho(0) = {:.4}, -rho_bar(0) = {:.4}",
        upper.value_at_node(centre),
        lower.value_at_node(centre)
    );

    let square = ConvexBody::polygon(&[[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])?;
    let max_norm = build_obstacle(&domain, &square, &BoundaryDatum::Zero, &dgrid, Which::Upper)?;
    println!(
        "square K (max-norm gauge): rho(0) = {:.4} (exact R/sqrt2 = {:.4})",
        max_norm.value_at_node(centre),
        radius / 2f64.sqrt()
    );
    Ok(())
}
