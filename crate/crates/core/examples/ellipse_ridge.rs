//! Ridge of the Euclidean distance in the ellipse with semi-axes (2, 1).
//!
//! The ridge is the segment of the major axis between the evolute cusps
//! `±(a − b²/a) = ±1.5`.

use std::sync::Arc;
use std::time::Instant;

use gradient_obstacle::obstacle::{build_obstacle, Which};
use gradient_obstacle::{BoundaryDatum, ConvexBody, Domain2D, DomainGrid, DomainKind, Grid};

fn main() -> gradient_obstacle::Result<()> {
    let h = 1.0 / 32.0;
    let domain = Arc::new(Domain2D::new(DomainKind::Ellipse { semi_major: 2.0, semi_minor: 1.0 }, h)?);
    let grid = Grid::covering(domain.half_extents(), h, 3)?;
    let dgrid = DomainGrid::new(&domain, grid)?;
    let ball = ConvexBody::ball(2, 1.0)?;
    let start = Instant::now();
    let rho = build_obstacle(&domain, &ball, &BoundaryDatum::Zero, &dgrid, Which::Upper)?;
    println!("built rho on {} nodes in {:.2?}", dgrid.interior().len(), start.elapsed());

    let ridge = rho.ridge();
    let extent = |nodes: &[usize]| {
        nodes.iter().map(|k| grid.point_of(*k)).fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |acc, p| {
            (acc.0.min(p[0]), acc.1.max(p[0]), acc.2.max(p[1].abs()))
        })
    };
    let multiple = ridge.multiplicity_nodes();
    let caustic = ridge.caustic_nodes();
    let (lo, hi, off) = extent(&multiple);
    println!("multiplicity nodes: {} spanning x in [{lo:.3}, {hi:.3}], max |y| = {off:.3}", multiple.len());
    let (lo, hi, off) = extent(&caustic);
    println!("caustic nodes: {} spanning x in [{lo:.3}, {hi:.3}], max |y| = {off:.3}", caustic.len());
    println!("analytic ridge: [-1.5, 1.5] x {{0}}");
    println!("min distance from ridge to boundary: {:.4}", ridge.min_boundary_distance);
    Ok(())
}
