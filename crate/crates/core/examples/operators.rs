//! Randomized verification of the structural assumptions on `F`.
//!
//! The Pucci minimal operator is concave, so its convexity probe fails.

use gradient_obstacle::linalg::{Mat2, Vec2};
use gradient_obstacle::operators::verify_assumptions;
use gradient_obstacle::{EllipticOperator, LinearOperator};

fn main() {
    let operators = [
        ("poisson", EllipticOperator::poisson(1.0)),
        ("pucci plus", EllipticOperator::PucciPlus { lambda: 1.0, big_lambda: 2.0, f: 3.0 }),
        ("pucci minus", EllipticOperator::PucciMinus { lambda: 1.0, big_lambda: 2.0, f: 3.0 }),
        (
            "bellman",
            EllipticOperator::Bellman(vec![
                LinearOperator::new(Mat2::new(1.0, 0.0, 0.0, 2.0), Vec2::zeros(), 0.0, 2.0),
                LinearOperator::new(Mat2::new(2.0, 0.5, 0.5, 1.0), Vec2::new(0.5, 0.0), 0.0, 2.0),
            ]),
        ),
        ("variable linear", EllipticOperator::VariableLinear { amplitude: 1.0 }),
        ("broken (A = -I)", EllipticOperator::Linear(LinearOperator::new(-Mat2::identity(), Vec2::zeros(), 0.0, 1.0))),
    ];
    for (name, op) in &operators {
        let report = verify_assumptions(op, 2000, 11);
        let failing: Vec<&str> = report.checks.iter().filter(|c| c.violations > 0).map(|c| c.name).collect();
        println!(
            "{name:<16} lambda={:<6.4} Lambda={:<6.4} pass={:<5} failing={failing:?}",
            report.lambda_e,
            report.big_lambda_e,
            report.pass()
        );
    }
}
