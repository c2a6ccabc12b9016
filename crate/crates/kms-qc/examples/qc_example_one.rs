//! Candidate points of y^2 = x^6 + 31x^4 + 31x^2 + 1 at p = 3 to O(3^7).

use kms_qc::qc::{QCProblem, QCSolver};
use kms_qc::Result;

fn main() -> Result<()> {
    let problem = QCProblem::kms_int(31, 3, 7)?.with_known_points(QCProblem::example_one_points());
    let solver = QCSolver::new(problem)?;
    let report = solver.solve()?;
    print!("{}", report.to_text());

    // G vanishes at every rational point
    let ctx = solver.context();
    for pt in QCProblem::example_one_points() {
        let g = solver.eval_g(&pt.to_padic(ctx))?;
        println!("G{pt} = {}", g.to_series_string());
    }
    Ok(())
}
