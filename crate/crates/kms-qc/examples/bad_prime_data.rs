//! Feeding potential type V constants to the solver. The place 7 entry
//! below has alpha = pi(b) = pi(z0), so it shifts nothing and the candidate
//! set matches the run without it.

use kms_qc::qc::{BadPrimeData, QCProblem, QCSolver};
use kms_qc::Result;

const DATA: &str = r#"{
  "entries": [
    { "place": "7", "lambda": "1/2", "mu": "3", "alpha": "0", "pi_b": "0", "pi_z0": "0" }
  ]
}"#;

fn main() -> Result<()> {
    let plain = QCSolver::new(QCProblem::kms_int(31, 3, 7)?)?.solve()?;
    let solver = QCSolver::new(QCProblem::kms_int(31, 3, 7)?.with_bad_primes(DATA.to_string()))?;
    let o = BadPrimeData::from_json(solver.context(), DATA)?.offsets(solver.context());
    println!("offsets: F1(z) {}  F1(z0) {}  F2(z) {}  F2(z0) {}", o.f1_z, o.f1_z0, o.f2_z, o.f2_z0);
    let with = solver.solve()?;
    println!("candidates without data: {}, with data: {}", plain.non_rational_count(), with.non_rational_count());
    println!("{}", serde_json::to_string_pretty(&with.families()).unwrap());
    Ok(())
}
