//! y^2 = x^6 + 19x^4 + 19x^2 + 1 at p = 11 with a quadratic auxiliary point.
//! The three points below satisfy 3 z2 + z3 - 6 z1 = 0 in the Jacobian, so
//! the same combination of F1 and F2 must vanish. Takes about a minute.

use kms_qc::curve::{parse_point, SqrtEmbedding};
use kms_qc::qc::{QCProblem, QCSolver};
use kms_qc::Result;

fn main() -> Result<()> {
    // sqrt(3) = 5 mod 11
    let emb = SqrtEmbedding { d: 3, residue: 5 };
    let problem = QCProblem::kms_int(19, 11, 16)?.with_z0_text("(sqrt(3),16)");
    let solver = QCSolver::with_embedding(problem, Some(&emb))?;
    let ctx = solver.context();
    let pts = [
        "(sqrt(3),16)",
        "(-sqrt(3)+2, -24*sqrt(3)+40)",
        "(-39/71*sqrt(3)+98/71, -2736216/357911*sqrt(3)+5551000/357911)",
    ];
    let mut f = Vec::new();
    for s in pts {
        f.push(solver.eval_f(&parse_point(s, ctx, Some(&emb))?)?);
    }
    let f1 = &(&f[1].0.mul_int(3) + &f[2].0) - &f[0].0.mul_int(6);
    let f2 = &(&f[1].1.mul_int(3) + &f[2].1) - &f[0].1.mul_int(6);
    println!("3 F1(z2) + F1(z3) - 6 F1(z1) = {}", f1.to_series_string());
    println!("3 F2(z2) + F2(z3) - 6 F2(z1) = {}", f2.to_series_string());
    Ok(())
}
