//! Frobenius on H^1_dR via Kedlaya reduction, checked against a point count.

use kms_qc::curve::HyperellipticCurve;
use kms_qc::frobenius::{frobenius_matrix, CohomologyBasisChange};
use kms_qc::{PadicContext, Result};

fn main() -> Result<()> {
    for (a, p) in [(31, 3), (19, 11), (2, 7)] {
        let curve = HyperellipticCurve::kms_int(a)?;
        let ctx = PadicContext::new(p, 24)?;
        let fd = frobenius_matrix(&curve, &ctx, 10)?;
        let cert = fd.certified_precision;
        let h1 = fd.h1_block(&CohomologyBasisChange::for_curve(&curve))?.map(|c| c.truncate(cert));
        let count = curve.count_points(p)?;
        println!("a = {a}, p = {p}: {} terms, certified to O({p}^{cert})", fd.terms);
        println!("  trace = {}  (p + 1 - #X(F_p) = {})", h1.trace().to_series_string(), p as i64 + 1 - count as i64);
        println!("  det   = {}", h1.det()?.to_series_string());
        let cp: Vec<String> = h1.charpoly().iter().map(|c| c.to_series_string()).collect();
        println!("  charpoly (constant term first): {}", cp.join(" | "));
    }
    Ok(())
}
