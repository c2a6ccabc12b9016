//! Residue disks of y^2 = x^6 + 31x^4 + 31x^2 + 1 over F_3, their local
//! parameters, and the two elliptic quotients of a rational point.

use kms_qc::curve::{HyperellipticCurve, RationalPoint};
use kms_qc::{PadicContext, Result};

fn main() -> Result<()> {
    let curve = HyperellipticCurve::kms_int(31)?;
    let p = 3;
    curve.check_good_reduction(p)?;
    println!("{curve}: #X(F_{p}) = {}", curve.count_points(p)?);

    let ctx = PadicContext::new(p, 12)?;
    for d in curve.enumerate_disks(p)? {
        let (x, y) = curve.local_expansion(&ctx, &d, 4)?;
        println!("{:<10} {:?}  x = {x}  y = {y}", d.label(), d.kind);
    }

    let pt = RationalPoint::affine(7, 440);
    let (e1, e2) = curve.kms_quotient_maps(&pt)?;
    println!("{pt} -> ({}, {}) on E_a, ({}, {}) on E_a", e1.x, e1.y, e2.x, e2.y);
    Ok(())
}
