//! Single and double Coleman integrals between rational points of
//! y^2 = x^6 + 31x^4 + 31x^2 + 1 at p = 3, with the shuffle identity.

use kms_qc::coleman::ColemanEngine;
use kms_qc::curve::{HyperellipticCurve, RationalPoint};
use kms_qc::{PadicContext, Result};

fn main() -> Result<()> {
    let curve = HyperellipticCurve::kms_int(31)?;
    let ctx = PadicContext::new(3, 50)?;
    let b = RationalPoint::affine(0, 1).to_padic(&ctx);
    let z = RationalPoint::affine(7, 440).to_padic(&ctx);
    let engine = ColemanEngine::new(&curve, &ctx, 20, &curve.reduce_mod_p(&b)?)?;
    println!("certified: single O(3^{}), double O(3^{})", engine.certified, engine.double_certified);

    let single = engine.single_integrals(&b, &z)?;
    for (i, r) in single.iter().enumerate() {
        println!("int_b^z w{i} = {}", r.value.to_series_string());
    }
    println!("path: {}", single[0].path_note);

    let w01 = engine.double_integral(0, 1, &b, &z)?.value;
    let w10 = engine.double_integral(1, 0, &b, &z)?.value;
    println!("int w0 w1 = {}", w01.to_series_string());
    let defect = &(&w01 + &w10) - &(&single[0].value * &single[1].value);
    println!("int w0w1 + int w1w0 - int w0 * int w1 = {}", defect.to_series_string());

    // a rational point in a different disk: integrals of holomorphic forms
    // between rational points are not forced to vanish, but w0 and w1 pull
    // back from the elliptic quotients and match their ranks
    let m = RationalPoint::affine(-1, 8).to_padic(&ctx);
    let s2 = engine.single_integrals(&b, &m)?;
    println!("int_b^(-1,8) w0 = {}", s2[0].value.to_series_string());
    Ok(())
}
