//! Exact Hodge constants c^H, r^H and xi for a few members of the family.

use kms_qc::curve::HyperellipticCurve;
use kms_qc::hodge::{hodge_constants, PairingConstants};
use kms_qc::Result;
use num_rational::BigRational;

fn main() -> Result<()> {
    let zero = BigRational::from_integer(0.into());
    let one = BigRational::from_integer(1.into());
    for a in [31, 19, -5, 2] {
        let curve = HyperellipticCurve::kms_int(a)?;
        let h = hodge_constants(&curve, &PairingConstants::kms(), (&zero, &one))?;
        let r: Vec<String> = h.r_h.iter().map(|f| f.to_string()).collect();
        println!("a = {a:>3}: c^H zero: {}, xi zero: {}, r^H = ({})", h.all_c_zero(), h.all_xi_zero(), r.join(", "));
    }
    let curve = HyperellipticCurve::kms(BigRational::new(5.into(), 3.into()))?;
    let h = hodge_constants(&curve, &PairingConstants::kms(), (&zero, &one))?;
    println!("{}", serde_json::to_string_pretty(&h.report()).unwrap());
    Ok(())
}
