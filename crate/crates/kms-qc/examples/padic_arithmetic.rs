//! Fixed-precision p-adic arithmetic: precision tracking, square roots,
//! Teichmuller lifts and rational reconstruction.

use kms_qc::{PadicContext, Result};

fn main() -> Result<()> {
    let ctx = PadicContext::new(3, 10)?;
    let x = ctx.from_ratio(7, 4);
    let y = ctx.parse("2*3^2 + 3^3 + O(3^6)")?;
    println!("x = 7/4       = {}", x.to_series_string());
    println!("y             = {}", y.to_series_string());
    println!("x + y         = {}", (&x + &y).to_series_string());
    println!("x * y         = {}", (&x * &y).to_series_string());
    println!("x / y         = {}", x.checked_div(&y)?.to_series_string());

    let s = ctx.from_int(7).sqrt(1)?;
    println!("sqrt(7), root = 1 mod 3: {}", s.to_series_string());
    println!("squares back: {}", (&s * &s).agrees_with(&ctx.from_int(7)));

    let t = ctx.from_int(2).teichmuller()?;
    println!("teichmuller(2) = {} (t^2 = {})", t.to_series_string(), (&t * &t).to_series_string());

    // 440/343 survives a round trip through Z_3 at this precision
    let ctx = PadicContext::new(3, 40)?;
    let q = ctx.from_ratio(440, 343);
    println!("lift of 440/343 matches: {}", q.matches_rational(&q.lift()));
    Ok(())
}
