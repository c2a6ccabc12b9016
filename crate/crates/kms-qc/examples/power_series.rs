//! Truncated Laurent series: inverse, square root, composition and
//! integration with the residue split off.

use kms_qc::{PadicContext, Result, Series};

fn main() -> Result<()> {
    let ctx = PadicContext::new(5, 20)?;
    let one = ctx.one();
    // 1 + t + 3t^2 + O(t^8)
    let s = Series::from_terms(&[(0, one.clone()), (1, one.clone()), (2, ctx.from_int(3))], 8, &ctx.zero());
    println!("s        = {s}");
    println!("1/s      = {}", s.inverse()?);
    println!("sqrt(s)  = {}", s.sqrt(&one)?);
    let t2 = Series::monomial(one.clone(), 2, 8);
    println!("s(t^2)   = {}", s.compose(&t2)?);

    // t^-2 + t^-1 + 1: the t^-1 term gives a logarithm, kept as the residue
    let l = Series::from_terms(&[(-2, one.clone()), (-1, one.clone()), (0, one)], 6, &ctx.zero());
    let (prim, res) = l.integrate_split();
    println!("int l    = {prim} + ({res}) log t");
    Ok(())
}
