//! Prints N(B) for the x·y-type variety Σ x_j y_j = 0 at a few heights.

use std::time::Instant;

use hyperspike::forms::{height_count, Variety};

fn main() -> hyperspike::Result<()> {
    let variety = Variety::new(1, 2, vec![1, 1, 1])?;
    for b in [1e2, 1e3, 1e4, 1e5, 1e6] {
        let start = Instant::now();
        let n = height_count(&variety, b)?;
        let ratio = n.to_string().parse::<f64>().unwrap() / (b * b.ln());
        println!("B = {b:.0e}  N = {n}  N/(B log B) = {ratio:.5}  ({:.2?})", start.elapsed());
    }
    Ok(())
}
