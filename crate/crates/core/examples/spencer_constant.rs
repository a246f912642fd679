use std::time::Instant;

use hyperspike::forms::Variety;
use hyperspike::local::{predicted_constant, truncated_singular_series, TruncationParams};

fn main() -> hyperspike::Result<()> {
    let v = Variety::new(1, 2, vec![1, 1, 1])?;
    let t = Instant::now();
    let s = truncated_singular_series(v.form(), 10_000)?;
    println!("series W=1e4: {:.12} ({:?})", s.value, t.elapsed());
    let t = Instant::now();
    let c = predicted_constant(&v, &TruncationParams::default())?;
    println!(
        "C chain {:.9} printed {:.9} E {:.9} I+ {:.12} sum {:?} ({:?})",
        c.chain,
        c.printed,
        c.density.e_full,
        c.density.i_plus.extrapolated,
        c.density.sign_sum,
        t.elapsed()
    );
    Ok(())
}
