//! Writes the Hallway2 model file.
//!
//! Usage: `cargo run -p perseus-core --example gen_hallway2 [OUT]`
//! (default `data/hallway2.POMDP`).

use perseus_core::benchmarks::hallway2;

fn main() -> std::io::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "data/hallway2.POMDP".into());
    std::fs::write(&out, hallway2::pomdp_text())?;
    eprintln!("wrote {out}");
    Ok(())
}
