//! Replays the set-up selection rule on a table of mean F-scores and prints
//! every comparison it made.
//!
//! ```sh
//! cargo run --release --example select_setup -- [delta]
//! ```

use eeg_setup::eval::{select_optimal, Candidate, ComfortRanking};
use eeg_setup::builtin_setup;

fn main() -> eeg_setup::Result<()> {
    let delta: f64 = std::env::args().nth(1).map(|s| s.parse().expect("delta")).unwrap_or(0.17);
    let means = [
        ("CzOz", 0.94),
        ("all", 0.82),
        ("noCz", 0.81),
        ("wearable", 0.78),
        ("refT7", 0.74),
        ("Fp1Fp2", 0.71),
    ];
    let candidates = means
        .iter()
        .map(|(name, f)| Ok(Candidate { setup: builtin_setup(name)?, mean_fscore: *f }))
        .collect::<eeg_setup::Result<Vec<_>>>()?;

    let sel = select_optimal(&candidates, "CzOz", &ComfortRanking::default(), delta)?;
    for t in &sel.trace {
        println!("[{}] {:<9} {:<12} {}", if t.kept { "keep" } else { "drop" }, t.setup, t.rule, t.reason);
    }
    println!("delta {delta}: selected {}{}", sel.selected, if sel.flagged { " (flagged)" } else { "" });
    Ok(())
}
