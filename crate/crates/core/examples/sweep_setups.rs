//! Cross-validates every built-in set-up on a synthetic corpus and picks the
//! wearable one.
//!
//! ```sh
//! cargo run --release --example sweep_setups -- [corpus_seed] [alpha|nonalpha]
//! ```

use std::time::Instant;

use eeg_setup::eval::{sweep, ComfortRanking};
use eeg_setup::synthgen::{generate_corpus, DEFAULT_N_RECORDINGS};
use eeg_setup::{builtin_setups, Label, PipelineConfig, SynthConfig};

fn main() -> eeg_setup::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(0);
    let positive: Label = args.next().map(|s| s.parse().expect("class")).unwrap_or(Label::Alpha);

    let synth = SynthConfig { seed, ..Default::default() };
    let corpus = generate_corpus(&synth, DEFAULT_N_RECORDINGS)?;

    let t0 = Instant::now();
    let report = sweep(&corpus, &builtin_setups(), positive, &PipelineConfig::default(), &ComfortRanking::default())?;
    print!("{}", report.summary_text());
    eprintln!("sweep took {:.1} s", t0.elapsed().as_secs_f64());
    Ok(())
}
