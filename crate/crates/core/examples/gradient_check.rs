//! Compares hand-derived gradients of both training objectives with
//! central finite differences for the default network of each set-up size.
//!
//! ```sh
//! cargo run --release --example gradient_check
//! ```

use eeg_setup::model::gradient_check;
use eeg_setup::{NetSpec, TrainConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> eeg_setup::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in [1, 2, 3] {
        let spec = NetSpec::for_setup(m, 1)?;
        let batch = Array2::from_shape_fn((8, spec.input_dim), |_| rng.random_range(0.0..1.0));
        for epoch in [1, 5, 50] {
            let r = gradient_check(&spec, &TrainConfig { seed: m as u64, ..Default::default() }, &batch, epoch);
            println!(
                "m={m} input={} latent={} epoch={epoch:>2}: {} parameters, max relative error {:.2e}",
                spec.input_dim, spec.latent_dim, r.n_params_checked, r.max_rel_error
            );
        }
    }
    Ok(())
}
