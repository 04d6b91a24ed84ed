//! Generates the bundled synthetic price table: 200 monthly observations of
//! sugar ($/t) and first-generation ethanol ($/L) from a correlated log-AR(1)
//! process whose stationary means match the average prices of the case.
//!
//! cargo run -p biocap --example gen_prices -- cases/appendix_prices.csv

use std::env;
use std::fs::File;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 2008;
const ROWS: usize = 200;
const BURN_IN: usize = 120;
const MEANS: [f64; 2] = [389.74, 0.51];
const PERSISTENCE: f64 = 0.9;
const SHOCK_SD: [f64; 2] = [0.07, 0.06];
const CORRELATION: f64 = 0.6;

fn main() -> anyhow::Result<()> {
    let path = env::args().nth(1).unwrap_or_else(|| "cases/appendix_prices.csv".to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // Stationary log variance of an AR(1) is sd^2 / (1 - phi^2); shift the
    // log mean so the level mean is the target.
    let mu: Vec<f64> = (0..2)
        .map(|k| MEANS[k].ln() - 0.5 * SHOCK_SD[k].powi(2) / (1.0 - PERSISTENCE * PERSISTENCE))
        .collect();
    let mut x = mu.clone();
    let mut out = csv::Writer::from_writer(File::create(&path)?);
    out.write_record(["sugar", "ethanol_1g"])?;
    for t in 0..BURN_IN + ROWS {
        let e1: f64 = StandardNormal.sample(&mut rng);
        let e2: f64 = StandardNormal.sample(&mut rng);
        let shocks = [e1, CORRELATION * e1 + (1.0 - CORRELATION * CORRELATION).sqrt() * e2];
        for k in 0..2 {
            x[k] = mu[k] + PERSISTENCE * (x[k] - mu[k]) + SHOCK_SD[k] * shocks[k];
        }
        if t >= BURN_IN {
            out.write_record([format!("{:.2}", x[0].exp()), format!("{:.4}", x[1].exp())])?;
        }
    }
    out.flush()?;
    Ok(())
}
