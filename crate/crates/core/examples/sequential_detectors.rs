//! GLRT and CUSUM on residuals with a mean shift in the second half.

use gridloop::detect::{cusum_detect, glrt_detect, CusumConfig, GlrtConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> gridloop::Result<()> {
    let sigma = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, sigma).unwrap();
    let x: Vec<f64> = (0..48)
        .map(|t| noise.sample(&mut rng) + if t >= 24 { 15.0 } else { 0.0 })
        .collect();

    let glrt = glrt_detect(&x, &GlrtConfig::new(24, 0.05, sigma)?);
    let cusum = cusum_detect(&x, &CusumConfig::from_sigma(sigma)?);
    println!("hour  residual  window mean  threshold  glrt  cusum g  alarm");
    for t in 0..x.len() {
        println!(
            "{t:4}  {:8.2}  {:11.2}  {:9.2}  {:4}  {:7.2}  {}",
            x[t],
            glrt[t].score,
            glrt[t].threshold,
            if glrt[t].alarm { "x" } else { "" },
            cusum.g[t],
            if cusum.decisions[t] { "x" } else { "" }
        );
    }
    println!("cusum alarms at {:?}", cusum.alarm_times);
    Ok(())
}
