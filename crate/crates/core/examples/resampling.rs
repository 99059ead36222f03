//! One-dimensional walk through the particle filter steps: predict, weight,
//! normalize, estimate, resample.
//!
//! `cargo run --example resampling`

use ddpf::filter::{
    estimate, init_particles, predict, resample, reweight, DynamicsConfig, Particle, ParticleSet, RandomSource,
    Resampler,
};

fn main() -> ddpf::Result<()> {
    let mut rng = RandomSource::new(1, 0);
    let truth = (40.0, 25.0);
    let mut set = init_particles((30.0, 20.0), 200, 8.0, &mut rng)?;
    let dynamics = DynamicsConfig::default();

    for step in 0..8 {
        set = predict(&set, &dynamics, &mut rng);
        set = reweight(&set, |p| {
            let d2 = (p.x - truth.0).powi(2) + (p.y - truth.1).powi(2);
            (-d2 / 50.0).exp()
        })?;
        let (x, y) = estimate(&set)?;
        println!("step {step}: estimate ({x:6.2}, {y:6.2})");
        set = resample(&set, Resampler::Systematic, &mut rng)?;
    }

    // Systematic resampling copies particles in proportion to their weights.
    let three = ParticleSet::new(
        vec![
            Particle { x: 0.0, y: 0.0 },
            Particle { x: 1.0, y: 0.0 },
            Particle { x: 2.0, y: 0.0 },
        ],
        vec![0.5, 0.3, 0.2],
    )?;
    for method in [Resampler::Systematic, Resampler::Multinomial] {
        let mut counts = [0usize; 3];
        for seed in 0..1000 {
            for p in resample(&three, method, &mut RandomSource::new(seed, 0))?.particles() {
                counts[p.x as usize] += 1;
            }
        }
        let total = counts.iter().sum::<usize>() as f64;
        println!(
            "{method:?}: copy shares {:.3} {:.3} {:.3}",
            counts[0] as f64 / total,
            counts[1] as f64 / total,
            counts[2] as f64 / total
        );
    }
    Ok(())
}
