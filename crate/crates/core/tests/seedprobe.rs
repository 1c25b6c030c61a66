use noether::invariants::SymmetrySpec;
use noether::network::LagrangianModel;
use noether::seeds::split_seed;
use noether::systems::SystemSpec;
use noether::training::{train, TrainConfig};

#[test]
#[ignore]
fn probe_init_seed_robustness() {
    let system = SystemSpec::kepler_default();
    for seed in 0..20u64 {
        let init_seed = split_seed(seed, 1);
        let config = TrainConfig { epochs: 30, seed, ..TrainConfig::default() };
        let mut line = format!("seed={seed:2}: ");
        for spec in [SymmetrySpec::KeplerRotational, SymmetrySpec::None { dim: 3 }] {
            let model = LagrangianModel::<f64>::init(init_seed, spec, 3, 32).unwrap();
            match train(&model, &system, &config) {
                Ok((_, h)) => line.push_str(&format!("{:9.2e} ", h.epoch_mse[29])),
                Err(e) => line.push_str(&format!("ABORT({e}) ")),
            }
        }
        println!("{line}");
    }
}
