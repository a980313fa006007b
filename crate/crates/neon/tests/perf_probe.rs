//! Manual timing probe for the desk-scale pipeline. Run with
//! `cargo test -p neon --test perf_probe -- --ignored --nocapture`.

use std::time::Instant;

use neon::eval::evaluate;
use neon::train::{run_training, ModelOptions, TrainingConfig};
use neon::world::{all_profiles, bayes_optimal_sa, build_world, sample_records, WorldConfig};

#[test]
#[ignore]
fn time_default_pipeline() {
    let t0 = Instant::now();
    let world = build_world(&WorldConfig::default()).unwrap();
    let records = sample_records(&world, world.config.record_count, 123).unwrap();
    let profiles = all_profiles(&world);
    println!("synth: {:?} ({} records)", t0.elapsed(), records.len());

    for epochs in [1usize, 3] {
        let config = TrainingConfig {
            epochs,
            seed: 5,
            ..TrainingConfig::default()
        };
        let t1 = Instant::now();
        let artifacts = run_training(&records, &profiles, &config, &ModelOptions::default()).unwrap();
        let train_time = t1.elapsed();

        let t2 = Instant::now();
        let report = evaluate(&artifacts.model, &artifacts.features, &artifacts.split.eval).unwrap();
        let eval_time = t2.elapsed();
        let oracle = bayes_optimal_sa(&world, &artifacts.split.eval).unwrap();
        println!(
            "epochs={epochs}: train {train_time:?}, eval {eval_time:?}, SA {:.4} (VDSA {:.4} ISSA {:.4}), oracle {:.4}",
            report.sa, report.vdsa, report.issa, oracle
        );
        for e in &artifacts.trace {
            println!("  epoch {}: need {:.4} way {:.4} total {:.4}", e.epoch, e.need_loss, e.way_loss, e.total);
        }
    }
}
