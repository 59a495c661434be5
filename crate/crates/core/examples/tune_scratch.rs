// scratch harness for tuning desk-scale settings; not part of the artifact
use gpatk_core::attack::{dpa2dl_gp_attack, AttackBudget, SurrogateConfig, TargetSpec};
use gpatk_core::data::inject_fake;
use gpatk_core::eval::{hit_ratio, jaccard_topk_similarity, train_victim_topk, VictimConfig};
use gpatk_core::gpengine::GpConfig;
use gpatk_core::recmodel::{BatchSize, LossKind, Negatives, TrainConfig};
use gpatk_core::synthetic::{desk_fixture, least_popular_item};

fn base_train(lr: f64, l2: f64, epochs: usize, batch: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        loss: LossKind::Bce,
        lr,
        l2,
        epochs,
        batch_size: BatchSize::Size(batch),
        neg_weight: 1.0,
        negatives: Negatives::Sampled { per_positive: 1 },
        seed,
    }
}

fn jaccard_experiment() {
    let k = 10;
    println!("=== jaccard experiment ===");
    for lr in [0.05, 0.1, 0.2] {
        for alpha_even in [1.0, 5.0, 10.0] {
            let mut results: Vec<(usize, f64, f64)> = vec![];
            for epochs in [1usize, 5, 10] {
                let mut gp_sum = 0.0;
                let mut plain_sum = 0.0;
                let seeds = 5;
                for seed in 0..seeds {
                    let ds = desk_fixture(100 + seed);
                    // victim: long training
                    let victim = VictimConfig::mf_bce(16, base_train(0.1, 1e-5, 500, 64, 0));
                    let victim_topk = train_victim_topk(&ds, &victim, k, 1000 + seed).unwrap();

                    let strain = base_train(lr, 1e-5, epochs, 64, 0);
                    // plain surrogate
                    let plain_cfg = VictimConfig::mf_bce(16, strain.clone());
                    let plain_topk = train_victim_topk(&ds, &plain_cfg, k, 2000 + seed).unwrap();
                    plain_sum += jaccard_topk_similarity(&plain_topk, &victim_topk).unwrap();

                    // gp surrogate (manual loop since train_victim_topk has no gp)
                    let gp = GpConfig {
                        alpha_even,
                        ..GpConfig::default()
                    };
                    let mut table = gpatk_core::recmodel::EmbeddingTable::init(
                        ds.n_users(),
                        ds.n_items(),
                        16,
                        gpatk_core::seeds::child(2000 + seed, "victim-init", 0),
                    );
                    let mut cfg = strain.clone();
                    cfg.seed = gpatk_core::seeds::child(2000 + seed, "victim-train", 0);
                    for e in 0..epochs {
                        gpatk_core::recmodel::train_epoch(&mut table, &ds, &cfg, Some(&gp), e)
                            .unwrap();
                    }
                    let gp_topk =
                        gpatk_core::recmodel::top_k_real_users(&table, &ds, k).unwrap();
                    gp_sum += jaccard_topk_similarity(&gp_topk, &victim_topk).unwrap();
                }
                results.push((epochs, gp_sum / seeds as f64, plain_sum / seeds as f64));
            }
            print!("lr={lr} a_even={alpha_even}: ");
            for (e, g, p) in &results {
                print!("E{e}: gp={g:.3} plain={p:.3}  ");
            }
            println!();
        }
    }
}

fn attack_experiment() {
    println!("=== attack experiment ===");
    let k = 10;
    for adv_weight in [5.0, 20.0] {
        for retrain_lr in [0.1, 0.2] {
            let mut none_sum = 0.0;
            let mut plain_sum = 0.0;
            let mut gp_sum = 0.0;
            let seeds = 5u64;
            for seed in 0..seeds {
                let ds = desk_fixture(300 + seed);
                let target = least_popular_item(&ds);
                let targets = TargetSpec::new(vec![target]).unwrap();
                let budget = AttackBudget { n_fake: 5, tau: 10 };
                let scfg = SurrogateConfig {
                    dim: 16,
                    train: base_train(retrain_lr, 1e-5, 30, 64, 0),
                    retrain_epochs: 1,
                    adv_epochs: 1,
                    adv_weight,
                    pretrain: false,
                    sample_ratio: 0.0,
                };
                let victim = VictimConfig::mf_bce(16, base_train(0.1, 1e-5, 200, 64, 0));

                // none
                let topk = train_victim_topk(&ds, &victim, k, 9000 + seed).unwrap();
                none_sum += hit_ratio(&topk, &ds, target, k).unwrap();

                // plain dpa2dl
                let fake =
                    dpa2dl_gp_attack(&ds, &targets, budget, &scfg, None, 42 + seed).unwrap();
                let poisoned = inject_fake(&ds, &fake).unwrap();
                let topk = train_victim_topk(&poisoned, &victim, k, 9000 + seed).unwrap();
                plain_sum += hit_ratio(&topk, &poisoned, target, k).unwrap();

                // gp dpa2dl
                let gp = GpConfig::default();
                let fake =
                    dpa2dl_gp_attack(&ds, &targets, budget, &scfg, Some(&gp), 42 + seed).unwrap();
                let poisoned = inject_fake(&ds, &fake).unwrap();
                let topk = train_victim_topk(&poisoned, &victim, k, 9000 + seed).unwrap();
                gp_sum += hit_ratio(&topk, &poisoned, target, k).unwrap();
            }
            println!(
                "adv_w={adv_weight} lr={retrain_lr}: none={:.4} plain={:.4} gp={:.4}",
                none_sum / seeds as f64,
                plain_sum / seeds as f64,
                gp_sum / seeds as f64
            );
        }
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "jaccard" => jaccard_experiment(),
        "attack" => attack_experiment(),
        _ => {
            jaccard_experiment();
            attack_experiment();
        }
    }
}
