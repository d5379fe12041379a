// Temporary development probe: unit-level adjustment histogram.
use mandat::election::DynamicOptions;
use mandat::files;
use mandat::montecarlo::{run_batch, PerturbationConfig};

fn main() {
    let input =
        files::parse_election(&std::fs::read_to_string("data/sweden2010.csv").unwrap()).unwrap();
    let (rules, _) = files::parse_rules(
        &std::fs::read_to_string("data/rules/sweden_pure.toml").unwrap(),
    )
    .unwrap();
    let config = PerturbationConfig {
        n_replications: 10_000,
        factor_low: 0.9,
        factor_high: 1.1,
        seed: 1,
    };
    let stats = run_batch(&input, &rules, &DynamicOptions::default(), &config, &[]).unwrap();
    let mut units = vec![0u32; 120];
    for r in &stats.records {
        units[r.adjustment_count as usize] += 1;
    }
    for (v, &c) in units.iter().enumerate() {
        if c > 0 {
            println!("{v:>3} {c}");
        }
    }
}
