// Temporary development probe: batch statistics around 2010.
use mandat::election::DynamicOptions;
use mandat::files;
use mandat::montecarlo::{run_batch, AdditionStrategy, PerturbationConfig};
use std::time::Instant;

fn main() {
    let input =
        files::parse_election(&std::fs::read_to_string("data/sweden2010.csv").unwrap()).unwrap();
    let config = PerturbationConfig {
        n_replications: 10_000,
        factor_low: 0.9,
        factor_high: 1.1,
        seed: std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1),
    };
    for rules_file in ["data/rules/sweden_pure.toml", "data/rules/sweden_modified.toml"] {
        let (rules, _) = files::parse_rules(&std::fs::read_to_string(rules_file).unwrap()).unwrap();
        let t = Instant::now();
        let stats = run_batch(
            &input,
            &rules,
            &DynamicOptions::default(),
            &config,
            &[AdditionStrategy::Concentrated, AdditionStrategy::Proportional],
        )
        .unwrap();
        println!("=== {rules_file} ({:.1}s)", t.elapsed().as_secs_f64());
        println!(
            "adjustment: mean {:.2} max {} sd {:.2}",
            stats.mean_adjustment, stats.max_adjustment, stats.stddev_adjustment
        );
        println!("histogram: {:?}", stats.histogram);
        println!(
            "but: {} ({:.1}%)",
            stats.but_count,
            stats.but_count as f64 / 100.0
        );
        println!("nonmono: {:?}", stats.nonmono);
        let n = stats.records.len() as f64;
        let lhd: f64 = stats.records.iter().map(|r| r.lh_dynamic).sum::<f64>() / n;
        let lhc: f64 = stats.records.iter().map(|r| r.lh_current).sum::<f64>() / n;
        let sld: f64 = stats.records.iter().map(|r| r.sl_dynamic).sum::<f64>() / n;
        let slc: f64 = stats.records.iter().map(|r| r.sl_current).sum::<f64>() / n;
        let lhd_max = stats.records.iter().map(|r| r.lh_dynamic).fold(0.0, f64::max);
        let lhc_max = stats.records.iter().map(|r| r.lh_current).fold(0.0, f64::max);
        println!("lh mean dyn {lhd:.2} cur {lhc:.2} max dyn {lhd_max:.2} cur {lhc_max:.2}");
        println!("sl mean dyn {sld:.2} cur {slc:.2}");
    }
}
