// Temporary development probe: does the ordered-list basis (entitled vs
// cast votes) change the 2010 point values or the histogram shape?
use mandat::election::{DynamicOptions, ElectionInput};
use mandat::files;
use mandat::montecarlo::{perturb, replication_rng, PerturbationConfig};
use mandat::systems::allocate_dynamic;

fn with_vote_based_entitled(input: &ElectionInput) -> ElectionInput {
    let entitled: Vec<u64> = (0..input.n_constituencies())
        .map(|i| input.row_total(i))
        .collect();
    ElectionInput::new(
        input.parties().to_vec(),
        input.constituencies().to_vec(),
        input.votes().to_vec(),
        entitled,
    )
    .unwrap()
}

fn main() {
    let input =
        files::parse_election(&std::fs::read_to_string("data/sweden2010.csv").unwrap()).unwrap();
    for rules_file in ["data/rules/sweden_pure.toml", "data/rules/sweden_modified.toml"] {
        let (rules, _) = files::parse_rules(&std::fs::read_to_string(rules_file).unwrap()).unwrap();
        let base = allocate_dynamic(&input, &rules, &DynamicOptions::default()).unwrap();
        let vote_l = allocate_dynamic(
            &with_vote_based_entitled(&input),
            &rules,
            &DynamicOptions::default(),
        )
        .unwrap();
        println!(
            "{rules_file}: entitled-L adjustment {} | cast-votes-L adjustment {}",
            base.adjustment_count, vote_l.adjustment_count
        );
    }

    // Histogram with the list built from the perturbed cast votes.
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
    let mut bins = std::collections::BTreeMap::new();
    let mut sum = 0u64;
    for rep in 0..10_000u64 {
        let mut rng = replication_rng(config.seed, rep);
        let sim = perturb(&input, &config, &mut rng).unwrap();
        let sim = with_vote_based_entitled(&sim);
        let out = allocate_dynamic(&sim, &rules, &DynamicOptions::default()).unwrap();
        *bins.entry((out.adjustment_count / 10) * 10).or_insert(0u32) += 1;
        sum += u64::from(out.adjustment_count);
    }
    println!("cast-votes-L histogram: {bins:?}");
    println!("mean {:.2}", sum as f64 / 10_000.0);
    println!("paper digits:          20:465 30:1568 40:2082 50:2808 60:1952 70:841 80:234 90:43 100:7");
}
