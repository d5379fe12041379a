// Temporary development probe: dump 2010 results for comparison.
use mandat::election::{DynamicOptions, SystemKind};
use mandat::metrics::{report, Category, ConstituencyBasis};
use mandat::systems::{allocate_current, allocate_dynamic};
use mandat::{files, DivisorSequence};

fn main() {
    let text = std::fs::read_to_string("data/sweden2010.csv").unwrap();
    let input = files::parse_election(&text).unwrap();
    let (rules, opts) = files::parse_rules(
        &std::fs::read_to_string("data/rules/sweden_modified.toml").unwrap(),
    )
    .unwrap();

    let hamilton = mandat::apportion::hamilton_allocate(
        input.entitled(),
        rules.permanent_seats,
        mandat::TieRule::LowestIndex,
    )
    .unwrap();
    println!("constituency permanent counts: {hamilton:?}");

    let cur = allocate_current(&input, &rules).unwrap();
    println!("reference: {:?}", cur.reference);
    println!("targets:   {:?}", cur.targets);
    println!("but:       {:?}", cur.but_parties);
    println!("party totals: {:?}", cur.party_totals());
    println!("perm party totals: {:?}", cur.permanent_party_totals());
    println!("permanent matrix:");
    for (i, row) in cur.permanent.iter().enumerate() {
        println!("  {:>2} {:?} adj {:?}", i, row, cur.adjustment[i]);
    }

    for (name, rules_file) in [
        ("pure", "data/rules/sweden_pure.toml"),
        ("modified", "data/rules/sweden_modified.toml"),
    ] {
        let (r, _) = files::parse_rules(&std::fs::read_to_string(rules_file).unwrap()).unwrap();
        let dy = allocate_dynamic(&input, &r, &opts).unwrap();
        println!(
            "dynamic {name}: stop {} adjustment {} totals {:?}",
            dy.stop_index,
            dy.adjustment_count,
            dy.party_totals()
        );
    }

    let (rules_pure, _) = files::parse_rules(
        &std::fs::read_to_string("data/rules/sweden_pure.toml").unwrap(),
    )
    .unwrap();
    assert_eq!(rules_pure.within_constituency_divisors, DivisorSequence::pure());
    let dyn_pure = allocate_dynamic(&input, &rules_pure, &DynamicOptions::default()).unwrap();

    for (label, outcome) in [("current", &cur), ("dynamic", &dyn_pure)] {
        for cat in [Category::Party, Category::Constituency] {
            let rep = report(&input, &rules, outcome, cat, ConstituencyBasis::CastVotes).unwrap();
            println!(
                "{label} {cat:?}: LH {} SL {}",
                rep.lh.rounded, rep.sl.rounded
            );
        }
    }
}
