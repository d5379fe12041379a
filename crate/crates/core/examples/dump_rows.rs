use mandat::election::DynamicOptions;
use mandat::systems::allocate_dynamic;
use mandat::files;

fn main() {
    let text = std::fs::read_to_string("data/sweden2010.csv").unwrap();
    let input = files::parse_election(&text).unwrap();
    for f in ["data/rules/sweden_pure.toml", "data/rules/sweden_modified.toml"] {
        let (rules, _) = files::parse_rules(&std::fs::read_to_string(f).unwrap()).unwrap();
        let dy = allocate_dynamic(&input, &rules, &DynamicOptions::default()).unwrap();
        println!("{f}: {:?}", dy.constituency_totals());
    }
}
