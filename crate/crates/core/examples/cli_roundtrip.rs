//! Driving the command-line interface in-process.

fn main() {
    let game = concat!(env!("CARGO_MANIFEST_DIR"), "/data/g1.json");
    for args in [
        vec!["stackelberg", "--game", game, "--type", "0"],
        vec!["commit-nr", "--game", game],
        vec!["oracle", "maximin", "--game", game],
        vec!["commit-nr", "--game", "missing.json"],
    ] {
        let (code, out) = menu_commit::cli::run(std::iter::once("menu-commit").chain(args.iter().copied()));
        println!("$ menu-commit {}\nexit {code}\n{out}", args.join(" "));
    }
}
