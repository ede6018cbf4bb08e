//! Regenerates the bundled fixtures: `cargo run --example write_fixtures [DIR]`.

use std::path::PathBuf;

use selftest_lab::io::{game_to_json, strategy_to_json};
use selftest_lab::lab::{canonical_chsh, chsh_game, trine_pvm_strategy, trine_strategy, G_PLUS, H_PLUS};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    let files = [
        ("chsh.json", strategy_to_json(&canonical_chsh())),
        ("trine.json", strategy_to_json(&trine_strategy())),
        ("trine_minimal_naimark.json", strategy_to_json(&trine_pvm_strategy(H_PLUS, G_PLUS))),
        ("chsh_game.json", game_to_json(&chsh_game())),
    ];
    for (name, text) in files {
        std::fs::write(dir.join(name), text)?;
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}
