//! The canonical CHSH strategy: winning probability, correlations and the game-operator gap.

use selftest_lab::lab::{canonical_chsh, chsh_game, eigengap_analysis, phi_plus, robustness_constant};
use selftest_lab::strategy::{correlation_of, game_operator, win_probability};

fn main() -> selftest_lab::Result<()> {
    let s = canonical_chsh();
    let g = chsh_game();
    println!("win probability  {:.15}", win_probability(&g, &s)?);

    let p = correlation_of(&s)?;
    for (sq, t) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let row: Vec<String> = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| format!("{:.6}", p.get(a, b, sq, t)))
            .collect();
        println!("p(.,.|{sq},{t}) = [{}]", row.join(", "));
    }

    let w = game_operator(&g, &s)?;
    let r = eigengap_analysis(&w, &phi_plus(), &phi_plus(), 0.0)?;
    println!("λ0 = {:.12}  λ1 = {:.12}  Δ = {:.12}", r.lambda0, r.lambda1, r.gap);
    println!("robustness constant C = {}", robustness_constant(&g));
    Ok(())
}
