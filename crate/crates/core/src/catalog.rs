//! Reference profiles with 900 voters used throughout the tests and the
//! `figures` command.

use crate::prefs::{parse_profile, Profile};

/// Alternative 1 beats both others 600 to 300.
pub const CONDORCET_WINNER: &str = "\
d=3
300: 1 2 3
300: 1 3 2
300: 2 3 1
";

/// Three-way majority cycle; the uniform lottery is the unique maximal lottery.
pub const CONDORCET_CYCLE: &str = "\
d=3
300: 1 2 3
300: 2 3 1
300: 3 1 2
";

/// A cycle on {1, 2, 3} with alternative 4 as Condorcet loser. Margins are
/// 1/3 (1 over 2), 2/9 (2 over 3), 1/9 (3 over 1) and 1/3 for everyone over 4.
pub const CYCLE_WITH_LOSER: &str = "\
d=4
400: 1 2 3 4
200: 3 1 2 4
150: 4 2 3 1
150: 4 3 2 1
";

/// Three-column variant of the cycle-with-loser profile. Its margins differ
/// from [`CYCLE_WITH_LOSER`] (1/2, 1/3, 1/6 around the cycle) but the maximal
/// lottery is the same, (1/3, 1/6, 1/2, 0).
pub const CYCLE_WITH_LOSER_TABLE: &str = "\
d=4
375: 1 2 3 4
300: 3 1 2 4
225: 4 2 3 1
";

pub fn condorcet_winner() -> Profile {
    parse_profile(CONDORCET_WINNER).expect("built-in profile")
}

pub fn condorcet_cycle() -> Profile {
    parse_profile(CONDORCET_CYCLE).expect("built-in profile")
}

pub fn cycle_with_loser() -> Profile {
    parse_profile(CYCLE_WITH_LOSER).expect("built-in profile")
}

pub fn cycle_with_loser_table() -> Profile {
    parse_profile(CYCLE_WITH_LOSER_TABLE).expect("built-in profile")
}

/// Source text of a built-in profile.
pub fn text_by_name(name: &str) -> Option<&'static str> {
    match name {
        "condorcet-winner" => Some(CONDORCET_WINNER),
        "condorcet-cycle" => Some(CONDORCET_CYCLE),
        "cycle-with-loser" => Some(CYCLE_WITH_LOSER),
        _ => None,
    }
}

/// Looks up a built-in profile by name.
pub fn by_name(name: &str) -> Option<Profile> {
    text_by_name(name).map(|t| parse_profile(t).expect("built-in profile"))
}

pub const NAMES: [&str; 3] = ["condorcet-winner", "condorcet-cycle", "cycle-with-loser"];
