//! Attacks and statistical security games. The weakened variant and the
//! attacks show what goes wrong without fresh randomness; the games measure
//! empirical advantage against the real constructions.

mod attacks;
pub mod games;
mod unforge;

pub use attacks::{attack_ciphertext_ratio, attack_deterministic_trapdoor, Recovery, WeakSharedRandomnessVariant};
pub use games::{
    run_keyword_privacy_game, run_trapdoor_privacy_game, ExtractionAdversary, GameTranscript, GameVerdict,
    KeywordAdversary, KeywordOracles, RandomGuessAdversary, RandomTrapdoorGuesser, RatioAdversary, Scheme,
    TrapdoorAdversary, TrapdoorOracles, TrapdoorView,
};
pub use unforge::{check_unforgeability_operational, UnforgeabilityReport};
