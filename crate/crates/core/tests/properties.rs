//! Randomized properties, 256 cases each from a fixed seed.

mod common;

use common::props::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn frobenius_is_additive(args in frobenius_strategy()) {
        frobenius(args)?;
    }

    #[test]
    fn valuation_is_additive(args in valuation_strategy()) {
        valuation(args)?;
    }

    #[test]
    fn tame_weights_add_and_no_carry(args in tame_strategy()) {
        tame_no_carry(args)?;
    }

    #[test]
    fn divided_derivatives_iterate(args in iterativity_strategy()) {
        iterativity(args)?;
    }

    #[test]
    fn rho_star_is_multiplicative(args in rho_star_strategy()) {
        rho_star(args)?;
    }
}
