//! Randomised properties of the projection, the divergence and the solver.

mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn isotonic_is_idempotent(x in values()) {
        isotonic_idempotent(&x)?;
    }

    #[test]
    fn isotonic_matches_brute_force(x in short_values()) {
        isotonic_brute_force(&x)?;
    }

    #[test]
    fn antitonic_mirrors_isotonic(x in values()) {
        antitonic_mirror(&x)?;
    }

    #[test]
    fn divergence_is_convex_in_first_argument(input in convex_input()) {
        convexity(&input)?;
    }

    #[test]
    fn divergence_bounded_by_weighted_bregman(input in bound_input()) {
        ordering_bound(&input)?;
    }

    #[test]
    fn divergence_of_step_functions_is_exact(input in step_input()) {
        step_functions(&input)?;
    }

    #[test]
    fn solver_outputs_are_admissible(input in solver_input()) {
        solver_admissible(&input)?;
    }
}
