//! The noncommutative layer.

pub mod exponential;
pub mod heisenberg;
pub mod product;
pub mod rescale;

pub use exponential::{
    adjoint_translation, closed_form_star, exponential_product, generator_j, jw_power_closed_form, power_recursion_sign,
    star_exp_partial, translated, unitary_u, RecursionCheck, StarExpPartial,
};
pub use heisenberg::HeisenbergElement;
pub use product::{
    max_deviation, max_relative_deviation, star_power, terminating_cut, wick_star, wick_star_graded, GradedJet,
};
pub use rescale::rescale;
