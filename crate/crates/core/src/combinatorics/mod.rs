pub mod appell;
pub mod coeff;
pub mod moments;
pub mod partition;
pub mod sprime;
pub mod terms;

pub use appell::{appell_family, power_expansion, AppellFamily};
pub use coeff::{binomial, c_coeff, c_coeff_exact, d_coeff, factorial};
pub use moments::MomentVector;
pub use partition::{bell_number, enumerate_partitions, Partition};
pub use sprime::s_prime_sum;
pub use terms::{enumerate_terms, Regime, TermIndex, TermRow};
