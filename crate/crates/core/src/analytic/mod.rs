//! Born-Markov master equation of the two-spin XXZ chain.
//!
//! In the eigenbasis |λ₁⟩ = |1,1⟩, |λ₂⟩ = |0,0⟩, |λ₃⟩ = (|1,0⟩ + |0,1⟩)/√2,
//! |λ₄⟩ = (−|1,0⟩ + |0,1⟩)/√2 the generator has three parts per bath i:
//! dephasing V₀ = |λ₁⟩⟨λ₁| − |λ₂⟩⟨λ₂| at rate γ^(i)(0₊) + γ^(i)(0₋),
//! decay |λ₃⟩⟨λ₄| at the emission rate γ^(i)(+ω) and excitation |λ₄⟩⟨λ₃| at
//! the absorption rate γ^(i)(−ω), with ω = λ₄ − λ₃ = 4j.

mod closed_form;
mod oracle;
mod rates;

pub use closed_form::{evolve_closed_form, evolve_eigenbasis, XxzEigensystem};
pub use oracle::{liouvillian, liouvillian_oracle};
pub use rates::{
    bose_occupation, discrete_bath_rate, markov_rate, markov_rate_with, omega_constants, Dephasing,
    DiscreteRate, RateSet,
};
