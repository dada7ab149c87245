//! Finite-field experiments around the local converse problem for `GL_n`:
//! exact `F_q` arithmetic, `GL_n(F_q)` with its cosets and Bruhat-type cells,
//! the Gelfand-Graev module split into generic components with their Bessel
//! functions, Rankin-Selberg zeta sums and gamma factors, and the
//! experiments built on top of them.

pub mod character_oracle;
pub mod experiment;
pub mod field;
pub mod gelfand_graev;
pub mod group;
pub mod rankin_selberg;
pub mod spectral;
