//! Calculus-of-variations toolkit for one-dimensional Lagrangians `L(x, y, y')`.

pub mod cli;
pub mod expr;
pub mod isoperimetric;
pub mod jacobi;
pub mod odeint;
pub mod variational;
