pub mod cartier;
pub mod cli;
pub mod cohomology;
pub mod covector;
pub mod dieudonne;
pub mod error;
pub mod field;
pub mod galois;
pub mod group_scheme;
pub mod iso;
pub mod linalg;
pub mod matrix;
pub mod witt;
