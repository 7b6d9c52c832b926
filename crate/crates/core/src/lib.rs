pub mod cli;
pub mod dequant;
pub mod error;
pub mod fedosov;
pub mod geometry;
pub mod poly;
pub mod quantizer;
pub mod scalar;
pub mod series;
pub mod symbols;
pub mod verify;
pub mod weyl;
