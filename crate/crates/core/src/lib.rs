pub mod baf;
pub mod cli;
pub mod coders;
pub mod effective;
pub mod logic;
pub mod model;
pub mod sample;
pub mod vocab;
