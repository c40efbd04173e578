pub mod error;
pub mod exactmath;
pub mod families;
pub mod peeling;
pub mod spread;
pub mod oracle;
pub mod montecarlo;
pub mod suite;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
