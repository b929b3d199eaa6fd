pub mod bench;
pub mod corpus;
pub mod detect;
pub mod extract;
pub mod overlay;
pub mod recognize;
pub mod train;
pub mod video;
