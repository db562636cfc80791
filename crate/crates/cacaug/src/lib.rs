pub mod bench;
pub mod bounds;
pub mod cactus;
pub mod decompose;
pub mod exact;
pub mod gen;
pub mod heavy;
pub mod kwide;
pub mod lp;
pub mod stacks;
