pub mod abstraction;
pub mod activity_tree;
pub mod discovery;
pub mod event_log;
pub mod petri;
pub mod quality;
pub mod synth;
