pub mod detect;
pub mod featval;
pub mod invert;
pub mod probe_sweep;
pub mod report;
pub mod shuffle;
pub mod stylocheck;
pub mod synth;
