//! Benchmarks live in `benches/`: `simulation` (state operations, minting
//! and reporting) and `service` (bank request handling).
