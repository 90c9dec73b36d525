//! Criterion benchmarks for the rendezvous workspace; see `benches/`.
