//! Time the clustering stage over synthetic pools and print the CSV.
//!
//! Run with: cargo run --release --example bench_timing

use reviewmine::report::{bench, bench_csv, BenchMethod};

fn main() {
    let rows = bench(&[100, 300], &BenchMethod::ALL, 1, 5);
    print!("{}", bench_csv(&rows));
}
