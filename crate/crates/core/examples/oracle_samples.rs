//! Characterize the built-in gripper ground truth and print a summary.

use prbm_surrogate::oracle::{write_csv_string, SyntheticFamily};

fn main() {
    let truth = SyntheticFamily::gripper();
    for set in truth.generate(&truth.reference).expect("preset generates") {
        let free = set.free_records().count();
        let constrained = set.constrained_records().count();
        println!("axis {}: {free} free, {constrained} constrained records", set.axis_label);
        let csv = write_csv_string(&set);
        for line in csv.lines().take(10) {
            println!("  {line}");
        }
    }
}
