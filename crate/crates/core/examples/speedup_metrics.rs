//! Error metrics for predicted against measured step times.

use hlosim::metrics::{mape, mean_absolute, speedup, speedup_error, ComparisonRecord};

fn main() {
    let records = [
        ComparisonRecord::new("a100", 1.10, 1.00),
        ComparisonRecord::new("h100", 0.45, 0.50),
    ];
    for r in &records {
        println!("{:<5} APE {:.2}%", r.label, r.ape().unwrap());
    }
    println!("MAPE {:.2}%", mape(&records).unwrap());

    let s_sim = speedup(records[0].predicted, records[1].predicted).unwrap();
    let s_ref = speedup(records[0].reference, records[1].reference).unwrap();
    let err = speedup_error(s_ref, s_sim).unwrap();
    println!("speedup sim {s_sim:.3} ref {s_ref:.3} error {err:+.2}%");
    println!("mean |error| over [3, 7, -3] = {:.1}%", mean_absolute(&[3.0, 7.0, -3.0]).unwrap());
}
