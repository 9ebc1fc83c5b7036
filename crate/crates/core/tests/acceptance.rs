use std::time::Instant;

use dendrite_core::battery::{Battery, BatteryConfig, CriterionOutcome, CRITERIA};
use dendrite_core::pseudo_orbit::ColumnChoice;

fn report(o: &CriterionOutcome, secs: f64) {
    println!("{o} [{secs:.1}s]");
    for n in &o.notes {
        println!("    note: {n}");
    }
    for w in &o.witnesses {
        println!("    witness: {w}");
    }
}

#[test]
fn acceptance() {
    let battery = Battery::new(BatteryConfig::default()).expect("default battery");
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        let t = Instant::now();
        let o = battery.run(id).expect("criterion runs");
        report(&o, t.elapsed().as_secs_f64());
        if !o.holds() {
            failed.push(id);
        }
    }

    // The uniform column choice rarely produces ledger entries, so the
    // shadowing family is repeated with flips pushed to low columns.
    let biased = Battery::new(BatteryConfig {
        column_choice: ColumnChoice::LowBiased,
        ..BatteryConfig::default()
    })
    .expect("biased battery");
    for id in [1, 4] {
        let t = Instant::now();
        let o = biased.run(id).expect("criterion runs");
        print!("low-biased ");
        report(&o, t.elapsed().as_secs_f64());
        if !o.holds() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
