//! Resample minute-resolution meter data to hourly energy.
//!
//! Writes a small template with a 3-minute dropout (interpolated) and shows
//! that a 10-minute dropout is rejected.

use std::io::Cursor;
use std::path::Path;

use gridloop::ingest::{parse_template, resample_kw_to_kwh, synthetic_templates, SyntheticProfile};

fn main() -> gridloop::Result<()> {
    println!("constant 2 kW for an hour -> {} kWh", resample_kw_to_kwh(&[2.0; 60], 1.0)?);

    let mut csv = String::from("minute,kw\n");
    for m in 0..120u64 {
        if (30..33).contains(&m) {
            continue;
        }
        let kw = if m < 60 { 1.0 } else { 3.0 };
        csv.push_str(&format!("{m},{kw}\n"));
    }
    let home = parse_template(Cursor::new(csv), "demo", Path::new("demo.csv"))?;
    println!("hourly with a short gap filled: {:?}", home.to_hourly()?.values());

    let mut gappy = String::from("minute,kw\n");
    for m in (0..60u64).filter(|m| !(20..30).contains(m)) {
        gappy.push_str(&format!("{m},1.0\n"));
    }
    match parse_template(Cursor::new(gappy), "gappy", Path::new("gappy.csv")) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("long gap rejected: {e}"),
    }

    let templates = synthetic_templates(3, 7, 2017, &SyntheticProfile::default());
    for t in &templates {
        let hourly = t.to_hourly()?;
        let mean = hourly.values().iter().sum::<f64>() / hourly.len() as f64;
        println!("{}: {} hours, mean {mean:.3} kWh", hourly.id, hourly.len());
    }
    Ok(())
}
