//! Small power study: MultiFIT and BERET on two scenarios across noise
//! levels, written as CSV.
//!
//! cargo run --release --example power_curve -- [out.csv]

use bexdep::sim::{write_power_csv, ScenarioFamily};
use bexdep::{estimate_power, BeretConfig, MultiFitConfig, Placement, Shape, TestMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "power_curve.csv".into());
    let levels = [1, 5, 10, 15, 20];
    let methods = [TestMethod::MultiFit(MultiFitConfig::default()), TestMethod::Beret(BeretConfig::default())];

    let mut curves = Vec::new();
    for method in &methods {
        for shape in [Shape::Parabolic, Shape::Checkerboard] {
            let family = ScenarioFamily::new(shape, Placement::Marginal, 128);
            let curve = estimate_power(method, &family, &levels, 50, 0.05, 2024)?;
            let row: Vec<String> = curve.points.iter().map(|p| format!("{:.2}", p.power)).collect();
            println!("{:>8} {:>12}: {}", method.id(), shape.name(), row.join("  "));
            curves.push(curve);
        }
    }
    write_power_csv(&curves, std::fs::File::create(&out)?)?;
    println!("wrote {out}");
    Ok(())
}
