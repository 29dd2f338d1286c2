use prescriptor_core::datagen::*;
use prescriptor_core::problems::*;
use prescriptor_core::solve::*;
use prescriptor_core::weights::*;
use prescriptor_core::{Dataset, Problem};
use std::time::Instant;

fn main() {
    let arma = ArmaSpec::benchmark();
    let fm = FactorModelSpec::benchmark(OutcomeKind::ShipmentDemand);
    let n = 4096;
    let x = simulate_arma(&arma, n, 1).unwrap();
    let y = generate_outcomes(&fm, &x, 2).unwrap();
    let ds = Dataset::new(x.clone(), y.clone(), 1, "s").unwrap();
    let prob = Problem::Shipment(ShipmentProblem::benchmark());
    let queries = simulate_arma(&arma, 200, 3).unwrap();

    let t0 = Instant::now();
    let mut ksup = 0usize;
    for q in 0..5 {
        let w = kr_weights(&x, queries.row(q * 40), KernelKind::Gaussian, default_bandwidth(n, 3, 1.0)).unwrap();
        let kept = w.entries().iter().filter(|(_, v)| *v >= 1e-12).count();
        ksup += kept;
        let out = solve_weighted(&prob, &w, &y).unwrap();
        std::hint::black_box(out);
    }
    println!("kr: avg support {} | {:?}/solve", ksup / 5, t0.elapsed() / 5);

    let params = MethodParams { t_count: Some(100), ..Default::default() };
    let t0 = Instant::now();
    let rf = make_prescription(MethodKind::Rf, &params, &prob, TrainData::Plain(&ds), false, 5).unwrap();
    println!("rf fit: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let mut rsup = 0;
    for q in 0..5 {
        let w = rf.weights_at(queries.row(q * 40)).unwrap();
        rsup += w.len();
        let out = rf.prescribe_outcome(queries.row(q * 40)).unwrap();
        std::hint::black_box(out);
    }
    println!("rf: avg support {} | {:?}/solve", rsup / 5, t0.elapsed() / 5);

    let t0 = Instant::now();
    let saa = solve_saa(&prob, &y).unwrap();
    println!("saa solve (K=4096): {:?} obj {}", t0.elapsed(), saa.objective);

    let t0 = Instant::now();
    let fi = full_info_oracle(&prob, &fm, queries.row(0), 4000, 9).unwrap();
    println!("full-info m=4000 (incl 5 half refits): {:?} v={}", t0.elapsed(), fi.value);
}
