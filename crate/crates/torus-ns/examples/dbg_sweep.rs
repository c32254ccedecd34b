use std::time::Instant;
use torus_ns::estimates::*;
use torus_ns::grid::TorusGrid;

fn main() {
    let g = TorusGrid::new(3, 32).unwrap();
    let t0 = Instant::now();
    let forced_grid = geometric_grid(1e-3, 5.0, 16);
    let fr = verify_corollary_22(g, 50, &forced_grid, 1000, 4).unwrap();
    println!("forced C = {:.6} ({:?})", fr.c, t0.elapsed());

    let cfg = TheoremBoundsConfig {
        grid: g,
        amplitudes: vec![0.5, 1.0, 2.0, 4.0],
        seeds: vec![11, 22, 33],
        j_max: 3,
        kmax_init: 4,
        forced_constant: fr.c,
        dt: None,
        samples_per_run: 64,
    };
    let t1 = Instant::now();
    let rep = verify_theorem_bounds(&cfg).unwrap();
    println!("sweep in {:?}", t1.elapsed());
    println!("c0 = {:.4e}, early terminations = {}", rep.c0, rep.early_terminations);
    println!("K overall = {:?}", rep.k_overall.iter().map(|v| (v*1e4).round()/1e4).collect::<Vec<_>>());
    for (a, k) in &rep.k_by_amplitude {
        println!("  A = {a}: K_j = {:?}", k.iter().map(|v| (v*1e4).round()/1e4).collect::<Vec<_>>());
    }
    println!("k0_max = {:.4}", rep.k0_max());
    for j in 0..=3 { println!("collapse j={j}: {}", rep.collapse_ok(j)); }
    println!("heat control rel err = {:.3e}", rep.heat_control_max_rel_err);
    println!("total {:?}", t0.elapsed());
}
