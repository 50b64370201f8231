use std::time::Instant;

use cstn::dc::{check_dc, check_edc};
use cstn::generators::{gen_gamma_n, GammaNParams};
use cstn::rational::EpsilonRational;

fn main() {
    let g = gen_gamma_n(&GammaNParams::new(2));
    let t = Instant::now();
    let r = check_edc(&g, &EpsilonRational::new(1, 2).unwrap()).unwrap();
    println!(
        "edc(1/2): {:?} positive={} lifts={} cap={} game_nodes={}",
        t.elapsed(),
        r.is_positive(),
        r.stats.lift_count,
        r.stats.energy_cap,
        r.stats.game_nodes
    );
    let t = Instant::now();
    let r = check_edc(&g, &EpsilonRational::new(1, 384).unwrap()).unwrap();
    println!(
        "edc(1/384): {:?} positive={} lifts={} cap={}",
        t.elapsed(),
        r.is_positive(),
        r.stats.lift_count,
        r.stats.energy_cap
    );
    let t = Instant::now();
    let r = check_dc(&g).unwrap();
    println!(
        "dc: {:?} positive={} lifts={}",
        t.elapsed(),
        r.is_positive(),
        r.stats.lift_count
    );
}
