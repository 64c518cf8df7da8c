//! Pick target populations, solve for the control setting, and print a coarse
//! map of the reachable (f00, f11) plane.

use std::f64::consts::FRAC_PI_4;

use spinpair::{region_grid, solve_ndelta};

fn main() {
    for (f00, f11) in [(0.3, 0.3), (0.5, 0.1), (0.2, 0.5), (0.9, 0.9)] {
        match solve_ndelta(FRAC_PI_4, f00, f11) {
            Ok(s) => println!(
                "({f00}, {f11}): sin^2 = {:.4}, n*delta = {:.4}, C^2 = {:.3}",
                s.s_squared, s.ndelta_principal, s.required_c_squared
            ),
            Err(e) => println!("({f00}, {f11}): {e}"),
        }
    }

    let r = 21;
    let grid = region_grid(FRAC_PI_4, r).unwrap();
    println!("\nfeasible targets at gamma = pi/4 (f11 across, f00 down):");
    for row in grid.chunks(r) {
        let line: String = row.iter().map(|p| if p.feasible { '#' } else { '.' }).collect();
        println!("{:.2} {line}", row[0].f00_target);
    }
}
