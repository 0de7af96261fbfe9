//! Builds the exterior maps of the built-in domain families and prints their basic data.

use grunsky::conformal::{build_disk, build_equipotential, build_joukowski, build_regular_polygon, build_sc_exterior, triangle_corners};

fn main() -> grunsky::Result<()> {
    let square = build_regular_polygon(4, 512)?;
    let maps = vec![
        build_disk(),
        build_joukowski(0.5)?,
        build_regular_polygon(3, 512)?,
        build_equipotential(&square, 1.1)?,
        build_sc_exterior(&triangle_corners([0.1, 0.4, 0.5])?, 512)?,
        square,
    ];
    for map in &maps {
        println!(
            "{:<40} capacity {:.6}  terms {:>4}  tail {:.1e}  corners {}",
            map.family().to_string(),
            map.capacity(),
            map.truncation(),
            map.tail_bound(),
            map.corners().len()
        );
        map.check_simple()?;
    }
    // z = 1 maps to a vertex of the square
    let z = maps[5].eval(num_complex::Complex64::new(1.0, 0.0));
    println!("square vertex at {z:.6}");
    Ok(())
}
