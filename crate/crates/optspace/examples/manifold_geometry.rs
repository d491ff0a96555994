//! Geometry of the factor manifold: principal angles between subspace
//! pairs, geodesic interpolation, and the log/exp round trip that the
//! line search relies on.

use optspace::manifold::{distance, factor_angles, geodesic_move, geodesic_to};
use optspace::FactorPoint;

fn main() -> Result<(), optspace::Error> {
    let (m, n, r) = (40, 30, 3);
    let p = FactorPoint::random(m, n, r, 1);
    let q = FactorPoint::random(m, n, r, 2);

    let (ax, ay) = factor_angles(&p, &q)?;
    println!("row-factor principal angles: {ax:?}");
    println!("col-factor principal angles: {ay:?}");
    let d = distance(&p, &q)?;
    println!("geodesic distance d(p, q) = {d:.6}");

    // log map: the tangent vector whose geodesic reaches q at t = 1
    let w = geodesic_to(&p, &q)?;
    println!("log-map tangent norm = {:.6} (equals the distance)", w.norm());

    // walking the geodesic accumulates distance linearly
    for &t in &[0.25, 0.5, 0.75, 1.0] {
        let pt = geodesic_move(&p, &w, t);
        println!(
            "t = {t:.2}: d(p, p_t) = {:.6}, d(p_t, q) = {:.6}",
            distance(&p, &pt)?,
            distance(&pt, &q)?
        );
    }

    // the endpoint reproduces q as a subspace pair, not as a matrix pair:
    // representatives may differ by an orthogonal basis change
    let end = geodesic_move(&p, &w, 1.0);
    println!(
        "round-trip subspace error d(end, q) = {:.2e}",
        distance(&end, &q)?
    );
    Ok(())
}
