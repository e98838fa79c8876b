//! Prints `h, κ_h, C₁(h), M_h` for every domain at levels 1..=4, β = 100.

use hypercircle::{
    c1_of_mesh, compute_kappa_with, generate, DomainId, KappaOptions, TraceCoefficient, YParams,
};

fn main() -> hypercircle::Result<()> {
    for domain in DomainId::ALL {
        println!("{domain}");
        for level in 1..=4 {
            let mesh = generate::<f64>(domain, level)?;
            let params = YParams::for_mesh(&mesh, 100.0)?;
            let k = compute_kappa_with(
                &mesh,
                &params,
                KappaOptions {
                    jobs: 0,
                    ..Default::default()
                },
            )?;
            let c1 = c1_of_mesh(&mesh, TraceCoefficient::Rounded)?;
            let mh = (k.kappa * k.kappa + c1 * c1).sqrt();
            println!("  {:.6} {:.4} {:.4} {:.4}", mesh.h(), k.kappa, c1, mh);
        }
    }
    Ok(())
}
