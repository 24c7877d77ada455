//! Lyapunov exponents, Lyapunov dimension, affinity dimension and the
//! full-dimension weights of a bundled model.
//!
//! cargo run --example dimensions -- example_ab

use safd::dims::{affinity_dimension, full_dimension_vectors, lyapunov_dim_root, lyapunov_dimension};
use safd::fixtures::model;

fn main() -> safd::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "example_ab".into());
    let m = model(&name)?;
    println!("{name}: d = {}, {} maps, H(p) = {:.6}", m.dim(), m.p().len(), m.entropy());
    println!("sorted Lyapunov exponents: {:?}", m.lyapunov_exponents());
    println!("dim_L from f_phi:          {:.12}", lyapunov_dimension(&m));
    println!("dim_L from root equation:  {:.12}", lyapunov_dim_root(&m)?);

    let ifs = m.user_ifs();
    let a = affinity_dimension(&ifs)?;
    println!("dim_A = {:.12} (residual {:.1e}, maximizers {:?})", a.value, a.residual, a.maximizers);

    if ifs.dim() == 2 {
        match full_dimension_vectors(&ifs) {
            Ok(report) => {
                for v in report.vectors {
                    println!(
                        "  sigma {:?}: p = {:?}, dim_L(p) = {:.9}, distinct exponents: {}",
                        v.sigma, v.p, v.lyapunov_dimension, v.distinct_exponents
                    );
                }
            }
            Err(e) => println!("  no full-dimension weights: {e}"),
        }
    }
    for w in m.warnings() {
        println!("warning: {w}");
    }
    Ok(())
}
