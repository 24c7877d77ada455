//! Finite measures, partitions and their entropies: joins, conditional
//! entropy, and conditional entropy recovered from component measures.

use safd::measure::{
    component_entropy_expectation, components, conditional_entropy, entropy, DiscreteMeasure, FinitePartitionView,
    Grid,
};

fn main() -> safd::Result<()> {
    let points = vec![0.1, 0.2, 0.3, 0.55, 0.6, 0.8, 1.4, 1.9];
    let weights = vec![0.05, 0.15, 0.1, 0.2, 0.1, 0.1, 0.2, 0.1];
    let theta = DiscreteMeasure::weighted(1, points, weights)?;

    let parity = FinitePartitionView::from_keys(&[0, 1, 0, 1, 0, 1, 0, 1]);
    let halves = Grid::dyadic(1, 1.0).partition(&theta);
    println!("H(parity)            = {:.6}", entropy(&theta, &parity));
    println!("H(halves)            = {:.6}", entropy(&theta, &halves));
    println!("H(parity v halves)   = {:.6}", entropy(&theta, &parity.join(&halves)));
    println!("H(parity | halves)   = {:.6}", conditional_entropy(&theta, &parity, &halves));

    let (coarse, fine) = (Grid::dyadic(1, 0.0), Grid::dyadic(1, 2.0));
    for (mass, c) in components(&theta, &coarse) {
        println!("component of mass {mass:.2} with {} atoms", c.len());
    }
    let direct = conditional_entropy(&theta, &fine.partition(&theta), &coarse.partition(&theta));
    let via = component_entropy_expectation(&theta, &coarse, &fine);
    println!("H(D_2 | D_0) = {direct:.12}, via components {via:.12}");
    Ok(())
}
