//! Shared inputs for the criterion benches in `benches/`.

use einstein_forge::catalog::find;
use einstein_forge::MetricSpec;

/// Metric and a Halton grid of `count` points for a catalog entry.
pub fn fixture(name: &str, count: usize) -> (MetricSpec, Vec<Vec<f64>>) {
    let (spec, domain) = find(name)
        .and_then(|e| e.build())
        .unwrap_or_else(|e| panic!("catalog entry {name}: {e}"));
    (spec, domain.halton(count))
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        let (spec, grid) = super::fixture("mercator-n4", 8);
        assert_eq!(grid.len(), 8);
        assert_eq!(grid[0].len(), spec.dim());
    }
}
