use crate::{Error, Graph, Result};

fn require_nodes(g: &Graph, query: &'static str) -> Result<()> {
    if g.n() == 0 {
        return Err(Error::QueryUndefined {
            query,
            reason: "graph has no nodes".into(),
        });
    }
    Ok(())
}

pub fn average_degree(g: &Graph) -> Result<f64> {
    require_nodes(g, "avg_degree")?;
    Ok(2.0 * g.m() as f64 / g.n() as f64)
}

/// Population variance of the degree sequence.
pub fn degree_variance(g: &Graph) -> Result<f64> {
    require_nodes(g, "degree_variance")?;
    let n = g.n() as f64;
    let mean = 2.0 * g.m() as f64 / n;
    let ss: f64 = (0..g.n())
        .map(|u| {
            let d = g.degree(u) as f64 - mean;
            d * d
        })
        .sum();
    Ok(ss / n)
}

/// Fraction of nodes with each degree, indexed `0..=d_max`.
pub fn degree_distribution(g: &Graph) -> Result<Vec<f64>> {
    require_nodes(g, "degree_distribution")?;
    let n = g.n() as f64;
    Ok(g.degree_sequence().histogram().into_iter().map(|c| c as f64 / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_statistics() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(average_degree(&g).unwrap(), 1.5);
        // degrees 3,1,1,1: mean 1.5, squared deviations 2.25 + 3 * 0.25
        assert!((degree_variance(&g).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(degree_distribution(&g).unwrap(), vec![0.0, 0.75, 0.0, 0.25]);
    }

    #[test]
    fn empty_graph_is_undefined() {
        assert!(average_degree(&Graph::empty(0)).is_err());
        assert_eq!(degree_distribution(&Graph::empty(2)).unwrap(), vec![1.0]);
    }
}
