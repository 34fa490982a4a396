//! Tab-separated exports: edge lists, semi-metric statistics and rankings.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back yields bit-identical values. Infinity is written as `inf`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{DistanceGraph, ProximityGraph};
use crate::recommend::ScoredRecommendations;
use crate::relation::{ExternalId, IdIndex};
use crate::semimetric::SemiMetricEdgeStats;

fn fields(line: &str, lineno: usize, expected: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != expected {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected {expected} fields, found {}", f.len()),
        });
    }
    Ok(f)
}

fn parse_num<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("cannot parse {s:?}"),
    })
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(k, l)| {
            l.map(|l| (k + 1, l)).map_err(|e| Error::Parse {
                line: k + 1,
                message: e.to_string(),
            })
        })
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty() || l.starts_with('#')))
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<writer>", e)
}

/// `id_a \t id_b \t p`, one line per undirected edge, `id_a < id_b`.
pub fn write_proximity_edges<W: Write>(graph: &ProximityGraph, mut out: W) -> Result<()> {
    let labels = graph.labels();
    for (i, j, p) in graph.edges() {
        writeln!(out, "{}\t{}\t{}", labels.id(i), labels.id(j), p).map_err(io_err)?;
    }
    Ok(())
}

type IndexedEdges = (IdIndex, Vec<(usize, usize, f64)>);

fn read_edges<R: BufRead>(reader: R, labels: Option<IdIndex>) -> Result<IndexedEdges> {
    let mut raw: Vec<(ExternalId, ExternalId, f64)> = Vec::new();
    for line in data_lines(reader) {
        let (lineno, line) = line?;
        let f = fields(&line, lineno, 3)?;
        raw.push((
            parse_num(f[0], lineno)?,
            parse_num(f[1], lineno)?,
            parse_num(f[2], lineno)?,
        ));
    }
    let labels = labels.unwrap_or_else(|| IdIndex::new(raw.iter().flat_map(|e| [e.0, e.1])));
    let mut edges = Vec::with_capacity(raw.len());
    for (a, b, w) in raw {
        match (labels.index_of(a), labels.index_of(b)) {
            (Some(i), Some(j)) => edges.push((i, j, w)),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) references an unknown vertex"
                )))
            }
        }
    }
    Ok((labels, edges))
}

/// Reads an edge list; vertices that appear in an edge become reflexive.
/// Without `labels` the vertex set is the ids seen in the file.
pub fn read_proximity_edges<R: BufRead>(
    reader: R,
    labels: Option<IdIndex>,
) -> Result<ProximityGraph> {
    let (labels, edges) = read_edges(reader, labels)?;
    ProximityGraph::from_edges_reflexive(labels, edges)
}

/// `id_a \t id_b \t d`, finite edges only.
pub fn write_distance_edges<W: Write>(graph: &DistanceGraph, mut out: W) -> Result<()> {
    let labels = graph.labels();
    for (i, j, d) in graph.edges() {
        writeln!(out, "{}\t{}\t{}", labels.id(i), labels.id(j), d).map_err(io_err)?;
    }
    Ok(())
}

/// Accepts explicit `inf` edges and drops them.
pub fn read_distance_edges<R: BufRead>(
    reader: R,
    labels: Option<IdIndex>,
) -> Result<DistanceGraph> {
    let (labels, edges) = read_edges(reader, labels)?;
    DistanceGraph::from_edges(labels, edges)
}

pub const STATS_HEADER: &str = "i\tj\tdirect\tshortest\ts\tb_ij\tb_ji";

/// `i \t j \t direct \t shortest \t s \t b_ij \t b_ji` with external ids.
pub fn write_stats<W: Write>(
    stats: &[SemiMetricEdgeStats],
    labels: &IdIndex,
    mut out: W,
) -> Result<()> {
    writeln!(out, "# {STATS_HEADER}").map_err(io_err)?;
    for s in stats {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            labels.id(s.i),
            labels.id(s.j),
            s.direct,
            s.shortest,
            s.s,
            s.b_ij,
            s.b_ji
        )
        .map_err(io_err)?;
    }
    Ok(())
}

pub fn read_stats<R: BufRead>(reader: R, labels: &IdIndex) -> Result<Vec<SemiMetricEdgeStats>> {
    let mut out = Vec::new();
    for line in data_lines(reader) {
        let (lineno, line) = line?;
        let f = fields(&line, lineno, 7)?;
        let vertex = |s: &str| -> Result<usize> {
            let id: ExternalId = parse_num(s, lineno)?;
            labels.index_of(id).ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("unknown vertex {id}"),
            })
        };
        out.push(SemiMetricEdgeStats {
            i: vertex(f[0])?,
            j: vertex(f[1])?,
            direct: parse_num(f[2], lineno)?,
            shortest: parse_num(f[3], lineno)?,
            s: parse_num(f[4], lineno)?,
            b_ij: parse_num(f[5], lineno)?,
            b_ji: parse_num(f[6], lineno)?,
        });
    }
    Ok(out)
}

/// `user_id \t rank \t item_id \t score`, ranks from 1, at most `limit` rows per user.
pub fn write_rankings<'a, W: Write>(
    recs: impl IntoIterator<Item = &'a ScoredRecommendations>,
    items: &IdIndex,
    limit: Option<usize>,
    mut out: W,
) -> Result<()> {
    for rec in recs {
        let shown = limit.unwrap_or(rec.ranking.len());
        for (rank, &item) in rec.top(shown).iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                rec.user,
                rank + 1,
                items.id(item as usize),
                rec.scores[item as usize]
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proximity_edge_list_round_trip() {
        let g = ProximityGraph::from_edges_reflexive(
            IdIndex::new([10, 20, 30]),
            [(0, 1, 0.1), (1, 2, 2.0 / 3.0)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_proximity_edges(&g, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            format!("10\t20\t0.1\n20\t30\t{}\n", 2.0f64 / 3.0)
        );
        let back = read_proximity_edges(buf.as_slice(), None).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn distance_inf_token() {
        let g = read_distance_edges("1\t2\t3.5\n2\t3\tinf\n".as_bytes(), None).unwrap();
        assert_eq!(g.distance(0, 1), 3.5);
        assert_eq!(g.distance(1, 2), f64::INFINITY);
        assert_eq!(g.size(), 3);
    }

    #[test]
    fn stats_round_trip_with_inf() {
        let labels = IdIndex::new([5, 9]);
        let stats = vec![SemiMetricEdgeStats {
            i: 0,
            j: 1,
            direct: f64::INFINITY,
            shortest: 3.0,
            s: f64::INFINITY,
            b_ij: 1.0 / 3.0,
            b_ji: 0.7,
        }];
        let mut buf = Vec::new();
        write_stats(&stats, &labels, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("5\t9\tinf\t3\tinf\t"));
        assert_eq!(read_stats(buf.as_slice(), &labels).unwrap(), stats);
    }

    #[test]
    fn malformed_edge_line() {
        match read_proximity_edges("1\t2\n".as_bytes(), None) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rankings_tsv() {
        let rec = ScoredRecommendations::from_scores(4, vec![0.5, 0.25, 0.75], vec![], true);
        let mut buf = Vec::new();
        write_rankings([&rec], &IdIndex::new([100, 200, 300]), Some(2), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "4\t1\t300\t0.75\n4\t2\t100\t0.5\n"
        );
    }
}
