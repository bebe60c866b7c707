//! File formats: marks CSV, edge lists, key=value metadata sidecars, and
//! text/CSV reports.

use crate::calibration::FitReport;
use crate::copula::MarkSet;
use crate::error::{Error, Result};
use crate::generator::{GenConfig, Graph};
use crate::stats::{MotifVector, StatSummary};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Marks CSV: header `id,w,x1[,x2,...,xd]`, 0-based ids, >= 15 significant
/// digits.
pub fn write_marks_csv(marks: &MarkSet, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    write!(out, "id,w")?;
    for k in 1..=marks.d {
        write!(out, ",x{k}")?;
    }
    writeln!(out)?;
    for i in 0..marks.n {
        write!(out, "{i},{:.16e}", marks.weights[i])?;
        for &x in marks.position(i) {
            write!(out, ",{x:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Marks parsed back from CSV; the copula family behind them is not part of
/// the file format.
#[derive(Clone, Debug)]
pub struct MarksCsv {
    pub n: usize,
    pub d: usize,
    pub weights: Vec<f64>,
    pub positions: Vec<f64>,
}

pub fn read_marks_csv(path: &Path) -> Result<MarksCsv> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty marks file", path.display())))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 3 || cols[0] != "id" || cols[1] != "w" {
        return Err(Error::Parse(format!("{}:1: expected header id,w,x1,...", path.display())));
    }
    let d = cols.len() - 2;
    let mut weights = Vec::new();
    let mut positions = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        let err = |msg: &str| Error::Parse(format!("{}:{}: {msg}", path.display(), lineno + 2));
        if fields.len() != d + 2 {
            return Err(err(&format!("expected {} fields, got {}", d + 2, fields.len())));
        }
        let id: usize = fields[0].parse().map_err(|_| err("bad id"))?;
        if id != weights.len() {
            return Err(err(&format!("ids must be consecutive from 0, got {id}")));
        }
        weights.push(fields[1].parse::<f64>().map_err(|_| err("bad weight"))?);
        for f in &fields[2..] {
            positions.push(f.parse::<f64>().map_err(|_| err("bad coordinate"))?);
        }
    }
    Ok(MarksCsv { n: weights.len(), d, weights, positions })
}

/// Edge-list export: one `u v` pair per line, 0-based, u < v.
pub fn write_edge_list(graph: &Graph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Metadata sidecar: key=value per line.
pub fn write_metadata(graph: &Graph, config: &GenConfig, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "regime={}", config.regime)?;
    writeln!(out, "n={}", config.n)?;
    writeln!(out, "d={}", config.dim())?;
    writeln!(out, "rho={:.16e}", config.rho)?;
    writeln!(out, "lambda={:.16e}", config.lambda)?;
    writeln!(out, "theta={:.16e}", config.family.effective_theta())?;
    writeln!(out, "seed={}", config.seed)?;
    writeln!(out, "epsilon={:.16e}", graph.epsilon)?;
    writeln!(out, "truncation_warnings={}", graph.truncation_warnings)?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut map = BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("{}:{}: expected key=value", path.display(), lineno + 1))
        })?;
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Result of reading an external edge list.
#[derive(Clone, Debug)]
pub struct IngestResult {
    pub graph: Graph,
    pub dropped_loops: u64,
    pub dropped_duplicates: u64,
    /// original id of each compacted node 0..n-1
    pub id_map: Vec<u64>,
}

/// Parse a whitespace-separated edge list, dropping self-loops and
/// duplicates with counts, compacting node ids to 0..n-1.
pub fn ingest_edge_list(path: &Path) -> Result<IngestResult> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err =
            |msg: &str| Error::Parse(format!("{}:{}: {msg}: {line:?}", path.display(), lineno + 1));
        let mut it = line.split_whitespace();
        let u: u64 = it
            .next()
            .ok_or_else(|| err("missing endpoints"))?
            .parse()
            .map_err(|_| err("bad endpoint"))?;
        let v: u64 = it
            .next()
            .ok_or_else(|| err("missing second endpoint"))?
            .parse()
            .map_err(|_| err("bad endpoint"))?;
        if it.next().is_some() {
            return Err(err("expected exactly two fields"));
        }
        raw.push((u, v));
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: std::collections::HashMap<u64, u32> =
        ids.iter().enumerate().map(|(i, &id)| (id, i as u32)).collect();

    let mut dropped_loops = 0u64;
    let mut canon: Vec<(u32, u32)> = Vec::with_capacity(raw.len());
    for (u, v) in raw {
        if u == v {
            dropped_loops += 1;
            continue;
        }
        let (a, b) = (index[&u], index[&v]);
        canon.push((a.min(b), a.max(b)));
    }
    canon.sort_unstable();
    let before = canon.len();
    canon.dedup();
    let dropped_duplicates = (before - canon.len()) as u64;
    Ok(IngestResult {
        graph: Graph::from_edges(ids.len(), &canon),
        dropped_loops,
        dropped_duplicates,
        id_map: ids,
    })
}

fn key_value_lines(fields: &[(&str, String)]) -> (String, String, String) {
    let mut text = String::new();
    let mut header = String::new();
    let mut row = String::new();
    for (i, (k, v)) in fields.iter().enumerate() {
        let _ = writeln!(text, "{k}={v}");
        if i > 0 {
            header.push(',');
            row.push(',');
        }
        header.push_str(k);
        row.push_str(v);
    }
    let csv = format!("{header}\n{row}\n");
    (text, header, csv)
}

// 17 significant digits: lossless f64 round trip
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Stat summary as key=value text and as a one-row CSV; fields agree
/// pairwise by construction.
pub fn stat_report(summary: &StatSummary) -> (String, String) {
    let (hill, k_lo, k_hi) = match &summary.hill {
        Some(t) => (real(t.alpha_hat_median), t.k_range.0.to_string(), t.k_range.1.to_string()),
        None => ("nan".into(), "0".into(), "0".into()),
    };
    let fields = vec![
        ("n", summary.n.to_string()),
        ("edges", summary.edges.to_string()),
        ("mean_degree", real(summary.mean_degree)),
        ("transitivity", real(summary.transitivity)),
        ("assortativity", real(summary.assortativity_pearson)),
        ("assortativity_spearman", real(summary.assortativity_spearman)),
        ("hill_alpha_median", hill),
        ("hill_k_min", k_lo),
        ("hill_k_max", k_hi),
    ];
    let (text, _, csv) = key_value_lines(&fields);
    (text, csv)
}

pub fn motif_report(mv: &MotifVector) -> (String, String) {
    let fields = vec![
        ("n", mv.n.to_string()),
        ("triangles", mv.t_n.to_string()),
        ("wedges", mv.w_n.to_string()),
        ("edges", mv.e_n.to_string()),
        ("q2", mv.q2.to_string()),
        ("q3", mv.q3.to_string()),
        ("p", mv.p_n.to_string()),
    ];
    let (text, _, csv) = key_value_lines(&fields);
    (text, csv)
}

pub fn fit_report(fit: &FitReport) -> (String, String) {
    let fields = vec![
        ("lambda_hat", real(fit.lambda_hat)),
        ("theta_hat", real(fit.theta_hat)),
        ("residual", real(fit.residual)),
        ("c_obs", real(fit.observed.0)),
        ("r_obs", real(fit.observed.1)),
        ("c_pred", real(fit.predicted.0)),
        ("r_pred", real(fit.predicted.1)),
        ("jacobian_c", real(fit.jacobian[0])),
        ("jacobian_r", real(fit.jacobian[1])),
        ("se_theta", real(fit.se_theta)),
        ("ci_lo", real(fit.ci_theta.0)),
        ("ci_hi", real(fit.ci_theta.1)),
        ("boundary", fit.boundary.to_string()),
        ("plateau", fit.plateau.to_string()),
        ("truncation_warnings", fit.truncation_warnings.to_string()),
    ];
    let (text, _, csv) = key_value_lines(&fields);
    (text, csv)
}

/// Two-column curve CSV (e.g. degree CCDF or C(k)).
pub fn curve_csv(header: (&str, &str), points: &[(usize, f64)]) -> String {
    let mut s = format!("{},{}\n", header.0, header.1);
    for &(k, v) in points {
        let _ = writeln!(s, "{k},{}", real(v));
    }
    s
}

pub fn write_string(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{sample_marks, CopulaFamily, WeightMarginal};
    use crate::generator::{self, Regime};
    use crate::stats;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn marks_csv_round_trip_to_15_digits() {
        let dir = tmp();
        let marks =
            sample_marks(50, CopulaFamily::fgm(0.6, 2), WeightMarginal::pareto(2.0), 7).unwrap();
        let path = dir.path().join("marks.csv");
        write_marks_csv(&marks, &path).unwrap();
        let back = read_marks_csv(&path).unwrap();
        assert_eq!(back.n, 50);
        assert_eq!(back.d, 2);
        for i in 0..50 {
            assert!((back.weights[i] - marks.weights[i]).abs() <= 1e-14 * marks.weights[i].abs());
            for k in 0..2 {
                assert!((back.positions[i * 2 + k] - marks.positions[i * 2 + k]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn marks_csv_rejects_bad_input() {
        let dir = tmp();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "id,w,x1\n0,0.5,0.5\n2,0.5,0.5\n").unwrap();
        assert!(matches!(read_marks_csv(&path), Err(Error::Parse(_))));
        std::fs::write(&path, "w,id,x1\n").unwrap();
        assert!(matches!(read_marks_csv(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tmp();
        let cfg = generator::GenConfig::new(
            1_000,
            1.0,
            0.8,
            Regime::FixedRangeExp,
            CopulaFamily::fgm(0.5, 1),
            WeightMarginal::UnitUniform,
            3,
        );
        let g = generator::generate(&cfg).unwrap();
        let path = dir.path().join("edges.txt");
        write_edge_list(&g, &path).unwrap();
        let back = ingest_edge_list(&path).unwrap();
        // ingest compacts to nodes that appear in edges; compare edge sets
        // through original ids
        let mut original: Vec<(u64, u64)> =
            g.edges().iter().map(|&(u, v)| (u as u64, v as u64)).collect();
        original.sort_unstable();
        let mut round: Vec<(u64, u64)> = back
            .graph
            .edges()
            .iter()
            .map(|&(u, v)| (back.id_map[u as usize], back.id_map[v as usize]))
            .collect();
        round.sort_unstable();
        assert_eq!(original, round);
        assert_eq!(back.dropped_loops, 0);
        assert_eq!(back.dropped_duplicates, 0);
    }

    #[test]
    fn ingest_examples() {
        let dir = tmp();
        let path = dir.path().join("p3.txt");
        std::fs::write(&path, "0 1\n1 2\n").unwrap();
        let res = ingest_edge_list(&path).unwrap();
        let mv = stats::motif_vector(&res.graph);
        assert_eq!(stats::transitivity(&mv), 0.0);
        assert!((stats::assortativity(&mv) + 1.0).abs() < 1e-12);

        std::fs::write(&path, "0 1\n2 2\n1 0\n").unwrap();
        let res = ingest_edge_list(&path).unwrap();
        assert_eq!(res.dropped_loops, 1);
        assert_eq!(res.dropped_duplicates, 1);
        assert_eq!(res.graph.edge_count(), 1);

        std::fs::write(&path, "0 1\n1 x\n").unwrap();
        let err = ingest_edge_list(&path).unwrap_err();
        assert!(format!("{err}").contains(":2:"), "{err}");
    }

    #[test]
    fn metadata_round_trip() {
        let dir = tmp();
        let cfg = generator::GenConfig::new(
            500,
            2.0,
            0.5,
            Regime::HeavyTail,
            CopulaFamily::fgm(0.25, 2),
            WeightMarginal::pareto(2.5),
            99,
        );
        let g = generator::generate(&cfg).unwrap();
        let path = dir.path().join("meta.txt");
        write_metadata(&g, &cfg, &path).unwrap();
        let map = read_metadata(&path).unwrap();
        assert_eq!(map["regime"], "heavy_tail");
        assert_eq!(map["n"], "500");
        assert_eq!(map["d"], "2");
        assert_eq!(map["seed"], "99");
        let eps: f64 = map["epsilon"].parse().unwrap();
        assert!((eps - cfg.epsilon()).abs() < 1e-14);
    }

    #[test]
    fn reports_text_and_csv_agree() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]);
        let summary = stats::summarize(&g);
        let (text, csv) = stat_report(&summary);
        assert!(text.contains("transitivity=1"));
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), row.len());
        for (h, v) in header.iter().zip(&row) {
            assert!(text.contains(&format!("{h}={v}")), "field {h}");
        }
        let idx = header.iter().position(|&h| h == "transitivity").unwrap();
        assert_eq!(row[idx].parse::<f64>().unwrap(), 1.0);
    }

    #[test]
    fn csv_preserves_significant_digits() {
        let v = 0.123456789012345678;
        let s = real(v);
        assert_eq!(s.parse::<f64>().unwrap(), v);
    }
}
