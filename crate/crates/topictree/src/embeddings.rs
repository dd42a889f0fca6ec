//! Word vectors in word2vec text format: a `count dimension` header line,
//! then one `token v1 .. vd` line per vector.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use topictree_core::eval::EmbeddingTable;

use crate::error::{Error, Result};

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file), path)
}

pub fn parse_embeddings<R: BufRead>(reader: R, path: &Path) -> Result<EmbeddingTable> {
    let malformed = |line: usize, message: String| Error::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| malformed(1, "missing header".into()))?;
    let header = header.map_err(|e| malformed(1, e.to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str| s.parse::<usize>().ok();
    let (count, dim) = match fields[..] {
        [c, d] => match (parse_usize(c), parse_usize(d)) {
            (Some(c), Some(d)) if d > 0 => (c, d),
            _ => return Err(malformed(1, format!("bad header {header:?}"))),
        },
        _ => return Err(malformed(1, format!("header must be \"count dimension\", found {header:?}"))),
    };

    let mut table = EmbeddingTable::new(dim);
    for (n, line) in lines {
        let line = line.map_err(|e| malformed(n, e.to_string()))?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let vector = parts
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| malformed(n, "vector entries must be finite numbers".into()))?;
        if vector.len() != dim {
            return Err(malformed(n, format!("expected {dim} values, found {}", vector.len())));
        }
        if table.len() == count {
            return Err(malformed(n, format!("more vectors than the {count} in the header")));
        }
        table
            .insert(token.to_string(), vector)
            .map_err(|e| malformed(n, e.to_string()))?;
    }
    if table.len() != count {
        return Err(malformed(
            1,
            format!("header declares {count} vectors, file has {}", table.len()),
        ));
    }
    Ok(table)
}
