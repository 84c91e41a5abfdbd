//! Line-delimited JSON with a leading schema header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First line of every interchange file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header<M> {
    pub schema: String,
    pub version: u32,
    #[serde(flatten)]
    pub meta: M,
}

impl<M> Header<M> {
    pub fn new(schema: &str, meta: M) -> Self {
        Header {
            schema: schema.to_owned(),
            version: 1,
            meta,
        }
    }
}

pub fn to_bytes<M: Serialize, R: Serialize>(header: &Header<M>, records: &[R]) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(header)?;
    out.push(b'\n');
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn write<M: Serialize, R: Serialize>(
    path: &Path,
    header: &Header<M>,
    records: &[R],
) -> Result<()> {
    let bytes = to_bytes(header, records)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a file written by [`write`]. The header must carry `schema`.
pub fn read<M: DeserializeOwned, R: DeserializeOwned>(
    path: &Path,
    schema: &str,
) -> Result<(Header<M>, Vec<R>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header: Header<M> = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::parse(path, 1, e.to_string()))?
        }
        None => return Err(Error::parse(path, 1, "missing header line")),
    };
    if header.schema != schema {
        return Err(Error::parse(
            path,
            1,
            format!("expected schema {schema:?}, found {:?}", header.schema),
        ));
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?,
        );
    }
    Ok((header, records))
}
