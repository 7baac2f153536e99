use super::grid::{Grid, GridField};
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SFLD";
const VERSION: u32 = 1;

/// Binary field format: `"SFLD"`, version, dim, N (u32 LE), L (f64 LE),
/// then the row-major samples as f64 LE.
pub fn write_field(field: &GridField, mut w: impl Write) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.half_width().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field(mut r: impl Read) -> Result<GridField> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)
        .map_err(|_| Error::BadFieldFile("truncated header".into()))?;
    if &head[0..4] != MAGIC {
        return Err(Error::BadFieldFile("bad magic".into()));
    }
    let u = |k: usize| u32::from_le_bytes(head[k..k + 4].try_into().unwrap());
    if u(4) != VERSION {
        return Err(Error::BadFieldFile(format!("unsupported version {}", u(4))));
    }
    let l = f64::from_le_bytes(head[16..24].try_into().unwrap());
    let grid = Grid::new(u(8) as usize, l, u(12) as usize)
        .map_err(|e| Error::BadFieldFile(e.to_string()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::BadFieldFile(format!(
            "expected {} samples, found {} bytes",
            grid.len(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    GridField::new(grid, values)
}

pub fn save_field(field: &GridField, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<GridField> {
    let f = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(f))
}

/// CSV export: one index column per axis, then the value.
pub fn write_field_csv(field: &GridField, w: impl Write) -> Result<()> {
    let g = field.grid();
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..g.dim()).map(|a| format!("i{a}")).collect();
    header.push("value".into());
    out.write_record(&header)?;
    for (i, v) in field.values().iter().enumerate() {
        let ks = g.unravel(i);
        let mut row: Vec<String> = (0..g.dim()).map(|a| ks[a].to_string()).collect();
        row.push(format!("{v:e}"));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
