use std::io::{BufRead, Read};
use std::path::Path;

use super::cloud::PointCloud;
use crate::fsutil::write_atomic;
use crate::{Error, Result};

const MAGIC: &[u8; 5] = b"ASLB1";
const AXES: [&str; 3] = ["x", "y", "z"];

impl PointCloud {
    /// CSV with a `#`-comment metadata header followed by one point per row.
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(b"# aslab point cloud\n");
        out.extend_from_slice(format!("# d: {}\n", self.dim()).as_bytes());
        out.extend_from_slice(format!("# eps_min: {:e}\n", self.eps_min()).as_bytes());
        out.extend_from_slice(
            format!("# provenance: {}\n", self.provenance().replace('\n', " ")).as_bytes(),
        );
        let special: Vec<String> = self.special().iter().map(|i| i.to_string()).collect();
        out.extend_from_slice(format!("# special: {}\n", special.join(" ")).as_bytes());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&AXES[..self.dim()])?;
        for p in self.points() {
            w.write_record(p.iter().map(|x| format!("{x:e}")))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut buf = std::io::BufReader::new(reader);
        let mut dim = None;
        let mut eps = None;
        let mut provenance = String::new();
        let mut special = Vec::new();
        let mut body = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            if buf.read_line(&mut line)? == 0 {
                break;
            }
            let Some(meta) = line.strip_prefix('#') else {
                body.push_str(&line);
                break;
            };
            let meta = meta.trim();
            if let Some((key, value)) = meta.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "d" => {
                        dim = Some(
                            value
                                .parse::<usize>()
                                .map_err(|e| Error::Format(format!("bad d: {e}")))?,
                        )
                    }
                    "eps_min" => {
                        eps = Some(
                            value
                                .parse::<f64>()
                                .map_err(|e| Error::Format(format!("bad eps_min: {e}")))?,
                        )
                    }
                    "provenance" => provenance = value.to_string(),
                    "special" => {
                        special = value
                            .split_whitespace()
                            .map(|s| {
                                s.parse::<usize>()
                                    .map_err(|e| Error::Format(format!("bad special index: {e}")))
                            })
                            .collect::<Result<_>>()?
                    }
                    _ => {}
                }
            }
        }
        buf.read_to_string(&mut body)?;
        let dim = dim.ok_or_else(|| Error::Format("missing '# d:' header".into()))?;
        let eps = eps.ok_or_else(|| Error::Format("missing '# eps_min:' header".into()))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(body.as_bytes());
        let mut coords = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(Error::Format(format!(
                    "row with {} fields, expected {dim}",
                    rec.len()
                )));
            }
            for f in rec.iter() {
                coords.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Format(format!("bad coordinate '{f}': {e}")))?,
                );
            }
        }
        PointCloud::new(dim, coords, eps, provenance)?.with_special(special)
    }

    /// Little-endian binary: magic `ASLB1`, `u32` d, `u64` n, `f64` eps_min,
    /// `u32` provenance length and bytes, `u32` special count and `u64`
    /// indices, then `n·d` coordinates as `f64`.
    pub fn to_binary_bytes(&self) -> Vec<u8> {
        let prov = self.provenance().as_bytes();
        let mut out =
            Vec::with_capacity(40 + prov.len() + 8 * (self.coords().len() + self.special().len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.eps_min().to_le_bytes());
        out.extend_from_slice(&(prov.len() as u32).to_le_bytes());
        out.extend_from_slice(prov);
        out.extend_from_slice(&(self.special().len() as u32).to_le_bytes());
        for &i in self.special() {
            out.extend_from_slice(&(i as u64).to_le_bytes());
        }
        for x in self.coords() {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_binary_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(Error::Format("truncated binary cloud".into()));
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        if take(5)? != MAGIC {
            return Err(Error::Format("bad magic, expected ASLB1".into()));
        }
        let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize;
        let u64_at = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8 bytes"));
        let dim = u32_at(take(4)?);
        let n = u64_at(take(8)?) as usize;
        let eps = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let plen = u32_at(take(4)?);
        let provenance =
            String::from_utf8(take(plen)?.to_vec()).map_err(|e| Error::Format(e.to_string()))?;
        let nspecial = u32_at(take(4)?);
        let special = (0..nspecial)
            .map(|_| take(8).map(|b| u64_at(b) as usize))
            .collect::<Result<Vec<_>>>()?;
        let body = take(
            n.checked_mul(dim)
                .and_then(|m| m.checked_mul(8))
                .ok_or_else(|| Error::Format("size overflow".into()))?,
        )?;
        if !cur.is_empty() {
            return Err(Error::Format("trailing bytes after binary cloud".into()));
        }
        let coords = body
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        PointCloud::new(dim, coords, eps, provenance)?.with_special(special)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_csv_bytes()?)
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_binary_bytes())
    }

    /// Loads either format, chosen by content (binary files start with the magic).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            Self::from_binary_bytes(&bytes)
        } else {
            Self::from_csv_reader(bytes.as_slice())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PointCloud {
        PointCloud::new(
            2,
            vec![0.1, 0.2, 1.0 / 3.0, -7.5e-12, 3.0, 4.0],
            1e-3,
            "unit test",
        )
        .unwrap()
        .with_special(vec![2])
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let c = sample();
        let bytes = c.to_csv_bytes().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("# d: 2") && text.contains("x,y"));
        assert_eq!(PointCloud::from_csv_reader(bytes.as_slice()).unwrap(), c);
    }

    #[test]
    fn binary_round_trip() {
        let c = sample();
        let bytes = c.to_binary_bytes();
        assert_eq!(&bytes[..5], b"ASLB1");
        assert_eq!(PointCloud::from_binary_bytes(&bytes).unwrap(), c);
        assert!(PointCloud::from_binary_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(PointCloud::from_binary_bytes(b"ASLB2").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = sample();
        c.save_csv(dir.path().join("c.csv")).unwrap();
        c.save_binary(dir.path().join("c.bin")).unwrap();
        assert_eq!(PointCloud::load(dir.path().join("c.csv")).unwrap(), c);
        assert_eq!(PointCloud::load(dir.path().join("c.bin")).unwrap(), c);
    }

    #[test]
    fn csv_errors() {
        assert!(PointCloud::from_csv_reader("x\n1\n".as_bytes()).is_err());
        assert!(PointCloud::from_csv_reader("# d: 1\n# eps_min: 1\nx\nfoo\n".as_bytes()).is_err());
        assert!(PointCloud::from_csv_reader("# d: 2\n# eps_min: 1\nx,y\n1\n".as_bytes()).is_err());
    }
}
