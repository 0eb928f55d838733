//! EMB1 embedding files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! header:  "EMB1"  u32 dim  u64 count
//! record:  u16 token_len  token bytes (UTF-8)  u32 context_id  u8 flags
//!          16-byte source tag (space padded)  dim × f32
//! ```
//!
//! `flags` bit 0 marks mask-token rows; other bits must be clear.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";
pub const SOURCE_TAG_LEN: usize = 16;
const FLAG_MASK: u8 = 0b1;
const HEADER_LEN: u64 = 4 + 4 + 8;

/// One contextual vector. Stored as f32 on disk, held as f64 in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub token: String,
    pub context_id: u32,
    pub source: String,
    pub vector: Vec<f64>,
    pub is_mask: bool,
}

impl EmbeddingRecord {
    pub fn new(token: impl Into<String>, context_id: u32, source: impl Into<String>, vector: Vec<f64>) -> Self {
        EmbeddingRecord {
            token: token.into(),
            context_id,
            source: source.into(),
            vector,
            is_mask: false,
        }
    }

    pub fn masked(mut self) -> Self {
        self.is_mask = true;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.token.is_empty() {
            return Err(Error::invalid("record token is empty"));
        }
        if self.token.len() > u16::MAX as usize {
            return Err(Error::invalid(format!("token longer than {} bytes", u16::MAX)));
        }
        if self.source.len() > SOURCE_TAG_LEN || self.source.ends_with(' ') || self.source.contains(['\t', '\n']) {
            return Err(Error::invalid(format!(
                "source tag `{}` must be at most {SOURCE_TAG_LEN} bytes without trailing spaces",
                self.source
            )));
        }
        if self.vector.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.vector.len(),
            });
        }
        if let Some(index) = self.vector.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }
}

/// Streaming EMB1 reader; holds one record at a time.
pub struct Emb1Reader<R> {
    inner: R,
    dim: usize,
    count: u64,
    read: u64,
    offset: u64,
    done: bool,
}

impl<R: Read> Emb1Reader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN as usize];
        inner.read_exact(&mut header).map_err(|e| match e.kind() {
            ErrorKind::UnexpectedEof => Error::BadHeader("file shorter than the EMB1 header".into()),
            _ => Error::Stream(e),
        })?;
        if &header[..4] != MAGIC {
            return Err(Error::BadHeader(format!(
                "bad magic {:?}, expected \"EMB1\"",
                String::from_utf8_lossy(&header[..4])
            )));
        }
        let dim = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
        let count = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
        if dim == 0 && count > 0 {
            return Err(Error::BadHeader("zero dimension with nonzero record count".into()));
        }
        Ok(Emb1Reader {
            inner,
            dim,
            count,
            read: 0,
            offset: HEADER_LEN,
            done: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Record count declared in the header.
    pub fn declared_len(&self) -> u64 {
        self.count
    }

    fn fill(&mut self, buf: &mut [u8], record_start: u64) -> Result<()> {
        self.inner.read_exact(buf).map_err(|e| match e.kind() {
            ErrorKind::UnexpectedEof => Error::Truncated { offset: record_start },
            _ => Error::Stream(e),
        })?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn read_record(&mut self) -> Result<EmbeddingRecord> {
        let start = self.offset;
        let corrupt = |message: String| Error::Corrupt { offset: start, message };

        let mut len = [0u8; 2];
        self.fill(&mut len, start)?;
        let token_len = u16::from_le_bytes(len) as usize;
        if token_len == 0 {
            return Err(corrupt("zero-length token".into()));
        }
        let mut token = vec![0u8; token_len];
        self.fill(&mut token, start)?;
        let token = String::from_utf8(token).map_err(|_| corrupt("token is not valid UTF-8".into()))?;

        let mut fixed = [0u8; 4 + 1 + SOURCE_TAG_LEN];
        self.fill(&mut fixed, start)?;
        let context_id = u32::from_le_bytes(fixed[..4].try_into().expect("4 bytes"));
        let flags = fixed[4];
        if flags & !FLAG_MASK != 0 {
            return Err(corrupt(format!("unknown flag bits {flags:#04x}")));
        }
        let source = std::str::from_utf8(&fixed[5..])
            .map_err(|_| corrupt("source tag is not valid UTF-8".into()))?
            .trim_end_matches(' ')
            .to_string();

        let mut raw = vec![0u8; 4 * self.dim];
        self.fill(&mut raw, start)?;
        let vector: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect();
        if let Some(i) = vector.iter().position(|v| !v.is_finite()) {
            return Err(corrupt(format!("non-finite component {i}")));
        }
        Ok(EmbeddingRecord {
            token,
            context_id,
            source,
            vector,
            is_mask: flags & FLAG_MASK != 0,
        })
    }

    fn check_trailing(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe) {
            Ok(0) => Ok(()),
            Ok(_) => Err(Error::Corrupt {
                offset: self.offset,
                message: "trailing bytes after the declared record count".into(),
            }),
            Err(e) => Err(Error::Stream(e)),
        }
    }
}

impl<R: Read> Iterator for Emb1Reader<R> {
    type Item = Result<EmbeddingRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.read == self.count {
            self.done = true;
            return self.check_trailing().err().map(Err);
        }
        let rec = self.read_record();
        match rec {
            Ok(_) => self.read += 1,
            Err(_) => self.done = true,
        }
        Some(rec)
    }
}

/// Writes an EMB1 stream whose record count is fixed up front.
pub struct Emb1Writer<W: Write> {
    inner: W,
    dim: usize,
    count: u64,
    written: u64,
}

impl<W: Write> Emb1Writer<W> {
    pub fn new(mut inner: W, dim: usize, count: u64) -> Result<Self> {
        let dim32 = u32::try_from(dim).map_err(|_| Error::invalid("dimension exceeds u32"))?;
        if dim == 0 && count > 0 {
            return Err(Error::invalid("records need at least one dimension"));
        }
        inner.write_all(MAGIC)?;
        inner.write_all(&dim32.to_le_bytes())?;
        inner.write_all(&count.to_le_bytes())?;
        Ok(Emb1Writer {
            inner,
            dim,
            count,
            written: 0,
        })
    }

    pub fn write(&mut self, record: &EmbeddingRecord) -> Result<()> {
        if self.written == self.count {
            return Err(Error::invalid("more records than declared in the header"));
        }
        record.validate(self.dim)?;
        let w = &mut self.inner;
        w.write_all(&(record.token.len() as u16).to_le_bytes())?;
        w.write_all(record.token.as_bytes())?;
        w.write_all(&record.context_id.to_le_bytes())?;
        w.write_all(&[u8::from(record.is_mask)])?;
        let mut tag = [b' '; SOURCE_TAG_LEN];
        tag[..record.source.len()].copy_from_slice(record.source.as_bytes());
        w.write_all(&tag)?;
        for &v in &record.vector {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.written != self.count {
            return Err(Error::invalid(format!(
                "header declares {} records, {} written",
                self.count, self.written
            )));
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<Vec<EmbeddingRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Emb1Reader::new(BufReader::new(file))?.collect()
}

pub fn write_embeddings(path: impl AsRef<Path>, records: &[EmbeddingRecord]) -> Result<()> {
    let path = path.as_ref();
    let dim = records.first().map_or(0, |r| r.vector.len());
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = Emb1Writer::new(BufWriter::new(file), dim, records.len() as u64)?;
    for r in records {
        writer.write(r)?;
    }
    writer.finish()?;
    Ok(())
}

/// Text layout: `token<TAB>context_id<TAB>source<TAB>flags<TAB>v1 v2 …`.
pub fn write_embeddings_text(path: impl AsRef<Path>, records: &[EmbeddingRecord]) -> Result<()> {
    let path = path.as_ref();
    let dim = records.first().map_or(0, |r| r.vector.len());
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        r.validate(dim)?;
        if r.token.contains(['\t', '\n']) {
            return Err(Error::invalid(format!("token `{}` contains a tab or newline", r.token)));
        }
        let values: Vec<String> = r.vector.iter().map(|&v| (v as f32).to_string()).collect();
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            r.token,
            r.context_id,
            r.source,
            u8::from(r.is_mask),
            values.join(" ")
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embeddings_text(path: impl AsRef<Path>) -> Result<Vec<EmbeddingRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut dim = None;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let err = |message: String| Error::Parse {
            path: name.clone(),
            line: lineno,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [token, ctx, source, flags, values] = fields[..] else {
            return Err(err(format!("expected 5 tab-separated fields, found {}", fields.len())));
        };
        let context_id = ctx.parse().map_err(|_| err(format!("bad context id `{ctx}`")))?;
        let is_mask = match flags {
            "0" => false,
            "1" => true,
            _ => return Err(err(format!("bad flags `{flags}`"))),
        };
        let vector = values
            .split(' ')
            .map(|v| v.parse::<f32>().map(f64::from).map_err(|_| err(format!("bad value `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        let d = *dim.get_or_insert(vector.len());
        let rec = EmbeddingRecord {
            token: token.to_string(),
            context_id,
            source: source.to_string(),
            vector,
            is_mask,
        };
        rec.validate(d).map_err(|e| err(e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}
