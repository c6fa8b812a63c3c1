//! Binary dataset file: `NQD1`, version u32, record count u64, then fixed
//! 93-byte records (90 piece codes in square order, side byte, i16 label),
//! all little-endian.

use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::board::{Centipawns, Color, Piece, Position, NUM_SQUARES};

pub const MAGIC: &[u8; 4] = b"NQD1";
pub const VERSION: u32 = 1;
pub const HEADER_SIZE: usize = 16;
pub const RECORD_SIZE: usize = NUM_SQUARES + 1 + 2;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset file: {0}")]
    Io(#[from] io::Error),
    #[error("not a dataset file (bad magic)")]
    BadMagic,
    #[error("unsupported dataset version {0}")]
    Version(u32),
    #[error("dataset truncated at byte offset {offset}")]
    Truncated { offset: u64 },
    #[error("{extra} unexpected bytes after the last record")]
    TrailingBytes { extra: u64 },
    #[error("record {index}: illegal packed position: {reason}")]
    IllegalPosition { index: u64, reason: String },
}

/// Packed position plus its side-to-move relative label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DatasetRecord {
    pub board: [u8; NUM_SQUARES],
    /// 0 Red, 1 Black.
    pub side: u8,
    pub label: i16,
}

impl DatasetRecord {
    pub fn new(pos: &Position, label: Centipawns) -> DatasetRecord {
        let mut board = [0u8; NUM_SQUARES];
        for (sq, p) in pos.pieces() {
            board[sq.index()] = p.code();
        }
        DatasetRecord {
            board,
            side: pos.side_to_move().index() as u8,
            label: label.clamp(i16::MIN as Centipawns, i16::MAX as Centipawns) as i16,
        }
    }

    pub fn label(&self) -> Centipawns {
        self.label as Centipawns
    }

    pub fn side_to_move(&self) -> Option<Color> {
        match self.side {
            0 => Some(Color::Red),
            1 => Some(Color::Black),
            _ => None,
        }
    }

    /// Unpacks and validates the position.
    pub fn position(&self) -> Result<Position, String> {
        let side = self.side_to_move().ok_or_else(|| format!("bad side byte {}", self.side))?;
        let mut board = [None; NUM_SQUARES];
        for (cell, &code) in board.iter_mut().zip(&self.board) {
            if code != 0 {
                *cell = Some(Piece::from_code(code).ok_or_else(|| format!("bad piece code {code}"))?);
            }
        }
        Position::from_board(board, side, 0)
    }

    pub fn to_bytes(&self) -> [u8; RECORD_SIZE] {
        let mut out = [0u8; RECORD_SIZE];
        out[..NUM_SQUARES].copy_from_slice(&self.board);
        out[NUM_SQUARES] = self.side;
        out[NUM_SQUARES + 1..].copy_from_slice(&self.label.to_le_bytes());
        out
    }

    pub fn from_bytes(b: &[u8; RECORD_SIZE]) -> DatasetRecord {
        let mut board = [0u8; NUM_SQUARES];
        board.copy_from_slice(&b[..NUM_SQUARES]);
        DatasetRecord {
            board,
            side: b[NUM_SQUARES],
            label: i16::from_le_bytes([b[NUM_SQUARES + 1], b[NUM_SQUARES + 2]]),
        }
    }
}

pub fn write_records(records: &[DatasetRecord], mut w: impl Write) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(records.len() as u64).to_le_bytes())?;
    for r in records {
        w.write_all(&r.to_bytes())?;
    }
    Ok(())
}

pub fn read_records(mut r: impl Read) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() >= 4 && &bytes[..4] != MAGIC {
        return Err(DatasetError::BadMagic);
    }
    if bytes.len() < HEADER_SIZE {
        return Err(DatasetError::Truncated {
            offset: bytes.len() as u64,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(DatasetError::Version(version));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let body = &bytes[HEADER_SIZE..];
    let complete = (body.len() / RECORD_SIZE) as u64;
    if complete < count {
        return Err(DatasetError::Truncated {
            offset: (HEADER_SIZE as u64) + complete * RECORD_SIZE as u64,
        });
    }
    let expected = count as usize * RECORD_SIZE;
    if body.len() > expected {
        return Err(DatasetError::TrailingBytes {
            extra: (body.len() - expected) as u64,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    for (index, chunk) in body.chunks_exact(RECORD_SIZE).enumerate() {
        let rec = DatasetRecord::from_bytes(chunk.try_into().unwrap());
        rec.position().map_err(|reason| DatasetError::IllegalPosition {
            index: index as u64,
            reason,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_dataset(records: &[DatasetRecord], path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    write_records(records, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>, DatasetError> {
    read_records(io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<DatasetRecord> {
        let mut p = Position::startpos();
        let mut out = vec![DatasetRecord::new(&p, 0)];
        for (i, m) in ["h2e2", "h9g7", "h0g2"].iter().enumerate() {
            let mv = p.parse_move(m).unwrap();
            p.do_move(mv);
            out.push(DatasetRecord::new(&p, (i as Centipawns - 1) * 137));
        }
        out
    }

    #[test]
    fn write_read_identity() {
        let recs = sample();
        let mut bytes = Vec::new();
        write_records(&recs, &mut bytes).unwrap();
        assert_eq!(bytes.len(), HEADER_SIZE + RECORD_SIZE * recs.len());
        assert_eq!(read_records(&bytes[..]).unwrap(), recs);
    }

    #[test]
    fn unpacks_to_the_same_position() {
        let mut p = Position::startpos();
        let mv = p.parse_move("b0c2").unwrap();
        p.do_move(mv);
        let r = DatasetRecord::new(&p, 5);
        assert_eq!(r.position().unwrap().board(), p.board());
        assert_eq!(r.side_to_move(), Some(Color::Black));
    }

    #[test]
    fn corrupt_files() {
        let recs = sample();
        let mut bytes = Vec::new();
        write_records(&recs, &mut bytes).unwrap();

        let mut bad = bytes.clone();
        bad[1] = b'X';
        assert!(matches!(read_records(&bad[..]), Err(DatasetError::BadMagic)));

        let cut = &bytes[..bytes.len() - 5];
        let offset = (HEADER_SIZE + 3 * RECORD_SIZE) as u64;
        match read_records(cut) {
            Err(e @ DatasetError::Truncated { .. }) => {
                assert!(e.to_string().contains(&offset.to_string()));
            }
            other => panic!("{other:?}"),
        }

        let mut v = bytes.clone();
        v[4] = 9;
        assert!(matches!(read_records(&v[..]), Err(DatasetError::Version(9))));

        let mut illegal = bytes.clone();
        // Remove the red king of record 0 (square e0 = index 4).
        illegal[HEADER_SIZE + 4] = 0;
        assert!(matches!(
            read_records(&illegal[..]),
            Err(DatasetError::IllegalPosition { index: 0, .. })
        ));

        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(read_records(&extra[..]), Err(DatasetError::TrailingBytes { extra: 1 })));
    }
}
