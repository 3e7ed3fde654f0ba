use crate::error::{Error, Result};

/// Object catalog. All objects have the same size and the same number of
/// chunks; sizes are stored in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Catalog {
    object_count: usize,
    chunks_per_object: u32,
    chunk_bits: u64,
    interest_bits: u64,
}

impl Catalog {
    pub fn new(object_count: usize, chunks_per_object: u32, chunk_bytes: u64, interest_bytes: u64) -> Result<Self> {
        if object_count == 0 || chunks_per_object == 0 || chunk_bytes == 0 || interest_bytes == 0 {
            return Err(Error::Config("catalog sizes must be positive integers".into()));
        }
        Ok(Self {
            object_count,
            chunks_per_object,
            chunk_bits: chunk_bytes * 8,
            interest_bits: interest_bytes * 8,
        })
    }

    /// 5000 objects of 5 MB split into 50 KB chunks, 125 B interests.
    pub fn paper_default() -> Self {
        Self::new(5000, 100, 50_000, 125).expect("static catalog")
    }

    pub fn object_count(&self) -> usize {
        self.object_count
    }

    pub fn chunks_per_object(&self) -> u32 {
        self.chunks_per_object
    }

    pub fn chunk_bits(&self) -> u64 {
        self.chunk_bits
    }

    pub fn interest_bits(&self) -> u64 {
        self.interest_bits
    }

    pub fn object_bits(&self) -> u64 {
        self.chunk_bits * self.chunks_per_object as u64
    }

    pub fn with_object_count(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("object count must be positive".into()));
        }
        self.object_count = k;
        Ok(self)
    }

    pub fn with_chunks_per_object(mut self, chunks: u32) -> Result<Self> {
        if chunks == 0 {
            return Err(Error::Config("chunks per object must be positive".into()));
        }
        self.chunks_per_object = chunks;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_sizes() {
        let c = Catalog::paper_default();
        assert_eq!(c.object_bits(), 5_000_000 * 8);
        assert_eq!(c.chunks_per_object(), 100);
        assert_eq!(c.object_bits(), c.chunk_bits() * c.chunks_per_object() as u64);
    }

    #[test]
    fn rejects_zero() {
        assert!(Catalog::new(0, 1, 1, 1).is_err());
        assert!(Catalog::new(1, 1, 0, 1).is_err());
    }
}
