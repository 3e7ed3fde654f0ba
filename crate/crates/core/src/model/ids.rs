use std::fmt;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(i: usize) -> Self {
                Self(i as u32)
            }
        }
    };
}

dense_id!(
    /// Dense node index. Indices follow the ascending order of node labels,
    /// so "lowest index" and "lowest node id" agree.
    NodeId
);
dense_id!(
    /// Zero-based object index. Object `k` in files and reports is
    /// `ObjectId(k - 1)`.
    ObjectId
);
dense_id!(LinkId);

impl ObjectId {
    /// One-based id used in files and reports.
    pub fn label(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}
