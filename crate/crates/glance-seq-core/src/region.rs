//! The eight-value gaze-region alphabet.
//!
//! Every observation in this crate is one of eight context-defined gaze
//! regions. Codes 1..=8 and snake_case names form a fixed bijection; the
//! zero-based [`GlanceRegion::index`] is what matrix code uses.

use core::fmt;

/// A discrete gaze region. The `u8` discriminant is the canonical code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum GlanceRegion {
    RearviewMirror = 1,
    CenterStack = 2,
    EyesClosed = 3,
    InteriorObject = 4,
    Right = 5,
    Forward = 6,
    InstrumentCluster = 7,
    Left = 8,
}

impl GlanceRegion {
    /// Number of regions in the alphabet.
    pub const COUNT: usize = 8;

    /// All regions in code order.
    pub const ALL: [GlanceRegion; 8] = [
        GlanceRegion::RearviewMirror,
        GlanceRegion::CenterStack,
        GlanceRegion::EyesClosed,
        GlanceRegion::InteriorObject,
        GlanceRegion::Right,
        GlanceRegion::Forward,
        GlanceRegion::InstrumentCluster,
        GlanceRegion::Left,
    ];

    /// Canonical code, 1..=8.
    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Zero-based index, `code() - 1`.
    #[inline]
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1..=8 => Some(Self::ALL[code as usize - 1]),
            _ => None,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Canonical snake_case name.
    pub fn name(self) -> &'static str {
        match self {
            GlanceRegion::RearviewMirror => "rearview_mirror",
            GlanceRegion::CenterStack => "center_stack",
            GlanceRegion::EyesClosed => "eyes_closed",
            GlanceRegion::InteriorObject => "interior_object",
            GlanceRegion::Right => "right",
            GlanceRegion::Forward => "forward",
            GlanceRegion::InstrumentCluster => "instrument_cluster",
            GlanceRegion::Left => "left",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|r| r.name() == name)
    }
}

impl fmt::Display for GlanceRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_name_bijection() {
        for (i, region) in GlanceRegion::ALL.iter().enumerate() {
            assert_eq!(region.code() as usize, i + 1);
            assert_eq!(region.index(), i);
            assert_eq!(GlanceRegion::from_code(region.code()), Some(*region));
            assert_eq!(GlanceRegion::from_index(i), Some(*region));
            assert_eq!(GlanceRegion::from_name(region.name()), Some(*region));
        }
    }

    #[test]
    fn canonical_codes() {
        assert_eq!(GlanceRegion::from_code(1), Some(GlanceRegion::RearviewMirror));
        assert_eq!(GlanceRegion::from_code(2), Some(GlanceRegion::CenterStack));
        assert_eq!(GlanceRegion::from_code(3), Some(GlanceRegion::EyesClosed));
        assert_eq!(GlanceRegion::from_code(4), Some(GlanceRegion::InteriorObject));
        assert_eq!(GlanceRegion::from_code(5), Some(GlanceRegion::Right));
        assert_eq!(GlanceRegion::from_code(6), Some(GlanceRegion::Forward));
        assert_eq!(GlanceRegion::from_code(7), Some(GlanceRegion::InstrumentCluster));
        assert_eq!(GlanceRegion::from_code(8), Some(GlanceRegion::Left));
    }

    #[test]
    fn out_of_range_codes_rejected() {
        assert_eq!(GlanceRegion::from_code(0), None);
        assert_eq!(GlanceRegion::from_code(9), None);
        assert_eq!(GlanceRegion::from_index(8), None);
        assert_eq!(GlanceRegion::from_name("windshield"), None);
    }
}
