use std::fmt;
use std::str::FromStr;

/// A non-empty run of seeds: `A`, `A..B` (B excluded) or `A..=B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.start..self.end
    }
}

impl Default for SeedRange {
    fn default() -> Self {
        SeedRange { start: 0, end: 1 }
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("`{t}` is not a seed"))
        };
        let (start, end) = if let Some((a, b)) = s.split_once("..=") {
            let b = num(b)?;
            (num(a)?, b.checked_add(1).ok_or("seed range overflows")?)
        } else if let Some((a, b)) = s.split_once("..") {
            (num(a)?, num(b)?)
        } else {
            let a = num(s)?;
            (a, a.checked_add(1).ok_or("seed range overflows")?)
        };
        if end <= start {
            return Err(format!("seed range `{s}` is empty"));
        }
        Ok(SeedRange { start, end })
    }
}
