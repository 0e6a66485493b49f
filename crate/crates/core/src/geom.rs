use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position {
    pub x: i64,
    pub y: i64,
}

impl Position {
    pub const fn new(x: i64, y: i64) -> Self {
        Position { x, y }
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, o: Position) -> Position {
        Position::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, o: Position) -> Position {
        Position::new(self.x - o.x, self.y - o.y)
    }
}

/// Closed axis-aligned query rectangle `[x1, x2] x [y1, y2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

impl Region {
    pub fn new(x1: i64, y1: i64, x2: i64, y2: i64) -> Result<Self> {
        if x1 > x2 || y1 > y2 {
            return Err(Error::MalformedRegion { x1, y1, x2, y2 });
        }
        Ok(Region { x1, y1, x2, y2 })
    }

    pub fn contains(&self, p: Position) -> bool {
        self.x1 <= p.x && p.x <= self.x2 && self.y1 <= p.y && p.y <= self.y2
    }

    /// Grows every side by `by` and clips to `[0, max_x] x [0, max_y]`.
    /// Returns `None` when the grown region misses the grid entirely.
    pub fn expand_clamped(&self, by: i64, max_x: i64, max_y: i64) -> Option<Region> {
        let r = Region {
            x1: (self.x1 - by).max(0),
            y1: (self.y1 - by).max(0),
            x2: (self.x2 + by).min(max_x),
            y2: (self.y2 + by).min(max_y),
        };
        (r.x1 <= r.x2 && r.y1 <= r.y2).then_some(r)
    }

    pub fn is_subset_of(&self, o: &Region) -> bool {
        o.x1 <= self.x1 && self.x2 <= o.x2 && o.y1 <= self.y1 && self.y2 <= o.y2
    }
}

impl FromStr for Region {
    type Err = Error;

    /// Parses `x1,y1,x2,y2`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidConfig(format!("region `{s}` is not x1,y1,x2,y2")))?;
        match parts[..] {
            [x1, y1, x2, y2] => Region::new(x1, y1, x2, y2),
            _ => Err(Error::InvalidConfig(format!(
                "region `{s}` is not x1,y1,x2,y2"
            ))),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x1, self.y1, self.x2, self.y2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: i64,
    pub y_min: i64,
    pub x_max: i64,
    pub y_max: i64,
}

impl BoundingBox {
    pub fn point(p: Position) -> Self {
        BoundingBox {
            x_min: p.x,
            y_min: p.y,
            x_max: p.x,
            y_max: p.y,
        }
    }

    pub fn include(&mut self, p: Position) {
        self.x_min = self.x_min.min(p.x);
        self.y_min = self.y_min.min(p.y);
        self.x_max = self.x_max.max(p.x);
        self.y_max = self.y_max.max(p.y);
    }

    pub fn translate(self, by: Position) -> Self {
        BoundingBox {
            x_min: self.x_min + by.x,
            y_min: self.y_min + by.y,
            x_max: self.x_max + by.x,
            y_max: self.y_max + by.y,
        }
    }

    pub fn contains(&self, p: Position) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }

    pub fn inside(&self, r: &Region) -> bool {
        r.x1 <= self.x_min && self.x_max <= r.x2 && r.y1 <= self.y_min && self.y_max <= r.y2
    }

    pub fn disjoint(&self, r: &Region) -> bool {
        self.x_max < r.x1 || r.x2 < self.x_min || self.y_max < r.y1 || r.y2 < self.y_min
    }

    /// Per-axis interval containment.
    pub fn within(&self, o: &BoundingBox) -> bool {
        o.x_min <= self.x_min && self.x_max <= o.x_max && o.y_min <= self.y_min && self.y_max <= o.y_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_parse_and_validate() {
        let r: Region = "1,2,3,4".parse().unwrap();
        assert_eq!(r, Region::new(1, 2, 3, 4).unwrap());
        assert!("3,0,1,4".parse::<Region>().is_err());
        assert!("1,2,3".parse::<Region>().is_err());
        assert!("a,b,c,d".parse::<Region>().is_err());
    }

    #[test]
    fn closed_bounds() {
        let r = Region::new(0, 0, 2, 2).unwrap();
        assert!(r.contains(Position::new(0, 0)));
        assert!(r.contains(Position::new(2, 2)));
        assert!(!r.contains(Position::new(3, 2)));
    }

    #[test]
    fn expansion_clamps_to_grid() {
        let r = Region::new(5, 5, 6, 6).unwrap();
        assert_eq!(r.expand_clamped(10, 8, 100), Some(Region::new(0, 0, 8, 16).unwrap()));
        let outside = Region::new(50, 50, 60, 60).unwrap();
        assert_eq!(outside.expand_clamped(1, 10, 10), None);
    }

    #[test]
    fn box_relations() {
        let r = Region::new(0, 0, 10, 10).unwrap();
        let mut b = BoundingBox::point(Position::new(1, 1));
        assert!(b.inside(&r));
        b.include(Position::new(11, 5));
        assert!(!b.inside(&r) && !b.disjoint(&r));
        assert!(BoundingBox::point(Position::new(-1, 3)).disjoint(&r));
    }
}
