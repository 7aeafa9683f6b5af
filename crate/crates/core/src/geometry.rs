use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Point at parameter `t` along `self -> other`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

/// An open polyline. Zero or one vertex means zero length.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polyline {
    pub points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() < 2
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    /// Prefix of arc length `max(0, length - buffer)`.
    ///
    /// The cut point may fall inside a segment. A buffer of zero returns the
    /// polyline unchanged; a buffer at least the full length returns an empty
    /// polyline.
    pub fn truncate_from_end(&self, buffer: f64) -> Polyline {
        if buffer <= 0.0 {
            return self.clone();
        }
        let keep = self.length() - buffer;
        if !(keep > 0.0) {
            return Polyline::default();
        }
        let mut out = vec![self.points[0]];
        let mut walked = 0.0;
        for (a, b) in self.segments() {
            let len = a.distance(b);
            if walked + len >= keep {
                let t = if len > 0.0 { (keep - walked) / len } else { 0.0 };
                out.push(a.lerp(b, t.clamp(0.0, 1.0)));
                break;
            }
            walked += len;
            out.push(b);
        }
        Polyline::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_cases() {
        let line = Polyline::new(vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
        ]);
        assert_eq!(line.length(), 20.0);
        let prefix = line.truncate_from_end(10.0);
        assert_eq!(prefix.length(), 10.0);
        assert_eq!(prefix.points.last(), Some(&Point::new(10.0, 0.0)));

        let mid = line.truncate_from_end(15.0);
        assert_eq!(mid.points, vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0)]);

        assert_eq!(line.truncate_from_end(0.0), line);
        assert!(line.truncate_from_end(20.0).is_empty());
        assert_eq!(line.truncate_from_end(25.0).length(), 0.0);
    }
}
