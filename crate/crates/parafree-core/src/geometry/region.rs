use super::{BasePoint, GeometryError, GridSpec};

/// Truncated strip `S_r(t_0) \ S_rho(t_0)`: the time band
/// `(t_0 - r^2, t_0 - rho^2]` intersected with the grid box.
///
/// `rho = 0` is the full strip `S_r(t_0)`.
#[derive(Debug, Clone, Copy)]
pub struct StripRegion {
    pub z0: BasePoint,
    pub r: f64,
    pub rho: f64,
}

impl StripRegion {
    pub fn new(z0: BasePoint, r: f64, rho: f64) -> Result<Self, GeometryError> {
        if !(r > 0.0) || rho < 0.0 || rho > r {
            return Err(GeometryError::InvalidRegion(format!(
                "need 0 <= rho <= r with r > 0, got r={r}, rho={rho}"
            )));
        }
        Ok(Self { z0, r, rho })
    }

    pub fn full(z0: BasePoint, r: f64) -> Result<Self, GeometryError> {
        Self::new(z0, r, 0.0)
    }

    /// Time band `(t_lo, t_hi]` of the region.
    pub fn band(&self) -> (f64, f64) {
        (self.z0.t - self.r * self.r, self.z0.t - self.rho * self.rho)
    }

    /// Check the band lies inside the grid's time range.
    pub fn check_in_range(&self, grid: &GridSpec) -> Result<(), GeometryError> {
        let (t_lo, _) = self.band();
        if t_lo < grid.t_start - 1e-9 * grid.tau() {
            return Err(GeometryError::RegionOutOfRange {
                needed: t_lo,
                have: grid.t_start,
            });
        }
        Ok(())
    }
}
