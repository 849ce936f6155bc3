use serde::Serialize;

use super::ProfileError;

/// Uniform grid `ξ_j = -l + j/m`, `j = 0..=2lm`. Because `h = 1/m`, a unit
/// shift moves exactly `m` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub l: f64,
    pub m: usize,
    /// Nodes per half-width, `l * m`.
    half: usize,
}

impl Grid {
    pub fn new(l: f64, m: usize) -> Result<Self, ProfileError> {
        if m < 2 {
            return Err(ProfileError::BadGrid(format!("m must be at least 2 (got {m})")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(ProfileError::BadGrid(format!("l must be positive (got {l})")));
        }
        let lm = l * m as f64;
        let half = lm.round();
        if (lm - half).abs() > 1e-9 * lm.max(1.0) {
            return Err(ProfileError::BadGrid(format!(
                "l * m must be an integer (l = {l}, m = {m})"
            )));
        }
        Ok(Grid {
            l,
            m,
            half: half as usize,
        })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node position for any (possibly out-of-range) index.
    pub fn node(&self, j: isize) -> f64 {
        (j - self.half as isize) as f64 / self.m as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len() as isize).map(|j| self.node(j)).collect()
    }
}

/// Node values of a wave profile together with the extension rules used for
/// shifted reads: the upper solution `(1, e^{λ1 ξ})` left of the grid and the
/// end values held constant right of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub lambda1: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, lambda1: f64, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self, ProfileError> {
        if phi.len() != grid.len() || psi.len() != grid.len() {
            return Err(ProfileError::BadGrid(format!(
                "profile arrays have lengths {} and {}, grid has {} nodes",
                phi.len(),
                psi.len(),
                grid.len()
            )));
        }
        Ok(Profile {
            grid,
            lambda1,
            phi,
            psi,
        })
    }

    /// Profile filled from closures evaluated at the nodes.
    pub fn from_fn(
        grid: Grid,
        lambda1: f64,
        phi: impl Fn(f64) -> f64,
        psi: impl Fn(f64) -> f64,
    ) -> Self {
        let xs = grid.nodes();
        Profile {
            grid,
            lambda1,
            phi: xs.iter().map(|&x| phi(x)).collect(),
            psi: xs.iter().map(|&x| psi(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// `φ` at node index `j`, applying the extension rules outside the grid.
    #[inline]
    pub fn phi_at(&self, j: isize) -> f64 {
        if j < 0 {
            1.0
        } else if j as usize >= self.len() {
            self.phi[self.len() - 1]
        } else {
            self.phi[j as usize]
        }
    }

    #[inline]
    pub fn psi_at(&self, j: isize) -> f64 {
        if j < 0 {
            (self.lambda1 * self.grid.node(j)).exp()
        } else if j as usize >= self.len() {
            self.psi[self.len() - 1]
        } else {
            self.psi[j as usize]
        }
    }

    /// `(φ, ψ)` at an arbitrary `ξ`: linear interpolation between nodes and the
    /// extension rules outside `[-l, l]`.
    pub fn sample(&self, xi: f64) -> (f64, f64) {
        let l = self.grid.l;
        if xi < -l {
            return (1.0, (self.lambda1 * xi).exp());
        }
        let last = self.len() - 1;
        if xi >= l {
            return (self.phi[last], self.psi[last]);
        }
        let pos = (xi + l) * self.grid.m as f64;
        let j = (pos.floor() as usize).min(last - 1);
        let t = pos - j as f64;
        if t == 0.0 {
            return (self.phi[j], self.psi[j]);
        }
        (
            self.phi[j] + t * (self.phi[j + 1] - self.phi[j]),
            self.psi[j] + t * (self.psi[j + 1] - self.psi[j]),
        )
    }

    /// Sup-norm distance over the common grid (both components).
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.phi
            .iter()
            .zip(&other.phi)
            .chain(self.psi.iter().zip(&other.psi))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = Grid::new(40.0, 20).unwrap();
        assert_eq!(g.len(), 1601);
        assert_eq!(g.node(0), -40.0);
        assert_eq!(g.node(1600), 40.0);
        assert_eq!(g.node(800), 0.0);
        // Unit shift lands exactly on a node.
        assert_eq!(g.node(800 + 20), 1.0);
    }

    #[test]
    fn grid_rejects_fractional_lm() {
        assert!(Grid::new(40.05, 10).is_err());
        assert!(Grid::new(40.0, 1).is_err());
        assert!(Grid::new(0.25, 4).is_ok());
    }

    #[test]
    fn extension_rules() {
        let g = Grid::new(2.0, 2).unwrap();
        let p = Profile::from_fn(g, 0.5, |x| 0.5 - 0.1 * x, |x| 0.2 + 0.01 * x);
        assert_eq!(p.phi_at(-3), 1.0);
        assert_eq!(p.psi_at(-2), (0.5 * -3.0f64).exp());
        assert_eq!(p.phi_at(100), p.phi[8]);
        assert_eq!(p.sample(10.0), (p.phi[8], p.psi[8]));
        assert_eq!(p.sample(-2.0), (p.phi[0], p.psi[0]));
        let (a, _) = p.sample(0.25);
        assert!((a - 0.475).abs() < 1e-15);
    }
}
