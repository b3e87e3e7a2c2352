//! The six-ray contour, the sectors D1..D4 between its rays, and oriented
//! quadrature grids on it.
//!
//! Rays at angles 0, 2pi/3, -2pi/3 point away from the origin and rays at
//! pi/3, pi, -pi/3 point towards it, so that D1 and D3 lie on the left.

use crate::core::mat2::{C64, I};
use crate::core::panel::gauss_legendre;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const RAY_TOL: f64 = 1e-12;

/// One of the six rays, indexed counter-clockwise from angle 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RayId(pub u8);

impl RayId {
    pub const ALL: [RayId; 6] = [RayId(0), RayId(1), RayId(2), RayId(3), RayId(4), RayId(5)];

    /// Angle in (-pi, pi].
    pub fn angle(self) -> f64 {
        match self.0 {
            0 => 0.0,
            1 => PI / 3.0,
            2 => 2.0 * PI / 3.0,
            3 => PI,
            4 => -2.0 * PI / 3.0,
            _ => -PI / 3.0,
        }
    }

    /// Unit vector along the ray, pointing away from 0.
    pub fn dir(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.5, 0.75f64.sqrt()),
            2 => C64::new(-0.5, 0.75f64.sqrt()),
            3 => C64::new(-1.0, 0.0),
            4 => C64::new(-0.5, -(0.75f64.sqrt())),
            _ => C64::new(0.5, -(0.75f64.sqrt())),
        }
    }

    /// +1 when the contour runs outward along this ray, -1 inward.
    pub fn orientation(self) -> f64 {
        if self.0 % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// The image ray under k -> -conj(k).
    pub fn mirror(self) -> RayId {
        RayId(match self.0 {
            0 => 3,
            1 => 2,
            2 => 1,
            3 => 0,
            4 => 5,
            _ => 4,
        })
    }

    /// The image ray under k -> conj(k).
    pub fn conj(self) -> RayId {
        RayId((6 - self.0) % 6)
    }

    pub fn is_real(self) -> bool {
        self.0 == 0 || self.0 == 3
    }

    /// Rays bounding D1 (lower half plane, angles -pi/3 and -2pi/3).
    pub fn bounds_d1(self) -> bool {
        self.0 == 4 || self.0 == 5
    }

    /// Rays bounding D4 (upper half plane, angles pi/3 and 2pi/3).
    pub fn bounds_d4(self) -> bool {
        self.0 == 1 || self.0 == 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    D1,
    D2,
    D3,
    D4,
    Ray(RayId),
    Origin,
}

impl Region {
    /// D+ = D1 u D3.
    pub fn is_plus(self) -> bool {
        matches!(self, Region::D1 | Region::D3)
    }
}

pub fn classify(k: C64) -> Region {
    if k.norm() == 0.0 {
        return Region::Origin;
    }
    let a = k.arg();
    for r in RayId::ALL {
        let mut d = (a - r.angle()).abs();
        if d > PI {
            d = 2.0 * PI - d;
        }
        if d < RAY_TOL {
            return Region::Ray(r);
        }
    }
    let k3 = k * k * k;
    match (k.im > 0.0, k3.im > 0.0) {
        (false, true) => Region::D1,
        (false, false) => Region::D2,
        (true, true) => Region::D3,
        (true, false) => Region::D4,
    }
}

/// True for k in the closure of D+ (D1, D3, their boundary rays, origin).
pub fn in_closed_plus(k: C64) -> bool {
    !matches!(classify(k), Region::D2 | Region::D4)
}

/// True for k in the closure of D- (D2, D4, rays, origin).
pub fn in_closed_minus(k: C64) -> bool {
    !matches!(classify(k), Region::D1 | Region::D3)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridParams {
    pub panels_per_ray: usize,
    pub nodes_per_panel: usize,
    #[serde(rename = "R_max")]
    pub r_max: f64,
    pub grading: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { panels_per_ray: 16, nodes_per_panel: 16, r_max: 60.0, grading: 1.5 }
    }
}

/// Quadrature on the six rays truncated at radius `r_max`. All rays share the
/// same radial nodes, so the node set is invariant under k -> -conj(k).
/// Node index = ray * per_ray + radial index.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ContourGrid {
    pub panels: Vec<(f64, f64)>,
    pub nodes_per_panel: usize,
    pub radial: Vec<f64>,
    pub radial_w: Vec<f64>,
    pub nodes: Vec<C64>,
    /// Oriented weights: sum w_i f(k_i) approximates the contour integral.
    pub weights: Vec<C64>,
    pub r_max: f64,
}

impl ContourGrid {
    pub fn build(p: &GridParams) -> Result<Self> {
        if p.panels_per_ray < 2 || p.nodes_per_panel < 4 || !(p.r_max > 1.0) || !(p.grading > 1.0) {
            return Err(Error::BadParams(format!(
                "grid needs panels_per_ray >= 2, nodes_per_panel >= 4, R_max > 1, grading > 1; got {p:?}"
            )));
        }
        let r0 = p.r_max * p.grading.powi(-(p.panels_per_ray as i32 - 1));
        let mut edges = vec![0.0, r0];
        for i in 1..p.panels_per_ray {
            edges.push(r0 * p.grading.powi(i as i32));
        }
        *edges.last_mut().unwrap() = p.r_max;
        let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
        ContourGrid::from_panels(panels, p.nodes_per_panel)
    }

    /// Grid from explicit radial panels [a, b] (ascending, starting at 0).
    pub fn from_panels(panels: Vec<(f64, f64)>, nodes_per_panel: usize) -> Result<Self> {
        if panels.is_empty() || panels[0].0 != 0.0 || panels.iter().any(|(a, b)| !(b > a)) {
            return Err(Error::BadParams("radial panels must be nonempty, ascending, from 0".into()));
        }
        if nodes_per_panel < 2 {
            return Err(Error::BadParams("nodes_per_panel must be >= 2".into()));
        }
        let g = gauss_legendre(nodes_per_panel);
        let mut radial = Vec::new();
        let mut radial_w = Vec::new();
        for &(a, b) in &panels {
            let h = 0.5 * (b - a);
            for (x, w) in g.0.iter().zip(&g.1) {
                radial.push(a + h * (x + 1.0));
                radial_w.push(h * w);
            }
        }
        let mut nodes = Vec::with_capacity(6 * radial.len());
        let mut weights = Vec::with_capacity(6 * radial.len());
        for r in RayId::ALL {
            let d = r.dir();
            for (rho, w) in radial.iter().zip(&radial_w) {
                nodes.push(d * *rho);
                weights.push(d * (w * r.orientation()));
            }
        }
        let r_max = panels.last().unwrap().1;
        Ok(ContourGrid { panels, nodes_per_panel, radial, radial_w, nodes, weights, r_max })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn per_ray(&self) -> usize {
        self.radial.len()
    }

    pub fn ray_of(&self, i: usize) -> RayId {
        RayId((i / self.per_ray()) as u8)
    }

    pub fn radial_index(&self, i: usize) -> usize {
        i % self.per_ray()
    }

    pub fn index(&self, ray: RayId, j: usize) -> usize {
        ray.0 as usize * self.per_ray() + j
    }

    /// Index of the node at -conj(k_i).
    pub fn mirror(&self, i: usize) -> usize {
        self.index(self.ray_of(i).mirror(), self.radial_index(i))
    }

    /// Oriented quadrature sum.
    pub fn integrate(&self, f: &[C64]) -> C64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(C64) -> C64) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(k, w)| f(*k) * w).sum()
    }

    /// Distance from z to the truncated contour.
    pub fn distance(&self, z: C64) -> f64 {
        RayId::ALL
            .iter()
            .map(|r| {
                let d = r.dir();
                let s = (z * d.conj()).re.clamp(0.0, self.r_max);
                (z - d * s).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Radial interpolation of values tabulated on one ray (length per_ray),
    /// using the Gauss-Legendre nodes of the panel containing rho.
    pub fn interp_radial(&self, vals: &[C64], rho: f64) -> Result<C64> {
        let n = self.nodes_per_panel;
        if !(0.0..=self.r_max * (1.0 + 1e-14)).contains(&rho) {
            return Err(Error::BadParams(format!("radius {rho} outside [0, {}]", self.r_max)));
        }
        let p = self.panels.iter().position(|(_, b)| rho <= *b).unwrap_or(self.panels.len() - 1);
        let x = &self.radial[p * n..(p + 1) * n];
        let f = &vals[p * n..(p + 1) * n];
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..n {
            let d = rho - x[j];
            if d == 0.0 {
                return Ok(f[j]);
            }
            let w = (0..n).filter(|&i| i != j).fold(1.0, |acc, i| acc / (x[j] - x[i])) / d;
            num += f[j] * w;
            den += w;
        }
        Ok(num / den)
    }

    /// Spacing of the radial panel containing rho.
    pub fn local_spacing(&self, rho: f64) -> f64 {
        let p = self
            .panels
            .iter()
            .find(|(a, b)| rho >= *a && rho <= *b)
            .copied()
            .unwrap_or(*self.panels.last().unwrap());
        (p.1 - p.0) / self.nodes_per_panel as f64
    }
}

/// 2 pi i, used throughout.
pub fn two_pi_i() -> C64 {
    I * (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::mat2::c;

    #[test]
    fn classify_examples() {
        assert_eq!(classify(c(0.0, -1.0)), Region::D1);
        assert_eq!(classify(C64::from_polar(1.0, -PI / 6.0)), Region::D2);
        assert_eq!(classify(c(0.0, 1.0)), Region::D4);
        assert_eq!(classify(C64::from_polar(2.0, PI / 6.0)), Region::D3);
        assert_eq!(classify(C64::from_polar(2.0, PI / 3.0)), Region::Ray(RayId(1)));
        assert_eq!(classify(c(-3.0, 0.0)), Region::Ray(RayId(3)));
        assert_eq!(classify(c(0.0, 0.0)), Region::Origin);
    }

    #[test]
    fn grid_nodes_lie_on_their_rays() {
        let g = ContourGrid::build(&GridParams { panels_per_ray: 6, nodes_per_panel: 8, r_max: 20.0, grading: 2.0 })
            .unwrap();
        for i in 0..g.len() {
            assert_eq!(classify(g.nodes[i]), Region::Ray(g.ray_of(i)));
            let m = g.mirror(i);
            assert!((g.nodes[m] + g.nodes[i].conj()).norm() < 1e-13);
        }
        assert!(ContourGrid::build(&GridParams { panels_per_ray: 1, ..GridParams::default() }).is_err());
        for r in RayId::ALL {
            assert!((r.conj().dir() - r.dir().conj()).norm() < 1e-15);
        }
        let v: Vec<C64> = g.radial.iter().map(|x| c(x * x * x, (-0.1 * x).exp())).collect();
        let z = g.interp_radial(&v, 7.3).unwrap();
        assert!((z - c(7.3f64.powi(3), (-0.73f64).exp())).norm() < 1e-10, "{z}");
    }

    #[test]
    fn residue_oracle() {
        let g = ContourGrid::build(&GridParams { panels_per_ray: 24, nodes_per_panel: 16, r_max: 1e4, grading: 1.6 })
            .unwrap();
        let z = c(0.3, 0.9);
        // z in D4 lies right of the contour, conj z in D1 left of it
        let s = g.integrate_fn(|k| 1.0 / (k - z) - 1.0 / (k - z.conj())) / two_pi_i();
        assert!((s - c(-1.0, 0.0)).norm() < 1e-6, "{s}");
        let q = g.integrate_fn(|k| 1.0 / ((k - z) * (k - z)));
        assert!(q.norm() < 1e-8, "{q}");
    }
}
