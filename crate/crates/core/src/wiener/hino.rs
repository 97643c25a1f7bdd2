use serde::{Deserialize, Serialize};

use super::{sample_pinned, PathEnsemble};
use crate::error::{Error, Result};

/// An open domain `Omega` in the line or the plane, described by the signed
/// distance `q(x) = dist(x, Omega^c) - dist(x, Omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum DomainGeometry {
    Interval { lo: f64, hi: f64 },
    Disc { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
}

impl DomainGeometry {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("interval ({lo}, {hi}) is empty or unbounded")));
        }
        Ok(Self::Interval { lo, hi })
    }

    pub fn disc(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain {
                what: "disc radius",
                value: radius,
            });
        }
        Ok(Self::Disc { center, radius })
    }

    pub fn annulus(center: [f64; 2], inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::InvalidArgument(format!("annulus radii {inner}, {outer}")));
        }
        Ok(Self::Annulus { center, inner, outer })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Interval { lo, hi } => (x[0] - lo).min(hi - x[0]),
            Self::Disc { center, radius } => radius - (x[0] - center[0]).hypot(x[1] - center[1]),
            Self::Annulus { center, inner, outer } => {
                let r = (x[0] - center[0]).hypot(x[1] - center[1]);
                (r - inner).min(outer - r)
            }
        }
    }

    /// Reach of the closed domain; infinite for convex shapes.
    pub fn reach(&self) -> f64 {
        match *self {
            Self::Annulus { inner, .. } => inner,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HinoUchidaParams {
    pub n_paths: usize,
    pub n_steps: usize,
    /// Start and end points of the pinned paths.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HinoUchidaPoint {
    pub n: usize,
    /// `n P(0 <= F <= 1/n)`.
    pub bound: f64,
    pub std_err: f64,
}

/// Monte Carlo estimates of `n P_{a,b}(0 <= F <= 1/n)` with
/// `F(omega) = inf_t q(omega(t))`, the energies of the Lipschitz
/// approximations `f_n(F)` of the indicator of paths staying in `Omega`.
///
/// Each coordinate of a planar path is an independent Brownian bridge. The
/// infimum is taken over the time grid.
pub fn hino_uchida_estimator(
    domain: &DomainGeometry,
    n_list: &[usize],
    params: &HinoUchidaParams,
) -> Result<Vec<HinoUchidaPoint>> {
    let d = domain.dim();
    for (name, p) in [("a", &params.a), ("b", &params.b)] {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        let q = domain.signed_distance(p);
        if !(q > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} = {p:?} is not inside the domain")));
        }
    }
    if n_list.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let comps: Vec<PathEnsemble> = (0..d)
        .map(|k| sample_pinned(params.n_paths, params.n_steps, params.a[k], params.b[k], params.seed.wrapping_add(k as u64)))
        .collect::<Result<_>>()?;
    let first = comps[0].map_paths(|i, p0| {
        let mut buf = vec![0.0; params.n_steps + 1];
        let others: Vec<Vec<f64>> = comps[1..]
            .iter()
            .map(|c| {
                c.fill_path(i, &mut buf);
                buf.clone()
            })
            .collect();
        let mut x = [0.0; 2];
        let mut f = f64::INFINITY;
        for k in 0..p0.len() {
            x[0] = p0[k];
            for (j, o) in others.iter().enumerate() {
                x[j + 1] = o[k];
            }
            f = f.min(domain.signed_distance(&x[..d]));
        }
        f
    });
    let total = first.len() as f64;
    Ok(n_list
        .iter()
        .map(|&n| {
            let band = 1.0 / n as f64;
            let p = first.iter().filter(|&&f| (0.0..=band).contains(&f)).count() as f64 / total;
            HinoUchidaPoint {
                n,
                bound: n as f64 * p,
                std_err: n as f64 * (p * (1.0 - p) / total).sqrt(),
            }
        })
        .collect())
}

/// `F(omega)` for every path, exposed for diagnostics.
pub fn path_infima(domain: &DomainGeometry, params: &HinoUchidaParams) -> Result<Vec<f64>> {
    if domain.dim() != 1 {
        return Err(Error::InvalidArgument("path infima are exported for intervals only".into()));
    }
    let e = sample_pinned(params.n_paths, params.n_steps, params.a[0], params.b[0], params.seed)?;
    Ok(e.map_paths(|_, p| p.iter().fold(f64::INFINITY, |m, &v| m.min(domain.signed_distance(&[v])))))
}
