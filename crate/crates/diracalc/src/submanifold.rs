//! Embedded submanifolds X ⊂ ℝⁿ (affine coordinate slices and polynomial
//! graphs over a coordinate subspace), coordinate projections, and linear
//! coordinate changes. These are the only shapes of i: X → M and
//! p: X → Y the calculator supports; they cover every worked instance while
//! keeping restriction and quotienting purely substitutional.

use crate::cartan::GenSection;
use crate::error::{Error, Result};
use crate::lagrangian::Family;
use crate::poly::Polynomial;
use crate::probe::ProbePoint;
use crate::scalar::Scalar;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub enum SubmanifoldKind {
    /// x_j = c_j for each (j, c_j); the remaining coordinates are free.
    AffineSlice(BTreeMap<usize, Scalar>),
    /// x_j = g_j(x_B) for every j outside the base set B.
    Graph {
        base: Vec<usize>,
        dependents: BTreeMap<usize, Polynomial>,
    },
}

#[derive(Debug, Clone)]
pub struct Submanifold {
    ambient: usize,
    kind: SubmanifoldKind,
    /// Intrinsic coordinates of X as ambient indices, ascending.
    free: Vec<usize>,
}

impl Submanifold {
    pub fn slice(ambient: usize, fixed: BTreeMap<usize, Scalar>) -> Result<Self> {
        for &j in fixed.keys() {
            if j >= ambient {
                return Err(Error::IndexOutOfRange {
                    index: j + 1,
                    dim: ambient,
                });
            }
        }
        let free = (0..ambient).filter(|j| !fixed.contains_key(j)).collect();
        Ok(Submanifold {
            ambient,
            kind: SubmanifoldKind::AffineSlice(fixed),
            free,
        })
    }

    pub fn graph(
        ambient: usize,
        base: Vec<usize>,
        dependents: BTreeMap<usize, Polynomial>,
    ) -> Result<Self> {
        let mut sorted = base.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != base.len() {
            return Err(Error::Document("repeated base coordinate".into()));
        }
        for &j in sorted.iter().chain(dependents.keys()) {
            if j >= ambient {
                return Err(Error::IndexOutOfRange {
                    index: j + 1,
                    dim: ambient,
                });
            }
        }
        for &j in &sorted {
            if dependents.contains_key(&j) {
                return Err(Error::Document(format!(
                    "coordinate x{} is both base and dependent",
                    j + 1
                )));
            }
        }
        if sorted.len() + dependents.len() != ambient {
            return Err(Error::Document(
                "graph must assign every non-base coordinate".into(),
            ));
        }
        // Dependents may only use base variables.
        for (&j, g) in &dependents {
            for (m, _) in g.terms() {
                for (v, &e) in m.0.iter().enumerate() {
                    if e > 0 && !sorted.contains(&v) {
                        return Err(Error::Document(format!(
                            "graph value for x{} uses non-base variable x{}",
                            j + 1,
                            v + 1
                        )));
                    }
                }
            }
        }
        Ok(Submanifold {
            ambient,
            kind: SubmanifoldKind::Graph {
                base: sorted.clone(),
                dependents,
            },
            free: sorted,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Intrinsic coordinates as ambient indices, ascending.
    pub fn free_coords(&self) -> &[usize] {
        &self.free
    }

    /// The defining relations as a substitution: fixed/dependent coordinates
    /// expressed in the free ones.
    pub fn relations(&self) -> BTreeMap<usize, Polynomial> {
        match &self.kind {
            SubmanifoldKind::AffineSlice(fixed) => fixed
                .iter()
                .map(|(&j, c)| (j, Polynomial::constant(self.ambient, c.clone())))
                .collect(),
            SubmanifoldKind::Graph { dependents, .. } => dependents.clone(),
        }
    }

    /// Restrict a polynomial (in ambient variables) to X.
    pub fn restrict(&self, p: &Polynomial) -> Result<Polynomial> {
        p.substitute(&self.relations())
    }

    /// Tangent frame in ambient components, one generator per free
    /// coordinate: ∂_b + Σ_j ∂g_j/∂x_b · ∂_j.
    pub fn tangent_frame(&self) -> Result<Vec<Vec<Polynomial>>> {
        let n = self.ambient;
        let mut frame = Vec::with_capacity(self.free.len());
        for &b in &self.free {
            let mut v = vec![Polynomial::zero(n); n];
            v[b] = Polynomial::one(n);
            if let SubmanifoldKind::Graph { dependents, .. } = &self.kind {
                for (&j, g) in dependents {
                    v[j] = g.partial(b)?;
                }
            }
            frame.push(v);
        }
        Ok(frame)
    }

    /// Conormal frame in ambient components, one generator per defining
    /// relation: dx_j − dg_j.
    pub fn conormal_frame(&self) -> Result<Vec<Vec<Polynomial>>> {
        let n = self.ambient;
        let mut frame = Vec::new();
        match &self.kind {
            SubmanifoldKind::AffineSlice(fixed) => {
                for &j in fixed.keys() {
                    let mut v = vec![Polynomial::zero(n); n];
                    v[j] = Polynomial::one(n);
                    frame.push(v);
                }
            }
            SubmanifoldKind::Graph { dependents, .. } => {
                for (&j, g) in dependents {
                    let mut v = vec![Polynomial::zero(n); n];
                    v[j] = Polynomial::one(n);
                    for &b in &self.free {
                        v[b] = g.partial(b)?.neg();
                    }
                    frame.push(v);
                }
            }
        }
        Ok(frame)
    }

    /// Ambient-to-intrinsic variable map (None on fixed/dependent slots).
    pub fn var_map(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.ambient];
        for (i, &b) in self.free.iter().enumerate() {
            map[b] = Some(i);
        }
        map
    }

    /// Convert a section along X (ambient components, coefficients already
    /// restricted to base variables) to intrinsic components on X: the
    /// vector part keeps its base components, the covector part pulls back
    /// along the inclusion (for graphs, dx_j ↦ Σ_b ∂g_j/∂x_b dx_b).
    pub fn to_intrinsic(&self, s: &GenSection) -> Result<GenSection> {
        let map = self.var_map();
        let m = self.dim();
        let mut vec_out = Vec::with_capacity(m);
        let mut cov_out = Vec::with_capacity(m);
        for &b in &self.free {
            vec_out.push(s.vec[b].clone());
            let mut c = s.cov[b].clone();
            if let SubmanifoldKind::Graph { dependents, .. } = &self.kind {
                for (&j, g) in dependents {
                    c = c.add(&s.cov[j].mul(&g.partial(b)?)?)?;
                }
            }
            cov_out.push(c);
        }
        let remap = |p: &Polynomial| self.restrict(p)?.map_vars(m, &map);
        Ok(GenSection::new(
            vec_out.iter().map(&remap).collect::<Result<_>>()?,
            cov_out.iter().map(&remap).collect::<Result<_>>()?,
        ))
    }

    /// Lift an intrinsic probe point of X to an ambient point on X.
    pub fn lift_point(&self, pt: &ProbePoint) -> Result<ProbePoint> {
        assert_eq!(pt.len(), self.dim());
        let mut full = vec![Scalar::zero(); self.ambient];
        for (i, &b) in self.free.iter().enumerate() {
            full[b] = pt[i].clone();
        }
        for (j, rel) in self.relations() {
            full[j] = rel.eval(&full)?;
        }
        Ok(full)
    }
}

/// A surjective coordinate projection: keep `retained`, quotient out the
/// complementary (affine, hence connected) fibre directions.
#[derive(Debug, Clone)]
pub struct Projection {
    dim: usize,
    retained: Vec<usize>,
    fibers: Vec<usize>,
}

impl Projection {
    pub fn new(dim: usize, mut retained: Vec<usize>) -> Result<Self> {
        retained.sort_unstable();
        retained.dedup();
        for &j in &retained {
            if j >= dim {
                return Err(Error::IndexOutOfRange {
                    index: j + 1,
                    dim,
                });
            }
        }
        let fibers = (0..dim).filter(|j| !retained.contains(j)).collect();
        Ok(Projection {
            dim,
            retained,
            fibers,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Projection::new(dim, (0..dim).collect()).expect("identity projection")
    }

    pub fn source_dim(&self) -> usize {
        self.dim
    }

    pub fn target_dim(&self) -> usize {
        self.retained.len()
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn fibers(&self) -> &[usize] {
        &self.fibers
    }

    /// Source-to-target variable map (None on fibre slots).
    pub fn var_map(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.dim];
        for (i, &r) in self.retained.iter().enumerate() {
            map[r] = Some(i);
        }
        map
    }

    /// F = ker p_* as a frame of constant vector fields upstairs.
    pub fn fiber_frame(&self) -> Vec<Vec<Polynomial>> {
        self.fibers
            .iter()
            .map(|&f| {
                let mut v = vec![Polynomial::zero(self.dim); self.dim];
                v[f] = Polynomial::one(self.dim);
                v
            })
            .collect()
    }
}

/// Exact inverse of a scalar matrix, or `SingularCoordinateChange`.
pub fn invert_scalar_matrix(a: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let n = a.len();
    let mut aug: Vec<Vec<Scalar>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "square matrix required");
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j { Scalar::one() } else { Scalar::zero() });
            }
            r
        })
        .collect();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !aug[r][c].is_zero()) else {
            return Err(Error::SingularCoordinateChange);
        };
        aug.swap(c, p);
        let inv = aug[c][c].inv()?;
        for j in 0..2 * n {
            aug[c][j] = &aug[c][j] * &inv;
        }
        for r in 0..n {
            if r != c && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                for j in 0..2 * n {
                    let t = &aug[c][j] * &f;
                    aug[r][j] = &aug[r][j] - &t;
                }
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Apply the invertible linear coordinate change y = A·x to a family:
/// vector components transform by A, covector components by (A⁻¹)ᵀ, and
/// coefficients by the substitution x = A⁻¹·y.
pub fn linear_coordinate_change(fam: &Family, a: &[Vec<Scalar>]) -> Result<Family> {
    let n = fam.dim();
    if a.len() != n {
        return Err(Error::VarCountMismatch(a.len(), n));
    }
    let a_inv = invert_scalar_matrix(a)?;
    // x_j = Σ_k (A⁻¹)[j][k] · y_k
    let mut subst = BTreeMap::new();
    for j in 0..n {
        let mut q = Polynomial::zero(n);
        for (k, c) in a_inv[j].iter().enumerate() {
            q = q.add(&Polynomial::var(n, k).scale(c))?;
        }
        subst.insert(j, q);
    }
    let mut frame = Vec::with_capacity(fam.rank());
    for s in fam.frame() {
        let mut vec_out = Vec::with_capacity(n);
        let mut cov_out = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = Polynomial::zero(n);
            let mut c = Polynomial::zero(n);
            for j in 0..n {
                v = v.add(&s.vec[j].scale(&a[i][j]))?;
                c = c.add(&s.cov[j].scale(&a_inv[j][i]))?;
            }
            vec_out.push(v.substitute(&subst)?);
            cov_out.push(c.substitute(&subst)?);
        }
        frame.push(GenSection::new(vec_out, cov_out));
    }
    Family::with_rank(n, frame, fam.rank(), fam.label().cloned())
}
